"""
Utilidades para exportar la comparación de modelos a Excel y PDF.
"""
from pathlib import Path
from typing import Dict, Sequence, cast

from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter
from openpyxl.worksheet.worksheet import Worksheet
from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import PageBreak, Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from core.exceptions import PipelineError

from .evaluation import EvalReport
from .ingest import TIMESTAMP_FORMAT, _as_utc

TOP_IMPORTANCIAS = 15
ESTILO_TABLA = [
    ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
    ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
    ('ALIGN', (1, 1), (-1, -1), 'RIGHT'),
    ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
    ('FONTSIZE', (0, 0), (-1, 0), 10),
    ('FONTSIZE', (0, 1), (-1, -1), 8),
    ('BOTTOMPADDING', (0, 0), (-1, 0), 8),
    ('GRID', (0, 0), (-1, -1), 1, colors.HexColor('#BDC3C7')),
    ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, colors.HexColor('#ECF0F1')]),
]


def _fmt(valor, decimales=2):
    if valor is None:
        return 'N/A'
    return f'{valor:,.{decimales}f}'


def _filas_metricas(reportes: Sequence[EvalReport]):
    return [
        [r.model_kind, r.event_id, r.county_id, len(r.timestamps), r.excluded_hours, r.mape_pct, r.r2_pct]
        for r in reportes
    ]


class ExportadorReportesExcel:
    """
    Libro con una hoja de resumen, una hoja por modelo con la serie horaria y
    una hoja de importancias.
    """

    def __init__(self):
        self.color_header = 'FF3498DB'
        self.color_alterno = 'FFECF0F1'
        self.border_style = Border(
            left=Side(style='thin', color='FFBDC3C7'),
            right=Side(style='thin', color='FFBDC3C7'),
            top=Side(style='thin', color='FFBDC3C7'),
            bottom=Side(style='thin', color='FFBDC3C7'),
        )

    def _aplicar_estilo_header(self, ws, row_num, columns):
        for col_num in range(1, columns + 1):
            cell = ws.cell(row=row_num, column=col_num)
            cell.fill = PatternFill(start_color=self.color_header, end_color=self.color_header, fill_type='solid')
            cell.font = Font(bold=True, color='FFFFFFFF', size=11)
            cell.alignment = Alignment(horizontal='center', vertical='center')
            cell.border = self.border_style

    def _aplicar_estilo_datos(self, ws, start_row, end_row, columns):
        for row_num in range(start_row, end_row + 1):
            for col_num in range(1, columns + 1):
                cell = ws.cell(row=row_num, column=col_num)
                cell.border = self.border_style
                if row_num % 2 == 0:
                    cell.fill = PatternFill(start_color=self.color_alterno, end_color=self.color_alterno, fill_type='solid')

    def _ajustar_ancho_columnas(self, ws):
        for column in ws.columns:
            ancho = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
            ws.column_dimensions[get_column_letter(column[0].column)].width = min(ancho + 2, 40)

    def _tabla(self, ws, encabezado, filas, inicio=1):
        for col, titulo in enumerate(encabezado, start=1):
            ws.cell(row=inicio, column=col, value=titulo)
        self._aplicar_estilo_header(ws, inicio, len(encabezado))
        for i, fila in enumerate(filas, start=inicio + 1):
            for col, valor in enumerate(fila, start=1):
                ws.cell(row=i, column=col, value=valor)
        self._aplicar_estilo_datos(ws, inicio + 1, inicio + len(filas), len(encabezado))
        self._ajustar_ancho_columnas(ws)

    def generar_reporte_modelos(self, reportes: Sequence[EvalReport], importancias: Dict[str, float], path,
                                titulo='Comparación de modelos'):
        wb = Workbook()
        ws = cast(Worksheet, wb.active)
        ws.title = 'Resumen'
        ws['A1'] = titulo
        ws['A1'].font = Font(size=16, bold=True, color='FF2C3E50')
        self._tabla(
            ws, ['Modelo', 'Evento', 'Condado', 'Horas', 'Horas excluidas', 'MAPE (%)', 'R² (%)'],
            _filas_metricas(reportes), inicio=3,
        )
        for reporte in reportes:
            hoja = wb.create_sheet(title=f'Serie {reporte.model_kind}'[:31])
            filas = [
                [_as_utc(t).strftime(TIMESTAMP_FORMAT), float(a), float(p)]
                for t, a, p in zip(reporte.timestamps, reporte.actual, reporte.predicted)
            ]
            self._tabla(hoja, ['Hora (UTC)', 'Real', 'Predicho'], filas)
        if importancias:
            hoja = wb.create_sheet(title='Importancias')
            pares = sorted(importancias.items(), key=lambda kv: (-kv[1], kv[0]))
            self._tabla(hoja, ['Variable', 'Importancia'], [list(p) for p in pares])
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        wb.save(path)
        return path


class ExportadorReportesPDF:
    """
    PDF con resumen de métricas, serie horaria por modelo e importancias.
    """

    def __init__(self):
        self.styles = getSampleStyleSheet()
        self._crear_estilos_personalizados()

    def _crear_estilos_personalizados(self):
        self.styles.add(ParagraphStyle(
            name='TituloReporte',
            parent=self.styles['Title'],
            fontSize=18,
            textColor=colors.HexColor('#2C3E50'),
            spaceAfter=20,
            alignment=TA_CENTER,
            fontName='Helvetica-Bold',
        ))
        self.styles.add(ParagraphStyle(
            name='SubtituloReporte',
            parent=self.styles['Heading2'],
            fontSize=13,
            textColor=colors.HexColor('#34495E'),
            spaceAfter=10,
            spaceBefore=10,
            fontName='Helvetica-Bold',
        ))

    def _tabla(self, data, anchos, color):
        tabla = Table(data, colWidths=anchos, repeatRows=1)
        tabla.setStyle(TableStyle([('BACKGROUND', (0, 0), (-1, 0), colors.HexColor(color))] + ESTILO_TABLA))
        return tabla

    def generar_reporte_modelos(self, reportes: Sequence[EvalReport], importancias: Dict[str, float], path,
                                titulo='Comparación de modelos'):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        # invariant=1 fija fecha e id del documento
        doc = SimpleDocTemplate(str(path), pagesize=letter, topMargin=0.75 * inch, bottomMargin=0.75 * inch,
                                invariant=1)
        story = [Paragraph(titulo, self.styles['TituloReporte']), Spacer(1, 0.2 * inch)]

        story.append(Paragraph('Métricas por modelo', self.styles['SubtituloReporte']))
        data = [['Modelo', 'Evento', 'Condado', 'Horas', 'Excl.', 'MAPE (%)', 'R² (%)']]
        for fila in _filas_metricas(reportes):
            data.append([fila[0], fila[1], fila[2], str(fila[3]), str(fila[4]), _fmt(fila[5]), _fmt(fila[6])])
        story.append(self._tabla(data, [0.9 * inch, 1.2 * inch, 0.8 * inch, 0.6 * inch, 0.6 * inch,
                                        0.9 * inch, 0.9 * inch], '#3498DB'))

        if importancias:
            story.append(Spacer(1, 0.3 * inch))
            story.append(Paragraph(f'Importancia de variables (top {TOP_IMPORTANCIAS})', self.styles['SubtituloReporte']))
            pares = sorted(importancias.items(), key=lambda kv: (-kv[1], kv[0]))[:TOP_IMPORTANCIAS]
            data = [['Variable', 'Importancia']] + [[k, _fmt(v, 4)] for k, v in pares]
            story.append(self._tabla(data, [3 * inch, 1.5 * inch], '#27AE60'))

        for reporte in reportes:
            story.append(PageBreak())
            story.append(Paragraph(f'Serie horaria: {reporte.model_kind}', self.styles['SubtituloReporte']))
            data = [['Hora (UTC)', 'Real', 'Predicho']] + [
                [_as_utc(t).strftime('%d/%m/%Y %H:%M'), _fmt(a, 0), _fmt(p, 1)]
                for t, a, p in zip(reporte.timestamps, reporte.actual, reporte.predicted)
            ]
            story.append(self._tabla(data, [2 * inch, 1.3 * inch, 1.3 * inch], '#8E44AD'))
        doc.build(story)
        return path


def export_report_excel(reportes: Sequence[EvalReport], importancias: Dict[str, float], path):
    if not reportes:
        raise PipelineError('no evaluation reports to export')
    return ExportadorReportesExcel().generar_reporte_modelos(reportes, importancias, path)


def export_report_pdf(reportes: Sequence[EvalReport], importancias: Dict[str, float], path):
    if not reportes:
        raise PipelineError('no evaluation reports to export')
    return ExportadorReportesPDF().generar_reporte_modelos(reportes, importancias, path)
