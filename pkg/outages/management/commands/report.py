"""
Exporta la comparación de modelos: series para graficar, importancias, Excel y PDF.

Uso:
    python manage.py report
"""
from outages.management.base import PipelineCommand


class Command(PipelineCommand):
    help = 'Genera los CSV de gráficos y los reportes Excel/PDF'
    stage = 'report'
