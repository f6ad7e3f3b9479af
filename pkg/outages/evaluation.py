"""
Métricas de evaluación y reportes por evento.

    MAPE = 100/n · Σ |P(i) − P̂(i)| / P(i)     sobre las horas con P(i) ≠ 0
    R²   = 100 · (1 − Σ (P − P̂)² / Σ (P − P̄)²)
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from core.artifacts import read_json, write_json
from core.exceptions import MetricError, PipelineError

from .estimators import predict_matrix
from .features import FeatureMatrix
from .ingest import TIMESTAMP_FORMAT, PanelDataset, _as_utc

logger = logging.getLogger(__name__)

REPORT_SCHEMA = 'outage-report/1'
SERIES_COLUMNS = ('timestamp', 'actual', 'predicted')
IMPORTANCE_COLUMNS = ('feature', 'importance')


def _pair(actual, predicted):
    actual = np.asarray(actual, dtype=np.float64).ravel()
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    if actual.shape != predicted.shape:
        raise MetricError(f'series lengths differ: {actual.size} vs {predicted.size}')
    return actual, predicted


def mape(actual, predicted, return_excluded=False):
    """MAPE en porcentaje; las horas con valor real 0 se excluyen y se cuentan."""
    actual, predicted = _pair(actual, predicted)
    validos = actual != 0
    if not validos.any():
        raise MetricError('MAPE undefined: every actual value is zero')
    valor = float(np.mean(np.abs(actual[validos] - predicted[validos]) / actual[validos]) * 100.0)
    excluidos = int(actual.size - np.count_nonzero(validos))
    return (valor, excluidos) if return_excluded else valor


def r2(actual, predicted):
    actual, predicted = _pair(actual, predicted)
    if actual.size < 2:
        raise MetricError('R² undefined: need at least 2 points')
    total = float(np.sum((actual - actual.mean()) ** 2))
    if total == 0:
        raise MetricError('R² undefined: actual series is constant')
    residual = float(np.sum((actual - predicted) ** 2))
    return (1.0 - residual / total) * 100.0


@dataclass
class EvalReport:
    event_id: str
    model_kind: str
    timestamps: List[pd.Timestamp]
    actual: np.ndarray
    predicted: np.ndarray
    mape_pct: float
    r2_pct: float
    excluded_hours: int = 0
    county_id: str = ''

    def recompute(self):
        """Métricas recalculadas desde la serie guardada."""
        valor, excluidos = mape(self.actual, self.predicted, return_excluded=True)
        return {'mape_pct': valor, 'r2_pct': r2(self.actual, self.predicted), 'excluded_hours': excluidos}

    def metrics(self):
        return {
            'event_id': self.event_id,
            'model_kind': self.model_kind,
            'county_id': self.county_id,
            'mape_pct': self.mape_pct,
            'r2_pct': self.r2_pct,
            'excluded_hours': self.excluded_hours,
            'hours': len(self.timestamps),
        }

    def as_dict(self):
        datos = self.metrics()
        datos['schema'] = REPORT_SCHEMA
        datos['series'] = [
            {'timestamp': _as_utc(t).strftime(TIMESTAMP_FORMAT), 'actual': float(a), 'predicted': float(p)}
            for t, a, p in zip(self.timestamps, self.actual, self.predicted)
        ]
        return datos

    def save(self, path):
        return write_json(path, self.as_dict())

    @classmethod
    def load(cls, path):
        datos = read_json(path)
        if datos.get('schema') != REPORT_SCHEMA:
            raise PipelineError(f"unsupported report schema: {datos.get('schema')!r}")
        serie = datos['series']
        return cls(
            event_id=datos['event_id'],
            model_kind=datos['model_kind'],
            timestamps=[_as_utc(s['timestamp']) for s in serie],
            actual=np.array([s['actual'] for s in serie], dtype=np.float64),
            predicted=np.array([s['predicted'] for s in serie], dtype=np.float64),
            mape_pct=datos['mape_pct'],
            r2_pct=datos['r2_pct'],
            excluded_hours=datos['excluded_hours'],
            county_id=datos.get('county_id', ''),
        )


def evaluate_event(model, matrix: FeatureMatrix, panel: Optional[PanelDataset] = None,
                   event_id: str = 'event') -> EvalReport:
    """
    Predice hora por hora sobre las filas de la ventana del evento. Con `panel`
    el valor real se toma del panel; sin él, de la columna objetivo de la matriz.
    """
    predicho = np.asarray(predict_matrix(model, matrix), dtype=np.float64)
    if panel is not None:
        real = np.array([panel.outages[panel.county_index(c), panel.hour_index(t)] for c, t in matrix.keys])
    else:
        real = matrix.target.copy()
    valor, excluidos = mape(real, predicho, return_excluded=True)
    reporte = EvalReport(
        event_id=event_id,
        model_kind=model.kind,
        timestamps=[t for _, t in matrix.keys],
        actual=real,
        predicted=predicho,
        mape_pct=valor,
        r2_pct=r2(real, predicho),
        excluded_hours=excluidos,
        county_id=matrix.keys[0][0] if matrix.keys else '',
    )
    logger.info(
        'Evento %s con %s: MAPE %.2f%%, R² %.2f%% (%d horas, %d excluidas)',
        event_id, model.kind, reporte.mape_pct, reporte.r2_pct, len(real), excluidos,
    )
    return reporte


def _write_csv(df, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, lineterminator='\n')
    except OSError as exc:
        raise PipelineError(f'cannot write {path}: {exc}') from exc
    return path


def emit_plot_data(source, path):
    """
    Serie de un reporte (timestamp, actual, predicted) o vector de importancias
    (feature, importance) ordenado de mayor a menor; más un JSON al lado.
    Devuelve (csv_path, sidecar_path).
    """
    path = Path(path)
    sidecar = path.with_suffix('.json')
    if isinstance(source, EvalReport):
        df = pd.DataFrame({
            'timestamp': [_as_utc(t).strftime(TIMESTAMP_FORMAT) for t in source.timestamps],
            'actual': source.actual,
            'predicted': source.predicted,
        }, columns=list(SERIES_COLUMNS))
        meta = source.metrics()
    elif isinstance(source, dict):
        pares = sorted(source.items(), key=lambda kv: (-kv[1], kv[0]))
        df = pd.DataFrame(pares, columns=list(IMPORTANCE_COLUMNS))
        meta = {'features': len(pares), 'total': float(sum(v for _, v in pares))}
    else:
        raise PipelineError(f'cannot emit plot data for {type(source).__name__}')
    _write_csv(df, path)
    try:
        write_json(sidecar, meta)
    except OSError as exc:
        raise PipelineError(f'cannot write {sidecar}: {exc}') from exc
    return path, sidecar
