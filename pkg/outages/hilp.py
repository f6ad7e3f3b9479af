"""
Identificación de eventos HILP (alto impacto, baja probabilidad) y expansión con
análogos meteorológicos de la misma temporada.

    I^WX(c,t) = 1 si una tormenta reportada cubre (c,t)  (intervalo cerrado)
    I^HC(c,t) = 1 si y(c,t) ≥ Q_α, cuantil α de los cortes en horas de tormenta
    E_0       = {(c,t) : I^WX · I^HC = 1}
    A(c,t_ex) = K horas del mismo condado, mes ±1, con menor distancia climática
    E         = E_0 ∪ ⋃ A(c,t_ex)
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from core.exceptions import DataValidationError, PipelineError

from .ingest import WEATHER_FEATURES, CellState, PanelDataset, StormEvent, _as_utc, format_timestamp, to_local

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.7
DEFAULT_ANALOGS = 10
DEFAULT_UTC_OFFSET_HOURS = -5.0
AGGREGATIONS = ('hourly', 'daily')


@dataclass(frozen=True)
class HilpSeed:
    county_id: str
    t_ex: pd.Timestamp
    y_value: float

    @property
    def key(self):
        return (self.county_id, self.t_ex)

    @property
    def ref(self):
        return f'{self.county_id}@{format_timestamp(self.t_ex)}'


@dataclass(frozen=True)
class StandardizationParams:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        if np.any(~(np.asarray(self.sigma) > 0)):
            raise DataValidationError('standardization sigma must be positive')

    def transform(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mu) / self.sigma

    def as_dict(self):
        return {
            'features': list(WEATHER_FEATURES),
            'mu': [float(v) for v in self.mu],
            'sigma': [float(v) for v in self.sigma],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data['mu'], dtype=np.float64), np.array(data['sigma'], dtype=np.float64))


@dataclass
class ExtremeEventSet:
    seeds: List[HilpSeed]
    analogs: Dict[Tuple[str, pd.Timestamp], List[Tuple[str, pd.Timestamp]]] = field(default_factory=dict)
    quantile: float = float('nan')

    @property
    def union(self) -> FrozenSet[Tuple[str, pd.Timestamp]]:
        claves = {s.key for s in self.seeds}
        for lista in self.analogs.values():
            claves.update(lista)
        return frozenset(claves)

    def ordered_union(self):
        return sorted(self.union)

    def to_frame(self):
        """CSV del conjunto extremo: county_id, timestamp, origin ∈ {seed, analog}, seed_ref."""
        filas = {}
        for seed in self.seeds:
            filas[seed.key] = ('seed', seed.ref)
        for seed in self.seeds:
            for clave in self.analogs.get(seed.key, []):
                filas.setdefault(clave, ('analog', seed.ref))
        registros = [
            (c, format_timestamp(t), origen, ref)
            for (c, t), (origen, ref) in sorted(filas.items())
        ]
        return pd.DataFrame(registros, columns=['county_id', 'timestamp', 'origin', 'seed_ref'])

    @classmethod
    def from_frame(cls, df, quantile=float('nan')):
        """Reconstruye seeds y análogos desde el CSV (y_value de semillas queda en NaN si no está)."""
        seeds = []
        analogs = {}
        por_ref = {}
        for fila in df.itertuples(index=False):
            ts = _as_utc(fila.timestamp)
            if fila.origin == 'seed':
                valor = float(getattr(fila, 'y_value', float('nan')))
                seed = HilpSeed(str(fila.county_id), ts, valor)
                seeds.append(seed)
                por_ref[seed.ref] = seed.key
        for fila in df.itertuples(index=False):
            if fila.origin == 'analog':
                clave = por_ref.get(fila.seed_ref)
                if clave is None:
                    raise DataValidationError(f'analog references unknown seed {fila.seed_ref}')
                analogs.setdefault(clave, []).append((str(fila.county_id), _as_utc(fila.timestamp)))
        return cls(seeds=seeds, analogs=analogs, quantile=quantile)


# ======================================
# ⛈️ INDICADOR DE TORMENTA
# ======================================
def weather_indicator(storms: Iterable[StormEvent], county_id, t) -> int:
    """1 si alguna tormenta del condado cumple start ≤ t ≤ end."""
    t = _as_utc(t)
    for storm in storms:
        if storm.county_id == county_id and _as_utc(storm.start) <= t <= _as_utc(storm.end):
            return 1
    return 0


def storm_mask(panel: PanelDataset, storms: Iterable[StormEvent]) -> np.ndarray:
    """I^WX vectorizado sobre el panel; mismo intervalo cerrado que weather_indicator."""
    mask = np.zeros((panel.n_counties, panel.n_hours), dtype=bool)
    posicion = {c: i for i, c in enumerate(panel.counties)}
    horas = panel.hours.asi8
    for storm in storms:
        ci = posicion.get(storm.county_id)
        if ci is None:
            continue
        inicio = _as_utc(storm.start).value
        fin = _as_utc(storm.end).value
        lo = np.searchsorted(horas, inicio, side='left')
        hi = np.searchsorted(horas, fin, side='right')
        mask[ci, lo:hi] = True
    return mask


# ======================================
# 📈 CUANTIL Y SEMILLAS
# ======================================
def nearest_rank(values, alpha):
    """Estadístico de orden ceil(α·N) (α=0 devuelve el mínimo)."""
    if not 0.0 <= alpha <= 1.0:
        raise PipelineError(f'alpha must be in [0, 1], got {alpha}')
    ordenados = np.sort(np.asarray(values, dtype=np.float64))
    n = ordenados.size
    if n == 0:
        raise PipelineError('empty storm-hour set: quantile undefined')
    # tolerancia para que 0.7*10 no salte a 8 por redondeo binario
    rango = math.ceil(alpha * n - 1e-9)
    return float(ordenados[min(max(rango, 1), n) - 1])


def storm_hour_values(panel: PanelDataset, storms: Iterable[StormEvent]):
    mask = storm_mask(panel, storms) & (panel.outage_state == CellState.PRESENT)
    return mask, panel.outages[mask]


def outage_quantile(panel: PanelDataset, storms: Iterable[StormEvent], alpha: float = DEFAULT_ALPHA) -> float:
    _, valores = storm_hour_values(panel, list(storms))
    if valores.size == 0:
        raise PipelineError('empty storm-hour set: no observed outage under a reported storm')
    return nearest_rank(valores, alpha)


def identify_seeds(panel: PanelDataset, storms: Iterable[StormEvent], alpha: float = DEFAULT_ALPHA) -> List[HilpSeed]:
    storms = list(storms)
    mask, valores = storm_hour_values(panel, storms)
    if valores.size == 0:
        raise PipelineError('empty storm-hour set: no observed outage under a reported storm')
    q = nearest_rank(valores, alpha)
    seleccion = mask & (panel.outages >= q)
    seeds = [
        HilpSeed(panel.counties[c], panel.hours[t], float(panel.outages[c, t]))
        for c, t in zip(*np.nonzero(seleccion))
    ]
    logger.info('Q_%.2f = %s; %d semillas HILP de %d horas de tormenta', alpha, q, len(seeds), valores.size)
    return seeds


# ======================================
# 🍂 TEMPORADA Y ANÁLOGOS
# ======================================
def local_months(panel: PanelDataset, utc_offset_hours=DEFAULT_UTC_OFFSET_HOURS):
    return to_local(panel.hours, utc_offset_hours).month.to_numpy()


def _month_gap(meses, m0):
    d = np.abs(meses - m0)
    return np.minimum(d, 12 - d)


def _candidate_hours(panel, t_index, season_window, meses):
    cercanos = _month_gap(meses, meses[t_index]) <= season_window
    cercanos[t_index] = False
    return np.flatnonzero(cercanos)


def seasonal_candidates(county_id, t_ex, panel: PanelDataset, season_window: int = 1,
                        utc_offset_hours=DEFAULT_UTC_OFFSET_HOURS):
    """Horas del mismo condado cuyo mes local está a ±season_window del mes de t_ex (con vuelta de año)."""
    panel.county_index(county_id)
    t_index = panel.hour_index(t_ex)
    meses = local_months(panel, utc_offset_hours)
    indices = _candidate_hours(panel, t_index, season_window, meses)
    return frozenset((county_id, panel.hours[i]) for i in indices)


def weather_vectors(panel: PanelDataset, aggregation='hourly', utc_offset_hours=DEFAULT_UTC_OFFSET_HOURS):
    """
    Vectores x_{c,t}. Con aggregation='daily' cada hora recibe la media de su día
    local en el mismo condado.
    """
    if aggregation not in AGGREGATIONS:
        raise PipelineError(f'aggregation must be one of {AGGREGATIONS}')
    if np.any(panel.weather_state == CellState.MISSING):
        raise PipelineError('weather panel has missing cells; run impute first')
    x = np.asarray(panel.weather, dtype=np.float64)
    if aggregation == 'hourly':
        return x
    dias = to_local(panel.hours, utc_offset_hours).normalize()
    codigos, _ = pd.factorize(dias)
    salida = np.empty_like(x)
    for c in range(panel.n_counties):
        df = pd.DataFrame(x[c])
        salida[c] = df.groupby(codigos).transform('mean').to_numpy()
    return salida


def fit_standardization(panel: PanelDataset, aggregation='hourly',
                        utc_offset_hours=DEFAULT_UTC_OFFSET_HOURS) -> StandardizationParams:
    """μ y σ poblacional por variable sobre todo el panel (post-imputación)."""
    x = weather_vectors(panel, aggregation, utc_offset_hours).reshape(-1, len(WEATHER_FEATURES))
    mu = x.mean(axis=0)
    sigma = x.std(axis=0, ddof=0)
    for nombre, s in zip(WEATHER_FEATURES, sigma):
        if not s > 0:
            raise DataValidationError(f'zero variance: {nombre}', field=nombre)
    return StandardizationParams(mu, sigma)


def weather_distance(x1, x2, params: StandardizationParams) -> float:
    return float(np.linalg.norm(params.transform(x1) - params.transform(x2)))


def _analogs_for(ci, ti, k, z, meses, season_window):
    candidatos = _candidate_hours(None, ti, season_window, meses)
    if candidatos.size == 0 or k == 0:
        return np.zeros(0, dtype=np.int64)
    delta = np.sqrt(np.sum((z[ci, candidatos] - z[ci, ti]) ** 2, axis=1))
    # candidatos ya está en orden temporal: un sort estable desempata por hora más temprana
    orden = np.argsort(delta, kind='stable')[:k]
    return candidatos[orden]


def select_analogs(seed: HilpSeed, K: int, panel: PanelDataset, params: StandardizationParams,
                   season_window: int = 1, aggregation='hourly',
                   utc_offset_hours=DEFAULT_UTC_OFFSET_HOURS) -> List[Tuple[str, pd.Timestamp]]:
    if K < 0:
        raise PipelineError('K must be non-negative')
    ci = panel.county_index(seed.county_id)
    ti = panel.hour_index(seed.t_ex)
    z = params.transform(weather_vectors(panel, aggregation, utc_offset_hours))
    meses = local_months(panel, utc_offset_hours)
    indices = _analogs_for(ci, ti, K, z, meses, season_window)
    return [(seed.county_id, panel.hours[i]) for i in indices]


def build_extreme_set(panel: PanelDataset, storms: Sequence[StormEvent], alpha: float = DEFAULT_ALPHA,
                      K: int = DEFAULT_ANALOGS, season_window: int = 1, aggregation='hourly',
                      utc_offset_hours=DEFAULT_UTC_OFFSET_HOURS,
                      params: StandardizationParams = None) -> ExtremeEventSet:
    storms = list(storms)
    seeds = identify_seeds(panel, storms, alpha)
    q = outage_quantile(panel, storms, alpha)
    if params is None:
        params = fit_standardization(panel, aggregation, utc_offset_hours)
    z = params.transform(weather_vectors(panel, aggregation, utc_offset_hours))
    meses = local_months(panel, utc_offset_hours)
    analogs = {}
    for seed in seeds:
        ci = panel.county_index(seed.county_id)
        ti = panel.hour_index(seed.t_ex)
        indices = _analogs_for(ci, ti, K, z, meses, season_window)
        analogs[seed.key] = [(seed.county_id, panel.hours[i]) for i in indices]
    conjunto = ExtremeEventSet(seeds=seeds, analogs=analogs, quantile=q)
    logger.info(
        'Conjunto extremo: %d semillas, %d horas únicas (K=%d, ventana ±%d meses)',
        len(seeds), len(conjunto.union), K, season_window,
    )
    return conjunto
