"""
Matriz de entrenamiento y grafo espacio-temporal.

Cada fila (c, t) reúne:
    y_lag1..y_lagN                  cortes en t-1 .. t-N
    <clima>_lag0..lagN              8 variables de clima en t .. t-N (lag0 opcional)
    socioeconómicas                 ingreso, desempleo, antigüedad de edificios
    share_<categoría>               participación de cada tipo de infraestructura
    month_01..month_12              mes local de t (one-hot)
La fila nunca lee valores posteriores a t.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from core.artifacts import read_json, write_json
from core.exceptions import DataValidationError, PipelineError

from .hilp import DEFAULT_UTC_OFFSET_HOURS, ExtremeEventSet
from .ingest import (
    BUILDING_AGE_COLUMNS, INFRA_CATEGORIES, TIMESTAMP_FORMAT, WEATHER_FEATURES,
    CellState, CountyStatic, PanelDataset, _as_utc, to_local,
)

logger = logging.getLogger(__name__)

EARTH_RADIUS_MILES = 3958.8
DEFAULT_RADIUS_MILES = 50.0
SOCIO_COLUMNS = ('avg_household_income', 'unemployment_rate') + BUILDING_AGE_COLUMNS
INFRA_SHARE_COLUMNS = tuple(f'share_{cat}' for cat in INFRA_CATEGORIES)
MONTH_COLUMNS = tuple(f'month_{m:02d}' for m in range(1, 13))
KEY_COLUMNS = ('county_id', 'timestamp_utc')
TARGET_COLUMN = 'target'


@dataclass(frozen=True)
class LagConfig:
    n: int = 24
    include_current_weather: bool = True

    def __post_init__(self):
        if int(self.n) < 1:
            raise PipelineError('lag depth n must be >= 1')

    @property
    def weather_lags(self):
        return tuple(range(0 if self.include_current_weather else 1, self.n + 1))

    def as_dict(self):
        return {'n': self.n, 'include_current_weather': self.include_current_weather}


def feature_columns(lag_cfg: LagConfig) -> Tuple[str, ...]:
    """Orden fijo de columnas de la matriz."""
    columnas = [f'y_lag{k}' for k in range(1, lag_cfg.n + 1)]
    for nombre in WEATHER_FEATURES:
        columnas.extend(f'{nombre}_lag{k}' for k in lag_cfg.weather_lags)
    return tuple(columnas) + SOCIO_COLUMNS + INFRA_SHARE_COLUMNS + MONTH_COLUMNS


@dataclass
class FeatureMatrix:
    keys: List[Tuple[str, pd.Timestamp]]
    columns: Tuple[str, ...]
    values: np.ndarray
    target: np.ndarray
    lag_cfg: LagConfig = field(default_factory=LagConfig)
    dropped: int = 0
    excluded: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(len(self.keys), len(self.columns))
        self.target = np.asarray(self.target, dtype=np.float64).reshape(len(self.keys))

    @property
    def n_rows(self):
        return len(self.keys)

    @property
    def n_features(self):
        return len(self.columns)

    @property
    def timestamps(self):
        return pd.DatetimeIndex([t for _, t in self.keys])

    def column_index(self, name):
        return self.columns.index(name)

    def subset(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return FeatureMatrix(
            keys=[k for k, m in zip(self.keys, mask) if m],
            columns=self.columns,
            values=self.values[mask],
            target=self.target[mask],
            lag_cfg=self.lag_cfg,
        )

    def to_frame(self):
        df = pd.DataFrame(self.values, columns=list(self.columns))
        df.insert(0, 'timestamp_utc', [
            '' if pd.isna(t) else _as_utc(t).strftime(TIMESTAMP_FORMAT) for _, t in self.keys
        ])
        df.insert(0, 'county_id', [c for c, _ in self.keys])
        df[TARGET_COLUMN] = self.target
        return df


# ======================================
# 🧮 CONSTRUCCIÓN DE FILAS
# ======================================
def _static_block(panel: PanelDataset, statics):
    estaticos = panel.statics if statics is None else (
        statics if isinstance(statics, Mapping) else {s.county_id: s for s in statics}
    )
    bloque = np.zeros((panel.n_counties, len(SOCIO_COLUMNS) + len(INFRA_SHARE_COLUMNS)))
    for ci, county_id in enumerate(panel.counties):
        s: CountyStatic = estaticos[county_id]
        bloque[ci] = s.socio_economic_vector() + s.infrastructure_vector()
    return bloque


def _rows(panel, ci, ti, lag_cfg, statics, utc_offset_hours):
    """Arma valores, objetivo y la máscara de filas con historia completa."""
    n = lag_cfg.n
    if np.any(panel.weather_state == CellState.MISSING):
        raise PipelineError('weather panel has missing cells; run impute first')
    con_historia = ti >= n
    ci, ti = ci[con_historia], ti[con_historia]

    y_lags = np.arange(1, n + 1)
    y_idx = ti[:, None] - y_lags
    y_ok = np.all(panel.outage_state[ci[:, None], y_idx] != CellState.MISSING, axis=1)
    y_ok &= panel.outage_state[ci, ti] != CellState.MISSING
    ci, ti, y_idx = ci[y_ok], ti[y_ok], y_idx[y_ok]

    w_lags = np.array(lag_cfg.weather_lags)
    clima = panel.weather[ci[:, None], ti[:, None] - w_lags]
    clima = clima.transpose(0, 2, 1).reshape(len(ci), -1)

    meses = to_local(panel.hours[ti], utc_offset_hours).month.to_numpy()
    one_hot = np.zeros((len(ci), 12))
    one_hot[np.arange(len(ci)), meses - 1] = 1.0

    valores = np.hstack([panel.outages[ci[:, None], y_idx], clima, _static_block(panel, statics)[ci], one_hot])
    return ci, ti, valores, panel.outages[ci, ti].astype(np.float64)


def _in_window(hours, window):
    if window is None:
        return np.zeros(len(hours), dtype=bool)
    start, end = (_as_utc(x) for x in window)
    return np.asarray((hours >= start) & (hours <= end))


def _lag_window_overlaps(hours, window, n):
    """Filas cuya ventana de rezagos [t−n, t] toca la ventana cerrada `window`."""
    if window is None:
        return np.zeros(len(hours), dtype=bool)
    start, end = (_as_utc(x) for x in window)
    return np.asarray((hours >= start) & (hours - pd.Timedelta(hours=n) <= end))


def _assemble(panel, ci, ti, lag_cfg, statics, utc_offset_hours, exclude=None):
    candidatas = len(ci)
    fuera = _lag_window_overlaps(panel.hours[ti], exclude, lag_cfg.n)
    ci, ti = ci[~fuera], ti[~fuera]
    excluded = int(np.count_nonzero(fuera))
    ci_ok, ti_ok, valores, objetivo = _rows(panel, ci, ti, lag_cfg, statics, utc_offset_hours)
    dropped = candidatas - excluded - len(ci_ok)
    if dropped:
        logger.warning('%d filas descartadas por historia de rezagos incompleta (n=%d)', dropped, lag_cfg.n)
    if len(ci_ok) == 0:
        raise PipelineError('empty feature matrix: no row has a complete lag history')
    keys = [(panel.counties[c], panel.hours[t]) for c, t in zip(ci_ok, ti_ok)]
    return FeatureMatrix(keys, feature_columns(lag_cfg), valores, objetivo, lag_cfg, dropped, excluded)


def build_feature_matrix(panel: PanelDataset, extreme_set: ExtremeEventSet, statics=None,
                         lag_cfg: LagConfig = None, exclude=None,
                         utc_offset_hours=DEFAULT_UTC_OFFSET_HOURS) -> FeatureMatrix:
    """
    Una fila por (c, t) del conjunto extremo con historia completa, en orden
    (condado, hora). `exclude` es una ventana (start, end) cerrada: se omiten, en
    todos los condados, las filas cuya hora o cuyos rezagos caen dentro de ella.
    """
    lag_cfg = lag_cfg or LagConfig()
    claves = extreme_set.ordered_union()
    if not claves:
        raise PipelineError('empty extreme event set')
    ci = np.array([panel.county_index(c) for c, _ in claves], dtype=np.int64)
    ti = np.array([panel.hour_index(t) for _, t in claves], dtype=np.int64)
    matriz = _assemble(panel, ci, ti, lag_cfg, statics, utc_offset_hours, exclude)
    logger.info(
        'Matriz de entrenamiento: %d filas × %d columnas (%d sin historia, %d en ventana excluida)',
        matriz.n_rows, matriz.n_features, matriz.dropped, matriz.excluded,
    )
    return matriz


def build_window_matrix(panel: PanelDataset, statics, lag_cfg: LagConfig, county_id, start, end,
                        utc_offset_hours=DEFAULT_UTC_OFFSET_HOURS) -> FeatureMatrix:
    """Filas para cada hora de la ventana [start, end] de un condado (entrada de evaluación)."""
    lag_cfg = lag_cfg or LagConfig()
    c = panel.county_index(county_id)
    ti = np.flatnonzero(_in_window(panel.hours, (start, end))).astype(np.int64)
    if ti.size == 0:
        raise PipelineError(f'event window {start} .. {end} lies outside the panel')
    ci = np.full(ti.size, c, dtype=np.int64)
    return _assemble(panel, ci, ti, lag_cfg, statics, utc_offset_hours)


# ======================================
# 📏 ESCALADO MIN-MAX
# ======================================
class MinMaxScaler:
    """(v - min) / (max - min) por columna; columnas constantes van a 0. Sin recorte."""

    def __init__(self, data_min=None, data_max=None):
        self.data_min = None if data_min is None else np.asarray(data_min, dtype=np.float64)
        self.data_max = None if data_max is None else np.asarray(data_max, dtype=np.float64)

    @property
    def fitted(self):
        return self.data_min is not None and self.data_max is not None

    @property
    def constant(self):
        self._check()
        return self.data_max == self.data_min

    def _check(self):
        if not self.fitted:
            raise PipelineError('scaler is not fitted')

    def fit(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            raise PipelineError('cannot fit a scaler on an empty matrix')
        self.data_min = values.min(axis=0)
        self.data_max = values.max(axis=0)
        return self

    def transform(self, values):
        self._check()
        values = np.asarray(values, dtype=np.float64)
        rango = self.data_max - self.data_min
        constante = rango == 0
        escalado = (values - self.data_min) / np.where(constante, 1.0, rango)
        return np.where(constante, 0.0, escalado)

    def inverse_transform(self, values):
        self._check()
        values = np.asarray(values, dtype=np.float64)
        return values * (self.data_max - self.data_min) + self.data_min

    def as_dict(self):
        self._check()
        return {
            'min': np.atleast_1d(self.data_min).tolist(),
            'max': np.atleast_1d(self.data_max).tolist(),
            'scalar': np.ndim(self.data_min) == 0,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('scalar'):
            return cls(data['min'][0], data['max'][0])
        return cls(data['min'], data['max'])


def fit_minmax(values) -> MinMaxScaler:
    return MinMaxScaler().fit(values)


def apply_minmax(scaler: Optional[MinMaxScaler], values):
    if scaler is None:
        raise PipelineError('scaler is not fitted')
    return scaler.transform(values)


def invert_minmax(scaler: Optional[MinMaxScaler], values):
    if scaler is None:
        raise PipelineError('scaler is not fitted')
    return scaler.inverse_transform(values)


# ======================================
# 🔁 SECUENCIAS PARA LA RED RECURRENTE
# ======================================
def to_sequences(values, columns: Sequence[str], lag_cfg: LagConfig) -> np.ndarray:
    """
    (N, D) → (N, pasos, d). Paso más antiguo primero: t-n, ..., t-1 y, si hay
    clima contemporáneo, t. Cada paso lleva el rezago de cortes (0 en t), el clima
    de esa hora y las columnas estáticas y de mes.
    """
    values = np.asarray(values, dtype=np.float64)
    posicion = {c: i for i, c in enumerate(columns)}
    estaticas = [posicion[c] for c in SOCIO_COLUMNS + INFRA_SHARE_COLUMNS + MONTH_COLUMNS]
    lags = sorted(lag_cfg.weather_lags, reverse=True)
    pasos = []
    for k in lags:
        y = values[:, posicion[f'y_lag{k}']] if k > 0 else np.zeros(len(values))
        clima = values[:, [posicion[f'{nombre}_lag{k}'] for nombre in WEATHER_FEATURES]]
        pasos.append(np.hstack([y[:, None], clima, values[:, estaticas]]))
    return np.stack(pasos, axis=1)


# ======================================
# 💾 PERSISTENCIA
# ======================================
def manifest_path_for(path):
    return Path(path).with_suffix('.json')


def write_feature_matrix(matrix: FeatureMatrix, path, scaler: MinMaxScaler = None,
                         target_scaler: MinMaxScaler = None):
    """CSV con claves, columnas en orden fijo y `target`, más un manifest JSON al lado."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    matrix.to_frame().to_csv(path, index=False, lineterminator='\n')
    manifest = {
        'columns': list(matrix.columns),
        'lag': matrix.lag_cfg.as_dict(),
        'rows': matrix.n_rows,
        'dropped': matrix.dropped,
        'excluded': matrix.excluded,
        'scaler': scaler.as_dict() if scaler is not None else None,
        'target_scaler': target_scaler.as_dict() if target_scaler is not None else None,
    }
    write_json(manifest_path_for(path), manifest)
    return path


def read_feature_matrix(path) -> FeatureMatrix:
    path = Path(path)
    if not path.exists():
        raise DataValidationError('file not found', path=path)
    manifest = read_json(manifest_path_for(path))
    columnas = tuple(manifest['columns'])
    df = pd.read_csv(
        path, dtype={'county_id': str, 'timestamp_utc': str}, keep_default_na=False,
        float_precision='round_trip',
    )
    esperadas = list(KEY_COLUMNS) + list(columnas) + [TARGET_COLUMN]
    if list(df.columns) != esperadas:
        raise DataValidationError('feature matrix columns do not match its manifest', row=1, path=path)
    tiempos = pd.to_datetime(df['timestamp_utc'].mask(df['timestamp_utc'] == ''), utc=True, format='ISO8601')
    keys = list(zip(df['county_id'].tolist(), tiempos))
    return FeatureMatrix(
        keys=keys,
        columns=columnas,
        values=df[list(columnas)].to_numpy(dtype=np.float64),
        target=df[TARGET_COLUMN].to_numpy(dtype=np.float64),
        lag_cfg=LagConfig(**manifest['lag']),
        dropped=manifest.get('dropped', 0),
        excluded=manifest.get('excluded', 0),
    )


def read_matrix_scalers(path):
    manifest = read_json(manifest_path_for(path))
    scaler = manifest.get('scaler')
    target_scaler = manifest.get('target_scaler')
    return (
        MinMaxScaler.from_dict(scaler) if scaler else None,
        MinMaxScaler.from_dict(target_scaler) if target_scaler else None,
    )


# ======================================
# 🌐 GRAFO ESPACIO-TEMPORAL
# ======================================
def haversine_miles(lat1, lon1, lat2, lon2):
    """Distancia de gran círculo en millas (admite arreglos)."""
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlambda = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dphi / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlambda / 2) ** 2
    return 2 * EARTH_RADIUS_MILES * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


@dataclass
class SpatioTemporalGraph:
    """
    Nodos (condado, hora). `adjacency` guarda los pares de condados a ≤ radio
    millas; cada par genera una arista espacial en cada hora del panel. Las aristas
    temporales unen horas consecutivas de un mismo condado.
    """
    counties: Tuple[str, ...]
    hours: pd.DatetimeIndex
    adjacency: nx.Graph
    node_features: np.ndarray
    feature_names: Tuple[str, ...]
    radius_miles: float = DEFAULT_RADIUS_MILES

    def node_id(self, county_id, t_index):
        return self.counties.index(county_id) * len(self.hours) + int(t_index)

    @property
    def n_nodes(self):
        return len(self.counties) * len(self.hours)

    def spatial_edges(self):
        pares = sorted(tuple(sorted(e)) for e in self.adjacency.edges())
        for t in self.hours:
            for a, b in pares:
                yield (a, b, t)

    def temporal_edges(self):
        for c in self.counties:
            for t0, t1 in zip(self.hours[:-1], self.hours[1:]):
                yield ((c, t0), (c, t1))

    @property
    def n_spatial_edges(self):
        return self.adjacency.number_of_edges() * len(self.hours)

    @property
    def n_temporal_edges(self):
        return len(self.counties) * max(len(self.hours) - 1, 0)

    def to_networkx(self) -> nx.DiGraph:
        """Grafo explícito: aristas espaciales en ambos sentidos, temporales hacia adelante."""
        g = nx.DiGraph()
        for ci, c in enumerate(self.counties):
            for ti, t in enumerate(self.hours):
                g.add_node((c, t), features=self.node_features[ci, ti])
        for a, b, t in self.spatial_edges():
            distancia = self.adjacency.edges[a, b]['distance_miles']
            g.add_edge((a, t), (b, t), kind='spatial', distance_miles=distancia)
            g.add_edge((b, t), (a, t), kind='spatial', distance_miles=distancia)
        for u, v in self.temporal_edges():
            g.add_edge(u, v, kind='temporal')
        return g


def county_adjacency(statics: Iterable[CountyStatic], radius_miles=DEFAULT_RADIUS_MILES) -> nx.Graph:
    lista = sorted(statics.values() if isinstance(statics, Mapping) else statics, key=lambda s: s.county_id)
    g = nx.Graph()
    for s in lista:
        g.add_node(s.county_id, lat=s.latitude, lon=s.longitude)
    lat = np.array([s.latitude for s in lista])
    lon = np.array([s.longitude for s in lista])
    for i, s in enumerate(lista):
        distancias = haversine_miles(lat[i], lon[i], lat[i + 1:], lon[i + 1:])
        for j in np.flatnonzero(distancias <= radius_miles):
            g.add_edge(s.county_id, lista[i + 1 + j].county_id, distance_miles=float(distancias[j]))
    return g


def build_graph(panel: PanelDataset, statics=None, radius_miles=DEFAULT_RADIUS_MILES) -> SpatioTemporalGraph:
    """Nodos con [cortes, clima] escalados min-max sobre todo el panel."""
    estaticos = panel.statics if statics is None else statics
    adyacencia = county_adjacency(estaticos, radius_miles)
    adyacencia.remove_nodes_from([n for n in list(adyacencia) if n not in panel.counties])
    crudos = np.concatenate([panel.outages[:, :, None], panel.weather], axis=2)
    planos = crudos.reshape(-1, crudos.shape[2])
    escalados = fit_minmax(planos).transform(planos).reshape(crudos.shape)
    grafo = SpatioTemporalGraph(
        counties=panel.counties,
        hours=panel.hours,
        adjacency=adyacencia,
        node_features=escalados,
        feature_names=('customers_out',) + WEATHER_FEATURES,
        radius_miles=radius_miles,
    )
    logger.info(
        'Grafo: %d nodos, %d aristas espaciales, %d temporales (radio %.0f mi)',
        grafo.n_nodes, grafo.n_spatial_edges, grafo.n_temporal_edges, radius_miles,
    )
    return grafo


def export_graph(graph: SpatioTemporalGraph, directory):
    """Escribe graph_nodes.csv y graph_edges.csv para un aprendiz de grafos externo."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n_c, n_t = len(graph.counties), len(graph.hours)
    nodos = pd.DataFrame(graph.node_features.reshape(n_c * n_t, -1), columns=list(graph.feature_names))
    nodos.insert(0, 'timestamp_utc', np.tile(graph.hours.strftime(TIMESTAMP_FORMAT).to_numpy(dtype=object), n_c))
    nodos.insert(0, 'county_id', np.repeat(np.array(graph.counties, dtype=object), n_t))
    nodos.insert(0, 'node_id', np.arange(n_c * n_t))

    pares = sorted(tuple(sorted(e)) for e in graph.adjacency.edges())
    filas = []
    for ti in range(n_t):
        for a, b in pares:
            filas.append((graph.node_id(a, ti), graph.node_id(b, ti), 'spatial',
                          graph.adjacency.edges[a, b]['distance_miles']))
    for c in graph.counties:
        for ti in range(n_t - 1):
            filas.append((graph.node_id(c, ti), graph.node_id(c, ti + 1), 'temporal', math.nan))
    aristas = pd.DataFrame(filas, columns=['source', 'target', 'kind', 'distance_miles'])

    nodes_path = directory / 'graph_nodes.csv'
    edges_path = directory / 'graph_edges.csv'
    nodos.to_csv(nodes_path, index=False, lineterminator='\n')
    aristas.to_csv(edges_path, index=False, lineterminator='\n')
    return nodes_path, edges_path
