"""
Ingesta de los cinco conjuntos de datos (cortes, clima, censo, infraestructura,
tormentas) y armado del panel condado × hora.

Esquemas CSV (UTF-8, separados por coma, marcas ISO-8601 en UTC):
    outages:        county_id,timestamp_utc,customers_out
    weather:        county_id,timestamp_utc,temp_f,precip_in,wind_kmh,gust_kmh,
                    swr_wm2,rh_pct,cloud_pct,pressure_hpa   (celda vacía = faltante)
    census:         county_id,lat,lon,income_usd,unemployment_pct,built_pre1960,
                    built_1960_1999,built_2000_plus
    infrastructure: county_id,poles,towers,substations,transformers,lines
    storms:         county_id,start_utc,end_utc,event_type

Los números de fila en los errores cuentan la cabecera como fila 1.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import IntEnum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import pytz

from core.exceptions import DataValidationError, UnknownCountyError

logger = logging.getLogger(__name__)

# Orden fijo de las 8 variables climáticas (vector x_{c,t}).
WEATHER_FEATURES = (
    'temperature',
    'precipitation',
    'wind_speed',
    'wind_gust',
    'shortwave_radiation',
    'relative_humidity',
    'cloud_cover',
    'surface_pressure',
)
WEATHER_CSV_COLUMNS = (
    'temp_f', 'precip_in', 'wind_kmh', 'gust_kmh',
    'swr_wm2', 'rh_pct', 'cloud_pct', 'pressure_hpa',
)
INFRA_CATEGORIES = ('poles', 'towers', 'substations', 'transformers', 'lines')
BUILDING_AGE_COLUMNS = ('built_pre1960', 'built_1960_1999', 'built_2000_plus')

OUTAGE_COLUMNS = ('county_id', 'timestamp_utc', 'customers_out')
WEATHER_COLUMNS = ('county_id', 'timestamp_utc') + WEATHER_CSV_COLUMNS
CENSUS_COLUMNS = ('county_id', 'lat', 'lon', 'income_usd', 'unemployment_pct') + BUILDING_AGE_COLUMNS
INFRA_COLUMNS = ('county_id',) + INFRA_CATEGORIES
STORM_COLUMNS = ('county_id', 'start_utc', 'end_utc', 'event_type')
STATICS_COLUMNS = CENSUS_COLUMNS + INFRA_CATEGORIES

TIMESTAMP_FORMAT = '%Y-%m-%dT%H:%M:%SZ'


class CellState(IntEnum):
    PRESENT = 0
    MISSING = 1
    IMPUTED = 2


STATE_LABELS = {CellState.PRESENT: 'present', CellState.MISSING: 'missing', CellState.IMPUTED: 'imputed'}
_LABEL_TO_STATE = {v: k for k, v in STATE_LABELS.items()}


# ======================================
# 🧾 REGISTROS
# ======================================
@dataclass(frozen=True)
class OutageRecord:
    county_id: str
    timestamp: pd.Timestamp
    customers_out: int


@dataclass(frozen=True)
class WeatherRecord:
    county_id: str
    timestamp: pd.Timestamp
    temperature: Optional[float] = None
    precipitation: Optional[float] = None
    wind_speed: Optional[float] = None
    wind_gust: Optional[float] = None
    shortwave_radiation: Optional[float] = None
    relative_humidity: Optional[float] = None
    cloud_cover: Optional[float] = None
    surface_pressure: Optional[float] = None

    def vector(self):
        return tuple(getattr(self, f) for f in WEATHER_FEATURES)


@dataclass(frozen=True)
class CensusRecord:
    county_id: str
    latitude: float
    longitude: float
    avg_household_income: float
    unemployment_rate: float
    building_age_distribution: Tuple[float, ...]


@dataclass(frozen=True)
class CountyStatic:
    county_id: str
    latitude: float
    longitude: float
    avg_household_income: float
    unemployment_rate: float
    building_age_distribution: Tuple[float, ...]
    infra_counts: Mapping[str, int] = field(default_factory=dict)
    infra_shares: Mapping[str, float] = field(default_factory=dict)

    def socio_economic_vector(self):
        return (self.avg_household_income, self.unemployment_rate) + tuple(self.building_age_distribution)

    def infrastructure_vector(self):
        return tuple(self.infra_shares[k] for k in INFRA_CATEGORIES)


@dataclass(frozen=True)
class StormEvent:
    county_id: str
    start: pd.Timestamp
    end: pd.Timestamp
    event_type: str = ''


# ======================================
# 🗺️ PANEL
# ======================================
@dataclass(frozen=True, eq=False)
class PanelDataset:
    """
    Grilla rectangular condado × hora.

    `outages` y `weather` guardan valores; `outage_state` y `weather_state` el
    estado de cada celda (CellState). Una celda faltante guarda 0.0 en su valor y
    nunca debe leerse sin consultar el estado.
    """
    counties: Tuple[str, ...]
    hours: pd.DatetimeIndex
    outages: np.ndarray
    outage_state: np.ndarray
    weather: np.ndarray
    weather_state: np.ndarray
    statics: Mapping[str, CountyStatic]

    def __post_init__(self):
        c, t = len(self.counties), len(self.hours)
        if self.outages.shape != (c, t) or self.outage_state.shape != (c, t):
            raise ValueError('outage matrix shape does not match counties × hours')
        if self.weather.shape != (c, t, len(WEATHER_FEATURES)) or self.weather_state.shape != self.weather.shape:
            raise ValueError('weather tensor shape does not match counties × hours × features')
        if t > 1:
            pasos = np.diff(self.hours.asi8)
            if not np.all(pasos == pd.Timedelta(hours=1).value):
                raise ValueError('hour axis must be strictly increasing with 1-hour step')
        if list(self.counties) != sorted(self.counties):
            raise ValueError('counties must be sorted by id')
        # Congelar los arreglos: el panel se comparte en solo lectura.
        for nombre in ('outages', 'outage_state', 'weather', 'weather_state'):
            arr = np.array(getattr(self, nombre), copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, nombre, arr)

    @property
    def n_counties(self):
        return len(self.counties)

    @property
    def n_hours(self):
        return len(self.hours)

    @property
    def cell_count(self):
        return self.n_counties * self.n_hours

    def county_index(self, county_id):
        try:
            return self.counties.index(county_id)
        except ValueError:
            raise UnknownCountyError([county_id]) from None

    def hour_index(self, timestamp):
        pos = self.hours.get_indexer([_as_utc(timestamp)])[0]
        if pos < 0:
            raise KeyError(f'timestamp {timestamp} outside panel range')
        return int(pos)

    def missing_weather_count(self):
        return int(np.count_nonzero(self.weather_state == CellState.MISSING))

    def missing_outage_count(self):
        return int(np.count_nonzero(self.outage_state == CellState.MISSING))

    def with_arrays(self, **arrays):
        return replace(self, **arrays)

    def equals(self, other):
        """Igualdad bit a bit (valores, estados, ejes)."""
        return (
            self.counties == other.counties
            and self.hours.equals(other.hours)
            and np.array_equal(self.outage_state, other.outage_state)
            and np.array_equal(self.weather_state, other.weather_state)
            and self.outages.tobytes() == other.outages.tobytes()
            and self.weather.tobytes() == other.weather.tobytes()
        )


# ======================================
# 🔧 UTILIDADES
# ======================================
def _as_utc(value):
    ts = pd.Timestamp(value)
    if ts.tzinfo is None:
        return ts.tz_localize('UTC')
    return ts.tz_convert('UTC')


def to_local(hours, utc_offset_hours):
    """Convierte el eje UTC a hora local con un desfase fijo (sin horario de verano)."""
    zona = pytz.FixedOffset(int(round(utc_offset_hours * 60)))
    return pd.DatetimeIndex(hours).tz_convert(zona)


def format_timestamp(ts):
    return _as_utc(ts).strftime(TIMESTAMP_FORMAT)


def _read_csv(path, columns):
    path = Path(path)
    if not path.exists():
        raise DataValidationError('file not found', path=path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise DataValidationError('empty file without header', path=path) from None
    header = [c.strip() for c in df.columns]
    if sorted(header) != sorted(columns):
        raise DataValidationError(
            f"header {header} does not match schema {list(columns)}", row=1, path=path
        )
    df.columns = header
    df = df[list(columns)]
    for col in columns:
        df[col] = df[col].str.strip()
    return df.reset_index(drop=True)


def _first_bad(mask):
    pos = np.flatnonzero(np.asarray(mask))
    return int(pos[0]) if len(pos) else None


def _row_number(position):
    # fila 1 = cabecera
    return position + 2


def _check_county_ids(df, path):
    bad = _first_bad(df['county_id'] == '')
    if bad is not None:
        raise DataValidationError('empty county_id', row=_row_number(bad), field='county_id', path=path)


def _parse_timestamps(df, column, path, freq=None):
    ts = pd.to_datetime(df[column], utc=True, format='ISO8601', errors='coerce')
    bad = _first_bad(ts.isna())
    if bad is not None:
        raise DataValidationError(
            f'malformed timestamp {df[column].iloc[bad]!r}', row=_row_number(bad), field=column, path=path
        )
    if freq is not None:
        bad = _first_bad(ts.dt.floor(freq) != ts)
        if bad is not None:
            raise DataValidationError(
                f'timestamp not aligned to {freq} boundary', row=_row_number(bad), field=column, path=path
            )
    return ts


def _parse_numeric(df, column, path, allow_missing=False, minimum=None, maximum=None, integer=False):
    raw = df[column]
    valores = pd.to_numeric(raw.replace('', np.nan), errors='coerce')
    vacias = raw == ''
    if not allow_missing:
        bad = _first_bad(vacias)
        if bad is not None:
            raise DataValidationError('missing value', row=_row_number(bad), field=column, path=path)
    bad = _first_bad(valores.isna() & ~vacias)
    if bad is not None:
        raise DataValidationError(f'not a number: {raw.iloc[bad]!r}', row=_row_number(bad), field=column, path=path)
    if integer:
        bad = _first_bad(valores.notna() & (valores != np.floor(valores)))
        if bad is not None:
            raise DataValidationError('expected an integer count', row=_row_number(bad), field=column, path=path)
    if minimum is not None:
        bad = _first_bad(valores < minimum)
        if bad is not None:
            etiqueta = 'negative count' if integer and minimum == 0 else f'value below {minimum}'
            raise DataValidationError(etiqueta, row=_row_number(bad), field=column, path=path)
    if maximum is not None:
        bad = _first_bad(valores > maximum)
        if bad is not None:
            raise DataValidationError(f'value above {maximum}', row=_row_number(bad), field=column, path=path)
    return valores


def _check_duplicates(df, keys, path):
    dup = _first_bad(df.duplicated(list(keys), keep='first'))
    if dup is not None:
        raise DataValidationError(
            f'duplicate key ({", ".join(str(df[k].iloc[dup]) for k in keys)})',
            row=_row_number(dup), field=keys[-1], path=path,
        )


# ======================================
# 📥 PARSERS
# ======================================
def parse_outage_csv(path) -> List[OutageRecord]:
    """Lee el CSV de cortes (cadencia de 15 minutos) y devuelve registros ordenados."""
    df = _read_csv(path, OUTAGE_COLUMNS)
    _check_county_ids(df, path)
    df['timestamp'] = _parse_timestamps(df, 'timestamp_utc', path, freq='15min')
    df['valor'] = _parse_numeric(df, 'customers_out', path, minimum=0, integer=True)
    _check_duplicates(df, ('county_id', 'timestamp'), path)
    df = df.sort_values(['county_id', 'timestamp'], kind='mergesort')
    registros = [
        OutageRecord(c, ts, int(v))
        for c, ts, v in zip(df['county_id'], df['timestamp'], df['valor'])
    ]
    logger.info('Cortes leídos de %s: %d registros', path, len(registros))
    return registros


def parse_weather_csv(path) -> List[WeatherRecord]:
    df = _read_csv(path, WEATHER_COLUMNS)
    _check_county_ids(df, path)
    df['timestamp'] = _parse_timestamps(df, 'timestamp_utc', path, freq='h')
    limites = {
        'precip_in': (0, None),
        'rh_pct': (0, 100),
        'cloud_pct': (0, 100),
    }
    columnas = []
    for col in WEATHER_CSV_COLUMNS:
        minimo, maximo = limites.get(col, (None, None))
        columnas.append(_parse_numeric(df, col, path, allow_missing=True, minimum=minimo, maximum=maximo))
    _check_duplicates(df, ('county_id', 'timestamp'), path)
    orden = df.sort_values(['county_id', 'timestamp'], kind='mergesort').index.to_numpy()
    matriz = np.column_stack([col.to_numpy(dtype=float) for col in columnas]) if len(df) else np.zeros((0, 8))
    condados = df['county_id'].to_numpy()
    marcas = df['timestamp'].to_list()
    registros = []
    for i in orden:
        valores = [None if np.isnan(v) else float(v) for v in matriz[i]]
        registros.append(WeatherRecord(condados[i], marcas[i], *valores))
    logger.info('Clima leído de %s: %d registros', path, len(registros))
    return registros


def _census_from_frame(df, path):
    _check_county_ids(df, path)
    _check_duplicates(df, ('county_id',), path)
    lat = _parse_numeric(df, 'lat', path, minimum=-90, maximum=90)
    lon = _parse_numeric(df, 'lon', path, minimum=-180, maximum=180)
    ingreso = _parse_numeric(df, 'income_usd', path, minimum=0)
    desempleo = _parse_numeric(df, 'unemployment_pct', path, minimum=0, maximum=100)
    edades = [_parse_numeric(df, col, path, minimum=0) for col in BUILDING_AGE_COLUMNS]
    registros = []
    for i in range(len(df)):
        registros.append(CensusRecord(
            county_id=df['county_id'].iloc[i],
            latitude=float(lat.iloc[i]),
            longitude=float(lon.iloc[i]),
            avg_household_income=float(ingreso.iloc[i]),
            unemployment_rate=float(desempleo.iloc[i]),
            building_age_distribution=tuple(float(e.iloc[i]) for e in edades),
        ))
    return sorted(registros, key=lambda r: r.county_id)


def _infra_from_frame(df, path):
    _check_county_ids(df, path)
    _check_duplicates(df, ('county_id',), path)
    columnas = {cat: _parse_numeric(df, cat, path, minimum=0, integer=True) for cat in INFRA_CATEGORIES}
    conteos = {}
    for i in range(len(df)):
        conteos[df['county_id'].iloc[i]] = {cat: int(columnas[cat].iloc[i]) for cat in INFRA_CATEGORIES}
    return dict(sorted(conteos.items()))


def parse_census_csv(path) -> List[CensusRecord]:
    return _census_from_frame(_read_csv(path, CENSUS_COLUMNS), path)


def parse_infrastructure_csv(path) -> Dict[str, Dict[str, int]]:
    return _infra_from_frame(_read_csv(path, INFRA_COLUMNS), path)


def parse_storm_events_csv(path) -> List[StormEvent]:
    df = _read_csv(path, STORM_COLUMNS)
    _check_county_ids(df, path)
    inicio = _parse_timestamps(df, 'start_utc', path)
    fin = _parse_timestamps(df, 'end_utc', path)
    bad = _first_bad(inicio > fin)
    if bad is not None:
        raise DataValidationError('start after end', row=_row_number(bad), field='end_utc', path=path)
    eventos = [
        StormEvent(c, s, e, t)
        for c, s, e, t in zip(df['county_id'], inicio, fin, df['event_type'])
    ]
    eventos.sort(key=lambda ev: (ev.county_id, ev.start, ev.end))
    logger.info('Tormentas leídas de %s: %d eventos', path, len(eventos))
    return eventos


# ======================================
# ⏱️ REMUESTREO Y NORMALIZACIÓN
# ======================================
def resample_outages_hourly(records: Iterable[OutageRecord]) -> Dict[str, pd.Series]:
    """
    Agrega la serie de 15 minutos a horas tomando el MÁXIMO de las lecturas de
    cada hora. Las horas sin lecturas quedan como <NA> (dtype Int64).
    """
    registros = list(records)
    if not registros:
        return {}
    df = pd.DataFrame({
        'county_id': [r.county_id for r in registros],
        'timestamp': pd.DatetimeIndex([r.timestamp for r in registros]),
        'customers_out': [r.customers_out for r in registros],
    })
    series = {}
    for county_id, grupo in df.groupby('county_id', sort=True):
        horaria = grupo.set_index('timestamp')['customers_out'].sort_index().resample('1h').max()
        series[county_id] = horaria.astype('Int64')
    return series


def normalize_infrastructure(counts: Mapping[str, Mapping[str, int]]) -> Dict[str, Dict[str, float]]:
    """share(c, k) = count(c, k) / Σ_c' count(c', k), columna por columna."""
    if not counts:
        return {}
    categorias = []
    for conteo in counts.values():
        for cat in conteo:
            if cat not in categorias:
                categorias.append(cat)
    frame = pd.DataFrame.from_dict(counts, orient='index').reindex(columns=categorias).fillna(0)
    totales = frame.sum(axis=0)
    for cat in categorias:
        if totales[cat] <= 0:
            raise DataValidationError(f'zero column: {cat}', field=cat)
    shares = frame.astype(float) / totales.astype(float)
    return {
        str(county): {cat: float(shares.at[county, cat]) for cat in categorias}
        for county in frame.index
    }


def build_county_statics(census: Sequence[CensusRecord], infra_counts: Mapping[str, Mapping[str, int]]) -> List[CountyStatic]:
    ids_censo = {r.county_id for r in census}
    ids_infra = set(infra_counts)
    solo_uno = ids_censo ^ ids_infra
    if solo_uno:
        raise UnknownCountyError(solo_uno)
    shares = normalize_infrastructure(infra_counts)
    return [
        CountyStatic(
            county_id=r.county_id,
            latitude=r.latitude,
            longitude=r.longitude,
            avg_household_income=r.avg_household_income,
            unemployment_rate=r.unemployment_rate,
            building_age_distribution=r.building_age_distribution,
            infra_counts=dict(infra_counts[r.county_id]),
            infra_shares=shares[r.county_id],
        )
        for r in sorted(census, key=lambda r: r.county_id)
    ]


# ======================================
# 🧱 PANEL
# ======================================
def build_panel(outages: Mapping[str, pd.Series], weather: Iterable[WeatherRecord],
                statics: Iterable[CountyStatic], time_range) -> PanelDataset:
    """
    Arma el panel rectangular sobre las horas [start, end).

    Args:
        outages: series horarias por condado (salida de resample_outages_hourly)
        weather: registros horarios de clima
        statics: variables estáticas por condado
        time_range: tupla (start, end) en UTC
    """
    estaticos = {s.county_id: s for s in statics}
    registros_clima = list(weather)
    desconocidos = (set(outages) | {w.county_id for w in registros_clima}) - set(estaticos)
    if desconocidos:
        raise UnknownCountyError(desconocidos)

    start, end = (_as_utc(x) for x in time_range)
    hours = pd.date_range(start=start, end=end, freq='h', inclusive='left')
    counties = tuple(sorted(estaticos))
    n_c, n_t, n_f = len(counties), len(hours), len(WEATHER_FEATURES)

    y = np.zeros((n_c, n_t), dtype=np.float64)
    y_state = np.full((n_c, n_t), CellState.MISSING, dtype=np.int8)
    for ci, county_id in enumerate(counties):
        serie = outages.get(county_id)
        if serie is None or serie.empty:
            continue
        alineada = serie.reindex(hours)
        presentes = alineada.notna().to_numpy()
        y[ci, presentes] = alineada[presentes].astype(float).to_numpy()
        y_state[ci, presentes] = CellState.PRESENT

    x = np.zeros((n_c, n_t, n_f), dtype=np.float64)
    x_state = np.full((n_c, n_t, n_f), CellState.MISSING, dtype=np.int8)
    if registros_clima:
        ci = pd.Index(counties).get_indexer([w.county_id for w in registros_clima])
        ti = hours.get_indexer(pd.DatetimeIndex([w.timestamp for w in registros_clima]))
        fuera = int(np.count_nonzero(ti < 0))
        if fuera:
            logger.info('%d registros de clima fuera del rango del panel fueron ignorados', fuera)
        for w, c_idx, t_idx in zip(registros_clima, ci, ti):
            if t_idx < 0:
                continue
            for fi, valor in enumerate(w.vector()):
                if valor is not None:
                    x[c_idx, t_idx, fi] = valor
                    x_state[c_idx, t_idx, fi] = CellState.PRESENT

    panel = PanelDataset(counties, hours, y, y_state, x, x_state, estaticos)
    logger.info(
        'Panel construido: %d condados × %d horas (%d celdas de clima faltantes, %d de cortes faltantes)',
        n_c, n_t, panel.missing_weather_count(), panel.missing_outage_count(),
    )
    return panel


# ======================================
# 💾 ARTEFACTOS CSV
# ======================================
def _state_labels(arr):
    return np.array([STATE_LABELS[CellState(v)] for v in range(3)], dtype=object)[arr]


def write_panel_csv(panel: PanelDataset, path):
    """Una fila por (condado, hora), condados y horas en el orden del panel."""
    n_c, n_t = panel.n_counties, panel.n_hours
    data = {
        'county_id': np.repeat(np.array(panel.counties, dtype=object), n_t),
        'timestamp_utc': np.tile(panel.hours.strftime(TIMESTAMP_FORMAT).to_numpy(dtype=object), n_c),
    }
    y = panel.outages.reshape(-1).astype(float)
    y_state = panel.outage_state.reshape(-1)
    data['customers_out'] = np.where(y_state == CellState.MISSING, np.nan, y)
    data['outage_state'] = _state_labels(y_state)
    x = panel.weather.reshape(n_c * n_t, -1)
    x_state = panel.weather_state.reshape(n_c * n_t, -1)
    for fi, col in enumerate(WEATHER_CSV_COLUMNS):
        data[col] = np.where(x_state[:, fi] == CellState.MISSING, np.nan, x[:, fi])
    for fi, col in enumerate(WEATHER_CSV_COLUMNS):
        data[f'{col}_state'] = _state_labels(x_state[:, fi])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(data).to_csv(path, index=False, lineterminator='\n')
    return path


def read_panel_csv(path, statics: Iterable[CountyStatic]) -> PanelDataset:
    path = Path(path)
    if not path.exists():
        raise DataValidationError('file not found', path=path)
    state_cols = ['outage_state'] + [f'{c}_state' for c in WEATHER_CSV_COLUMNS]
    df = pd.read_csv(
        path,
        dtype={'county_id': str, 'timestamp_utc': str, **{c: str for c in state_cols}},
        keep_default_na=False,
        na_values={c: [''] for c in ('customers_out',) + WEATHER_CSV_COLUMNS},
        float_precision='round_trip',
    )
    counties = tuple(sorted(df['county_id'].unique()))
    hours = pd.DatetimeIndex(sorted(pd.to_datetime(df['timestamp_utc'].unique(), utc=True, format='ISO8601')))
    n_c, n_t = len(counties), len(hours)
    if len(df) != n_c * n_t:
        raise DataValidationError(f'panel is not rectangular: {len(df)} rows for {n_c}×{n_t} cells', path=path)
    ci = pd.Index(counties).get_indexer(df['county_id'])
    ti = hours.get_indexer(pd.to_datetime(df['timestamp_utc'], utc=True, format='ISO8601'))

    def _estados(col):
        try:
            return df[col].map(lambda s: int(_LABEL_TO_STATE[s])).to_numpy(dtype=np.int8)
        except KeyError as exc:
            raise DataValidationError(f'unknown cell state {exc}', field=col, path=path) from None

    y = np.zeros((n_c, n_t))
    y_state = np.full((n_c, n_t), CellState.MISSING, dtype=np.int8)
    y_state[ci, ti] = _estados('outage_state')
    y[ci, ti] = df['customers_out'].fillna(0.0).to_numpy(dtype=float)
    x = np.zeros((n_c, n_t, len(WEATHER_FEATURES)))
    x_state = np.full(x.shape, CellState.MISSING, dtype=np.int8)
    for fi, col in enumerate(WEATHER_CSV_COLUMNS):
        x_state[ci, ti, fi] = _estados(f'{col}_state')
        x[ci, ti, fi] = df[col].fillna(0.0).to_numpy(dtype=float)
    estaticos = {s.county_id: s for s in statics}
    desconocidos = set(counties) - set(estaticos)
    if desconocidos:
        raise UnknownCountyError(desconocidos)
    return PanelDataset(counties, hours, y, y_state, x, x_state, {c: estaticos[c] for c in counties})


def write_statics_csv(statics: Iterable[CountyStatic], path):
    filas = []
    for s in sorted(statics, key=lambda s: s.county_id):
        fila = {
            'county_id': s.county_id,
            'lat': s.latitude,
            'lon': s.longitude,
            'income_usd': s.avg_household_income,
            'unemployment_pct': s.unemployment_rate,
        }
        fila.update(dict(zip(BUILDING_AGE_COLUMNS, s.building_age_distribution)))
        fila.update({cat: int(s.infra_counts[cat]) for cat in INFRA_CATEGORIES})
        filas.append(fila)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(filas, columns=list(STATICS_COLUMNS)).to_csv(path, index=False, lineterminator='\n')
    return path


def read_statics_csv(path) -> List[CountyStatic]:
    df = _read_csv(path, STATICS_COLUMNS)
    census = _census_from_frame(df[list(CENSUS_COLUMNS)].copy(), path)
    infra = _infra_from_frame(df[list(INFRA_COLUMNS)].copy(), path)
    return build_county_statics(census, infra)


def write_storms_csv(storms: Iterable[StormEvent], path):
    df = pd.DataFrame(
        [(s.county_id, format_timestamp(s.start), format_timestamp(s.end), s.event_type) for s in storms],
        columns=list(STORM_COLUMNS),
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator='\n')
    return path
