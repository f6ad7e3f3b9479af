"""
Generador de datos sintéticos para pruebas de escritorio.

Produce los cinco CSV de entrada con una función generadora de cortes conocida:

    impacto(c, t) = v_c · (900 · precip(c, t−1) + 12 · max(viento(c, t−1) − 25, 0))
    y(c, t)       = round(0.5 · y(c, t−1) + impacto(c, t) + ruido Poisson(base_c))

Las tormentas suben precipitación y viento y bajan la presión en los condados
afectados. El último evento del primer condado queda reservado como evento de
evaluación (holdout) en el config.json generado.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from core.artifacts import write_json
from core.exceptions import ConfigError

from .ingest import (
    BUILDING_AGE_COLUMNS, CENSUS_COLUMNS, INFRA_CATEGORIES, INFRA_COLUMNS, OUTAGE_COLUMNS, TIMESTAMP_FORMAT,
    WEATHER_COLUMNS, StormEvent, _as_utc, format_timestamp, write_storms_csv,
)

logger = logging.getLogger(__name__)

DEFAULT_START = '2020-01-01T00:00:00Z'
MIN_HOURS = 240
HOLDOUT_LENGTH = 20
HOLDOUT_PADDING = 6
HOLDOUT_EVENT_TYPE = 'Flash Flood'
# Factores de las 4 lecturas de 15 minutos; el máximo de la hora es el valor horario
QUARTER_FACTORS = (0.9, 1.0, 0.95, 0.85)
INPUT_FILES = {
    'outages': 'outages.csv',
    'weather': 'weather.csv',
    'census': 'census.csv',
    'infrastructure': 'infrastructure.csv',
    'storms': 'storms.csv',
}


@dataclass
class SyntheticFixture:
    counties: List[str]
    hours: pd.DatetimeIndex
    storms: List[StormEvent]
    holdout: dict
    files: dict = field(default_factory=dict)
    config_path: Path = None


def county_ids(n):
    """Códigos tipo FIPS (26 = Michigan), impares como en el estándar."""
    return [f'26{2 * i + 1:03d}' for i in range(n)]


def outage_generating_function(precip_prev, wind_prev, vulnerability):
    """Impacto horario esperado a partir del clima de la hora anterior."""
    return vulnerability * (900.0 * np.asarray(precip_prev) + 12.0 * np.maximum(np.asarray(wind_prev) - 25.0, 0.0))


def _storms(rng, counties, n_hours, hours):
    """Tormentas regionales repartidas en el horizonte más el evento reservado."""
    n_eventos = max(3, n_hours // 150)
    limite = n_hours - HOLDOUT_LENGTH - 4 * HOLDOUT_PADDING - 48
    inicios = np.sort(rng.choice(np.arange(30, limite), size=n_eventos, replace=False))
    eventos = []
    for inicio in inicios:
        duracion = int(rng.integers(6, 19))
        n_afectados = int(rng.integers(1, len(counties) + 1))
        afectados = sorted(rng.choice(len(counties), size=n_afectados, replace=False).tolist())
        for ci in afectados:
            eventos.append((ci, int(inicio), int(inicio) + duracion, 'Thunderstorm Wind'))
    inicio = n_hours - HOLDOUT_LENGTH - 2 * HOLDOUT_PADDING - 24
    eventos.append((0, inicio, inicio + HOLDOUT_LENGTH, HOLDOUT_EVENT_TYPE))
    eventos.sort()
    return [
        StormEvent(counties[ci], hours[a], hours[b - 1], tipo)
        for ci, a, b, tipo in eventos
    ]


def _storm_intensity(storms, counties, hours):
    """Intensidad 0..1 por (condado, hora): rampa de subida y bajada dentro de cada tormenta."""
    intensidad = np.zeros((len(counties), len(hours)))
    for ev in storms:
        ci = counties.index(ev.county_id)
        a = hours.get_loc(ev.start)
        b = hours.get_loc(ev.end) + 1
        largo = b - a
        perfil = np.sin(np.pi * (np.arange(largo) + 0.5) / largo)
        intensidad[ci, a:b] = np.maximum(intensidad[ci, a:b], perfil)
    return intensidad


def _weather(rng, hours, intensidad):
    n_c, n_t = intensidad.shape
    dia = 2 * np.pi * (hours.hour.to_numpy() - 11) / 24.0
    anio = 2 * np.pi * (hours.dayofyear.to_numpy() - 200) / 365.0

    def ruido(escala):
        return rng.normal(0.0, escala, size=(n_c, n_t))

    temp = 50.0 + 25.0 * np.cos(anio) + 8.0 * np.cos(dia) + ruido(2.0)
    lluvia_base = np.where(rng.uniform(size=(n_c, n_t)) < 0.05, rng.gamma(1.0, 0.02, size=(n_c, n_t)), 0.0)
    precip = lluvia_base + intensidad * rng.uniform(0.3, 0.9, size=(n_c, n_t))
    viento = np.abs(12.0 + ruido(4.0)) + 45.0 * intensidad
    rafaga = viento * 1.4 + np.abs(ruido(3.0))
    radiacion = np.maximum(0.0, 550.0 * np.cos(dia)) * (1.0 - 0.7 * intensidad)
    humedad = np.clip(65.0 + 25.0 * intensidad + ruido(8.0), 0.0, 100.0)
    nubes = np.clip(40.0 + 55.0 * intensidad + ruido(15.0), 0.0, 100.0)
    presion = 1013.0 - 18.0 * intensidad + ruido(3.0)
    campos = [temp, precip, viento, rafaga, radiacion, humedad, nubes, presion]
    return np.stack([np.round(c, 2) for c in campos], axis=2)


def _outages(rng, clima, vulnerabilidad, base):
    n_c, n_t, _ = clima.shape
    y = np.zeros((n_c, n_t))
    for t in range(1, n_t):
        impacto = outage_generating_function(clima[:, t - 1, 1], clima[:, t - 1, 2], vulnerabilidad)
        y[:, t] = np.round(0.5 * y[:, t - 1] + impacto + rng.poisson(base))
    return y.astype(np.int64)


def _outage_frame(rng, counties, hours, y, holdout_slice):
    """Lecturas de 15 minutos con huecos: horas completas sin dato y lecturas sueltas omitidas."""
    n_c, n_t = y.shape
    n_q = len(QUARTER_FACTORS)
    ci = np.repeat(np.arange(n_c), n_t * n_q)
    ti = np.tile(np.repeat(np.arange(n_t), n_q), n_c)
    qi = np.tile(np.arange(n_q), n_c * n_t)

    sin_dato = np.zeros((n_c, n_t), dtype=bool)
    for c in range(n_c):
        sin_dato[c, rng.choice(np.arange(48, n_t // 2), size=2, replace=False)] = True
    sin_dato[:, holdout_slice] = False
    # la lectura máxima (q=1) nunca se omite
    sueltas = (qi != 1) & (rng.uniform(size=ci.size) < 0.02)
    conservar = ~sin_dato[ci, ti] & ~sueltas

    ci, ti, qi = ci[conservar], ti[conservar], qi[conservar]
    marcas = hours[ti] + pd.to_timedelta(15 * qi, unit='min')
    valores = np.round(y[ci, ti] * np.asarray(QUARTER_FACTORS)[qi]).astype(np.int64)
    return pd.DataFrame({
        'county_id': np.array(counties, dtype=object)[ci],
        'timestamp_utc': marcas.strftime(TIMESTAMP_FORMAT),
        'customers_out': valores,
    }, columns=list(OUTAGE_COLUMNS))


def _weather_frame(rng, counties, hours, clima):
    n_c, n_t, n_f = clima.shape
    valores = clima.reshape(n_c * n_t, n_f).astype(object)
    faltantes = rng.uniform(size=valores.shape) < 0.004
    valores[faltantes] = ''
    df = pd.DataFrame(valores, columns=list(WEATHER_COLUMNS[2:]))
    df.insert(0, 'timestamp_utc', np.tile(hours.strftime(TIMESTAMP_FORMAT).to_numpy(dtype=object), n_c))
    df.insert(0, 'county_id', np.repeat(np.array(counties, dtype=object), n_t))
    return df, int(faltantes.sum())


def _census_frame(rng, counties):
    n = len(counties)
    edades = rng.dirichlet((2.0, 4.0, 2.0), size=n)
    df = pd.DataFrame({
        'county_id': counties,
        # condados en diagonal, ~26 millas entre vecinos consecutivos
        'lat': np.round(42.30 + 0.30 * np.arange(n) + rng.uniform(-0.05, 0.05, n), 4),
        'lon': np.round(-83.10 - 0.30 * np.arange(n) + rng.uniform(-0.05, 0.05, n), 4),
        'income_usd': np.round(rng.uniform(38000, 92000, n), 0),
        'unemployment_pct': np.round(rng.uniform(3.0, 12.0, n), 2),
    })
    for j, col in enumerate(BUILDING_AGE_COLUMNS):
        df[col] = np.round(edades[:, j], 4)
    return df[list(CENSUS_COLUMNS)]


def _infra_frame(rng, counties):
    escalas = {'poles': 20000, 'towers': 400, 'substations': 60, 'transformers': 9000, 'lines': 1500}
    df = pd.DataFrame({'county_id': counties})
    for cat in INFRA_CATEGORIES:
        df[cat] = rng.integers(escalas[cat] // 4, escalas[cat], size=len(counties))
    return df[list(INFRA_COLUMNS)]


def generate_fixture(directory, counties=5, hours=2000, seed=0, start=DEFAULT_START) -> SyntheticFixture:
    """
    Escribe outages.csv, weather.csv, census.csv, infrastructure.csv, storms.csv y
    config.json en `directory`. Mismos argumentos, mismos bytes.
    """
    if counties < 2:
        raise ConfigError('synthetic fixture needs at least 2 counties')
    if hours < MIN_HOURS:
        raise ConfigError(f'synthetic fixture needs at least {MIN_HOURS} hours')
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    ids = county_ids(counties)
    eje = pd.date_range(start=_as_utc(start), periods=hours, freq='h')
    tormentas = _storms(rng, ids, hours, eje)
    reservada = next(ev for ev in tormentas if ev.event_type == HOLDOUT_EVENT_TYPE)
    intensidad = _storm_intensity(tormentas, ids, eje)
    clima = _weather(rng, eje, intensidad)
    vulnerabilidad = rng.uniform(0.8, 1.3, size=counties)
    base = rng.uniform(2.0, 8.0, size=counties)
    y = _outages(rng, clima, vulnerabilidad, base)

    inicio = eje.get_loc(reservada.start) - HOLDOUT_PADDING
    fin = eje.get_loc(reservada.end) + HOLDOUT_PADDING
    holdout = {
        'county_id': reservada.county_id,
        'start': format_timestamp(eje[inicio]),
        'end': format_timestamp(eje[fin]),
        'event_id': f'{reservada.county_id}-flood',
    }

    archivos = {nombre: directory / archivo for nombre, archivo in INPUT_FILES.items()}
    _outage_frame(rng, ids, eje, y, slice(inicio, fin + 1)).to_csv(
        archivos['outages'], index=False, lineterminator='\n')
    clima_df, faltantes = _weather_frame(rng, ids, eje, clima)
    clima_df.to_csv(archivos['weather'], index=False, lineterminator='\n')
    _census_frame(rng, ids).to_csv(archivos['census'], index=False, lineterminator='\n')
    _infra_frame(rng, ids).to_csv(archivos['infrastructure'], index=False, lineterminator='\n')
    write_storms_csv(tormentas, archivos['storms'])

    config_path = write_json(directory / 'config.json', {
        'inputs': dict(INPUT_FILES),
        'time_range': {
            'start': format_timestamp(eje[0]),
            'end': format_timestamp(eje[-1] + pd.Timedelta(hours=1)),
        },
        'holdout': holdout,
        'seed': seed,
    })
    logger.info(
        'Datos sintéticos: %d condados × %d horas, %d tormentas, %d celdas de clima vacías',
        counties, hours, len(tormentas), faltantes,
    )
    return SyntheticFixture(ids, eje, tormentas, holdout, archivos, config_path)
