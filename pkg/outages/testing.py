"""
Constructores de paneles pequeños para los tests.
"""
import numpy as np
import pandas as pd

from .ingest import BUILDING_AGE_COLUMNS, INFRA_CATEGORIES, WEATHER_FEATURES, CellState, CountyStatic, PanelDataset


def make_statics(coords, ids=None):
    """Un CountyStatic por coordenada (lat, lon), con participaciones de infraestructura iguales."""
    ids = ids or [f'26{2 * i + 1:03d}' for i in range(len(coords))]
    n = len(coords)
    estaticos = []
    for i, (county_id, (lat, lon)) in enumerate(zip(ids, coords)):
        estaticos.append(CountyStatic(
            county_id=county_id,
            latitude=float(lat),
            longitude=float(lon),
            avg_household_income=50000.0 + 1000.0 * i,
            unemployment_rate=4.0 + 0.5 * i,
            building_age_distribution=tuple([1.0 / len(BUILDING_AGE_COLUMNS)] * len(BUILDING_AGE_COLUMNS)),
            infra_counts={cat: 10 for cat in INFRA_CATEGORIES},
            infra_shares={cat: 1.0 / n for cat in INFRA_CATEGORIES},
        ))
    return sorted(estaticos, key=lambda s: s.county_id)


def make_panel(n_counties=4, n_hours=72, seed=0, start='2020-01-01T00:00:00Z', missing_weather=0.0,
               missing_outages=0.0, statics=None, outages=None, weather=None):
    """
    Panel aleatorio reproducible. `outages` (C, T) y `weather` (C, T, 8) permiten
    fijar los valores; las fracciones `missing_*` marcan celdas como faltantes.
    """
    rng = np.random.default_rng(seed)
    if statics is None:
        coords = rng.uniform([41.5, -86.5], [45.5, -82.5], size=(n_counties, 2))
        statics = make_statics(coords)
    counties = tuple(s.county_id for s in statics)
    n_c = len(counties)
    hours = pd.date_range(start=pd.Timestamp(start), periods=n_hours, freq='h')
    if outages is None:
        outages = rng.integers(0, 800, size=(n_c, n_hours)).astype(np.float64)
    if weather is None:
        weather = rng.normal(0.0, 1.0, size=(n_c, n_hours, len(WEATHER_FEATURES))) * 10.0 + 50.0
    outages = np.asarray(outages, dtype=np.float64)
    weather = np.asarray(weather, dtype=np.float64)

    outage_state = np.where(rng.uniform(size=outages.shape) < missing_outages, CellState.MISSING, CellState.PRESENT)
    weather_state = np.where(rng.uniform(size=weather.shape) < missing_weather, CellState.MISSING, CellState.PRESENT)
    outages = np.where(outage_state == CellState.MISSING, 0.0, outages)
    weather = np.where(weather_state == CellState.MISSING, 0.0, weather)
    return PanelDataset(
        counties, hours, outages, outage_state.astype(np.int8), weather, weather_state.astype(np.int8),
        {s.county_id: s for s in statics},
    )
