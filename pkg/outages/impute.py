"""
Imputación espacial KNN: cada celda faltante toma el promedio del mismo campo,
en la misma hora, sobre los k condados más cercanos que tengan valor observado.

Cadena de respaldo cuando ninguno de los k vecinos tiene dato en t:
    1) todos los condados con dato en t (en orden de cercanía)
    2) interpolación lineal en el tiempo dentro del condado
    3) media del condado
    4) media global del campo
Solo los valores observados (PRESENT) alimentan los promedios, así el resultado
no depende del orden en que se recorren las celdas.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from core.exceptions import DataValidationError, PipelineError

from .ingest import WEATHER_FEATURES, CellState, CountyStatic, PanelDataset

logger = logging.getLogger(__name__)

FALLBACK_LEVELS = ('neighbors', 'widened', 'interpolated', 'county_mean', 'global_mean')


@dataclass(frozen=True)
class NeighborTable:
    """Por condado: lista ordenada de (vecino, distancia) excluyendo al propio condado."""
    neighbors: Mapping[str, Tuple[Tuple[str, float], ...]]

    def nearest(self, county_id, k=None):
        lista = self.neighbors[county_id]
        return lista if k is None else lista[:k]

    @property
    def counties(self):
        return tuple(sorted(self.neighbors))


@dataclass
class ImputationSummary:
    filled: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def add(self, campo, nivel, cantidad):
        if cantidad:
            por_nivel = self.filled.setdefault(campo, {n: 0 for n in FALLBACK_LEVELS})
            por_nivel[nivel] += int(cantidad)

    def total(self):
        return sum(sum(v.values()) for v in self.filled.values())

    def as_dict(self):
        return {campo: dict(niveles) for campo, niveles in sorted(self.filled.items())}


def nearest_counties(statics: Iterable[CountyStatic]) -> NeighborTable:
    """
    D_ij = sqrt((x_i − x_j)² + (y_i − y_j)²) sobre (lat, lon) crudos, en grados.
    Empates de distancia se ordenan por county_id ascendente.
    """
    lista = sorted(statics.values() if isinstance(statics, Mapping) else statics, key=lambda s: s.county_id)
    if len(lista) < 2:
        raise PipelineError('nearest_counties needs at least 2 counties with coordinates')
    ids = [s.county_id for s in lista]
    lat = np.array([s.latitude for s in lista], dtype=np.float64)
    lon = np.array([s.longitude for s in lista], dtype=np.float64)
    tabla = {}
    for i, county_id in enumerate(ids):
        dist = np.sqrt((lat[i] - lat) ** 2 + (lon[i] - lon) ** 2)
        pares = [(ids[j], float(dist[j])) for j in range(len(ids)) if j != i]
        pares.sort(key=lambda p: (p[1], p[0]))
        tabla[county_id] = tuple(pares)
    return NeighborTable(tabla)


def _neighbor_matrix(panel, table, k=None):
    posicion = {c: i for i, c in enumerate(panel.counties)}
    faltan = set(panel.counties) - set(table.neighbors)
    if faltan:
        raise PipelineError(f"neighbor table does not cover counties: {', '.join(sorted(faltan))}")
    filas = []
    for county_id in panel.counties:
        vecinos = [posicion[v] for v, _ in table.nearest(county_id) if v in posicion]
        filas.append(vecinos if k is None else vecinos[:k])
    ancho = min(len(f) for f in filas)
    return np.array([f[:ancho] for f in filas], dtype=np.int64).reshape(len(filas), ancho)


def _neighbor_average(values, present, vecinos, objetivo):
    """Promedio secuencial (en orden de cercanía) de los vecinos con dato."""
    total = np.zeros(values.shape, dtype=np.float64)
    cuenta = np.zeros(values.shape, dtype=np.int64)
    for i in range(vecinos.shape[1]):
        j = vecinos[:, i]
        ok = present[j] & objetivo
        total += np.where(ok, values[j], 0.0)
        cuenta += ok
    con_dato = objetivo & (cuenta > 0)
    promedio = np.zeros(values.shape, dtype=np.float64)
    promedio[con_dato] = total[con_dato] / cuenta[con_dato]
    return promedio, con_dato


def _impute_field(values, state, vecinos_k, vecinos_todos, nombre, summary):
    values = values.copy()
    state = state.copy()
    present = state == CellState.PRESENT
    pendiente = state == CellState.MISSING
    if not pendiente.any():
        return values, state
    observados = values[present]
    if observados.size == 0:
        raise DataValidationError(f'no observed values to impute from: {nombre}', field=nombre)

    for nivel, vecinos in (('neighbors', vecinos_k), ('widened', vecinos_todos)):
        if not pendiente.any():
            break
        promedio, llenas = _neighbor_average(values, present, vecinos, pendiente)
        values[llenas] = promedio[llenas]
        state[llenas] = CellState.IMPUTED
        pendiente &= ~llenas
        summary.add(nombre, nivel, np.count_nonzero(llenas))

    if pendiente.any():
        ejes_t = np.arange(values.shape[1], dtype=np.float64)
        interp = media_condado = 0
        for c in np.flatnonzero(pendiente.any(axis=1)):
            t_obs = np.flatnonzero(present[c])
            huecos = np.flatnonzero(pendiente[c])
            if t_obs.size == 0:
                continue
            if t_obs.size >= 2:
                interior = huecos[(huecos > t_obs[0]) & (huecos < t_obs[-1])]
                if interior.size:
                    values[c, interior] = np.interp(ejes_t[interior], ejes_t[t_obs], values[c, t_obs])
                    state[c, interior] = CellState.IMPUTED
                    pendiente[c, interior] = False
                    interp += interior.size
            resto = np.flatnonzero(pendiente[c])
            if resto.size:
                values[c, resto] = np.mean(values[c, t_obs])
                state[c, resto] = CellState.IMPUTED
                pendiente[c, resto] = False
                media_condado += resto.size
        summary.add(nombre, 'interpolated', interp)
        summary.add(nombre, 'county_mean', media_condado)

    if pendiente.any():
        values[pendiente] = np.mean(observados)
        state[pendiente] = CellState.IMPUTED
        summary.add(nombre, 'global_mean', np.count_nonzero(pendiente))
    return values, state


def impute_panel(panel: PanelDataset, table: NeighborTable = None, k: int = 5,
                 impute_targets: bool = False) -> Tuple[PanelDataset, ImputationSummary]:
    """Igual que impute_missing, devolviendo además el conteo por nivel de respaldo."""
    if k < 1:
        raise PipelineError('k must be a positive integer')
    if table is None:
        table = nearest_counties(panel.statics)
    vecinos_k = _neighbor_matrix(panel, table, k)
    vecinos_todos = _neighbor_matrix(panel, table)
    summary = ImputationSummary()

    weather = np.array(panel.weather, copy=True)
    weather_state = np.array(panel.weather_state, copy=True)
    for fi, nombre in enumerate(WEATHER_FEATURES):
        weather[:, :, fi], weather_state[:, :, fi] = _impute_field(
            panel.weather[:, :, fi], panel.weather_state[:, :, fi], vecinos_k, vecinos_todos, nombre, summary,
        )
    outages, outage_state = panel.outages, panel.outage_state
    if impute_targets:
        outages, outage_state = _impute_field(
            panel.outages, panel.outage_state, vecinos_k, vecinos_todos, 'customers_out', summary,
        )

    for campo, niveles in summary.as_dict().items():
        respaldo = {n: v for n, v in niveles.items() if n != 'neighbors' and v}
        if respaldo:
            logger.warning('Imputación de %s usó niveles de respaldo: %s', campo, respaldo)
    logger.info('Imputación completada: %d celdas llenadas (k=%d)', summary.total(), k)
    nuevo = panel.with_arrays(
        weather=weather, weather_state=weather_state, outages=outages, outage_state=outage_state,
    )
    return nuevo, summary


def impute_missing(panel: PanelDataset, k: int = 5, table: NeighborTable = None,
                   impute_targets: bool = False) -> PanelDataset:
    """Llena las celdas faltantes con el promedio de los k condados más cercanos."""
    return impute_panel(panel, table=table, k=k, impute_targets=impute_targets)[0]

