import numpy as np
from django.test import SimpleTestCase

from core.exceptions import PipelineError

from .impute import impute_missing, impute_panel, nearest_counties
from .ingest import WEATHER_FEATURES, CellState
from .testing import make_panel, make_statics


def imputacion_por_fuerza_bruta(panel, k):
    """Distancias completas, orden por (distancia, id) y promedio secuencial de los vecinos con dato."""
    ids = list(panel.counties)
    coords = {c: (panel.statics[c].latitude, panel.statics[c].longitude) for c in ids}
    vecinos = {}
    for c in ids:
        pares = []
        for otro in ids:
            if otro == c:
                continue
            d = ((coords[c][0] - coords[otro][0]) ** 2 + (coords[c][1] - coords[otro][1]) ** 2) ** 0.5
            pares.append((d, otro))
        vecinos[c] = [ids.index(o) for _, o in sorted(pares)]

    salida = np.array(panel.weather, copy=True)
    llenas = np.zeros(panel.weather.shape, dtype=bool)
    for ci, c in enumerate(ids):
        for t in range(panel.n_hours):
            for f in range(len(WEATHER_FEATURES)):
                if panel.weather_state[ci, t, f] != CellState.MISSING:
                    continue
                for lista in (vecinos[c][:k], vecinos[c]):
                    total, cuenta = 0.0, 0
                    for j in lista:
                        if panel.weather_state[j, t, f] == CellState.PRESENT:
                            total += panel.weather[j, t, f]
                            cuenta += 1
                    if cuenta:
                        salida[ci, t, f] = total / cuenta
                        llenas[ci, t, f] = True
                        break
    return salida, llenas


class NearestCountiesTests(SimpleTestCase):
    def test_pythagorean_distances(self):
        tabla = nearest_counties(make_statics([(0, 0), (3, 4), (6, 8)], ids=['A', 'B', 'C']))
        self.assertEqual(tabla.nearest('A'), (('B', 5.0), ('C', 10.0)))

    def test_colocated_counties(self):
        tabla = nearest_counties(make_statics([(1, 1), (1, 1)], ids=['A', 'B']))
        self.assertEqual(tabla.nearest('A'), (('B', 0.0),))

    def test_ties_ordered_by_id(self):
        tabla = nearest_counties(make_statics([(0, 0), (0, 1), (1, 0)], ids=['A', 'C', 'B']))
        self.assertEqual([v for v, _ in tabla.nearest('A')], ['B', 'C'])

    def test_needs_two_counties(self):
        with self.assertRaises(PipelineError):
            nearest_counties(make_statics([(0, 0)]))


class ImputeTests(SimpleTestCase):
    def test_mean_of_nearest_five(self):
        # A en el origen, vecinos a distancias crecientes, el sexto vecino no debe usarse
        statics = make_statics([(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0), (6, 0)],
                               ids=['A', 'B', 'C', 'D', 'E', 'F', 'G'])
        clima = np.full((7, 3, 8), 50.0)
        clima[1:, 1, 0] = [60, 62, 64, 58, 56, 1000]
        panel = make_panel(statics=statics, n_hours=3, weather=clima)
        estado = np.array(panel.weather_state, copy=True)
        estado[:, :, :] = CellState.PRESENT
        estado[0, 1, 0] = CellState.MISSING
        panel = panel.with_arrays(weather_state=estado)

        resultado = impute_missing(panel, k=5)
        self.assertEqual(resultado.weather[0, 1, 0], 60.0)
        self.assertEqual(resultado.weather_state[0, 1, 0], CellState.IMPUTED)

    def test_no_missing_cells_is_identity(self):
        panel = make_panel(n_counties=4, n_hours=20, seed=1)
        self.assertTrue(impute_missing(panel).equals(panel))

    def test_present_cells_untouched_and_panel_complete(self):
        panel = make_panel(n_counties=6, n_hours=50, seed=2, missing_weather=0.3)
        resultado = impute_missing(panel, k=2)
        presentes = panel.weather_state == CellState.PRESENT
        self.assertTrue(np.array_equal(resultado.weather[presentes], panel.weather[presentes]))
        self.assertEqual(resultado.missing_weather_count(), 0)

    def test_matches_brute_force_oracle_bitwise(self):
        rng = np.random.default_rng(11)
        for intento in range(50):
            n_c = int(rng.integers(2, 21))
            n_t = int(rng.integers(5, 201))
            panel = make_panel(n_counties=n_c, n_hours=n_t, seed=100 + intento, missing_weather=0.1)
            k = int(rng.integers(1, 7))
            resultado = impute_missing(panel, k=k)
            esperado, llenas = imputacion_por_fuerza_bruta(panel, k)
            # las celdas sin ningún vecino con dato pasan a los niveles de respaldo
            self.assertEqual(resultado.weather[llenas].tobytes(), esperado[llenas].tobytes(), f'panel {intento}')
            self.assertTrue(np.all(resultado.weather_state[llenas] == CellState.IMPUTED))

    def test_fallback_interpolates_when_every_county_is_missing(self):
        panel = make_panel(n_counties=3, n_hours=5, seed=4)
        clima = np.array(panel.weather, copy=True)
        clima[0, :, 0] = [10.0, 0.0, 30.0, 40.0, 50.0]
        estado = np.array(panel.weather_state, copy=True)
        estado[:, 1, 0] = CellState.MISSING
        panel = panel.with_arrays(weather=clima, weather_state=estado)
        resultado, resumen = impute_panel(panel, k=2)
        self.assertEqual(resultado.weather[0, 1, 0], 20.0)
        self.assertEqual(resumen.as_dict()['temperature']['interpolated'], 3)
        self.assertEqual(resultado.missing_weather_count(), 0)

    def test_widened_neighbors(self):
        statics = make_statics([(0, 0), (1, 0), (5, 0)], ids=['A', 'B', 'C'])
        clima = np.full((3, 2, 8), 10.0)
        clima[2, 0, 3] = 99.0
        panel = make_panel(statics=statics, n_hours=2, weather=clima)
        estado = np.zeros_like(panel.weather_state)
        estado[0, 0, 3] = CellState.MISSING
        estado[1, 0, 3] = CellState.MISSING
        panel = panel.with_arrays(weather_state=estado)
        resultado, resumen = impute_panel(panel, k=1)
        # A y B son mutuamente el vecino más cercano y ambos faltan; se amplía hasta C
        self.assertEqual(resultado.weather[0, 0, 3], 99.0)
        self.assertEqual(resultado.weather[1, 0, 3], 99.0)
        self.assertEqual(resumen.as_dict()['wind_gust'], {
            'neighbors': 0, 'widened': 2, 'interpolated': 0, 'county_mean': 0, 'global_mean': 0,
        })

    def test_targets_only_with_flag(self):
        panel = make_panel(n_counties=4, n_hours=10, seed=6, missing_outages=0.2)
        self.assertEqual(impute_missing(panel).missing_outage_count(), panel.missing_outage_count())
        self.assertEqual(impute_missing(panel, impute_targets=True).missing_outage_count(), 0)

    def test_rejects_non_positive_k(self):
        with self.assertRaises(PipelineError):
            impute_missing(make_panel(), k=0)


class MaskAndRecoverTests(SimpleTestCase):
    def test_smooth_field_is_recovered_within_county_spread(self):
        rng = np.random.default_rng(21)
        estaticos = make_statics(rng.uniform([41.5, -86.5], [45.5, -82.5], size=(20, 2)))
        lat = np.array([s.latitude for s in estaticos])
        lon = np.array([s.longitude for s in estaticos])
        horas = np.arange(100)
        # f(lat, lon, t) suave; cada variable con su propio desfase
        campo = (3.0 * lat[:, None, None] + 2.0 * lon[:, None, None]
                 + 5.0 * np.sin(horas[None, :, None] / 12.0 + np.arange(8)[None, None, :]))
        panel = make_panel(n_hours=100, seed=22, statics=estaticos, weather=campo, missing_weather=0.1)
        faltantes = panel.weather_state == CellState.MISSING
        self.assertGreater(faltantes.sum(), 0)

        salida = impute_missing(panel)
        error = np.abs(salida.weather[faltantes] - campo[faltantes]).mean()
        dispersion = campo.std(axis=0).mean()
        self.assertLess(error, dispersion)
        self.assertFalse(np.any(salida.weather_state == CellState.MISSING))
