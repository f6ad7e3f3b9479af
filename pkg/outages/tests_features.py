import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from core.exceptions import PipelineError

from .features import (
    MONTH_COLUMNS, LagConfig, MinMaxScaler, apply_minmax, build_feature_matrix, build_graph, build_window_matrix,
    export_graph, feature_columns, fit_minmax, haversine_miles, read_feature_matrix, to_sequences,
    write_feature_matrix,
)
from .hilp import ExtremeEventSet, HilpSeed
from .ingest import WEATHER_FEATURES
from .testing import make_panel, make_statics


def conjunto_con(panel, pares):
    """ExtremeEventSet con una semilla por (índice de condado, índice de hora)."""
    return ExtremeEventSet(seeds=[
        HilpSeed(panel.counties[c], panel.hours[t], float(panel.outages[c, t])) for c, t in pares
    ])


def haversine_escalar(lat1, lon1, lat2, lon2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * 3958.8 * math.asin(math.sqrt(a))


class FeatureColumnsTests(SimpleTestCase):
    def test_column_order(self):
        columnas = feature_columns(LagConfig(n=2))
        self.assertEqual(columnas[:5], ('y_lag1', 'y_lag2', 'temperature_lag0', 'temperature_lag1', 'temperature_lag2'))
        self.assertEqual(columnas[-12:], MONTH_COLUMNS)
        self.assertEqual(len(columnas), 2 + 8 * 3 + 5 + 5 + 12)

    def test_without_current_weather(self):
        columnas = feature_columns(LagConfig(n=3, include_current_weather=False))
        self.assertNotIn('temperature_lag0', columnas)
        self.assertIn('temperature_lag3', columnas)

    def test_lag_depth_must_be_positive(self):
        with self.assertRaises(PipelineError):
            LagConfig(n=0)


class FeatureMatrixTests(SimpleTestCase):
    def setUp(self):
        self.panel = make_panel(n_counties=3, n_hours=60, seed=4)
        self.lag = LagConfig(n=4)

    def test_row_reads_lagged_values(self):
        matriz = build_feature_matrix(self.panel, conjunto_con(self.panel, [(1, 30)]), lag_cfg=self.lag)
        fila = dict(zip(matriz.columns, matriz.values[0]))
        self.assertEqual(matriz.keys, [(self.panel.counties[1], self.panel.hours[30])])
        self.assertEqual(matriz.target[0], self.panel.outages[1, 30])
        for k in range(1, 5):
            self.assertEqual(fila[f'y_lag{k}'], self.panel.outages[1, 30 - k])
        for fi, nombre in enumerate(WEATHER_FEATURES):
            for k in range(0, 5):
                self.assertEqual(fila[f'{nombre}_lag{k}'], self.panel.weather[1, 30 - k, fi])

    def test_rows_without_history_are_dropped(self):
        matriz = build_feature_matrix(self.panel, conjunto_con(self.panel, [(0, 2), (0, 10)]), lag_cfg=self.lag)
        self.assertEqual(matriz.n_rows, 1)
        self.assertEqual(matriz.dropped, 1)

    def test_month_uses_local_time(self):
        panel = make_panel(n_counties=2, n_hours=10, start='2020-01-31T20:00:00Z')
        # 2020-02-01T03:00Z es 2020-01-31 22:00 en UTC−5
        matriz = build_feature_matrix(panel, conjunto_con(panel, [(0, 7)]), lag_cfg=LagConfig(n=2),
                                      utc_offset_hours=-5)
        fila = dict(zip(matriz.columns, matriz.values[0]))
        self.assertEqual(fila['month_01'], 1.0)
        self.assertEqual(sum(fila[m] for m in MONTH_COLUMNS), 1.0)

    def test_future_values_do_not_leak(self):
        conjunto = conjunto_con(self.panel, [(0, 20), (2, 35)])
        antes = build_feature_matrix(self.panel, conjunto, lag_cfg=self.lag)

        cortes = np.array(self.panel.outages, copy=True)
        clima = np.array(self.panel.weather, copy=True)
        cortes[0, 21:] += 5000.0
        clima[0, 21:] -= 77.0
        cortes[2, 36:] = 0.0
        clima[2, 36:] = 1e6
        despues = build_feature_matrix(self.panel.with_arrays(outages=cortes, weather=clima), conjunto,
                                       lag_cfg=self.lag)
        self.assertEqual(antes.values.tobytes(), despues.values.tobytes())
        self.assertEqual(antes.target.tobytes(), despues.target.tobytes())

    def test_holdout_window_is_excluded_for_every_county(self):
        conjunto = conjunto_con(self.panel, [(0, 20), (1, 25), (2, 40)])
        ventana = (self.panel.hours[18], self.panel.hours[30])
        matriz = build_feature_matrix(self.panel, conjunto, lag_cfg=self.lag, exclude=ventana)
        self.assertEqual(matriz.excluded, 2)
        self.assertEqual(matriz.keys, [(self.panel.counties[2], self.panel.hours[40])])

    def test_rows_whose_lags_reach_the_holdout_are_excluded(self):
        # n=4: la hora 34 todavía lee la hora 30 como rezago; la 35 ya no
        conjunto = conjunto_con(self.panel, [(0, 32), (1, 34), (2, 35), (2, 40)])
        ventana = (self.panel.hours[18], self.panel.hours[30])
        matriz = build_feature_matrix(self.panel, conjunto, lag_cfg=self.lag, exclude=ventana)
        self.assertEqual(matriz.excluded, 2)
        self.assertEqual(matriz.keys, [
            (self.panel.counties[2], self.panel.hours[35]),
            (self.panel.counties[2], self.panel.hours[40]),
        ])
        for _, hora in matriz.keys:
            rezagos = pd.date_range(end=hora, periods=self.lag.n + 1, freq='h')
            self.assertFalse(((rezagos >= ventana[0]) & (rezagos <= ventana[1])).any(), hora)

    def test_window_matrix_covers_every_hour(self):
        matriz = build_window_matrix(self.panel, None, self.lag, self.panel.counties[1],
                                     self.panel.hours[10], self.panel.hours[19])
        self.assertEqual(matriz.n_rows, 10)
        self.assertTrue(all(c == self.panel.counties[1] for c, _ in matriz.keys))

    def test_missing_weather_rejected(self):
        panel = make_panel(n_counties=2, n_hours=30, missing_weather=0.2)
        with self.assertRaises(PipelineError):
            build_feature_matrix(panel, conjunto_con(panel, [(0, 20)]), lag_cfg=self.lag)

    def test_csv_keeps_values_exactly(self):
        matriz = build_feature_matrix(self.panel, conjunto_con(self.panel, [(0, 20), (1, 44)]), lag_cfg=self.lag)
        with tempfile.TemporaryDirectory() as tmp:
            ruta = write_feature_matrix(matriz, Path(tmp) / 'train_matrix.csv', scaler=fit_minmax(matriz.values))
            leida = read_feature_matrix(ruta)
        self.assertEqual(leida.columns, matriz.columns)
        self.assertEqual(leida.values.tobytes(), matriz.values.tobytes())
        self.assertEqual(leida.keys, matriz.keys)


class MinMaxTests(SimpleTestCase):
    def test_values_outside_training_range_are_not_clipped(self):
        scaler = fit_minmax(np.array([[10.0], [30.0]]))
        self.assertEqual(scaler.transform(np.array([[40.0]]))[0, 0], 1.5)
        self.assertEqual(scaler.transform(np.array([[10.0]]))[0, 0], 0.0)

    def test_constant_column_maps_to_zero(self):
        scaler = fit_minmax(np.array([[5.0, 1.0], [5.0, 3.0]]))
        self.assertEqual(scaler.transform(np.array([[9.0, 2.0]])).tolist(), [[0.0, 0.5]])

    def test_inverse(self):
        scaler = fit_minmax(np.array([0.0, 200.0]))
        self.assertEqual(scaler.inverse_transform(np.array([0.25]))[0], 50.0)

    def test_unfitted_scaler(self):
        with self.assertRaises(PipelineError):
            MinMaxScaler().transform(np.ones((1, 1)))
        with self.assertRaises(PipelineError):
            apply_minmax(None, np.ones((1, 1)))


class SequenceTests(SimpleTestCase):
    def test_shape_and_step_order(self):
        panel = make_panel(n_counties=2, n_hours=40, seed=9)
        lag = LagConfig(n=3)
        matriz = build_feature_matrix(panel, conjunto_con(panel, [(0, 10), (1, 20)]), lag_cfg=lag)
        secuencias = to_sequences(matriz.values, matriz.columns, lag)
        self.assertEqual(secuencias.shape, (2, 4, 1 + 8 + 5 + 5 + 12))
        # primer paso = t-3; último = t con cortes en 0
        self.assertEqual(secuencias[0, 0, 0], panel.outages[0, 7])
        self.assertEqual(secuencias[0, -1, 0], 0.0)
        self.assertEqual(secuencias[0, -1, 1], panel.weather[0, 10, 0])


class GraphTests(SimpleTestCase):
    def setUp(self):
        self.statics = make_statics([(42.0, -83.0), (42.3, -83.2), (42.9, -83.0), (45.0, -86.0)])
        self.panel = make_panel(statics=self.statics, n_hours=6, seed=2)

    def test_one_degree_of_latitude(self):
        self.assertAlmostEqual(float(haversine_miles(42.0, -83.0, 43.0, -83.0)), 69.09, delta=0.01)

    def test_spatial_edges_match_haversine(self):
        grafo = build_graph(self.panel, radius_miles=50.0)
        esperadas = set()
        for i, a in enumerate(self.statics):
            for b in self.statics[i + 1:]:
                if haversine_escalar(a.latitude, a.longitude, b.latitude, b.longitude) <= 50.0:
                    esperadas.add((a.county_id, b.county_id))
        self.assertEqual({tuple(sorted(e)) for e in grafo.adjacency.edges()}, esperadas)
        self.assertEqual(grafo.n_spatial_edges, len(esperadas) * 6)
        self.assertEqual(grafo.n_temporal_edges, 4 * 5)

    def test_node_features_are_scaled(self):
        grafo = build_graph(self.panel)
        self.assertEqual(grafo.node_features.shape, (4, 6, 9))
        self.assertGreaterEqual(grafo.node_features.min(), 0.0)
        self.assertLessEqual(grafo.node_features.max(), 1.0)

    def test_export(self):
        grafo = build_graph(self.panel)
        with tempfile.TemporaryDirectory() as tmp:
            nodos, aristas = export_graph(grafo, tmp)
            df_nodos = pd.read_csv(nodos)
            df_aristas = pd.read_csv(aristas)
        self.assertEqual(len(df_nodos), 24)
        self.assertEqual(len(df_aristas), grafo.n_spatial_edges + grafo.n_temporal_edges)
        self.assertEqual((df_aristas['kind'] == 'temporal').sum(), 20)

    def test_explicit_networkx_graph(self):
        grafo = build_graph(self.panel)
        g = grafo.to_networkx()
        self.assertEqual(g.number_of_nodes(), 24)
        tipos = [d['kind'] for _, _, d in g.edges(data=True)]
        self.assertEqual(tipos.count('temporal'), grafo.n_temporal_edges)
        self.assertEqual(tipos.count('spatial'), 2 * grafo.n_spatial_edges)
        a, b = self.statics[0].county_id, self.statics[1].county_id
        hora = self.panel.hours[3]
        self.assertTrue(g.has_edge((a, hora), (b, hora)) and g.has_edge((b, hora), (a, hora)))
        self.assertTrue(g.has_edge((a, self.panel.hours[2]), (a, hora)))
        self.assertFalse(g.has_edge((a, hora), (a, self.panel.hours[2])))
        self.assertEqual(g.nodes[(a, hora)]['features'].tolist(), grafo.node_features[0, 3].tolist())
