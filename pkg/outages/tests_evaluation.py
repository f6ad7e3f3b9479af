import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from core.artifacts import read_json
from core.exceptions import MetricError, PipelineError

from .estimators import TrainConfig, train_model
from .evaluation import EvalReport, emit_plot_data, evaluate_event, mape, r2
from .features import LagConfig, build_feature_matrix, build_window_matrix
from .hilp import ExtremeEventSet, HilpSeed
from .testing import make_panel


class MetricTests(SimpleTestCase):
    def test_mape_example(self):
        self.assertAlmostEqual(mape([100, 200], [90, 220]), 10.0)

    def test_zero_actuals_are_excluded(self):
        valor, excluidas = mape([0, 100], [5, 110], return_excluded=True)
        self.assertAlmostEqual(valor, 10.0)
        self.assertEqual(excluidas, 1)

    def test_mape_undefined(self):
        with self.assertRaises(MetricError):
            mape([0, 0, 0], [1, 2, 3])

    def test_r2_examples(self):
        self.assertEqual(r2([1, 2, 3], [1, 2, 3]), 100.0)
        self.assertAlmostEqual(r2([1, 2, 3], [3, 2, 1]), -300.0)

    def test_r2_undefined(self):
        with self.assertRaises(MetricError):
            r2([5, 5, 5], [1, 2, 3])
        with self.assertRaises(MetricError):
            r2([5], [5])

    def test_length_mismatch(self):
        with self.assertRaises(MetricError):
            mape([1, 2], [1])

    def test_match_plain_sums(self):
        rng = np.random.default_rng(8)
        real = rng.integers(0, 500, size=200).astype(float)
        predicho = real + rng.normal(scale=30, size=200)
        validos = [(a, p) for a, p in zip(real, predicho) if a != 0]
        esperado_mape = 100.0 * sum(abs(a - p) / a for a, p in validos) / len(validos)
        media = sum(real) / len(real)
        esperado_r2 = 100.0 * (1 - sum((a - p) ** 2 for a, p in zip(real, predicho))
                               / sum((a - media) ** 2 for a in real))
        self.assertAlmostEqual(mape(real, predicho), esperado_mape, places=9)
        self.assertAlmostEqual(r2(real, predicho), esperado_r2, places=9)

    def test_mape_is_scale_invariant(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            real = rng.uniform(1, 1000, size=50)
            predicho = real * rng.uniform(0.5, 1.5, size=50)
            k = rng.uniform(0.01, 100)
            self.assertAlmostEqual(mape(k * real, k * predicho), mape(real, predicho), places=9)

    def test_r2_is_invariant_under_joint_affine_map(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            real = rng.normal(100, 30, size=50)
            predicho = real + rng.normal(scale=10, size=50)
            a, b = rng.uniform(0.1, 10) * rng.choice([-1.0, 1.0]), rng.normal(scale=500)
            self.assertAlmostEqual(r2(a * real + b, a * predicho + b), r2(real, predicho), places=7)


class EvaluateEventTests(SimpleTestCase):
    def setUp(self):
        self.panel = make_panel(n_counties=3, n_hours=90, seed=12)
        lag = LagConfig(n=3)
        conjunto = ExtremeEventSet(seeds=[
            HilpSeed(self.panel.counties[c], self.panel.hours[t], float(self.panel.outages[c, t]))
            for c in range(3) for t in range(5, 60, 2)
        ])
        entrenamiento = build_feature_matrix(self.panel, conjunto, lag_cfg=lag)
        self.modelo = train_model(entrenamiento, TrainConfig.for_kind('forest', n_estimators=4, seed=0))
        self.evento = build_window_matrix(self.panel, None, lag, self.panel.counties[1],
                                          self.panel.hours[70], self.panel.hours[89])

    def test_report_covers_every_window_hour(self):
        reporte = evaluate_event(self.modelo, self.evento, self.panel, event_id='prueba')
        self.assertEqual(len(reporte.timestamps), 20)
        self.assertEqual(reporte.county_id, self.panel.counties[1])
        self.assertEqual(reporte.actual.tolist(), self.panel.outages[1, 70:90].tolist())
        recalculado = reporte.recompute()
        self.assertEqual(recalculado['mape_pct'], reporte.mape_pct)
        self.assertEqual(recalculado['r2_pct'], reporte.r2_pct)

    def test_saved_report_reloads(self):
        reporte = evaluate_event(self.modelo, self.evento, event_id='prueba')
        with tempfile.TemporaryDirectory() as tmp:
            ruta = reporte.save(Path(tmp) / 'report_forest.json')
            cargado = EvalReport.load(ruta)
        self.assertEqual(cargado.metrics(), reporte.metrics())
        self.assertEqual(cargado.predicted.tobytes(), reporte.predicted.tobytes())


class PlotDataTests(SimpleTestCase):
    def test_series_rows(self):
        horas = list(pd.date_range('2020-06-01T00:00:00Z', periods=4, freq='h'))
        reporte = EvalReport('e', 'forest', horas, np.array([10.0, 20, 30, 40]), np.array([12.0, 18, 33, 41]),
                             mape_pct=8.0, r2_pct=95.0, county_id='26001')
        with tempfile.TemporaryDirectory() as tmp:
            csv, sidecar = emit_plot_data(reporte, Path(tmp) / 'series_forest.csv')
            df = pd.read_csv(csv)
            meta = read_json(sidecar)
        self.assertEqual(list(df.columns), ['timestamp', 'actual', 'predicted'])
        self.assertEqual(len(df), 4)
        self.assertEqual(df['timestamp'].iloc[0], '2020-06-01T00:00:00Z')
        self.assertEqual(meta['hours'], 4)

    def test_importance_sorted_descending(self):
        with tempfile.TemporaryDirectory() as tmp:
            csv, _ = emit_plot_data({'b': 0.2, 'a': 0.5, 'c': 0.2, 'd': 0.1}, Path(tmp) / 'importance.csv')
            df = pd.read_csv(csv)
        self.assertEqual(df['feature'].tolist(), ['a', 'b', 'c', 'd'])

    def test_unsupported_source(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(PipelineError):
                emit_plot_data([1, 2, 3], Path(tmp) / 'x.csv')
