import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from core.exceptions import ConfigError, PipelineError

from .features import FeatureMatrix, LagConfig
from .rebalance import (
    RebalanceConfig, TrainingSample, gaussian_perturb, partition, rebalance, rebalance_matrix,
    rebalance_samples, smoter_interpolate,
)


def muestras(n_alto, n_bajo, seed=0, dim=3):
    rng = np.random.default_rng(seed)
    altos = [TrainingSample(tuple(rng.normal(size=dim).tolist()), float(rng.uniform(400, 1000)))
             for _ in range(n_alto)]
    bajos = [TrainingSample(tuple(rng.normal(size=dim).tolist()), float(rng.uniform(0, 300)))
             for _ in range(n_bajo)]
    # intercalados para que el orden de entrada no coincida con la partición
    return [m for par in zip(altos, bajos) for m in par] + altos[len(bajos):] + bajos[len(altos):]


class PartitionTests(SimpleTestCase):
    def test_threshold_is_inclusive(self):
        alto, bajo = partition([TrainingSample((0.0,), 380.0), TrainingSample((1.0,), 379.9)], 380.0)
        self.assertEqual([s.q for s in alto], [380.0])
        self.assertEqual([s.q for s in bajo], [379.9])

    def test_empty_set(self):
        with self.assertRaises(PipelineError):
            partition([], 380.0)


class SmoterTests(SimpleTestCase):
    def test_distance_weighted_target(self):
        r = TrainingSample((0.0, 0.0), 400.0)
        m = TrainingSample((2.0, 4.0), 800.0)
        sintetica = smoter_interpolate(r, m, np.random.default_rng(0), u=0.25)
        self.assertEqual(sintetica.z, (0.5, 1.0))
        self.assertAlmostEqual(sintetica.q, 500.0, places=9)

    def test_points_on_segment_and_target_between_endpoints(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            r = TrainingSample(tuple(rng.normal(size=4).tolist()), float(rng.uniform(380, 900)))
            m = TrainingSample(tuple(rng.normal(size=4).tolist()), float(rng.uniform(380, 900)))
            s = smoter_interpolate(r, m, rng)
            d = m.vector - r.vector
            u = float(np.dot(s.vector - r.vector, d) / np.dot(d, d))
            self.assertGreaterEqual(u, -1e-12)
            self.assertLessEqual(u, 1 + 1e-12)
            np.testing.assert_allclose(s.vector, r.vector + u * d, atol=1e-9)
            self.assertGreaterEqual(s.q, min(r.q, m.q) - 1e-9)
            self.assertLessEqual(s.q, max(r.q, m.q) + 1e-9)

    def test_dimension_mismatch(self):
        with self.assertRaises(PipelineError):
            smoter_interpolate(TrainingSample((0.0,), 1.0), TrainingSample((0.0, 1.0), 1.0), np.random.default_rng(0))


class GaussianTests(SimpleTestCase):
    def test_noise_scale_and_target_kept(self):
        rng = np.random.default_rng(3)
        base = TrainingSample((10.0, 0.0), 450.0)
        draws = [gaussian_perturb(base, 0.02, [100.0, 0.0], rng) for _ in range(5000)]
        primera = np.array([d.z[0] for d in draws])
        self.assertAlmostEqual(float(primera.std()), 2.0, delta=0.1)
        self.assertTrue(all(d.z[1] == 0.0 for d in draws))
        self.assertTrue(all(d.q == 450.0 for d in draws))


class RebalanceTests(SimpleTestCase):
    def test_output_sizes(self):
        resultado = rebalance_samples(muestras(10, 41), RebalanceConfig(seed=1))
        self.assertEqual(resultado.n_high, 10)
        self.assertEqual(resultado.n_synthetic, 10)
        self.assertEqual(resultado.n_low_kept, 20)
        self.assertEqual(len(resultado.samples), 40)
        self.assertEqual(len(resultado.sources), 40)

    def test_oversample_rate_multiplies_synthetics(self):
        resultado = rebalance_samples(muestras(6, 10), RebalanceConfig(oversample_rate=3, seed=2))
        self.assertEqual(resultado.n_synthetic, 18)
        self.assertEqual(resultado.n_smoter + resultado.n_gaussian, 18)

    def test_deterministic_for_a_seed(self):
        datos = muestras(12, 30, seed=4)
        a = rebalance(datos, RebalanceConfig(seed=7))
        b = rebalance(datos, RebalanceConfig(seed=7))
        c = rebalance(datos, RebalanceConfig(seed=8))
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)

    def test_high_impact_fraction_grows(self):
        datos = muestras(10, 90, seed=6)
        salida = rebalance(datos, RebalanceConfig(seed=0))
        antes = np.mean([s.q >= 380.0 for s in datos])
        despues = np.mean([s.q >= 380.0 for s in salida])
        self.assertGreaterEqual(despues, 1.5 * antes)

    def test_originals_kept_and_low_subset(self):
        datos = muestras(8, 20, seed=9)
        salida = rebalance(datos, RebalanceConfig(seed=3))
        altos = [s for s in datos if s.q >= 380.0]
        self.assertEqual(salida[:8], altos)
        bajos_salida = [s for s in salida if s.q < 380.0]
        self.assertTrue(set(bajos_salida) <= {s for s in datos if s.q < 380.0})

    def test_needs_two_high_impact_samples(self):
        with self.assertRaises(PipelineError):
            rebalance(muestras(1, 10), RebalanceConfig())
        # sin sobremuestreo no hace falta interpolar
        self.assertEqual(len(rebalance(muestras(1, 10), RebalanceConfig(oversample_rate=0))), 6)

    def test_invalid_config(self):
        with self.assertRaises(ConfigError):
            RebalanceConfig(tau=0)
        with self.assertRaises(ConfigError):
            RebalanceConfig(undersample_rate=0.0)
        with self.assertRaises(ConfigError):
            RebalanceConfig(k_neighbors=0)


class RebalanceMatrixTests(SimpleTestCase):
    def test_synthetic_rows_inherit_source_key(self):
        datos = muestras(5, 6, seed=2, dim=2)
        horas = pd.date_range('2020-01-01T00:00:00Z', periods=len(datos), freq='h')
        matriz = FeatureMatrix(
            keys=[('26001', t) for t in horas], columns=('a', 'b'),
            values=[s.z for s in datos], target=[s.q for s in datos], lag_cfg=LagConfig(n=1),
        )
        balanceada, resultado = rebalance_matrix(matriz, RebalanceConfig(seed=0))
        self.assertEqual(balanceada.n_rows, 5 + 5 + 3)
        for clave, origen in zip(balanceada.keys, resultado.sources):
            self.assertEqual(clave, matriz.keys[origen])
        self.assertTrue(np.all(balanceada.target[:10] >= 380.0))
