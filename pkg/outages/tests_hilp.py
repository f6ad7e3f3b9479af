import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from core.exceptions import DataValidationError, PipelineError

from .hilp import (
    HilpSeed, StandardizationParams, build_extreme_set, fit_standardization, identify_seeds, local_months,
    nearest_rank, outage_quantile, seasonal_candidates, select_analogs, storm_mask, weather_distance,
    weather_indicator, weather_vectors,
)
from .ingest import StormEvent
from .testing import make_panel


def tormenta(county_id, inicio, fin):
    return StormEvent(county_id, pd.Timestamp(inicio), pd.Timestamp(fin), 'Thunderstorm Wind')


class StormIndicatorTests(SimpleTestCase):
    def setUp(self):
        self.storms = [tormenta('A', '2020-06-06T10:00:00Z', '2020-06-06T12:00:00Z')]

    def test_interval_is_closed(self):
        self.assertEqual(weather_indicator(self.storms, 'A', '2020-06-06T10:00:00Z'), 1)
        self.assertEqual(weather_indicator(self.storms, 'A', '2020-06-06T12:00:00Z'), 1)
        self.assertEqual(weather_indicator(self.storms, 'A', '2020-06-06T13:00:00Z'), 0)
        self.assertEqual(weather_indicator(self.storms, 'B', '2020-06-06T11:00:00Z'), 0)

    def test_mask_matches_indicator_on_every_cell(self):
        panel = make_panel(n_counties=2, n_hours=6, start='2020-06-06T08:00:00Z')
        storms = [
            tormenta(panel.counties[1], '2020-06-06T09:30:00Z', '2020-06-06T11:00:00Z'),
            tormenta(panel.counties[0], '2020-06-06T12:00:00Z', '2020-06-06T12:45:00Z'),
        ]
        mask = storm_mask(panel, storms)
        self.assertEqual(mask[1].tolist(), [False, False, True, True, False, False])
        self.assertEqual(mask[0].tolist(), [False, False, False, False, True, False])
        for c, county_id in enumerate(panel.counties):
            for t, hora in enumerate(panel.hours):
                self.assertEqual(int(mask[c, t]), weather_indicator(storms, county_id, hora), (county_id, hora))

    def test_hour_before_mid_hour_start_is_never_a_seed(self):
        cortes = np.array([[10.0, 20.0, 900.0, 30.0, 40.0, 50.0]])
        panel = make_panel(n_counties=1, n_hours=6, start='2020-06-06T00:00:00Z', outages=cortes)
        storms = [tormenta(panel.counties[0], '2020-06-06T02:30:00Z', '2020-06-06T04:00:00Z')]
        seeds = identify_seeds(panel, storms, 0.5)
        self.assertNotIn(panel.hours[2], [s.t_ex for s in seeds])
        self.assertEqual([s.t_ex for s in seeds], [panel.hours[3], panel.hours[4]])


class QuantileTests(SimpleTestCase):
    def test_nearest_rank(self):
        valores = [100, 10, 90, 20, 80, 30, 70, 40, 60, 50]
        self.assertEqual(nearest_rank(valores, 0.7), 70.0)
        self.assertEqual(nearest_rank(valores, 0.0), 10.0)
        self.assertEqual(nearest_rank(valores, 1.0), 100.0)

    def test_invalid_alpha_and_empty_set(self):
        with self.assertRaises(PipelineError):
            nearest_rank([1, 2, 3], 1.5)
        with self.assertRaises(PipelineError):
            nearest_rank([], 0.7)

    def test_seed_coverage_at_alpha_07(self):
        # 1000 horas de tormenta con valores distintos 1..1000
        rng = np.random.default_rng(0)
        cortes = rng.permutation(np.arange(1, 1001)).reshape(2, 500).astype(np.float64)
        panel = make_panel(n_counties=2, n_hours=500, outages=cortes)
        fin = panel.hours[-1]
        storms = [tormenta(c, panel.hours[0], fin) for c in panel.counties]

        self.assertEqual(outage_quantile(panel, storms, 0.7), 700.0)
        seeds = identify_seeds(panel, storms, 0.7)
        cobertura = len(seeds) / 1000
        self.assertGreaterEqual(cobertura, 0.3)
        self.assertLessEqual(cobertura, 0.301)
        self.assertTrue(all(s.y_value >= 700.0 for s in seeds))

    def test_hours_outside_storms_are_never_seeds(self):
        cortes = np.array([[5000.0, 1.0, 2.0, 3.0], [4.0, 5.0, 6.0, 7.0]])
        panel = make_panel(n_counties=2, n_hours=4, outages=cortes)
        storms = [tormenta(panel.counties[1], panel.hours[0], panel.hours[-1])]
        seeds = identify_seeds(panel, storms, 0.5)
        self.assertEqual({s.county_id for s in seeds}, {panel.counties[1]})

    def test_no_storm_hours(self):
        panel = make_panel(n_counties=2, n_hours=4)
        with self.assertRaises(PipelineError):
            identify_seeds(panel, [], 0.7)


class SeasonTests(SimpleTestCase):
    def test_january_window_wraps_to_december(self):
        # un año completo en hora local UTC−5
        panel = make_panel(n_counties=1, n_hours=366 * 24, start='2020-01-01T05:00:00Z')
        t_ex = pd.Timestamp('2020-01-15T17:00:00Z')
        candidatos = seasonal_candidates(panel.counties[0], t_ex, panel, season_window=1, utc_offset_hours=-5)

        posicion = panel.hours.get_indexer([t for _, t in candidatos])
        meses = set(local_months(panel, -5)[posicion].tolist())
        self.assertEqual(meses, {12, 1, 2})
        self.assertNotIn((panel.counties[0], t_ex), candidatos)

    def test_daily_aggregation_uses_local_day(self):
        clima = np.zeros((1, 48, 8))
        clima[0, :, 0] = np.arange(48)
        panel = make_panel(n_counties=1, n_hours=48, start='2020-01-01T05:00:00Z', weather=clima)
        x = weather_vectors(panel, 'daily', utc_offset_hours=-5)
        self.assertTrue(np.all(x[0, :24, 0] == 11.5))
        self.assertTrue(np.all(x[0, 24:, 0] == 35.5))


class AnalogTests(SimpleTestCase):
    def setUp(self):
        clima = np.zeros((1, 5, 8))
        clima[0, 1:, 0] = [0.5, 0.2, 0.9, 0.2]
        self.panel = make_panel(n_counties=1, n_hours=5, start='2020-06-01T12:00:00Z', weather=clima)
        self.params = StandardizationParams(np.zeros(8), np.ones(8))
        self.seed = HilpSeed(self.panel.counties[0], self.panel.hours[0], 900.0)

    def test_ascending_distance_with_earlier_hour_on_ties(self):
        analogos = select_analogs(self.seed, 3, self.panel, self.params)
        horas = [self.panel.hour_index(t) for _, t in analogos]
        self.assertEqual(horas, [2, 4, 1])

    def test_fewer_candidates_than_k(self):
        analogos = select_analogs(self.seed, 10, self.panel, self.params)
        self.assertEqual(len(analogos), 4)

    def test_negative_k(self):
        with self.assertRaises(PipelineError):
            select_analogs(self.seed, -1, self.panel, self.params)


class ExtremeSetTests(SimpleTestCase):
    def test_k_zero_returns_seeds_only(self):
        panel = make_panel(n_counties=3, n_hours=100, seed=3)
        storms = [tormenta(panel.counties[0], panel.hours[10], panel.hours[40])]
        conjunto = build_extreme_set(panel, storms, alpha=0.7, K=0)
        self.assertEqual(conjunto.union, frozenset(s.key for s in conjunto.seeds))

    def test_shared_analogs_are_deduplicated(self):
        cortes = np.array([[900.0, 950.0, 1.0, 2.0, 3.0, 4.0]])
        panel = make_panel(n_counties=1, n_hours=6, seed=8, outages=cortes)
        storms = [tormenta(panel.counties[0], panel.hours[0], panel.hours[1])]
        conjunto = build_extreme_set(panel, storms, alpha=1.0, K=10)
        self.assertEqual(len(conjunto.seeds), 1)
        self.assertEqual(len(conjunto.union), 6)

        conjunto = build_extreme_set(panel, storms, alpha=0.5, K=10)
        self.assertEqual(len(conjunto.seeds), 2)
        self.assertEqual(len(conjunto.union), 6)
        frame = conjunto.to_frame()
        self.assertEqual(len(frame), 6)
        self.assertEqual(sorted(frame['origin'].tolist()), ['analog'] * 4 + ['seed'] * 2)

    def test_zero_variance_feature(self):
        clima = np.random.default_rng(1).normal(size=(2, 10, 8))
        clima[:, :, 0] = 3.0
        panel = make_panel(n_counties=2, n_hours=10, weather=clima)
        with self.assertRaises(DataValidationError) as ctx:
            fit_standardization(panel)
        self.assertIn('zero variance: temperature', str(ctx.exception))

    def test_missing_weather_must_be_imputed_first(self):
        panel = make_panel(n_counties=2, n_hours=30, missing_weather=0.2)
        with self.assertRaises(PipelineError):
            weather_vectors(panel)


class WeatherDistanceTests(SimpleTestCase):
    def setUp(self):
        self.params = StandardizationParams(np.zeros(8), np.ones(8))

    def test_identity_and_unit_displacement(self):
        x = np.arange(8.0)
        self.assertEqual(weather_distance(x, x, self.params), 0.0)
        unitario = np.zeros(8)
        unitario[0] = 1.0
        self.assertEqual(weather_distance(unitario, np.zeros(8), self.params), 1.0)

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        params = StandardizationParams(rng.normal(size=8), rng.uniform(0.5, 2.0, size=8))
        for _ in range(50):
            a, b = rng.normal(size=8), rng.normal(size=8)
            self.assertEqual(weather_distance(a, b, params), weather_distance(b, a, params))

    def test_distance_uses_standardized_units(self):
        params = StandardizationParams(np.full(8, 10.0), np.full(8, 2.0))
        a, b = np.full(8, 10.0), np.full(8, 10.0)
        b[3] = 14.0
        self.assertAlmostEqual(weather_distance(a, b, params), 2.0)


class StandardizationTests(SimpleTestCase):
    def test_population_mean_and_std(self):
        clima = np.tile(np.array([1.0, 2.0, 3.0])[None, :, None], (1, 1, 8))
        panel = make_panel(n_counties=1, n_hours=3, weather=clima)
        params = fit_standardization(panel)
        np.testing.assert_allclose(params.mu, np.full(8, 2.0))
        np.testing.assert_allclose(params.sigma, np.full(8, np.sqrt(2.0 / 3.0)))

    def test_refit_on_standardized_panel(self):
        panel = make_panel(n_counties=3, n_hours=50, seed=5)
        params = fit_standardization(panel)
        estandar = panel.with_arrays(weather=params.transform(panel.weather))
        refit = fit_standardization(estandar)
        np.testing.assert_allclose(refit.mu, np.zeros(8), atol=1e-9)
        np.testing.assert_allclose(refit.sigma, np.ones(8), atol=1e-9)


class AnalogPropertyTests(SimpleTestCase):
    def setUp(self):
        # enero a marzo en hora local, para que la ventana de temporada recorte candidatos
        self.panel = make_panel(n_counties=2, n_hours=24 * 90, seed=17, start='2020-01-01T05:00:00Z')
        self.seed = HilpSeed(self.panel.counties[1], self.panel.hours[24 * 10 + 7], 500.0)

    def _oraculo(self, K):
        params = fit_standardization(self.panel)
        ci = self.panel.county_index(self.seed.county_id)
        ti = self.panel.hour_index(self.seed.t_ex)
        candidatos = sorted(self.panel.hour_index(t) for _, t in
                            seasonal_candidates(self.seed.county_id, self.seed.t_ex, self.panel, utc_offset_hours=-5))
        distancias = [
            (weather_distance(self.panel.weather[ci, t], self.panel.weather[ci, ti], params), t) for t in candidatos
        ]
        return [self.panel.hours[t] for _, t in sorted(distancias)[:K]]

    def test_matches_brute_force_and_stays_in_county(self):
        params = fit_standardization(self.panel)
        analogos = select_analogs(self.seed, 7, self.panel, params, utc_offset_hours=-5)
        self.assertEqual([t for _, t in analogos], self._oraculo(7))
        self.assertEqual({c for c, _ in analogos}, {self.seed.county_id})
        self.assertNotIn(self.seed.t_ex, [t for _, t in analogos])

    def test_invariant_under_affine_rescaling(self):
        rng = np.random.default_rng(9)
        escala = rng.uniform(0.5, 3.0, size=8) * np.where(np.arange(8) % 3 == 0, -1.0, 1.0)
        desplazamiento = rng.normal(scale=100.0, size=8)
        reescalado = self.panel.with_arrays(weather=self.panel.weather * escala + desplazamiento)

        antes = select_analogs(self.seed, 10, self.panel, fit_standardization(self.panel), utc_offset_hours=-5)
        despues = select_analogs(self.seed, 10, reescalado, fit_standardization(reescalado), utc_offset_hours=-5)
        self.assertEqual(antes, despues)
