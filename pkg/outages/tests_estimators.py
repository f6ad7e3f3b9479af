import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag

from core.artifacts import write_json
from core.exceptions import ArtifactIntegrityError, ConfigError, PipelineError

from .estimators import (
    TrainConfig, fit_tree, forest_importance, load_model, loss_and_gradients, predict_adaboost, predict_matrix,
    save_model, staged_predict, train_lstm, train_model, weighted_median,
)
from .estimators.boosting import train_adaboost_arrays
from .estimators.forest import predict_forest, train_forest_arrays
from .estimators.lstm import init_params, predict_scaled
from .estimators.tree import best_split
from .evaluation import r2
from .features import LagConfig, build_feature_matrix
from .hilp import ExtremeEventSet, HilpSeed
from .ingest import WEATHER_FEATURES
from .testing import make_panel


def corte_por_fuerza_bruta(X, y, min_samples_leaf):
    """Prueba todos los umbrales punto medio; empates por variable y luego umbral menor."""
    mejor = None
    for j in range(X.shape[1]):
        distintos = np.unique(X[:, j])
        for bajo, alto in zip(distintos[:-1], distintos[1:]):
            umbral = (bajo + alto) / 2.0
            izq = X[:, j] <= umbral
            if izq.sum() < min_samples_leaf or (~izq).sum() < min_samples_leaf:
                continue
            sse = ((y[izq] - y[izq].mean()) ** 2).sum() + ((y[~izq] - y[~izq].mean()) ** 2).sum()
            if mejor is None or sse < mejor[2] - 1e-9:
                mejor = (j, umbral, sse)
    return mejor


def matriz_pequena(n_hours=80, seed=0):
    panel = make_panel(n_counties=3, n_hours=n_hours, seed=seed)
    pares = [(c, t) for c in range(3) for t in range(6, n_hours, 3)]
    conjunto = ExtremeEventSet(seeds=[
        HilpSeed(panel.counties[c], panel.hours[t], float(panel.outages[c, t])) for c, t in pares
    ])
    return build_feature_matrix(panel, conjunto, lag_cfg=LagConfig(n=3))


class TrainConfigTests(SimpleTestCase):
    def test_defaults_per_kind(self):
        self.assertEqual(TrainConfig.for_kind('adaboost').n_estimators, 120)
        self.assertEqual(TrainConfig.for_kind('adaboost').learning_rate, 0.001)
        self.assertEqual(TrainConfig.for_kind('lstm').hidden_units, 128)
        self.assertEqual(TrainConfig.for_kind('forest', n_estimators=None).n_estimators, 100)

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            TrainConfig.for_kind('svm')
        with self.assertRaises(ConfigError):
            TrainConfig(kind='lstm', activation='relu')
        with self.assertRaises(ConfigError):
            TrainConfig(n_estimators=0)


class TreeTests(SimpleTestCase):
    def test_obvious_split(self):
        X = np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]])
        y = np.array([0.0, 0.0, 0.0, 5.0, 5.0, 5.0])
        variable, umbral, reduccion = best_split(X, y, min_samples_leaf=2)
        self.assertEqual((variable, umbral), (0, 6.5))
        self.assertAlmostEqual(reduccion, 37.5)
        arbol = fit_tree(X, y)
        self.assertEqual(arbol.predict(np.array([[2.5], [11.5]])).tolist(), [0.0, 5.0])

    def test_matches_exhaustive_search(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            X = rng.normal(size=(25, 3))
            y = rng.normal(size=25)
            variable, umbral, _ = best_split(X, y, min_samples_leaf=2)
            esperado = corte_por_fuerza_bruta(X, y, 2)
            self.assertEqual(variable, esperado[0])
            self.assertAlmostEqual(umbral, esperado[1])

    def test_constant_target_is_a_single_leaf(self):
        arbol = fit_tree(np.arange(20.0).reshape(10, 2), np.full(10, 7.0))
        self.assertEqual(arbol.node_count, 1)

    def test_max_depth(self):
        rng = np.random.default_rng(1)
        arbol = fit_tree(rng.normal(size=(200, 2)), rng.normal(size=200), max_depth=3)
        self.assertLessEqual(arbol.depth, 3)


class ForestTests(SimpleTestCase):
    def test_constant_target(self):
        X = np.random.default_rng(0).normal(size=(30, 4))
        modelo = train_forest_arrays(X, np.full(30, 7.0), TrainConfig(n_estimators=10))
        self.assertTrue(np.all(predict_forest(modelo, X) == 7.0))

    def test_importance_ranks_informative_feature_first(self):
        rng = np.random.default_rng(2)
        X = rng.uniform(size=(300, 3))
        y = 10.0 * X[:, 1] + 0.1 * rng.normal(size=300)
        modelo = train_forest_arrays(X, y, TrainConfig(n_estimators=20, seed=3), ['a', 'b', 'c'])
        importancia = forest_importance(modelo)
        self.assertEqual(max(importancia, key=importancia.get), 'b')
        self.assertAlmostEqual(sum(importancia.values()), 1.0)

    def test_seed_reproducible(self):
        X = np.random.default_rng(5).normal(size=(50, 2))
        y = X[:, 0] ** 2
        a = train_forest_arrays(X, y, TrainConfig(n_estimators=5, seed=9))
        b = train_forest_arrays(X, y, TrainConfig(n_estimators=5, seed=9))
        self.assertEqual(predict_forest(a, X).tobytes(), predict_forest(b, X).tobytes())

    def test_needs_two_rows(self):
        with self.assertRaises(PipelineError):
            train_forest_arrays(np.ones((1, 3)), np.ones(1), TrainConfig())

    @tag('slow')
    def test_weather_driven_outages_generalize(self):
        # cortes = g(precipitación y viento de la hora anterior) + ruido
        rng = np.random.default_rng(11)
        clima = rng.normal(50.0, 10.0, size=(4, 260, len(WEATHER_FEATURES)))
        lluvia = clima[:, :, WEATHER_FEATURES.index('precipitation')]
        viento = clima[:, :, WEATHER_FEATURES.index('wind_speed')]
        cortes = np.zeros((4, 260))
        cortes[:, 1:] = (20.0 * np.maximum(lluvia[:, :-1] - 45.0, 0.0)
                         + 12.0 * np.maximum(viento[:, :-1] - 45.0, 0.0))
        cortes = np.maximum(cortes + rng.normal(scale=5.0, size=cortes.shape), 0.0)
        panel = make_panel(n_counties=4, n_hours=260, seed=11, outages=cortes, weather=clima)

        def matriz(horas):
            conjunto = ExtremeEventSet(seeds=[
                HilpSeed(panel.counties[c], panel.hours[t], float(panel.outages[c, t])) for c in range(4) for t in horas
            ])
            return build_feature_matrix(panel, conjunto, lag_cfg=LagConfig(n=2))

        entrenamiento, prueba = matriz(range(2, 210)), matriz(range(210, 260))
        modelo = train_model(entrenamiento, TrainConfig.for_kind('forest', n_estimators=30, seed=0))
        self.assertGreaterEqual(r2(prueba.target, predict_matrix(modelo, prueba)), 80.0)

        importancia = forest_importance(modelo)
        informativas = ('precipitation_lag1', 'wind_speed_lag1')
        ruido = max(v for k, v in importancia.items() if k not in informativas)
        self.assertTrue(all(importancia[k] > ruido for k in informativas), importancia)


class BoostingTests(SimpleTestCase):
    def test_weighted_median(self):
        self.assertEqual(weighted_median([[1.0, 2.0, 9.0]], [1.0, 1.0, 1.0]).tolist(), [2.0])
        self.assertEqual(weighted_median([[1.0, 2.0, 9.0]], [0.1, 0.1, 5.0]).tolist(), [9.0])

    def test_more_learners_fit_training_data_at_least_as_well(self):
        rng = np.random.default_rng(6)
        X = rng.uniform(-2, 2, size=(300, 2))
        y = np.sin(2 * X[:, 0]) * 100 + 30 * X[:, 1] + rng.normal(scale=5, size=300)
        uno = train_adaboost_arrays(X, y, TrainConfig.for_kind('adaboost', n_estimators=1, seed=1))
        completo = train_adaboost_arrays(X, y, TrainConfig.for_kind('adaboost', seed=1))
        self.assertEqual(len(uno.learners), 1)
        self.assertGreater(len(completo.learners), 1)
        self.assertGreaterEqual(r2(y, predict_adaboost(completo, X)), r2(y, predict_adaboost(uno, X)))

    def test_staged_predict_yields_one_prediction_per_learner(self):
        rng = np.random.default_rng(7)
        X = rng.uniform(-2, 2, size=(120, 2))
        y = 50 * X[:, 0] + rng.normal(scale=2, size=120)
        modelo = train_adaboost_arrays(X, y, TrainConfig.for_kind('adaboost', n_estimators=15, seed=2))
        etapas = list(staged_predict(modelo, X))
        self.assertEqual(len(etapas), len(modelo.learners))
        self.assertEqual(etapas[-1].tobytes(), predict_adaboost(modelo, X).tobytes())

    def test_exact_fit_stops_early(self):
        X = np.array([[0.0], [0.0], [1.0], [1.0]] * 5)
        y = np.array([3.0, 3.0, 8.0, 8.0] * 5)
        modelo = train_adaboost_arrays(X, y, TrainConfig(kind='adaboost', n_estimators=50, max_depth=2))
        self.assertEqual(len(modelo.learners), 1)


class LstmTests(SimpleTestCase):
    def _gradiente_numerico(self, params, X, y, activacion, eps=1e-6):
        numerico = {}
        for nombre, valor in params.items():
            g = np.zeros_like(valor)
            for idx in np.ndindex(valor.shape):
                original = valor[idx]
                valor[idx] = original + eps
                mas, _ = loss_and_gradients(params, X, y, activacion)
                valor[idx] = original - eps
                menos, _ = loss_and_gradients(params, X, y, activacion)
                valor[idx] = original
                g[idx] = (mas - menos) / (2 * eps)
            numerico[nombre] = g
        return numerico

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(size=(6, 5, 3))
        y = rng.uniform(size=6)
        for activacion in ('standard', 'sigmoid'):
            params = init_params(3, 4, np.random.default_rng(1))
            _, analitico = loss_and_gradients(params, X, y, activacion)
            numerico = self._gradiente_numerico(params, X, y, activacion)
            for nombre in params:
                a, n = analitico[nombre].ravel(), numerico[nombre].ravel()
                error = np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12)
                self.assertLess(error, 1e-4, f'{activacion}:{nombre}')

    @tag('slow')
    def test_learns_three_step_lag_echo(self):
        # y_t = x_{t−3}: el objetivo es la entrada tres pasos antes del último
        rng = np.random.default_rng(2)
        X = rng.uniform(size=(2000, 8, 1))
        y = X[:, -4, 0]
        modelo = train_lstm(X, y, TrainConfig.for_kind('lstm', seed=0))
        self.assertEqual((modelo.hidden_units, modelo.config.epochs, modelo.config.learning_rate), (128, 100, 0.001))
        mse = float(np.mean((predict_scaled(modelo, X) - y) ** 2))
        self.assertLess(mse, 0.1 * float(np.var(y)))
        self.assertLess(modelo.curve[-1], modelo.curve[0])


class SerializationTests(SimpleTestCase):
    def test_reloaded_models_predict_identically(self):
        matriz = matriz_pequena()
        configs = [
            TrainConfig.for_kind('forest', n_estimators=5, seed=1),
            TrainConfig.for_kind('adaboost', n_estimators=10, seed=1),
            TrainConfig.for_kind('lstm', hidden_units=4, epochs=2, batch_size=16, seed=1),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            for cfg in configs:
                modelo = train_model(matriz, cfg)
                ruta = save_model(modelo, Path(tmp) / f'{cfg.kind}.json')
                recargado = load_model(ruta)
                self.assertEqual(
                    predict_matrix(modelo, matriz).tobytes(), predict_matrix(recargado, matriz).tobytes(), cfg.kind,
                )

    def test_lstm_predictions_are_non_negative(self):
        matriz = matriz_pequena(seed=3)
        modelo = train_model(matriz, TrainConfig.for_kind('lstm', hidden_units=4, epochs=1, seed=0))
        self.assertTrue(np.all(predict_matrix(modelo, matriz) >= 0.0))

    def test_unknown_format(self):
        with tempfile.TemporaryDirectory() as tmp:
            ruta = write_json(Path(tmp) / 'm.json', {'format': 'otro/9', 'kind': 'forest'})
            with self.assertRaises(ArtifactIntegrityError):
                load_model(ruta)

    def test_column_mismatch(self):
        matriz = matriz_pequena()
        modelo = train_model(matriz, TrainConfig.for_kind('forest', n_estimators=2))
        modelo.feature_names = modelo.feature_names[:-1] + ('otra',)
        with self.assertRaises(PipelineError):
            predict_matrix(modelo, matriz)
