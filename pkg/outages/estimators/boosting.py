"""
AdaBoost.R2 con pérdida lineal.

En cada ronda se ajusta un árbol poco profundo sobre una remuestra ponderada,
L_i = |e_i| / max|e|, pérdida media L̄ = Σ w_i L_i, β = L̄ / (1 − L̄),
peso del aprendiz = lr · log(1/β) y w_i ← w_i · β^{(1 − L_i)·lr}.
La predicción es la mediana ponderada de los aprendices.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from core.exceptions import PipelineError

from .config import TrainConfig
from .forest import _check_training_data
from .tree import RegressionTree, fit_tree

logger = logging.getLogger(__name__)

LOSS_KINDS = ('linear',)


@dataclass
class BoostModel:
    learners: List[RegressionTree]
    weights: List[float]
    errors: List[float]
    feature_names: Tuple[str, ...]
    config: TrainConfig = field(default_factory=lambda: TrainConfig.for_kind('adaboost'))
    loss: str = 'linear'
    kind: str = 'adaboost'

    @property
    def n_features(self):
        return len(self.feature_names)

    @property
    def betas(self):
        """β_m recuperado del peso (exp(−peso/lr))."""
        return [float(np.exp(-w / self.config.learning_rate)) for w in self.weights]


def weighted_median(predictions, weights):
    """
    predictions: (n_filas, n_aprendices). Primer valor ordenado cuya suma
    acumulada de pesos alcanza la mitad del total.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    orden = np.argsort(predictions, axis=1, kind='stable')
    acumulado = np.cumsum(weights[orden], axis=1)
    mitad = acumulado >= 0.5 * acumulado[:, -1][:, None]
    indice = mitad.argmax(axis=1)
    filas = np.arange(len(predictions))
    return predictions[filas, orden[filas, indice]]


def train_adaboost_arrays(X, y, cfg: TrainConfig, feature_names: Sequence[str] = None) -> BoostModel:
    X, y = _check_training_data(X, y)
    n = len(X)
    rng = np.random.default_rng(cfg.seed)
    w = np.full(n, 1.0 / n)
    aprendices, pesos, errores = [], [], []
    for ronda in range(cfg.n_estimators):
        indices = rng.choice(n, size=n, replace=True, p=w)
        arbol = fit_tree(X[indices], y[indices], cfg.max_depth, cfg.min_samples_leaf)
        error = np.abs(arbol.predict(X) - y)
        maximo = error.max()
        perdida = error / maximo if maximo > 0 else error
        promedio = float(np.sum(w * perdida))

        if promedio <= 0:
            aprendices.append(arbol)
            pesos.append(1.0)
            errores.append(0.0)
            logger.info('AdaBoost: ajuste exacto en la ronda %d', ronda + 1)
            break
        if promedio >= 0.5:
            if not aprendices:
                aprendices.append(arbol)
                pesos.append(1.0)
                errores.append(promedio)
            logger.warning(
                'AdaBoost: pérdida media %.3f ≥ 0.5 en la ronda %d; se detiene con %d aprendices',
                promedio, ronda + 1, len(aprendices),
            )
            break

        beta = promedio / (1.0 - promedio)
        aprendices.append(arbol)
        pesos.append(float(cfg.learning_rate * np.log(1.0 / beta)))
        errores.append(promedio)
        w = w * np.power(beta, (1.0 - perdida) * cfg.learning_rate)
        suma = w.sum()
        if not suma > 0:
            break
        w = w / suma

    nombres = tuple(feature_names) if feature_names is not None else tuple(f'x{i}' for i in range(X.shape[1]))
    logger.info('AdaBoost.R2 entrenado: %d aprendices de %d rondas posibles', len(aprendices), cfg.n_estimators)
    return BoostModel(aprendices, pesos, errores, nombres, cfg)


def train_adaboost(matrix, cfg: TrainConfig = None) -> BoostModel:
    cfg = cfg or TrainConfig.for_kind('adaboost')
    return train_adaboost_arrays(matrix.values, matrix.target, cfg, matrix.columns)


def _weak_predictions(model: BoostModel, rows):
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.n_features:
        raise PipelineError(f'expected rows with {model.n_features} features, got shape {rows.shape}')
    return np.column_stack([a.predict(rows) for a in model.learners])


def predict_adaboost(model: BoostModel, rows) -> np.ndarray:
    return weighted_median(_weak_predictions(model, rows), model.weights)


def staged_predict(model: BoostModel, rows) -> Iterator[np.ndarray]:
    """Predicción del ensamble después de cada aprendiz."""
    debiles = _weak_predictions(model, rows)
    for m in range(1, len(model.learners) + 1):
        yield weighted_median(debiles[:, :m], model.weights[:m])
