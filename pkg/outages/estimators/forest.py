import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from core.exceptions import PipelineError

from .config import TrainConfig
from .tree import RegressionTree, fit_tree

logger = logging.getLogger(__name__)


@dataclass
class ForestModel:
    trees: List[RegressionTree]
    tree_seeds: List[int]
    feature_names: Tuple[str, ...]
    config: TrainConfig = field(default_factory=lambda: TrainConfig.for_kind('forest'))
    kind: str = 'forest'

    @property
    def n_features(self):
        return len(self.feature_names)


def _check_training_data(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise PipelineError('empty training matrix')
    if X.shape[0] < 2:
        raise PipelineError('training needs at least 2 rows')
    if X.shape[1] == 0:
        raise PipelineError('training matrix has no feature columns')
    if len(y) != len(X):
        raise PipelineError('rows and targets have different lengths')
    return X, y


def tree_seeds(seed, n_trees):
    """Semilla independiente por árbol; permite entrenar los árboles en cualquier orden."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n_trees)]


def train_forest_arrays(X, y, cfg: TrainConfig, feature_names: Sequence[str] = None) -> ForestModel:
    X, y = _check_training_data(X, y)
    n = len(X)
    semillas = tree_seeds(cfg.seed, cfg.n_estimators)
    arboles = []
    for semilla in semillas:
        if cfg.bootstrap:
            indices = np.random.default_rng(semilla).integers(0, n, size=n)
        else:
            indices = np.arange(n)
        arboles.append(fit_tree(X[indices], y[indices], cfg.max_depth, cfg.min_samples_leaf))
    nombres = tuple(feature_names) if feature_names is not None else tuple(f'x{i}' for i in range(X.shape[1]))
    logger.info(
        'Bosque entrenado: %d árboles, %d filas, profundidad media %.1f',
        len(arboles), n, float(np.mean([a.depth for a in arboles])),
    )
    return ForestModel(arboles, semillas, nombres, cfg)


def train_forest(matrix, cfg: TrainConfig = None) -> ForestModel:
    cfg = cfg or TrainConfig.for_kind('forest')
    return train_forest_arrays(matrix.values, matrix.target, cfg, matrix.columns)


def predict_forest(model: ForestModel, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.n_features:
        raise PipelineError(f'expected rows with {model.n_features} features, got shape {rows.shape}')
    salida = np.zeros(len(rows))
    for arbol in model.trees:
        salida += arbol.predict(rows)
    return salida / len(model.trees)


def forest_importance(model: ForestModel):
    """Importancia por impureza: normalizada por árbol, promediada y renormalizada a 1."""
    total = np.zeros(model.n_features)
    for arbol in model.trees:
        imp = arbol.importance()
        if imp.sum() > 0:
            total += imp / imp.sum()
    if total.sum() > 0:
        total = total / total.sum()
    else:
        logger.warning('Ningún árbol tiene cortes; importancias en cero')
    return dict(zip(model.feature_names, total.tolist()))
