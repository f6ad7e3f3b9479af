"""
Árbol de regresión CART.

Cada nodo elige, entre todas las variables, el corte que minimiza la suma de
errores cuadrados de los hijos. Umbral = punto medio entre dos valores
consecutivos distintos; una fila va a la izquierda si x ≤ umbral. Las hojas
guardan la media de sus objetivos.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.exceptions import PipelineError

LEAF = -1


@dataclass
class RegressionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    gain: np.ndarray
    n_features: int

    @property
    def node_count(self):
        return len(self.feature)

    @property
    def depth(self):
        profundidad = np.zeros(self.node_count, dtype=np.int64)
        for nodo in range(self.node_count):
            if self.feature[nodo] != LEAF:
                profundidad[self.left[nodo]] = profundidad[nodo] + 1
                profundidad[self.right[nodo]] = profundidad[nodo] + 1
        return int(profundidad.max())

    def apply(self, X):
        """Índice de hoja de cada fila."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise PipelineError(f'expected rows with {self.n_features} features, got shape {X.shape}')
        nodos = np.zeros(len(X), dtype=np.int64)
        filas = np.arange(len(X))
        while True:
            internos = self.feature[nodos] != LEAF
            if not internos.any():
                return nodos
            n = nodos[internos]
            va_izq = X[filas[internos], self.feature[n]] <= self.threshold[n]
            nodos[internos] = np.where(va_izq, self.left[n], self.right[n])

    def predict(self, X):
        return self.value[self.apply(X)]

    def importance(self):
        """Reducción de error cuadrado acumulada por variable (sin normalizar)."""
        imp = np.zeros(self.n_features)
        internos = self.feature != LEAF
        np.add.at(imp, self.feature[internos], self.gain[internos])
        return imp

    def as_dict(self):
        return {
            'feature': self.feature.tolist(),
            'threshold': self.threshold.tolist(),
            'left': self.left.tolist(),
            'right': self.right.tolist(),
            'value': self.value.tolist(),
            'n_samples': self.n_samples.tolist(),
            'gain': self.gain.tolist(),
            'n_features': self.n_features,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            feature=np.array(data['feature'], dtype=np.int64),
            threshold=np.array(data['threshold'], dtype=np.float64),
            left=np.array(data['left'], dtype=np.int64),
            right=np.array(data['right'], dtype=np.int64),
            value=np.array(data['value'], dtype=np.float64),
            n_samples=np.array(data['n_samples'], dtype=np.int64),
            gain=np.array(data['gain'], dtype=np.float64),
            n_features=int(data['n_features']),
        )


def _sse(y):
    return float(np.sum((y - y.mean()) ** 2))


def best_split(X, y, min_samples_leaf=2):
    """
    Devuelve (variable, umbral, reducción) o None si ningún corte reduce el error.
    Empates: gana la variable de menor índice y luego la posición más baja.
    """
    n, d = X.shape
    if n < 2 * min_samples_leaf:
        return None
    orden = np.argsort(X, axis=0, kind='stable')
    xs = np.take_along_axis(X, orden, axis=0)
    ys = y[orden]
    suma = np.cumsum(ys, axis=0)[:-1]
    cuad = np.cumsum(ys ** 2, axis=0)[:-1]
    total, total_cuad = ys[:, 0].sum(), (ys[:, 0] ** 2).sum()
    n_izq = np.arange(1, n)[:, None].astype(np.float64)
    n_der = n - n_izq
    sse = (cuad - suma ** 2 / n_izq) + ((total_cuad - cuad) - (total - suma) ** 2 / n_der)
    valido = (xs[:-1] < xs[1:]) & (n_izq >= min_samples_leaf) & (n_der >= min_samples_leaf)
    sse = np.where(valido, sse, np.inf)
    if not np.isfinite(sse).any():
        return None
    plano = sse.T.reshape(-1)
    mejor = int(np.argmin(plano))
    variable, posicion = divmod(mejor, n - 1)
    reduccion = _sse(y) - plano[mejor]
    if not reduccion > 0:
        return None
    bajo, alto = xs[posicion, variable], xs[posicion + 1, variable]
    umbral = (bajo + alto) / 2.0
    if umbral >= alto:
        umbral = bajo
    return variable, float(umbral), float(reduccion)


def fit_tree(X, y, max_depth: Optional[int] = None, min_samples_leaf: int = 2) -> RegressionTree:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0 or X.shape[1] == 0:
        raise PipelineError('cannot fit a tree on an empty matrix')
    if len(y) != len(X):
        raise PipelineError('rows and targets have different lengths')

    feature, threshold, left, right, value, n_samples, gain = [], [], [], [], [], [], []
    pendientes = [(np.arange(len(X)), 0, None, None)]
    while pendientes:
        indices, profundidad, padre, lado = pendientes.pop()
        nodo = len(feature)
        if padre is not None:
            (left if lado == 'L' else right)[padre] = nodo
        y_nodo = y[indices]
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(y_nodo.mean()))
        n_samples.append(len(indices))
        gain.append(0.0)

        if (max_depth is not None and profundidad >= max_depth) or np.ptp(y_nodo) == 0:
            continue
        corte = best_split(X[indices], y_nodo, min_samples_leaf)
        if corte is None:
            continue
        variable, umbral, reduccion = corte
        feature[nodo], threshold[nodo], gain[nodo] = variable, umbral, reduccion
        va_izq = X[indices, variable] <= umbral
        # derecha primero en la pila: el hijo izquierdo recibe el índice siguiente
        pendientes.append((indices[~va_izq], profundidad + 1, nodo, 'R'))
        pendientes.append((indices[va_izq], profundidad + 1, nodo, 'L'))

    return RegressionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        n_samples=np.array(n_samples, dtype=np.int64),
        gain=np.array(gain, dtype=np.float64),
        n_features=X.shape[1],
    )
