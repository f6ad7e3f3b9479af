"""
Red LSTM de una capa en numpy, con cabeza lineal sobre el último estado oculto.

    z_t = [x_t, h_{t-1}] · W + b          W: (d + h, 4h), compuertas [i, f, o, g]
    c_t = f ⊙ c_{t-1} + i ⊙ g
    h_t = o ⊙ act(c_t)
    ŷ   = h_T · w_out + b_out

Pérdida MSE, gradientes por retropropagación en el tiempo, optimizador Adam.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.exceptions import PipelineError, TrainingError

from ..features import LagConfig, MinMaxScaler
from .config import TrainConfig

logger = logging.getLogger(__name__)

PARAM_NAMES = ('W', 'b', 'w_out', 'b_out')
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
FORGET_BIAS = 1.0


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _state_fn(activation):
    """Función de candidato/estado y su derivada expresada en la salida."""
    if activation == 'sigmoid':
        return sigmoid, lambda a: a * (1.0 - a)
    return np.tanh, lambda a: 1.0 - a ** 2


@dataclass
class LstmModel:
    params: Dict[str, np.ndarray]
    input_dim: int
    seq_len: int
    config: TrainConfig = field(default_factory=lambda: TrainConfig.for_kind('lstm'))
    x_scaler: Optional[MinMaxScaler] = None
    y_scaler: Optional[MinMaxScaler] = None
    feature_names: Tuple[str, ...] = ()
    lag_cfg: Optional[LagConfig] = None
    curve: List[float] = field(default_factory=list)
    kind: str = 'lstm'

    @property
    def hidden_units(self):
        return self.params['w_out'].shape[0]


def init_params(input_dim, hidden, rng: np.random.Generator):
    """Uniforme en ±1/sqrt(h); sesgo de olvido en 1."""
    limite = 1.0 / np.sqrt(hidden)
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = FORGET_BIAS
    return {
        'W': rng.uniform(-limite, limite, size=(input_dim + hidden, 4 * hidden)),
        'b': b,
        'w_out': rng.uniform(-limite, limite, size=hidden),
        'b_out': np.zeros(1),
    }


def forward(params, X, activation='standard', keep_cache=False):
    """X: (B, T, d). Devuelve ŷ (B,) y, si se pide, el caché de cada paso."""
    X = np.asarray(X, dtype=np.float64)
    lote, pasos, d = X.shape
    h_dim = params['w_out'].shape[0]
    act, _ = _state_fn(activation)
    h = np.zeros((lote, h_dim))
    c = np.zeros((lote, h_dim))
    cache = []
    for t in range(pasos):
        xh = np.concatenate([X[:, t, :], h], axis=1)
        z = xh @ params['W'] + params['b']
        i = sigmoid(z[:, :h_dim])
        f = sigmoid(z[:, h_dim:2 * h_dim])
        o = sigmoid(z[:, 2 * h_dim:3 * h_dim])
        g = act(z[:, 3 * h_dim:])
        c_prev = c
        c = f * c_prev + i * g
        a_c = act(c)
        h = o * a_c
        if keep_cache:
            cache.append((xh, i, f, o, g, c_prev, a_c))
    y = h @ params['w_out'] + params['b_out'][0]
    return (y, h, cache) if keep_cache else y


def loss_and_gradients(params, X, y, activation='standard'):
    """MSE medio del lote y gradiente de cada parámetro (BPTT completo)."""
    y = np.asarray(y, dtype=np.float64)
    pred, h_final, cache = forward(params, X, activation, keep_cache=True)
    lote = len(y)
    h_dim = params['w_out'].shape[0]
    d = params['W'].shape[0] - h_dim
    _, d_act = _state_fn(activation)
    resid = pred - y
    loss = float(np.mean(resid ** 2))

    dy = 2.0 * resid / lote
    grads = {
        'W': np.zeros_like(params['W']),
        'b': np.zeros_like(params['b']),
        'w_out': h_final.T @ dy,
        'b_out': np.array([dy.sum()]),
    }
    dh = np.outer(dy, params['w_out'])
    dc = np.zeros_like(dh)
    for xh, i, f, o, g, c_prev, a_c in reversed(cache):
        do = dh * a_c
        dc = dc + dh * o * d_act(a_c)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            do * o * (1.0 - o),
            dg * d_act(g),
        ], axis=1)
        grads['W'] += xh.T @ dz
        grads['b'] += dz.sum(axis=0)
        dh = (dz @ params['W'].T)[:, d:]
        dc = dc * f
    return loss, grads


class Adam:
    def __init__(self, params, lr):
        self.lr = lr
        self.step = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def update(self, params, grads):
        self.step += 1
        corr1 = 1.0 - ADAM_BETA1 ** self.step
        corr2 = 1.0 - ADAM_BETA2 ** self.step
        for k in PARAM_NAMES:
            self.m[k] = ADAM_BETA1 * self.m[k] + (1.0 - ADAM_BETA1) * grads[k]
            self.v[k] = ADAM_BETA2 * self.v[k] + (1.0 - ADAM_BETA2) * grads[k] ** 2
            params[k] -= self.lr * (self.m[k] / corr1) / (np.sqrt(self.v[k] / corr2) + ADAM_EPS)


def train_lstm(sequences, targets, cfg: TrainConfig = None) -> LstmModel:
    """
    Entrena sobre secuencias ya escaladas (N, T, d) y objetivos escalados (N,).
    Los escaladores se adjuntan luego al modelo (ver train_lstm_matrix).
    """
    cfg = cfg or TrainConfig.for_kind('lstm')
    X = np.asarray(sequences, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if X.ndim != 3 or len(X) == 0:
        raise PipelineError('sequences must be a non-empty (samples, steps, features) array')
    if len(y) != len(X):
        raise PipelineError('sequences and targets have different lengths')

    rng = np.random.default_rng(cfg.seed)
    params = init_params(X.shape[2], cfg.hidden_units, rng)
    opt = Adam(params, cfg.learning_rate)
    curva = []
    for epoca in range(cfg.epochs):
        orden = rng.permutation(len(X))
        acumulado = 0.0
        for inicio in range(0, len(X), cfg.batch_size):
            lote = orden[inicio:inicio + cfg.batch_size]
            loss, grads = loss_and_gradients(params, X[lote], y[lote], cfg.activation)
            if not np.isfinite(loss):
                raise TrainingError(f'non-finite loss at epoch {epoca + 1}')
            opt.update(params, grads)
            acumulado += loss * len(lote)
        curva.append(acumulado / len(X))
        if (epoca + 1) % 10 == 0 or epoca == 0:
            logger.info('LSTM época %d/%d: MSE %.6f', epoca + 1, cfg.epochs, curva[-1])
    return LstmModel(params=params, input_dim=X.shape[2], seq_len=X.shape[1], config=cfg, curve=curva)


def predict_scaled(model: LstmModel, sequences):
    X = np.asarray(sequences, dtype=np.float64)
    if X.ndim != 3 or X.shape[1] != model.seq_len or X.shape[2] != model.input_dim:
        raise PipelineError(
            f'expected sequences of shape (N, {model.seq_len}, {model.input_dim}), got {X.shape}'
        )
    return forward(model.params, X, model.config.activation)


def predict_lstm(model: LstmModel, sequences) -> np.ndarray:
    """Salida en unidades originales; valores negativos se recortan a 0."""
    salida = predict_scaled(model, sequences)
    if model.y_scaler is not None:
        salida = model.y_scaler.inverse_transform(salida)
    return np.maximum(salida, 0.0)
