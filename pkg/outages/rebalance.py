"""
Rebalanceo SMOGN del conjunto de entrenamiento.

Los casos de alto impacto (q ≥ τ) se sobremuestrean: cada sintético sale de un
vecino aleatorio entre sus k vecinos de alto impacto, por interpolación SMOTER si
el vecino está dentro del rango seguro λ_r = 0.5 · mediana(Δ_r), o por ruido
gaussiano en otro caso. Los casos de bajo impacto se submuestrean sin reemplazo.
Los originales de alto impacto se conservan junto a sus sintéticos.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import ConfigError, PipelineError

from .features import FeatureMatrix, fit_minmax

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingSample:
    z: Tuple[float, ...]
    q: float

    @property
    def vector(self):
        return np.asarray(self.z, dtype=np.float64)


@dataclass(frozen=True)
class RebalanceConfig:
    tau: float = 380.0
    k_neighbors: int = 5
    oversample_rate: int = 1
    undersample_rate: float = 0.5
    noise_fraction: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError('tau must be > 0')
        if int(self.k_neighbors) < 1:
            raise ConfigError('k_neighbors must be a positive integer')
        if int(self.oversample_rate) != self.oversample_rate or self.oversample_rate < 0:
            raise ConfigError('oversample_rate must be a non-negative integer')
        if not 0 < self.undersample_rate <= 1:
            raise ConfigError('undersample_rate must be in (0, 1]')
        if self.noise_fraction < 0:
            raise ConfigError('noise_fraction must be >= 0')


@dataclass
class RebalanceResult:
    samples: List[TrainingSample]
    n_high: int
    n_low_kept: int
    n_smoter: int
    n_gaussian: int
    sources: List[int] = field(default_factory=list)

    @property
    def n_synthetic(self):
        return self.n_smoter + self.n_gaussian


def partition(samples: Sequence[TrainingSample], tau: float):
    if not samples:
        raise PipelineError('cannot partition an empty training set')
    alto = [s for s in samples if s.q >= tau]
    bajo = [s for s in samples if s.q < tau]
    return alto, bajo


def smoter_interpolate(seed_sample: TrainingSample, neighbor_sample: TrainingSample, rng: np.random.Generator,
                       u: Optional[float] = None) -> TrainingSample:
    """z* sobre el segmento [z_r, z_m]; q* promedio de q_r y q_m pesado por la distancia inversa."""
    z_r, z_m = seed_sample.vector, neighbor_sample.vector
    if z_r.shape != z_m.shape:
        raise PipelineError('seed and neighbor have different feature dimensions')
    if u is None:
        u = rng.uniform(0.0, 1.0)
    z = z_r + u * (z_m - z_r)
    d_r = float(np.linalg.norm(z - z_r))
    d_m = float(np.linalg.norm(z - z_m))
    if d_r + d_m == 0:
        q = (seed_sample.q + neighbor_sample.q) / 2
    else:
        q = (d_m * seed_sample.q + d_r * neighbor_sample.q) / (d_r + d_m)
    return TrainingSample(tuple(z.tolist()), float(q))


def gaussian_perturb(seed_sample: TrainingSample, noise_fraction: float, feature_stds,
                     rng: np.random.Generator) -> TrainingSample:
    escala = noise_fraction * np.asarray(feature_stds, dtype=np.float64)
    if np.any(escala < 0):
        raise PipelineError('feature standard deviations must be non-negative')
    z = seed_sample.vector + rng.normal(0.0, 1.0, size=escala.shape) * escala
    return TrainingSample(tuple(z.tolist()), seed_sample.q)


def _neighbors(scaled, i, k):
    distancias = np.sqrt(np.sum((scaled - scaled[i]) ** 2, axis=1))
    distancias[i] = np.inf
    orden = np.argsort(distancias, kind='stable')[:min(k, len(scaled) - 1)]
    return orden, distancias[orden]


def rebalance_samples(samples: Sequence[TrainingSample], cfg: RebalanceConfig) -> RebalanceResult:
    alto, bajo = partition(samples, cfg.tau)
    idx_alto = [i for i, s in enumerate(samples) if s.q >= cfg.tau]
    idx_bajo = [i for i, s in enumerate(samples) if s.q < cfg.tau]
    origen_sint = []
    rho_o = int(cfg.oversample_rate)
    if rho_o > 0 and len(alto) < 2:
        raise PipelineError(
            f'rebalance needs at least 2 high-impact samples (q >= {cfg.tau}) to interpolate, found {len(alto)}'
        )

    streams = np.random.SeedSequence(cfg.seed).spawn(len(alto) + 1)
    sinteticos = []
    n_smoter = n_gauss = 0
    if rho_o > 0:
        todos = np.array([s.z for s in samples], dtype=np.float64)
        escalador = fit_minmax(todos)
        z_alto = np.array([s.z for s in alto], dtype=np.float64)
        escalados = escalador.transform(z_alto)
        stds = todos.std(axis=0)
        for i, muestra in enumerate(alto):
            rng = np.random.default_rng(streams[i])
            vecinos, delta = _neighbors(escalados, i, cfg.k_neighbors)
            rango_seguro = 0.5 * float(np.median(delta))
            for _ in range(rho_o):
                j = int(rng.integers(len(vecinos)))
                if delta[j] < rango_seguro:
                    sinteticos.append(smoter_interpolate(muestra, alto[vecinos[j]], rng))
                    origen_sint.append(idx_alto[i])
                    n_smoter += 1
                else:
                    sinteticos.append(gaussian_perturb(muestra, cfg.noise_fraction, stds, rng))
                    origen_sint.append(idx_alto[i])
                    n_gauss += 1

    rng_bajo = np.random.default_rng(streams[-1])
    conservar = math.floor(len(bajo) * cfg.undersample_rate)
    orden = rng_bajo.permutation(len(bajo))[:conservar]
    bajos = [bajo[i] for i in orden]

    resultado = RebalanceResult(
        samples=list(alto) + sinteticos + bajos,
        n_high=len(alto), n_low_kept=len(bajos), n_smoter=n_smoter, n_gaussian=n_gauss,
        sources=idx_alto + origen_sint + [idx_bajo[i] for i in orden],
    )
    logger.info(
        'SMOGN τ=%s: %d altos + %d sintéticos (%d SMOTER, %d gaussianos) + %d de %d bajos',
        cfg.tau, len(alto), resultado.n_synthetic, n_smoter, n_gauss, len(bajos), len(bajo),
    )
    return resultado


def rebalance(samples: Sequence[TrainingSample], cfg: RebalanceConfig) -> List[TrainingSample]:
    return rebalance_samples(samples, cfg).samples


def samples_from_matrix(matrix: FeatureMatrix) -> List[TrainingSample]:
    return [TrainingSample(tuple(row.tolist()), float(q)) for row, q in zip(matrix.values, matrix.target)]


def rebalance_matrix(matrix: FeatureMatrix, cfg: RebalanceConfig) -> Tuple[FeatureMatrix, RebalanceResult]:
    """Rebalancea una matriz; cada sintético hereda la clave (c, t) de la muestra rara que lo originó."""
    resultado = rebalance_samples(samples_from_matrix(matrix), cfg)
    valores = np.array([s.z for s in resultado.samples], dtype=np.float64).reshape(-1, matrix.n_features)
    objetivo = np.array([s.q for s in resultado.samples], dtype=np.float64)
    antes = float(np.mean(matrix.target >= cfg.tau))
    despues = float(np.mean(objetivo >= cfg.tau)) if len(objetivo) else 0.0
    logger.info('Fracción con q ≥ τ: %.3f → %.3f', antes, despues)
    balanceada = FeatureMatrix(
        keys=[matrix.keys[i] for i in resultado.sources],
        columns=matrix.columns, values=valores, target=objetivo, lag_cfg=matrix.lag_cfg,
    )
    return balanceada, resultado
