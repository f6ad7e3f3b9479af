from dataclasses import asdict, dataclass, replace
from typing import Optional

from core.exceptions import ConfigError

MODEL_KINDS = ('forest', 'adaboost', 'lstm')
ACTIVATIONS = ('standard', 'sigmoid')


@dataclass(frozen=True)
class TrainConfig:
    """
    Hiperparámetros de entrenamiento.

    `max_depth=None` deja los árboles sin límite de profundidad. `activation`
    'standard' usa sigmoide en las compuertas y tanh en candidato/estado;
    'sigmoid' usa sigmoide en todo.
    """
    kind: str = 'forest'
    n_estimators: int = 100
    learning_rate: float = 1.0
    epochs: int = 100
    hidden_units: int = 128
    batch_size: int = 32
    max_depth: Optional[int] = None
    min_samples_leaf: int = 2
    bootstrap: bool = True
    activation: str = 'standard'
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f'unknown model kind: {self.kind}')
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f'activation must be one of {ACTIVATIONS}')
        for nombre in ('n_estimators', 'hidden_units', 'batch_size', 'min_samples_leaf'):
            if int(getattr(self, nombre)) < 1:
                raise ConfigError(f'{nombre} must be a positive integer')
        if self.epochs < 0:
            raise ConfigError('epochs must be >= 0')
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigError('max_depth must be a positive integer or null')
        if not self.learning_rate > 0:
            raise ConfigError('learning_rate must be > 0')

    @classmethod
    def for_kind(cls, kind, **overrides):
        """Valores por defecto de cada modelo."""
        base = {
            'forest': dict(n_estimators=100),
            'adaboost': dict(n_estimators=120, learning_rate=0.001, max_depth=3),
            'lstm': dict(hidden_units=128, epochs=100, learning_rate=0.001, batch_size=32),
        }
        if kind not in base:
            raise ConfigError(f'unknown model kind: {kind}')
        valores = {k: v for k, v in overrides.items() if v is not None}
        return cls(kind=kind, **{**base[kind], **valores})

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def as_dict(self):
        return asdict(self)
