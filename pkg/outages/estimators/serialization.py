"""
Contenedor JSON de modelos entrenados, etiquetado con FORMAT_TAG.

Los flotantes se escriben con su representación más corta de ida y vuelta, así
un modelo recargado predice exactamente lo mismo que antes de guardarse.
"""
import logging
from pathlib import Path

import numpy as np

from core.artifacts import read_json, write_json
from core.exceptions import ArtifactIntegrityError, PipelineError

from ..features import FeatureMatrix, LagConfig, MinMaxScaler, fit_minmax, to_sequences
from .boosting import BoostModel, predict_adaboost, train_adaboost
from .config import TrainConfig
from .forest import ForestModel, predict_forest, train_forest
from .lstm import LstmModel, predict_lstm, train_lstm
from .tree import RegressionTree

logger = logging.getLogger(__name__)

FORMAT_TAG = 'outage-model/1'


def train_lstm_matrix(matrix: FeatureMatrix, cfg: TrainConfig = None) -> LstmModel:
    """Escala entradas y objetivo con min-max, arma secuencias y entrena."""
    cfg = cfg or TrainConfig.for_kind('lstm')
    x_scaler = fit_minmax(matrix.values)
    y_scaler = fit_minmax(matrix.target)
    secuencias = to_sequences(x_scaler.transform(matrix.values), matrix.columns, matrix.lag_cfg)
    modelo = train_lstm(secuencias, y_scaler.transform(matrix.target), cfg)
    modelo.x_scaler = x_scaler
    modelo.y_scaler = y_scaler
    modelo.feature_names = tuple(matrix.columns)
    modelo.lag_cfg = matrix.lag_cfg
    return modelo


def train_model(matrix: FeatureMatrix, cfg: TrainConfig):
    entrenadores = {'forest': train_forest, 'adaboost': train_adaboost, 'lstm': train_lstm_matrix}
    return entrenadores[cfg.kind](matrix, cfg)


def predict_matrix(model, matrix: FeatureMatrix) -> np.ndarray:
    """Predicción en unidades originales para cada fila de la matriz."""
    if tuple(matrix.columns) != tuple(model.feature_names):
        raise PipelineError('feature columns differ from the ones the model was trained on')
    if model.kind == 'forest':
        return predict_forest(model, matrix.values)
    if model.kind == 'adaboost':
        return predict_adaboost(model, matrix.values)
    if model.kind == 'lstm':
        if model.x_scaler is None or model.lag_cfg is None:
            raise PipelineError('LSTM model has no input scaler attached')
        secuencias = to_sequences(model.x_scaler.transform(matrix.values), matrix.columns, model.lag_cfg)
        return predict_lstm(model, secuencias)
    raise PipelineError(f'unknown model kind: {model.kind}')


def _payload(model):
    if isinstance(model, ForestModel):
        return {'trees': [t.as_dict() for t in model.trees], 'tree_seeds': list(model.tree_seeds)}
    if isinstance(model, BoostModel):
        return {
            'learners': [t.as_dict() for t in model.learners],
            'weights': list(model.weights),
            'errors': list(model.errors),
            'loss': model.loss,
        }
    if isinstance(model, LstmModel):
        return {
            'params': {k: np.asarray(v).tolist() for k, v in model.params.items()},
            'input_dim': model.input_dim,
            'seq_len': model.seq_len,
            'x_scaler': model.x_scaler.as_dict() if model.x_scaler is not None else None,
            'y_scaler': model.y_scaler.as_dict() if model.y_scaler is not None else None,
            'lag': model.lag_cfg.as_dict() if model.lag_cfg is not None else None,
            'curve': list(model.curve),
        }
    raise PipelineError(f'cannot serialize {type(model).__name__}')


def model_to_dict(model):
    return {
        'format': FORMAT_TAG,
        'kind': model.kind,
        'config': model.config.as_dict(),
        'feature_names': list(model.feature_names),
        'model': _payload(model),
    }


def model_from_dict(data):
    if data.get('format') != FORMAT_TAG:
        raise ArtifactIntegrityError(f"unsupported model format: {data.get('format')!r}")
    cfg = TrainConfig(**data['config'])
    nombres = tuple(data['feature_names'])
    cuerpo = data['model']
    if data['kind'] == 'forest':
        return ForestModel(
            trees=[RegressionTree.from_dict(t) for t in cuerpo['trees']],
            tree_seeds=list(cuerpo['tree_seeds']),
            feature_names=nombres,
            config=cfg,
        )
    if data['kind'] == 'adaboost':
        return BoostModel(
            learners=[RegressionTree.from_dict(t) for t in cuerpo['learners']],
            weights=list(cuerpo['weights']),
            errors=list(cuerpo['errors']),
            feature_names=nombres,
            config=cfg,
            loss=cuerpo.get('loss', 'linear'),
        )
    if data['kind'] == 'lstm':
        return LstmModel(
            params={k: np.array(v, dtype=np.float64) for k, v in cuerpo['params'].items()},
            input_dim=int(cuerpo['input_dim']),
            seq_len=int(cuerpo['seq_len']),
            config=cfg,
            x_scaler=MinMaxScaler.from_dict(cuerpo['x_scaler']) if cuerpo.get('x_scaler') else None,
            y_scaler=MinMaxScaler.from_dict(cuerpo['y_scaler']) if cuerpo.get('y_scaler') else None,
            feature_names=nombres,
            lag_cfg=LagConfig(**cuerpo['lag']) if cuerpo.get('lag') else None,
            curve=list(cuerpo.get('curve', [])),
        )
    raise ArtifactIntegrityError(f"unknown model kind in container: {data['kind']!r}")


def save_model(model, path):
    return write_json(Path(path), model_to_dict(model))


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise PipelineError(f'model file not found: {path}')
    return model_from_dict(read_json(path))
