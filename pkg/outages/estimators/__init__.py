from .boosting import BoostModel, predict_adaboost, staged_predict, train_adaboost, weighted_median
from .config import MODEL_KINDS, TrainConfig
from .forest import ForestModel, forest_importance, predict_forest, train_forest
from .lstm import LstmModel, loss_and_gradients, predict_lstm, train_lstm
from .serialization import FORMAT_TAG, load_model, predict_matrix, save_model, train_lstm_matrix, train_model
from .tree import RegressionTree, fit_tree

__all__ = [
    'BoostModel', 'ForestModel', 'LstmModel', 'RegressionTree', 'TrainConfig', 'MODEL_KINDS', 'FORMAT_TAG',
    'fit_tree', 'forest_importance', 'load_model', 'loss_and_gradients', 'predict_adaboost', 'predict_forest',
    'predict_lstm', 'predict_matrix', 'save_model', 'staged_predict', 'train_adaboost', 'train_forest',
    'train_lstm', 'train_lstm_matrix', 'train_model', 'weighted_median',
]
