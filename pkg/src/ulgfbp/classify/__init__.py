from .knn import KnnModel, chi_square, knn_fit, knn_predict, knn_predict_many, load_knn, save_knn
from .modelio import load_model, save_model
from .network import ResidualNet, cross_entropy, replace_head, softmax
from .train import AdamState, TrainConfig, TrainTrace, adam_step, train

__all__ = [
    "AdamState", "KnnModel", "ResidualNet", "TrainConfig", "TrainTrace", "adam_step",
    "chi_square", "cross_entropy", "knn_fit", "knn_predict", "knn_predict_many",
    "load_knn", "load_model", "replace_head", "save_knn", "save_model", "softmax", "train",
]
