"""Online-learning machinery for the gap-free band-switch policy."""

from .features import (
    FEATURE_MODES,
    FEATURE_NAMES,
    DegenerateLabelsError,
    assemble_features,
    class_weights,
    split_learn_exploit,
    stratified_partition,
)
from .gbt import GbtClassifier, GbtHyperparams, default_gbt_grid
from .mlp import MlpHyperparams, MlpNetwork, default_mlp_grid, train_mlp_network
from .model import TRAINERS, TrainedModel, kfold_indices, train_gbt, train_mlp

__all__ = [
    "FEATURE_MODES",
    "FEATURE_NAMES",
    "DegenerateLabelsError",
    "GbtClassifier",
    "GbtHyperparams",
    "MlpHyperparams",
    "MlpNetwork",
    "TRAINERS",
    "TrainedModel",
    "assemble_features",
    "class_weights",
    "default_gbt_grid",
    "default_mlp_grid",
    "kfold_indices",
    "split_learn_exploit",
    "stratified_partition",
    "train_gbt",
    "train_mlp",
    "train_mlp_network",
]
