from .boosting import (
    BoostedClassifier,
    BoostedRegressor,
    GbtParams,
    fit_boosted_classifier,
    fit_boosted_regressor,
    softmax,
)
from .mlp import (
    CROSS_ENTROPY,
    MSE,
    Adam,
    MlpNetwork,
    MlpParams,
    mlp_forward,
    mlp_train,
    numerical_gradient_check,
)
from .tree import BinnedMatrix, RegressionTree, fit_tree

__all__ = [
    "Adam",
    "BinnedMatrix",
    "BoostedClassifier",
    "BoostedRegressor",
    "CROSS_ENTROPY",
    "GbtParams",
    "MSE",
    "MlpNetwork",
    "MlpParams",
    "RegressionTree",
    "fit_boosted_classifier",
    "fit_boosted_regressor",
    "fit_tree",
    "mlp_forward",
    "mlp_train",
    "numerical_gradient_check",
    "softmax",
]
