from .base import Classifier
from .boost import AdaBoost, BoostConfig, adaboost_fit, samme_alpha
from .knn import KNearestNeighbors, knn_predict
from .logistic import LogisticRegression, LrConfig, lr_fit
from .svm import (
    GRID_EXPONENTS,
    SVM,
    SvmConfig,
    grid_search,
    rbf_kernel,
    smo_solve,
    stratified_folds,
    svm_fit,
)
from .tree import DecisionTree, TreeConfig, gini, tree_fit

__all__ = [
    "GRID_EXPONENTS",
    "AdaBoost",
    "BoostConfig",
    "Classifier",
    "DecisionTree",
    "KNearestNeighbors",
    "LogisticRegression",
    "LrConfig",
    "SVM",
    "SvmConfig",
    "TreeConfig",
    "adaboost_fit",
    "gini",
    "grid_search",
    "knn_predict",
    "lr_fit",
    "rbf_kernel",
    "samme_alpha",
    "smo_solve",
    "stratified_folds",
    "svm_fit",
    "tree_fit",
]
