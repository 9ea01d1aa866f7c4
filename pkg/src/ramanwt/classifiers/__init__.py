"""Classical classifiers over scalogram feature vectors."""

from .base import Classifier
from .features import FEATURE_SIDE, area_downsample, feature_matrix, features
from .forest import DecisionTree, RandomForest, best_split, gini
from .knn import KNeighbors
from .naive_bayes import GaussianNB
from .svm import SVM, BinarySVM, dual_objective, kernel_matrix, smo

ML_KINDS = ("nb", "knn", "rf", "svm")


def make_classifier(kind: str, **params) -> Classifier:
    """Instantiate an ML classifier by kind tag with keyword hyperparameters."""
    table = {"nb": GaussianNB, "knn": KNeighbors, "rf": RandomForest, "svm": SVM}
    if kind not in table:
        raise ValueError(f"unknown classifier kind {kind!r}; choose from {ML_KINDS}")
    return table[kind](**params)
