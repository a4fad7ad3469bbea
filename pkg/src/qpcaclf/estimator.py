"""scikit-learn compatible front end for the quantum PCA classifier."""
import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from . import classifier as _clf
from ._validation import check_unit_interval
from .exceptions import DimensionError
from .pca import fit_components


class QuantumPCAClassifier(TransformerMixin, OutlierMixin, BaseEstimator):
    """One-class image classifier driven by a projective measurement.

    ``fit`` learns principal components from the rows of ``X``;
    ``predict`` runs the repeated-measurement protocol on each row and
    returns ``1`` ("yes": the sample resembles the training set) or ``-1``
    ("no"), following the scikit-learn novelty-detection convention.

    Parameters
    ----------
    n_components : int, optional
        Number of principal components. When None, the smallest count
        reaching ``variance_threshold`` of the squared singular values is used.
    variance_threshold : float, default=0.95
        Only consulted when ``n_components`` is None.
    center : bool, default=False
        Subtract the mean of the normalized training rows before the SVD.
    n_trials : int, optional
        Override the number of repeated measurements (default n^2).
    random_state : int, RandomState instance or None
        Source of the per-sample seeds used by ``predict``.

    Attributes
    ----------
    model_ : ClassifierModel
    components_ : ndarray of shape (n_components_, n_features_in_)
    singular_values_ : ndarray of shape (n_components_,)
    n_components_ : int
    n_features_in_ : int
    """

    def __init__(
        self,
        n_components=None,
        variance_threshold=0.95,
        center=False,
        n_trials=None,
        random_state=None,
    ):
        self.n_components = n_components
        self.variance_threshold = variance_threshold
        self.center = center
        self.n_trials = n_trials
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        pcs = fit_components(
            X,
            n_components=self.n_components,
            variance_threshold=None if self.n_components is not None else self.variance_threshold,
            center=self.center,
        )
        metadata = {"sample_count": int(X.shape[0]), "centered": bool(self.center)}
        if self.n_components is None:
            metadata["variance_threshold"] = float(self.variance_threshold)
        self.model_ = _clf.ClassifierModel.from_components(pcs, metadata)
        self.components_ = pcs.components
        self.singular_values_ = pcs.singular_values
        self.n_components_ = pcs.s
        self.n_features_in_ = X.shape[1]
        return self

    def _check_X(self, X, unit=False):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(
                f"X has {X.shape[1]} features, but the classifier was fitted "
                f"with {self.n_features_in_}"
            )
        if unit:
            X = check_unit_interval(X, "X")
        return X

    def transform(self, X):
        """Coordinates of each row along the principal components."""
        X = self._check_X(X)
        return X @ self.components_.T

    def likelihood(self, X):
        """Classical likelihood: squared projection onto the component span."""
        X = self._check_X(X)
        return np.array([_clf.classical_likelihood(self.model_, x) for x in X])

    def yes_probability(self, X):
        X = self._check_X(X, unit=True)
        return np.array([_clf.yes_probability(self.model_, x) for x in X])

    def score_samples(self, X):
        """Probability that the full protocol answers "yes" for each row."""
        trials = self.n_trials or self.model_.default_trials
        return _clf.overall_yes_probability(self.yes_probability(X), trials)

    def decision_function(self, X):
        return self.score_samples(X) - 0.5

    def classify(self, X):
        """Run the protocol on each row; returns a list of ClassificationResult."""
        X = self._check_X(X, unit=True)
        rng = check_random_state(self.random_state)
        seeds = rng.randint(0, 2**32 - 1, size=X.shape[0], dtype=np.int64)
        return [
            _clf.classify(self.model_, x, int(seed), self.n_trials)
            for x, seed in zip(X, seeds)
        ]

    def predict(self, X):
        return np.array(
            [1 if r.decision is _clf.Decision.YES else -1 for r in self.classify(X)]
        )
