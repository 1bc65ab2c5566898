"""scikit-learn compatible wrappers around the pipeline stages.

``DetectionFilter`` and ``FragmentFeatureExtractor`` take lists of
:class:`~blastfrag.ingest.DetectionSet`; the corpus estimators take plain
feature matrices, so the whole chain drops into a ``sklearn.pipeline.Pipeline``::

    Pipeline([
        ("clean", DetectionFilter()),
        ("features", FragmentFeatureExtractor()),
        ("scale", FeatureStandardizer()),
        ("cluster", FragmentationKMeans(n_clusters=3, random_state=0)),
    ])
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import corpus
from .coords import DEFAULT_EPSILON, build_cloud
from .exceptions import DomainError
from .features import analyze_cloud
from .ingest import DetectionSet, FilterConfig, dbscan_centroids, filter_geometric
from .spatial.kde import DEFAULT_RESOLUTION, DEFAULT_TOP_K
from .spatial.pointpattern import DEFAULT_RADII


def check_detection_sets(X):
    """Accept one DetectionSet or an iterable of them; always return a list."""
    if isinstance(X, DetectionSet):
        return [X]
    X = list(X)
    for i, ds in enumerate(X):
        if not isinstance(ds, DetectionSet):
            raise TypeError(f"element {i} is {type(ds).__name__}, expected DetectionSet")
    return X


class DetectionFilter(TransformerMixin, BaseEstimator):
    """Geometric constraints followed by DBSCAN noise removal on normalized centroids."""

    def __init__(
        self,
        min_area=25.0,
        max_area=None,
        min_aspect=0.1,
        max_aspect=10.0,
        confidence_floor=0.25,
        dbscan_eps=0.05,
        dbscan_min_pts=2,
        use_dbscan=True,
    ):
        self.min_area = min_area
        self.max_area = max_area
        self.min_aspect = min_aspect
        self.max_aspect = max_aspect
        self.confidence_floor = confidence_floor
        self.dbscan_eps = dbscan_eps
        self.dbscan_min_pts = dbscan_min_pts
        self.use_dbscan = use_dbscan

    def _config(self):
        return FilterConfig(
            min_area=self.min_area,
            max_area=self.max_area,
            min_aspect=self.min_aspect,
            max_aspect=self.max_aspect,
            dbscan_eps=self.dbscan_eps,
            dbscan_min_pts=self.dbscan_min_pts,
            confidence_floor=self.confidence_floor,
        )

    def fit(self, X, y=None):
        self.config_ = self._config()
        return self

    def transform(self, X):
        cfg = getattr(self, "config_", None) or self._config()
        out = []
        for ds in check_detection_sets(X):
            ds = filter_geometric(ds, cfg)
            if self.use_dbscan:
                _, ds = dbscan_centroids(ds, cfg.dbscan_eps, cfg.dbscan_min_pts)
            out.append(ds)
        return out


class FragmentFeatureExtractor(TransformerMixin, BaseEstimator):
    """Detection sets to a (n_images, n_features) matrix of spatial descriptors.

    The full :class:`~blastfrag.corpus.FeatureVector` objects of the last
    call are kept in ``feature_vectors_``.  Undefined statistics appear as NaN.
    """

    def __init__(
        self,
        features=corpus.NUMERIC_FEATURES,
        epsilon=DEFAULT_EPSILON,
        bandwidth="auto",
        resolution=DEFAULT_RESOLUTION,
        top_k=DEFAULT_TOP_K,
        radii=DEFAULT_RADII,
        window="normalized",
    ):
        self.features = features
        self.epsilon = epsilon
        self.bandwidth = bandwidth
        self.resolution = resolution
        self.top_k = top_k
        self.radii = radii
        self.window = window

    def fit(self, X, y=None):
        unknown = set(self.features) - set(corpus.NUMERIC_FEATURES)
        if unknown:
            raise DomainError(f"unknown features: {sorted(unknown)}")
        self.n_features_out_ = len(self.features)
        return self

    def extract(self, ds: DetectionSet):
        cloud = build_cloud(ds, self.epsilon)
        return analyze_cloud(cloud, self.bandwidth, self.resolution, self.top_k, self.radii, self.window)

    def transform(self, X):
        self.feature_vectors_ = [self.extract(ds).feature for ds in check_detection_sets(X)]
        out = np.full((len(self.feature_vectors_), len(self.features)), np.nan)
        for i, fv in enumerate(self.feature_vectors_):
            for j, name in enumerate(self.features):
                val = fv.value(name)
                if val is not None:
                    out[i, j] = val
        return out

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.features, dtype=object)


class FeatureStandardizer(TransformerMixin, BaseEstimator):
    """Column z-scores using the sample (N-1) standard deviation.

    Constant columns transform to 0 and are marked in ``constant_``.
    """

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        _, self.mean_, self.scale_, self.constant_ = corpus.zscore(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X)
        safe = np.where(self.constant_, 1.0, self.scale_)
        return np.where(self.constant_, 0.0, (X - self.mean_) / safe)

    def inverse_transform(self, X):
        check_is_fitted(self, "mean_")
        return check_array(X) * self.scale_ + self.mean_


class FragmentationKMeans(ClusterMixin, BaseEstimator):
    def __init__(self, n_clusters=3, max_iter=100, random_state=0, outlier_threshold=3.0):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.random_state = random_state
        self.outlier_threshold = outlier_threshold

    def fit(self, X, y=None):
        X = check_array(X)
        res = corpus.kmeans(X, self.n_clusters, self.random_state, self.max_iter)
        self.labels_ = res.labels
        self.cluster_centers_ = res.centroids
        self.objective_history_ = res.objective_history
        self.inertia_ = res.objective
        self.n_iter_ = res.n_iter
        self.outlier_flags_ = corpus.flag_outliers(X, res.labels, res.centroids, self.outlier_threshold)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X)
        d = ((X[:, None, :] - self.cluster_centers_[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d, axis=1)


class BlastParameterRegressor(RegressorMixin, BaseEstimator):
    """Linear model of a blast design parameter on image features."""

    def __init__(self, parameter_name="P"):
        self.parameter_name = parameter_name

    def fit(self, X, y):
        X = check_array(X)
        self.result_ = corpus.param_regression(X, y, parameter_name=self.parameter_name)
        self.intercept_ = self.result_.gamma0
        self.coef_ = np.asarray(self.result_.gamma)
        self.r_squared_ = self.result_.r_squared
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return check_array(X) @ self.coef_ + self.intercept_
