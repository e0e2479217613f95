import warnings

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

import fastkcde.config
from fastkcde.bandwidth import BandwidthPair, SearchConfig, random_search, reference_rule
from fastkcde.dataset import RawDataset, standardize
from fastkcde.kcde_estimator.model import ConditionalDensityModel
from fastkcde.likelihood import DetConfig, ProbConfig, resolve_method
from fastkcde.spatial import build


ESTIMATOR_DEFAULTS = fastkcde.config.make_estimator_config_dictionary()
INTERVAL_DEFAULTS = fastkcde.config.make_interval_config_dictionary()


class KCDEstimator(BaseEstimator):
    def __init__(self,  bandwidth="likelihood",
                        method=ESTIMATOR_DEFAULTS["method"],
                        epsilon=ESTIMATOR_DEFAULTS["epsilon"],
                        m=ESTIMATOR_DEFAULTS["m"],
                        B=ESTIMATOR_DEFAULTS["B"],
                        z=ESTIMATOR_DEFAULTS["z"],
                        h_max=ESTIMATOR_DEFAULTS["h_max"],
                        candidates=ESTIMATOR_DEFAULTS["candidates"],
                        leaf_size=ESTIMATOR_DEFAULTS["leaf_size"],
                        random_state=ESTIMATOR_DEFAULTS["random_state"],
                        n_jobs=ESTIMATOR_DEFAULTS["n_jobs"],
                        verbose=ESTIMATOR_DEFAULTS["verbose"],
                        ):
        '''
        Kernel conditional density estimator with data-driven bandwidths.

        fit standardizes the data, selects (h1, h2) and keeps the fitted
        ConditionalDensityModel; queries are answered in raw units.

        Parameters
        ----------
        bandwidth : str or (float, float), default="likelihood"
            - "likelihood" : random search on the cross-validated log-likelihood.
            - "reference" : Silverman-style reference rule, no search.
            - (h1, h2) : fixed bandwidths in standardized units.

        method : str, default="probabilistic"
            Likelihood evaluator used by the search: "naive", "deterministic" or "probabilistic".

        epsilon : float, default=0.1
            Error tolerance of the dual-tree evaluators. 0 disables approximation.

        m : int, default=25
            Pairs sampled per node pair by the probabilistic evaluator.

        B : int, default=10
            Bootstrap resamples per node pair.

        z : float, default=1.5
            Confidence multiplier of the bootstrap rule.

        h_max : float, default=10.0
            Upper edge of the bandwidth sampling box.

        candidates : int, default=300
            Number of bandwidth pairs evaluated.

        leaf_size : int, default=16
            Maximum points per kd-tree leaf.

        random_state : int, default=0
            Seed of the candidate and sampling streams.

        n_jobs : int, default=1
            Number of processes evaluating candidates in parallel.

        verbose : int, default=0
            How much information to print during selection.
            0. nothing
            1. progress bar
            3. best bandwidth
            4. warnings

        Attributes
        ----------
        fitted_model_ : ConditionalDensityModel
            Model fitted on the full X, y passed to fit.

        bandwidth_ : BandwidthPair
            Selected bandwidths in standardized units.

        search_trace_ : pandas.DataFrame or None
            Every evaluated candidate with its score; None unless bandwidth="likelihood".

        n_features_in_ : int
        '''
        self.bandwidth = bandwidth
        self.method = method
        self.epsilon = epsilon
        self.m = m
        self.B = B
        self.z = z
        self.h_max = h_max
        self.candidates = candidates
        self.leaf_size = leaf_size
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.verbose = verbose

    def _search_config(self):
        method = resolve_method(self.method)
        if method == "deterministic":
            method_config = DetConfig(epsilon=self.epsilon)
        elif method == "probabilistic":
            method_config = ProbConfig(epsilon=self.epsilon, m=self.m, B=self.B, z=self.z, seed=self.random_state)
        else:
            method_config = None
        return SearchConfig(h_max=self.h_max, candidates=self.candidates, seed=self.random_state,
                            method=method, method_config=method_config, n_jobs=self.n_jobs)

    def fit(self, X, y):
        if isinstance(X, pd.DataFrame):
            raw = RawDataset(X.to_numpy(dtype=float), np.asarray(y, dtype=float), x_names=list(X.columns),
                             y_name=getattr(y, "name", None) or "y")
        else:
            raw = RawDataset(X, y)
        data = standardize(raw)

        self.search_trace_ = None
        if isinstance(self.bandwidth, str):
            if self.bandwidth == "likelihood":
                tree = build(data, leaf_size=self.leaf_size)
                self.bandwidth_, self.search_trace_ = random_search(data, tree, self._search_config(),
                                                                    verbose=self.verbose)
            elif self.bandwidth == "reference":
                self.bandwidth_ = reference_rule(data)
            else:
                raise ValueError(f"bandwidth must be 'likelihood', 'reference' or an (h1, h2) pair, "
                                 f"got {self.bandwidth!r}")
        else:
            self.bandwidth_ = BandwidthPair(*self.bandwidth)

        self.fitted_model_ = ConditionalDensityModel(data, self.bandwidth_)
        self.n_features_in_ = data.d
        return self

    def _check_X(self, X):
        check_is_fitted(self, "fitted_model_")
        if np.ndim(X) == 1:
            X = np.reshape(np.asarray(X, dtype=float), (-1, 1) if self.n_features_in_ == 1 else (1, -1))
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, but KCDEstimator is expecting {self.n_features_in_}")
        return X

    def _warn_unsupported(self, supported):
        n_unsupported = int(np.sum(~supported))
        if n_unsupported:
            warnings.warn(f"{n_unsupported} queries lie outside every x-kernel support; returning NaN for them",
                          UserWarning)

    def predict(self, X):
        '''Conditional expectation E[y|x] per row; NaN for unsupported rows.'''
        X = self._check_X(X)
        values = self.fitted_model_.expectation_many(X)
        self._warn_unsupported(~np.isnan(values))
        return values

    def predict_density(self, X, y):
        '''f(y_k|x_k) in raw units per row; NaN for unsupported rows.'''
        X = self._check_X(X)
        values = self.fitted_model_.density_many(X, np.asarray(y, dtype=float))
        self._warn_unsupported(~np.isnan(values))
        return values

    def predict_interval(self, X, alpha=INTERVAL_DEFAULTS["alpha"], n_samples=INTERVAL_DEFAULTS["n_samples"]):
        '''
        Narrowest (1 - alpha) prediction interval per row.

        Returns
        -------
        np.ndarray, shape (k, 2)
            Columns lo, hi; NaN for unsupported rows.
        '''
        X = self._check_X(X)
        rng = np.random.default_rng(self.random_state)
        _, supported = self.fitted_model_.weights_many(X)
        intervals = np.full((X.shape[0], 2), np.nan)
        for row in np.flatnonzero(supported):
            intervals[row] = self.fitted_model_.prediction_interval(X[row], alpha=alpha, n_samples=n_samples, rng=rng)
        self._warn_unsupported(supported)
        return intervals

    def sample(self, X, count=1):
        '''count draws from f(y|x) per row, shape (k, count); NaN rows when unsupported.'''
        X = self._check_X(X)
        rng = np.random.default_rng(self.random_state)
        _, supported = self.fitted_model_.weights_many(X)
        draws = np.full((X.shape[0], count), np.nan)
        for row in np.flatnonzero(supported):
            draws[row] = self.fitted_model_.sample_y(X[row], count, rng)
        self._warn_unsupported(supported)
        return draws

    def score(self, X, y):
        '''Mean log conditional density of the supported rows.'''
        densities = self.predict_density(X, y)
        densities = densities[~np.isnan(densities)]
        if densities.size == 0:
            raise ValueError("no query lies inside the x-kernel support of the training data")
        with np.errstate(divide="ignore"):
            return float(np.mean(np.log(densities)))


def make_estimator(bandwidth="likelihood", **overrides):
    '''KCDEstimator with the package defaults from fastkcde.config, updated by overrides.'''
    params = dict(fastkcde.config.make_estimator_config_dictionary())
    params.update(overrides)
    return KCDEstimator(bandwidth=bandwidth, **params)
