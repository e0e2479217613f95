import numpy as np
from scipy.spatial.distance import cdist

import fastkcde.config
from fastkcde.kernels import KernelSpec, sample_1d, scaled_kernel
from fastkcde.likelihood import naive_loglik
from fastkcde.utils import coverage_count, narrowest_window

INTERVAL_DEFAULTS = fastkcde.config.make_interval_config_dictionary()


class UnsupportedQueryError(ValueError):
    """The query x lies outside every training point's x-kernel support."""


class ConditionalDensityModel():
    '''
    Double-kernel estimate of f(y|x), queried in raw units.

    f(y|x) = sum_i K_h1(y - y_i) K_h2(|x - x_i|) / sum_i K_h2(|x - x_i|),
    evaluated on standardized coordinates and divided by sigma_y.

    Parameters
    ----------
    data : StandardizedDataset
    h : BandwidthPair
        Bandwidths in standardized units.
    '''
    def __init__(self, data, h):
        self.data = data
        self.h = h
        self.x_kernel = KernelSpec(data.d)
        self.y_kernel = KernelSpec(1)

    def _x_kernel_matrix(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return scaled_kernel(self.x_kernel, cdist(self.data.scale_x(X), self.data.x_s), self.h.h2)

    def weights_many(self, X):
        '''
        Mixture weights for each query row.

        Returns
        -------
        W : np.ndarray, shape (k, n)
            Rows of unsupported queries are all NaN.
        supported : np.ndarray of bool, shape (k,)
        '''
        K = self._x_kernel_matrix(X)
        totals = K.sum(axis=1)
        supported = totals > 0
        W = np.full(K.shape, np.nan)
        W[supported] = K[supported] / totals[supported, None]
        return W, supported

    def weights(self, x_query):
        '''
        w_i = K_h2(|x - x_i|) / sum_j K_h2(|x - x_j|).

        Raises
        ------
        UnsupportedQueryError
        '''
        W, supported = self.weights_many(np.reshape(x_query, (1, -1)))
        if not supported[0]:
            raise UnsupportedQueryError(f"query x={np.ravel(x_query).tolist()} lies outside every x-kernel support")
        return W[0]

    def density_many(self, X, y):
        '''Raw-unit f(y_k|x_k) per row; NaN where the query is unsupported.'''
        W, supported = self.weights_many(X)
        y_s = self.data.scale_y(np.atleast_1d(y))
        Ky = scaled_kernel(self.y_kernel, np.abs(y_s[:, None] - self.data.y_s[None, :]), self.h.h1)
        values = np.full(W.shape[0], np.nan)
        values[supported] = np.sum(W[supported] * Ky[supported], axis=1) / self.data.sigma_y
        return values

    def density(self, x_query, y_query):
        '''f(y|x) in raw units.'''
        w = self.weights(x_query)
        Ky = scaled_kernel(self.y_kernel, np.abs(self.data.scale_y(y_query) - self.data.y_s), self.h.h1)
        return float(np.dot(w, Ky) / self.data.sigma_y)

    def marginal_density(self, x_query):
        '''f(x) = (1/n) sum_i K_h2(|x - x_i|), in raw units.'''
        K = self._x_kernel_matrix(np.reshape(x_query, (1, -1)))
        return float(K.mean() / np.prod(self.data.sigma_x))

    def expectation_many(self, X):
        W, supported = self.weights_many(X)
        values = np.full(W.shape[0], np.nan)
        values[supported] = W[supported] @ self.data.unscale_y(self.data.y_s)
        return values

    def expectation(self, x_query):
        '''E[y|x] = sum_i w_i y_i, exact since every component is symmetric about y_i.'''
        return float(np.dot(self.weights(x_query), self.data.unscale_y(self.data.y_s)))

    def sample_y(self, x_query, count, rng=None):
        '''
        count draws from f(y|x) in raw units.

        Picks component i with probability w_i, then adds h1 times an
        Epanechnikov draw to y_i.
        '''
        rng = np.random.default_rng(rng)
        w = self.weights(x_query)
        components = rng.choice(self.data.n, size=count, p=w)
        draws = self.data.y_s[components] + self.h.h1 * sample_1d(rng, count)
        return self.data.unscale_y(draws)

    def prediction_interval(self, x_query, alpha=INTERVAL_DEFAULTS["alpha"], n_samples=INTERVAL_DEFAULTS["n_samples"],
                            rng=None):
        '''
        Narrowest interval holding a (1 - alpha) fraction of n_samples draws.

        Parameters
        ----------
        x_query : array-like, shape (d,)
        alpha : float, default=0.05
            Miscoverage level in [0, 1); 0 spans every draw.
        n_samples : int, default=5000
            At least 100.
        rng : numpy.random.Generator or int, default=None

        Returns
        -------
        (lo, hi) : tuple of float
        '''
        if not 0 <= alpha < 1:
            raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
        if n_samples < 100:
            raise ValueError(f"n_samples must be at least 100, got {n_samples}")
        draws = np.sort(self.sample_y(x_query, n_samples, rng))
        return narrowest_window(draws, coverage_count(n_samples, alpha))

    def loo_loglik(self):
        '''Exact cross-validated log-likelihood of the training data at these bandwidths.'''
        return naive_loglik(self.data, self.h).value

    def __repr__(self):
        return f"ConditionalDensityModel(n={self.data.n}, d={self.data.d}, h={self.h!r})"
