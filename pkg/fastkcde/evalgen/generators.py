"""Synthetic datasets with known conditional densities."""

from functools import partial

import numpy as np
import scipy.stats

from fastkcde.config import SYNTHETIC_FAMILIES, make_synthetic_config_dictionary
from fastkcde.dataset import RawDataset

MIN_SYNTHETIC_N = 20


class SyntheticSpec():
    '''
    Parameters
    ----------
    family : str
        "bimodal_sine", "uniform5d" or "decay_series".
    n : int
        Number of rows; at least 20 so ten folds hold two points each.
    seed : int, default=0
    params : dict, default=None
        Overrides for the family's generator parameters, see
        fastkcde.config.make_synthetic_config_dictionary.
    '''
    def __init__(self, family, n, seed=0, params=None):
        if family not in SYNTHETIC_FAMILIES:
            raise ValueError(f"unknown synthetic family {family!r}; expected one of {', '.join(SYNTHETIC_FAMILIES)}")
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise TypeError(f"n must be an integer, got {n!r}")
        if n < MIN_SYNTHETIC_N:
            raise ValueError(f"n must be at least {MIN_SYNTHETIC_N}, got {n}")
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise TypeError(f"seed must be an integer, got {seed!r}")
        defaults = make_synthetic_config_dictionary(family)
        params = {} if params is None else dict(params)
        unknown = set(params) - set(defaults)
        if unknown:
            raise ValueError(f"unknown parameters for {family}: {sorted(unknown)}")
        defaults.update(params)
        self.family = family
        self.n = int(n)
        self.seed = int(seed)
        self.params = defaults

    def to_dict(self):
        return {"family": self.family, "n": self.n, "seed": self.seed, "params": dict(self.params)}

    def __repr__(self):
        return f"SyntheticSpec(family={self.family!r}, n={self.n}, seed={self.seed}, params={self.params!r})"


def _queries(x, y, d):
    '''Broadcast x to (k, d) and y to (k,) and report whether a single query was passed.'''
    x = np.asarray(x, dtype=float).reshape(-1, d)
    y = np.asarray(y, dtype=float)
    single = x.shape[0] == 1 and y.ndim == 0
    y = np.broadcast_to(np.atleast_1d(y), (x.shape[0],)) if y.size == 1 else y.reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"got {x.shape[0]} x queries but {y.shape[0]} y values")
    return x, y, single


def _result(values, single):
    return float(values[0]) if single else values


def bimodal_sine_density(x, y, amplitude, frequency, noise, flip, **_):
    '''(1 - flip) N(y; A sin(wx), noise^2) + flip N(y; -A sin(wx), noise^2).'''
    x, y, single = _queries(x, y, 1)
    center = amplitude * np.sin(frequency * x[:, 0])
    values = ((1.0 - flip) * scipy.stats.norm.pdf(y, loc=center, scale=noise)
              + flip * scipy.stats.norm.pdf(y, loc=-center, scale=noise))
    return _result(values, single)


def uniform_box_density(x, y, widths, y_dim, **_):
    '''1 / width of y's box inside it, 0 outside, whatever x is.'''
    x, y, single = _queries(x, y, len(widths) - 1)
    width = widths[y_dim - 1]
    values = np.where((y >= 0) & (y <= width), 1.0 / width, 0.0)
    return _result(values, single)


def lag_probabilities(n_lags, decay):
    '''P(k) proportional to decay^k over lags k = 1..n_lags.'''
    weights = decay ** np.arange(1, n_lags + 1, dtype=float)
    return weights / weights.sum()


def decay_series_density(x, y, n_lags, decay, noise, **_):
    '''sum_k P(k) N(y; x_k, noise^2), x_k being the value k steps back.'''
    x, y, single = _queries(x, y, n_lags)
    p = lag_probabilities(n_lags, decay)
    values = scipy.stats.norm.pdf(y[:, None], loc=x, scale=noise) @ p
    return _result(values, single)


def gen_bimodal_sine(spec):
    '''
    x uniform on [x_low, x_high]; y on the sine branch A sin(wx) plus Gaussian
    noise, its sign flipped with probability flip.

    Returns
    -------
    (RawDataset, callable)
        The data and its true density f(y|x), called as truth(x, y).
    '''
    p = spec.params
    rng = np.random.default_rng(spec.seed)
    x = rng.uniform(p["x_low"], p["x_high"], size=spec.n)
    sign = np.where(rng.random(spec.n) < p["flip"], -1.0, 1.0)
    y = sign * p["amplitude"] * np.sin(p["frequency"] * x) + p["noise"] * rng.standard_normal(spec.n)
    return RawDataset(x[:, None], y, x_names=["x"], y_name="y"), partial(bimodal_sine_density, **p)


def gen_uniform5d(spec):
    '''Independent uniform coordinates on [0, w] per configured width; y is coordinate y_dim (1-based).'''
    p = spec.params
    widths = tuple(float(w) for w in p["widths"])
    y_dim = int(p["y_dim"])
    if not 1 <= y_dim <= len(widths):
        raise ValueError(f"y_dim must lie in 1..{len(widths)}, got {y_dim}")
    rng = np.random.default_rng(spec.seed)
    joint = rng.uniform(0.0, 1.0, size=(spec.n, len(widths))) * np.asarray(widths)
    x_cols = [j for j in range(len(widths)) if j != y_dim - 1]
    raw = RawDataset(joint[:, x_cols], joint[:, y_dim - 1], x_names=[f"x{j + 1}" for j in x_cols], y_name="y")
    return raw, partial(uniform_box_density, widths=widths, y_dim=y_dim)


def gen_decay_series(spec):
    '''
    Series z_t = z_{t-k} + noise, the lag k drawn with P(k) proportional to
    decay^k. The series starts from zeros; burn_in steps are discarded, and
    each remaining step gives a row x = (z_{t-1}, ..., z_{t-n_lags}), y = z_t.
    '''
    p = spec.params
    n_lags = int(p["n_lags"])
    burn_in = int(p["burn_in"])
    rng = np.random.default_rng(spec.seed)
    probs = lag_probabilities(n_lags, p["decay"])
    steps = burn_in + spec.n
    lags = rng.choice(np.arange(1, n_lags + 1), size=steps, p=probs)
    shocks = p["noise"] * rng.standard_normal(steps)

    z = np.zeros(n_lags + steps)
    for t in range(steps):
        now = n_lags + t
        z[now] = z[now - lags[t]] + shocks[t]

    rows = np.arange(n_lags + burn_in, n_lags + steps)
    x = np.column_stack([z[rows - k] for k in range(1, n_lags + 1)])
    raw = RawDataset(x, z[rows], x_names=[f"lag{k}" for k in range(1, n_lags + 1)], y_name="y")
    return raw, partial(decay_series_density, **p)


def gen_clustered(n, d, seed=0, n_clusters=8):
    '''
    Benchmark data: predictors from a mixture of Gaussian blobs, response a
    smooth function of them plus noise.

    Returns
    -------
    RawDataset
    '''
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-10.0, 10.0, size=(n_clusters, d))
    spreads = rng.uniform(0.5, 2.0, size=n_clusters)
    labels = rng.integers(0, n_clusters, size=n)
    x = centers[labels] + spreads[labels, None] * rng.standard_normal((n, d))
    y = np.sin(x[:, 0]) + 0.1 * x.sum(axis=1) + 0.5 * rng.standard_normal(n)
    return RawDataset(x, y, x_names=[f"x{j + 1}" for j in range(d)], y_name="y")


GENERATORS = {
    "bimodal_sine": gen_bimodal_sine,
    "uniform5d": gen_uniform5d,
    "decay_series": gen_decay_series,
}


def generate(spec):
    '''Dispatch a SyntheticSpec to its family generator.'''
    return GENERATORS[spec.family](spec)
