"""Bandwidth selection: random search on the cross-validated likelihood, and a reference rule."""

import math
import warnings

import numpy as np
import pandas as pd
import scipy.special
from joblib import Parallel, delayed
from tqdm import tqdm

from fastkcde.config import make_search_config_dictionary
from fastkcde.kernels import epanechnikov_normalizer
from fastkcde.likelihood import DetConfig, ProbConfig, evaluate_loglik, resolve_method
from fastkcde.utils import spawn_seeds

SEARCH_DEFAULTS = make_search_config_dictionary()


class AllCandidatesDivergedError(RuntimeError):
    """Every candidate bandwidth pair left some point with an empty kernel neighborhood."""


class BandwidthPair():
    '''
    Bandwidths in standardized units.

    Parameters
    ----------
    h1 : float
        Bandwidth of the y-kernel.
    h2 : float
        Bandwidth of the x-kernel; the effective bandwidth in predictor
        dimension k is h2 * sigma_x[k].
    '''
    def __init__(self, h1, h2):
        h1 = float(h1)
        h2 = float(h2)
        if not (h1 > 0 and math.isfinite(h1) and h2 > 0 and math.isfinite(h2)):
            raise ValueError(f"bandwidths must be finite and positive, got h1={h1}, h2={h2}")
        self.h1 = h1
        self.h2 = h2

    def __iter__(self):
        return iter((self.h1, self.h2))

    def __eq__(self, other):
        return isinstance(other, BandwidthPair) and (self.h1, self.h2) == (other.h1, other.h2)

    def __hash__(self):
        return hash((self.h1, self.h2))

    def __repr__(self):
        return f"BandwidthPair(h1={self.h1!r}, h2={self.h2!r})"

    def effective(self, data):
        '''Per-dimension bandwidths in raw units: (h1 * sigma_y, h2 * sigma_x).'''
        return self.h1 * data.sigma_y, self.h2 * np.asarray(data.sigma_x)

    def to_dict(self):
        return {"h1": self.h1, "h2": self.h2}


class SearchConfig():
    '''
    Settings for random_search.

    Parameters
    ----------
    h_max : float, default=10
        Candidates are drawn uniformly from (0, h_max]^2.
    candidates : int, default=300
        Number of candidate pairs to evaluate.
    seed : int, default=0
        Seed of the candidate stream.
    method : str, default="probabilistic"
        "naive", "deterministic" ("det") or "probabilistic" ("prob").
    method_config : DetConfig or ProbConfig, default=None
        None uses the method's defaults (a ProbConfig seeded with seed).
    n_jobs : int, default=1
        Number of joblib workers evaluating candidates.
    '''
    def __init__(self, h_max=SEARCH_DEFAULTS["h_max"], candidates=SEARCH_DEFAULTS["candidates"],
                 seed=SEARCH_DEFAULTS["seed"], method=SEARCH_DEFAULTS["method"], method_config=None,
                 n_jobs=SEARCH_DEFAULTS["n_jobs"]):
        if not (isinstance(h_max, (int, float, np.integer, np.floating)) and not isinstance(h_max, bool)):
            raise TypeError(f"h_max must be a real number, got {h_max!r}")
        if not (h_max > 0 and math.isfinite(h_max)):
            raise ValueError(f"h_max must be finite and positive, got {h_max}")
        if isinstance(candidates, bool) or not isinstance(candidates, (int, np.integer)):
            raise TypeError(f"candidates must be an integer, got {candidates!r}")
        if candidates < 1:
            raise ValueError(f"candidates must be at least 1, got {candidates}")
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise TypeError(f"seed must be an integer, got {seed!r}")
        self.h_max = float(h_max)
        self.candidates = int(candidates)
        self.seed = int(seed)
        self.method = resolve_method(method)
        if method_config is None:
            if self.method == "deterministic":
                method_config = DetConfig()
            elif self.method == "probabilistic":
                method_config = ProbConfig(seed=self.seed)
        elif self.method == "deterministic" and not isinstance(method_config, DetConfig):
            raise TypeError(f"deterministic search needs a DetConfig, got {method_config!r}")
        elif self.method == "probabilistic" and not isinstance(method_config, ProbConfig):
            raise TypeError(f"probabilistic search needs a ProbConfig, got {method_config!r}")
        self.method_config = method_config
        self.n_jobs = n_jobs

    def to_dict(self):
        return {
            "h_max": self.h_max,
            "candidates": self.candidates,
            "seed": self.seed,
            "method": self.method,
            "method_config": None if self.method_config is None else self.method_config.to_dict(),
            "n_jobs": self.n_jobs,
        }


def sample_candidates(cfg):
    '''The cfg.candidates bandwidth pairs random_search evaluates, in order.'''
    rng = np.random.default_rng(cfg.seed)
    draws = cfg.h_max * (1.0 - rng.random(size=(cfg.candidates, 2)))
    return [BandwidthPair(h1, h2) for h1, h2 in draws]


def _candidate_configs(cfg):
    if cfg.method != "probabilistic":
        return [cfg.method_config] * cfg.candidates
    return [cfg.method_config.with_seed(seed) for seed in spawn_seeds(cfg.method_config.seed, cfg.candidates)]


def _evaluate_candidate(data, tree, pair, method, method_config):
    result = evaluate_loglik(data, tree, pair, method=method, cfg=method_config)
    return {
        "h1": pair.h1,
        "h2": pair.h2,
        "score": result.value,
        "diverged": result.diverged,
        "seconds": result.elapsed,
        "prune_count": result.prune_count,
        "base_case_count": result.base_case_count,
        "pruned_pairs": result.pruned_pairs,
    }


def random_search(data, tree, cfg=None, verbose=0):
    '''
    Select (h1, h2) by maximizing the cross-validated log-likelihood over
    candidates drawn uniformly from (0, h_max]^2.

    Parameters
    ----------
    data : StandardizedDataset
    tree : JointKdTree
        Built over data; unused by the naive method.
    cfg : SearchConfig, default=None
    verbose : int, default=0
        0. nothing
        1. progress bar
        3. best candidate
        4. warnings

    Returns
    -------
    best : BandwidthPair
    trace : pandas.DataFrame
        One row per candidate in evaluation order with columns h1, h2, score,
        diverged, seconds, prune_count, base_case_count, pruned_pairs.

    Raises
    ------
    AllCandidatesDivergedError
        If every candidate evaluated to -inf.
    '''
    cfg = SearchConfig() if cfg is None else cfg
    pairs = sample_candidates(cfg)
    configs = _candidate_configs(cfg)

    if cfg.n_jobs == 1:
        rows = [_evaluate_candidate(data, tree, pair, cfg.method, method_config)
                for pair, method_config in tqdm(list(zip(pairs, configs)), desc="Evaluating bandwidths",
                                                disable=verbose < 1, leave=False)]
    else:
        rows = Parallel(n_jobs=cfg.n_jobs)(delayed(_evaluate_candidate)(data, tree, pair, cfg.method, method_config)
                                           for pair, method_config in zip(pairs, configs))
    trace = pd.DataFrame(rows, columns=["h1", "h2", "score", "diverged", "seconds",
                                        "prune_count", "base_case_count", "pruned_pairs"])

    if trace["diverged"].all():
        raise AllCandidatesDivergedError(f"all {cfg.candidates} candidate bandwidths diverged; "
                                         f"increase h_max (currently {cfg.h_max})")
    n_diverged = int(trace["diverged"].sum())
    if n_diverged and verbose >= 4:
        warnings.warn(f"{n_diverged} of {cfg.candidates} candidate bandwidths diverged", RuntimeWarning)

    best_row = int(np.argmax(trace["score"].to_numpy()))
    best = pairs[best_row]
    if verbose >= 3:
        print(f"Best bandwidths: h1={best.h1:.6g}, h2={best.h2:.6g}, score={trace['score'].iloc[best_row]:.6g}")
    return best, trace


def top_candidates(trace, k=10):
    '''The k best non-diverged rows of a random_search trace, best first.'''
    valid = trace[~trace["diverged"]]
    return valid.sort_values("score", ascending=False, kind="mergesort").head(k)


def epanechnikov_canonical_factor(dim):
    '''
    Ratio of the canonical bandwidths of the radial Epanechnikov and Gaussian
    kernels in dim dimensions, (R(K)/mu2(K)^2 over the Gaussian's)^(1/(dim+4)).

    For the unit-ball kernel c_d(1 - |u|^2), R(K) = 2 c_d^2 pi^(d/2) / Gamma(d/2 + 3)
    and mu2(K) = 1/(d + 4); the Gaussian has R = (4 pi)^(-d/2), mu2 = 1.
    Equals about 2.214 for dim=1.
    '''
    c = epanechnikov_normalizer(dim)
    roughness = 2.0 * c * c * math.pi ** (dim / 2) / scipy.special.gamma(dim / 2 + 3)
    ratio = roughness * (dim + 4) ** 2 / (4 * math.pi) ** (-dim / 2)
    return ratio ** (1.0 / (dim + 4))


def reference_bandwidth(n, dim):
    '''Silverman's normal-reference rule for unit-sd data, rescaled to the Epanechnikov kernel.'''
    return (4.0 / ((dim + 2) * n)) ** (1.0 / (dim + 4)) * epanechnikov_canonical_factor(dim)


def reference_rule(data):
    '''
    Rule-of-thumb bandwidths, applied to the y- and x-kernels separately as
    if each were an unconditional density estimate.

    Parameters
    ----------
    data : StandardizedDataset
        Every column has unit standard deviation, so only n and d matter.

    Returns
    -------
    BandwidthPair
    '''
    if data.n < 2:
        raise ValueError(f"reference_rule needs at least 2 points, got {data.n}")
    return BandwidthPair(reference_bandwidth(data.n, 1), reference_bandwidth(data.n, data.d))
