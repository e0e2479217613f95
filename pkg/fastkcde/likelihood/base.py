import math

import numpy as np

from fastkcde.config import make_det_config_dictionary, make_prob_config_dictionary

DET_DEFAULTS = make_det_config_dictionary()
PROB_DEFAULTS = make_prob_config_dictionary()

# node pairs smaller than this many bootstrap costs are never sampled
SAMPLE_COST_MULTIPLE = 4

METHODS = ("naive", "deterministic", "probabilistic")
METHOD_ALIASES = {"naive": "naive", "det": "deterministic", "deterministic": "deterministic",
                  "prob": "probabilistic", "probabilistic": "probabilistic"}


def resolve_method(method):
    try:
        return METHOD_ALIASES[method]
    except KeyError:
        raise ValueError(f"unknown likelihood method {method!r}; expected one of {sorted(METHOD_ALIASES)}") from None


def unpack_bandwidths(h):
    '''Accepts a BandwidthPair or any (h1, h2) sequence.'''
    if hasattr(h, "h1") and hasattr(h, "h2"):
        h1, h2 = float(h.h1), float(h.h2)
    else:
        h1, h2 = (float(v) for v in h)
    if not (h1 > 0 and h2 > 0):
        raise ValueError(f"bandwidths must be positive, got h1={h1}, h2={h2}")
    return h1, h2


def _check_epsilon(epsilon):
    if isinstance(epsilon, bool) or not isinstance(epsilon, (int, float, np.floating, np.integer)):
        raise TypeError(f"epsilon must be a real number, got {epsilon!r}")
    if not (epsilon >= 0 and math.isfinite(epsilon)):
        raise ValueError(f"epsilon must be finite and non-negative, got {epsilon}")
    return float(epsilon)


def _check_positive_int(name, value, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return int(value)


class DetConfig():
    '''
    Settings for the deterministic dual-tree evaluation.

    Parameters
    ----------
    epsilon : float, default=0.1
        Absolute error tolerance on L. Zero disables approximate pruning, leaving
        only exact zero-contribution prunes.
    '''
    def __init__(self, epsilon=DET_DEFAULTS["epsilon"]):
        self.epsilon = _check_epsilon(epsilon)

    @property
    def approximate(self):
        return self.epsilon > 0

    def threshold(self):
        '''Right-hand side 2e^eps - 1 of the prune inequality.'''
        return 2.0 * math.exp(self.epsilon) - 1.0

    def to_dict(self):
        return {"epsilon": self.epsilon}

    def __repr__(self):
        return f"DetConfig(epsilon={self.epsilon})"


class ProbConfig():
    '''
    Settings for the bootstrap-pruned dual-tree evaluation.

    Parameters
    ----------
    epsilon : float, default=0.1
        Error tolerance plugged into the relative-error threshold e^eps - 1.
        Zero disables approximate pruning.
    m : int, default=25
        Number of index pairs sampled per node pair.
    B : int, default=10
        Number of bootstrap resamples of the sample mean.
    z : float, default=1.5
        Normal quantile z_{alpha/2} of the confidence interval.
    seed : int, default=0
        Seed of the sampling stream; equal seeds give bit-identical results.
    '''
    def __init__(self, epsilon=PROB_DEFAULTS["epsilon"], m=PROB_DEFAULTS["m"], B=PROB_DEFAULTS["B"],
                 z=PROB_DEFAULTS["z"], seed=PROB_DEFAULTS["seed"]):
        self.epsilon = _check_epsilon(epsilon)
        self.m = _check_positive_int("m", m, minimum=2)
        self.B = _check_positive_int("B", B, minimum=2)
        if not (isinstance(z, (int, float, np.floating, np.integer)) and not isinstance(z, bool)):
            raise TypeError(f"z must be a real number, got {z!r}")
        if not z > 0:
            raise ValueError(f"z must be positive, got {z}")
        self.z = float(z)
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise TypeError(f"seed must be an integer, got {seed!r}")
        self.seed = int(seed)

    @property
    def approximate(self):
        return self.epsilon > 0

    def threshold(self):
        '''Relative error bound e^eps - 1.'''
        return math.exp(self.epsilon) - 1.0

    def det_threshold(self):
        '''Deterministic certificate 2e^eps - 1, tried before any sampling.'''
        return 2.0 * math.exp(self.epsilon) - 1.0

    @property
    def min_sample_pairs(self):
        '''Smallest node pair, in distinct point pairs, worth m (B + 1) draws.'''
        return SAMPLE_COST_MULTIPLE * self.m * (self.B + 1)

    def with_seed(self, seed):
        return ProbConfig(epsilon=self.epsilon, m=self.m, B=self.B, z=self.z, seed=seed)

    def to_dict(self):
        return {"epsilon": self.epsilon, "m": self.m, "B": self.B, "z": self.z, "seed": self.seed}

    def __repr__(self):
        return f"ProbConfig(epsilon={self.epsilon}, m={self.m}, B={self.B}, z={self.z}, seed={self.seed})"


class Accumulators():
    '''
    Per-point approximations of A_i = sum_{j != i} K_h1(y_i - y_j) K_h2(|x_i - x_j|),
    in dataset order, with traversal counters.

    pruned_pairs counts the distinct point pairs {i, j} resolved by prunes
    rather than base cases; it never exceeds n(n - 1)/2.
    '''
    def __init__(self, A, prune_count=0, base_case_count=0, pruned_pairs=0):
        self.A = A
        self.prune_count = int(prune_count)
        self.base_case_count = int(base_case_count)
        self.pruned_pairs = int(pruned_pairs)


class LikelihoodResult():
    '''
    Outcome of one cross-validated log-likelihood evaluation.

    Attributes
    ----------
    value : float
        L = mean(log A_i) - log(n - 1), or -inf when diverged.
    diverged : bool
        True exactly when some A_i is zero.
    accumulators : Accumulators
    elapsed : float
        Wall time in seconds.
    method : str
        One of "naive", "deterministic", "probabilistic".
    short_circuited : bool
        True when divergence was detected before traversal; A is then all zeros.
    '''
    def __init__(self, value, diverged, accumulators, elapsed, method, short_circuited=False):
        self.value = value
        self.diverged = diverged
        self.accumulators = accumulators
        self.elapsed = elapsed
        self.method = method
        self.short_circuited = short_circuited

    @property
    def prune_count(self):
        return self.accumulators.prune_count

    @property
    def base_case_count(self):
        return self.accumulators.base_case_count

    @property
    def pruned_pairs(self):
        return self.accumulators.pruned_pairs

    def to_dict(self):
        return {
            "value": self.value,
            "diverged": self.diverged,
            "method": self.method,
            "elapsed": self.elapsed,
            "prune_count": self.prune_count,
            "base_case_count": self.base_case_count,
            "pruned_pairs": self.pruned_pairs,
            "short_circuited": self.short_circuited,
        }

    def __repr__(self):
        return f"LikelihoodResult(method={self.method!r}, value={self.value}, diverged={self.diverged})"


def finish_result(A, method, elapsed, prune_count=0, base_case_count=0, pruned_pairs=0, short_circuited=False):
    '''Turn accumulated A_i into a LikelihoodResult.'''
    n = A.shape[0]
    diverged = bool(np.any(A <= 0))
    if diverged:
        value = -np.inf
    else:
        value = float(np.mean(np.log(A)) - math.log(n - 1))
    return LikelihoodResult(value=value,
                            diverged=diverged,
                            accumulators=Accumulators(A, prune_count, base_case_count, pruned_pairs),
                            elapsed=elapsed,
                            method=method,
                            short_circuited=short_circuited)
