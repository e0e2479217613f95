import hashlib
import json
import math

import numpy as np


def narrowest_window(sorted_values, k):
    '''
    (lo, hi) of the narrowest run of k consecutive order statistics.

    Ties go to the leftmost window.
    '''
    n = len(sorted_values)
    if not 1 <= k <= n:
        raise ValueError(f"window size must be between 1 and {n}, got {k}")
    widths = sorted_values[k - 1:] - sorted_values[:n - k + 1]
    start = int(np.argmin(widths))
    return float(sorted_values[start]), float(sorted_values[start + k - 1])


def coverage_count(n_samples, alpha):
    '''Smallest number of samples covering a (1 - alpha) fraction.'''
    return max(1, min(n_samples, math.ceil((1.0 - alpha) * n_samples - 1e-9)))


def spawn_seeds(seed, n):
    '''n independent integer seeds derived from a master seed.'''
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(n)]


def to_jsonable(value):
    '''Replace non-finite floats and numpy scalars so json.dumps emits strict JSON.'''
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def file_digest(path):
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def dumps(obj):
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)
