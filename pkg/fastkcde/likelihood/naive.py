import time

import numba
import numpy as np

from fastkcde.likelihood.base import finish_result, unpack_bandwidths
from fastkcde.likelihood.pruning import kernel_constants, pair_value


@numba.njit
def _naive_accumulate(points, d, h1sq, h2sq, cx, cy):
    n = points.shape[0]
    A = np.zeros(n)
    for i in range(n):
        for j in range(i + 1, n):
            v = pair_value(points, i, j, d, h1sq, h2sq, cx, cy)
            A[i] += v
            A[j] += v
    return A


def naive_loglik(data, h):
    '''
    Exact cross-validated log-likelihood by the O(n^2) double sum.

    L = (1/n) sum_i log A_i - log(n - 1), with
    A_i = sum_{j != i} K_h1(y_i - y_j) K_h2(|x_i - x_j|).

    Parameters
    ----------
    data : StandardizedDataset
    h : BandwidthPair or (h1, h2)
        Bandwidths in standardized units.

    Returns
    -------
    LikelihoodResult
        value is -inf and diverged True when some A_i is zero.
    '''
    h1, h2 = unpack_bandwidths(h)
    start = time.perf_counter()
    points = np.ascontiguousarray(data.joint)
    cx, cy = kernel_constants(data.d, h1, h2)
    A = _naive_accumulate(points, data.d, h1 * h1, h2 * h2, cx, cy)
    return finish_result(A, "naive", time.perf_counter() - start)
