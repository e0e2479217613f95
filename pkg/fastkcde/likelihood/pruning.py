"""Pruning rules deciding when a node pair's contribution is approximated en masse."""

import math

import numba
import numpy as np

from fastkcde.kernels import KernelSpec, kernel_bounds
from fastkcde.spatial import node_dist_x, node_dist_y
from fastkcde.likelihood.base import unpack_bandwidths

NO_PRUNE = -1.0


def kernel_constants(d, h1, h2):
    '''Leading factors c_d / h2^d and c_1 / h1 of the x- and y-kernels.'''
    return KernelSpec(d).normalizer / h2 ** d, KernelSpec(1).normalizer / h1


@numba.njit
def pair_value(points, i, j, d, h1sq, h2sq, cx, cy):
    dy = points[i, d] - points[j, d]
    dy2 = dy * dy
    if dy2 >= h1sq:
        return 0.0
    dx2 = 0.0
    for k in range(d):
        diff = points[i, k] - points[j, k]
        dx2 += diff * diff
    if dx2 >= h2sq:
        return 0.0
    return cx * (1.0 - dx2 / h2sq) * cy * (1.0 - dy2 / h1sq)


@numba.njit
def box_kernel_bounds(lo, hi, a, b, d, h1sq, h2sq, cx, cy):
    '''(vmin, vmax) of v(i, j) over i in node a, j in node b.'''
    dx_min = 0.0
    dx_max = 0.0
    dy_min = 0.0
    dy_max = 0.0
    for k in range(d + 1):
        gap = max(0.0, max(lo[a, k] - hi[b, k], lo[b, k] - hi[a, k]))
        span = max(abs(hi[a, k] - lo[b, k]), abs(hi[b, k] - lo[a, k]))
        if k < d:
            dx_min += gap * gap
            dx_max += span * span
        else:
            dy_min = gap * gap
            dy_max = span * span
    if dx_min >= h2sq or dy_min >= h1sq:
        return 0.0, 0.0
    vmax = cx * (1.0 - dx_min / h2sq) * cy * (1.0 - dy_min / h1sq)
    if dx_max >= h2sq or dy_max >= h1sq:
        return 0.0, vmax
    return cx * (1.0 - dx_max / h2sq) * cy * (1.0 - dy_max / h1sq), vmax


@numba.njit
def det_prune_rule(n_r, vmin, vmax, threshold):
    '''
    Per-point contribution (n_r - 1)(vmax + vmin)/2 when
    (n_r + 1) vmax / ((n_r - 1) vmin) <= threshold, else NO_PRUNE.
    A pair entirely outside kernel support prunes with 0.
    '''
    if vmax == 0.0:
        return 0.0
    if vmin <= 0.0 or n_r <= 1:
        return NO_PRUNE
    if (n_r + 1) * vmax <= threshold * (n_r - 1) * vmin:
        return (n_r - 1) * 0.5 * (vmax + vmin)
    return NO_PRUNE


@numba.njit
def seed_stream(seed):
    np.random.seed(seed)


@numba.njit
def sample_rel_error(points, a_start, a_end, b_start, b_end, d, h1sq, h2sq, cx, cy, m, B, z, samples):
    '''
    Bootstrap estimate of the relative error of n_r * v_hat.

    Draws m slot pairs uniformly from the two ranges, rejecting i == j, and
    fills samples with their kernel products. Returns (z * sigma / v_hat, v_hat),
    or (0, 0) when every sampled product vanished.
    '''
    na = a_end - a_start
    nb = b_end - b_start
    total = 0.0
    for k in range(m):
        i = a_start + np.random.randint(0, na)
        j = b_start + np.random.randint(0, nb)
        while i == j:
            i = a_start + np.random.randint(0, na)
            j = b_start + np.random.randint(0, nb)
        v = pair_value(points, i, j, d, h1sq, h2sq, cx, cy)
        samples[k] = v
        total += v
    v_hat = total / m
    if v_hat == 0.0:
        return 0.0, 0.0
    means = np.empty(B)
    for r in range(B):
        s = 0.0
        for k in range(m):
            s += samples[np.random.randint(0, m)]
        means[r] = s / m
    mu = means.mean()
    var = 0.0
    for r in range(B):
        var += (means[r] - mu) ** 2
    sigma = math.sqrt(var / (B - 1))
    return z * sigma / v_hat, v_hat


def can_approx_det(pair, h, epsilon):
    '''
    Deterministic Can-approximate test for a (r_i, r_j) node pair.

    Parameters
    ----------
    pair : (KdNode, KdNode)
        The i-side and j-side nodes.
    h : BandwidthPair or (h1, h2)
    epsilon : float
        Absolute error tolerance on L.

    Returns
    -------
    float or None
        The per-point contribution S_r-hat to add to every A_i with i in r_i,
        or None when the pair must be recursed.
    '''
    a, b = pair
    h1, h2 = unpack_bandwidths(h)
    tree = a.tree
    x_min, x_max = node_dist_x(a, b)
    y_min, y_max = node_dist_y(a, b)
    kx_lo, kx_hi = kernel_bounds(KernelSpec(tree.d), x_min, x_max, h2)
    ky_lo, ky_hi = kernel_bounds(KernelSpec(1), y_min, y_max, h1)
    contribution = det_prune_rule(b.count, kx_lo * ky_lo, kx_hi * ky_hi, 2.0 * math.exp(epsilon) - 1.0)
    if contribution == NO_PRUNE:
        return None
    return contribution


def estimate_rel_error(pair, h, cfg, rng=None, return_samples=False):
    '''
    Sample-based estimate of dS_r / S_r for a node pair.

    Parameters
    ----------
    pair : (KdNode, KdNode)
    h : BandwidthPair or (h1, h2)
    cfg : ProbConfig
        Supplies m, B and z.
    rng : numpy.random.Generator or int, default=None
        Source of the sampling seed; None uses cfg.seed.
    return_samples : bool, default=False
        Also return the m sampled kernel products.

    Returns
    -------
    (rel_err_estimate, v_hat) or (rel_err_estimate, v_hat, samples)
    '''
    a, b = pair
    tree = a.tree
    h1, h2 = unpack_bandwidths(h)
    if a.index == b.index and a.count < 2:
        raise ValueError("node pair holds no non-duplicate index pair to sample")
    if rng is None:
        seed = cfg.seed
    elif isinstance(rng, np.random.Generator):
        seed = int(rng.integers(0, 2 ** 31 - 1))
    else:
        seed = int(rng)
    cx, cy = kernel_constants(tree.d, h1, h2)
    samples = np.empty(cfg.m)
    seed_stream(seed)
    rel, v_hat = sample_rel_error(tree.points, a.point_range[0], a.point_range[1],
                                  b.point_range[0], b.point_range[1], tree.d,
                                  h1 * h1, h2 * h2, cx, cy, cfg.m, cfg.B, cfg.z, samples)
    if return_samples:
        return rel, v_hat, samples
    return rel, v_hat
