"""Dual-tree evaluation of the cross-validated log-likelihood over a JointKdTree self-join."""

import time

import numba
import numpy as np

from fastkcde.likelihood.base import (DetConfig, ProbConfig, finish_result, resolve_method,
                                      unpack_bandwidths)
from fastkcde.likelihood.naive import naive_loglik
from fastkcde.likelihood.pruning import (NO_PRUNE, box_kernel_bounds, det_prune_rule,
                                         kernel_constants, pair_value, sample_rel_error,
                                         seed_stream)

MODE_DETERMINISTIC = 0
MODE_PROBABILISTIC = 1


@numba.njit
def _traverse(points, lo, hi, start, end, left, right, d, h1sq, h2sq, cx, cy,
              mode, approximate, det_threshold, prob_threshold, min_sample, m, B, z):
    '''
    Symmetric self-join over unordered node pairs (a, b).

    A self pair (a, a) recurses into (l, l), (l, r) and (r, r); every cross
    pair then covers disjoint point sets, so a prune or base case credits
    both sides and each pair {i, j} is visited exactly once.
    '''
    n_nodes = lo.shape[0]
    A = np.zeros(points.shape[0])
    node_acc = np.zeros(n_nodes)
    samples = np.empty(m)
    prunes = 0
    bases = 0
    pruned_pairs = 0

    cap = 64
    stack = np.empty((cap, 2), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    top = 1
    while top > 0:
        top -= 1
        a = stack[top, 0]
        b = stack[top, 1]
        self_pair = a == b
        na = end[a] - start[a]
        nb = end[b] - start[b]
        if self_pair:
            n_pairs = na * (na - 1) // 2
        else:
            n_pairs = na * nb

        vmin, vmax = box_kernel_bounds(lo, hi, a, b, d, h1sq, h2sq, cx, cy)
        if vmax == 0.0:
            prunes += 1
            pruned_pairs += n_pairs
            continue

        if approximate:
            # node a gains nb partners per point and node b gains na
            credit_a = det_prune_rule(nb, vmin, vmax, det_threshold)
            credit_b = credit_a if self_pair else det_prune_rule(na, vmin, vmax, det_threshold)
            if credit_a != NO_PRUNE and credit_b != NO_PRUNE:
                node_acc[a] += credit_a
                if not self_pair:
                    node_acc[b] += credit_b
                prunes += 1
                pruned_pairs += n_pairs
                continue

            # sampling only inside full kernel support
            if mode == MODE_PROBABILISTIC and vmin > 0.0 and n_pairs >= min_sample:
                rel, v_hat = sample_rel_error(points, start[a], end[a], start[b], end[b],
                                              d, h1sq, h2sq, cx, cy, m, B, z, samples)
                if v_hat > 0.0 and rel <= prob_threshold:
                    v_hat = min(max(v_hat, vmin), vmax)
                    if self_pair:
                        # a point never pairs with itself
                        node_acc[a] += (na - 1) * v_hat
                    else:
                        node_acc[a] += nb * v_hat
                        node_acc[b] += na * v_hat
                    prunes += 1
                    pruned_pairs += n_pairs
                    continue

        a_leaf = left[a] < 0
        b_leaf = left[b] < 0
        if a_leaf and b_leaf:
            if self_pair:
                for i in range(start[a], end[a]):
                    s = 0.0
                    for j in range(i + 1, end[a]):
                        v = pair_value(points, i, j, d, h1sq, h2sq, cx, cy)
                        s += v
                        A[j] += v
                    A[i] += s
            else:
                for i in range(start[a], end[a]):
                    s = 0.0
                    for j in range(start[b], end[b]):
                        v = pair_value(points, i, j, d, h1sq, h2sq, cx, cy)
                        s += v
                        A[j] += v
                    A[i] += s
            bases += 1
            continue

        if top + 4 > cap:
            cap *= 2
            grown = np.empty((cap, 2), dtype=np.int64)
            grown[:top] = stack[:top]
            stack = grown

        # pushed in reverse so pairs pop in (l, l), (l, r), ... order
        if self_pair:
            stack[top, 0] = right[a]
            stack[top, 1] = right[a]
            stack[top + 1, 0] = left[a]
            stack[top + 1, 1] = right[a]
            stack[top + 2, 0] = left[a]
            stack[top + 2, 1] = left[a]
            top += 3
        elif a_leaf:
            stack[top, 0] = a
            stack[top, 1] = right[b]
            stack[top + 1, 0] = a
            stack[top + 1, 1] = left[b]
            top += 2
        elif b_leaf:
            stack[top, 0] = right[a]
            stack[top, 1] = b
            stack[top + 1, 0] = left[a]
            stack[top + 1, 1] = b
            top += 2
        else:
            stack[top, 0] = right[a]
            stack[top, 1] = right[b]
            stack[top + 1, 0] = right[a]
            stack[top + 1, 1] = left[b]
            stack[top + 2, 0] = left[a]
            stack[top + 2, 1] = right[b]
            stack[top + 3, 0] = left[a]
            stack[top + 3, 1] = left[b]
            top += 4

    # children always have larger indices than their parent
    for node in range(n_nodes):
        contribution = node_acc[node]
        if contribution == 0.0:
            continue
        if left[node] < 0:
            for slot in range(start[node], end[node]):
                A[slot] += contribution
        else:
            node_acc[left[node]] += contribution
            node_acc[right[node]] += contribution

    return A, prunes, bases, pruned_pairs


def _dualtree_loglik(data, tree, h, mode, cfg, method):
    h1, h2 = unpack_bandwidths(h)
    if tree.n != data.n or tree.d != data.d:
        raise ValueError(f"tree over {tree.n} points in {tree.d}+1 dimensions does not match "
                         f"dataset with n={data.n}, d={data.d}")
    start = time.perf_counter()

    radius_x, radius_y = tree.nn_radii()
    if h2 <= radius_x or h1 <= radius_y:
        return finish_result(np.zeros(data.n), method, time.perf_counter() - start, short_circuited=True)

    cx, cy = kernel_constants(data.d, h1, h2)
    if mode == MODE_PROBABILISTIC:
        seed_stream(cfg.seed)
        det_threshold = cfg.det_threshold()
        sampling = (cfg.threshold(), cfg.min_sample_pairs, cfg.m, cfg.B, cfg.z)
    else:
        det_threshold = cfg.threshold()
        # m must stay >= 1 for the unused sample buffer
        sampling = (0.0, 0, 1, 2, 1.0)
    A_slots, prunes, bases, pruned_pairs = _traverse(tree.points, tree.node_lo, tree.node_hi,
                                                     tree.node_start, tree.node_end,
                                                     tree.node_left, tree.node_right,
                                                     tree.d, h1 * h1, h2 * h2, cx, cy,
                                                     mode, cfg.approximate, det_threshold, *sampling)
    A = np.empty(data.n)
    A[tree.point_index] = A_slots
    return finish_result(A, method, time.perf_counter() - start, prunes, bases, pruned_pairs)


def dualtree_loglik_det(data, tree, h, cfg=None):
    '''
    Dual-tree log-likelihood with the deterministic pruning rule.

    Whenever neither this value nor the exact one is -inf, they differ by at
    most cfg.epsilon.

    Parameters
    ----------
    data : StandardizedDataset
    tree : JointKdTree
        Built over data.
    h : BandwidthPair or (h1, h2)
    cfg : DetConfig, default=None
        None uses DetConfig().

    Returns
    -------
    LikelihoodResult
    '''
    cfg = DetConfig() if cfg is None else cfg
    return _dualtree_loglik(data, tree, h, MODE_DETERMINISTIC, cfg, "deterministic")


def dualtree_loglik_prob(data, tree, h, cfg=None):
    '''
    Dual-tree log-likelihood with bootstrap-estimated pruning.

    Each node pair first tries the deterministic certificate at the same
    epsilon. Pairs that fail it are sampled only when they lie wholly inside
    kernel support and hold at least cfg.min_sample_pairs point pairs; an
    all-zero sample never prunes. Error control is probabilistic rather than
    guaranteed. The result is bit-identical for equal cfg.seed.

    Parameters
    ----------
    data : StandardizedDataset
    tree : JointKdTree
    h : BandwidthPair or (h1, h2)
    cfg : ProbConfig, default=None
        None uses ProbConfig().

    Returns
    -------
    LikelihoodResult
    '''
    cfg = ProbConfig() if cfg is None else cfg
    return _dualtree_loglik(data, tree, h, MODE_PROBABILISTIC, cfg, "probabilistic")


def evaluate_loglik(data, tree, h, method="probabilistic", cfg=None):
    '''Dispatch to the naive, deterministic or probabilistic evaluator.'''
    method = resolve_method(method)
    if method == "naive":
        return naive_loglik(data, h)
    if method == "deterministic":
        return dualtree_loglik_det(data, tree, h, cfg)
    return dualtree_loglik_prob(data, tree, h, cfg)


def warmup():
    '''Compile every numba kernel once on a tiny dataset.'''
    from fastkcde.dataset import RawDataset, standardize
    from fastkcde.spatial import build

    rng = np.random.default_rng(0)
    data = standardize(RawDataset(rng.normal(size=(64, 2)), rng.normal(size=64)))
    tree = build(data, leaf_size=4)
    naive_loglik(data, (1.0, 1.0))
    dualtree_loglik_det(data, tree, (1.0, 1.0), DetConfig(0.1))
    dualtree_loglik_prob(data, tree, (1.0, 1.0), ProbConfig(0.1))
