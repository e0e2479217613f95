import math
import time

import numpy as np
import pytest

from fastkcde.bandwidth import (AllCandidatesDivergedError, BandwidthPair, SearchConfig, epanechnikov_canonical_factor,
                                random_search, reference_bandwidth, reference_rule, sample_candidates,
                                top_candidates)
from fastkcde.config import make_search_config_dictionary
from fastkcde.dataset import standardize
from fastkcde.evalgen import SyntheticSpec, gen_clustered, generate
from fastkcde.likelihood import DetConfig, ProbConfig, naive_loglik, warmup
from fastkcde.spatial import build


def test_bandwidth_pair():
    h = BandwidthPair(0.5, 2)
    assert tuple(h) == (0.5, 2.0)
    assert h == BandwidthPair(0.5, 2.0)
    assert h.to_dict() == {"h1": 0.5, "h2": 2.0}
    for bad in [(0, 1), (1, -1), (math.inf, 1)]:
        with pytest.raises(ValueError):
            BandwidthPair(*bad)


def test_effective_bandwidths(small_data):
    h1_eff, h2_eff = BandwidthPair(0.5, 2.0).effective(small_data)
    assert h1_eff == pytest.approx(0.5 * small_data.sigma_y)
    assert np.allclose(h2_eff, 2.0 * small_data.sigma_x)


def test_sample_candidates():
    cfg = SearchConfig(h_max=3.0, candidates=50, seed=4)
    pairs = sample_candidates(cfg)
    assert len(pairs) == 50
    assert all(0 < h.h1 <= 3.0 and 0 < h.h2 <= 3.0 for h in pairs)
    assert pairs == sample_candidates(SearchConfig(h_max=3.0, candidates=50, seed=4))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(h_max=0)
    with pytest.raises(ValueError):
        SearchConfig(candidates=0)
    with pytest.raises(TypeError):
        SearchConfig(seed="zero")
    with pytest.raises(TypeError):
        SearchConfig(method="deterministic", method_config=ProbConfig())
    assert isinstance(SearchConfig(method="det").method_config, DetConfig)
    assert SearchConfig(seed=9).method_config.seed == 9


@pytest.mark.parametrize("method", ["naive", "det", "prob"])
def test_random_search(small_data, small_tree, method):
    cfg = SearchConfig(h_max=3.0, candidates=12, seed=1, method=method)
    best, trace = random_search(small_data, small_tree, cfg)
    assert len(trace) == 12
    assert list(trace.columns) == ["h1", "h2", "score", "diverged", "seconds", "prune_count", "base_case_count",
                                   "pruned_pairs"]
    top = trace.loc[trace["score"].idxmax()]
    assert (best.h1, best.h2) == (top["h1"], top["h2"])
    assert math.isfinite(top["score"])


def test_random_search_deterministic(small_data, small_tree):
    cfg = SearchConfig(h_max=3.0, candidates=8, seed=2)
    first = random_search(small_data, small_tree, cfg)[1]
    second = random_search(small_data, small_tree, cfg)[1]
    assert first["score"].tolist() == second["score"].tolist()


def test_random_search_parallel_matches_serial(small_data, small_tree):
    serial = random_search(small_data, small_tree, SearchConfig(h_max=3.0, candidates=6, seed=3))[1]
    parallel = random_search(small_data, small_tree, SearchConfig(h_max=3.0, candidates=6, seed=3, n_jobs=2))[1]
    assert serial["score"].tolist() == parallel["score"].tolist()


def test_all_candidates_diverged(small_data, small_tree):
    cfg = SearchConfig(h_max=1e-4, candidates=5, method="det")
    with pytest.raises(AllCandidatesDivergedError, match="h_max"):
        random_search(small_data, small_tree, cfg)


def test_top_candidates(small_data, small_tree):
    _, trace = random_search(small_data, small_tree, SearchConfig(h_max=3.0, candidates=20, seed=5, method="naive"))
    top = top_candidates(trace, k=5)
    assert len(top) <= 5
    assert not top["diverged"].any()
    assert top["score"].is_monotonic_decreasing


def test_canonical_factor():
    assert epanechnikov_canonical_factor(1) == pytest.approx(2.214, abs=1e-3)


def test_reference_rule(small_data):
    assert reference_bandwidth(100, 1) == pytest.approx((4 / (3 * 100)) ** 0.2 * epanechnikov_canonical_factor(1))
    h = reference_rule(small_data)
    assert h.h1 == pytest.approx(reference_bandwidth(small_data.n, 1))
    assert h.h2 == pytest.approx(reference_bandwidth(small_data.n, small_data.d))


def test_search_config_defaults():
    defaults = make_search_config_dictionary()
    cfg = SearchConfig()
    assert (cfg.h_max, cfg.candidates, cfg.seed, cfg.method, cfg.n_jobs) == (
        defaults["h_max"], defaults["candidates"], defaults["seed"], defaults["method"], defaults["n_jobs"])


@pytest.mark.slow
def test_probabilistic_selection_matches_exact_ranking():
    raw, _ = generate(SyntheticSpec("bimodal_sine", 2000, seed=0))
    data = standardize(raw)
    tree = build(data)
    best, trace = random_search(data, tree, SearchConfig(candidates=200, seed=0, method="prob"))
    exact = [naive_loglik(data, (h1, h2)).value for h1, h2 in zip(trace["h1"], trace["h2"])]
    assert naive_loglik(data, best).value >= max(exact) - 0.1


def _best_time(data, tree, method, repeats=3):
    cfg = SearchConfig(candidates=20, seed=0, method=method)
    seconds = []
    for _ in range(repeats):
        start = time.perf_counter()
        random_search(data, tree, cfg)
        seconds.append(time.perf_counter() - start)
    return min(seconds)


@pytest.mark.slow
def test_selection_speed_ordering():
    warmup()
    speedups = []
    for n in [500, 1000, 2000, 5000]:
        data = standardize(gen_clustered(n, 3, seed=0))
        tree = build(data)
        seconds = {method: _best_time(data, tree, method) for method in ["naive", "det", "prob"]}
        assert seconds["prob"] < seconds["det"] < seconds["naive"], (n, seconds)
        speedups.append(seconds["naive"] / seconds["prob"])
    assert all(earlier < later for earlier, later in zip(speedups, speedups[1:])), speedups
