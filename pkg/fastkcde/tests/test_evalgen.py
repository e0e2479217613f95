import math

import numpy as np
import pandas as pd
import pytest
import scipy.integrate
import scipy.stats

from fastkcde.dataset import RawDataset
from fastkcde.evalgen import (FoldError, MetricsReport, SyntheticSpec, UnsupportedMetricError, count_unsupported,
                              coverage_and_width, cross_validate, fold_indices, gen_bimodal_sine, gen_clustered,
                              gen_decay_series, gen_uniform5d, generate, ise_metric, lag_probabilities, mse_metric)
from fastkcde.kcde_estimator import UnsupportedQueryError


class ConstantModel():
    def __init__(self, level, mean=0.0, interval=(-math.inf, math.inf)):
        self.level = level
        self.mean = mean
        self.interval = interval

    def density(self, x, y):
        return self.level

    def expectation(self, x):
        return self.mean

    def prediction_interval(self, x, alpha=0.05, n_samples=5000, rng=None):
        return self.interval


class LookupModel(ConstantModel):
    def __init__(self, data):
        super().__init__(0.0)
        self.table = {tuple(x): y for x, y in zip(data.x, data.y)}

    def expectation(self, x):
        return self.table[tuple(x)]


class NowhereModel(ConstantModel):
    def expectation(self, x):
        raise UnsupportedQueryError("nowhere")

    def density(self, x, y):
        return self.expectation(x)

    def prediction_interval(self, x, alpha=0.05, n_samples=5000, rng=None):
        return self.expectation(x)


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec("bimodal_sine", 10)
    with pytest.raises(ValueError):
        SyntheticSpec("spiral", 100)
    with pytest.raises(ValueError):
        SyntheticSpec("uniform5d", 100, params={"depth": 3})
    spec = SyntheticSpec("bimodal_sine", 100, params={"amplitude": 2.0})
    assert spec.params["amplitude"] == 2.0
    assert spec.params["flip"] == 0.2


@pytest.mark.parametrize("family", ["bimodal_sine", "uniform5d", "decay_series"])
def test_truth_integrates_to_one(family):
    raw, truth = generate(SyntheticSpec(family, 200, seed=1))
    rng = np.random.default_rng(0)
    for i in rng.choice(raw.n, size=20, replace=False):
        if family == "uniform5d":
            total, _ = scipy.integrate.quad(lambda y: truth(raw.x[i], y), -1, 33, points=[0, 32])
        else:
            total, _ = scipy.integrate.quad(lambda y: truth(raw.x[i], y), -np.inf, np.inf)
        assert total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("family", ["bimodal_sine", "uniform5d", "decay_series"])
def test_generators_are_seeded(family):
    first, _ = generate(SyntheticSpec(family, 50, seed=3))
    second, _ = generate(SyntheticSpec(family, 50, seed=3))
    assert np.array_equal(first.x, second.x) and np.array_equal(first.y, second.y)
    assert first.n == 50


def test_bimodal_sine():
    raw, truth = gen_bimodal_sine(SyntheticSpec("bimodal_sine", 5000, seed=0))
    assert raw.d == 1
    assert np.all((raw.x >= 0) & (raw.x <= 10))
    assert truth([math.pi], 0.3) == pytest.approx(scipy.stats.norm.pdf(0.3), rel=1e-9)

    branch = np.abs(np.sin(raw.x[:, 0])) > 0.8
    same_sign = np.sign(raw.y[branch]) == np.sign(np.sin(raw.x[branch, 0]))
    assert same_sign.mean() == pytest.approx(0.8, abs=0.03)


def test_bimodal_sine_conditional_histogram():
    raw, truth = gen_bimodal_sine(SyntheticSpec("bimodal_sine", 20000, seed=2))
    in_bin = np.abs(raw.x[:, 0] - math.pi / 2) < 0.05
    y = raw.y[in_bin]
    edges = np.array([-np.inf, -6, -4.5, 0, 3.5, 4.5, 5.5, 6.5, np.inf])
    observed, _ = np.histogram(y, bins=edges)
    cdf = lambda v: (0.8 * scipy.stats.norm.cdf(v, loc=5) + 0.2 * scipy.stats.norm.cdf(v, loc=-5))
    expected = len(y) * np.diff(cdf(edges))
    _, p_value = scipy.stats.chisquare(observed, expected * observed.sum() / expected.sum())
    assert p_value > 0.01


def test_uniform5d():
    raw, truth = gen_uniform5d(SyntheticSpec("uniform5d", 2000, seed=0))
    assert raw.d == 4
    assert truth(raw.x[0], 10.0) == 0.03125
    assert truth(raw.x[0], 40.0) == 0.0
    assert np.all(raw.y <= 32) and raw.y.max() > 30
    assert np.all(raw.x.max(axis=0) <= [2, 4, 8, 16])


def test_decay_series():
    assert lag_probabilities(7, 0.5)[0] == pytest.approx(0.5039, abs=1e-4)
    assert lag_probabilities(7, 0.5).sum() == pytest.approx(1.0)
    raw, truth = gen_decay_series(SyntheticSpec("decay_series", 300, seed=0))
    assert raw.d == 7
    assert np.array_equal(raw.x[1:, 0], raw.y[:-1])
    assert truth(np.full(7, 1.5), 2.0) == pytest.approx(scipy.stats.norm.pdf(2.0, loc=1.5))


def test_gen_clustered():
    raw = gen_clustered(500, 3, seed=1)
    assert (raw.n, raw.d) == (500, 3)


@pytest.fixture
def uniform_heldout():
    return gen_uniform5d(SyntheticSpec("uniform5d", 100, seed=9))


def test_ise_constant_models(uniform_heldout):
    raw, truth = uniform_heldout
    assert ise_metric(ConstantModel(1 / 32), raw, truth) == 0.0
    assert ise_metric(ConstantModel(1 / 16), raw, truth) == pytest.approx((1 / 32) ** 2)
    with pytest.raises(UnsupportedMetricError):
        ise_metric(ConstantModel(1 / 32), raw, None)


def test_mse_and_coverage(uniform_heldout):
    raw, _ = uniform_heldout
    assert mse_metric(LookupModel(raw), raw) == 0.0
    coverage, ratio = coverage_and_width(ConstantModel(0.0), raw)
    assert coverage == 1.0
    assert math.isinf(ratio)


def test_width_ratio_guard():
    raw = RawDataset(np.arange(5.0), np.zeros(5))
    coverage, ratio = coverage_and_width(ConstantModel(0.0, interval=(-1.0, 1.0)), raw)
    assert coverage == 1.0
    assert math.isnan(ratio)


def test_unsupported_points(uniform_heldout):
    raw, truth = uniform_heldout
    assert count_unsupported(NowhereModel(0.0), raw) == raw.n
    assert count_unsupported(ConstantModel(0.0), raw) == 0
    with pytest.raises(ValueError):
        mse_metric(NowhereModel(0.0), raw)


def test_metrics_report():
    with pytest.raises(ValueError):
        MetricsReport(ise=0.1, mse=1.0, coverage=1.5, mean_half_width_ratio=0.2)
    mean = MetricsReport.mean([MetricsReport(0.1, 1.0, 0.9, 0.2, 1), MetricsReport(0.3, 3.0, 1.0, math.nan, 2)])
    assert mean.ise == pytest.approx(0.2)
    assert mean.mse == pytest.approx(2.0)
    assert mean.mean_half_width_ratio == pytest.approx(0.2)
    assert mean.excluded_points == 3
    assert "ise" not in MetricsReport(None, 1.0, 0.9, 0.2).to_dict()


def test_fold_indices_partition():
    folds = fold_indices(45, n_folds=10, seed=0)
    held = np.concatenate([test for _, test in folds])
    assert sorted(held.tolist()) == list(range(45))
    assert all(len(np.intersect1d(train, test)) == 0 for train, test in folds)
    with pytest.raises(ValueError):
        fold_indices(15, n_folds=10)


def test_cross_validate_reference():
    spec = SyntheticSpec("bimodal_sine", 90, seed=4)
    report = cross_validate(spec, bandwidth="reference", n_folds=3, seed=1, n_samples=200)
    assert report.ise is not None and report.ise >= 0
    assert 0.0 <= report.coverage <= 1.0
    again = cross_validate(spec, bandwidth="reference", n_folds=3, seed=1, n_samples=200)
    assert again.to_dict() == report.to_dict()


def test_cross_validate_both_on_raw_data():
    raw, _ = generate(SyntheticSpec("bimodal_sine", 60, seed=5))
    table = cross_validate(raw, bandwidth="both", n_folds=3, n_samples=200,
                           estimator_params={"method": "naive", "candidates": 5, "h_max": 3.0})
    assert isinstance(table, pd.DataFrame)
    assert list(table.columns) == ["likelihood", "reference"]
    assert "ise" not in table.index
    assert "mse" in table.index


def test_fold_error_carries_index():
    spec = SyntheticSpec("bimodal_sine", 40, seed=0)
    with pytest.raises(FoldError) as info:
        cross_validate(spec, n_folds=2, estimator_params={"candidates": 0})
    assert info.value.fold == 0
    assert isinstance(info.value.__cause__, ValueError)


@pytest.mark.slow
def test_likelihood_beats_reference_on_bimodal_sine():
    table = cross_validate(SyntheticSpec("bimodal_sine", 2000, seed=0), bandwidth="both", n_folds=10, seed=0,
                           estimator_params={"candidates": 100})
    assert table.loc["ise", "likelihood"] < table.loc["ise", "reference"]
    assert 0.90 <= table.loc["coverage", "likelihood"] <= 1.0


@pytest.mark.slow
def test_likelihood_beats_reference_on_decay_series():
    table = cross_validate(SyntheticSpec("decay_series", 2000, seed=0), bandwidth="both", n_folds=10, seed=0,
                           estimator_params={"candidates": 100})
    assert table.loc["mse", "likelihood"] < table.loc["mse", "reference"]
