"""Held-out metrics for fitted conditional density models."""

import math

import numpy as np

import fastkcde.config
from fastkcde.kcde_estimator.model import UnsupportedQueryError

INTERVAL_DEFAULTS = fastkcde.config.make_interval_config_dictionary()
WIDTH_RATIO_MIN_ABS_Y = 1e-6


class UnsupportedMetricError(ValueError):
    """The metric needs a true density, which real data does not have."""


class MetricsReport():
    '''
    Parameters
    ----------
    ise : float or None
        Mean squared density error; None when the truth is unknown.
    mse : float
        Mean squared error of the conditional expectation.
    coverage : float
        Fraction of held-out y inside its prediction interval, in [0, 1].
    mean_half_width_ratio : float
        Mean of interval half-width over |y|; NaN when every |y| is below 1e-6.
    excluded_points : int
        Held-out points outside every x-kernel support.
    '''
    def __init__(self, ise, mse, coverage, mean_half_width_ratio, excluded_points=0):
        if not 0.0 <= coverage <= 1.0:
            raise ValueError(f"coverage must lie in [0, 1], got {coverage}")
        self.ise = None if ise is None else float(ise)
        self.mse = float(mse)
        self.coverage = float(coverage)
        self.mean_half_width_ratio = float(mean_half_width_ratio)
        self.excluded_points = int(excluded_points)

    @classmethod
    def mean(cls, reports):
        '''Average of per-fold reports; exclusion counts are summed.'''
        reports = list(reports)
        if not reports:
            raise ValueError("cannot average an empty list of reports")
        ise = None
        if all(r.ise is not None for r in reports):
            ise = float(np.mean([r.ise for r in reports]))
        ratios = [r.mean_half_width_ratio for r in reports if not math.isnan(r.mean_half_width_ratio)]
        return cls(ise=ise,
                   mse=float(np.mean([r.mse for r in reports])),
                   coverage=float(np.mean([r.coverage for r in reports])),
                   mean_half_width_ratio=float(np.mean(ratios)) if ratios else math.nan,
                   excluded_points=sum(r.excluded_points for r in reports))

    def to_dict(self):
        report = {
            "mse": self.mse,
            "coverage": self.coverage,
            "mean_half_width_ratio": self.mean_half_width_ratio,
            "excluded_points": self.excluded_points,
        }
        if self.ise is not None:
            report["ise"] = self.ise
        return report

    def __repr__(self):
        return (f"MetricsReport(ise={self.ise!r}, mse={self.mse!r}, coverage={self.coverage!r}, "
                f"mean_half_width_ratio={self.mean_half_width_ratio!r}, excluded_points={self.excluded_points})")


def _supported_values(fn, heldout):
    values, supported = [], []
    for i in range(heldout.n):
        try:
            values.append(fn(heldout.x[i], heldout.y[i]))
            supported.append(i)
        except UnsupportedQueryError:
            pass
    if not supported:
        raise ValueError(f"none of the {heldout.n} held-out points lies inside the model's x-kernel support")
    return values, np.asarray(supported, dtype=int)


def count_unsupported(model, heldout):
    '''Held-out points whose x lies outside every x-kernel support of model.'''
    excluded = 0
    for i in range(heldout.n):
        try:
            model.expectation(heldout.x[i])
        except UnsupportedQueryError:
            excluded += 1
    return excluded


def ise_metric(model, heldout, truth):
    '''
    Mean of (f_hat(y_i|x_i) - f(y_i|x_i))^2 over supported held-out points,
    an estimate of the integrated squared error weighted by f(x, y).

    Raises
    ------
    UnsupportedMetricError
        If truth is None.
    '''
    if truth is None:
        raise UnsupportedMetricError("ISE needs the true conditional density, which is unknown for this data")
    values, supported = _supported_values(model.density, heldout)
    true_values = np.asarray([truth(heldout.x[i], heldout.y[i]) for i in supported], dtype=float)
    return float(np.mean((np.asarray(values, dtype=float) - true_values) ** 2))


def mse_metric(model, heldout):
    '''Mean of (E[y|x_i] - y_i)^2 over supported held-out points.'''
    values, supported = _supported_values(lambda x, y: model.expectation(x), heldout)
    return float(np.mean((np.asarray(values, dtype=float) - heldout.y[supported]) ** 2))


def coverage_and_width(model, heldout, alpha=INTERVAL_DEFAULTS["alpha"], n_samples=INTERVAL_DEFAULTS["n_samples"],
                       rng=None):
    '''
    Coverage of the narrowest (1 - alpha) prediction intervals and their mean
    half-width relative to |y_i|.

    Points with |y_i| < 1e-6 count toward coverage but not the width ratio.

    Returns
    -------
    (coverage, mean_half_width_ratio) : tuple of float
    '''
    rng = np.random.default_rng(rng)
    intervals, supported = _supported_values(
        lambda x, y: model.prediction_interval(x, alpha=alpha, n_samples=n_samples, rng=rng), heldout)
    intervals = np.asarray(intervals, dtype=float).reshape(-1, 2)
    y = heldout.y[supported]
    coverage = float(np.mean((intervals[:, 0] <= y) & (y <= intervals[:, 1])))
    usable = np.abs(y) >= WIDTH_RATIO_MIN_ABS_Y
    if not usable.any():
        return coverage, math.nan
    half_widths = (intervals[usable, 1] - intervals[usable, 0]) / 2.0
    return coverage, float(np.mean(half_widths / np.abs(y[usable])))


def evaluate_metrics(model, heldout, truth=None, alpha=INTERVAL_DEFAULTS["alpha"],
                     n_samples=INTERVAL_DEFAULTS["n_samples"], rng=None):
    '''
    Every metric of model on heldout.

    ISE is computed only when truth is given.

    Returns
    -------
    MetricsReport
    '''
    coverage, ratio = coverage_and_width(model, heldout, alpha=alpha, n_samples=n_samples, rng=rng)
    return MetricsReport(ise=None if truth is None else ise_metric(model, heldout, truth),
                         mse=mse_metric(model, heldout),
                         coverage=coverage,
                         mean_half_width_ratio=ratio,
                         excluded_points=count_unsupported(model, heldout))
