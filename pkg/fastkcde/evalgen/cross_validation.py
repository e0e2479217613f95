import traceback

import pandas as pd
from joblib import Parallel, delayed
from sklearn.model_selection import KFold
from tqdm import tqdm

import fastkcde.config
from fastkcde.evalgen.generators import SyntheticSpec, generate
from fastkcde.evalgen.metrics import MetricsReport, evaluate_metrics
from fastkcde.kcde_estimator.estimator import KCDEstimator
from fastkcde.utils import spawn_seeds

SELECTORS = ("likelihood", "reference")
INTERVAL_DEFAULTS = fastkcde.config.make_interval_config_dictionary()


class FoldError(RuntimeError):
    """A cross-validation fold failed; the original exception is chained."""

    def __init__(self, fold, message):
        super().__init__(f"fold {fold}: {message}")
        self.fold = fold


def fold_indices(n, n_folds=10, seed=0):
    '''(train, test) index arrays of a shuffled KFold split; the test arrays partition range(n).'''
    if n < 2 * n_folds:
        raise ValueError(f"{n_folds}-fold cross-validation needs at least {2 * n_folds} points, got {n}")
    return list(KFold(n_splits=n_folds, shuffle=True, random_state=seed).split(range(n)))


def _run_fold(fold, raw, train_idx, test_idx, truth, selectors, fold_seed, estimator_params,
              alpha, n_samples, verbose):
    try:
        train = raw.subset(train_idx)
        heldout = raw.subset(test_idx)
        reports = {}
        for selector in selectors:
            est = KCDEstimator(bandwidth=selector, random_state=fold_seed, **estimator_params)
            est.fit(train.x, train.y)
            reports[selector] = evaluate_metrics(est.fitted_model_, heldout, truth=truth,
                                                 alpha=alpha, n_samples=n_samples, rng=fold_seed)
            if verbose >= 3:
                print(f"Fold {fold} [{selector}]: {reports[selector]}")
        return reports
    except Exception as e:
        if verbose >= 5:
            print(traceback.format_exc())
        raise FoldError(fold, f"{type(e).__name__}: {e}") from e


def cross_validate(data, truth=None, bandwidth="likelihood", n_folds=10, seed=0,
                   alpha=INTERVAL_DEFAULTS["alpha"], n_samples=INTERVAL_DEFAULTS["n_samples"],
                   estimator_params=None, n_jobs=1, verbose=0):
    '''
    Select bandwidths on each training split, fit, and score the held-out split.

    Parameters
    ----------
    data : SyntheticSpec or RawDataset
        A SyntheticSpec is generated first and supplies its own truth.
    truth : callable, default=None
        True density truth(x, y) in raw units; enables ISE.
    bandwidth : str, default="likelihood"
        "likelihood", "reference", or "both" for a side-by-side comparison on
        identical folds.
    n_folds : int, default=10
    seed : int, default=0
        Shuffles the folds; per-fold seeds are spawned from it.
    alpha : float, default=0.05
        Miscoverage level of the prediction intervals.
    n_samples : int, default=5000
        Draws per prediction interval.
    estimator_params : dict, default=None
        Extra KCDEstimator keyword arguments (method, epsilon, candidates, ...).
    n_jobs : int, default=1
        Folds evaluated in parallel by joblib.
    verbose : int, default=0
        0. nothing
        1. progress bar over folds
        3. per-fold metrics
        5. tracebacks of failed folds

    Returns
    -------
    MetricsReport, or pandas.DataFrame with one column per selector when bandwidth="both".

    Raises
    ------
    FoldError
        Carries the index of the failing fold.
    '''
    if isinstance(data, SyntheticSpec):
        raw, generated_truth = generate(data)
        truth = generated_truth if truth is None else truth
    else:
        raw = data
    if bandwidth == "both":
        selectors = SELECTORS
    elif bandwidth in SELECTORS:
        selectors = (bandwidth,)
    else:
        raise ValueError(f"bandwidth must be 'likelihood', 'reference' or 'both', got {bandwidth!r}")
    estimator_params = {} if estimator_params is None else dict(estimator_params)

    folds = fold_indices(raw.n, n_folds=n_folds, seed=seed)
    seeds = spawn_seeds(seed, n_folds)
    jobs = [(fold, raw, train_idx, test_idx, truth, selectors, seeds[fold], estimator_params,
             alpha, n_samples, verbose)
            for fold, (train_idx, test_idx) in enumerate(folds)]

    if n_jobs == 1:
        fold_reports = [_run_fold(*job) for job in tqdm(jobs, desc="Cross-validating", disable=verbose < 1,
                                                         leave=False)]
    else:
        fold_reports = Parallel(n_jobs=n_jobs)(delayed(_run_fold)(*job) for job in jobs)

    summary = {selector: MetricsReport.mean(reports[selector] for reports in fold_reports)
               for selector in selectors}
    if bandwidth != "both":
        return summary[bandwidth]
    return pd.DataFrame({selector: pd.Series(report.to_dict()) for selector, report in summary.items()},
                        columns=list(SELECTORS))
