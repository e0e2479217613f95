"""Command-line interface: fastkcde {select, predict, bench, synth, eval}."""

import argparse
import json
import os
import re
import sys
import time
import traceback

import numpy as np
import pandas as pd
from tqdm import tqdm

import fastkcde.config
from fastkcde._version import __version__
from fastkcde.bandwidth import BandwidthPair, SearchConfig, random_search
from fastkcde.dataset import RawDataset, standardize
from fastkcde.evalgen import (SyntheticSpec, UnsupportedMetricError, cross_validate, gen_clustered,
                              generate)
from fastkcde.kcde_estimator.model import ConditionalDensityModel, UnsupportedQueryError
from fastkcde.likelihood import DetConfig, ProbConfig, evaluate_loglik, resolve_method, warmup
from fastkcde.spatial import build
from fastkcde.utils import dumps, file_digest

BENCH_CANDIDATES = 20


class CSVFormatError(ValueError):
    """A CSV row could not be read as numbers; line is 1-based and counts the header."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


def read_csv(path):
    '''Read a headed, all-numeric CSV into a DataFrame.'''
    try:
        frame = pd.read_csv(path, skip_blank_lines=False)
    except pd.errors.EmptyDataError as e:
        raise CSVFormatError(1, "file is empty; a header row is required") from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise CSVFormatError(int(match.group(1)) if match else 0, str(e)) from e
    if frame.shape[0] == 0:
        raise CSVFormatError(2, "no data rows after the header")
    numeric = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad = np.argwhere(~np.isfinite(numeric))
    if len(bad):
        row, col = bad[0]
        raise CSVFormatError(int(row) + 2, f"column {frame.columns[col]!r} holds a non-numeric or "
                                           f"non-finite value {frame.iat[row, col]!r}")
    return pd.DataFrame(numeric, columns=frame.columns)


def _y_col(value):
    if value is None:
        return None
    return int(value) if re.fullmatch(r"-?\d+", value) else value


def load_dataset(path, y_col=None):
    frame = read_csv(path)
    y_col = _y_col(y_col)
    if isinstance(y_col, int) and str(y_col) in frame.columns:
        y_col = str(y_col)
    return RawDataset.from_frame(frame, y_col=y_col)


def method_config(args):
    method = resolve_method(args.method)
    if method == "deterministic":
        return method, DetConfig(epsilon=args.epsilon)
    if method == "probabilistic":
        return method, ProbConfig(epsilon=args.epsilon, m=args.m, B=args.B, z=args.z, seed=args.seed)
    return method, None


def search_config(args):
    method, cfg = method_config(args)
    return SearchConfig(h_max=args.h_max, candidates=args.candidates, seed=args.seed,
                        method=method, method_config=cfg, n_jobs=args.n_jobs)


def manifest(args, data=None, inputs=(), timings=None):
    '''Everything needed to rerun a command: parameters with defaults applied, seeds, data fingerprint.'''
    parameters = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    record = {
        "command": args.command,
        "parameters": parameters,
        "seeds": {"seed": args.seed},
        "version": __version__,
        "inputs": {path: file_digest(path) for path in inputs if path},
    }
    if data is not None:
        record["dataset"] = data.fingerprint()
    if timings is not None and args.timings:
        record["timings"] = timings
    return record


def manifest_path(out):
    return os.path.splitext(out)[0] + ".manifest.json"


def write_json(args, obj):
    text = dumps(obj) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def write_table(args, frame, record):
    '''CSV to --out with the manifest beside it, or CSV to stdout with the manifest on stderr.'''
    if args.out:
        frame.to_csv(args.out, index=False)
        with open(manifest_path(args.out), "w") as f:
            f.write(dumps(record) + "\n")
    else:
        sys.stdout.write(frame.to_csv(index=False))
        sys.stderr.write(dumps(record) + "\n")


def cmd_select(args):
    start = time.perf_counter()
    raw = load_dataset(args.input, args.y_col)
    data = standardize(raw)
    tree = build(data, leaf_size=args.leaf_size)
    best, trace = random_search(data, tree, search_config(args), verbose=args.verbose)
    elapsed = time.perf_counter() - start

    if not args.timings:
        trace = trace.drop(columns=["seconds"])
    h1_eff, h2_eff = best.effective(data)
    report = {
        "best": best.to_dict(),
        "score": float(trace["score"].max()),
        "effective_bandwidths": {
            raw.y_name: float(h1_eff),
            **{name: float(h) for name, h in zip(raw.x_names, h2_eff)},
        },
        "trace": trace.to_dict(orient="records"),
        "manifest": manifest(args, data, inputs=[args.input],
                             timings={"selection_seconds": elapsed,
                                      "search_seconds": float(trace["seconds"].sum()) if args.timings else None}),
    }
    write_json(args, report)


def _query_matrix(query, raw):
    if all(name in query.columns for name in raw.x_names):
        return query[raw.x_names].to_numpy(dtype=float)
    predictors = query.drop(columns=[raw.y_name], errors="ignore")
    if predictors.shape[1] != raw.d:
        raise ValueError(f"query rows have {predictors.shape[1]} predictor columns but the training data has {raw.d}")
    return predictors.to_numpy(dtype=float)


def _predict_bandwidths(args, data):
    if args.h1 is not None or args.h2 is not None:
        if args.h1 is None or args.h2 is None:
            raise ValueError("--h1 and --h2 must be given together")
        return BandwidthPair(args.h1, args.h2)
    if args.bandwidths:
        with open(args.bandwidths) as f:
            best = json.load(f)["best"]
        return BandwidthPair(best["h1"], best["h2"])
    tree = build(data, leaf_size=args.leaf_size)
    best, _ = random_search(data, tree, search_config(args), verbose=args.verbose)
    return best


def cmd_predict(args):
    raw = load_dataset(args.input, args.y_col)
    data = standardize(raw)
    h = _predict_bandwidths(args, data)
    model = ConditionalDensityModel(data, h)
    query = read_csv(args.query)
    X = _query_matrix(query, raw)
    rng = np.random.default_rng(args.seed)

    if args.density is not None:
        if args.density == "column":
            if raw.y_name not in query.columns:
                raise ValueError(f"--density without a value needs a {raw.y_name!r} column in the query file")
            y_values = query[raw.y_name].to_numpy(dtype=float)
        else:
            y_values = np.full(X.shape[0], float(args.density))
    alpha = args.alpha if args.interval is None or args.interval == "default" else float(args.interval)
    if args.density is not None:
        outputs = [raw.y_name, "density"]
    elif args.interval is not None:
        outputs = ["lo", "hi"]
    else:
        outputs = ["expectation"]

    rows = []
    for k, x in enumerate(X):
        row = {name: value for name, value in zip(raw.x_names, x)}
        try:
            if args.density is not None:
                row[raw.y_name] = y_values[k]
                row["density"] = model.density(x, y_values[k])
            elif args.interval is not None:
                row["lo"], row["hi"] = model.prediction_interval(x, alpha=alpha, n_samples=args.n_samples, rng=rng)
            else:
                row["expectation"] = model.expectation(x)
            row["supported"] = True
        except UnsupportedQueryError:
            row["supported"] = False
        rows.append(row)

    frame = pd.DataFrame(rows, columns=raw.x_names + outputs + ["supported"])
    write_table(args, frame, manifest(args, data, inputs=[args.input, args.query, args.bandwidths]))


def _parse_list(text, cast):
    return [cast(item) for item in text.split(",") if item.strip()]


def _bench_errors(data, tree, pairs, method, cfg, naive_values):
    errors = []
    for pair, reference in zip(pairs, naive_values):
        if reference is None:
            continue
        result = evaluate_loglik(data, tree, pair, method=method, cfg=cfg)
        if not result.diverged:
            errors.append(abs(result.value - reference))
    return float(np.mean(errors)) if errors else np.nan


def cmd_bench(args):
    sizes = _parse_list(args.sizes, int)
    methods = [resolve_method(m) for m in _parse_list(args.methods, str)]
    configs = {method: search_config(argparse.Namespace(**{**vars(args), "method": method}))
               for method in methods}
    warmup()

    rng = np.random.default_rng(args.seed)
    draws = args.h_max * (1.0 - rng.random(size=(args.error_pairs, 2)))
    pairs = [BandwidthPair(h1, h2) for h1, h2 in draws]

    rows = []
    measured_naive = None
    for n in tqdm(sizes, desc="Benchmarking", disable=args.verbose < 1):
        data = standardize(gen_clustered(n, args.dims, seed=args.seed))
        tree = build(data, leaf_size=args.leaf_size)
        naive_tractable = n <= args.naive_max_n
        naive_values = [None] * len(pairs)
        if naive_tractable:
            naive_results = [evaluate_loglik(data, tree, pair, method="naive") for pair in pairs]
            naive_values = [None if r.diverged else r.value for r in naive_results]

        timings = {}
        for method in methods:
            if method == "naive" and not naive_tractable:
                continue
            seconds = []
            for _ in range(args.repeats):
                start = time.perf_counter()
                random_search(data, tree, configs[method])
                seconds.append(time.perf_counter() - start)
            timings[method] = float(np.mean(seconds))
        if "naive" in timings:
            measured_naive = (n, timings["naive"])

        naive_seconds, extrapolated = timings.get("naive"), False
        if naive_seconds is None and measured_naive is not None:
            # quadratic in n
            naive_seconds = measured_naive[1] * (n / measured_naive[0]) ** 2
            extrapolated = True

        for method in methods:
            mean_seconds = naive_seconds if method == "naive" else timings[method]
            if not naive_tractable:
                error = np.nan
            elif method == "naive":
                error = 0.0
            else:
                error = _bench_errors(data, tree, pairs, method, configs[method].method_config, naive_values)
            rows.append({
                "n": n,
                "d": args.dims,
                "method": method,
                "mean_seconds": np.nan if mean_seconds is None else mean_seconds,
                "mean_abs_error_vs_naive": error,
                "speedup_vs_naive": naive_seconds / mean_seconds if naive_seconds and mean_seconds else np.nan,
                "naive_extrapolated": extrapolated,
            })

    columns = ["n", "d", "method", "mean_seconds", "mean_abs_error_vs_naive", "speedup_vs_naive",
               "naive_extrapolated"]
    write_table(args, pd.DataFrame(rows, columns=columns), manifest(args))


def _synthetic_params(items):
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"--param expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        params[key] = json.loads(value)
    return params


def cmd_synth(args):
    spec = SyntheticSpec(args.family, args.n, seed=args.seed, params=_synthetic_params(args.param))
    raw, _ = generate(spec)
    record = manifest(args)
    record["synthetic"] = spec.to_dict()
    write_table(args, raw.to_frame(), record)


def cmd_eval(args):
    if (args.family is None) == (args.input is None):
        raise ValueError("eval needs exactly one of --family or an input CSV")
    if args.family is not None:
        source = SyntheticSpec(args.family, args.n, seed=args.seed, params=_synthetic_params(args.param))
    else:
        if args.ise:
            raise UnsupportedMetricError("ISE needs a known true density; it is only available for --family data")
        source = load_dataset(args.input, args.y_col)

    estimator_params = {
        "method": resolve_method(args.method),
        "epsilon": args.epsilon,
        "m": args.m,
        "B": args.B,
        "z": args.z,
        "h_max": args.h_max,
        "candidates": args.candidates,
        "leaf_size": args.leaf_size,
        "verbose": 0,
    }
    start = time.perf_counter()
    result = cross_validate(source, bandwidth="both" if args.compare else args.bandwidth, n_folds=args.folds,
                            seed=args.seed, alpha=args.alpha, n_samples=args.n_samples,
                            estimator_params=estimator_params, n_jobs=args.n_jobs, verbose=args.verbose)
    elapsed = time.perf_counter() - start

    metrics = result.to_dict()
    report = {
        "metrics": metrics,
        "manifest": manifest(args, inputs=[args.input], timings={"eval_seconds": elapsed}),
    }
    if args.family is not None:
        report["manifest"]["synthetic"] = source.to_dict()
    write_json(args, report)


def _common_parser():
    search = fastkcde.config.make_search_config_dictionary()
    prob = fastkcde.config.make_prob_config_dictionary()
    interval = fastkcde.config.make_interval_config_dictionary()

    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=search["seed"])
    parser.add_argument("--method", default="prob", choices=["naive", "det", "prob", "deterministic", "probabilistic"])
    parser.add_argument("--epsilon", type=float, default=prob["epsilon"])
    parser.add_argument("--m", type=int, default=prob["m"])
    parser.add_argument("--B", type=int, default=prob["B"])
    parser.add_argument("--z", type=float, default=prob["z"])
    parser.add_argument("--h-max", dest="h_max", type=float, default=search["h_max"])
    parser.add_argument("--candidates", type=int, default=None,
                        help=f"bandwidth candidates (default {search['candidates']}, bench {BENCH_CANDIDATES})")
    parser.add_argument("--leaf-size", dest="leaf_size", type=int, default=search["leaf_size"])
    parser.add_argument("--alpha", type=float, default=interval["alpha"])
    parser.add_argument("--n-samples", dest="n_samples", type=int, default=interval["n_samples"])
    parser.add_argument("--y-col", dest="y_col", default=None, help="y column name or index (default: last)")
    parser.add_argument("--n-jobs", dest="n_jobs", type=int, default=search["n_jobs"])
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--timings", action="store_true", help="record wall-clock timings in the manifest")
    return parser


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="fastkcde", description="Fast kernel conditional density estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    select = commands.add_parser("select", parents=[common], help="select bandwidths for a CSV dataset")
    select.add_argument("input")
    select.set_defaults(func=cmd_select)

    predict = commands.add_parser("predict", parents=[common], help="query a model fitted on a CSV dataset")
    predict.add_argument("input", help="training CSV")
    predict.add_argument("query", help="CSV of query rows")
    predict.add_argument("--h1", type=float, default=None)
    predict.add_argument("--h2", type=float, default=None)
    predict.add_argument("--bandwidths", default=None, help="JSON report written by select")
    mode = predict.add_mutually_exclusive_group()
    mode.add_argument("--expect", action="store_true", help="conditional expectation (default)")
    mode.add_argument("--interval", nargs="?", const="default", default=None, metavar="ALPHA",
                      help="narrowest prediction interval, at ALPHA or --alpha")
    mode.add_argument("--density", nargs="?", const="column", default=None, metavar="Y",
                      help="conditional density at Y, or at the query file's y column")
    predict.set_defaults(func=cmd_predict)

    bench = commands.add_parser("bench", parents=[common], help="time and error of the likelihood evaluators")
    bench.add_argument("--sizes", default="500,1000,2000")
    bench.add_argument("--dims", type=int, default=3)
    bench.add_argument("--methods", default="naive,det,prob")
    bench.add_argument("--repeats", type=int, default=1)
    bench.add_argument("--error-pairs", dest="error_pairs", type=int, default=100)
    bench.add_argument("--naive-max-n", dest="naive_max_n", type=int, default=5000)
    bench.set_defaults(func=cmd_bench)

    synth = commands.add_parser("synth", parents=[common], help="write a synthetic dataset")
    synth.add_argument("family", choices=list(fastkcde.config.SYNTHETIC_FAMILIES))
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter override")
    synth.set_defaults(func=cmd_synth)

    evaluate = commands.add_parser("eval", parents=[common], help="cross-validated metrics")
    evaluate.add_argument("input", nargs="?", default=None, help="CSV dataset (truth unknown)")
    evaluate.add_argument("--family", choices=list(fastkcde.config.SYNTHETIC_FAMILIES), default=None)
    evaluate.add_argument("--n", type=int, default=2000)
    evaluate.add_argument("--param", action="append", metavar="KEY=VALUE")
    evaluate.add_argument("--folds", type=int, default=10)
    evaluate.add_argument("--bandwidth", choices=["likelihood", "reference"], default="likelihood")
    evaluate.add_argument("--compare", action="store_true", help="likelihood and reference side by side")
    evaluate.add_argument("--ise", action="store_true", help="require ISE; an error for CSV input")
    evaluate.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.candidates is None:
        args.candidates = (BENCH_CANDIDATES if args.command == "bench"
                           else fastkcde.config.make_search_config_dictionary()["candidates"])
    try:
        args.func(args)
    except Exception as e:
        if args.verbose >= 5:
            traceback.print_exc()
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
