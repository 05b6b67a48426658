"""Command-line front end.

Four subcommands: ``train`` fits one model (or a one-vs-all family on a
multiclass set) and writes model + trace files; ``bench`` compares several
solvers on one binary task against a long-run reference; ``prox-eval`` and
``w-eval`` print single values of the logistic proximity operator and of
the auxiliary root solve behind it.

Numeric options resolve as flags > config file > defaults.  The config
file holds ``key = value`` lines (``#`` comments allowed) keyed by the
long flag names.  Exit codes: 0 success, 1 runtime failure, 2 bad
arguments or an invalid parameter combination.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bench import (
    SOLVERS,
    BenchmarkEntry,
    compute_reference,
    format_summary,
    run_benchmark,
    thread_count,
)
from .baselines import BaselineConfig
from .data import binarize, load_libsvm, one_vs_all_tasks, predict_one_vs_all, to_matrix
from .dr import DRConfig, resolve_config
from .errors import DomainError, ParseError, ProxsplitError
from .lambert import eval_w
from .model import BlockPartition, Problem, RegularizerSpec, sparsity_degree, test_error
from .prox import ScalarLoss, prox_logistic

__all__ = ["main", "entrypoint", "save_model", "load_model"]

_LOSS_NAMES = ("logistic", "hinge_q1", "hinge_q2", "huber")
_REG_NAMES = ("l1", "group-l2")


def _choice(options):
    def convert(text):
        if text not in options:
            raise ValueError("expected one of %s, got %r" % (", ".join(options), text))
        return text

    return convert


# Option tables drive both config-file parsing and the flag/file/default
# merge: dest -> (converter, default).
_COMMON_SPEC = {
    "data": (str, None),
    "test": (str, None),
    "loss": (_choice(_LOSS_NAMES), "logistic"),
    "reg": (_choice(_REG_NAMES), "l1"),
    "lam": (float, 1.0),
    "blocks": (int, 1),
    "batch": (int, 1000),
    "iters": (int, 1000),
    "seed": (int, 0),
    "gamma": (float, 1.0),
    "tau": (float, 1.0),
    "mu": (float, 1.5),
    "rho": (float, 0.1),
    "step_c": (float, 0.1),
    "trace_stride": (int, 10),
    "plateau_window": (int, None),
    "plateau_rtol": (float, 1e-10),
    "positive_class": (float, None),
}
_TRAIN_SPEC = dict(_COMMON_SPEC, solver=(str, "dr"), out=(str, "."))
_BENCH_SPEC = dict(
    _COMMON_SPEC,
    solvers=(str, "dr,sfb,rda,bcpd"),
    ref_solver=(str, "dr"),
    ref_factor=(int, 20),
    out=(str, None),
)


def _read_config(path, spec):
    """key = value lines -> {dest: raw string}; keys follow the flag names."""
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, value = stripped.partition("=")
            if not sep:
                raise ParseError("expected 'key = value', got %r" % stripped, line_number=lineno)
            dest = key.strip().replace("-", "_")
            if dest == "lambda":
                dest = "lam"
            if dest not in spec:
                raise DomainError(
                    "unknown config key %r (line %d); known keys: %s"
                    % (key.strip(), lineno, ", ".join(sorted(spec)))
                )
            values[dest] = value.strip()
    return values


def _merge(args, spec):
    """Resolve every option from flags, then the config file, then defaults.

    Returns the value dict plus an origin dict (flag/config/default), used
    to tell explicit choices from fall-through defaults.
    """
    file_values = {}
    if getattr(args, "config", None) is not None:
        file_values = _read_config(args.config, spec)
    merged = {}
    origin = {}
    for key, (convert, default) in spec.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
            origin[key] = "flag"
        elif key in file_values:
            try:
                merged[key] = convert(file_values[key])
            except (TypeError, ValueError) as exc:
                raise DomainError("config key %s: %s" % (key, exc)) from None
            origin[key] = "config"
        else:
            merged[key] = default
            origin[key] = "default"
    return merged, origin


def _require(merged, key, flag):
    if merged[key] is None:
        raise DomainError("missing required option %s" % flag)


def save_model(path, w, problem):
    """Plain-text model: five header lines, then one weight per line."""
    w = np.asarray(w, dtype=float)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("n_features %d\n" % problem.n_features)
        handle.write("blocks %d\n" % problem.num_blocks)
        handle.write("lambda %s\n" % format(problem.reg.lam, ".17g"))
        handle.write("kappa %s\n" % " ".join(str(int(k)) for k in problem.kappas))
        handle.write("loss %s\n" % problem.loss.value)
        for value in w:
            handle.write(format(value, ".17g") + "\n")


def load_model(path):
    """Inverse of save_model: returns (weights, header dict)."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    expected = ("n_features", "blocks", "lambda", "kappa", "loss")
    meta = {}
    for lineno, key in enumerate(expected, start=1):
        if lineno > len(lines):
            raise ParseError("missing header line %r" % key, line_number=lineno)
        name, _, rest = lines[lineno - 1].partition(" ")
        if name != key:
            raise ParseError("expected header %r, got %r" % (key, name), line_number=lineno)
        try:
            if key in ("n_features", "blocks"):
                meta[key] = int(rest)
            elif key == "lambda":
                meta[key] = float(rest)
            elif key == "kappa":
                meta[key] = tuple(int(tok) for tok in rest.split())
            else:
                meta[key] = rest.strip()
        except ValueError:
            raise ParseError("bad header value %r" % rest, line_number=lineno) from None
    body = [line for line in lines[len(expected):] if line.strip()]
    try:
        w = np.asarray([float(line) for line in body], dtype=float)
    except ValueError as exc:
        raise ParseError("bad weight line: %s" % exc) from None
    if w.shape[0] != meta["n_features"]:
        raise ParseError(
            "expected %d weights, found %d" % (meta["n_features"], w.shape[0])
        )
    return w, meta


def _solver_config(merged, origin, solver, n_samples):
    """DRConfig or BaselineConfig for one solver from the merged options.

    The simplified runner needs rho = 0; when rho merely fell through from
    the built-in default it is dropped silently, an explicit nonzero rho is
    left in place so the runner can reject it by name.
    """
    if merged["batch"] < 1:
        raise DomainError("batch must be >= 1, got %d" % merged["batch"])
    batch = min(merged["batch"], n_samples)
    common = dict(
        batch_size=batch,
        seed=merged["seed"],
        max_iters=merged["iters"],
        trace_stride=merged["trace_stride"],
        plateau_window=merged["plateau_window"],
        plateau_rtol=merged["plateau_rtol"],
    )
    if solver in ("dr", "dr-simplified"):
        rho = merged["rho"]
        if solver == "dr-simplified" and rho != 0.0 and origin["rho"] == "default":
            rho = 0.0
        return DRConfig(
            tau=merged["tau"], gamma=merged["gamma"], rho=rho, mu=merged["mu"], **common
        )
    return BaselineConfig(step_c=merged["step_c"], tau=merged["tau"], **common)


def _load_datasets(merged):
    raw = load_libsvm(merged["data"])
    raw_test = None if merged["test"] is None else load_libsvm(merged["test"])
    n_features = raw.n_features
    if raw_test is not None:
        n_features = max(n_features, raw_test.n_features)
    if n_features == 0:
        raise DomainError("dataset %s declares no features" % merged["data"])
    if raw.n_samples == 0:
        raise DomainError("dataset %s has no samples" % merged["data"])
    return raw, raw_test, n_features


def _make_problem(tset, n_features, merged):
    kappa = 1 if merged["reg"] == "l1" else 2
    return Problem(
        data=tset,
        partition=BlockPartition.contiguous(n_features, merged["blocks"]),
        reg=RegularizerSpec(lam=merged["lam"], kappa=kappa),
        loss=ScalarLoss(merged["loss"]),
    )


def _label_text(label):
    return format(label, "g")


def _cmd_train(args):
    merged, origin = _merge(args, _TRAIN_SPEC)
    _require(merged, "data", "--data")
    solver = merged["solver"]
    if solver not in SOLVERS:
        raise DomainError(
            "unknown solver %r; known: %s" % (solver, ", ".join(sorted(SOLVERS)))
        )
    raw, raw_test, n_features = _load_datasets(merged)
    classes = raw.class_labels()

    if merged["positive_class"] is not None or len(classes) == 2:
        positive = merged["positive_class"]
        tasks = [(None, binarize(raw, positive, n_features=n_features))]
        positive = classes[1] if positive is None else positive
    else:
        positive = None
        tasks = one_vs_all_tasks(raw, n_features=n_features)

    config = _solver_config(merged, origin, solver, tasks[0][1].n_samples)
    probe = _make_problem(tasks[0][1], n_features, merged)
    if isinstance(config, DRConfig):
        resolve_config(probe, config)  # reject bad combinations before any work
    out_dir = merged["out"]
    os.makedirs(out_dir, exist_ok=True)

    def _train_one(item):
        label, tset = item
        problem = _make_problem(tset, n_features, merged)
        w, trace = SOLVERS[solver](problem, config)
        suffix = "" if label is None else "_" + _label_text(label)
        save_model(os.path.join(out_dir, "model%s.txt" % suffix), w, problem)
        trace.write_csv(os.path.join(out_dir, "trace%s.csv" % suffix))
        return label, w, trace

    workers = min(len(tasks), thread_count())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_train_one, tasks))
    else:
        results = [_train_one(task) for task in tasks]

    for label, w, trace in results:
        tag = "" if label is None else "class %s: " % _label_text(label)
        print(
            "%sobjective %.6e, zeros %.2f%%"
            % (tag, trace.final.objective, 100.0 * sparsity_degree(w, tol=0.0))
        )

    if raw_test is not None:
        if positive is not None:
            w = results[0][1]
            tset = binarize(raw_test, positive, n_features=n_features)
            print("test error %.2f%%" % (100.0 * test_error(w, tset)))
        else:
            weights = [(label, w) for label, w, _ in results]
            features, labels = to_matrix(raw_test, n_features=n_features)
            predicted = predict_one_vs_all(weights, features)
            print("test error %.2f%%" % (100.0 * float(np.mean(predicted != labels))))
    return 0


def _cmd_bench(args):
    merged, origin = _merge(args, _BENCH_SPEC)
    _require(merged, "data", "--data")
    names = [name.strip() for name in merged["solvers"].split(",") if name.strip()]
    for name in names:
        if name not in SOLVERS:
            raise DomainError(
                "unknown solver %r; known: %s" % (name, ", ".join(sorted(SOLVERS)))
            )
    if merged["ref_solver"] not in SOLVERS:
        raise DomainError("unknown reference solver %r" % merged["ref_solver"])
    raw, raw_test, n_features = _load_datasets(merged)
    classes = raw.class_labels()
    positive = merged["positive_class"]
    if positive is None and len(classes) != 2:
        raise DomainError(
            "bench needs a binary task; dataset has %d classes, pass --positive-class"
            % len(classes)
        )
    tset = binarize(raw, positive, n_features=n_features)
    positive = classes[1] if positive is None else positive
    test_set = (
        None
        if raw_test is None
        else binarize(raw_test, positive, n_features=n_features)
    )
    problem = _make_problem(tset, n_features, merged)
    if not names:
        print(format_summary([]))
        return 0

    entries = [
        BenchmarkEntry(
            name=name,
            solver=name,
            config=_solver_config(merged, origin, name, tset.n_samples),
        )
        for name in names
    ]
    ref_config = _solver_config(merged, origin, merged["ref_solver"], tset.n_samples)
    reference = compute_reference(
        problem, merged["ref_solver"], ref_config, long_run_factor=merged["ref_factor"]
    )
    rows = run_benchmark(
        problem, entries, reference=reference, out_dir=merged["out"], test_set=test_set
    )
    print(format_summary(rows))
    return 0


def _cmd_prox_eval(args):
    print(format(float(prox_logistic(args.v, args.gamma)), ".17g"))
    return 0


def _cmd_w_eval(args):
    print(format(eval_w(args.r, args.v).value, ".17g"))
    return 0


def _add_common_options(parser):
    parser.add_argument("--config", metavar="FILE", help="key = value option file")
    parser.add_argument("--data", metavar="FILE", help="training set, sparse text format")
    parser.add_argument("--test", metavar="FILE", help="held-out set for the error report")
    parser.add_argument("--loss", choices=_LOSS_NAMES, help="margin loss (default logistic)")
    parser.add_argument("--reg", choices=_REG_NAMES, help="regularizer (default l1)")
    parser.add_argument("--lambda", dest="lam", type=float, help="regularization weight")
    parser.add_argument("--blocks", type=int, help="number of coordinate blocks")
    parser.add_argument("--batch", type=int, help="samples activated per iteration")
    parser.add_argument("--iters", type=int, help="iteration budget")
    parser.add_argument("--seed", type=int, help="RNG seed")
    parser.add_argument("--gamma", type=float, help="dual step size")
    parser.add_argument("--tau", type=float, help="primal step size")
    parser.add_argument("--mu", type=float, help="relaxation parameter")
    parser.add_argument("--rho", type=float, help="strong-convexity shift (logistic only)")
    parser.add_argument("--step-c", dest="step_c", type=float, help="sfb/rda step constant")
    parser.add_argument("--trace-stride", dest="trace_stride", type=int, help="record period")
    parser.add_argument(
        "--plateau-window", dest="plateau_window", type=int, help="early-stop window"
    )
    parser.add_argument(
        "--plateau-rtol", dest="plateau_rtol", type=float, help="early-stop tolerance"
    )
    parser.add_argument(
        "--positive-class",
        dest="positive_class",
        type=float,
        help="label mapped to +1 (binary task)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="proxsplit",
        description="Sparse linear classification via proximal splitting solvers.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="fit a model and write model + trace files")
    _add_common_options(train)
    train.add_argument("--solver", choices=sorted(SOLVERS), help="solver (default dr)")
    train.add_argument("--out", metavar="DIR", help="output directory (default .)")
    train.set_defaults(handler=_cmd_train)

    bench = commands.add_parser("bench", help="compare solvers against a reference run")
    _add_common_options(bench)
    bench.add_argument("--solvers", help="comma list (default dr,sfb,rda,bcpd)")
    bench.add_argument("--ref-solver", dest="ref_solver", help="reference solver (default dr)")
    bench.add_argument(
        "--ref-factor", dest="ref_factor", type=int, help="reference budget multiplier"
    )
    bench.add_argument("--out", metavar="DIR", help="directory for trace + summary CSVs")
    bench.set_defaults(handler=_cmd_bench)

    prox = commands.add_parser("prox-eval", help="print the logistic prox at one point")
    prox.add_argument("--v", type=float, required=True, help="evaluation point")
    prox.add_argument("--gamma", type=float, default=1.0, help="prox step (default 1)")
    prox.set_defaults(handler=_cmd_prox_eval)

    weval = commands.add_parser("w-eval", help="print the root of w exp(w) + r w = v")
    weval.add_argument("--r", type=float, required=True, help="linear coefficient")
    weval.add_argument("--v", type=float, required=True, help="right-hand side")
    weval.set_defaults(handler=_cmd_w_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints usage itself
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.handler(args)
    except DomainError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (ProxsplitError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


def entrypoint():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
