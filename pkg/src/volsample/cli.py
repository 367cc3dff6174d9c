"""Command-line surface: sampling, regression, verification, benchmarking.

Every command prints a single JSON report to stdout and diagnostics to
stderr.  The ``results`` section of the report is deterministic for a fixed
seed and input files; wall-clock measurements live under ``timings_ms`` and
are excluded from that guarantee.

Exit codes: 0 success / all checks passed, 1 a verification check failed,
2 input error (parse, rank, size range, dimensions, enumeration cap),
3 numeric breakdown during computation.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time

import numpy as np

from .errors import (
    DenominatorVanishesError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    MatrixParseError,
    NumericBreakdownError,
    RankDeficientError,
    SingularMatrixError,
    SizeRangeError,
    TooManySubsetsError,
)
from .io import file_digest, load_labels, load_matrix
from .linalg import ProblemMatrix
from .montecarlo import McConfig
from .regression import RegressionProblem, averaged_solution, solve_full, solve_subset
from .sampler import DEFAULT_SUBSET_CAP, derive_seed, reverse_iterative_sample
from .suites import all_passed, run_exact_suite, run_mc_suite

_INPUT_ERRORS = (
    MatrixParseError,
    RankDeficientError,
    SizeRangeError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    TooManySubsetsError,
    OSError,
    ValueError,
)
_NUMERIC_ERRORS = (NumericBreakdownError, SingularMatrixError, DenominatorVanishesError)

# Full-data losses at or below this (relative to the label scale) are treated
# as realizable labels, so loss ratios are reported as 1 instead of 0/0.
REALIZABLE_RTOL = 1e-12


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def _input_section(args) -> dict:
    section = {"input": {"path": args.input, "sha256": file_digest(args.input)}}
    labels = getattr(args, "labels", None)
    section["labels"] = (
        {"path": labels, "sha256": file_digest(labels)} if labels else None
    )
    return section


def _report(command: str, argv: list[str], inputs: dict, seed: int, timings: dict, results: dict) -> dict:
    return {
        "command": command,
        "argv": argv,
        "inputs": inputs,
        "seed": seed,
        "timings_ms": timings,
        "results": results,
    }


def _load_problem_matrix(args) -> ProblemMatrix:
    return ProblemMatrix(load_matrix(args.input))


def cmd_sample(args, argv) -> tuple[dict, int]:
    started = time.perf_counter()
    x = _load_problem_matrix(args)
    inputs = _input_section(args)
    rng = np.random.default_rng(args.seed)
    samples = []
    per_sample_ms = []
    for _ in range(args.count):
        t0 = time.perf_counter()
        subset = reverse_iterative_sample(x, args.size, rng)
        per_sample_ms.append(1000.0 * (time.perf_counter() - t0))
        samples.append(list(subset.one_based()))
    timings = {
        "total": 1000.0 * (time.perf_counter() - started),
        "per_sample": per_sample_ms,
    }
    results = {"d": x.d, "n": x.n, "size": args.size, "samples": samples}
    return _report("sample", argv, inputs, args.seed, timings, results), 0


def cmd_regress(args, argv) -> tuple[dict, int]:
    started = time.perf_counter()
    x = _load_problem_matrix(args)
    labels = load_labels(args.labels)
    inputs = _input_section(args)
    problem = RegressionProblem(x, labels)
    optimum = solve_full(problem)
    rng = np.random.default_rng(args.seed)
    subsets = [reverse_iterative_sample(x, args.size, rng) for _ in range(args.repeats)]
    solutions = [solve_subset(problem, s) for s in subsets]
    averaged = averaged_solution(problem, subsets)
    realizable = optimum.loss <= REALIZABLE_RTOL * max(1.0, float(labels @ labels))
    ratio = 1.0 if realizable else averaged.loss / optimum.loss
    results = {
        "d": x.d,
        "n": x.n,
        "size": args.size,
        "repeats": args.repeats,
        "samples": [list(s.one_based()) for s in subsets],
        "per_sample": [
            {"weights": sol.weights.tolist(), "loss": sol.loss} for sol in solutions
        ],
        "averaged_weights": averaged.weights.tolist(),
        "averaged_loss": averaged.loss,
        "full_weights": optimum.weights.tolist(),
        "full_loss": optimum.loss,
        "loss_ratio": ratio,
        "realizable": realizable,
    }
    timings = {"total": 1000.0 * (time.perf_counter() - started)}
    return _report("regress", argv, inputs, args.seed, timings, results), 0


def cmd_verify(args, argv) -> tuple[dict, int]:
    started = time.perf_counter()
    x = _load_problem_matrix(args)
    labels = load_labels(args.labels) if args.labels else None
    inputs = _input_section(args)
    if args.suite == "exact":
        reports = run_exact_suite(x, labels, args.size, cap=args.cap)
    else:
        cfg = McConfig(
            replicates=args.replicates, seed=args.seed, threads=args.threads
        )
        reports = run_mc_suite(x, labels, args.size, cfg, k=args.repeats)
    ok = all_passed(reports)
    results = {
        "suite": args.suite,
        "size": args.size,
        "reports": [r.to_dict() for r in reports],
        "all_passed": ok,
    }
    timings = {"total": 1000.0 * (time.perf_counter() - started)}
    return _report("verify", argv, inputs, args.seed, timings, results), (0 if ok else 1)


def _parse_dims(text: str) -> list[tuple[int, int, int]]:
    configs = []
    for part in text.split(","):
        fields = part.lower().split("x")
        if len(fields) != 3:
            raise ValueError(f"expected DxNxS, got {part!r}")
        d, n, s = (int(f) for f in fields)
        configs.append((d, n, s))
    return configs


def cmd_bench(args, argv) -> tuple[dict, int]:
    started = time.perf_counter()
    configs = _parse_dims(args.dims)
    rows = []
    for index, (d, n, s) in enumerate(configs):
        gen = np.random.default_rng(derive_seed(args.seed, index))
        x = ProblemMatrix(gen.standard_normal((d, n)))
        times = []
        for _ in range(args.trials):
            t0 = time.perf_counter()
            reverse_iterative_sample(x, s, gen)
            times.append(1000.0 * (time.perf_counter() - t0))
        rows.append(
            {"d": d, "n": n, "s": s, "median_ms": statistics.median(times)}
        )
    # Log-log slope of time vs n over configs sampling down to s == d.
    slopes = {}
    by_d: dict[int, list[tuple[int, float]]] = {}
    for row in rows:
        if row["s"] == row["d"]:
            by_d.setdefault(row["d"], []).append((row["n"], row["median_ms"]))
    for d, points in by_d.items():
        if len({n for n, _ in points}) >= 2:
            logs_n = np.log([n for n, _ in points])
            logs_t = np.log([t for _, t in points])
            slopes[str(d)] = float(np.polyfit(logs_n, logs_t, 1)[0])
    timings = {
        "total": 1000.0 * (time.perf_counter() - started),
        "rows": rows,
        "fitted_exponents": slopes,
    }
    results = {
        "configs": [{"d": d, "n": n, "s": s} for d, n, s in configs],
        "trials": args.trials,
        "completed": True,
    }
    return _report("bench", argv, {"input": None, "labels": None}, args.seed, timings, results), 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volsample",
        description="Volume sampling of column subsets with verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sample = sub.add_parser("sample", help="draw volume-sampled column subsets")
    sample.add_argument("--input", required=True, help="matrix file (rows are dimensions)")
    sample.add_argument("--size", type=int, required=True, help="subset size s in [d, n]")
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--count", type=int, default=1, help="number of subsets to draw")
    sample.set_defaults(func=cmd_sample)

    regress = sub.add_parser("regress", help="subsampled least squares")
    regress.add_argument("--input", required=True)
    regress.add_argument("--labels", required=True, help="label file (one per column)")
    regress.add_argument("--size", type=int, required=True)
    regress.add_argument("--repeats", type=int, default=1, help="independent samples to average")
    regress.add_argument("--seed", type=int, default=0)
    regress.set_defaults(func=cmd_regress)

    verify = sub.add_parser("verify", help="run the verification suite")
    verify.add_argument("--input", required=True)
    verify.add_argument("--labels", default=None)
    verify.add_argument("--suite", choices=("exact", "mc"), required=True)
    verify.add_argument("--size", type=int, required=True)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--replicates", type=int, default=1000, help="Monte Carlo replicates")
    verify.add_argument("--repeats", type=int, default=2, help="k for the averaged-predictor check")
    verify.add_argument("--cap", type=int, default=DEFAULT_SUBSET_CAP, help="enumeration cap")
    verify.add_argument("--threads", type=int, default=1, help="Monte Carlo threads (0 = auto)")
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="time the sampler on synthetic matrices")
    bench.add_argument("--dims", required=True, help="comma-separated DxNxS triples")
    bench.add_argument("--trials", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        report, code = args.func(args, argv)
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    json.dump(report, sys.stdout, indent=2, default=_json_default)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
