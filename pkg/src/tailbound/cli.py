"""Command-line surface: compute bounds, verify them adversarially, and
emit the variance-sweep comparison panels as CSV files.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import tempfile
from typing import Callable, Sequence

import numpy as np

from .bernstein_moments import (
    MomentVector,
    exp_moment_bound,
    refined_binomial_bound,
    z_nm_bound,
)
from .classic_bounds import (
    BoundReport,
    MeanInstance,
    VarianceClassSpec,
    bennett_bound,
    hoeffding_bound,
    hoeffding_exp_bound,
    markov_bound,
)
from .convex_opt_bounds import (
    bentkus_linear_bound,
    binomial_comparison_bound,
    missing_factor_bound,
)
from .errors import DomainError, ResourceLimitError, TailboundError, ValidationError
from .instance_io import (
    BoundTask,
    InstanceFile,
    ResultRow,
    SkippedMethod,
    emit_results,
    parse_instance,
)
from .mixture_bounds import (
    ConditionalMeansSpec,
    ConditionalProbsSpec,
    PartitionSpec,
    conditional_means_bound,
    conditional_probs_bound,
    xi_sum_bound,
)
from .order_oracle import validate_bound

FIGURE_PANELS = (
    (0.25, (6, 7, 8, 9)),
    (0.50, (11, 12, 13, 14)),
    (0.75, (16, 17, 18, 19)),
)
FIGURE_N = 20
FIGURE_GRID_POINTS = 50


def _task_means(task: BoundTask) -> tuple[float, ...]:
    if task.means is not None:
        return task.means
    return tuple(row[0] for row in task.moments)


def _mean_instance(task: BoundTask) -> MeanInstance:
    return MeanInstance.from_means(_task_means(task), task.t)


def _markov(task: BoundTask) -> BoundReport:
    total_mean = math.fsum(_task_means(task))
    report = markov_bound(total_mean, task.t)
    return dataclasses.replace(report, n=task.n, p_or_q1=total_mean / task.n)


def _moment_vectors(task: BoundTask) -> list[MomentVector]:
    if task.information == "moments":
        return [MomentVector(row) for row in task.moments]
    # variance tasks feed the lattice machinery through (p, sigma2 + p^2)
    return [
        MomentVector((p, s2 + p * p))
        for p, s2 in zip(task.means, task.sigma2s)
    ]


def _variance_specs(task: BoundTask) -> list[VarianceClassSpec]:
    return [VarianceClassSpec(p, s2) for p, s2 in zip(task.means, task.sigma2s)]


def _cond_means_specs(task: BoundTask) -> list[ConditionalMeansSpec]:
    partition = PartitionSpec(task.breakpoints)
    return [
        ConditionalMeansSpec(partition, row, p)
        for row, p in zip(task.cond_means, task.means)
    ]


def _cond_probs_spec(task: BoundTask) -> ConditionalProbsSpec:
    return ConditionalProbsSpec(
        PartitionSpec(task.breakpoints), task.cell_probs, task.means[0]
    )


def _bennett(task: BoundTask) -> BoundReport:
    if len(set(task.sigma2s)) != 1 or len(set(task.means)) != 1:
        raise DomainError(
            "the variance-aware exponential bound requires a shared (p, sigma2) pair"
        )
    return bennett_bound(
        task.n, VarianceClassSpec(task.means[0], task.sigma2s[0]), task.t
    )


_MEAN_METHODS: dict[str, Callable[[BoundTask], BoundReport]] = {
    "markov": _markov,
    "hoeffding": lambda task: hoeffding_bound(_mean_instance(task)),
    "hoeffding_exp": lambda task: hoeffding_exp_bound(_mean_instance(task)),
    "bentkus_linear": lambda task: bentkus_linear_bound(_mean_instance(task)),
    "missing_factor": lambda task: missing_factor_bound(_mean_instance(task)),
    "binomial_comparison": lambda task: binomial_comparison_bound(_mean_instance(task)),
}

_EXTRA_METHODS: dict[str, dict[str, Callable[[BoundTask], BoundReport]]] = {
    "mean": {},
    "moments": {
        "exp_moment": lambda task: exp_moment_bound(_moment_vectors(task), task.t),
        "z_nm": lambda task: z_nm_bound(_moment_vectors(task), task.t),
        "refined_binomial": lambda task: refined_binomial_bound(
            _moment_vectors(task), task.t
        ),
    },
    "variance": {
        "bennett": _bennett,
        "z_nm": lambda task: z_nm_bound(_moment_vectors(task), task.t),
        "xi_sum": lambda task: xi_sum_bound(_variance_specs(task), task.t),
    },
    "conditional-means": {
        "conditional_means": lambda task: conditional_means_bound(
            _cond_means_specs(task), task.t
        ),
    },
    "conditional-probs": {
        "conditional_probs": lambda task: conditional_probs_bound(
            _cond_probs_spec(task), task.n, task.t
        ),
    },
}


def method_names(information: str) -> list[str]:
    return list(_MEAN_METHODS) + list(_EXTRA_METHODS[information])


def compute_bounds(
    task: BoundTask, methods: Sequence[str] | None = None
) -> list[ResultRow]:
    """Every applicable bound for one task; inapplicable methods become
    :class:`SkippedMethod` rows carrying the reason."""
    available = dict(_MEAN_METHODS)
    available.update(_EXTRA_METHODS[task.information])
    selected = list(available) if methods is None else list(methods)
    unknown = [m for m in selected if m not in available]
    if unknown:
        raise DomainError(
            f"unknown method(s) {', '.join(unknown)}; "
            f"available for {task.information}: {', '.join(available)}"
        )
    means = _task_means(task)
    p_bar = math.fsum(means) / task.n
    rows: list[ResultRow] = []
    for name in selected:
        try:
            report = available[name](task)
        except (DomainError, ResourceLimitError) as exc:
            rows.append(
                SkippedMethod(
                    method=name,
                    reason=str(exc),
                    n=task.n,
                    p_or_q1=p_bar,
                    sigma2=task.sigma2_label,
                    t=task.t,
                )
            )
            continue
        rows.append(
            dataclasses.replace(
                report,
                n=report.n if report.n is not None else task.n,
                p_or_q1=report.p_or_q1 if report.p_or_q1 is not None else p_bar,
                sigma2=task.sigma2_label,
                t=report.t if report.t is not None else task.t,
            )
        )
    return rows


def class_specs_for_task(task: BoundTask):
    """Per-variable class specs matching the task's information level."""
    if task.information == "mean":
        return [MomentVector((p,)) for p in task.means]
    if task.information == "moments":
        return [MomentVector(row) for row in task.moments]
    if task.information == "variance":
        return _variance_specs(task)
    if task.information == "conditional-means":
        return _cond_means_specs(task)
    if task.information == "conditional-probs":
        spec = _cond_probs_spec(task)
        return [spec] * task.n
    raise DomainError(f"unknown information level {task.information!r}")


def _read_instance(path: str) -> InstanceFile:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_instance(handle.read())


def cmd_bound(path: str, methods: Sequence[str] | None, fmt: str) -> int:
    try:
        instance = _read_instance(path)
        all_rows: list[ResultRow] = []
        for task in instance.tasks():
            all_rows.extend(compute_bounds(task, methods))
        output = emit_results(all_rows, fmt)
    except (ValidationError, TailboundError, OSError) as exc:
        _print_input_error(exc)
        return 2
    for row in all_rows:
        if isinstance(row, SkippedMethod):
            print(f"note: {row.method} skipped: {row.reason}", file=sys.stderr)
    sys.stdout.write(output)
    return 0


def cmd_verify(path: str, trials: int, seed: int, inject_corrupt: bool = False) -> int:
    try:
        instance = _read_instance(path)
        if instance.n > 8:
            raise DomainError("exact verification is limited to n <= 8 variables")
        if trials < 0:
            raise DomainError("trials must be nonnegative")
        tasks = instance.tasks()
    except (ValidationError, TailboundError, OSError) as exc:
        _print_input_error(exc)
        return 2
    total_violations = 0
    print("method,t,sigma2,bound,max_tail,violations")
    for task_index, task in enumerate(tasks):
        specs = class_specs_for_task(task)
        rows = compute_bounds(task)
        for method_index, row in enumerate(rows):
            if isinstance(row, SkippedMethod):
                continue
            bound_value = row.value / 2.0 if inject_corrupt else row.value
            child = np.random.SeedSequence(
                [seed, task_index, method_index]
            ).generate_state(1)[0]
            report = validate_bound(specs, task.t, bound_value, trials, int(child))
            total_violations += len(report.violations)
            print(
                f"{row.method},{task.t:.12g},"
                f"{'' if task.sigma2_label is None else format(task.sigma2_label, '.12g')},"
                f"{bound_value:.12g},{report.max_tail:.12g},{len(report.violations)}"
            )
            for violation in report.violations:
                members = "; ".join(
                    f"support={tuple(round(s, 6) for s in m.support)} "
                    f"probs={tuple(round(q, 6) for q in m.probs)}"
                    for m in violation.members
                )
                print(
                    f"counterexample: method={row.method} trial={violation.trial} "
                    f"tail={violation.tail:.12g} > bound={bound_value:.12g} [{members}]",
                    file=sys.stderr,
                )
    return 1 if total_violations else 0


def _figure_rows(p: float, t: int):
    cap = p * (1.0 - p)
    rows = []
    for k in range(1, FIGURE_GRID_POINTS + 1):
        s2 = cap * k / FIGURE_GRID_POINTS
        vclass = VarianceClassSpec(p, s2)
        bennett = bennett_bound(FIGURE_N, vclass, t).value
        momopt = z_nm_bound(
            [MomentVector((p, s2 + p * p))] * FIGURE_N, float(t)
        ).value
        xitheorem = xi_sum_bound([vclass] * FIGURE_N, float(t)).value
        rows.append((s2, bennett, momopt, xitheorem))
    return rows


def cmd_figure1(outdir: str) -> int:
    try:
        os.makedirs(outdir, exist_ok=True)
        for p, thresholds in FIGURE_PANELS:
            for t in thresholds:
                name = f"fig1_p{int(round(p * 100))}_t{t}.csv"
                lines = ["sigma2,bennett,momopt,xitheorem"]
                for row in _figure_rows(p, t):
                    lines.append(",".join(f"{v:.12g}" for v in row))
                content = "\n".join(lines) + "\n"
                fd, tmp_path = tempfile.mkstemp(dir=outdir, suffix=".tmp")
                try:
                    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                        handle.write(content)
                    os.replace(tmp_path, os.path.join(outdir, name))
                except BaseException:
                    if os.path.exists(tmp_path):
                        os.unlink(tmp_path)
                    raise
    except OSError as exc:
        _print_input_error(exc)
        return 2
    return 0


def _print_input_error(exc: Exception) -> None:
    if isinstance(exc, ValidationError):
        for violation in exc.violations:
            print(f"error: {violation}", file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tailbound",
        description=(
            "Tail-probability bounds for sums of independent bounded random "
            "variables, with exact small-instance verification."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="compute every applicable bound for an instance")
    p_bound.add_argument("instance", help="path to a JSON instance file")
    p_bound.add_argument(
        "--methods",
        help="comma-separated subset of methods to compute (default: all applicable)",
    )
    p_bound.add_argument(
        "--format", choices=("csv", "table"), default="csv", help="output format"
    )

    p_verify = sub.add_parser(
        "verify", help="validate the computed bounds against exact adversarial tails"
    )
    p_verify.add_argument("instance", help="path to a JSON instance file (n <= 8)")
    p_verify.add_argument("--trials", type=int, required=True, help="member tuples per bound")
    p_verify.add_argument("--seed", type=int, required=True, help="root seed")
    p_verify.add_argument(
        "--inject-corrupt", action="store_true", help=argparse.SUPPRESS
    )

    p_fig = sub.add_parser(
        "figure1", help="emit the 12 variance-sweep comparison panels as CSV files"
    )
    p_fig.add_argument("--out", required=True, help="output directory")

    args = parser.parse_args(argv)
    if args.command == "bound":
        methods = None
        if args.methods:
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        return cmd_bound(args.instance, methods, args.format)
    if args.command == "verify":
        return cmd_verify(args.instance, args.trials, args.seed, args.inject_corrupt)
    if args.command == "figure1":
        return cmd_figure1(args.out)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
