"""Command-line surface.

Subcommands: generate, reduce, solve, verify, bench. Exit codes follow a
fixed contract: 0 success, 1 validation error, 2 budget refusal,
3 property failure. All randomness flows from --seed; reports print as a
human table by default or as a machine record with --format record.
"""

from __future__ import annotations

import argparse
import sys
import time

from .errors import (
    DEFAULT_DIMENSION_CAP,
    DEFAULT_SUPPORT_CAP,
    BudgetExceededError,
    ParameterError,
)
from .harness import (
    ExperimentConfig,
    build_base_instance,
    solve_sparse_file,
    verify_label_cover,
    verify_report_payload,
    verify_sparse_instance,
)
from .label_cover import LabelCoverInstance
from .reduction import (
    SparseInstance,
    coherence,
    reduce_multilayered_smooth,
    reduce_multilayered_unique,
    reduce_two_layered,
)
from .serialize import load_file, load_payload, save_file
from .solvers import brute_force_sparse, omp, ols
from .vector_systems import build_incoherent_vector_system, verify_system

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BUDGET = 2
EXIT_PROPERTY = 3


def _parse_params(pairs: list[str]) -> dict:
    params: dict[str, int] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ParameterError(f"--param expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        try:
            params[key] = int(value)
        except ValueError as exc:
            raise ParameterError(f"parameter {key!r} must be an integer") from exc
    return params


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument("--out", type=str, default=None, help="output file path")
    parser.add_argument(
        "--format",
        choices=("table", "record"),
        default="table",
        help="human table or machine-readable record",
    )
    parser.add_argument(
        "--cap-supports",
        type=int,
        default=DEFAULT_SUPPORT_CAP,
        help="budget for exhaustive support enumeration",
    )
    parser.add_argument(
        "--cap-dim",
        type=int,
        default=DEFAULT_DIMENSION_CAP,
        help="hard limit on instance dimension",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsehard",
        description=(
            "Compile constraint systems into sparse-approximation instances, "
            "measure dictionary coherence exactly, and compare greedy pursuit "
            "against the exhaustive optimum"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a constraint-system instance file")
    gen.add_argument(
        "--kind",
        default=None,
        help="generator kind or max3sat-random",
    )
    gen.add_argument(
        "--param",
        action="append",
        default=[],
        help="generator parameter key=value (repeatable)",
    )
    gen.add_argument(
        "--formula-file",
        default=None,
        help="build the clause-variable game from a stored formula instead",
    )
    gen.add_argument("--u", type=int, default=None, help="parallel repetitions")
    _common_flags(gen)

    red = sub.add_parser("reduce", help="compile an instance file into a dictionary")
    red.add_argument("--in", dest="infile", required=True)
    red.add_argument(
        "--reduction", choices=("two-layered", "smooth", "unique"), required=True
    )
    red.add_argument("--ell", type=int, default=None, help="layer count (even)")
    red.add_argument("--t-declared", type=int, default=None)
    _common_flags(red)

    sol = sub.add_parser("solve", help="run solvers on a compiled instance file")
    sol.add_argument("--in", dest="infile", required=True)
    sol.add_argument(
        "--solvers", default="omp,ols", help="comma-separated subset of omp,ols"
    )
    sol.add_argument("--oracle", dest="oracle", action="store_true", default=True)
    sol.add_argument("--no-oracle", dest="oracle", action="store_false")
    sol.add_argument(
        "--epsilon-target",
        type=float,
        default=None,
        help="grade the achieved exponent against 1+epsilon",
    )
    _common_flags(sol)

    ver = sub.add_parser("verify", help="run invariant suites on a target")
    ver.add_argument("--in", dest="infile", default=None, help="instance or report file")
    ver.add_argument(
        "--system",
        nargs=2,
        type=int,
        metavar=("ELL", "D"),
        default=None,
        help="verify the incoherent vector grid for (ell, d)",
    )
    _common_flags(ver)

    ben = sub.add_parser("bench", help="time solvers on a compiled instance file")
    ben.add_argument("--in", dest="infile", required=True)
    ben.add_argument("--solvers", default="omp,ols")
    ben.add_argument("--repeat", type=int, default=3)
    _common_flags(ben)

    return parser


def _print_report_table(report) -> None:
    print(f"{'dimension M':<28}{report.m_dim}")
    print(f"{'columns N':<28}{report.n_cols}")
    print(f"{'sparsity k':<28}{report.k}")
    if report.ell is not None:
        print(f"{'layers ell':<28}{report.ell}")
    if report.d is not None:
        print(f"{'codeword groups d':<28}{report.d}")
    if report.code_order is not None:
        print(f"{'code order':<28}{report.code_order}")
    print(f"{'smoothness':<28}{report.smoothness}")
    print(f"{'mu gadget':<28}{report.mu_gadget:.6g} (squared {report.mu_gadget_squared})")
    print(f"{'mu full':<28}{report.mu_full:.6g} (squared {report.mu_full_squared})")
    print(f"{'claimed gadget bound':<28}{report.gadget_mu_bound}")
    if report.exponent is not None:
        print(f"{'exponent log k/log ell':<28}{report.exponent:.4f}")
    for name, residual in report.solver_residuals:
        norm = residual / report.m_dim**0.5
        print(f"{name + ' residual':<28}{residual:.6g} (normalized {norm:.6g})")
    if report.oracle_residual is not None:
        print(
            f"{'oracle residual':<28}{report.oracle_residual:.6g} "
            f"(normalized {report.normalized_oracle_residual:.6g})"
        )
    if report.completeness_residual is not None:
        print(
            f"{'completeness residual':<28}{report.completeness_residual:.6g} "
            f"(normalized {report.normalized_completeness_residual:.6g})"
        )
    for name, ok in report.checks:
        print(f"{name:<28}{'pass' if ok else 'FAIL'}")


def _cmd_generate(args) -> int:
    if (args.kind is None) == (args.formula_file is None):
        raise ParameterError("generate needs exactly one of --kind or --formula-file")
    if args.formula_file is not None:
        from .label_cover import Max3SatFormula, max3sat_to_label_cover, parallel_repetition

        formula = load_file(args.formula_file)
        if not isinstance(formula, Max3SatFormula):
            raise ParameterError("--formula-file must hold a stored formula")
        base = max3sat_to_label_cover(formula)
        if args.u is not None and args.u > 1:
            base = parallel_repetition(base, args.u)
    else:
        params = _parse_params(args.param)
        config = ExperimentConfig(
            reduction="two_layered",  # placeholder; generate only builds the base
            source_kind=args.kind,
            source_params=params,
            seed=args.seed,
            u=args.u,
            dimension_cap=args.cap_dim,
        )
        base = build_base_instance(config)
    if args.out:
        save_file(base, args.out)
        print(f"wrote {args.out}")
    else:
        print(
            f"instance: |V|={base.n_left} |W|={base.n_right} |E|={len(base.edges)} "
            f"sigma=({base.sigma_v_size},{base.sigma_w_size}) flavor={base.flavor}"
        )
    return EXIT_OK


def _cmd_reduce(args) -> int:
    base = load_file(args.infile)
    if not isinstance(base, LabelCoverInstance):
        raise ParameterError("reduce expects a constraint-system instance file")
    if args.reduction == "two-layered":
        sparse = reduce_two_layered(
            base, args.t_declared, dimension_cap=args.cap_dim
        )
    elif args.reduction == "smooth":
        if args.ell is None:
            raise ParameterError("--ell is required for multilayered reductions")
        sparse = reduce_multilayered_smooth(base, args.ell, dimension_cap=args.cap_dim)
    else:
        if args.ell is None:
            raise ParameterError("--ell is required for multilayered reductions")
        sparse = reduce_multilayered_unique(base, args.ell, dimension_cap=args.cap_dim)
    gadget = coherence(sparse, "gadget")
    full = coherence(sparse, "full")
    if args.format == "record":
        print(
            f'{{"mu_gadget": {gadget.mu}, "mu_full": {full.mu}, '
            f'"bound_satisfied": {str(bool(gadget.bound_satisfied)).lower()}}}'
        )
    else:
        print(f"{'mu gadget':<22}{gadget.mu:.6g} (squared {gadget.mu_squared})")
        print(f"{'mu full':<22}{full.mu:.6g} (squared {full.mu_squared})")
        print(f"{'claimed bound':<22}{gadget.bound_claimed}")
        print(f"{'bound satisfied':<22}{gadget.bound_satisfied}")
    if args.out:
        save_file(sparse, args.out)
        print(f"wrote {args.out}")
    if not gadget.bound_satisfied:
        return EXIT_PROPERTY
    return EXIT_OK


def _cmd_solve(args) -> int:
    solvers = tuple(s for s in args.solvers.split(",") if s)
    config = ExperimentConfig(
        reduction="two_layered",  # overwritten by the file's recorded kind
        source_kind="file",
        source_params={"path": args.infile},
        seed=args.seed,
        solvers=solvers,
        run_oracle=args.oracle,
        support_cap=args.cap_supports,
        dimension_cap=args.cap_dim,
        epsilon_target=args.epsilon_target,
    )
    report = solve_sparse_file(args.infile, config)
    if args.format == "record":
        import json

        print(json.dumps(report.to_payload(), sort_keys=True))
    else:
        _print_report_table(report)
    if args.out:
        save_file(report.to_payload(), args.out)
        print(f"wrote {args.out}")
    if not report.all_checks_pass:
        return EXIT_PROPERTY
    return EXIT_OK


def _print_checks(checks) -> bool:
    ok = True
    for check in checks:
        status = "pass" if check.passed else "FAIL"
        detail = f"  ({check.detail})" if check.detail else ""
        print(f"{check.name:<36}{status}{detail}")
        ok = ok and check.passed
    return ok


def _cmd_verify(args) -> int:
    if (args.system is None) == (args.infile is None):
        raise ParameterError("verify needs exactly one of --system or --in")
    if args.system is not None:
        ell, d = args.system
        system = build_incoherent_vector_system(ell, d, dimension_cap=args.cap_dim)
        report = verify_system(system)
        ok = _print_checks(report.checks)
        return EXIT_OK if ok else EXIT_PROPERTY
    payload = load_payload(args.infile)
    if payload.get("type") == "gap_report":
        checks = verify_report_payload(payload)
    else:
        obj = load_file(args.infile)
        if isinstance(obj, LabelCoverInstance):
            checks = verify_label_cover(obj)
        elif isinstance(obj, SparseInstance):
            checks = verify_sparse_instance(obj)
        else:
            raise ParameterError(f"cannot verify files of type {type(obj).__name__}")
    ok = _print_checks(checks)
    return EXIT_OK if ok else EXIT_PROPERTY


def _cmd_bench(args) -> int:
    sparse = load_file(args.infile)
    if not isinstance(sparse, SparseInstance):
        raise ParameterError("bench expects a compiled sparse-instance file")
    phi = sparse.to_dense()
    y = sparse.dense_target()
    runners = {"omp": omp, "ols": ols}
    for name in args.solvers.split(","):
        if name not in runners:
            raise ParameterError(f"unknown solver {name!r}")
        best = float("inf")
        residual = None
        for _ in range(max(1, args.repeat)):
            start = time.perf_counter()
            result = runners[name](phi, y, sparse.k)
            best = min(best, time.perf_counter() - start)
            residual = result.residual_norm
        print(f"{name:<6}best {best * 1000:8.2f} ms   residual {residual:.6g}")
    try:
        start = time.perf_counter()
        oracle = brute_force_sparse(
            phi, y, sparse.k, cap=args.cap_supports, nonnegative_indicator=True
        )
        elapsed = time.perf_counter() - start
        print(f"{'oracle':<6}     {elapsed * 1000:8.2f} ms   residual {oracle.residual_norm:.6g}")
    except BudgetExceededError as err:
        print(f"oracle refused: needs {err.required} supports, cap {err.allowed}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "reduce": _cmd_reduce,
        "solve": _cmd_solve,
        "verify": _cmd_verify,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except BudgetExceededError as err:
        print(
            f"budget refusal: {err.what} needs {err.required}, allowed {err.allowed}",
            file=sys.stderr,
        )
        return EXIT_BUDGET
    except (ParameterError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
