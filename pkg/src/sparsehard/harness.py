"""Experiment orchestration: config validation, pipeline runs, gap
reports, and invariant verification for files and reports.

A pipeline is (config, seed) -> base instance -> sparse instance ->
GapReport, and is fully deterministic: re-running a config reproduces the
report byte for byte. Residuals are reported raw and normalized by
sqrt(M), the scale on which the completeness/soundness gap lives.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import (
    DEFAULT_DIMENSION_CAP,
    DEFAULT_SUPPORT_CAP,
    ParameterError,
)
from .label_cover import (
    GENERATOR_KINDS,
    LabelCoverInstance,
    generate,
    max3sat_to_label_cover,
    parallel_repetition,
    random_max3sat,
)
from .reduction import (
    GadgetRef,
    IdentityRef,
    SparseInstance,
    coherence,
    reduce_multilayered_smooth,
    reduce_multilayered_unique,
    reduce_two_layered,
)
from .solvers import brute_force_sparse, omp, ols, restricted_least_squares
from .vector_systems import PropertyCheck

REDUCTIONS = ("two_layered", "smooth", "unique")
SOLVER_NAMES = ("omp", "ols")
SOURCE_KINDS = GENERATOR_KINDS + ("max3sat-random", "file")

COMPLETENESS_TOL = 1e-10
SOUNDNESS_TOL = 1e-6
DOMINANCE_TOL = 1e-9

__all__ = [
    "ExperimentConfig",
    "GapReport",
    "build_base_instance",
    "build_sparse_instance",
    "run_pipeline",
    "solve_sparse_instance",
    "verify_label_cover",
    "verify_report_payload",
    "verify_sparse_instance",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one reduction-and-solve run."""

    reduction: str
    source_kind: str
    source_params: dict
    seed: int
    u: int | None = None
    ell: int | None = None
    t_declared: int | None = None
    solvers: tuple[str, ...] = ("omp", "ols")
    run_oracle: bool = True
    support_cap: int = DEFAULT_SUPPORT_CAP
    dimension_cap: int = DEFAULT_DIMENSION_CAP
    epsilon_target: float | None = None

    def validate(self) -> None:
        if self.reduction not in REDUCTIONS:
            raise ParameterError(f"unknown reduction {self.reduction!r}")
        if self.source_kind not in SOURCE_KINDS:
            raise ParameterError(f"unknown source kind {self.source_kind!r}")
        if self.reduction in ("smooth", "unique"):
            if self.ell is None or self.ell < 2 or self.ell % 2 != 0:
                raise ParameterError("multilayered reductions need an even ell >= 2")
        for name in self.solvers:
            if name not in SOLVER_NAMES:
                raise ParameterError(f"unknown solver {name!r}")
        if self.u is not None and self.u < 1:
            raise ParameterError("repetition count must be >= 1")
        if self.epsilon_target is not None and self.epsilon_target <= 0:
            raise ParameterError("epsilon target must be positive")
        if self.source_kind == "file" and "path" not in self.source_params:
            raise ParameterError("file sources need a 'path' parameter")

    def to_payload(self) -> dict:
        return {
            "reduction": self.reduction,
            "source_kind": self.source_kind,
            "source_params": dict(self.source_params),
            "seed": self.seed,
            "u": self.u,
            "ell": self.ell,
            "t_declared": self.t_declared,
            "solvers": list(self.solvers),
            "run_oracle": self.run_oracle,
            "support_cap": self.support_cap,
            "dimension_cap": self.dimension_cap,
            "epsilon_target": self.epsilon_target,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "ExperimentConfig":
        return cls(
            reduction=payload["reduction"],
            source_kind=payload["source_kind"],
            source_params=dict(payload["source_params"]),
            seed=payload["seed"],
            u=payload.get("u"),
            ell=payload.get("ell"),
            t_declared=payload.get("t_declared"),
            solvers=tuple(payload.get("solvers", ("omp", "ols"))),
            run_oracle=payload.get("run_oracle", True),
            support_cap=payload.get("support_cap", DEFAULT_SUPPORT_CAP),
            dimension_cap=payload.get("dimension_cap", DEFAULT_DIMENSION_CAP),
            epsilon_target=payload.get("epsilon_target"),
        )


def file_sha256(path: str | Path) -> str:
    with open(path, "rb") as handle:
        return hashlib.sha256(handle.read()).hexdigest()


def build_base_instance(config: ExperimentConfig) -> LabelCoverInstance:
    config.validate()
    if config.source_kind == "file":
        from .serialize import load_file

        base = load_file(config.source_params["path"])
        if not isinstance(base, LabelCoverInstance):
            raise ParameterError("file source must hold a constraint-system instance")
        recorded = config.source_params.get("sha256")
        if recorded is not None and recorded != file_sha256(config.source_params["path"]):
            raise ParameterError("file source changed since the config was recorded")
    elif config.source_kind == "max3sat-random":
        n_vars = config.source_params.get("n_vars")
        if not isinstance(n_vars, int):
            raise ParameterError("max3sat-random needs integer n_vars")
        base = max3sat_to_label_cover(random_max3sat(n_vars, config.seed))
    else:
        base = generate(config.source_kind, config.source_params, config.seed)
    if config.u is not None and config.u > 1:
        base = parallel_repetition(base, config.u)
    return base


def build_sparse_instance(
    config: ExperimentConfig, base: LabelCoverInstance
) -> SparseInstance:
    if config.reduction == "two_layered":
        return reduce_two_layered(
            base, config.t_declared, dimension_cap=config.dimension_cap
        )
    if config.reduction == "smooth":
        return reduce_multilayered_smooth(
            base, config.ell, dimension_cap=config.dimension_cap
        )
    return reduce_multilayered_unique(
        base, config.ell, dimension_cap=config.dimension_cap
    )


@dataclass(frozen=True)
class GapReport:
    """Instance metadata plus per-solver and oracle residuals.

    normalized values are residual / sqrt(M); checks pair a name with its
    outcome so a report can be graded mechanically.
    """

    config: dict
    m_dim: int
    n_cols: int
    k: int
    ell: int | None
    d: int | None
    code_order: int | None
    smoothness: Fraction
    mu_gadget_squared: Fraction
    mu_gadget: float
    mu_full_squared: Fraction
    mu_full: float
    gadget_mu_bound: Fraction
    declared_optimum: Fraction | None
    solver_residuals: tuple[tuple[str, float], ...]
    oracle_residual: float | None
    completeness_residual: float | None
    exponent: float | None
    checks: tuple[tuple[str, bool], ...] = field(default_factory=tuple)

    @property
    def normalized_solver_residuals(self) -> tuple[tuple[str, float], ...]:
        scale = math.sqrt(self.m_dim)
        return tuple((name, r / scale) for name, r in self.solver_residuals)

    @property
    def normalized_oracle_residual(self) -> float | None:
        if self.oracle_residual is None:
            return None
        return self.oracle_residual / math.sqrt(self.m_dim)

    @property
    def normalized_completeness_residual(self) -> float | None:
        if self.completeness_residual is None:
            return None
        return self.completeness_residual / math.sqrt(self.m_dim)

    @property
    def all_checks_pass(self) -> bool:
        return all(ok for _, ok in self.checks)

    def to_payload(self) -> dict:
        return {
            "format_version": 1,
            "type": "gap_report",
            "config": self.config,
            "m_dim": self.m_dim,
            "n_cols": self.n_cols,
            "k": self.k,
            "ell": self.ell,
            "d": self.d,
            "code_order": self.code_order,
            "smoothness": {"num": self.smoothness.numerator, "den": self.smoothness.denominator},
            "mu_gadget_squared": {
                "num": self.mu_gadget_squared.numerator,
                "den": self.mu_gadget_squared.denominator,
            },
            "mu_gadget": self.mu_gadget,
            "mu_full_squared": {
                "num": self.mu_full_squared.numerator,
                "den": self.mu_full_squared.denominator,
            },
            "mu_full": self.mu_full,
            "gadget_mu_bound": {
                "num": self.gadget_mu_bound.numerator,
                "den": self.gadget_mu_bound.denominator,
            },
            "declared_optimum": (
                None
                if self.declared_optimum is None
                else {
                    "num": self.declared_optimum.numerator,
                    "den": self.declared_optimum.denominator,
                }
            ),
            "solver_residuals": [[name, r] for name, r in self.solver_residuals],
            "normalized_solver_residuals": [
                [name, r] for name, r in self.normalized_solver_residuals
            ],
            "oracle_residual": self.oracle_residual,
            "normalized_oracle_residual": self.normalized_oracle_residual,
            "completeness_residual": self.completeness_residual,
            "normalized_completeness_residual": self.normalized_completeness_residual,
            "exponent": self.exponent,
            "checks": [[name, ok] for name, ok in self.checks],
        }


def solve_sparse_instance(
    config: ExperimentConfig,
    inst: SparseInstance,
    declared_optimum: Fraction | None = None,
) -> GapReport:
    """Run the configured solvers (and optionally the oracle) and grade
    the outcome against what the construction declares."""
    config.validate()
    phi = inst.to_dense()
    y = inst.dense_target()

    gadget = coherence(inst, "gadget")
    full = coherence(inst, "full")

    solver_residuals: list[tuple[str, float]] = []
    for name in config.solvers:
        run = omp if name == "omp" else ols
        solver_residuals.append((name, run(phi, y, inst.k).residual_norm))

    oracle_residual = None
    if config.run_oracle:
        oracle = brute_force_sparse(
            phi, y, inst.k, cap=config.support_cap, nonnegative_indicator=True
        )
        oracle_residual = oracle.residual_norm

    completeness_residual = None
    if inst.planted_support is not None:
        _, completeness_residual = restricted_least_squares(
            phi, list(inst.planted_support), y
        )

    checks: list[tuple[str, bool]] = [
        ("gadget_coherence_within_bound", bool(gadget.bound_satisfied)),
    ]
    if completeness_residual is not None and declared_optimum == 1:
        checks.append(
            ("completeness_residual_zero", completeness_residual < COMPLETENESS_TOL)
        )
    if oracle_residual is not None:
        checks.append(
            (
                "oracle_dominates_solvers",
                all(
                    oracle_residual <= r + DOMINANCE_TOL for _, r in solver_residuals
                ),
            )
        )
        if declared_optimum is not None and declared_optimum < 1:
            checks.append(("soundness_gap_positive", oracle_residual > SOUNDNESS_TOL))
    exponent = inst.coherence_exponent()
    if config.epsilon_target is not None and exponent is not None:
        checks.append(
            ("exponent_within_target", exponent <= 1 + config.epsilon_target)
        )

    return GapReport(
        config=config.to_payload(),
        m_dim=inst.m_dim,
        n_cols=inst.n_cols,
        k=inst.k,
        ell=inst.params.ell,
        d=inst.params.d,
        code_order=inst.params.code_order,
        smoothness=inst.params.smoothness,
        mu_gadget_squared=gadget.mu_squared,
        mu_gadget=gadget.mu,
        mu_full_squared=full.mu_squared,
        mu_full=full.mu,
        gadget_mu_bound=inst.params.gadget_mu_bound,
        declared_optimum=declared_optimum,
        solver_residuals=tuple(solver_residuals),
        oracle_residual=oracle_residual,
        completeness_residual=completeness_residual,
        exponent=exponent,
        checks=tuple(checks),
    )


def run_pipeline(config: ExperimentConfig) -> tuple[LabelCoverInstance, SparseInstance, GapReport]:
    base = build_base_instance(config)
    sparse = build_sparse_instance(config, base)
    report = solve_sparse_instance(config, sparse, base.declared_optimum)
    return base, sparse, report


def solve_sparse_file(path: str | Path, config: ExperimentConfig) -> GapReport:
    """Solve a compiled instance loaded from disk.

    The returned report's config pins the file by content hash, so a later
    verify can re-read it, re-solve, and compare.
    """
    from .serialize import load_file

    sparse = load_file(path)
    if not isinstance(sparse, SparseInstance):
        raise ParameterError("solve expects a compiled sparse-instance file")
    import dataclasses

    pinned = dataclasses.replace(
        config,
        source_kind="file",
        source_params={
            "path": str(path),
            "sha256": file_sha256(path),
            "holds": "sparse_instance",
        },
        reduction={
            "two_layered": "two_layered",
            "multilayered_smooth": "smooth",
            "multilayered_unique": "unique",
        }[sparse.params.kind],
        ell=sparse.params.ell,
    )
    return solve_sparse_instance(pinned, sparse)


# ----------------------------------------------------------- verification


def verify_label_cover(inst: LabelCoverInstance) -> list[PropertyCheck]:
    """Re-run the structural invariants of a loaded constraint system."""
    checks: list[PropertyCheck] = []
    total = all(len(t) == inst.sigma_v_size for t in inst.constraints)
    in_range = all(
        0 <= b < inst.sigma_w_size for t in inst.constraints for b in t
    )
    checks.append(PropertyCheck("constraints_total", total and in_range))
    if inst.flavor == "unique":
        bijective = all(
            len(set(t)) == inst.sigma_w_size for t in inst.constraints
        )
        checks.append(PropertyCheck("constraints_bijective", bijective))
    left_ok, right_ok = inst.is_regular()
    checks.append(
        PropertyCheck(
            "regularity_recorded",
            True,
            f"left_regular={left_ok} right_regular={right_ok}",
        )
    )
    if inst.planted is not None:
        from .label_cover import evaluate

        checks.append(
            PropertyCheck("planted_assignment_perfect", evaluate(inst, inst.planted) == 1)
        )
    return checks


def _layer_side_is_left(layer: int) -> bool:
    # both layouts alternate starting from the left side
    return layer % 2 == 0


def verify_sparse_instance(inst: SparseInstance) -> list[PropertyCheck]:
    """Structural invariants of a compiled instance, reported per check."""
    checks: list[PropertyCheck] = []

    blocks_ok = inst.block_width * inst.n_blocks == inst.m_dim
    checks.append(PropertyCheck("blocks_partition_coordinates", blocks_ok))

    checks.append(PropertyCheck("k_matches_layer_sizes", inst.k == sum(inst.layer_sizes)))

    identity_ok = True
    detail = None
    for coord in range(inst.m_dim):
        idx = inst.gadget_count + coord
        ref = inst.provenance[idx]
        col = inst.columns[idx]
        if ref != IdentityRef(coord) or col.support != (coord,):
            identity_ok = False
            detail = f"column {idx} is not identity coordinate {coord}"
            break
    checks.append(PropertyCheck("identity_columns_present", identity_ok, detail))

    incidence_ok = True
    uniform_ok = True
    inc_detail = uni_detail = None
    edges = inst.params.base_edges
    for i in range(inst.gadget_count):
        ref = inst.provenance[i]
        if not isinstance(ref, GadgetRef):
            incidence_ok = False
            inc_detail = f"column {i} lacks gadget provenance"
            break
        on_left = _layer_side_is_left(ref.layer)
        incident = {
            e
            for e, (v, w) in enumerate(edges)
            if (v if on_left else w) == ref.vertex
        }
        per_block: dict[int, int] = {}
        for c in inst.columns[i].support:
            per_block[c // inst.block_width] = per_block.get(c // inst.block_width, 0) + 1
        if set(per_block) != incident:
            incidence_ok = False
            inc_detail = f"column {i} touches blocks {sorted(per_block)} != {sorted(incident)}"
            break
        if len(set(per_block.values())) > 1:
            uniform_ok = False
            uni_detail = f"column {i} has uneven per-block support sizes"
            break
    checks.append(
        PropertyCheck("gadget_columns_in_incident_blocks", incidence_ok, inc_detail)
    )
    checks.append(PropertyCheck("uniform_block_chunks", uniform_ok, uni_detail))

    if inst.planted_support is not None:
        checks.append(
            PropertyCheck(
                "planted_support_size_k", len(inst.planted_support) == inst.k
            )
        )
    return checks


def verify_report_payload(payload: dict) -> list[PropertyCheck]:
    """Re-run the embedded config and compare the recomputed report."""
    config = ExperimentConfig.from_payload(payload["config"])
    if (
        config.source_kind == "file"
        and config.source_params.get("holds") == "sparse_instance"
    ):
        from .serialize import load_file

        path = config.source_params["path"]
        if file_sha256(path) != config.source_params.get("sha256"):
            return [
                PropertyCheck(
                    "report_reproducible", False, "instance file changed on disk"
                )
            ]
        fresh = solve_sparse_instance(config, load_file(path))
    else:
        _, _, fresh = run_pipeline(config)
    fresh_payload = fresh.to_payload()
    mismatched = [
        key
        for key in fresh_payload
        if key != "checks" and fresh_payload[key] != payload.get(key)
    ]
    checks = [
        PropertyCheck(
            "report_reproducible",
            not mismatched,
            None if not mismatched else f"fields differ: {mismatched}",
        )
    ]
    checks.append(
        PropertyCheck(
            "reported_checks_pass",
            all(ok for _, ok in payload.get("checks", [])),
        )
    )
    return checks
