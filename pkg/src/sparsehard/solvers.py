"""Sparse-approximation solvers over dense column dictionaries.

Greedy pursuit in two flavors (correlation-maximizing and
residual-minimizing selection), restricted least squares, and an
exhaustive optimal solver used as the ground-truth oracle. Everything
runs in double precision with deterministic tie-breaking by lowest column
index; per-iteration coefficients come from a factorization-based least
squares so traces are reproducible.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DEFAULT_SUPPORT_CAP, BudgetExceededError, DimensionError, ParameterError

__all__ = [
    "LebesgueCheck",
    "SolverResult",
    "TraceStep",
    "brute_force_sparse",
    "lebesgue_check",
    "omp",
    "ols",
    "restricted_least_squares",
]

_STALL_EPS = 1e-13
_DEFAULT_TOL = 1e-12


class TraceStep(NamedTuple):
    column: int
    residual_norm: float
    note: str = ""


@dataclass(frozen=True)
class SolverResult:
    """Selected support, fitted coefficients, and the per-iteration trace."""

    support: tuple[int, ...]
    coefficients: tuple[float, ...]
    residual_norm: float
    trace: tuple[TraceStep, ...]
    problem_shape: tuple[int, int]
    sparsity_budget: int
    fingerprint: str


class LebesgueCheck(NamedTuple):
    passed: bool
    margin: float


def _as_problem(phi: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, str]:
    phi = np.ascontiguousarray(phi, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if phi.ndim != 2:
        raise DimensionError("dictionary must be a 2-d array")
    if y.shape != (phi.shape[0],):
        raise DimensionError(
            f"target of length {y.shape} does not match {phi.shape[0]} rows"
        )
    digest = hashlib.sha256()
    digest.update(str(phi.shape).encode())
    digest.update(phi.tobytes())
    digest.update(y.tobytes())
    return phi, y, digest.hexdigest()[:16]


def _require_unit_columns(phi: np.ndarray) -> None:
    norms = np.linalg.norm(phi, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        worst = int(np.argmax(np.abs(norms - 1.0)))
        raise ParameterError(
            f"column {worst} has norm {norms[worst]:.6g}; pursuit needs unit columns"
        )


def _fit(
    phi: np.ndarray, support: Sequence[int], y: np.ndarray
) -> tuple[np.ndarray, np.ndarray, int]:
    """Least-squares fit on a support: coefficients, residual vector, rank."""
    if not support:
        return np.zeros(0), y.copy(), 0
    cols = phi[:, list(support)]
    coef, _, rank, _ = np.linalg.lstsq(cols, y, rcond=None)
    return coef, y - cols @ coef, int(rank)


def restricted_least_squares(
    phi: np.ndarray, support: Sequence[int], y: np.ndarray
) -> tuple[np.ndarray, float]:
    """Minimum-norm least squares of the target on the chosen columns."""
    phi, y, _ = _as_problem(phi, y)
    n = phi.shape[1]
    for idx in support:
        if not 0 <= idx < n:
            raise ParameterError(f"column index {idx} out of range")
    coef, residual, _ = _fit(phi, support, y)
    return coef, float(np.linalg.norm(residual))


def _validate_budget(n_cols: int, k: int) -> None:
    if k < 1:
        raise ParameterError("sparsity budget must be >= 1")
    if k > n_cols:
        raise ParameterError(f"sparsity budget {k} exceeds {n_cols} columns")


def _warm_start(
    phi: np.ndarray,
    y: np.ndarray,
    k: int,
    initial_support: Sequence[int],
) -> tuple[list[int], list[TraceStep]]:
    selected: list[int] = []
    trace: list[TraceStep] = []
    for idx in initial_support:
        if not 0 <= idx < phi.shape[1]:
            raise ParameterError(f"warm-start column {idx} out of range")
        if idx in selected:
            raise ParameterError("warm-start support repeats a column")
        selected.append(idx)
    if len(selected) > k:
        raise ParameterError("warm-start support exceeds the sparsity budget")
    # prefix fits keep the trace honest for warm-started runs
    for t in range(len(selected)):
        _, residual, rank = _fit(phi, selected[: t + 1], y)
        note = "warm" if rank == t + 1 else "warm,rank_deficient_minnorm"
        trace.append(TraceStep(selected[t], float(np.linalg.norm(residual)), note))
    return selected, trace


def omp(
    phi: np.ndarray,
    y: np.ndarray,
    k: int,
    tol: float = _DEFAULT_TOL,
    *,
    initial_support: Sequence[int] = (),
) -> SolverResult:
    """Greedy pursuit selecting the column most correlated with the
    residual, then refitting by least squares on the grown support.

    Stops at k atoms, when the residual drops to tol, or when every
    remaining column is orthogonal to the residual. Ties go to the lowest
    column index.
    """
    phi, y, tag = _as_problem(phi, y)
    _require_unit_columns(phi)
    _validate_budget(phi.shape[1], k)
    if tol < 0:
        raise ParameterError("tolerance must be non-negative")
    selected, trace = _warm_start(phi, y, k, initial_support)
    coef, residual, _ = _fit(phi, selected, y)
    res_norm = float(np.linalg.norm(residual))
    while len(selected) < k and res_norm > tol:
        corr = np.abs(phi.T @ residual)
        corr[selected] = -1.0
        best = int(np.argmax(corr))
        if corr[best] <= _STALL_EPS * max(1.0, res_norm):
            break  # residual orthogonal to every remaining column
        selected.append(best)
        coef, residual, rank = _fit(phi, selected, y)
        res_norm = float(np.linalg.norm(residual))
        note = "" if rank == len(selected) else "rank_deficient_minnorm"
        trace.append(TraceStep(best, res_norm, note))
    return SolverResult(
        support=tuple(selected),
        coefficients=tuple(float(c) for c in coef),
        residual_norm=res_norm,
        trace=tuple(trace),
        problem_shape=phi.shape,
        sparsity_budget=k,
        fingerprint=tag,
    )


def _normal_residual_sq(
    gram: np.ndarray, proj: np.ndarray, y_sq: float, support: Sequence[int]
) -> float:
    """Residual^2 via normal equations; pinv fallback on singular grams."""
    idx = list(support)
    sub = gram[np.ix_(idx, idx)]
    rhs = proj[idx]
    try:
        coef = np.linalg.solve(sub, rhs)
    except np.linalg.LinAlgError:
        coef = np.linalg.pinv(sub) @ rhs
    return max(y_sq - float(rhs @ coef), 0.0)


def ols(
    phi: np.ndarray,
    y: np.ndarray,
    k: int,
    tol: float = _DEFAULT_TOL,
    *,
    initial_support: Sequence[int] = (),
) -> SolverResult:
    """Greedy pursuit selecting the column whose addition minimizes the
    new least-squares residual; otherwise identical to omp.

    Candidate residuals are ranked through the Gram matrix; the official
    per-iteration refit still runs through the factorization-based least
    squares so traces match omp's conventions. Ties go to the lowest
    column index.
    """
    phi, y, tag = _as_problem(phi, y)
    _require_unit_columns(phi)
    _validate_budget(phi.shape[1], k)
    if tol < 0:
        raise ParameterError("tolerance must be non-negative")
    gram = phi.T @ phi
    proj = phi.T @ y
    y_sq = float(y @ y)
    selected, trace = _warm_start(phi, y, k, initial_support)
    coef, residual, _ = _fit(phi, selected, y)
    res_norm = float(np.linalg.norm(residual))
    while len(selected) < k and res_norm > tol:
        chosen = -1
        chosen_sq = math.inf
        for j in range(phi.shape[1]):
            if j in selected:
                continue
            cand = _normal_residual_sq(gram, proj, y_sq, selected + [j])
            if cand < chosen_sq:
                chosen, chosen_sq = j, cand
        if chosen < 0:
            break
        selected.append(chosen)
        coef, residual, rank = _fit(phi, selected, y)
        res_norm = float(np.linalg.norm(residual))
        note = "" if rank == len(selected) else "rank_deficient_minnorm"
        trace.append(TraceStep(chosen, res_norm, note))
    return SolverResult(
        support=tuple(selected),
        coefficients=tuple(float(c) for c in coef),
        residual_norm=res_norm,
        trace=tuple(trace),
        problem_shape=phi.shape,
        sparsity_budget=k,
        fingerprint=tag,
    )


def brute_force_sparse(
    phi: np.ndarray,
    y: np.ndarray,
    k: int,
    *,
    cap: int = DEFAULT_SUPPORT_CAP,
    nonnegative_indicator: bool = False,
) -> SolverResult:
    """Exact minimizer over every k-column support, lexicographically
    least on ties.

    Refuses with a budget report when C(N, k) exceeds cap. With
    nonnegative_indicator set, supports whose uncovered coordinates
    already prove a worse residual are skipped; the bound is sound for
    any dictionary but only worth computing for indicator columns.
    """
    phi, y, tag = _as_problem(phi, y)
    n = phi.shape[1]
    _validate_budget(n, k)
    total = math.comb(n, k)
    if total > cap:
        raise BudgetExceededError(total, cap, what="support enumeration")
    gram = phi.T @ phi
    proj = phi.T @ y
    y_sq = float(y @ y)
    masks: list[int] | None = None
    min_y_sq = 0.0
    if nonnegative_indicator:
        masks = []
        for j in range(n):
            mask = 0
            for c in np.flatnonzero(phi[:, j]):
                mask |= 1 << int(c)
            masks.append(mask)
        full = (1 << phi.shape[0]) - 1
        min_y_sq = float(np.min(y * y))
    best_sq = math.inf
    best_support: tuple[int, ...] | None = None
    for support in combinations(range(n), k):
        if masks is not None:
            union = 0
            for j in support:
                union |= masks[j]
            uncovered = phi.shape[0] - union.bit_count()
            if uncovered * min_y_sq > best_sq + 1e-12:
                continue
        cand = _normal_residual_sq(gram, proj, y_sq, support)
        if cand < best_sq:
            best_sq = cand
            best_support = support
    assert best_support is not None
    coef, residual, _ = _fit(phi, best_support, y)
    res_norm = float(np.linalg.norm(residual))
    return SolverResult(
        support=best_support,
        coefficients=tuple(float(c) for c in coef),
        residual_norm=res_norm,
        trace=(),
        problem_shape=phi.shape,
        sparsity_budget=k,
        fingerprint=tag,
    )


def lebesgue_check(
    algorithm: SolverResult, oracle: SolverResult, f_k: float
) -> LebesgueCheck:
    """Does the algorithm's residual stay within f_k times the oracle's?

    Passes when residual(alg) <= f_k * residual(oracle) + 1e-9; the margin
    is the slack of that inequality (negative on failure). Both results
    must come from the same dictionary and target.
    """
    if algorithm.fingerprint != oracle.fingerprint:
        raise ParameterError("results were computed on different instances")
    if algorithm.problem_shape != oracle.problem_shape:
        raise ParameterError("results disagree on the problem shape")
    margin = f_k * oracle.residual_norm + 1e-9 - algorithm.residual_norm
    return LebesgueCheck(margin >= 0, margin)
