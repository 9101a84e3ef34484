"""Finite-dimensional reduction near infinity by certified fixed-point solves.

Given a spectral split E = Z + W with the target eigenvalue moved to 0, the
W-component of the equation L u = lam u + N(u) is solved for w = w(lam, z)
by Banach iteration of

    w  <-  (L - lam |_W)^(-1) P N(w + z),

whose contraction factor k = beta / (gap - delta) is certified up front from
the nonlinearity's Lipschitz bound beta.  What remains is the map on Z

    F_lam(z) = L z - lam z - (I - P) N(w(lam, z) + z),

which is simultaneously the gradient of the reduced energy value, so zeros
of F_lam correspond exactly to solutions of the full equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import (
    ContractionInfeasibleError,
    ContractionViolationError,
    DegenerateProbeError,
    DomainError,
    MaxIterationsError,
    NoConvergenceError,
)
from .nonlinearity import Nonlinearity, eval_nemytskii, eval_psi
from .operator import Operator, SpectralSplit, inverse_on_w
from .spaces import inner, norm

_RATE_SLACK = 1e-8
_ORTHO_TOL = 1e-10
_EQ_RESIDUAL_FACTOR = 1e-10  # W-equation residual target, times (1 + ||z||)


@dataclass(frozen=True)
class ReductionContext:
    """Certified contraction data for one splitting.

    ``lambda_halfwidth`` (delta) bounds the admissible spectral parameter;
    ``contraction_factor`` (k) bounds every Banach iteration step;
    ``z_to_w_lipschitz`` = k/(1-k) bounds ||w(lam,z) - w(lam,z')||/||z - z'||;
    ``graph_lipschitz`` = beta/(1-k) is the same bound through the operator.
    ``min_z_norm`` is 0 here: with a globally Lipschitz nonlinearity the
    reduction is defined on all of Z, no outer cutoff needed.
    """

    split: SpectralSplit
    lipschitz: float           # beta, global Lipschitz bound of the nonlinearity
    safety: float
    lambda_halfwidth: float    # delta
    contraction_factor: float  # k
    min_z_norm: float = 0.0    # R
    feasible: bool = True

    @property
    def z_to_w_lipschitz(self) -> float:
        k = self.contraction_factor
        return k / (1.0 - k) if k < 1.0 else float("inf")

    @property
    def graph_lipschitz(self) -> float:
        k = self.contraction_factor
        return self.lipschitz / (1.0 - k) if k < 1.0 else float("inf")

    def default_max_iterations(self) -> int:
        k = self.contraction_factor
        if k <= 0.0:
            return 8
        return 10 * math.ceil(-16.0 / math.log10(k)) if k < 1.0 else 200


@dataclass(frozen=True)
class ReducedPoint:
    """One certified W-solve: w with its fixed-point residual."""

    lam: float
    z: np.ndarray
    w: np.ndarray
    fixed_point_residual: float
    iterations: int
    max_contraction_ratio: float | None = None


def configure(
    split: SpectralSplit,
    lipschitz: float,
    safety: float = 0.5,
    allow_infeasible: bool = False,
) -> ReductionContext:
    """Choose delta and certify the contraction factor for the split.

    delta = safety * (gap - beta) where gap = dist(0, excluded spectrum);
    then k = beta / (gap - delta) < 1 whenever beta * w_inverse_bound < 1.

    With ``allow_infeasible`` the context is still produced when the
    certificate fails (k >= 1, delta = safety * gap); only the residual-
    checked Newton path of the zero-exclusion scan accepts such a context.
    """
    beta = float(lipschitz)
    if beta < 0 or not np.isfinite(beta):
        raise DomainError(f"lipschitz bound must be finite and >= 0, got {beta}")
    if not (0.0 < safety < 1.0):
        raise DomainError(f"safety must lie in (0, 1), got {safety}")
    gap = split.gap
    feasible = beta * split.w_inverse_bound < 1.0
    if not feasible and not allow_infeasible:
        raise ContractionInfeasibleError(beta, split.w_inverse_bound)
    if not np.isfinite(gap):
        return ReductionContext(split, beta, safety, float("inf"), 0.0, feasible=True)
    delta = safety * ((gap - beta) if feasible else gap)
    k = beta / (gap - delta)
    if feasible and not k < 1.0:
        raise ContractionInfeasibleError(beta, split.w_inverse_bound)
    return ReductionContext(split, beta, safety, delta, k, feasible=feasible)


def _check_point(ctx: ReductionContext, lam: float, z: np.ndarray) -> None:
    if abs(lam) > ctx.lambda_halfwidth * (1.0 + 1e-12):
        raise DomainError(f"|lam| = {abs(lam)} exceeds delta = {ctx.lambda_halfwidth}")
    zn = norm(ctx.split.space, z)
    if zn < ctx.min_z_norm:
        raise DomainError(f"||z|| = {zn} below the admissible radius {ctx.min_z_norm}")
    in_w = ctx.split.project_w(z)
    if norm(ctx.split.space, in_w) > 1e-8 * (1.0 + zn):
        raise DomainError("z is not in the span of the kernel band")


def solve_w(
    ctx: ReductionContext,
    op: Operator,
    nl: Nonlinearity,
    lam: float,
    z: np.ndarray,
    tol_w: float | None = None,
    max_iterations: int | None = None,
) -> ReducedPoint:
    """Banach iteration for the W-equation, with a certified stopping rule.

    Stops once the a-posteriori bound k/(1-k) * ||w_m - w_{m-1}|| meets the
    tolerance (default 1e-11 * (1 + ||z||)) and the W-equation residual
    bound beta * ||w_m - w_{m-1}|| is below its own target.  Every step is
    checked against the certified contraction factor.
    """
    if not ctx.feasible:
        raise ContractionInfeasibleError(ctx.lipschitz, ctx.split.w_inverse_bound)
    _check_point(ctx, lam, z)
    split = ctx.split
    space = split.space
    zn = norm(space, z)
    tol = 1e-11 * (1.0 + zn) if tol_w is None else float(tol_w)
    eq_tol = _EQ_RESIDUAL_FACTOR * (1.0 + zn)
    budget = ctx.default_max_iterations() if max_iterations is None else int(max_iterations)
    k = ctx.contraction_factor
    post_factor = k / (1.0 - k) if k > 0.0 else 0.0

    w = np.zeros(space.dim)
    prev_step = None
    max_ratio = None
    iterations = 0
    for iterations in range(1, budget + 1):
        w_next = inverse_on_w(split, op, lam, eval_nemytskii(nl, space, w + z))
        step = norm(space, w_next - w)
        w = w_next
        if prev_step is not None and step > 1e-15 * (1.0 + zn):
            ratio = step / prev_step if prev_step > 0 else 0.0
            if ratio > k + _RATE_SLACK:
                raise ContractionViolationError(
                    f"iterate contraction {ratio} exceeds certified k = {k}"
                )
            max_ratio = ratio if max_ratio is None else max(max_ratio, ratio)
        prev_step = step
        if post_factor * step <= tol and ctx.lipschitz * step <= eq_tol:
            break
    else:
        raise MaxIterationsError(
            f"no convergence within {budget} iterations (k = {k}, last step {prev_step})"
        )

    residual = norm(space, w - inverse_on_w(split, op, lam, eval_nemytskii(nl, space, w + z)))
    if residual > tol:
        raise MaxIterationsError(f"final fixed-point residual {residual} above {tol}")
    # w must live in W: the iteration only ever produces W-vectors
    assert norm(space, w - split.project_w(w)) <= _ORTHO_TOL * (1.0 + norm(space, w))
    return ReducedPoint(
        lam=float(lam), z=np.asarray(z, dtype=float), w=w,
        fixed_point_residual=residual, iterations=iterations,
        max_contraction_ratio=max_ratio,
    )


def reduced_map_at(
    split: SpectralSplit, nl: Nonlinearity, lam: float, z: np.ndarray, w: np.ndarray
) -> np.ndarray:
    """F_lam(z) in kernel-band coordinates, for an already computed w."""
    space = split.space
    n_of_u = eval_nemytskii(nl, space, w + z)
    coords = split.z_coords(z)
    return (split.z_eigenvalues - lam) * coords - split.z_coords(n_of_u)


def reduced_map(
    ctx: ReductionContext, op: Operator, nl: Nonlinearity, lam: float, z: np.ndarray
) -> np.ndarray:
    """The finite-dimensional map whose zeros are solutions; equals the
    gradient of ``reduced_value`` in the kernel-band coordinates."""
    point = solve_w(ctx, op, nl, lam, z)
    return reduced_map_at(ctx.split, nl, lam, z, point.w)


def reduced_value(
    ctx: ReductionContext, op: Operator, nl: Nonlinearity, lam: float, z: np.ndarray
) -> float:
    """Energy value 0.5 <(L - lam) u, u> - psi(u) along the reduction."""
    point = solve_w(ctx, op, nl, lam, z)
    u = point.w + z
    space = ctx.split.space
    quad = 0.5 * (inner(space, op.apply(u), u) - lam * inner(space, u, u))
    return quad - eval_psi(nl, space, u)


def lipschitz_probe(
    ctx: ReductionContext,
    op: Operator,
    nl: Nonlinearity,
    lam: float,
    z: np.ndarray,
    z_other: np.ndarray,
) -> float:
    """||w(lam,z) - w(lam,z')|| / ||z - z'||; bounded by k/(1-k)."""
    space = ctx.split.space
    dz = norm(space, np.asarray(z, float) - np.asarray(z_other, float))
    if dz == 0.0:
        raise DegenerateProbeError("probe points coincide")
    wa = solve_w(ctx, op, nl, lam, z).w
    wb = solve_w(ctx, op, nl, lam, z_other).w
    return norm(space, wa - wb) / dz


def solve_w_newton(
    split: SpectralSplit,
    op: Operator,
    nl: Nonlinearity,
    lam: float,
    z: np.ndarray,
    w0: np.ndarray | None = None,
    tol: float | None = None,
    max_iterations: int = 60,
) -> ReducedPoint:
    """Damped Newton solve of the W-equation (L - lam) w = P N(w + z).

    Used where the Banach certificate is unavailable (Lipschitz bound at or
    above the spectral gap), chiefly by the zero-exclusion scan.  The result
    is certified a posteriori through the equation residual alone; no
    uniqueness claim is attached.
    """
    space = split.space
    dim = space.dim
    zn = norm(space, z)
    tol_eq = _EQ_RESIDUAL_FACTOR * (1.0 + zn) if tol is None else float(tol)
    w = np.zeros(dim) if w0 is None else np.asarray(w0, dtype=float).copy()
    k_z = split.dim_z
    ident = np.eye(dim)

    def residual(wv: np.ndarray) -> np.ndarray:
        return op.matrix @ wv - lam * wv - split.project_w(eval_nemytskii(nl, space, wv + z))

    r = residual(w)
    rn = norm(space, r)
    for it in range(1, max_iterations + 1):
        if rn <= tol_eq:
            fp = norm(space, w - inverse_on_w(split, op, lam, eval_nemytskii(nl, space, w + z)))
            return ReducedPoint(float(lam), np.asarray(z, float), w, fp, it - 1)
        u = w + z
        dvals = _pointwise_derivative(nl, space.x, u)
        zT_d = split.z_basis.T * dvals  # rows of Z^T scaled by the diagonal of dg
        p_jac = np.diag(dvals) - split.z_basis @ (space.weight * zT_d)
        bordered = np.zeros((dim + k_z, dim + k_z))
        bordered[:dim, :dim] = op.matrix - lam * ident - p_jac
        bordered[:dim, dim:] = split.z_basis
        bordered[dim:, :dim] = space.weight * split.z_basis.T
        rhs = np.concatenate([-r, np.zeros(k_z)])
        lu = lu_factor(bordered)
        delta = lu_solve(lu, rhs)[:dim]
        scale = 1.0
        for _ in range(30):
            w_try = w + scale * delta
            r_try = residual(w_try)
            rn_try = norm(space, r_try)
            if rn_try < rn or rn_try <= tol_eq:
                w, r, rn = w_try, r_try, rn_try
                break
            scale *= 0.5
        else:
            raise NoConvergenceError("damping failed to reduce the W-equation residual")
    if rn <= tol_eq:
        fp = norm(space, w - inverse_on_w(split, op, lam, eval_nemytskii(nl, space, w + z)))
        return ReducedPoint(float(lam), np.asarray(z, float), w, fp, max_iterations)
    raise NoConvergenceError(
        f"W-equation Newton residual {rn} above {tol_eq} after {max_iterations} iterations"
    )


def _pointwise_derivative(nl: Nonlinearity, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """d g / d s at (x, u): declared formula or central differences."""
    if nl.derivative is not None:
        return np.asarray(nl.derivative(x, u), dtype=float)
    step = 1e-6 * (1.0 + np.abs(u))
    return (nl.g(x, u + step) - nl.g(x, u - step)) / (2.0 * step)
