"""Branch tracing for the full discretized equation under a norm constraint.

Solutions with prescribed norm t are found from the bordered system

    L u - lam u - N(u) = 0,      (||u||^2 - t^2) / 2 = 0,

by damped Newton on (u, lam).  Tracing t upward along a schedule, seeded at
each step by the reduction (u0 = w(lam, t d) + t d), produces the sequence
whose spectral parameters are tested for convergence to the target: that
convergence, with diverging norms, is the computational content of
"bifurcation from infinity".  A direct grid scan of the reduced-map residual
certifies the opposite in scenarios where no branch may enter the window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from .errors import (
    AsymbifError,
    DomainError,
    NoConvergenceError,
    ScanUnsupportedError,
    SingularBorderedSystemError,
)
from .nonlinearity import Nonlinearity, eval_nemytskii
from .operator import Operator
from .reduction import (
    ReductionContext,
    _pointwise_derivative,
    reduced_map_at,
    solve_w,
    solve_w_newton,
)
from .spaces import norm, sup_norm

_RESIDUAL_FACTOR = 1e-9     # BranchPoint residual budget, times (1 + norm)
_NORM_FACTOR = 1e-9         # norm-constraint budget, times target norm
_COND_LIMIT = 1e14


@dataclass(frozen=True)
class BranchPoint:
    """One converged solution of the norm-constrained system."""

    u: np.ndarray
    lam: float
    norm: float
    residual: float
    newton_iterations: int
    w_sup_norm: float | None = None

    def __post_init__(self) -> None:
        self.u.setflags(write=False)


@dataclass(frozen=True)
class Verdict:
    status: str  # 'converged' | 'diverged' | 'inconclusive'
    lambda_limit: float | None = None
    rate_estimate: float | None = None
    detail: str = ""


@dataclass(frozen=True)
class Branch:
    """Solution points of increasing norm along one kernel direction."""

    direction: np.ndarray
    points: tuple[BranchPoint, ...]
    verdict: Verdict
    diagnostics: str | None = None

    def __post_init__(self) -> None:
        self.direction.setflags(write=False)
        norms = [p.norm for p in self.points]
        if any(b <= a for a, b in zip(norms, norms[1:])):
            raise DomainError("branch norms must be strictly increasing")


def newton_constrained(
    op: Operator,
    nl: Nonlinearity,
    guess_u: np.ndarray,
    guess_lambda: float,
    target_norm: float,
    max_iterations: int = 50,
    max_damping: int = 30,
) -> BranchPoint:
    """Damped bordered Newton for (u, lam) at a prescribed norm.

    The Jacobian couples L - lam - diag(dg) with the constraint gradient;
    steps are halved while the combined residual fails to decrease.
    """
    if not (target_norm > 0.0) or not np.all(np.isfinite(guess_u)):
        raise DomainError("target norm must be positive and the guess finite")
    space = op.space
    dim = space.dim
    u = np.asarray(guess_u, dtype=float).copy()
    lam = float(guess_lambda)
    tol = 1e-12 * (1.0 + target_norm)

    def residuals(uv: np.ndarray, lv: float) -> tuple[np.ndarray, float, float]:
        r1 = op.matrix @ uv - lv * uv - eval_nemytskii(nl, space, uv)
        r2 = 0.5 * (norm(space, uv) ** 2 - target_norm**2)
        return r1, r2, float(np.hypot(norm(space, r1), r2))

    r1, r2, merit = residuals(u, lam)
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        if merit <= tol:
            break
        bordered = np.zeros((dim + 1, dim + 1))
        bordered[:dim, :dim] = op.matrix - lam * np.eye(dim)
        bordered[np.arange(dim), np.arange(dim)] -= _pointwise_derivative(nl, space.x, u)
        bordered[:dim, dim] = -u
        bordered[dim, :dim] = space.weight * u
        lu, piv = lu_factor(bordered)
        _check_condition(bordered, lu, piv)
        step = lu_solve((lu, piv), -np.concatenate([r1, [r2]]))
        scale = 1.0
        for _ in range(max_damping):
            u_try = u + scale * step[:dim]
            lam_try = lam + scale * step[dim]
            r1_try, r2_try, merit_try = residuals(u_try, lam_try)
            if merit_try < merit or merit_try <= tol:
                u, lam, r1, r2, merit = u_try, lam_try, r1_try, r2_try, merit_try
                break
            scale *= 0.5
        else:
            raise NoConvergenceError("newton damping exhausted without residual decrease")
    final_norm = norm(space, u)
    res = norm(space, r1)
    if res > _RESIDUAL_FACTOR * (1.0 + final_norm) or abs(final_norm - target_norm) > _NORM_FACTOR * target_norm:
        raise NoConvergenceError(
            f"no convergence after {iterations} iterations "
            f"(residual {res}, norm error {abs(final_norm - target_norm)})"
        )
    return BranchPoint(
        u=u, lam=float(lam), norm=float(final_norm), residual=float(res),
        newton_iterations=iterations - 1,
    )


def _check_condition(matrix: np.ndarray, lu: np.ndarray, piv: np.ndarray) -> None:
    gecon = get_lapack_funcs("gecon", (lu,))
    anorm = float(np.abs(matrix).sum(axis=0).max())
    rcond, _ = gecon(lu, anorm, norm="1")
    if rcond <= 0.0 or 1.0 / rcond > _COND_LIMIT:
        raise SingularBorderedSystemError(
            f"bordered system condition estimate {1.0 / max(rcond, 1e-300):.3g} exceeds {_COND_LIMIT:.3g}"
        )


def trace_branch(
    ctx: ReductionContext,
    op: Operator,
    nl: Nonlinearity,
    direction: np.ndarray,
    norm_schedule,
    lambda0: float = 0.0,
    window: float = 0.05,
    slack: float = 1.05,
    min_points: int = 4,
) -> Branch:
    """Trace the branch seeded by the reduction along increasing norms.

    The spectral-parameter guess for each step is the previous converged
    value (first step: Rayleigh quotient of the direction); the state guess
    is w(lam, t d) + t d with lam clamped into the admissible reduction
    window.  The branch aborts on the first solver failure, leaving the
    verdict inconclusive with diagnostics.
    """
    space = op.space
    direction = np.asarray(direction, dtype=float)
    if abs(norm(space, direction) - 1.0) > 1e-8:
        raise DomainError("direction must be a unit vector")
    schedule = [float(t) for t in norm_schedule]
    if not schedule or schedule[0] < 1.0 or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("norm schedule must be increasing with first entry >= 1")

    delta = ctx.lambda_halfwidth
    lam_prev = float(np.dot(direction, op.matrix @ direction) * space.weight)
    points: list[BranchPoint] = []
    diagnostics = None
    for t in schedule:
        z = t * direction
        try:
            seed = solve_w(ctx, op, nl, float(np.clip(lam_prev, -delta, delta)), z)
            point = newton_constrained(op, nl, seed.w + z, lam_prev, t)
        except AsymbifError as exc:
            diagnostics = f"aborted at target norm {t}: {exc}"
            break
        _check_sup_bound(nl, space, point.u)
        z_part = ctx.split.from_z_coords(ctx.split.z_coords(point.u))
        w_part = point.u - z_part
        points.append(
            BranchPoint(
                u=point.u, lam=point.lam, norm=point.norm, residual=point.residual,
                newton_iterations=point.newton_iterations, w_sup_norm=sup_norm(w_part),
            )
        )
        lam_prev = point.lam
    verdict = verdict_of(points, lambda0, window, min_points, slack)
    if diagnostics is not None:
        verdict = Verdict("inconclusive", None, None, diagnostics)
    return Branch(direction=direction.copy(), points=tuple(points),
                  verdict=verdict, diagnostics=diagnostics)


def _check_sup_bound(nl: Nonlinearity, space, u: np.ndarray) -> None:
    # (f4) echo: branch iterates may not push |g| past its declared bound
    if nl.sign_mode != "none" and nl.sup_declared is not None:
        worst = sup_norm(eval_nemytskii(nl, space, u))
        if worst > nl.sup_declared * (1.0 + 1e-12):
            raise DomainError(
                f"|g| = {worst} exceeds the declared bound {nl.sup_declared} along the branch"
            )


def verdict_of(
    branch_or_points,
    lambda0: float,
    window: float,
    min_points: int = 4,
    slack: float = 1.05,
) -> Verdict:
    """Judge a traced branch: do the spectral parameters settle at the target?

    converged: the last ``min_points`` errors |lam - lambda0| are
    non-increasing up to the slack factor and the final error is inside the
    window.  diverged: they are non-decreasing (same slack) and end outside.
    Anything else, or too few points, is inconclusive.  The rate estimate is
    the log-log slope of error against norm (None when degenerate).
    """
    points = branch_or_points.points if isinstance(branch_or_points, Branch) else branch_or_points
    if len(points) < min_points:
        return Verdict("inconclusive", None, None, f"fewer than {min_points} points")
    errors = np.array([abs(p.lam - lambda0) for p in points])
    norms = np.array([p.norm for p in points])
    tail = errors[-min_points:]
    non_increasing = all(b <= slack * a for a, b in zip(tail, tail[1:]))
    non_decreasing = all(slack * b >= a for a, b in zip(tail, tail[1:]))
    rate = _rate_estimate(norms, errors)
    lam_final = float(points[-1].lam)
    if non_increasing and tail[-1] < window:
        return Verdict("converged", lam_final, rate, "errors shrink into the window")
    if non_decreasing and tail[-1] >= window:
        return Verdict("diverged", lam_final, rate, "diverged-from-window")
    return Verdict("inconclusive", lam_final, rate, "error sequence is not monotone")


def _rate_estimate(norms: np.ndarray, errors: np.ndarray) -> float | None:
    if np.any(errors <= 0.0):
        return None
    logn, loge = np.log(norms), np.log(errors)
    var = float(np.var(logn))
    if var == 0.0:
        return None
    return float(np.polyfit(logn, loge, 1)[0])


@dataclass(frozen=True)
class ScanReport:
    """Minimum reduced-map residual over a (lam, +-t) grid."""

    min_residual: float
    min_scaled_residual: float     # min over the grid of ||F|| / t
    argmin_lambda: float
    argmin_norm: float             # signed: the scan covers both +t d and -t d
    lambda_window: tuple[float, float]
    norm_range: tuple[float, float]
    n_lambda: int
    n_norm: int
    method: str                    # 'banach' | 'newton'
    floor: float | None = None
    passed: bool | None = None
    note: str = ""


def zero_exclusion_scan(
    ctx: ReductionContext,
    op: Operator,
    nl: Nonlinearity,
    lambda_window: tuple[float, float],
    norm_range: tuple[float, float],
    grid_density: tuple[int, int] = (17, 17),
    floor: float | None = None,
) -> ScanReport:
    """Scan ||F_lam(+-t d)|| over a window; a positive minimum excludes zeros.

    Requires a one-dimensional kernel band.  When the contraction
    certificate holds the W-solves use the Banach iteration; otherwise the
    residual-checked Newton solver takes over (that is the regime where the
    scan earns its keep: the contraction hypothesis itself has failed).
    """
    split = ctx.split
    if split.dim_z != 1:
        raise ScanUnsupportedError(f"scan needs dim Z = 1, got {split.dim_z}")
    lo, hi = float(lambda_window[0]), float(lambda_window[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise DomainError("lambda window must be a finite nonempty interval")
    note = ""
    delta = ctx.lambda_halfwidth
    if lo < -delta or hi > delta:
        lo, hi = max(lo, -delta), min(hi, delta)
        note = f"lambda window clamped to [-delta, delta] = [{-delta}, {delta}]"
    t_lo, t_hi = float(norm_range[0]), float(norm_range[1])
    if not (0.0 < t_lo < t_hi):
        raise DomainError("norm range must be positive and increasing")
    n_lambda, n_norm = int(grid_density[0]), int(grid_density[1])
    lams = np.linspace(lo, hi, n_lambda)
    ts = np.geomspace(t_lo, t_hi, n_norm)
    direction = split.z_basis[:, 0]
    use_banach = ctx.feasible

    best = (np.inf, np.nan, np.nan)
    best_scaled = np.inf
    for sign in (+1.0, -1.0):
        w_carry = np.zeros(split.space.dim)
        for t in ts:
            z = sign * t * direction
            for lam in lams:
                if use_banach:
                    point = solve_w(ctx, op, nl, float(lam), z)
                else:
                    point = solve_w_newton(split, op, nl, float(lam), z, w0=w_carry)
                w_carry = point.w
                res = float(np.linalg.norm(reduced_map_at(split, nl, float(lam), z, point.w)))
                if res < best[0]:
                    best = (res, float(lam), float(sign * t))
                best_scaled = min(best_scaled, float(res / t))
    passed = None if floor is None else bool(best[0] > floor)
    return ScanReport(
        min_residual=best[0],
        min_scaled_residual=best_scaled,
        argmin_lambda=best[1],
        argmin_norm=best[2],
        lambda_window=(lo, hi),
        norm_range=(t_lo, t_hi),
        n_lambda=n_lambda,
        n_norm=n_norm,
        method="banach" if use_banach else "newton",
        floor=floor,
        passed=passed,
        note=note,
    )
