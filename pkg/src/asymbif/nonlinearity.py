"""Pointwise nonlinearities, their superposition operators and diagnostics.

A ``Nonlinearity`` wraps g(x, s) together with its primitive G (G(x,0)=0),
optional analytic Lipschitz/sup bounds, and the declared asymptotic limits
used by the sign conditions.  The module provides

* the superposition (Nemytskii) operator u -> g(., u(.)),
* the induced functional psi(u) = integral of G(x, u),
* a Lipschitz-constant estimator,
* the sublinearity diagnostic ||N(t u)||/t, and
* the hypothesis report (f1)-(f6) plus the Lipschitz-vs-gap condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, EvaluationError, InvalidSpecError
from .operator import Operator
from .spaces import Space, norm

_DIST_MARGIN = 1e-6

PointwiseLimit = Callable[[np.ndarray], np.ndarray] | float | None


@dataclass(frozen=True)
class Nonlinearity:
    """g(x, s) with primitive, bounds and declared asymptotic data.

    ``sign_mode`` records which sign condition the entry is meant to satisfy:
    'none', 'f5_nonneg' / 'f5_nonpos' (limits of g), or 'f6_nonneg' /
    'f6_nonpos' (limits of g(x,s)*s).
    """

    name: str
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]
    primitive: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    derivative: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    lip_declared: float | None = None
    sup_declared: float | None = None
    limit_plus: PointwiseLimit = None      # g_+(x) = lim_{s->+inf} g(x, s)
    limit_minus: PointwiseLimit = None     # g_-(x)
    product_limit_plus: PointwiseLimit = None    # h_+(x) = lim g(x, s) s
    product_limit_minus: PointwiseLimit = None   # h_-(x)
    sign_mode: str = "none"
    sublinear_declared: bool = False

    def __post_init__(self) -> None:
        allowed = {"none", "f5_nonneg", "f5_nonpos", "f6_nonneg", "f6_nonpos"}
        if self.sign_mode not in allowed:
            raise InvalidSpecError(f"sign_mode must be one of {sorted(allowed)}")


def _limit_values(limit: PointwiseLimit, x: np.ndarray) -> np.ndarray | None:
    if limit is None:
        return None
    if callable(limit):
        return np.asarray(limit(x), dtype=float)
    return np.full(x.shape, float(limit))


def catalog(name: str, **params) -> Nonlinearity:
    """Built-in nonlinearity catalog, referenced by name in scenario files.

    Entries (all x-independent):

    * ``zero``
    * ``linear(eps)``       g = eps*s (unbounded; the non-subtracted case)
    * ``tanh(eps)``         g = eps*tanh(s), limits +-eps
    * ``atan(eps)``         g = eps*atan(s), limits +-eps*pi/2
    * ``gauss_odd(kappa)``  g = -kappa*s*exp(-s^2/2), limits 0
    * ``frac_decay(kappa)`` g = kappa*s/(1+|s|), limits +-kappa
    * ``sat_odd(kappa)``    g = kappa*s*min(1, 1/s^2), g*s -> kappa
    * ``rational_odd(kappa)`` g = kappa*s/(1+s^2)^2, g*s -> 0

    The parameter sign selects the nonnegative or nonpositive sign mode.
    """
    if name == "zero":
        _check_no_extra(name, params)
        return Nonlinearity(
            name="zero",
            g=lambda x, s: np.zeros_like(np.asarray(s, dtype=float)),
            primitive=lambda x, s: np.zeros_like(np.asarray(s, dtype=float)),
            derivative=lambda x, s: np.zeros_like(np.asarray(s, dtype=float)),
            lip_declared=0.0,
            sup_declared=0.0,
        )
    if name == "linear":
        eps = float(params.pop("eps"))
        _check_no_extra(name, params)
        return Nonlinearity(
            name=f"linear(eps={eps})",
            g=lambda x, s, e=eps: e * np.asarray(s, dtype=float),
            primitive=lambda x, s, e=eps: 0.5 * e * np.asarray(s, dtype=float) ** 2,
            derivative=lambda x, s, e=eps: np.full_like(np.asarray(s, dtype=float), e),
            lip_declared=abs(eps),
        )
    if name == "tanh":
        eps = float(params.pop("eps"))
        _check_no_extra(name, params)
        return Nonlinearity(
            name=f"tanh(eps={eps})",
            g=lambda x, s, e=eps: e * np.tanh(s),
            primitive=lambda x, s, e=eps: e * np.logaddexp(s, -s) - e * np.log(2.0),
            derivative=lambda x, s, e=eps: e / np.cosh(s) ** 2,
            lip_declared=abs(eps),
            sup_declared=abs(eps),
            limit_plus=eps,
            limit_minus=-eps,
            sign_mode="f5_nonneg" if eps >= 0 else "f5_nonpos",
        )
    if name == "atan":
        eps = float(params.pop("eps"))
        _check_no_extra(name, params)
        return Nonlinearity(
            name=f"atan(eps={eps})",
            g=lambda x, s, e=eps: e * np.arctan(s),
            primitive=lambda x, s, e=eps: e * (s * np.arctan(s) - 0.5 * np.log1p(s**2)),
            derivative=lambda x, s, e=eps: e / (1.0 + s**2),
            lip_declared=abs(eps),
            sup_declared=abs(eps) * np.pi / 2.0,
            limit_plus=eps * np.pi / 2.0,
            limit_minus=-eps * np.pi / 2.0,
            sign_mode="f5_nonneg" if eps >= 0 else "f5_nonpos",
        )
    if name == "gauss_odd":
        kappa = float(params.pop("kappa"))
        _check_no_extra(name, params)
        return Nonlinearity(
            name=f"gauss_odd(kappa={kappa})",
            g=lambda x, s, k=kappa: -k * s * np.exp(-0.5 * s**2),
            primitive=lambda x, s, k=kappa: k * np.expm1(-0.5 * s**2),
            derivative=lambda x, s, k=kappa: -k * (1.0 - s**2) * np.exp(-0.5 * s**2),
            lip_declared=abs(kappa),
            sup_declared=abs(kappa) * np.exp(-0.5),
            limit_plus=0.0,
            limit_minus=0.0,
            sign_mode="f5_nonneg",
        )
    if name == "frac_decay":
        kappa = float(params.pop("kappa"))
        _check_no_extra(name, params)
        return Nonlinearity(
            name=f"frac_decay(kappa={kappa})",
            g=lambda x, s, k=kappa: k * s / (1.0 + np.abs(s)),
            primitive=lambda x, s, k=kappa: k * (np.abs(s) - np.log1p(np.abs(s))),
            derivative=lambda x, s, k=kappa: k / (1.0 + np.abs(s)) ** 2,
            lip_declared=abs(kappa),
            sup_declared=abs(kappa),
            limit_plus=kappa,
            limit_minus=-kappa,
            sign_mode="f5_nonneg" if kappa >= 0 else "f5_nonpos",
        )
    if name == "sat_odd":
        kappa = float(params.pop("kappa"))
        _check_no_extra(name, params)

        def g_sat(x, s, k=kappa):
            s = np.asarray(s, dtype=float)
            return k * np.where(np.abs(s) <= 1.0, s, 1.0 / np.where(s == 0, 1.0, s))

        def prim_sat(x, s, k=kappa):
            s = np.asarray(s, dtype=float)
            inner = 0.5 * np.minimum(np.abs(s), 1.0) ** 2
            outer = np.where(np.abs(s) > 1.0, np.log(np.maximum(np.abs(s), 1.0)), 0.0)
            return k * (inner + outer)

        def deriv_sat(x, s, k=kappa):
            s = np.asarray(s, dtype=float)
            return k * np.where(np.abs(s) <= 1.0, 1.0, -1.0 / np.where(s == 0, 1.0, s**2))

        return Nonlinearity(
            name=f"sat_odd(kappa={kappa})",
            g=g_sat,
            primitive=prim_sat,
            derivative=deriv_sat,
            lip_declared=abs(kappa),
            sup_declared=abs(kappa),
            limit_plus=0.0,
            limit_minus=0.0,
            product_limit_plus=kappa,
            product_limit_minus=kappa,
            sign_mode="f6_nonneg" if kappa >= 0 else "f6_nonpos",
        )
    if name == "rational_odd":
        kappa = float(params.pop("kappa"))
        _check_no_extra(name, params)
        return Nonlinearity(
            name=f"rational_odd(kappa={kappa})",
            g=lambda x, s, k=kappa: k * s / (1.0 + s**2) ** 2,
            primitive=lambda x, s, k=kappa: 0.5 * k * s**2 / (1.0 + s**2),
            derivative=lambda x, s, k=kappa: k * (1.0 - 3.0 * s**2) / (1.0 + s**2) ** 3,
            lip_declared=abs(kappa),
            sup_declared=abs(kappa) * 3.0 * np.sqrt(3.0) / 16.0,
            limit_plus=0.0,
            limit_minus=0.0,
            product_limit_plus=0.0,
            product_limit_minus=0.0,
            sign_mode="f6_nonneg" if kappa >= 0 else "f6_nonpos",
        )
    raise InvalidSpecError(f"unknown nonlinearity catalog name: {name!r}")


def _check_no_extra(name: str, params: dict) -> None:
    if params:
        raise InvalidSpecError(f"unknown parameters for nonlinearity {name!r}: {sorted(params)}")


def eval_nemytskii(nl: Nonlinearity, space: Space, u: np.ndarray) -> np.ndarray:
    """Componentwise g(x_i, u_i)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (space.dim,):
        raise DomainError(f"u has shape {u.shape}, expected ({space.dim},)")
    out = np.asarray(nl.g(space.x, u), dtype=float)
    bad = ~np.isfinite(out)
    if bad.any():
        i = int(np.argmax(bad))
        raise EvaluationError(f"g produced non-finite value at index {i}", index=i)
    return out


def eval_psi(nl: Nonlinearity, space: Space, u: np.ndarray) -> float:
    """Weighted sum of G(x_i, u_i); the primitive of the superposition map.

    Falls back to adaptive quadrature of g in s (absolute tolerance 1e-10)
    when no closed-form primitive is supplied.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (space.dim,):
        raise DomainError(f"u has shape {u.shape}, expected ({space.dim},)")
    if nl.primitive is not None:
        vals = np.asarray(nl.primitive(space.x, u), dtype=float)
    else:
        vals = np.array(
            [
                quad(lambda s, xi=xi: float(nl.g(np.array([xi]), np.array([s]))[0]),
                     0.0, ui, epsabs=1e-10)[0]
                for xi, ui in zip(space.x, u)
            ]
        )
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise EvaluationError(f"primitive non-finite at index {i}", index=i)
    return space.weight * float(vals.sum())


def lipschitz_constant(
    nl: Nonlinearity,
    s_range: tuple[float, float] = (-1e3, 1e3),
    samples: int = 200_001,
    x: np.ndarray | None = None,
) -> float:
    """Analytic Lipschitz constant when declared, else a derivative-scan estimate.

    The estimate is the max of |dg/ds| by central differences over an s-grid
    (always containing 0) and the probe points x.
    """
    if nl.lip_declared is not None:
        return float(nl.lip_declared)
    if samples < 1000:
        raise DomainError("at least 1000 samples required for the Lipschitz estimate")
    lo, hi = float(s_range[0]), float(s_range[1])
    if not (lo < hi):
        raise DomainError("s_range must be a nonempty interval")
    s = np.linspace(lo, hi, samples)
    if not np.any(s == 0.0):
        s = np.sort(np.append(s, 0.0))
    xs = np.array([0.0]) if x is None else np.asarray(x, dtype=float)
    step = 1e-7 * (1.0 + np.abs(s))
    best = 0.0
    for xi in xs:
        xcol = np.full(s.shape, xi)
        slope = (nl.g(xcol, s + step) - nl.g(xcol, s - step)) / (2.0 * step)
        best = max(best, float(np.abs(slope).max()))
    return best


def hadamard_ratio_diagnostic(
    nl: Nonlinearity, space: Space, u: np.ndarray, t_sequence
) -> list[float]:
    """||N(t u)|| / t along increasing t, for a unit direction u.

    Decay toward 0 is the numeric signature of sublinearity at infinity;
    the caller asserts it.
    """
    u = np.asarray(u, dtype=float)
    if abs(norm(space, u) - 1.0) > 1e-8:
        raise DomainError("u must be a unit vector in the weighted norm")
    ts = [float(t) for t in t_sequence]
    if not ts or any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise DomainError("t_sequence must be positive and strictly increasing")
    return [norm(space, eval_nemytskii(nl, space, t * u)) / t for t in ts]


@dataclass(frozen=True)
class FlagResult:
    status: str  # 'satisfied' | 'violated' | 'not-applicable'
    witness: str


@dataclass(frozen=True)
class DistCondition:
    passed: bool
    lip: float
    dist: float
    margin: float = _DIST_MARGIN


@dataclass(frozen=True)
class HypothesisReport:
    """Sampled verdicts for (f1)-(f6) and the Lipschitz-vs-gap condition."""

    f1: FlagResult
    f2: FlagResult
    f3: FlagResult
    f4: FlagResult
    f5: FlagResult
    f6: FlagResult
    lip_estimate: float
    lip_is_declared: bool
    dist_condition: DistCondition

    def flags(self) -> dict[str, FlagResult]:
        return {"f1": self.f1, "f2": self.f2, "f3": self.f3,
                "f4": self.f4, "f5": self.f5, "f6": self.f6}


def _sample_s(max_abs: float = 1e6) -> np.ndarray:
    mags = np.geomspace(1e-3, max_abs, 61)
    return np.unique(np.concatenate([-mags[::-1], [0.0], mags]))


def hypothesis_report(nl: Nonlinearity, op: Operator, lambda0: float) -> HypothesisReport:
    """Decide (f1)-(f6) by sampled checks against the operator's surrogate.

    Sample sets: s on a symmetric log grid out to 1e6 (plus 0), x on the
    operator's coordinate set.  (f3) is judged through the decay of
    ||N(t u)||/t along t in {10, 1e2, 1e3, 1e4} with u the eigenvector
    nearest lambda0, unless the scenario declares sublinearity outright.
    """
    space = op.space
    x = space.x
    s = _sample_s()
    gvals = np.abs(np.asarray(nl.g(x[:, None], s[None, :]), dtype=float))

    # (f1): finite values with at most linear growth
    if not np.isfinite(gvals).all():
        f1 = FlagResult("violated", "non-finite sample of g")
    else:
        ratio = gvals.max(axis=0) / (1.0 + np.abs(s))
        top, mid = ratio[-1], ratio[np.abs(s) <= 1e3].max()
        if top > 2.0 * max(mid, 1e-300):
            f1 = FlagResult("violated", f"samples grow superlinearly: ratio {top:.3g} at |s|=1e6")
        else:
            f1 = FlagResult("satisfied", f"max |g|/(1+|s|) = {ratio.max():.6g} over samples")

    # (f2): Lipschitz constant, declared or estimated
    lip = lipschitz_constant(nl, x=x if op.kind == "schrodinger1d" else None)
    f2 = FlagResult(
        "satisfied",
        f"Lip = {lip:.6g} ({'declared' if nl.lip_declared is not None else 'estimated'})",
    )

    # (f3): sublinearity at infinity via the ratio diagnostic
    if nl.sublinear_declared:
        f3 = FlagResult("satisfied", "declared by scenario")
    else:
        idx = int(np.argmin(np.abs(op.eigenvalues - lambda0)))
        u = op.eigenvectors[:, idx]
        ratios = hadamard_ratio_diagnostic(nl, space, u, (10.0, 1e2, 1e3, 1e4))
        decreasing = all(b <= a + 1e-12 for a, b in zip(ratios[1:], ratios[2:]))
        if decreasing and ratios[-1] < 1e-2:
            f3 = FlagResult("satisfied", f"||N(t u)||/t fell to {ratios[-1]:.3g} at t=1e4")
        else:
            f3 = FlagResult("violated", f"ratio sequence {['%.3g' % r for r in ratios]}")

    # (f4): uniform bound on |g|
    if nl.sup_declared is not None:
        over = float(gvals.max()) - nl.sup_declared * (1.0 + 1e-12)
        if np.isfinite(gvals).all() and over <= 0.0:
            f4 = FlagResult("satisfied", f"declared sup {nl.sup_declared:.6g} holds on samples")
        else:
            f4 = FlagResult("violated", f"sample exceeds declared sup by {over:.3g}")
    else:
        inner = gvals[:, np.abs(s) <= 1e3].max() if np.isfinite(gvals).all() else np.inf
        outer = gvals.max()
        if np.isfinite(outer) and outer <= inner * (1.0 + 1e-6) + 1e-300:
            f4 = FlagResult("satisfied", f"samples saturate at {outer:.6g}")
        else:
            f4 = FlagResult("violated", f"|g| still growing at |s|=1e6 (max {outer:.3g})")

    f5 = _sign_flag(nl, x, which="f5")
    f6 = _sign_flag(nl, x, which="f6")

    sigma = op.essential_spectrum
    dist = sigma.distance(lambda0) if not sigma.is_empty else float("inf")
    passed = lip <= (1.0 - _DIST_MARGIN) * dist
    return HypothesisReport(
        f1=f1, f2=f2, f3=f3, f4=f4, f5=f5, f6=f6,
        lip_estimate=lip,
        lip_is_declared=nl.lip_declared is not None,
        dist_condition=DistCondition(passed=bool(passed), lip=lip, dist=dist),
    )


def _sign_flag(nl: Nonlinearity, x: np.ndarray, which: str) -> FlagResult:
    """Pointwise sign and non-vanishing checks for (f5) or (f6)."""
    if which == "f5":
        plus, minus = _limit_values(nl.limit_plus, x), _limit_values(nl.limit_minus, x)
        modes = ("f5_nonneg", "f5_nonpos")
    else:
        plus = _limit_values(nl.product_limit_plus, x)
        minus = _limit_values(nl.product_limit_minus, x)
        modes = ("f6_nonneg", "f6_nonpos")
    if plus is None or minus is None or nl.sign_mode not in modes:
        return FlagResult("not-applicable", "limits not declared")
    sign = 1.0 if nl.sign_mode.endswith("nonneg") else -1.0
    if which == "f5":
        ok_sign = np.all(sign * plus >= -1e-14) and np.all(-sign * minus >= -1e-14)
    else:
        ok_sign = np.all(sign * plus >= -1e-14) and np.all(sign * minus >= -1e-14)
        s = _sample_s(1e4)
        prods = sign * np.asarray(nl.g(x[:, None], s[None, :]), dtype=float) * s[None, :]
        if prods.min() < -1e-12:
            return FlagResult("violated", "sampled g(x,s)*s changes sign")
    if not ok_sign:
        return FlagResult("violated", "declared limits break the sign condition on the grid")
    nonvanish = float(np.minimum(np.abs(plus), np.abs(minus)).max())
    if nonvanish <= 0.0:
        return FlagResult("violated", "both limits vanish everywhere on the grid")
    return FlagResult("satisfied", f"limits nonzero (max common magnitude {nonvanish:.6g})")
