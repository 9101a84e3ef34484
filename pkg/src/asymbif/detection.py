"""Bifurcation witnesses: degree parity, Morse-index jump, sign conditions.

The reduced map is asymptotically linear with linearization (L - lam)|_Z, so
its degree on large balls is (-1)^(number of negative eigenvalues of
(L - lam)|_Z).  Crossing the kernel band flips that count by the band
dimension: an odd band forces a degree jump, an even band still separates
the critical groups through the Morse indices, provided a compactness
condition certified here by the integral sign tests on the declared limits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import DegenerateLinearizationError, DomainError
from .nonlinearity import Nonlinearity, _limit_values
from .operator import SpectralSplit
from .spaces import Space

_DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class DegreeReport:
    """Degree of the reduced map at one spectral parameter."""

    lam: float
    negative_count: int
    degree: int
    valid_radius_note: str

    def __post_init__(self) -> None:
        assert self.degree == (-1) ** self.negative_count


@dataclass(frozen=True)
class LandesmanLazerResult:
    """Outcome of an integral sign test over sampled kernel directions."""

    status: str  # 'pass' | 'fail' | 'not-applicable'
    extremal_integral: float | None
    mode: str    # 'nonneg' | 'nonpos' | 'none'
    n_samples: int
    detail: str = ""


@dataclass(frozen=True)
class WitnessReport:
    """Combined bifurcation witnesses across the kernel band."""

    kernel_dim: int
    parity_jump: bool
    morse_plus: int    # Morse index of the quadratic part at +delta
    morse_minus: int   # ... at -delta
    critical_groups_differ: bool
    ll_f5: LandesmanLazerResult
    ll_f6: LandesmanLazerResult
    verdict: str  # 'bifurcation-certified' | 'even-multiplicity-certified' | 'no-witness'

    def __post_init__(self) -> None:
        assert self.parity_jump == (self.kernel_dim % 2 == 1)
        assert self.morse_plus == self.morse_minus + self.kernel_dim
        assert self.critical_groups_differ == (self.morse_plus != self.morse_minus)


def degree_at(split: SpectralSplit, lam: float) -> DegreeReport:
    """Count kernel-band eigenvalues below lam; the degree is their parity."""
    gaps = split.z_eigenvalues - lam
    if float(np.min(np.abs(gaps))) < _DEGENERACY_TOL:
        raise DegenerateLinearizationError(
            f"lam={lam} coincides with a kernel-band eigenvalue"
        )
    count = int(np.sum(gaps < 0.0))
    return DegreeReport(
        lam=float(lam),
        negative_count=count,
        degree=(-1) ** count,
        valid_radius_note=(
            "degree of the linearization at infinity; valid on balls large "
            "enough that the sublinear remainder cannot produce zeros outside"
        ),
    )


_NA = LandesmanLazerResult("not-applicable", None, "none", 0)


def parity_and_morse(
    split: SpectralSplit,
    delta: float,
    ll_f5: LandesmanLazerResult = _NA,
    ll_f6: LandesmanLazerResult = _NA,
) -> WitnessReport:
    """Degree/Morse bookkeeping across [-delta, +delta].

    kernel_dim counts band eigenvalues crossed between the two probes, so
    morse_plus - morse_minus = kernel_dim holds identically.  The verdict is
    'bifurcation-certified' on a parity jump; with an even crossing it is
    'even-multiplicity-certified' when the Morse indices differ and one of
    the integral sign tests passes.
    """
    if not (0.0 < delta < split.gap):
        raise DomainError(f"delta must lie in (0, {split.gap}), got {delta}")
    plus = degree_at(split, +delta)
    minus = degree_at(split, -delta)
    kernel_dim = int(np.sum(np.abs(split.z_eigenvalues) < delta))
    parity_jump = kernel_dim % 2 == 1
    differ = plus.negative_count != minus.negative_count
    if parity_jump:
        verdict = "bifurcation-certified"
    elif differ and ("pass" in (ll_f5.status, ll_f6.status)):
        verdict = "even-multiplicity-certified"
    else:
        verdict = "no-witness"
    return WitnessReport(
        kernel_dim=kernel_dim,
        parity_jump=parity_jump,
        morse_plus=plus.negative_count,
        morse_minus=minus.negative_count,
        critical_groups_differ=differ,
        ll_f5=ll_f5,
        ll_f6=ll_f6,
        verdict=verdict,
    )


def sample_kernel_sphere(dim: int, n_samples: int | None = None, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy unit directions in the kernel band.

    Returns rows of unit coefficient vectors.  Dimension 1 reduces to the
    two exact endpoints; higher dimensions use a seeded Sobol sequence
    mapped through the normal quantile plus the signed coordinate axes.
    """
    if dim < 1:
        raise DomainError("kernel dimension must be >= 1")
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    n = 2 * dim * dim + 64 if n_samples is None else int(n_samples)
    sob = qmc.Sobol(d=dim, scramble=True, seed=seed)
    raw = sob.random_base2(int(np.ceil(np.log2(max(n, 2)))))[:n]
    gauss = ndtri(np.clip(raw, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(gauss, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    dirs = gauss / norms
    axes = np.concatenate([np.eye(dim), -np.eye(dim)])
    return np.concatenate([axes, dirs])


def landesman_lazer_f5(
    nl: Nonlinearity,
    space: Space,
    kernel_basis: np.ndarray,
    sphere_samples: int | None = None,
    seed: int = 0,
) -> LandesmanLazerResult:
    """Integral sign test on the declared limits of g against kernel directions.

    For each sampled unit kernel direction v, computes

        I(v) = sum_{v > 0} g_plus(x) v(x) + sum_{v < 0} g_minus(x) v(x)

    with quadrature weights.  Nonnegative mode passes when min I > 0,
    nonpositive mode when max I < 0.
    """
    gp = _limit_values(nl.limit_plus, space.x)
    gm = _limit_values(nl.limit_minus, space.x)
    if gp is None or gm is None:
        return LandesmanLazerResult("not-applicable", None, "none", 0, "limits not declared")
    mode = "nonpos" if nl.sign_mode == "f5_nonpos" else "nonneg"
    vals = _direction_integrals(space, kernel_basis, sphere_samples, seed, gp, gm, weight_by_v=True)
    return _judge(vals, mode)


def sign_condition_f6(
    nl: Nonlinearity,
    space: Space,
    kernel_basis: np.ndarray,
    sphere_samples: int | None = None,
    seed: int = 0,
) -> LandesmanLazerResult:
    """Integral sign test on the declared limits of g(x,s)*s.

    The integrand carries no direction weight: only the sign pattern of the
    sampled kernel direction selects which limit enters where.
    """
    hp = _limit_values(nl.product_limit_plus, space.x)
    hm = _limit_values(nl.product_limit_minus, space.x)
    if hp is None or hm is None:
        return LandesmanLazerResult("not-applicable", None, "none", 0, "limits not declared")
    mode = "nonpos" if nl.sign_mode == "f6_nonpos" else "nonneg"
    vals = _direction_integrals(space, kernel_basis, sphere_samples, seed, hp, hm, weight_by_v=False)
    return _judge(vals, mode)


def _direction_integrals(
    space: Space,
    kernel_basis: np.ndarray,
    sphere_samples: int | None,
    seed: int,
    limit_plus: np.ndarray,
    limit_minus: np.ndarray,
    weight_by_v: bool,
) -> np.ndarray:
    basis = np.atleast_2d(np.asarray(kernel_basis, dtype=float))
    if basis.shape[0] != space.dim:
        basis = basis.T
    if basis.shape[0] != space.dim:
        raise DomainError("kernel basis shape does not match the space")
    dirs = sample_kernel_sphere(basis.shape[1], sphere_samples, seed)
    out = np.empty(dirs.shape[0])
    for i, c in enumerate(dirs):
        v = basis @ c
        pos, neg = v > 0.0, v < 0.0
        if weight_by_v:
            val = limit_plus[pos] @ v[pos] + limit_minus[neg] @ v[neg]
        else:
            val = limit_plus[pos].sum() + limit_minus[neg].sum()
        out[i] = space.weight * val
    return out


def _judge(vals: np.ndarray, mode: str) -> LandesmanLazerResult:
    if mode == "nonneg":
        extremal = float(vals.min())
        status = "pass" if extremal > 0.0 else "fail"
    else:
        extremal = float(vals.max())
        status = "pass" if extremal < 0.0 else "fail"
    return LandesmanLazerResult(
        status=status,
        extremal_integral=extremal,
        mode=mode,
        n_samples=int(vals.size),
        detail=f"{'min' if mode == 'nonneg' else 'max'} integral over sampled directions",
    )
