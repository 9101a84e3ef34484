"""Selfadjoint operator surrogates, spectra and invariant splittings.

Builds finite-dimensional stand-ins for a Schrodinger operator
-u'' + V0(x) u (1D central differences, Dirichlet walls) or synthetic
diagonal operators, together with

* a declared essential-spectrum surrogate (a finite matrix has none, so the
  surrogate is part of the model, not derived from it),
* the splitting of the space into a finite kernel band Z and its invariant
  complement W, and
* the restricted inverse on W used by the reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal

from .errors import (
    BandTooWideError,
    EmptyKernelBandError,
    InvalidPotentialError,
    InvalidSpecError,
    NearSingularError,
    NotFredholmError,
)
from .spaces import Grid, IndexSpace, Space

_SYMMETRY_RTOL = 1e-12
_ORTHO_TOL = 1e-10
_RESIDUAL_RTOL = 1e-8
_NEAR_SINGULAR_TOL = 1e-10


@dataclass(frozen=True)
class EssentialSpectrum:
    """Declared essential-spectrum surrogate.

    One of: a half line [edge, +inf), a finite set of points, or empty.
    """

    kind: str  # 'interval' | 'finite' | 'empty'
    edge: float | None = None
    values: tuple[float, ...] = ()

    @staticmethod
    def interval(edge: float) -> "EssentialSpectrum":
        if not np.isfinite(edge):
            raise InvalidSpecError(f"interval edge must be finite, got {edge}")
        return EssentialSpectrum("interval", edge=float(edge))

    @staticmethod
    def finite(values) -> "EssentialSpectrum":
        vals = tuple(sorted(float(v) for v in values))
        if not vals:
            raise InvalidSpecError("finite essential-spectrum surrogate needs values")
        if not all(np.isfinite(v) for v in vals):
            raise InvalidSpecError(f"non-finite surrogate values: {vals}")
        return EssentialSpectrum("finite", values=vals)

    @staticmethod
    def empty() -> "EssentialSpectrum":
        return EssentialSpectrum("empty")

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    def distance(self, lam: float) -> float:
        """dist(lam, surrogate); +inf when the surrogate is empty."""
        if self.kind == "empty":
            return float("inf")
        if self.kind == "interval":
            return max(self.edge - lam, 0.0)
        return min(abs(lam - v) for v in self.values)

    def describe(self) -> str:
        if self.kind == "empty":
            return "empty"
        if self.kind == "interval":
            return f"[{self.edge}, inf)"
        return "{" + ", ".join(repr(v) for v in self.values) + "}"


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PotentialSpec:
    """Pointwise potential data V, m and the background V0 = V - m."""

    V: Callable[[np.ndarray], np.ndarray]
    m: Callable[[np.ndarray], np.ndarray] = _zero
    v0_at_infinity: float = 0.0
    name: str = "custom"

    def __post_init__(self) -> None:
        if not np.isfinite(self.v0_at_infinity):
            raise InvalidSpecError("v0_at_infinity must be finite")

    def v0(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.V(x), dtype=float) - np.asarray(self.m(x), dtype=float)


def potential_catalog(name: str, **params) -> PotentialSpec:
    """Built-in potentials referenced by name in scenario files."""
    if name == "poschl_teller":
        depth = float(params.pop("depth"))
        _check_no_extra(name, params)
        return PotentialSpec(
            V=lambda x, d=depth: -d / np.cosh(x) ** 2,
            v0_at_infinity=0.0,
            name=f"poschl_teller(depth={depth})",
        )
    if name == "gaussian_well":
        depth = float(params.pop("depth"))
        width = float(params.pop("width"))
        _check_no_extra(name, params)
        if width <= 0:
            raise InvalidSpecError("gaussian_well width must be positive")
        return PotentialSpec(
            V=lambda x, d=depth, w=width: -d * np.exp(-(x**2) / (2.0 * w**2)),
            v0_at_infinity=0.0,
            name=f"gaussian_well(depth={depth},width={width})",
        )
    if name == "constant":
        c = float(params.pop("c"))
        _check_no_extra(name, params)
        return PotentialSpec(
            V=lambda x, c=c: np.full_like(np.asarray(x, dtype=float), c),
            v0_at_infinity=c,
            name=f"constant(c={c})",
        )
    raise InvalidSpecError(f"unknown potential catalog name: {name!r}")


def sampled_potential(x_samples, v0_samples, v0_at_infinity: float) -> PotentialSpec:
    """Potential given by samples; evaluated elsewhere by linear interpolation."""
    xs = np.asarray(x_samples, dtype=float)
    vs = np.asarray(v0_samples, dtype=float)
    if xs.shape != vs.shape or xs.ndim != 1 or xs.size < 2:
        raise InvalidSpecError("sampled potential needs matching 1D x and value arrays")
    if not np.all(np.isfinite(vs)):
        raise InvalidPotentialError("sampled potential contains non-finite values")
    return PotentialSpec(
        V=lambda x: np.interp(x, xs, vs, left=vs[0], right=vs[-1]),
        v0_at_infinity=float(v0_at_infinity),
        name="sampled",
    )


def _check_no_extra(name: str, params: dict) -> None:
    if params:
        raise InvalidSpecError(f"unknown parameters for potential {name!r}: {sorted(params)}")


@dataclass(frozen=True)
class Operator:
    """Selfadjoint operator with full eigen-data and a declared surrogate.

    Eigenvectors are columns, orthonormal in the weighted inner product of
    ``space``; eigenvalues ascend.  Construction validates symmetry,
    orthonormality and eigen-residuals.
    """

    kind: str  # 'schrodinger1d' | 'synthetic'
    space: Space
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    essential_spectrum: EssentialSpectrum
    shift: float = 0.0

    def __post_init__(self) -> None:
        a = self.matrix
        scale = float(np.abs(a).max()) or 1.0
        if float(np.abs(a - a.T).max()) > _SYMMETRY_RTOL * scale:
            raise InvalidSpecError("operator matrix is not symmetric")
        w = self.space.weight
        gram = w * (self.eigenvectors.T @ self.eigenvectors)
        if float(np.abs(gram - np.eye(gram.shape[0])).max()) > _ORTHO_TOL:
            raise InvalidSpecError("eigenvectors are not weight-orthonormal")
        op_norm = float(np.abs(self.eigenvalues).max()) or 1.0
        res = a @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        worst = np.sqrt(w) * float(np.linalg.norm(res, axis=0).max())
        if worst > _RESIDUAL_RTOL * op_norm:
            raise InvalidSpecError(f"eigen-residual {worst} exceeds {_RESIDUAL_RTOL * op_norm}")
        for arr in (self.matrix, self.eigenvalues, self.eigenvectors):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.space.dim

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u


def _canonical_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip eigenvector signs so the largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def build_schrodinger_1d(grid: Grid, potential: PotentialSpec, shift: float) -> Operator:
    """Central-difference surrogate of -u'' + (V0(x) - shift) u on the grid.

    The essential-spectrum surrogate is the half line starting at the
    declared V0 limit at infinity, moved by the shift.
    """
    if not np.isfinite(shift):
        raise InvalidSpecError(f"shift must be finite, got {shift}")
    x = grid.x
    v0 = potential.v0(x)
    bad = ~np.isfinite(v0)
    if bad.any():
        i = int(np.argmax(bad))
        raise InvalidPotentialError(f"potential sample non-finite at x={x[i]} (index {i})")
    h = grid.spacing
    diag = 2.0 / h**2 + v0 - shift
    off = np.full(grid.dim - 1, -1.0 / h**2)
    vals, vecs = eigh_tridiagonal(diag, off)
    vecs = _canonical_signs(vecs / np.sqrt(h))
    matrix = np.diag(diag)
    matrix[np.arange(grid.dim - 1), np.arange(1, grid.dim)] = off
    matrix[np.arange(1, grid.dim), np.arange(grid.dim - 1)] = off
    return Operator(
        kind="schrodinger1d",
        space=grid,
        matrix=matrix,
        eigenvalues=vals,
        eigenvectors=vecs,
        essential_spectrum=EssentialSpectrum.interval(potential.v0_at_infinity - shift),
        shift=float(shift),
    )


def build_synthetic(eigenvalues, essential_spectrum: EssentialSpectrum) -> Operator:
    """Diagonal operator with the given eigenvalues and declared surrogate."""
    vals = np.asarray(list(eigenvalues), dtype=float)
    if vals.size == 0:
        raise InvalidSpecError("synthetic operator needs at least one eigenvalue")
    if not np.all(np.isfinite(vals)):
        raise InvalidSpecError("synthetic eigenvalues must be finite")
    vals = np.sort(vals)
    space = IndexSpace(vals.size)
    return Operator(
        kind="synthetic",
        space=space,
        matrix=np.diag(vals),
        eigenvalues=vals,
        eigenvectors=np.eye(vals.size),
        essential_spectrum=essential_spectrum,
    )


def gamma_value(op: Operator, lambda0: float) -> float:
    """Reciprocal distance from lambda0 to the essential-spectrum surrogate.

    Returns 0 for an empty surrogate (any band width is then admissible and
    the restricted-inverse norms can be made arbitrarily small).
    """
    sigma = op.essential_spectrum
    if sigma.is_empty:
        return 0.0
    dist = sigma.distance(lambda0)
    if dist <= 0.0:
        raise NotFredholmError(
            f"lambda0={lambda0} lies inside the essential-spectrum surrogate {sigma.describe()}"
        )
    return 1.0 / dist


@dataclass(frozen=True)
class SpectralSplit:
    """Splitting E = Z + W by the band [-d, d] around the (shifted) origin.

    Z is spanned by eigenvectors with eigenvalue in the band; W by the rest.
    ``w_inverse_bound`` is 1/dist(0, excluded eigenvalues): the norm of the
    restricted inverse on W.
    """

    band_halfwidth: float
    z_eigenvalues: np.ndarray
    z_basis: np.ndarray
    w_eigenvalues: np.ndarray
    w_basis: np.ndarray
    w_inverse_bound: float
    space: Space = field(repr=False)
    center: float = 0.0  # the shift was already applied, so the target sits at 0

    def __post_init__(self) -> None:
        for arr in (self.z_eigenvalues, self.z_basis, self.w_eigenvalues, self.w_basis):
            arr.setflags(write=False)

    @property
    def dim_z(self) -> int:
        return int(self.z_eigenvalues.size)

    @property
    def gap(self) -> float:
        """dist(0, spectrum excluded from the band); +inf when W is empty."""
        if self.w_eigenvalues.size == 0:
            return float("inf")
        return float(np.min(np.abs(self.w_eigenvalues)))

    def project_w(self, y: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto W: identity minus rank-one kernels over Z."""
        return y - self.z_basis @ (self.space.weight * (self.z_basis.T @ y))

    def z_coords(self, y: np.ndarray) -> np.ndarray:
        """Coordinates of the Z-component of y in the Z eigenbasis."""
        return self.space.weight * (self.z_basis.T @ y)

    def from_z_coords(self, coords: np.ndarray) -> np.ndarray:
        return self.z_basis @ np.asarray(coords, dtype=float)


def spectral_split(op: Operator, band_halfwidth: float) -> SpectralSplit:
    """Split off the eigenvalues in [-d, d] as the kernel band Z."""
    d = float(band_halfwidth)
    if not (d > 0.0):
        raise BandTooWideError(f"band halfwidth must be positive, got {d}")
    sigma_dist = op.essential_spectrum.distance(0.0)
    if d >= sigma_dist:
        raise BandTooWideError(
            f"band halfwidth {d} reaches the essential-spectrum surrogate "
            f"(dist(0, surrogate) = {sigma_dist})"
        )
    in_band = np.abs(op.eigenvalues) <= d
    if not in_band.any():
        raise EmptyKernelBandError(f"no eigenvalue inside [-{d}, {d}]")
    excluded = ~in_band
    w_vals = op.eigenvalues[excluded]
    w_bound = 1.0 / float(np.min(np.abs(w_vals))) if w_vals.size else 0.0
    return SpectralSplit(
        band_halfwidth=d,
        z_eigenvalues=op.eigenvalues[in_band].copy(),
        z_basis=op.eigenvectors[:, in_band].copy(),
        w_eigenvalues=w_vals.copy(),
        w_basis=op.eigenvectors[:, excluded].copy(),
        w_inverse_bound=w_bound,
        space=op.space,
    )


def inverse_on_w(split: SpectralSplit, op: Operator, lam: float, y: np.ndarray) -> np.ndarray:
    """Solve (L - lam) w = P y for w in W, by eigen-expansion over W.

    The input is projected internally, so any y is accepted.
    """
    if split.w_eigenvalues.size == 0:
        return np.zeros_like(y)
    gaps = split.w_eigenvalues - lam
    closest = float(np.min(np.abs(gaps)))
    if closest < _NEAR_SINGULAR_TOL:
        raise NearSingularError(
            f"lam={lam} within {closest} of an excluded eigenvalue"
        )
    coeffs = split.space.weight * (split.w_basis.T @ y) / gaps
    return split.w_basis @ coeffs
