"""Shared fixtures: the tanh-over-sech-well setting used across the suite."""

from __future__ import annotations

import numpy as np
import pytest

from asymbif import (
    Grid,
    build_schrodinger_1d,
    build_synthetic,
    catalog,
    configure,
    EssentialSpectrum,
    potential_catalog,
    spectral_split,
)


@pytest.fixture(scope="session")
def pt_grid():
    return Grid(half_width=15.0, n_points=601)


@pytest.fixture(scope="session")
def pt_operator(pt_grid):
    # sech-squared well of depth 2, shifted so the bound state sits at 0
    return build_schrodinger_1d(pt_grid, potential_catalog("poschl_teller", depth=2.0), -1.0)


@pytest.fixture(scope="session")
def pt_split(pt_operator):
    return spectral_split(pt_operator, 0.5)


@pytest.fixture(scope="session")
def tanh_nl():
    return catalog("tanh", eps=0.5)


@pytest.fixture(scope="session")
def pt_ctx(pt_split, tanh_nl):
    return configure(pt_split, tanh_nl.lip_declared, safety=0.5)


@pytest.fixture(scope="session")
def pt_kernel(pt_split):
    return pt_split.z_basis[:, 0]


@pytest.fixture(scope="session")
def synthetic_double():
    # multiplicity-2 kernel between isolated eigenvalues at -1 and 2
    return build_synthetic([-1.0, 0.0, 0.0, 2.0], EssentialSpectrum.interval(2.0))


@pytest.fixture(scope="session")
def double_split(synthetic_double):
    return spectral_split(synthetic_double, 0.5)


@pytest.fixture(scope="session")
def double_ctx(double_split, tanh_nl):
    return configure(double_split, tanh_nl.lip_declared, safety=0.5)
