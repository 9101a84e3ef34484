"""Degree parity, Morse bookkeeping and the integral sign conditions."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymbif import (
    EssentialSpectrum,
    IndexSpace,
    build_synthetic,
    catalog,
    degree_at,
    landesman_lazer_f5,
    one_norm,
    parity_and_morse,
    sample_kernel_sphere,
    sign_condition_f6,
    spectral_split,
)
from asymbif.errors import DegenerateLinearizationError, DomainError


def synthetic_split(eigs, edge=10.0, band=0.5):
    op = build_synthetic(eigs, EssentialSpectrum.interval(edge))
    return spectral_split(op, band)


class TestDegree:
    def test_simple_kernel_sign_flip(self):
        split = synthetic_split([0.0, 3.0, -3.0])
        plus = degree_at(split, +0.25)
        minus = degree_at(split, -0.25)
        assert (plus.negative_count, plus.degree) == (1, -1)
        assert (minus.negative_count, minus.degree) == (0, 1)

    def test_double_kernel_no_jump(self):
        split = synthetic_split([0.0, 0.0, 3.0])
        assert degree_at(split, +0.25).degree == 1
        assert degree_at(split, -0.25).degree == 1

    def test_spec_example_spectrum(self):
        split = synthetic_split([-1.0, 0.0, 0.0, 2.0], edge=2.0)
        assert degree_at(split, +0.25).degree == 1
        assert degree_at(split, -0.25).degree == 1

    def test_eigenvalue_probe_rejected(self):
        split = synthetic_split([0.0, 3.0])
        with pytest.raises(DegenerateLinearizationError):
            degree_at(split, 0.0)


class TestParityAndMorse:
    def test_simple_kernel_certifies(self):
        report = parity_and_morse(synthetic_split([0.0, 3.0, -3.0]), 0.25)
        assert report.kernel_dim == 1
        assert report.parity_jump
        assert report.verdict == "bifurcation-certified"

    def test_double_kernel_needs_sign_condition(self, double_split):
        report = parity_and_morse(double_split, 0.25)
        assert report.kernel_dim == 2
        assert not report.parity_jump
        assert report.morse_plus == report.morse_minus + 2
        assert report.critical_groups_differ
        assert report.verdict == "no-witness"  # no sign condition supplied

    def test_double_kernel_with_f5_pass(self, double_split, tanh_nl, synthetic_double):
        ll5 = landesman_lazer_f5(tanh_nl, synthetic_double.space, double_split.z_basis)
        report = parity_and_morse(double_split, 0.25, ll_f5=ll5)
        assert report.verdict == "even-multiplicity-certified"

    def test_delta_out_of_range_rejected(self, double_split):
        with pytest.raises(DomainError):
            parity_and_morse(double_split, double_split.gap * 2)

    @given(
        kernel_copies=st.integers(1, 3),
        outside=st.lists(st.sampled_from([-4.0, -3.0, -2.0, 2.0, 3.0, 4.0]), max_size=4),
        delta=st.floats(0.25, 0.9),
    )
    @settings(max_examples=60, deadline=None)
    def test_degree_parity_identity(self, kernel_copies, outside, delta):
        # degree(+d) * degree(-d) = (-1)^kernel_dim, and the Morse indices
        # differ by exactly the kernel dimension
        eigs = [0.0] * kernel_copies + list(outside)
        split = synthetic_split(eigs, edge=10.0, band=0.5)
        report = parity_and_morse(split, delta)
        plus = degree_at(split, +delta)
        minus = degree_at(split, -delta)
        assert plus.degree * minus.degree == (-1) ** report.kernel_dim
        assert report.morse_plus - report.morse_minus == report.kernel_dim


class TestKernelSphereSampling:
    def test_dim_one_exact_endpoints(self):
        dirs = sample_kernel_sphere(1)
        np.testing.assert_array_equal(dirs, [[1.0], [-1.0]])

    def test_deterministic_for_fixed_seed(self):
        a = sample_kernel_sphere(2, seed=5)
        b = sample_kernel_sphere(2, seed=5)
        np.testing.assert_array_equal(a, b)
        c = sample_kernel_sphere(2, seed=6)
        assert not np.array_equal(a[3:], c[3:])

    def test_unit_rows_and_axes_included(self):
        dirs = sample_kernel_sphere(3)
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)
        assert dirs.shape[0] == 2 * 3 + 2 * 9 + 64


class TestLandesmanLazerF5:
    def test_tanh_on_sech_kernel_is_one_norm(self, pt_operator, pt_split):
        # limits +-1: the integral telescopes to the weighted 1-norm of the
        # kernel vector
        nl = catalog("tanh", eps=1.0)
        res = landesman_lazer_f5(nl, pt_operator.space, pt_split.z_basis)
        expected = one_norm(pt_operator.space, pt_split.z_basis[:, 0])
        assert res.status == "pass"
        assert res.extremal_integral == pytest.approx(expected, abs=1e-10)

    def test_vanishing_limits_fail(self, pt_operator, pt_split):
        res = landesman_lazer_f5(catalog("gauss_odd", kappa=1.0), pt_operator.space,
                                 pt_split.z_basis)
        assert res.status == "fail"
        assert res.extremal_integral == 0.0

    def test_sign_flipped_entry_passes_nonpos_mode(self, pt_operator, pt_split):
        res = landesman_lazer_f5(catalog("tanh", eps=-0.5), pt_operator.space,
                                 pt_split.z_basis)
        assert res.mode == "nonpos"
        assert res.status == "pass"
        assert res.extremal_integral < 0

    def test_not_applicable_without_limits(self, pt_operator, pt_split):
        res = landesman_lazer_f5(catalog("zero"), pt_operator.space, pt_split.z_basis)
        assert res.status == "not-applicable"

    def test_scaling_invariance(self, pt_operator, pt_split):
        # positive scaling of g rescales the integrals, never the flags
        for eps in (0.1, 1.0, 7.5):
            res = landesman_lazer_f5(catalog("tanh", eps=eps), pt_operator.space,
                                     pt_split.z_basis)
            assert res.status == "pass"

    def test_double_kernel_sphere_minimum(self, synthetic_double, double_split):
        res = landesman_lazer_f5(catalog("tanh", eps=0.5), synthetic_double.space,
                                 double_split.z_basis, seed=0)
        # I(a, b) = 0.5 (|a| + |b|) over the unit circle: minimum 0.5 at axes
        assert res.status == "pass"
        assert res.extremal_integral == pytest.approx(0.5, abs=1e-12)


class TestSignConditionF6:
    def test_saturating_entry_passes(self, pt_operator, pt_split):
        res = sign_condition_f6(catalog("sat_odd", kappa=0.7), pt_operator.space,
                                pt_split.z_basis)
        assert res.status == "pass"
        # integrand is the constant 0.7 over sign sets covering every node
        space = pt_operator.space
        assert res.extremal_integral == pytest.approx(0.7 * space.weight * space.dim, rel=1e-12)

    def test_vanishing_product_limits_fail(self, pt_operator, pt_split):
        res = sign_condition_f6(catalog("rational_odd", kappa=0.7), pt_operator.space,
                                pt_split.z_basis)
        assert res.status == "fail"

    def test_nonpos_mode(self, pt_operator, pt_split):
        res = sign_condition_f6(catalog("sat_odd", kappa=-0.7), pt_operator.space,
                                pt_split.z_basis)
        assert res.mode == "nonpos"
        assert res.status == "pass"
        assert res.extremal_integral < 0

    def test_not_applicable_without_limits(self, pt_operator, pt_split):
        res = sign_condition_f6(catalog("tanh", eps=0.5), pt_operator.space,
                                pt_split.z_basis)
        assert res.status == "not-applicable"
