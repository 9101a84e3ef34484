"""Superposition operator, functional, Lipschitz and hypothesis checks."""

from __future__ import annotations

import numpy as np
import pytest

from asymbif import (
    EssentialSpectrum,
    Grid,
    build_synthetic,
    catalog,
    eval_nemytskii,
    eval_psi,
    hadamard_ratio_diagnostic,
    hypothesis_report,
    lipschitz_constant,
    norm,
    one_norm,
)
from asymbif.errors import DomainError, EvaluationError, InvalidSpecError


@pytest.fixture(scope="module")
def grid():
    return Grid(8.0, 161)


class TestCatalog:
    def test_unknown_name_rejected(self):
        with pytest.raises(InvalidSpecError):
            catalog("cubic", c=1.0)

    def test_unknown_param_rejected(self):
        with pytest.raises(InvalidSpecError):
            catalog("tanh", eps=0.5, extra=1.0)

    @pytest.mark.parametrize(
        "name,params",
        [
            ("zero", {}),
            ("linear", {"eps": 0.3}),
            ("tanh", {"eps": 0.5}),
            ("atan", {"eps": 0.4}),
            ("gauss_odd", {"kappa": 1.2}),
            ("frac_decay", {"kappa": -2.0}),
            ("sat_odd", {"kappa": 0.7}),
            ("rational_odd", {"kappa": 0.9}),
        ],
    )
    def test_primitive_matches_quadrature_of_g(self, name, params):
        # oracle: the closed-form primitive must integrate g from 0
        from scipy.integrate import quad

        nl = catalog(name, **params)
        x0 = np.array([0.0])
        for s_end in (-3.0, -0.7, 0.9, 2.5):
            expected = quad(
                lambda s: float(nl.g(x0, np.array([s]))[0]), 0.0, s_end, epsabs=1e-12
            )[0]
            got = float(nl.primitive(x0, np.array([s_end]))[0])
            assert got == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize(
        "name,params",
        [
            ("tanh", {"eps": 0.5}),
            ("gauss_odd", {"kappa": 1.2}),
            ("frac_decay", {"kappa": -2.0}),
            ("sat_odd", {"kappa": 0.7}),
            ("rational_odd", {"kappa": 0.9}),
        ],
    )
    def test_declared_sup_bound_holds(self, name, params):
        nl = catalog(name, **params)
        s = np.concatenate([np.linspace(-50, 50, 400_001), np.geomspace(1, 1e6, 1000)])
        vals = np.abs(nl.g(np.zeros(1), s))
        assert vals.max() <= nl.sup_declared * (1 + 1e-12)
        assert vals.max() >= nl.sup_declared * 0.999

    def test_declared_derivative_matches_fd(self):
        for name, params in [("tanh", {"eps": 0.5}), ("frac_decay", {"kappa": -2.0}),
                             ("rational_odd", {"kappa": 0.9})]:
            nl = catalog(name, **params)
            s = np.linspace(-4, 4, 401)
            fd = (nl.g(np.zeros(1), s + 1e-6) - nl.g(np.zeros(1), s - 1e-6)) / 2e-6
            np.testing.assert_allclose(nl.derivative(np.zeros(1), s), fd, atol=1e-5)


class TestNemytskii:
    def test_zero_map(self, grid):
        nl = catalog("zero")
        out = eval_nemytskii(nl, grid, np.random.default_rng(0).standard_normal(grid.dim))
        assert np.all(out == 0.0)

    def test_tanh_saturation(self, grid):
        nl = catalog("tanh", eps=1.0)
        out = eval_nemytskii(nl, grid, np.full(grid.dim, 1000.0))
        np.testing.assert_allclose(out, 1.0, atol=1e-12)

    def test_linear_case(self, grid):
        nl = catalog("linear", eps=0.25)
        u = np.sin(grid.x)
        np.testing.assert_allclose(eval_nemytskii(nl, grid, u), 0.25 * u, atol=1e-15)

    def test_wrong_size_rejected(self, grid):
        with pytest.raises(DomainError):
            eval_nemytskii(catalog("zero"), grid, np.zeros(grid.dim + 1))

    def test_non_finite_output_reported_with_index(self, grid):
        from asymbif import Nonlinearity

        nl = Nonlinearity(name="bad", g=lambda x, s: np.where(x > 0, np.nan, s))
        with pytest.raises(EvaluationError) as err:
            eval_nemytskii(nl, grid, np.ones(grid.dim))
        assert err.value.index is not None


class TestPsi:
    def test_zero(self, grid):
        assert eval_psi(catalog("zero"), grid, np.ones(grid.dim)) == 0.0

    def test_linear_quadratic_value(self, grid):
        nl = catalog("linear", eps=0.3)
        u = np.cos(grid.x)
        assert eval_psi(nl, grid, u) == pytest.approx(0.15 * norm(grid, u) ** 2, rel=1e-12)

    def test_quadrature_fallback_matches_closed_form(self, grid):
        from asymbif import Nonlinearity

        closed = catalog("tanh", eps=0.5)
        opaque = Nonlinearity(name="tanh-opaque", g=closed.g)
        u = np.tanh(grid.x)  # small grid keeps the per-point quadrature cheap
        small = Grid(4.0, 21)
        u = np.tanh(small.x)
        assert eval_psi(opaque, small, u) == pytest.approx(
            eval_psi(closed, small, u), abs=1e-9
        )

    def test_gradient_consistency(self, grid):
        # directional finite difference of psi matches <N(u), v>
        rng = np.random.default_rng(5)
        nl = catalog("atan", eps=0.8)
        eps = 1e-4
        for _ in range(5):
            u = rng.standard_normal(grid.dim)
            v = rng.standard_normal(grid.dim)
            lhs = eval_psi(nl, grid, u + eps * v) - eval_psi(nl, grid, u - eps * v)
            nu = eval_nemytskii(nl, grid, u)
            rhs = 2 * eps * grid.weight * float(nu @ v)
            bound = 1e-6 * eps * (1 + norm(grid, v)) * (1 + norm(grid, nu))
            assert abs(lhs - rhs) <= bound


class TestLipschitz:
    def test_tanh_declared(self):
        assert lipschitz_constant(catalog("tanh", eps=0.7)) == 0.7

    def test_gauss_odd_scan_matches_analytic(self):
        # oracle: dense scan of the analytic derivative -k(1-s^2)exp(-s^2/2)
        kappa = 1.3
        s = np.linspace(-30, 30, 1_000_001)
        analytic = np.abs(-kappa * (1 - s**2) * np.exp(-0.5 * s**2)).max()
        nl = catalog("gauss_odd", kappa=kappa)
        assert nl.lip_declared == pytest.approx(analytic, rel=1e-9)
        bare = type(nl)(name="bare", g=nl.g)
        est = lipschitz_constant(bare, s_range=(-30.0, 30.0), samples=200_001)
        assert est == pytest.approx(kappa, rel=1e-6)

    def test_zero(self):
        assert lipschitz_constant(catalog("zero")) == 0.0

    def test_estimate_needs_enough_samples(self):
        from asymbif import Nonlinearity

        bare = Nonlinearity(name="bare", g=lambda x, s: np.tanh(s))
        with pytest.raises(DomainError):
            lipschitz_constant(bare, samples=10)


class TestHadamardRatio:
    def test_zero_map_all_zero(self, grid):
        u = np.zeros(grid.dim)
        u[grid.dim // 2] = 1.0
        u = u / norm(grid, u)
        ratios = hadamard_ratio_diagnostic(catalog("zero"), grid, u, [10, 100])
        assert ratios == [0.0, 0.0]

    def test_tanh_decay(self, grid):
        nl = catalog("tanh", eps=1.0)
        u = 1.0 / np.cosh(grid.x)
        u = u / norm(grid, u)
        ratios = hadamard_ratio_diagnostic(nl, grid, u, [10.0, 1e2, 1e3, 1e4])
        assert all(b < a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] < 1e-2

    def test_linear_ratio_constant(self, grid):
        nl = catalog("linear", eps=0.3)
        u = np.exp(-grid.x**2)
        u = u / norm(grid, u)
        ratios = hadamard_ratio_diagnostic(nl, grid, u, [10.0, 1e2, 1e3])
        np.testing.assert_allclose(ratios, 0.3, rtol=1e-12)

    def test_bounded_g_exact_envelope(self, grid):
        # ||N(t u)||/t can never exceed sup|g| * ||1|| / t
        nl = catalog("tanh", eps=0.5)
        u = 1.0 / np.cosh(grid.x)
        u = u / norm(grid, u)
        envelope = nl.sup_declared * norm(grid, np.ones(grid.dim))
        for t, r in zip([10.0, 1e2, 1e3], hadamard_ratio_diagnostic(nl, grid, u, [10.0, 1e2, 1e3])):
            assert r <= envelope / t * (1 + 1e-12)

    def test_requires_unit_vector(self, grid):
        with pytest.raises(DomainError):
            hadamard_ratio_diagnostic(catalog("zero"), grid, np.ones(grid.dim), [1.0, 2.0])


class TestHypothesisReport:
    def test_sech_tanh_scenario_passes(self, pt_operator):
        nl = catalog("tanh", eps=0.5)
        rep = hypothesis_report(nl, pt_operator, 0.0)
        for key in ("f1", "f2", "f3", "f4", "f5"):
            assert rep.flags()[key].status == "satisfied", key
        assert rep.dist_condition.passed
        assert rep.dist_condition.lip == 0.5
        assert rep.dist_condition.dist == pytest.approx(1.0)

    def test_sharpness_scenario_fails_distance(self, pt_operator):
        # Lipschitz bound above the surrogate distance: condition must fail
        nl = catalog("frac_decay", kappa=-2.0)
        rep = hypothesis_report(nl, pt_operator, 0.0)
        assert not rep.dist_condition.passed
        assert rep.dist_condition.lip == 2.0
        assert rep.dist_condition.dist == pytest.approx(1.0)
        assert rep.f5.status == "satisfied"

    def test_zero_everything_vacuous(self):
        op = build_synthetic([0.0, 1.0], EssentialSpectrum.interval(3.0))
        rep = hypothesis_report(catalog("zero"), op, 0.0)
        assert rep.lip_estimate == 0.0
        assert rep.dist_condition.passed
        for key in ("f1", "f2", "f3", "f4"):
            assert rep.flags()[key].status == "satisfied"
        assert rep.f5.status == "not-applicable"

    def test_linear_fails_boundedness_and_decay(self):
        op = build_synthetic([0.0], EssentialSpectrum.interval(3.0))
        rep = hypothesis_report(catalog("linear", eps=0.2), op, 0.0)
        assert rep.f3.status == "violated"
        assert rep.f4.status == "violated"

    def test_gauss_odd_vanishing_limits_flagged(self, pt_operator):
        rep = hypothesis_report(catalog("gauss_odd", kappa=0.8), pt_operator, 0.0)
        assert rep.f5.status == "violated"

    def test_sat_odd_f6_satisfied(self, pt_operator):
        rep = hypothesis_report(catalog("sat_odd", kappa=0.7), pt_operator, 0.0)
        assert rep.f6.status == "satisfied"

    def test_rational_odd_f6_vanishing_limits(self, pt_operator):
        rep = hypothesis_report(catalog("rational_odd", kappa=0.7), pt_operator, 0.0)
        assert rep.f6.status == "violated"
