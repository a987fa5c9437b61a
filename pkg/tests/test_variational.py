"""Constraint functional, scaling projection, objective, gradients."""
import math

import numpy as np
import pytest

from enorbit.errors import (
    DegenerateLoop,
    InvalidParameter,
    NonMonotoneScaling,
    RootNotBracketed,
    VanishingConstraintGradient,
)
from enorbit.loops import AntiperiodicLoop, grid_for, random_loop, synthesize
from enorbit.potentials import (
    PotentialModel,
    make_combined,
    make_exp_well,
    make_power_law,
)
from enorbit.variational import (
    ConstraintSpec,
    constraint_gradient,
    f_eval,
    f_gradient,
    force_integral_floor,
    g_eval,
    g_scale_derivative,
    project_to_constraint,
    tangent_project,
    value_and_gradients,
)

from conftest import circle_loop, fd_gradient

PI2 = math.pi**2


def harmonic():
    # V = 0.5 |q|^2, for which g(c * circle) = c^2 exactly
    return make_power_law(0.5, 1, 2)


def zero_loop(dim=2, K=1):
    nk = (K + 1) // 2
    return AntiperiodicLoop(dim=dim, K=K, a=np.zeros((nk, dim)), b=np.zeros((nk, dim)))


class TestConstraintFunctional:
    def test_scaled_circle(self):
        grid = grid_for(1)
        for c in (0.5, 1.0, 2.0, 3.0):
            val = g_eval(circle_loop().scale(c), harmonic(), grid)
            assert val == pytest.approx(c * c, rel=1e-13)

    def test_zero_loop(self):
        assert g_eval(zero_loop(), harmonic(), grid_for(1)) == 0.0

    def test_exp_well_on_unit_circle(self):
        val = g_eval(circle_loop(), make_exp_well(2), grid_for(1))
        assert val == pytest.approx(1.5 * math.exp(-1.0), rel=1e-12)

    def test_scale_derivative_circle(self):
        d = g_scale_derivative(circle_loop(), harmonic(), grid_for(1), a=2.0)
        assert d == pytest.approx(4.0, rel=1e-12)

    def test_scale_derivative_quartic(self):
        m = make_power_law(1.0, 2, 2)
        d = g_scale_derivative(circle_loop(), m, grid_for(1), a=1.0)
        assert d == pytest.approx(12.0, rel=1e-12)

    def test_scale_derivative_zero_loop(self):
        for a in (0.5, 1.0, 2.0):
            assert g_scale_derivative(zero_loop(), harmonic(), grid_for(1), a) == 0.0

    def test_matches_finite_difference_in_scale(self):
        u = random_loop(4, K=5, dim=2)
        grid = grid_for(5)
        m = make_combined(1.0, 1, 2)
        for a in (0.7, 1.3):
            d = g_scale_derivative(u, m, grid, a)
            step = 1e-6
            fd = (
                g_eval(u.scale(a + step), m, grid) - g_eval(u.scale(a - step), m, grid)
            ) / (2.0 * step)
            assert d == pytest.approx(fd, rel=1e-6)


class TestProjection:
    def test_circle_to_doubled_energy(self):
        res = project_to_constraint(
            circle_loop(), harmonic(), ConstraintSpec(h=4.0), grid_for(1)
        )
        assert res.a == pytest.approx(2.0, abs=1e-10)
        assert abs(res.residual) <= 1e-12
        assert res.bracket[0] <= res.a <= res.bracket[1]

    def test_already_feasible_is_identity(self):
        res = project_to_constraint(
            circle_loop(), harmonic(), ConstraintSpec(h=1.0), grid_for(1)
        )
        assert res.a == pytest.approx(1.0, abs=1e-10)
        assert res.iterations == 0

    def test_random_directions_land_on_level_set(self):
        grid = grid_for(5)
        m = make_combined(1.0, 1, 2)
        spec = ConstraintSpec(h=2.0)
        for seed in range(20):
            u = random_loop(seed, K=5, dim=2, decay=0.6)
            res = project_to_constraint(u, m, spec, grid)
            assert res.a > 0
            assert abs(res.residual) <= spec.tol
            assert res.deriv_min > 0
            assert g_eval(u.scale(res.a), m, grid) == pytest.approx(2.0, abs=2e-12)

    def test_shrinking_bracket(self):
        # start above the level set, so the bracket must move downward
        res = project_to_constraint(
            circle_loop().scale(3.0), harmonic(), ConstraintSpec(h=1.0), grid_for(1)
        )
        assert res.a == pytest.approx(1.0 / 3.0, rel=1e-10)

    def test_zero_loop_rejected(self):
        with pytest.raises(DegenerateLoop):
            project_to_constraint(
                zero_loop(), harmonic(), ConstraintSpec(h=1.0), grid_for(1)
            )

    def test_exp_well_cannot_reach_high_energy(self):
        # the well's constraint values cap out below 1, so h = 2 is unreachable
        with pytest.raises(RootNotBracketed):
            project_to_constraint(
                circle_loop(), make_exp_well(2), ConstraintSpec(h=2.0), grid_for(1)
            )

    def test_non_monotone_scaling_detected(self):
        def value(q):
            s = np.sum(np.square(q), axis=-1)
            return s - s**2

        def gradient(q):
            q = np.asarray(q, dtype=np.float64)
            s = np.sum(np.square(q), axis=-1)
            return (2.0 - 4.0 * s)[..., None] * q

        def hess_vec(q, v):
            q = np.asarray(q, dtype=np.float64)
            v = np.asarray(v, dtype=np.float64)
            s = np.sum(np.square(q), axis=-1)
            qv = np.sum(q * v, axis=-1)
            return (2.0 - 4.0 * s)[..., None] * v - 8.0 * qv[..., None] * q

        hump = PotentialModel(
            dim=2, value=value, gradient=gradient, hess_vec=hess_vec, label="hump"
        )
        with pytest.raises(NonMonotoneScaling):
            project_to_constraint(
                circle_loop(), hump, ConstraintSpec(h=0.4), grid_for(1)
            )

    def test_spec_validation(self):
        with pytest.raises(InvalidParameter):
            ConstraintSpec(h=math.inf)
        with pytest.raises(InvalidParameter):
            ConstraintSpec(h=1.0, tol=0.0)
        with pytest.raises(InvalidParameter):
            ConstraintSpec(h=1.0, max_iterations=0)
        with pytest.raises(InvalidParameter):
            ConstraintSpec(h=1.0, bracket_cap=1.0)


class TestObjective:
    def test_unit_circle(self):
        assert f_eval(circle_loop(), harmonic(), grid_for(1)) == pytest.approx(
            PI2, rel=1e-13
        )

    def test_scaled_circle_quadratic_in_energy(self):
        grid = grid_for(1)
        for h in (0.5, 1.0, 2.0):
            val = f_eval(circle_loop().scale(math.sqrt(h)), harmonic(), grid)
            assert val == pytest.approx(PI2 * h * h, rel=1e-12)

    def test_nonnegative_on_random_loops(self):
        grid = grid_for(5)
        for model in (harmonic(), make_exp_well(2), make_combined(1.0, 1, 2)):
            for seed in range(10):
                assert f_eval(random_loop(seed, K=5, dim=2), model, grid) >= 0.0

    def test_value_and_gradients_consistent(self):
        u = random_loop(8, K=5, dim=2)
        grid = grid_for(5)
        m = make_combined(1.0, 1, 2)
        f, gf, gg = value_and_gradients(u, m, grid)
        assert f == f_eval(u, m, grid)
        assert np.array_equal(gf, f_gradient(u, m, grid))
        assert np.array_equal(gg, constraint_gradient(u, m, grid))


class TestGradients:
    @pytest.mark.parametrize(
        "model",
        [make_power_law(1.0, 1, 2), make_exp_well(2), make_combined(1.0, 1, 2)],
        ids=lambda m: m.label,
    )
    def test_objective_gradient_matches_fd(self, model):
        grid = grid_for(3)
        for seed in range(3):
            u = random_loop(seed, K=3, dim=2, decay=0.7)
            an = f_gradient(u, model, grid)
            fd = fd_gradient(lambda lp: f_eval(lp, model, grid), u)
            assert np.linalg.norm(fd - an) <= 1e-6 * (1.0 + np.linalg.norm(an))

    @pytest.mark.parametrize(
        "model",
        [make_power_law(1.0, 1, 2), make_exp_well(2), make_combined(1.0, 1, 2)],
        ids=lambda m: m.label,
    )
    def test_constraint_gradient_matches_fd(self, model):
        grid = grid_for(3)
        for seed in range(3):
            u = random_loop(seed, K=3, dim=2, decay=0.7)
            an = constraint_gradient(u, model, grid)
            fd = fd_gradient(lambda lp: g_eval(lp, model, grid), u)
            assert np.linalg.norm(fd - an) <= 1e-6 * (1.0 + np.linalg.norm(an))

    def test_pairing_equals_scale_derivative(self):
        # <grad g(u), coeffs(u)> must reproduce d/da g(a u) at a = 1 exactly
        grid = grid_for(5)
        for model in (harmonic(), make_exp_well(2), make_combined(1.0, 1, 2)):
            for seed in range(5):
                u = random_loop(seed, K=5, dim=2)
                pairing = float(np.vdot(constraint_gradient(u, model, grid), u.packed()))
                direct = g_scale_derivative(u, model, grid, a=1.0)
                assert pairing == pytest.approx(direct, rel=1e-12, abs=1e-12)


class TestTangentProjection:
    def test_parallel_gradient_vanishes(self):
        gg = np.array([1.0, 2.0, -1.0])
        out = tangent_project(3.0 * gg, gg)
        assert np.max(np.abs(out)) <= 1e-14

    def test_orthogonal_gradient_unchanged(self):
        gf = np.array([0.0, 1.0])
        gg = np.array([1.0, 0.0])
        assert np.allclose(tangent_project(gf, gg), gf, atol=1e-15)

    def test_mixed_example(self):
        out = tangent_project(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert np.allclose(out, [0.0, 1.0], atol=1e-15)

    def test_orthogonality_on_random_data(self, rng):
        for _ in range(20):
            gf = rng.standard_normal((2, 3, 2))
            gg = rng.standard_normal((2, 3, 2))
            out = tangent_project(gf, gg)
            dot = abs(float(np.vdot(out, gg)))
            assert dot <= 1e-12 * np.linalg.norm(gf) * np.linalg.norm(gg)

    def test_weighted_orthogonality(self, rng):
        w = 1.0 / (1.0 + np.arange(12, dtype=float).reshape(2, 3, 2))
        gf = rng.standard_normal((2, 3, 2))
        gg = rng.standard_normal((2, 3, 2))
        out = tangent_project(gf, gg, weights=w)
        dot = abs(float(np.vdot(out, w * gg)))
        assert dot <= 1e-12 * np.linalg.norm(gf) * np.linalg.norm(gg)

    def test_vanishing_constraint_gradient(self):
        with pytest.raises(VanishingConstraintGradient):
            tangent_project(np.ones(3), np.zeros(3))


class TestForceIntegralFloor:
    def test_power_law_attains_equality(self):
        # projected power-law loops sit exactly on the floor
        grid = grid_for(5)
        for n, h in ((1, 1.0), (2, 3.0)):
            m = make_power_law(1.0, n, 2)
            u = random_loop(7, K=5, dim=2, decay=0.6)
            res = project_to_constraint(u, m, ConstraintSpec(h=h), grid)
            U = synthesize(u.scale(res.a), grid)
            force = float(np.mean(np.sum(m.gradient(U) * U, axis=-1)))
            floor = force_integral_floor(h, m.growth.mu1, m.growth.mu2)
            assert floor == pytest.approx(2.0 * n * h / (n + 1.0), rel=1e-14)
            assert force == pytest.approx(floor, rel=1e-10)

    def test_combined_respects_floor(self):
        grid = grid_for(5)
        m = make_combined(1.0, 1, 2)
        for seed in range(10):
            u = random_loop(seed, K=5, dim=2, decay=0.6)
            res = project_to_constraint(u, m, ConstraintSpec(h=2.0), grid)
            U = synthesize(u.scale(res.a), grid)
            force = float(np.mean(np.sum(m.gradient(U) * U, axis=-1)))
            floor = force_integral_floor(2.0, m.growth.mu1, m.growth.mu2)
            assert force >= floor - 1e-10
