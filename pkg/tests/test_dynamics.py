import numpy as np
import pytest

from gpmaps.dynamics import (
    trajectory_to_csv,
    Burgers,
    CflWarning,
    Field1D,
    Grid1D,
    Heat,
    LinFirstOrder,
    NonlinFirstOrder,
    antiderivative,
    brusselator_rhs,
    brusselator_trajectory,
    diff,
    get_initial_condition,
    hopf_cartesian_rhs,
    hopf_polar_rhs,
    list_initial_conditions,
    mu_from_AB,
    pde_step,
    r_exact,
    rk4,
)
from gpmaps.exceptions import InvalidInputError, NumericalOverflowError, SingularityError

RNG = np.random.default_rng(3)


def field(fn, x0=0.0, dx=0.01, n=101):
    grid = Grid1D(x0, dx, n)
    return Field1D(grid, fn(grid.xs))


class TestDiff:
    def test_constant_field(self):
        f = field(lambda x: np.full_like(x, 3.7))
        np.testing.assert_allclose(diff(f, 1).values, 0.0, atol=1e-12)
        np.testing.assert_allclose(diff(f, 2).values, 0.0, atol=1e-9)

    def test_linear_field_exact(self):
        f = field(lambda x: 2.5 * x - 1.0)
        np.testing.assert_allclose(diff(f, 1).values, 2.5, rtol=1e-12)
        np.testing.assert_allclose(diff(f, 2).values, 0.0, atol=1e-10)

    def test_sine_first_derivative(self):
        f = field(np.vectorize(lambda x: np.sin(np.pi * x)), dx=1e-3, n=1001)
        expected = np.pi * np.cos(np.pi * f.grid.xs)
        assert np.max(np.abs(diff(f, 1).values - expected)) <= 1e-4

    def test_too_small_grid(self):
        with pytest.raises(InvalidInputError):
            Grid1D(0.0, 0.1, 2)
        g = Grid1D(0.0, 0.1, 3)
        with pytest.raises(InvalidInputError):
            diff(Field1D(g, np.zeros(3)), 2)


class TestPdeStep:
    def test_constant_field_burgers_unchanged(self):
        f = field(lambda x: np.full_like(x, 1.3))
        out = pde_step(Burgers(0.5), f, 1e-5)
        np.testing.assert_array_equal(out.values, f.values)

    def test_heat_superposition(self):
        f1 = field(lambda x: np.sin(np.pi * x))
        f2 = field(lambda x: x**2)
        h = 1e-5
        lhs = pde_step(Heat(0.5), Field1D(f1.grid, 2.0 * f1.values + 3.0 * f2.values), h).values
        rhs = 2.0 * pde_step(Heat(0.5), f1, h).values + 3.0 * pde_step(Heat(0.5), f2, h).values
        np.testing.assert_allclose(lhs, rhs, rtol=1e-13, atol=1e-13)

    def test_heat_eigenfunction(self):
        nu, h = 0.5, 1e-5
        f = field(lambda x: np.sin(np.pi * x))
        out = pde_step(Heat(nu), f, h)
        expected = (1.0 - h * nu * np.pi**2) * np.sin(np.pi * f.grid.xs)
        interior = slice(1, -1)
        assert np.max(np.abs(out.values[interior] - expected[interior])) <= 1e-3 * f.grid.dx**2 / h * h + 1e-7

    def test_euler_first_order_convergence(self):
        # halving h halves the fixed-horizon error against a fine reference
        ic = get_initial_condition("burgers-paper", nu=0.5)
        grid = Grid1D(0.0, 0.02, 51)
        v0 = Field1D(grid, ic.v0(grid.xs))

        def advance(h, t_end):
            f = v0
            steps = int(round(t_end / h))
            for _ in range(steps):
                f = pde_step(Burgers(0.5), f, h)
            return f.values

        t_end = 0.016
        ref = advance(1.25e-5, t_end)
        e1 = np.linalg.norm(advance(2e-4, t_end) - ref)
        e2 = np.linalg.norm(advance(1e-4, t_end) - ref)
        assert 1.8 <= e1 / e2 <= 2.2

    def test_cfl_warning(self):
        f = field(lambda x: np.sin(np.pi * x))
        with pytest.warns(CflWarning):
            pde_step(Heat(0.5), f, 2e-4)

    def test_nonlin_singularity(self):
        f = field(lambda x: x)  # contains 0
        with pytest.raises(SingularityError):
            pde_step(NonlinFirstOrder(), f, 1e-5)

    def test_linfirstorder_step(self):
        f = field(lambda x: np.exp(x))
        h = 1e-6
        out = pde_step(LinFirstOrder(), f, h)
        # w_t = w_x - w vanishes identically on e^x
        np.testing.assert_allclose(out.values[1:-1], f.values[1:-1], rtol=1e-9)

    def test_overflow_detection(self):
        grid = Grid1D(0.0, 1e-3, 101)
        alternating = 1e300 * np.where(np.arange(101) % 2 == 0, 1.0, -1.0)
        with np.errstate(over="ignore"), pytest.raises(NumericalOverflowError), pytest.warns(CflWarning):
            pde_step(Heat(0.5), Field1D(grid, alternating), 1e3)


class TestAntiderivative:
    def test_constant_integrand(self):
        f = field(lambda x: np.ones_like(x))
        out = antiderivative(f, 0.0, 0.0)
        np.testing.assert_allclose(out.values, f.grid.xs, atol=1e-14)

    def test_linear_integrand(self):
        f = field(lambda x: x)
        out = antiderivative(f, 0.0, 0.0)
        np.testing.assert_allclose(out.values, f.grid.xs**2 / 2.0, atol=1e-14)

    def test_cosine(self):
        f = field(lambda x: np.cos(np.pi * x), dx=1e-3, n=1001)
        out = antiderivative(f, 0.0, 0.0)
        assert np.max(np.abs(out.values - np.sin(np.pi * f.grid.xs) / np.pi)) <= 1e-5

    def test_linear_in_integrand(self):
        f1 = field(lambda x: np.sin(x))
        f2 = field(lambda x: np.cos(2 * x))
        combo = Field1D(f1.grid, 2.0 * f1.values - 0.5 * f2.values)
        lhs = antiderivative(combo, 0.0, 0.0).values
        rhs = 2.0 * antiderivative(f1, 0.0, 0.0).values - 0.5 * antiderivative(f2, 0.0, 0.0).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    def test_anchor_between_nodes_and_bounds(self):
        f = field(lambda x: np.ones_like(x))
        out = antiderivative(f, 5.0, 0.005)
        assert np.interp(0.005, f.grid.xs, out.values) == pytest.approx(5.0, abs=1e-12)
        with pytest.raises(InvalidInputError):
            antiderivative(f, 0.0, -3.0)


class TestRk4:
    def test_zero_rhs(self):
        traj = rk4(lambda t, y: np.zeros_like(y), [1.0, -2.0], 0.0, 1.0, 0.1)
        np.testing.assert_array_equal(traj.states[-1], [1.0, -2.0])

    def test_exponential(self):
        traj = rk4(lambda t, y: y, [1.0], 0.0, 1.0, 1e-3)
        assert abs(traj.states[-1, 0] - np.e) <= 1e-10

    def test_fourth_order_convergence(self):
        def err(dt):
            traj = rk4(lambda t, y: y, [1.0], 0.0, 1.0, dt)
            return abs(traj.states[-1, 0] - np.e)

        ratio = err(0.1) / err(0.05)
        assert 12.8 <= ratio <= 19.2

    def test_final_time_hit_exactly(self):
        traj = rk4(lambda t, y: y, [1.0], 0.0, 0.35, 0.1)
        assert traj.times[-1] == pytest.approx(0.35, abs=1e-12)

    def test_polar_fixed_point(self):
        mu = 0.3
        traj = rk4(hopf_polar_rhs(mu), [np.sqrt(mu)], 0.0, 5.0, 1e-3)
        assert np.max(np.abs(traj.states[:, 0] - np.sqrt(mu))) <= 1e-10


class TestBrusselator:
    def test_origin_is_equilibrium(self):
        rhs = brusselator_rhs(1.0, 2.1)
        np.testing.assert_array_equal(rhs(0.0, np.zeros(2)), np.zeros(2))

    def test_frozen_value(self):
        # hand-evaluated once: u+A=1.1, v+B/A=2.0 -> (0.01, -0.11)
        rhs = brusselator_rhs(1.0, 2.1)
        out = rhs(0.0, np.array([0.1, -0.1]))
        np.testing.assert_allclose(out, [0.01, -0.11], atol=1e-12)

    def test_sum_identity(self):
        # du/dt + dv/dt = A - (u + A), an algebraic identity of the vector field
        rhs = brusselator_rhs(1.3, 2.6)
        for _ in range(20):
            state = RNG.uniform(-1, 1, 2)
            out = rhs(0.0, state)
            assert out.sum() == pytest.approx(1.3 - (state[0] + 1.3), rel=1e-12, abs=1e-12)

    def test_zero_A_rejected(self):
        with pytest.raises(InvalidInputError):
            brusselator_rhs(0.0, 2.0)

    def test_trajectory_shape_and_grid(self):
        traj = brusselator_trajectory(1.0, 2.1, n_samples=200)
        assert len(traj) == 200
        assert traj.states.shape == (200, 2)
        np.testing.assert_allclose(np.diff(traj.times), 0.1, rtol=1e-12)


class TestHopf:
    def test_polar_zeros(self):
        mu = 0.25
        rhs = hopf_polar_rhs(mu)
        assert rhs(0.0, np.array([0.0]))[0] == 0.0
        assert rhs(0.0, np.array([np.sqrt(mu)]))[0] == pytest.approx(0.0, abs=1e-15)

    def test_cartesian_unit_angular_rate(self):
        rhs = hopf_cartesian_rhs(0.07)
        for _ in range(20):
            x, y = RNG.uniform(-1, 1, 2)
            if x * x + y * y < 1e-4:
                continue
            dx, dy = rhs(0.0, np.array([x, y]))
            assert (x * dy - y * dx) / (x * x + y * y) == pytest.approx(1.0, rel=1e-12)

    def test_radial_consistency(self):
        mu = 0.11
        r = 0.4
        dx, dy = hopf_cartesian_rhs(mu)(0.0, np.array([r, 0.0]))
        assert dx == pytest.approx((mu - r * r) * r, rel=1e-12)


class TestMuAndRExact:
    def test_paper_parameters(self):
        assert mu_from_AB(1.0, 2.1) == pytest.approx(0.1 / np.sqrt(3.99), rel=1e-12)
        assert mu_from_AB(1.0, 2.1) == pytest.approx(0.0500626, abs=1e-6)

    def test_bifurcation_point(self):
        assert mu_from_AB(1.3, 1.3**2 + 1.0) == 0.0

    def test_below_bifurcation(self):
        # mirrored parameters: B - A^2 - 1 = -0.1
        assert mu_from_AB(1.0, 1.9) == pytest.approx(-0.1 / np.sqrt(3.99), rel=1e-12)

    def test_invalid_radicand(self):
        with pytest.raises(InvalidInputError):
            mu_from_AB(0.1, 5.0)

    def test_r_exact_fixed_point_and_limit(self):
        mu = 0.3
        assert r_exact(np.sqrt(mu), mu, 7.7) == pytest.approx(np.sqrt(mu), rel=1e-12)
        assert r_exact(0.05, mu, 1e4) == pytest.approx(np.sqrt(mu), rel=1e-10)
        assert r_exact(0.0, mu, 3.0) == 0.0

    def test_r_exact_mu_zero(self):
        r0, t = 0.4, 2.5
        assert r_exact(r0, 0.0, t) == pytest.approx(r0 / np.sqrt(1 + 2 * r0**2 * t), rel=1e-12)

    def test_r_exact_matches_rk4(self):
        mu = 0.1 / np.sqrt(3.99)
        r0 = np.sqrt(2) / 10
        traj = rk4(hopf_polar_rhs(mu), [r0], 0.0, 10.0, 1e-3)
        expected = r_exact(r0, mu, traj.times)
        assert np.max(np.abs(traj.states[:, 0] - expected)) <= 1e-6

    def test_r_exact_long_horizon_no_overflow(self):
        vals = r_exact(np.sqrt(2) / 10, 0.05, np.linspace(0, 200, 50))
        assert np.all(np.isfinite(vals))


class TestRegistry:
    def test_names(self):
        assert set(list_initial_conditions()) == {
            "burgers-paper", "multi-1", "multi-2", "multi-3", "multi-4", "firstorder-paper",
        }

    def test_unknown_name(self):
        with pytest.raises(InvalidInputError):
            get_initial_condition("nope")

    def test_burgers_needs_nu(self):
        with pytest.raises(InvalidInputError):
            get_initial_condition("burgers-paper")

    def test_antiderivatives_match_quadrature(self):
        # closed-form u0 vs dense trapezoid integration of v0 over the window
        for name in ("burgers-paper", "multi-1", "multi-2", "multi-3", "multi-4"):
            ic = get_initial_condition(name, nu=0.5)
            grid = Grid1D(ic.x_lo, (ic.x_hi - ic.x_lo) / 4000, 4001)
            numeric = antiderivative(Field1D(grid, ic.v0(grid.xs)), 0.0, grid.x0).values
            closed = ic.u0(grid.xs) - ic.u0(np.array([grid.x0]))[0]
            assert np.max(np.abs(numeric - closed)) <= 1e-5

    def test_trajectory_csv_export(self, tmp_path):
        traj = brusselator_trajectory(1.0, 2.1, n_samples=5)
        path = trajectory_to_csv(traj, tmp_path / "traj.csv", state_names=("u", "v"))
        lines = open(path).read().splitlines()
        assert lines[0] == "t,u,v"
        assert len(lines) == 6
        first = [float(x) for x in lines[1].split(",")]
        assert first == [0.0, 0.1, -0.1]

    def test_firstorder_values(self):
        ic = get_initial_condition("firstorder-paper")
        assert ic.u0(np.array([0.0]))[0] == pytest.approx(1.0, rel=1e-12)
