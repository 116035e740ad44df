"""Forward solvers and analytic oracles for the model equations.

Contains the deterministic machinery every experiment builds on: spatial
finite differences on uniform 1-D grids, single explicit Euler steps for the
four model PDEs, the anchored antiderivative operator, classical RK4 for
ODE trajectories, the Brusselator and Hopf normal-form right-hand sides,
closed-form reference solutions, and a registry of built-in initial
conditions with their exact antiderivatives.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, NumericalOverflowError, SingularityError

__all__ = [
    "Grid1D",
    "Field1D",
    "Trajectory",
    "Burgers",
    "Heat",
    "NonlinFirstOrder",
    "LinFirstOrder",
    "CflWarning",
    "diff",
    "pde_step",
    "antiderivative",
    "rk4",
    "brusselator_rhs",
    "brusselator_trajectory",
    "hopf_polar_rhs",
    "hopf_cartesian_rhs",
    "mu_from_AB",
    "r_exact",
    "InitialCondition",
    "trajectory_to_csv",
    "get_initial_condition",
    "list_initial_conditions",
]


class CflWarning(UserWarning):
    """Emitted when an explicit diffusion step exceeds the stability bound."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid with n >= 3 nodes starting at x0."""

    x0: float
    dx: float
    n: int

    def __post_init__(self):
        if not self.dx > 0:
            raise InvalidInputError(f"dx must be positive, got {self.dx}")
        if self.n < 3:
            raise InvalidInputError(f"need at least 3 grid nodes, got {self.n}")

    @property
    def xs(self):
        return self.x0 + self.dx * np.arange(self.n)


@dataclass(frozen=True)
class Field1D:
    """Values of a scalar field on a :class:`Grid1D`."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise InvalidInputError(f"values shape {v.shape} does not match grid size {self.grid.n}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class Trajectory:
    """Time samples of an ODE state; times strictly increasing."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if t.ndim != 1 or s.shape[0] != t.shape[0]:
            raise InvalidInputError("times and states must have matching leading length")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    def __len__(self):
        return self.times.shape[0]


@dataclass(frozen=True)
class Burgers:
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise InvalidInputError(f"viscosity must be positive, got {self.nu}")


@dataclass(frozen=True)
class Heat:
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise InvalidInputError(f"diffusivity must be positive, got {self.nu}")


@dataclass(frozen=True)
class NonlinFirstOrder:
    """u_t = u_x - 1/u^2."""


@dataclass(frozen=True)
class LinFirstOrder:
    """w_t = w_x - w."""


def diff(field, order):
    """Spatial derivative of a gridded field, second order accurate.

    Central stencils in the interior; one-sided second-order stencils at the
    two boundary nodes, which keeps constraint building usable on
    non-periodic data.
    """
    v = field.values
    dx = field.grid.dx
    n = field.grid.n
    out = np.empty_like(v)
    if order == 1:
        out[1:-1] = (v[2:] - v[:-2]) / (2 * dx)
        out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dx)
        out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dx)
    elif order == 2:
        if n < 4:
            raise InvalidInputError("second derivative needs at least 4 nodes for boundary stencils")
        out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / dx**2
        out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / dx**2
        out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / dx**2
    else:
        raise InvalidInputError(f"derivative order must be 1 or 2, got {order}")
    return Field1D(field.grid, out)


def pde_step(kind, field, h):
    """One explicit Euler step of the given model equation."""
    if not h > 0:
        raise InvalidInputError(f"time step must be positive, got {h}")
    v = field.values
    if isinstance(kind, (Burgers, Heat)):
        cfl = h * kind.nu / field.grid.dx**2
        if cfl > 0.5:
            warnings.warn(
                f"diffusion number h*nu/dx^2 = {cfl:.3g} exceeds 0.5; explicit step may be unstable",
                CflWarning,
                stacklevel=2,
            )
    with np.errstate(over="ignore", invalid="ignore"):
        if isinstance(kind, Burgers):
            out = v + h * (kind.nu * diff(field, 2).values - v * diff(field, 1).values)
        elif isinstance(kind, Heat):
            out = v + h * kind.nu * diff(field, 2).values
        elif isinstance(kind, NonlinFirstOrder):
            if np.any(np.abs(v) < 1e-6):
                raise SingularityError("field touches u = 0; the 1/u^2 term is singular")
            out = v + h * (diff(field, 1).values - 1.0 / v**2)
        elif isinstance(kind, LinFirstOrder):
            out = v + h * (diff(field, 1).values - v)
        else:
            raise InvalidInputError(f"unknown PDE kind {kind!r}")
    if not np.all(np.isfinite(out)):
        raise NumericalOverflowError("non-finite field after Euler step (CFL violation?)")
    return Field1D(field.grid, out)


def antiderivative(field, value_at_anchor=0.0, anchor_x=0.0):
    """Cumulative trapezoid integral pinned to a value at an anchor point.

    The anchor may fall between nodes; its running integral is then linearly
    interpolated. With anchor (0, 0) on a grid containing x = 0 this is the
    integral-from-zero operator used to build regression inputs.
    """
    xs = field.grid.xs
    if anchor_x < xs[0] - 1e-12 or anchor_x > xs[-1] + 1e-12:
        raise InvalidInputError(f"anchor {anchor_x} outside grid span [{xs[0]}, {xs[-1]}]")
    v = field.values
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(xs))))
    at_anchor = float(np.interp(anchor_x, xs, cum))
    return Field1D(field.grid, cum - at_anchor + value_at_anchor)


def rk4(rhs, y0, t0, t1, dt):
    """Classical 4th-order Runge-Kutta with a final partial step landing on t1."""
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    if not t1 > t0:
        raise InvalidInputError(f"need t1 > t0, got [{t0}, {t1}]")
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    t = t0
    times = [t0]
    states = [y.copy()]
    # overflow surfaces as the typed error below, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        while t < t1 - 1e-12 * max(1.0, abs(t1)):
            step = min(dt, t1 - t)
            k1 = np.asarray(rhs(t, y))
            k2 = np.asarray(rhs(t + 0.5 * step, y + 0.5 * step * k1))
            k3 = np.asarray(rhs(t + 0.5 * step, y + 0.5 * step * k2))
            k4 = np.asarray(rhs(t + step, y + step * k3))
            y = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise NumericalOverflowError(f"non-finite state at t = {t + step}")
            t = t + step
            times.append(t)
            states.append(y.copy())
    return Trajectory(np.asarray(times), np.asarray(states))


def brusselator_rhs(A, B):
    """Right-hand side of the Brusselator shifted so the equilibrium sits at the origin."""
    if A == 0:
        raise InvalidInputError("A must be nonzero")

    def rhs(t, state):
        u, v = state
        p = u + A
        q = v + B / A
        return np.array([A + p * p * q - (B + 1.0) * p, B * p - p * p * q])

    return rhs


def brusselator_trajectory(A, B, init_point=(0.1, -0.1), n_samples=2000, sample_dt=0.1, gen_dt=1e-3):
    """Shifted-Brusselator trajectory sampled on a uniform coarse time grid.

    Integrated at the fine step ``gen_dt`` and subsampled, so data accuracy
    is never the bottleneck of a downstream fit; ``sample_dt`` must be an
    integer multiple of ``gen_dt``.
    """
    stride = int(round(sample_dt / gen_dt))
    if abs(stride * gen_dt - sample_dt) > 1e-12 * sample_dt:
        raise InvalidInputError("sample_dt must be an integer multiple of gen_dt")
    t_end = (n_samples - 1) * sample_dt
    fine = rk4(brusselator_rhs(A, B), np.asarray(init_point, dtype=float), 0.0, t_end, gen_dt)
    states = fine.states[::stride][:n_samples]
    return Trajectory(sample_dt * np.arange(n_samples), states)


def hopf_polar_rhs(mu):
    """dr/dt = (mu - r^2) r."""

    def rhs(t, r):
        r = np.asarray(r)
        return (mu - r**2) * r

    return rhs


def hopf_cartesian_rhs(mu):
    """dx/dt = (mu - x^2 - y^2) x - y, dy/dt = (mu - x^2 - y^2) y + x."""

    def rhs(t, state):
        x, y = state
        s = mu - x * x - y * y
        return np.array([s * x - y, s * y + x])

    return rhs


def mu_from_AB(A, B):
    """Bifurcation parameter of the normal form matching a Brusselator (A, B)."""
    radicand = 4.0 * A * A - (B - A * A - 1.0) ** 2
    if radicand <= 0:
        raise InvalidInputError(f"4A^2 - (B - A^2 - 1)^2 = {radicand} must be positive")
    return (B - (A * A + 1.0)) / np.sqrt(radicand)


def r_exact(r0, mu, t):
    """Closed-form radius of dr/dt = (mu - r^2) r from r(0) = r0.

    Evaluated in an overflow-safe rearrangement; handles mu = 0 separately.
    """
    if r0 < 0:
        raise InvalidInputError(f"r0 must be nonnegative, got {r0}")
    t = np.asarray(t, dtype=float)
    if r0 == 0.0:
        return np.zeros_like(t)[()] if t.ndim == 0 else np.zeros_like(t)
    if mu == 0.0:
        return r0 / np.sqrt(1.0 + 2.0 * r0 * r0 * t)
    q = mu / (1.0 + (mu / r0**2 - 1.0) * np.exp(-2.0 * mu * t))
    return np.sqrt(np.maximum(q, 0.0))


@dataclass(frozen=True)
class InitialCondition:
    """A named initial condition with closed forms on a fixed x-interval.

    ``u0`` is the exact antiderivative (the regression input); ``v0`` is the
    underlying field where one exists.
    """

    name: str
    x_lo: float
    x_hi: float
    u0: object
    v0: object = None

    def sample(self, n):
        """n evenly spaced x-points spanning the interval, with u0 values."""
        xs = np.linspace(self.x_lo, self.x_hi, n)
        return xs, self.u0(xs)


def trajectory_to_csv(trajectory, path, state_names=None):
    """Write a trajectory as CSV with columns t, state... (full precision)."""
    dim = trajectory.states.shape[1]
    names = list(state_names) if state_names is not None else [f"state{i}" for i in range(dim)]
    if len(names) != dim:
        raise InvalidInputError(f"expected {dim} state names, got {len(names)}")
    with open(path, "w") as fh:
        fh.write("t," + ",".join(names) + "\n")
        for t, row in zip(trajectory.times, trajectory.states):
            fh.write("%.17g," % t + ",".join("%.17g" % v for v in row) + "\n")
    return str(path)


def _burgers_paper(nu):
    def v0(x):
        return 28.0 * nu * np.pi * np.sin(np.pi * x) / (7.0 + 3.2 * np.cos(np.pi * x))

    def u0(x):
        return (28.0 * nu / 3.2) * np.log(10.2 / (7.0 + 3.2 * np.cos(np.pi * x)))

    return InitialCondition("burgers-paper", 0.0, 1.0, u0, v0)


def _firstorder_paper():
    def u0(x):
        return (3.0 * np.log(np.cosh(-x) * np.exp(x)) + 1.0) ** (1.0 / 3.0)

    return InitialCondition("firstorder-paper", 0.0, 1.0, u0)


# Antiderivatives are anchored at each window's left edge (u(x_lo) = 0), so
# the four input ranges join into one connected interval through the
# anchored unit interval; anchoring all of them at x = 0 instead would leave
# ranges separated by gaps much wider than any workable lengthscale.
_MULTI = (
    InitialCondition("multi-1", -2.5, -1.5,
                     lambda x: 5.0 * (x + 2.5) + 1.5 * (x**2 - 6.25), lambda x: 5.0 + 3.0 * x),
    InitialCondition("multi-2", 0.0, 1.0,
                     lambda x: 5.0 * np.sin(x) + 2.0 * x, lambda x: 5.0 * np.cos(x) + 2.0),
    InitialCondition("multi-3", 15.0, 16.0,
                     lambda x: 0.03 * (np.exp(x / 3.0) - np.exp(5.0)), lambda x: np.exp(x / 3.0) / 100.0),
    InitialCondition("multi-4", 10.0, 11.0,
                     lambda x: 0.5 * (x**2 - 100.0), lambda x: np.asarray(x, dtype=float)),
)


def list_initial_conditions():
    return ("burgers-paper", "multi-1", "multi-2", "multi-3", "multi-4", "firstorder-paper")


def get_initial_condition(name, nu=None):
    """Look up a built-in initial condition; ``burgers-paper`` needs nu."""
    if name == "burgers-paper":
        if nu is None:
            raise InvalidInputError("burgers-paper requires a viscosity nu")
        return _burgers_paper(nu)
    if name == "firstorder-paper":
        return _firstorder_paper()
    for ic in _MULTI:
        if ic.name == name:
            return ic
    raise InvalidInputError(f"unknown initial condition {name!r}; known: {list_initial_conditions()}")
