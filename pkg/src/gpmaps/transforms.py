"""Builders that turn sampled trajectories into constraint systems.

Each experiment family has a builder producing a :class:`ConstraintSystem`
(the raw regression problem) and a problem wrapper bundling it with its
ground-truth map, evaluation points and bookkeeping for reports. The
relative-L2 metric and the RKHS-norm-growth existence diagnostic live here
as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import Burgers, Field1D, Grid1D, antiderivative, diff, get_initial_condition, pde_step
from .exceptions import InvalidInputError, SingularityError
from .gp import ConstraintSystem, FunctionalTerm, LinearFunctional, rkhs_norm_sq

__all__ = [
    "TransformProblem",
    "cole_hopf_truth",
    "cole_hopf_truth_fn",
    "first_order_truth",
    "first_order_truth_fn",
    "build_cole_hopf_ode",
    "build_cole_hopf_discrete",
    "build_cole_hopf_multi",
    "build_first_order",
    "relative_l2",
    "norm_growth_diagnostic",
    "corrupt_targets",
    "cole_hopf_problem",
    "cole_hopf_discrete_problem",
    "cole_hopf_multi_problem",
    "first_order_problem",
    "MULTI_IC_NAMES",
]

MULTI_IC_NAMES = ("multi-1", "multi-2", "multi-3", "multi-4")


@dataclass(frozen=True)
class TransformProblem:
    """One ready-to-fit regression problem plus its evaluation context."""

    name: str
    system: ConstraintSystem
    truth: object
    eval_points: np.ndarray
    xs: np.ndarray = None
    us: np.ndarray = None
    interior: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.eval_points, dtype=float)
        if self.truth is not None and pts.size == 0:
            raise InvalidInputError("eval_points must be nonempty when a truth oracle is present")
        object.__setattr__(self, "eval_points", pts)


def cole_hopf_truth(u, nu):
    """The unit-normalized exponential map taking heat-side data to Burgers-side data.

    Strictly decreasing, with value 1 at u = 0 and 0 at u = 1.
    """
    if not nu > 0:
        raise InvalidInputError(f"nu must be positive, got {nu}")
    u = np.asarray(u, dtype=float)
    denom = 1.0 - np.exp(-1.0 / (2.0 * nu))
    out = (np.exp(-u / (2.0 * nu)) - np.exp(-1.0 / (2.0 * nu))) / denom
    return float(out) if out.ndim == 0 else out


def cole_hopf_truth_fn(nu):
    """Truth with derivatives, as ``fn(u, order)`` for order in {0, 1, 2}."""
    denom = 1.0 - np.exp(-1.0 / (2.0 * nu))

    def fn(u, order=0):
        core = np.exp(-np.asarray(u, dtype=float) / (2.0 * nu)) / denom
        if order == 0:
            return core - np.exp(-1.0 / (2.0 * nu)) / denom
        return (-1.0 / (2.0 * nu)) ** order * core

    return fn


def first_order_truth(u):
    """Exponential-of-cubic map; equals 1 at u = 1."""
    u = np.asarray(u, dtype=float)
    out = np.exp((u**3 - 1.0) / 3.0)
    return float(out) if out.ndim == 0 else out


def first_order_truth_fn():
    """First-order truth with derivatives, as ``fn(u, order)``."""

    def fn(u, order=0):
        u = np.asarray(u, dtype=float)
        g = np.exp((u**3 - 1.0) / 3.0)
        if order == 0:
            return g
        if order == 1:
            return u**2 * g
        return (2.0 * u + u**4) * g

    return fn


def _bracketed(interior_functionals, nugget):
    """Assemble [dirac(0) | interior | dirac(1)] with targets (1, 0, ..., 0)."""
    functionals = (LinearFunctional.dirac(0.0), *interior_functionals, LinearFunctional.dirac(1.0))
    targets = np.zeros(len(functionals))
    targets[0] = 1.0
    return ConstraintSystem(functionals, targets, nugget=nugget)


def _ode_functional(ui, nu, ode_form):
    if ode_form == "appendix":
        return LinearFunctional((FunctionalTerm(ui, 2, nu), FunctionalTerm(ui, 1, 0.5)))
    if ode_form == "main_text":
        return LinearFunctional((FunctionalTerm(ui, 2, 0.5), FunctionalTerm(ui, 1, nu)))
    raise InvalidInputError(f"ode_form must be 'appendix' or 'main_text', got {ode_form!r}")


def build_cole_hopf_ode(u_samples, nu, ode_form="appendix", nugget=None):
    """ODE-limit constraint system: second-order map equation at each sample.

    The default 'appendix' form enforces nu*D'' + D'/2 = 0, the equation the
    exponential truth actually solves; 'main_text' swaps the coefficients
    (D''/2 + nu*D' = 0). The two coincide at nu = 1/2, the value used in
    every built-in experiment.
    """
    u = np.asarray(u_samples, dtype=float)
    if u.size == 0:
        raise InvalidInputError("need at least one sample")
    if not nu > 0:
        raise InvalidInputError(f"nu must be positive, got {nu}")
    return _bracketed([_ode_functional(ui, nu, ode_form) for ui in u], nugget)


def build_cole_hopf_discrete(v0, nu, h, nugget=None, drift_correction=True):
    """Discrete-stepper constraint system from a gridded initial field.

    One Euler step of the diffusion on the map side is matched against the
    map applied after one Euler step of the advecting side; the spatial
    second difference of the composite is expanded into pure point
    evaluations, so each interior constraint touches exactly four locations:
    the three-point stencil through the antiderivative values and the
    stepped antiderivative value.

    Antiderivatives are anchored at the grid's left edge. Re-integrating the
    stepped field from that edge loses the O(h) motion of the potential's
    own left-edge value; ``drift_correction`` restores it from the data
    (h * (nu*v0' - v0^2/2) at the edge), without which the system encodes a
    perturbed equation whose solution is O(1)-biased no matter how small h.
    """
    if not isinstance(v0, Field1D):
        raise InvalidInputError("v0 must be a Field1D")
    n = v0.grid.n
    if n < 5:
        raise InvalidInputError(f"need at least 5 grid nodes, got {n}")
    x_lo = v0.grid.x0
    u0 = antiderivative(v0, 0.0, x_lo).values
    v1 = pde_step(Burgers(nu), v0, h)
    drift = 0.0
    if drift_correction:
        drift = h * (nu * diff(v0, 1).values[0] - 0.5 * v0.values[0] ** 2)
    u1 = antiderivative(v1, drift, x_lo).values
    dx = v0.grid.dx
    c = h * nu / dx**2
    interior = []
    for i in range(1, n - 1):
        interior.append(
            LinearFunctional(
                (
                    FunctionalTerm(u0[i - 1], 0, c),
                    FunctionalTerm(u0[i], 0, 1.0 - 2.0 * c),
                    FunctionalTerm(u0[i + 1], 0, c),
                    FunctionalTerm(u1[i], 0, -1.0),
                )
            )
        )
    if len(interior) < 3:
        raise InvalidInputError("fewer than 3 usable interior points")
    return _bracketed(interior, nugget)


def build_cole_hopf_multi(ic_names, points_per_ic, nu, nugget=None):
    """Pooled ODE constraints over several initial conditions, one shared anchor pair."""
    if points_per_ic < 1:
        raise InvalidInputError("points_per_ic must be >= 1")
    interior = []
    for name in ic_names:
        ic = get_initial_condition(name, nu=nu)
        _, u = ic.sample(points_per_ic)
        interior.extend(_ode_functional(ui, nu, "appendix") for ui in u)
    return _bracketed(interior, nugget)


def build_first_order(u_samples, nugget=None):
    """First-order constraint system: G'(u)/u^2 - G(u) = 0 with anchor G(1) = 1."""
    u = np.asarray(u_samples, dtype=float)
    if u.size == 0:
        raise InvalidInputError("need at least one sample")
    if np.any(u == 0.0):
        raise SingularityError("samples must be nonzero (the constraint divides by u^2)")
    functionals = [LinearFunctional.dirac(1.0)]
    for ui in u:
        functionals.append(
            LinearFunctional((FunctionalTerm(ui, 1, 1.0 / ui**2), FunctionalTerm(ui, 0, -1.0)))
        )
    targets = np.zeros(len(functionals))
    targets[0] = 1.0
    return ConstraintSystem(tuple(functionals), targets, nugget=nugget)


def relative_l2(learned, truth, eval_points):
    """Discrete relative L2 distance ||learned - truth||_2 / ||truth||_2."""
    pts = np.asarray(eval_points, dtype=float)
    if pts.size == 0:
        raise InvalidInputError("eval_points must be nonempty")
    tv = np.asarray(truth(pts), dtype=float)
    denom = np.linalg.norm(tv)
    if denom == 0.0:
        raise InvalidInputError("truth vanishes on all evaluation points")
    lv = learned.evaluate(pts) if hasattr(learned, "evaluate") else np.asarray(learned(pts), float)
    return float(np.linalg.norm(lv - tv) / denom)


def norm_growth_diagnostic(builder, sample_counts, kernel, nugget=1e-10):
    """RKHS norm of the fitted map as the constraint count grows.

    A bounded sequence is evidence that a map matching the constraints
    exists; unbounded growth is evidence it does not. Returns the raw
    (N, norm) pairs; no classification decision is made here.
    """
    counts = list(sample_counts)
    if len(counts) == 0:
        raise InvalidInputError("sample_counts must be nonempty")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise InvalidInputError("sample_counts must be strictly increasing")
    out = []
    for n in counts:
        system = builder(n)
        system = ConstraintSystem(system.functionals, system.targets, nugget=nugget)
        out.append((n, float(np.sqrt(rkhs_norm_sq(system, kernel)))))
    return out


def corrupt_targets(system, indices, seed=0, scale=1.0):
    """Replace the selected targets with Gaussian noise.

    Noise is the canonical inconsistent right-hand side: no map of the input
    alone can track independent values at ever-closer sample points, so the
    diagnostic norm of the corrupted system grows without bound.
    """
    rng = np.random.default_rng(seed)
    y = system.targets.copy()
    y[np.asarray(indices, dtype=int)] = scale * rng.standard_normal(len(indices))
    return ConstraintSystem(system.functionals, y, nugget=system.nugget)


def _anchored_eval(u, eval_domain):
    """Evaluation points: data inside the anchored unit interval, or everything.

    The reported error of the anchored experiments is measured between the
    two uniqueness constraints (u in [0, 1]) where the map is normalized;
    'full' evaluates on every collocation value.
    """
    if eval_domain == "full":
        return u
    if eval_domain != "anchored":
        raise InvalidInputError(f"eval_domain must be 'anchored' or 'full', got {eval_domain!r}")
    sel = (u >= 0.0) & (u <= 1.0)
    return u[sel] if np.any(sel) else u


def cole_hopf_problem(n_points, nu=0.5, ic_name="burgers-paper", ode_form="appendix",
                      nugget=None, eval_domain="anchored"):
    """ODE-path problem on one initial condition, collocated at interior x-points."""
    if n_points < 1:
        raise InvalidInputError("n_points must be >= 1")
    ic = get_initial_condition(ic_name, nu=nu)
    xs = np.linspace(ic.x_lo, ic.x_hi, n_points + 2)[1:-1]
    us = ic.u0(xs)
    system = build_cole_hopf_ode(us, nu, ode_form=ode_form, nugget=nugget)
    return TransformProblem(
        name="cole-hopf",
        system=system,
        truth=lambda u: cole_hopf_truth(u, nu),
        eval_points=_anchored_eval(us, eval_domain),
        xs=xs,
        us=us,
        interior=np.arange(1, len(system) - 1),
        meta={"nu": nu, "ic": ic_name, "ode_form": ode_form},
    )


def cole_hopf_discrete_problem(dx=0.01, h=1e-4, nu=0.5, ic_name="burgers-paper",
                               nugget=None, eval_domain="anchored"):
    """Discrete-stepper problem on a uniform grid over the IC's interval."""
    ic = get_initial_condition(ic_name, nu=nu)
    n = int(round((ic.x_hi - ic.x_lo) / dx)) + 1
    grid = Grid1D(ic.x_lo, dx, n)
    v0 = Field1D(grid, ic.v0(grid.xs))
    system = build_cole_hopf_discrete(v0, nu, h, nugget=nugget)
    xs = grid.xs[1:-1]
    us = antiderivative(v0, 0.0, grid.x0).values[1:-1]
    return TransformProblem(
        name="cole-hopf-discrete",
        system=system,
        truth=lambda u: cole_hopf_truth(u, nu),
        eval_points=_anchored_eval(us, eval_domain),
        xs=xs,
        us=us,
        interior=np.arange(1, len(system) - 1),
        meta={"nu": nu, "ic": ic_name, "h": h, "dx": dx},
    )


def cole_hopf_multi_problem(ic_names=MULTI_IC_NAMES, points_per_ic=101, nu=0.5, nugget=None):
    """Pooled problem over several initial conditions; evaluated on the full union."""
    system = build_cole_hopf_multi(ic_names, points_per_ic, nu, nugget=nugget)
    xs, us, labels = [], [], []
    for name in ic_names:
        ic = get_initial_condition(name, nu=nu)
        x, u = ic.sample(points_per_ic)
        xs.append(x)
        us.append(u)
        labels.extend([name] * points_per_ic)
    xs = np.concatenate(xs)
    us = np.concatenate(us)
    return TransformProblem(
        name="cole-hopf-multi",
        system=system,
        truth=lambda u: cole_hopf_truth(u, nu),
        eval_points=us,
        xs=xs,
        us=us,
        interior=np.arange(1, len(system) - 1),
        meta={"nu": nu, "ics": tuple(ic_names), "labels": tuple(labels)},
    )


def first_order_problem(n_points=100, ic_name="firstorder-paper", nugget=None):
    """First-order problem sampled evenly over the IC's interval."""
    if n_points < 1:
        raise InvalidInputError("n_points must be >= 1")
    ic = get_initial_condition(ic_name)
    xs, us = ic.sample(n_points)
    system = build_first_order(us, nugget=nugget)
    return TransformProblem(
        name="first-order",
        system=system,
        truth=first_order_truth,
        eval_points=us,
        xs=xs,
        us=us,
        interior=np.arange(1, len(system)),
        meta={"ic": ic_name},
    )
