"""Constrained RKHS regression on linear functionals of the unknown map.

A regression problem is a list of :class:`LinearFunctional` constraints
``phi_i(D) = Y_i`` on an unknown scalar map ``D``. Each functional is a
weighted sum of point evaluations of ``D`` or of its first two derivatives,
so the Gram matrix of the constraints only needs the kernel's closed-form
mixed partials. The relaxed minimum-norm solution

    D(u) = K(u, phi) (K(phi, phi) + lam I)^{-1} Y

is computed by a dense symmetric positive-definite factorization; the nugget
``lam`` keeps routinely ill-conditioned derivative Grams factorizable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .exceptions import InvalidInputError, SingularSystemError
from .kernels import k_deriv, kernel_from_config, kernel_to_config

__all__ = [
    "FunctionalTerm",
    "LinearFunctional",
    "ConstraintSystem",
    "Interpolant",
    "assemble_gram",
    "fit",
    "rkhs_norm_sq",
    "error_bound_sigma",
    "default_nugget",
    "interpolant_to_config",
    "interpolant_from_config",
]

#: Relative scale of the automatic nugget: lam = NUGGET_SCALE * trace(G) / M.
NUGGET_SCALE = 1e-8

#: Number of tenfold nugget escalations attempted before giving up.
MAX_JITTER_ESCALATIONS = 4


@dataclass(frozen=True)
class FunctionalTerm:
    """One ``weight * D^(deriv_order)(location)`` term of a linear functional."""

    location: float
    deriv_order: int = 0
    weight: float = 1.0

    def __post_init__(self):
        if self.deriv_order not in (0, 1, 2):
            raise InvalidInputError(f"deriv_order must be 0, 1 or 2, got {self.deriv_order}")
        if not np.isfinite(self.weight) or not np.isfinite(self.location):
            raise InvalidInputError("functional terms must have finite location and weight")


@dataclass(frozen=True)
class LinearFunctional:
    """A finite weighted sum of point evaluations with derivative orders."""

    terms: tuple

    def __post_init__(self):
        if len(self.terms) == 0:
            raise InvalidInputError("a linear functional needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def dirac(cls, location, weight=1.0):
        """The pure point-evaluation functional ``weight * D(location)``."""
        return cls((FunctionalTerm(location, 0, weight),))

    @classmethod
    def of_terms(cls, *spec):
        """Build from ``(location, deriv_order, weight)`` triples."""
        return cls(tuple(FunctionalTerm(*t) for t in spec))

    def apply(self, fn):
        """Apply the functional to ``fn(u, deriv_order)``."""
        return float(sum(t.weight * fn(t.location, t.deriv_order) for t in self.terms))


@dataclass(frozen=True)
class ConstraintSystem:
    """Ordered constraint functionals, their targets and the nugget.

    ``nugget=None`` means "auto": resolve to ``NUGGET_SCALE * trace(G) / M``
    once the Gram matrix of the kernel in use is known.
    """

    functionals: tuple
    targets: np.ndarray
    nugget: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "functionals", tuple(self.functionals))
        y = np.asarray(self.targets, dtype=float)
        if y.ndim != 1 or y.shape[0] != len(self.functionals):
            raise InvalidInputError(
                f"targets must match functionals: {y.shape} vs {len(self.functionals)}"
            )
        object.__setattr__(self, "targets", y)
        if self.nugget is not None and not self.nugget > 0:
            raise InvalidInputError(f"nugget must be positive, got {self.nugget}")

    def __len__(self):
        return len(self.functionals)


def _flatten(functionals):
    """Stack all terms of all functionals into parallel arrays."""
    locs, orders, weights, owner = [], [], [], []
    for i, f in enumerate(functionals):
        for t in f.terms:
            locs.append(t.location)
            orders.append(t.deriv_order)
            weights.append(t.weight)
            owner.append(i)
    return (
        np.asarray(locs, dtype=float),
        np.asarray(orders, dtype=int),
        np.asarray(weights, dtype=float),
        np.asarray(owner, dtype=int),
    )


def functional_cross(kernel, functionals, points, point_order=0):
    """Matrix of ``phi_j`` applied to ``d^q/du^q K(u_p, .)``.

    Entry (p, j) is ``sum_t w_jt * k_deriv(points[p], loc_jt, point_order, a_jt)``.
    This is both the evaluation map of an interpolant (times its coefficient
    vector) and the K(u, phi) vector of the representer formula.
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    m = len(functionals)
    locs, orders, weights, owner = _flatten(functionals)
    out = np.zeros((points.shape[0], m))
    for b in np.unique(orders):
        sel = orders == b
        block = k_deriv(kernel, points[:, None], locs[sel][None, :], point_order, int(b))
        block = np.asarray(block, dtype=float) * weights[sel][None, :]
        np.add.at(out.T, owner[sel], block.T)
    return out


def assemble_gram(functionals, kernel):
    """Gram matrix with entries [phi_i, K phi_j], symmetrized after assembly."""
    m = len(functionals)
    locs, orders, weights, owner = _flatten(functionals)
    gram = np.zeros((m, m))
    present = np.unique(orders)
    for a in present:
        ia = np.nonzero(orders == a)[0]
        for b in present:
            ib = np.nonzero(orders == b)[0]
            block = k_deriv(kernel, locs[ia][:, None], locs[ib][None, :], int(a), int(b))
            block = np.asarray(block, dtype=float) * weights[ia][:, None] * weights[ib][None, :]
            np.add.at(gram, (owner[ia][:, None], owner[ib][None, :]), block)
    return 0.5 * (gram + gram.T)


def default_nugget(gram):
    """Automatic nugget: ``NUGGET_SCALE * trace(G) / M`` (floored away from zero)."""
    m = gram.shape[0]
    return max(NUGGET_SCALE * float(np.trace(gram)) / max(m, 1), 1e-300)


def _factor_with_escalation(gram, lam):
    """Cholesky of G + lam*I, escalating lam tenfold on failure."""
    m = gram.shape[0]
    current = lam
    for _ in range(MAX_JITTER_ESCALATIONS + 1):
        try:
            cf = cho_factor(gram + current * np.eye(m), lower=True)
            return cf, current
        except LinAlgError:
            current *= 10.0
    cond = float(np.linalg.cond(gram + lam * np.eye(m)))
    raise SingularSystemError(
        f"constraint Gram not factorizable after {MAX_JITTER_ESCALATIONS} jitter escalations "
        f"(nugget reached {current / 10:.3e})",
        condition=cond,
    )


def _solve(system, kernel):
    """Shared solve path: returns (alpha, gram, lam_used, cho_factor)."""
    gram = assemble_gram(system.functionals, kernel)
    lam = system.nugget if system.nugget is not None else default_nugget(gram)
    cf, lam_used = _factor_with_escalation(gram, lam)
    alpha = cho_solve(cf, system.targets)
    return alpha, gram, lam_used, cf


@dataclass(frozen=True)
class Interpolant:
    """Representer-theorem solution: D(u) = sum_i alpha_i [phi_i, K(u, .)]."""

    kernel: object
    functionals: tuple
    coefficients: np.ndarray
    nugget: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "functionals", tuple(self.functionals))
        a = np.asarray(self.coefficients, dtype=float)
        if a.shape != (len(self.functionals),):
            raise InvalidInputError("coefficient vector must match the functional list")
        object.__setattr__(self, "coefficients", a)

    def evaluate(self, u, deriv_order=0):
        """Value (or derivative) of the fitted map at scalar or array ``u``."""
        if len(self.functionals) == 0:
            out = np.zeros_like(np.atleast_1d(np.asarray(u, dtype=float)))
            return float(out[0]) if np.isscalar(u) or np.ndim(u) == 0 else out
        cross = functional_cross(self.kernel, self.functionals, u, deriv_order)
        vals = cross @ self.coefficients
        return float(vals[0]) if np.isscalar(u) or np.ndim(u) == 0 else vals

    def __call__(self, u):
        return self.evaluate(u, 0)


def fit(system, kernel):
    """Solve (G + lam I) alpha = Y and wrap the result as an :class:`Interpolant`."""
    if len(system) == 0:
        return Interpolant(kernel, (), np.zeros(0))
    alpha, _, lam_used, _ = _solve(system, kernel)
    return Interpolant(kernel, system.functionals, alpha, nugget=lam_used)


def rkhs_norm_sq(system, kernel):
    """Regularized squared norm of the constrained minimizer: Y^T (G+lam I)^{-1} Y.

    This is also the optimal value of the relaxed problem, hence nondecreasing
    when constraints are appended and an upper-convergent estimate of the true
    map's squared RKHS norm when the constraints are consistent.
    """
    if len(system) == 0:
        return 0.0
    alpha, _, _, _ = _solve(system, kernel)
    return float(max(system.targets @ alpha, 0.0))


def error_bound_sigma(system, kernel, u):
    """Pointwise posterior deviation sigma(u) = sqrt(K(u,u) - k(u)^T (G+lam I)^{-1} k(u)).

    Multiplied by the RKHS norm of the unknown map this bounds the pointwise
    recovery error; it vanishes (up to nugget scale) at pure Dirac constraints.
    """
    pts = np.atleast_1d(np.asarray(u, dtype=float))
    prior = np.asarray(k_deriv(kernel, pts, pts, 0, 0), dtype=float)
    if len(system) == 0:
        out = np.sqrt(np.maximum(prior, 0.0))
    else:
        _, _, _, cf = _solve(system, kernel)
        kvec = functional_cross(kernel, system.functionals, pts, 0)
        reduction = np.einsum("pi,pi->p", kvec, cho_solve(cf, kvec.T).T)
        out = np.sqrt(np.maximum(prior - reduction, 0.0))
    return float(out[0]) if np.isscalar(u) or np.ndim(u) == 0 else out


def constraint_residuals(interp, system):
    """|phi_i(D) - Y_i| for every constraint of a fitted system."""

    def fn(loc, order):
        return interp.evaluate(loc, order)

    applied = np.array([f.apply(fn) for f in system.functionals])
    return np.abs(applied - system.targets)


def interpolant_to_config(interp):
    """JSON-ready dictionary: kernel spec, functional terms and coefficients."""
    return {
        "kernel": kernel_to_config(interp.kernel),
        "functionals": [
            [[t.location, t.deriv_order, t.weight] for t in f.terms] for f in interp.functionals
        ],
        "alpha": [float(a) for a in interp.coefficients],
        "nugget": interp.nugget,
    }


def interpolant_from_config(cfg):
    """Inverse of :func:`interpolant_to_config`."""
    kernel = kernel_from_config(cfg["kernel"])
    functionals = tuple(
        LinearFunctional(tuple(FunctionalTerm(loc, int(order), w) for loc, order, w in terms))
        for terms in cfg["functionals"]
    )
    return Interpolant(kernel, functionals, np.asarray(cfg["alpha"], dtype=float), nugget=float(cfg.get("nugget", 0.0)))
