"""Kernel definitions with closed-form mixed derivatives.

Three kernels cover every regression problem in this package:

* :class:`Matern52` -- the single-lengthscale Matern-2.5 kernel on scalars.
  Its radial profile is four times continuously differentiable at zero lag,
  so mixed partials up to order (2, 2) exist in closed form; these are what
  derivative-constraint Gram matrices are built from.
* :class:`HomogeneousPolynomial` -- K(s, t) = (s . t)^d on small vectors.
  Its RKHS is the span of the degree-d homogeneous monomials, which makes an
  explicit feature-space treatment possible (see :func:`homogeneous_features`).
* :class:`Constant` -- K(x, y) = gamma, the prior for scalar parameters.

All derivative formulas are hand-derived and regression-tested against
central finite differences; Gram assembly is the hot path and has to be
exact and deterministic, so no autodiff or numeric differentiation is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import InvalidInputError, UnsupportedDerivativeError

__all__ = [
    "Matern52",
    "HomogeneousPolynomial",
    "Constant",
    "KernelSpec",
    "k_eval",
    "k_deriv",
    "homogeneous_features",
    "homogeneous_norm_sq",
    "kernel_to_config",
    "kernel_from_config",
]


@dataclass(frozen=True)
class Matern52:
    """Matern kernel with smoothness 5/2 and lengthscale ``theta``."""

    theta: float = 1.0

    def __post_init__(self):
        if not self.theta > 0:
            raise InvalidInputError(f"lengthscale must be positive, got {self.theta}")


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """K(s, t) = (s . t)^degree on vectors of length ``input_dim``."""

    degree: int = 4
    input_dim: int = 2

    def __post_init__(self):
        if self.degree < 1 or int(self.degree) != self.degree:
            raise InvalidInputError(f"degree must be a positive integer, got {self.degree}")
        if self.input_dim < 1:
            raise InvalidInputError(f"input_dim must be positive, got {self.input_dim}")


@dataclass(frozen=True)
class Constant:
    """K(x, y) = gamma > 0 for every pair of inputs."""

    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidInputError(f"gamma must be positive, got {self.gamma}")


KernelSpec = Matern52 | HomogeneousPolynomial | Constant


def _matern_profile_deriv(n, gap, theta):
    """n-th derivative (n <= 4) of the Matern-5/2 profile w.r.t. the signed gap.

    Zero-lag values are the analytic limits: odd orders vanish (sign(0) = 0)
    and the even orders reduce to -5/(3 theta^2) and 25/theta^4.
    """
    gap = np.asarray(gap, dtype=float)
    s = np.sqrt(5.0) / theta
    r = np.abs(gap)
    sr = s * r
    e = np.exp(-sr)
    if n == 0:
        return (1.0 + sr + sr * sr / 3.0) * e
    if n == 1:
        return np.sign(gap) * (-(s * s) * r / 3.0) * (1.0 + sr) * e
    if n == 2:
        return -(s * s) / 3.0 * (1.0 + sr - sr * sr) * e
    if n == 3:
        return np.sign(gap) * (s ** 4) * r / 3.0 * (3.0 - sr) * e
    if n == 4:
        return (s ** 4) / 3.0 * (3.0 - 5.0 * sr + sr * sr) * e
    raise UnsupportedDerivativeError(f"Matern-5/2 supplies derivatives up to total order 4, got {n}")


def matern_deriv(x, y, a, b, theta):
    """d^a/dx^a d^b/dy^b of the Matern-5/2 kernel, vectorized over x and y."""
    return (-1.0) ** b * _matern_profile_deriv(a + b, np.asarray(x, float) - np.asarray(y, float), theta)


def _check_vector(spec, v, name):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != spec.input_dim:
        raise InvalidInputError(
            f"{name} must be a vector of length {spec.input_dim}, got shape {v.shape}"
        )
    return v


def k_eval(spec, x, y):
    """Evaluate K(x, y) for any kernel spec.

    Matern52 and Constant take scalars (arrays broadcast elementwise);
    HomogeneousPolynomial takes vectors of length ``input_dim``.
    """
    if isinstance(spec, Matern52):
        return _matern_profile_deriv(0, np.asarray(x, float) - np.asarray(y, float), spec.theta)
    if isinstance(spec, Constant):
        out = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))[0]
        return np.full_like(out, spec.gamma) if out.ndim else float(spec.gamma)
    if isinstance(spec, HomogeneousPolynomial):
        xv = _check_vector(spec, x, "x")
        yv = _check_vector(spec, y, "y")
        return float(np.dot(xv, yv) ** spec.degree)
    raise InvalidInputError(f"unknown kernel spec {spec!r}")


def k_deriv(spec, x, y, a, b):
    """Mixed partial d^a/dx^a d^b/dy^b K(x, y).

    Matern52 supports all a, b <= 2. Constant has identically zero
    derivatives. The polynomial kernel is handled in feature space
    (:func:`homogeneous_features`), so only (a, b) = (0, 0) is exposed here.
    """
    if a not in (0, 1, 2) or b not in (0, 1, 2):
        raise UnsupportedDerivativeError(f"derivative orders must lie in {{0,1,2}}, got ({a},{b})")
    if isinstance(spec, Matern52):
        return matern_deriv(x, y, a, b, spec.theta)
    if isinstance(spec, Constant):
        if a == 0 and b == 0:
            return k_eval(spec, x, y)
        return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))[()] if (np.shape(x) or np.shape(y)) else 0.0
    if isinstance(spec, HomogeneousPolynomial):
        if a == 0 and b == 0:
            return k_eval(spec, x, y)
        raise UnsupportedDerivativeError(
            "HomogeneousPolynomial derivatives are handled through its feature expansion"
        )
    raise InvalidInputError(f"unknown kernel spec {spec!r}")


def homogeneous_features(spec, points):
    """Monomial features of a 2-D homogeneous polynomial kernel.

    For degree d, maps each point (u, v) to (u^d, u^(d-1) v, ..., v^d); with
    coefficient vector c the function H(u, v) = sum_k c_k u^(d-k) v^k carries
    the exact RKHS norm of :func:`homogeneous_norm_sq`.

    Parameters
    ----------
    points : array of shape (n, 2) or (2,)

    Returns
    -------
    array of shape (n, d + 1)
    """
    if spec.input_dim != 2:
        raise InvalidInputError("feature expansion is provided for 2-D inputs")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise InvalidInputError(f"expected points of dimension 2, got {pts.shape[1]}")
    d = spec.degree
    u, v = pts[:, 0], pts[:, 1]
    return np.stack([u ** (d - k) * v ** k for k in range(d + 1)], axis=1)


def homogeneous_norm_sq(spec, coeffs):
    """Exact squared RKHS norm of H = sum_k c_k u^(d-k) v^k under (s.t)^d.

    The monomials u^(d-k) v^k have squared norm 1/binom(d, k); the norm of a
    combination is the weighted coefficient sum since they are orthogonal.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    d = spec.degree
    if coeffs.shape != (d + 1,):
        raise InvalidInputError(f"expected {d + 1} coefficients, got shape {coeffs.shape}")
    return float(np.sum(coeffs ** 2 / np.array([comb(d, k) for k in range(d + 1)])))


def kernel_to_config(spec):
    """Serialize a kernel spec to the CLI config dictionary form."""
    if isinstance(spec, Matern52):
        return {"kind": "matern52", "theta": spec.theta}
    if isinstance(spec, HomogeneousPolynomial):
        return {"kind": "poly", "degree": spec.degree, "input_dim": spec.input_dim}
    if isinstance(spec, Constant):
        return {"kind": "constant", "gamma": spec.gamma}
    raise InvalidInputError(f"unknown kernel spec {spec!r}")


def kernel_from_config(cfg):
    """Inverse of :func:`kernel_to_config`."""
    kind = cfg.get("kind")
    if kind == "matern52":
        return Matern52(theta=float(cfg["theta"]))
    if kind == "poly":
        return HomogeneousPolynomial(degree=int(cfg["degree"]), input_dim=int(cfg.get("input_dim", 2)))
    if kind == "constant":
        return Constant(gamma=float(cfg["gamma"]))
    raise InvalidInputError(f"unknown kernel kind {kind!r}")
