"""Small deterministic optimizers: Armijo gradient descent and golden-section search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DivergedError, InvalidInputError

__all__ = ["DescentConfig", "DescentResult", "gradient_descent", "golden_section"]

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DescentConfig:
    max_iters: int = 100_000
    grad_tol: float = 1e-8
    step_tol: float = 1e-16
    init_step: float = 1.0
    shrink: float = 0.5
    grow: float = 1.3
    armijo: float = 1e-4


@dataclass
class DescentResult:
    x: np.ndarray
    loss_trace: list
    iterations: int
    converged: bool
    reason: str = ""


def gradient_descent(loss_fn, grad_fn, x0, config=None, precond=None):
    """Gradient descent with backtracking (Armijo) line search.

    ``precond``, if given, is a fixed positive diagonal applied to the
    gradient to form the search direction; this is plain descent in linearly
    rescaled coordinates and keeps the accepted-step loss trace
    nonincreasing either way.
    """
    cfg = config or DescentConfig()
    x = np.asarray(x0, dtype=float).copy()
    f = float(loss_fn(x))
    if not np.isfinite(f):
        raise DivergedError("non-finite loss at the initial point", trace=[f])
    trace = [f]
    step = cfg.init_step
    reason = "max_iters"
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = np.asarray(grad_fn(x), dtype=float)
        if not np.all(np.isfinite(g)):
            raise DivergedError("non-finite gradient", trace=trace)
        if np.max(np.abs(g)) <= cfg.grad_tol:
            converged, reason = True, "grad_tol"
            break
        d = g if precond is None else precond * g
        slope = float(g @ d)
        accepted = False
        while step > cfg.step_tol:
            x_new = x - step * d
            f_new = float(loss_fn(x_new))
            if np.isfinite(f_new) and f_new <= f - cfg.armijo * step * slope:
                accepted = True
                break
            step *= cfg.shrink
        if not accepted:
            converged, reason = True, "step_tol"
            break
        x, f = x_new, f_new
        trace.append(f)
        step *= cfg.grow
    return DescentResult(x=x, loss_trace=trace, iterations=it, converged=converged, reason=reason)


def golden_section(fn, lo, hi, iters, seed_points=()):
    """Golden-section minimization on [lo, hi], tracking the best point ever seen.

    ``seed_points`` are extra (x, f) pairs that compete for the returned
    minimum, so refinement can never return something worse than its bracket.
    """
    if not hi > lo:
        raise InvalidInputError(f"need hi > lo, got [{lo}, {hi}]")
    best = min(seed_points, key=lambda p: p[1]) if seed_points else None
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for x, fx in ((c, fc), (d, fd)):
        if best is None or fx < best[1]:
            best = (x, fx)
    for _ in range(max(iters - 2, 0)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
            if fc < best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
            if fd < best[1]:
                best = (d, fd)
    return best
