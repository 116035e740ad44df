"""Map between initial conditions of two first-order equations.

The source equation is u_t = u_x - 1/u^2, the target w_t = w_x - w. The
one-step argument gives the map equation G'(u)/u^2 = G(u); being first order
it needs a single anchor, G(1) = 1. A hundred samples of the source's
initial condition recover the exact map exp((u^3 - 1)/3) to a few parts in
a million without touching the kernel lengthscale.
"""

import numpy as np

from gpmaps import Matern52, fit, relative_l2
from gpmaps.transforms import first_order_problem, first_order_truth

problem = first_order_problem(100)
interp = fit(problem.system, Matern52(1.0))
print("relative L2 vs exp((u^3-1)/3):", relative_l2(interp, problem.truth, problem.eval_points))

for u in (1.0, 1.2, 1.5, 1.7):
    print(f"  G({u}) = {interp(u):.8f}   truth {first_order_truth(u):.8f}")

# the fitted map satisfies the defining equation between samples too
mid = 0.5 * (problem.us[:-1] + problem.us[1:])
resid = interp.evaluate(mid, 1) / mid**2 - interp.evaluate(mid)
print("max equation residual between samples:", np.abs(resid).max())
