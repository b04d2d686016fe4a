"""A seasonal growth rate and the periodic state it selects.

The intrinsic growth rate of u swings by 20% with period 5. Iterating the
period map of the PDE lands on a spatially flat periodic state, which is the
periodic orbit of the competition ODE.
"""

import numpy as np

from chemolab import CoefficientBundle, CoefficientField, Grid, Model, ModelParams
from chemolab import analysis
from chemolab.ode import periodic_orbit, rhs_lv

params = ModelParams(1, 1, 1, 0.1, 0.1, 1, 1, 1)
coeffs = CoefficientBundle.constant(1, 2, 0.2, 1, 0.2, 2).replace(a0=CoefficientField(1.0, 0.2, 5.0))
model = Model(params, coeffs, Grid((1.0,), (65,)))
x = model.grid.coords[0]

res = analysis.poincare_fixed_point(model, (0.4 + 0.05 * np.cos(np.pi * x), 0.5 + 0 * x), tol=1e-8)
print("Picard residuals:", " ".join(f"{r:.1e}" for r in res.history))
print(f"PDE fixed point: u = {res.state.u.mean():.8f} (spread {np.ptp(res.state.u):.1e}), v = {res.state.v.mean():.8f}")

y, r, it = periodic_orbit(lambda y, t: rhs_lv(y, t, coeffs), [0.4, 0.5], 0.0, 5.0, 1e-3)
print(f"ODE orbit:       u = {y[0]:.8f}, v = {y[1]:.8f}  ({it} periods)")
print("inside the eventual upper bounds:", res.within_upper_bounds)
