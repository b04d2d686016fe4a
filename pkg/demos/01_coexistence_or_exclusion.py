"""Two competitors, two outcomes.

Weak interspecific competition lets both species settle at a common level;
strong pressure of v on u drives u out while v fills its carrying capacity.
Run with ``python demos/01_coexistence_or_exclusion.py``.
"""

import numpy as np

from chemolab import CoefficientBundle, FieldState, Grid, Model, ModelParams, simulate
from chemolab import analysis, hypothesis

params = ModelParams(d1=1, d2=1, d3=1, chi1=0.1, chi2=0.1, k=1, l=1, lam=1)
grid = Grid((1.0,), (65,))
x = grid.coords[0]
u0 = 0.3 + 0.1 * np.cos(np.pi * x)
v0 = 0.4 - 0.15 * np.cos(2 * np.pi * x)

scenarios = {
    "weak competition": CoefficientBundle.constant(1, 2, 0.2, 1, 0.2, 2),
    "u outcompeted": CoefficientBundle.constant(1, 2, 2, 2, 0.5, 2),
}

for name, coeffs in scenarios.items():
    model = Model(params, coeffs, grid)
    report = hypothesis.evaluate(model.extrema, params)
    print(f"== {name}")
    print(f"   persistence condition h4: {report.h4.holds}, extinction conditions: {report.extinction_holds}")

    summary = simulate(model, FieldState(0.0, u0, v0), 60.0, sample_every=0.25)
    verdict = analysis.classify(analysis.tail_stats(summary, 0.2))
    s = verdict.stats
    print(f"   verdict {verdict.label}: u in [{s.l1_hat:.4g}, {s.L1_hat:.4g}], v in [{s.l2_hat:.4g}, {s.L2_hat:.4g}]")

    # a few rows of the trajectory, the same numbers `chemolab simulate` writes
    for t, umax, vmin in list(zip(summary.times, summary.max_u, summary.min_v))[::48]:
        print(f"   t={t:5.1f}  max u={umax:.3e}  min v={vmin:.4f}")
