"""Numerical laboratory for a two-species chemotaxis competition system.

Simulates

    u_t = d1 Lap u - chi1 div(u grad w) + u (a0 - a1 u - a2 v)
    v_t = d2 Lap v - chi2 div(v grad w) + v (b0 - b1 u - b2 v)
      0 = d3 Lap w + k u + l v - lambda w

with homogeneous Neumann conditions on a 1D interval or 2D rectangle, and
checks the closed-form boundedness, persistence and extinction conditions
against the simulated long-time behaviour.
"""

from .model import (CoefficientBundle, CoefficientField, ExtremaTable, FieldState, Grid, Model,
                    ModelParams, bundle_extrema, coeff_extrema, eval_coefficient)
from .pde import StepperConfig, simulate

__all__ = [
    "CoefficientBundle", "CoefficientField", "ExtremaTable", "FieldState", "Grid", "Model", "ModelParams",
    "StepperConfig", "bundle_extrema", "coeff_extrema", "eval_coefficient", "simulate",
]

__version__ = "0.1.0"
