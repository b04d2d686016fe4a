"""Reference ODE systems and a fixed-step RK4 integrator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CoefficientBundle, ModelParams, temporal_profile


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), *state_shape)

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]


def integrate_rk4(rhs, y0, t0: float, t1: float, dt: float, record_every: int = 1) -> Trajectory:
    """Classical RK4 with ``n = ceil((t1 - t0) / dt)`` equal steps.

    ``rhs(y, t)`` may act on arrays of any shape, so independent initial
    conditions can be integrated side by side. Every ``record_every``-th step
    is kept; ``t0`` and ``t1`` are always among the samples.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    n = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    h = (t1 - t0) / n
    y = np.array(y0, dtype=float)
    ts, ys = [t0], [y.copy()]
    for i in range(n):
        t = t0 + i * h
        k1 = rhs(y, t)
        k2 = rhs(y + h / 2 * k1, t + h / 2)
        k3 = rhs(y + h / 2 * k2, t + h / 2)
        k4 = rhs(y + h * k3, t + h)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite state at t={t + h:.17g}")
        if (i + 1) % record_every == 0 or i == n - 1:
            ts.append(t0 + (i + 1) * h)
            ys.append(y.copy())
    return Trajectory(np.array(ts), np.array(ys))


def rhs_comparison(s, t, coeffs: CoefficientBundle, params: ModelParams):
    """Right-hand side of the four-dimensional comparison system.

    ``s = (u_bar, u_under, v_bar, v_under)`` (leading axis). Coefficients enter
    through their spatial extrema at time ``t``.
    """
    prof = temporal_profile(coeffs)
    lo, hi = prof.inf_values(t), prof.sup_values(t)
    a0i, a1i, a2i, b0i, b1i, b2i = lo
    a0s, a1s, a2s, b0s, b1s, b2s = hi
    ub, uu, vb, vu = s
    k, l, d3 = params.k, params.l, params.d3
    spread = k * ub + l * vb - k * uu - l * vu
    c1, c2 = params.chi1 / d3, params.chi2 / d3
    return np.array([
        c1 * ub * spread + ub * (a0s - a1i * ub - a2i * vu),
        -c1 * uu * spread + uu * (a0i - a1s * uu - a2s * vb),
        c2 * vb * spread + vb * (b0s - b2i * vb - b1i * uu),
        -c2 * vu * spread + vu * (b0i - b2s * vu - b1s * ub),
    ])


def _homogeneous_values(coeffs: CoefficientBundle, t):
    prof = temporal_profile(coeffs)
    if not prof.space_constant:
        raise ValueError("coefficients must be spatially constant")
    return prof.center_values(t)


def rhs_lv(y, t, coeffs: CoefficientBundle):
    """Time-dependent Lotka-Volterra competition law, ``y = (u, v)``."""
    a0, a1, a2, b0, b1, b2 = _homogeneous_values(coeffs, t)
    u, v = y
    return np.array([u * (a0 - a1 * u - a2 * v), v * (b0 - b1 * u - b2 * v)])


def rhs_homogeneous(y, t, coeffs: CoefficientBundle, params: ModelParams):
    """Spatially homogeneous reduction of the chemotaxis system.

    Chemotaxis drops out for homogeneous data, so this is the competition law;
    the signal follows algebraically (see :func:`homogeneous_signal`).
    """
    return rhs_lv(y, t, coeffs)


def homogeneous_signal(u, v, params: ModelParams):
    return (params.k * np.asarray(u) + params.l * np.asarray(v)) / params.lam


def periodic_orbit(rhs, y0, t0: float, period: float, dt: float, tol: float = 1e-12, max_iter: int = 200):
    """Fixed point of the period map of ``rhs`` by Picard iteration.

    Returns ``(y_star, residual, iterations)``.
    """
    y = np.array(y0, dtype=float)
    res = math.inf
    for it in range(1, max_iter + 1):
        y_next = integrate_rk4(rhs, y, t0, t0 + period, dt, record_every=10 ** 9).final
        res = float(np.max(np.abs(y_next - y)))
        y = y_next
        if res <= tol:
            return y, res, it
    return y, res, max_iter
