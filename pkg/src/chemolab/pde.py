"""IMEX time stepping of the two species equations.

One step from (u, v, w) at time t:

1. transport: ``(I - dt d Lap) u* = u - dt div(chi u grad w)`` with the
   chemotactic flux upwinded on faces (implicit diffusion, explicit drift);
2. reaction: the pointwise competition law advanced over [t, t + dt] with
   one classical RK4 step;
3. the signal w is re-solved from the new densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elliptic import elliptic_operator, neumann_laplacian, residual_norm, solve_w
from .model import FieldState, Grid, Model

BLOWUP_LEVEL = 1e12


@dataclass(frozen=True)
class StepperConfig:
    dt_max: float = 0.01
    safety: float = 0.9
    tol_neg: float = 1e-12
    clamp_small: bool = True

    def __post_init__(self):
        if not self.dt_max > 0:
            raise ValueError("dt_max must be > 0")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")


class SimulationError(RuntimeError):
    def __init__(self, message, t, summary=None):
        super().__init__(f"{message} at t={t:.17g}")
        self.t = t
        self.summary = summary


class BlowUpError(SimulationError):
    pass


class PositivityError(SimulationError):
    pass


@lru_cache(maxsize=64)
def _control_widths(grid: Grid, axis: int) -> np.ndarray:
    n, h = grid.counts[axis], grid.spacing[axis]
    widths = np.full(n, h)
    widths[[0, -1]] = h / 2
    shape = [1] * grid.dim
    shape[axis] = n
    return widths.reshape(shape)


def chemotaxis_flux(grid: Grid, density: np.ndarray, w: np.ndarray, chi: float) -> tuple[np.ndarray, ...]:
    """Chemotactic flux ``chi * rho * dw/dn`` on the interior faces of each axis.

    The density is taken from the upwind node, as set by the sign of the face
    gradient of ``w``. Boundary faces carry no flux and are not stored.
    """
    fluxes = []
    for axis, h in enumerate(grid.spacing):
        grad = np.diff(w, axis=axis) / h
        lo = np.take(density, np.arange(density.shape[axis] - 1), axis=axis)
        hi = np.take(density, np.arange(1, density.shape[axis]), axis=axis)
        fluxes.append(chi * np.where(grad > 0, lo, hi) * grad)
    return tuple(fluxes)


def _face_to_node(grid: Grid, face: np.ndarray, axis: int, upper: bool) -> np.ndarray:
    # zero-extended copy of a face array aligned with nodes on its lower or upper side
    out = np.zeros(grid.shape)
    sl = [slice(None)] * grid.dim
    sl[axis] = slice(0, -1) if upper else slice(1, None)
    out[tuple(sl)] = face
    return out


def flux_divergence(grid: Grid, fluxes: tuple[np.ndarray, ...]) -> np.ndarray:
    """Net outflow per unit control volume; boundary faces carry zero flux."""
    out = 0.0
    for axis, f in enumerate(fluxes):
        net = _face_to_node(grid, f, axis, upper=True) - _face_to_node(grid, f, axis, upper=False)
        out = out + net / _control_widths(grid, axis)
    return out


def _outflow_rate(grid: Grid, w: np.ndarray, chi: float) -> float:
    # largest fraction of a node's content carried out per unit time
    if chi == 0:
        return 0.0
    rate = 0.0
    for axis, h in enumerate(grid.spacing):
        vel = chi * np.diff(w, axis=axis) / h
        out = (_face_to_node(grid, np.maximum(vel, 0), axis, upper=True)
               + _face_to_node(grid, np.maximum(-vel, 0), axis, upper=False))
        rate = rate + out / _control_widths(grid, axis)
    return float(np.max(rate))


@lru_cache(maxsize=32)
def _diffusion_solver(grid: Grid, d: float, dt: float):
    n = int(np.prod(grid.shape))
    mat = (sp.identity(n, format="csr") - dt * d * neumann_laplacian(grid)).tocsc()
    return spla.splu(mat)


def _implicit_diffusion(grid: Grid, d: float, dt: float, rhs: np.ndarray) -> np.ndarray:
    return _diffusion_solver(grid, d, dt).solve(np.ascontiguousarray(rhs).ravel()).reshape(grid.shape)


def _reaction(u, v, c):
    a0, a1, a2, b0, b1, b2 = c
    return u * (a0 - a1 * u - a2 * v), v * (b0 - b1 * u - b2 * v)


def reaction_rk4(model: Model, t: float, u: np.ndarray, v: np.ndarray, dt: float):
    """One RK4 step of the pointwise competition law (exact zero sets kept)."""
    c0 = model.coefficient_values(t)
    ch = model.coefficient_values(t + dt / 2)
    c1 = model.coefficient_values(t + dt)
    k1 = _reaction(u, v, c0)
    k2 = _reaction(u + dt / 2 * k1[0], v + dt / 2 * k1[1], ch)
    k3 = _reaction(u + dt / 2 * k2[0], v + dt / 2 * k2[1], ch)
    k4 = _reaction(u + dt * k3[0], v + dt * k3[1], c1)
    u1 = u + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    v1 = v + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return u1, v1


def adaptive_dt(state: FieldState, model: Model, stepper: StepperConfig) -> float:
    """``safety * min(dt_max, advective bound, 1 / reaction rate)``.

    The advective bound is the inverse of the largest upwind outflow rate, the
    exact limit below which the explicit drift keeps densities nonnegative.
    """
    p = model.params
    w = state.w
    rate_adv = max(_outflow_rate(model.grid, w, p.chi1), _outflow_rate(model.grid, w, p.chi2))
    a0, a1, a2, b0, b1, b2 = model.coefficient_values(state.t)
    rate_rx = max(float(np.max(np.abs(a0 - a1 * state.u - a2 * state.v))),
                  float(np.max(np.abs(b0 - b1 * state.u - b2 * state.v))))
    bounds = [stepper.dt_max]
    if rate_adv > 0:
        bounds.append(1.0 / rate_adv)
    if rate_rx > 0:
        bounds.append(1.0 / rate_rx)
    return stepper.safety * min(bounds)


def _check(name: str, a: np.ndarray, t: float, stepper: StepperConfig) -> np.ndarray:
    if not np.all(np.isfinite(a)) or np.max(np.abs(a)) > BLOWUP_LEVEL:
        raise BlowUpError(f"blow-up in {name}", t)
    lo = float(np.min(a))
    if lo < -stepper.tol_neg:
        raise PositivityError(f"{name} went negative ({lo:.3e})", t)
    if lo < 0 and stepper.clamp_small:
        a = np.maximum(a, 0.0)
    return a


def signal(model: Model, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    p = model.params
    return solve_w(elliptic_operator(model.grid, p.d3, p.lam), u, v, p)


def prepare(state: FieldState, model: Model, stepper: StepperConfig | None = None) -> FieldState:
    """Validate an initial state and fill in its signal."""
    stepper = stepper or StepperConfig()
    u = np.array(np.broadcast_to(np.asarray(state.u, dtype=float), model.grid.shape))
    v = np.array(np.broadcast_to(np.asarray(state.v, dtype=float), model.grid.shape))
    u = _check("u", u, state.t, stepper)
    v = _check("v", v, state.t, stepper)
    return FieldState(state.t, u, v, signal(model, u, v))


def step(state: FieldState, model: Model, stepper: StepperConfig, dt: float) -> FieldState:
    p, grid = model.params, model.grid
    op = elliptic_operator(grid, p.d3, p.lam)
    if state.w is None or residual_norm(op, state.u, state.v, state.w, p) > 1e-8:
        raise ValueError("state.w is not consistent with (u, v); call prepare() first")
    if not dt > 0:
        raise ValueError("dt must be > 0")
    u, v, w = state.u, state.v, state.w
    if p.chi1:
        u = u - dt * flux_divergence(grid, chemotaxis_flux(grid, u, w, p.chi1))
    if p.chi2:
        v = v - dt * flux_divergence(grid, chemotaxis_flux(grid, v, w, p.chi2))
    u = _implicit_diffusion(grid, p.d1, dt, u)
    v = _implicit_diffusion(grid, p.d2, dt, v)
    u, v = reaction_rk4(model, state.t, u, v, dt)
    t1 = state.t + dt
    u = _check("u", u, t1, stepper)
    v = _check("v", v, t1, stepper)
    return FieldState(t1, u, v, solve_w(op, u, v, p))


def advance(state: FieldState, model: Model, stepper: StepperConfig, t_end: float) -> FieldState:
    """Step adaptively from ``state.t`` to exactly ``t_end``."""
    eps = 1e-12 * max(1.0, abs(t_end))
    while state.t < t_end - eps:
        dt = adaptive_dt(state, model, stepper)
        if state.t + dt > t_end - eps:
            dt = t_end - state.t
        state = step(state, model, stepper, dt)
    state.t = t_end
    return state


@dataclass
class TrajectorySummary:
    times: list = field(default_factory=list)
    min_u: list = field(default_factory=list)
    max_u: list = field(default_factory=list)
    min_v: list = field(default_factory=list)
    max_v: list = field(default_factory=list)
    min_w: list = field(default_factory=list)
    max_w: list = field(default_factory=list)
    mass_u: list = field(default_factory=list)
    mass_v: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)

    COLUMNS = ("t", "min_u", "max_u", "min_v", "max_v", "min_w", "max_w", "mass_u", "mass_v")

    def record(self, state: FieldState, grid: Grid):
        self.times.append(float(state.t))
        for name, a in (("u", state.u), ("v", state.v), ("w", state.w)):
            getattr(self, f"min_{name}").append(float(np.min(a)))
            getattr(self, f"max_{name}").append(float(np.max(a)))
        self.mass_u.append(grid.integrate(state.u))
        self.mass_v.append(grid.integrate(state.v))

    def array(self, name: str) -> np.ndarray:
        return np.asarray(self.times if name == "t" else getattr(self, name))

    def rows(self):
        cols = [self.array(c) for c in self.COLUMNS]
        return list(zip(*(c.tolist() for c in cols)))

    @property
    def final(self) -> dict:
        return {c: float(self.array(c)[-1]) for c in self.COLUMNS}


def sample_times(t0: float, t_final: float, sample_every: float) -> list[float]:
    n = int(math.floor((t_final - t0) / sample_every + 1e-9))
    times = [t0 + i * sample_every for i in range(n + 1)]
    if t_final - times[-1] > 1e-9 * max(1.0, abs(t_final)):
        times.append(t_final)
    else:
        times[-1] = t_final
    return times


def simulate(model: Model, init: FieldState, t_final: float, stepper: StepperConfig | None = None,
             sample_every: float = 1.0, snapshot_times=()) -> TrajectorySummary:
    """Run from ``init`` to ``t_final``, recording extrema and masses at each sample.

    A blow-up or positivity failure is raised as :class:`SimulationError` with
    the partial summary attached.
    """
    stepper = stepper or StepperConfig()
    if not t_final > init.t:
        raise ValueError("t_final must exceed the initial time")
    if not sample_every > 0:
        raise ValueError("sample_every must be > 0")
    summary = TrajectorySummary()
    samples = sample_times(init.t, t_final, sample_every)
    snaps = sorted(float(s) for s in snapshot_times if init.t <= s <= t_final)
    targets = sorted(set(samples) | set(snaps))
    sample_set, snap_set = set(samples), set(snaps)
    try:
        state = prepare(init, model, stepper)
        for target in targets:
            if target > state.t:
                state = advance(state, model, stepper, target)
            if target in sample_set:
                summary.record(state, model.grid)
            if target in snap_set:
                summary.snapshots[target] = state.copy()
    except SimulationError as exc:
        exc.summary = summary
        raise
    return summary
