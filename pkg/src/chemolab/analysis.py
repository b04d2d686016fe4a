"""Long-time diagnostics: tail statistics, verdicts, periodic coexistence states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hypothesis as hyp
from .model import FieldState, Model
from .pde import StepperConfig, TrajectorySummary, advance, prepare

EXTINCTION = "ExtinctionOfU"
PERSISTENCE = "Persistence"
INDETERMINATE = "Indeterminate"

DEFAULT_TAIL_FRACTION = 0.2
DEFAULT_EPS_EXTINCTION = 1e-4
DEFAULT_ETA_PERSISTENCE = 1e-2


class TailError(ValueError):
    pass


@dataclass(frozen=True)
class TailStats:
    """Finite-horizon estimates of limsup max / liminf min of u, v (and w)."""

    L1_hat: float
    l1_hat: float
    L2_hat: float
    l2_hat: float
    tail_fraction: float
    Lw_hat: float | None = None
    lw_hat: float | None = None
    n_samples: int = 0


def tail_stats(summary: TrajectorySummary, tail_fraction: float = DEFAULT_TAIL_FRACTION,
               min_samples: int = 10) -> TailStats:
    if not 0 < tail_fraction < 1:
        raise ValueError("tail_fraction must lie in (0, 1)")
    t = summary.array("t")
    if t.size == 0:
        raise TailError("empty summary")
    start = t[-1] - tail_fraction * (t[-1] - t[0])
    mask = t >= start - 1e-12 * max(1.0, abs(t[-1]))
    n = int(mask.sum())
    if n < min_samples:
        raise TailError(f"only {n} samples in the tail window (need {min_samples})")
    pick = {name: summary.array(name)[mask] for name in ("min_u", "max_u", "min_v", "max_v")}
    Lw = lw = None
    if len(summary.max_w) == t.size:
        Lw = float(summary.array("max_w")[mask].max())
        lw = float(summary.array("min_w")[mask].min())
    return TailStats(
        L1_hat=max(float(pick["max_u"].max()), 0.0),
        l1_hat=max(float(pick["min_u"].min()), 0.0),
        L2_hat=max(float(pick["max_v"].max()), 0.0),
        l2_hat=max(float(pick["min_v"].min()), 0.0),
        tail_fraction=tail_fraction, Lw_hat=Lw, lw_hat=lw, n_samples=n,
    )


@dataclass(frozen=True)
class Verdict:
    label: str
    stats: TailStats
    eps_extinction: float
    eta_persistence: float

    def rederive(self) -> str:
        return _label(self.stats, self.eps_extinction, self.eta_persistence)


def _label(s: TailStats, eps: float, eta: float) -> str:
    if s.L1_hat < eps and s.l2_hat > eta:
        return EXTINCTION
    if s.l1_hat > eta and s.l2_hat > eta:
        return PERSISTENCE
    return INDETERMINATE


def classify(stats: TailStats, eps_extinction: float = DEFAULT_EPS_EXTINCTION,
             eta_persistence: float = DEFAULT_ETA_PERSISTENCE) -> Verdict:
    if not (0 < eps_extinction < eta_persistence):
        raise ValueError("need 0 < eps_extinction < eta_persistence")
    return Verdict(_label(stats, eps_extinction, eta_persistence), stats, eps_extinction, eta_persistence)


def check_extinction_limits(stats: TailStats, alpha: float, beta: float, tol: float,
                            l: float | None = None, lam: float | None = None) -> bool:
    """v tail inside [alpha - tol, beta + tol]; with ``l`` and ``lam`` given and
    w samples present, also ``lam * w`` inside [l alpha - tol, l beta + tol]."""
    ok = stats.l2_hat >= alpha - tol and stats.L2_hat <= beta + tol
    if ok and l is not None and lam is not None and stats.Lw_hat is not None:
        ok = lam * stats.lw_hat >= l * alpha - tol and lam * stats.Lw_hat <= l * beta + tol
    return bool(ok)


def extinction_u_bound(extrema, params, l2_hat: float) -> float:
    """Upper bound on limsup max u implied by the liminf of min v."""
    den = extrema.a1_inf - params.k * params.chi1 / params.d3
    return max(extrema.a0_sup - extrema.a2_inf * l2_hat, 0.0) / den


def extinction_tail_bounds(extrema, params, stats: TailStats) -> dict[str, float]:
    """The three tail inequalities tying (L1, L2, l2) together during extinction.

    Returns the right-hand sides: ``L1 <= L1_upper``, ``L2 <= L2_upper``,
    ``l2 >= l2_lower``, each evaluated on the measured tail statistics.
    """
    e = extrema
    kc2 = params.k * params.chi2 / params.d3
    lc2 = params.l * params.chi2 / params.d3
    L1, L2, l2 = stats.L1_hat, stats.L2_hat, stats.l2_hat
    L2_upper = max(e.b0_sup - lc2 * l2 + max(kc2 - e.b1_inf, 0.0) * L1, 0.0) / (e.b2_inf - lc2)
    l2_lower = max(e.b0_inf - (max(e.b1_sup - kc2, 0.0) + kc2) * L1 - lc2 * L2, 0.0) / (e.b2_sup - lc2)
    return {"L1_upper": extinction_u_bound(e, params, l2), "L2_upper": L2_upper, "l2_lower": l2_lower}


@dataclass
class PeriodicResult:
    state: FieldState
    residual: float
    iterations: int
    converged: bool
    period: float
    history: list = field(default_factory=list)
    within_upper_bounds: bool | None = None


def period_map(model: Model, state: FieldState, period: float, stepper: StepperConfig) -> FieldState:
    return advance(state.copy(), model, stepper, state.t + period)


def poincare_fixed_point(model: Model, guess, tol: float = 1e-8, max_iter: int = 50,
                         stepper: StepperConfig | None = None, t0: float = 0.0,
                         period: float | None = None) -> PeriodicResult:
    """Picard iteration of the period map ``z -> z(t0 + T)`` started at ``t0``.

    ``guess`` is a ``(u, v)`` pair of positive fields. For time-constant
    coefficients ``period`` must be supplied. The best iterate is returned when
    ``max_iter`` is exhausted (``converged`` is then False).
    """
    stepper = stepper or StepperConfig()
    common = model.coefficients.common_period()
    if common is None:
        if period is None:
            raise ValueError("time-constant coefficients: an explicit period is required")
    else:
        if period is not None and not math.isclose(period, common, rel_tol=1e-12):
            raise ValueError(f"period {period} does not match the coefficient period {common}")
        period = common
    u0, v0 = guess
    if np.min(u0) <= 0 or np.min(v0) <= 0:
        raise ValueError("guess must be positive")
    z = prepare(FieldState(t0, u0, v0), model, stepper)
    best, best_res, history = z, math.inf, []
    for it in range(1, max_iter + 1):
        nxt = period_map(model, z, period, stepper)
        res = float(max(np.max(np.abs(nxt.u - z.u)), np.max(np.abs(nxt.v - z.v))))
        history.append(res)
        nxt.t = t0
        if res < best_res:
            best, best_res = z, res
        if res <= tol:
            break
        z = nxt
    converged = best_res <= tol
    result = PeriodicResult(best, best_res, len(history), converged, period, history)
    rep = hyp.evaluate(model.extrema, model.params, model.grid.dim)
    bounds = rep.A_bar if rep.h4 else (rep.B_bar if rep.h5 else None)
    if bounds is not None:
        eps = 1e-6
        result.within_upper_bounds = bool(np.min(best.u) > 0 and np.min(best.v) > 0
                                          and np.max(best.u) <= bounds[0] + eps
                                          and np.max(best.v) <= bounds[1] + eps)
    return result


def periodicity_residual(model: Model, state: FieldState, period: float,
                         stepper: StepperConfig | None = None) -> float:
    """Sup-norm change of (u, v) over one more period."""
    stepper = stepper or StepperConfig()
    nxt = period_map(model, state, period, stepper)
    return float(max(np.max(np.abs(nxt.u - state.u)), np.max(np.abs(nxt.v - state.v))))
