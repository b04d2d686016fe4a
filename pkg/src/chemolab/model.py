"""Model data: parameters, coefficient fields, grid and field state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

COEFFICIENT_NAMES = ("a0", "a1", "a2", "b0", "b1", "b2")


class NonPositiveCoefficientError(ValueError):
    """A coefficient field whose infimum is not strictly positive."""


@dataclass(frozen=True)
class ModelParams:
    d1: float
    d2: float
    d3: float
    chi1: float
    chi2: float
    k: float
    l: float
    lam: float

    def __post_init__(self):
        for name in ("d1", "d2", "d3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("chi1", "chi2", "k", "l"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.lam > 0:
            raise ValueError("lambda must be > 0")


@dataclass(frozen=True)
class CoefficientField:
    """Additive cosine law

        c(t, x) = base + A cos(2 pi (t - phase) / period)
                       + sum_i B_i cos(m_i pi x_i / L_i)

    Temporal and spatial parts vary independently, so the extrema are exact.
    """

    base: float
    temporal_amplitude: float = 0.0
    temporal_period: float = 1.0
    temporal_phase: float = 0.0
    spatial_amplitude: tuple[float, ...] = ()
    spatial_mode: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "spatial_amplitude", tuple(float(a) for a in self.spatial_amplitude))
        object.__setattr__(self, "spatial_mode", tuple(int(m) for m in self.spatial_mode))
        if len(self.spatial_amplitude) != len(self.spatial_mode):
            raise ValueError("spatial_amplitude and spatial_mode must have the same length")
        if len(self.spatial_mode) > 2:
            raise ValueError("at most two spatial axes are supported")
        if any(m < 0 for m in self.spatial_mode):
            raise ValueError("spatial modes must be nonnegative")
        if self.temporal_amplitude != 0 and not self.temporal_period > 0:
            raise ValueError("temporal_period must be > 0 when temporal_amplitude != 0")

    @property
    def is_time_constant(self) -> bool:
        return self.temporal_amplitude == 0

    @property
    def is_space_constant(self) -> bool:
        return all(a == 0 or m == 0 for a, m in zip(self.spatial_amplitude, self.spatial_mode))

    def temporal(self, t):
        if self.temporal_amplitude == 0:
            return 0.0 * np.asarray(t, dtype=float)
        return self.temporal_amplitude * np.cos(2 * np.pi * (np.asarray(t, dtype=float) - self.temporal_phase)
                                                / self.temporal_period)

    def spatial(self, x, lengths):
        """Spatial part at point(s) ``x``; ``x[i]`` holds coordinates along axis i."""
        if len(self.spatial_mode) > len(lengths):
            raise ValueError("coefficient has more spatial axes than the domain")
        out = 0.0
        for i, (amp, mode) in enumerate(zip(self.spatial_amplitude, self.spatial_mode)):
            out = out + amp * np.cos(mode * np.pi * np.asarray(x[i], dtype=float) / lengths[i])
        return out

    def _spatial_offset(self):
        # mode 0 terms are constants; the rest swing through +-|amp|
        const = sum(a for a, m in zip(self.spatial_amplitude, self.spatial_mode) if m == 0)
        spread = sum(abs(a) for a, m in zip(self.spatial_amplitude, self.spatial_mode) if m != 0)
        return const, spread

    def spatial_extrema(self):
        const, spread = self._spatial_offset()
        return const - spread, const + spread


def eval_coefficient(fld: CoefficientField, t, x, lengths=None):
    """Evaluate ``fld`` at time ``t`` and point ``x`` of a box with side ``lengths``.

    ``x`` is a scalar in 1D or a sequence of per-axis coordinates.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if lengths is None:
        lengths = (1.0,) * len(x)
    return fld.base + fld.temporal(t) + fld.spatial(x, lengths)


def coeff_extrema(fld: CoefficientField, check_positive: bool = True) -> tuple[float, float]:
    """Exact (inf, sup) of ``fld`` over all times and the whole box."""
    lo, hi = fld.spatial_extrema()
    amp = abs(fld.temporal_amplitude)
    inf = fld.base - amp + lo
    sup = fld.base + amp + hi
    if check_positive and not inf > 0:
        raise NonPositiveCoefficientError(f"non-positive infimum {inf!r}")
    return inf, sup


@dataclass(frozen=True)
class ExtremaTable:
    a0_inf: float
    a0_sup: float
    a1_inf: float
    a1_sup: float
    a2_inf: float
    a2_sup: float
    b0_inf: float
    b0_sup: float
    b1_inf: float
    b1_sup: float
    b2_inf: float
    b2_sup: float

    @classmethod
    def constant(cls, a0, a1, a2, b0, b1, b2):
        return cls(a0, a0, a1, a1, a2, a2, b0, b0, b1, b1, b2, b2)

    def pair(self, name: str) -> tuple[float, float]:
        return getattr(self, f"{name}_inf"), getattr(self, f"{name}_sup")


@dataclass(frozen=True)
class CoefficientBundle:
    a0: CoefficientField
    a1: CoefficientField
    a2: CoefficientField
    b0: CoefficientField
    b1: CoefficientField
    b2: CoefficientField

    @classmethod
    def constant(cls, a0, a1, a2, b0, b1, b2):
        return cls(*(CoefficientField(float(c)) for c in (a0, a1, a2, b0, b1, b2)))

    def fields(self):
        return tuple(getattr(self, n) for n in COEFFICIENT_NAMES)

    def replace(self, **changes) -> "CoefficientBundle":
        vals = {n: changes.get(n, getattr(self, n)) for n in COEFFICIENT_NAMES}
        return CoefficientBundle(**vals)

    @property
    def is_space_constant(self) -> bool:
        return all(f.is_space_constant for f in self.fields())

    @cached_property
    def profile(self) -> "TemporalProfile":
        return TemporalProfile(self)

    def common_period(self) -> float | None:
        """Shared temporal period, ``None`` if all fields are time-constant.

        Raises ``ValueError`` when the time-varying fields disagree.
        """
        periods = {f.temporal_period for f in self.fields() if not f.is_time_constant}
        if not periods:
            return None
        if len(periods) > 1:
            raise ValueError(f"coefficient periods differ: {sorted(periods)}")
        return periods.pop()


def bundle_extrema(bundle: CoefficientBundle) -> ExtremaTable:
    vals = []
    for name in COEFFICIENT_NAMES:
        try:
            vals.extend(coeff_extrema(getattr(bundle, name)))
        except NonPositiveCoefficientError as exc:
            raise NonPositiveCoefficientError(f"{name}: {exc}") from None
    return ExtremaTable(*vals)


class TemporalProfile:
    """Vectorised time law of a bundle: the six spatial extrema at a given t."""

    def __init__(self, bundle: CoefficientBundle):
        flds = bundle.fields()
        self.base = np.array([f.base + f._spatial_offset()[0] for f in flds])
        self.spread = np.array([f._spatial_offset()[1] for f in flds])
        self.amp = np.array([f.temporal_amplitude for f in flds])
        self.omega = np.array([2 * np.pi / f.temporal_period if f.temporal_amplitude else 0.0 for f in flds])
        self.phase = np.array([f.temporal_phase for f in flds])
        self.space_constant = bool(np.all(self.spread == 0))
        self._terms = [(float(b), float(a), float(w), float(ph))
                       for b, a, w, ph in zip(self.base, self.amp, self.omega, self.phase)]
        self._spread = [float(s) for s in self.spread]

    def center_values(self, t: float) -> list[float]:
        """Same as :meth:`center` as plain floats (cheap in tight ODE loops)."""
        return [b + a * math.cos(w * (t - ph)) if a else b for b, a, w, ph in self._terms]

    def inf_values(self, t: float) -> list[float]:
        return [c - s for c, s in zip(self.center_values(t), self._spread)]

    def sup_values(self, t: float) -> list[float]:
        return [c + s for c, s in zip(self.center_values(t), self._spread)]

    def center(self, t):
        return self.base + self.amp * np.cos(self.omega * (t - self.phase))

    def inf(self, t):
        return self.center(t) - self.spread

    def sup(self, t):
        return self.center(t) + self.spread


def temporal_profile(bundle: CoefficientBundle) -> TemporalProfile:
    return bundle.profile


def bundle_extrema_at(bundle: CoefficientBundle, t: float) -> ExtremaTable:
    """Spatial extrema of each coefficient at the fixed time ``t``."""
    prof = temporal_profile(bundle)
    lo, hi = prof.inf(t), prof.sup(t)
    return ExtremaTable(*np.column_stack([lo, hi]).ravel().tolist())


@dataclass(frozen=True)
class Grid:
    """Vertex-centred grid on [0, L_1] (x [0, L_2])."""

    lengths: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))
        if len(self.lengths) not in (1, 2) or len(self.lengths) != len(self.counts):
            raise ValueError("grid must be 1D or 2D with one length and count per axis")
        if any(not L > 0 for L in self.lengths):
            raise ValueError("lengths must be > 0")
        if any(n < 3 for n in self.counts):
            raise ValueError("each axis needs at least 3 nodes")

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / (n - 1) for L, n in zip(self.lengths, self.counts))

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(np.linspace(0.0, L, n) for L, n in zip(self.lengths, self.counts))

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights (also the control-volume sizes)."""
        w1 = []
        for h, n in zip(self.spacing, self.counts):
            w = np.full(n, h)
            w[[0, -1]] = h / 2
            w1.append(w)
        return w1[0] if self.dim == 1 else np.outer(w1[0], w1[1])

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(self.weights * f))

    def evaluate(self, fld: CoefficientField, t: float) -> np.ndarray:
        return fld.base + fld.temporal(t) + self.spatial_part(fld)

    def spatial_part(self, fld: CoefficientField) -> np.ndarray:
        return _spatial_cache(self, fld)

    def cosine_field(self, base: float, amplitude=(), mode=()) -> np.ndarray:
        return base + np.broadcast_to(self.spatial_part(CoefficientField(0.0, spatial_amplitude=amplitude,
                                                                         spatial_mode=mode)), self.shape)


@lru_cache(maxsize=256)
def _spatial_cache(grid: Grid, fld: CoefficientField) -> np.ndarray:
    part = np.zeros(grid.shape) + fld.spatial(grid.coords, grid.lengths)
    part.setflags(write=False)
    return part


@dataclass(frozen=True)
class Model:
    params: ModelParams
    coefficients: CoefficientBundle
    grid: Grid

    @cached_property
    def extrema(self) -> ExtremaTable:
        return bundle_extrema(self.coefficients)

    @cached_property
    def _static_parts(self) -> tuple[np.ndarray, ...]:
        parts = []
        for f in self.coefficients.fields():
            a = np.broadcast_to(f.base + self.grid.spatial_part(f), self.grid.shape).copy()
            a.setflags(write=False)
            parts.append(a)
        return tuple(parts)

    def coefficient_values(self, t: float) -> tuple[np.ndarray, ...]:
        """All six coefficients on the grid at time ``t`` (a0, a1, a2, b0, b1, b2)."""
        prof = self.coefficients.profile
        return tuple(part if a == 0 else part + (c - b)
                     for part, c, (b, a, _, _) in zip(self._static_parts, prof.center_values(t), prof._terms))


@dataclass
class FieldState:
    t: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray = field(default=None)

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.u.copy(), self.v.copy(), None if self.w is None else self.w.copy())
