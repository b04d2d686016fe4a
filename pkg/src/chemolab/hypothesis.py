"""Closed-form conditions and bounds evaluated on exact coefficient extrema.

Every condition returns a :class:`Condition` whose margins are
``(lhs - rhs) / max(1, |rhs|)``; a positive margin means the inequality is
satisfied with room to spare. Non-strict inequalities accept exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import ExtremaTable, ModelParams


@dataclass(frozen=True)
class Condition:
    holds: bool
    margins: tuple[tuple[str, float], ...] = ()

    def __bool__(self):
        return self.holds

    @property
    def min_margin(self) -> float | None:
        return min((m for _, m in self.margins), default=None)


def _margin(lhs, rhs):
    return (lhs - rhs) / max(1.0, abs(rhs))


class _Builder:
    def __init__(self):
        self.ok = True
        self.margins = []

    def gt(self, name, lhs, rhs):
        self.ok &= lhs > rhs
        self.margins.append((name, _margin(lhs, rhs)))

    def ge(self, name, lhs, rhs):
        self.ok &= lhs >= rhs
        self.margins.append((name, _margin(lhs, rhs)))

    def done(self) -> Condition:
        return Condition(bool(self.ok), tuple(self.margins))


def _pos(x):
    return max(x, 0.0)


def _neg(x):
    return max(-x, 0.0)


class _Terms:
    """The recurring chemotaxis ratios."""

    def __init__(self, p: ModelParams):
        self.kc1 = p.k * p.chi1 / p.d3
        self.lc1 = p.l * p.chi1 / p.d3
        self.kc2 = p.k * p.chi2 / p.d3
        self.lc2 = p.l * p.chi2 / p.d3


def check_h1(e: ExtremaTable, p: ModelParams) -> Condition:
    c = _Terms(p)
    b = _Builder()
    b.gt("a1_inf > k*chi1/d3", e.a1_inf, c.kc1)
    b.ge("a2_inf >= l*chi1/d3", e.a2_inf, c.lc1)
    b.ge("b1_inf >= k*chi2/d3", e.b1_inf, c.kc2)
    b.gt("b2_inf > l*chi2/d3", e.b2_inf, c.lc2)
    return b.done()


def check_h2(e: ExtremaTable, p: ModelParams) -> Condition:
    c = _Terms(p)
    b = _Builder()
    b.gt("a1_inf > k*chi1/d3", e.a1_inf, c.kc1)
    b.gt("b2_inf > l*chi2/d3", e.b2_inf, c.lc2)
    b.gt("(a1_inf-k*chi1/d3)(b2_inf-l*chi2/d3) > (k*chi2/d3)(l*chi1/d3)",
         (e.a1_inf - c.kc1) * (e.b2_inf - c.lc2), c.kc2 * c.lc1)
    return b.done()


def check_h3(e: ExtremaTable, p: ModelParams, n: int) -> Condition:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    f = (n - 2) / (p.d3 * n)
    b = _Builder()
    b.gt("a1_inf > max(0, chi1*k*(n-2)/(d3*n))", e.a1_inf, max(0.0, p.chi1 * p.k * f))
    b.gt("a2_inf > max(0, chi1*l*(n-2)/(d3*n))", e.a2_inf, max(0.0, p.chi1 * p.l * f))
    b.gt("b1_inf > max(0, chi2*k*(n-2)/(d3*n))", e.b1_inf, max(0.0, p.chi2 * p.k * f))
    b.gt("b2_inf > max(0, chi2*l*(n-2)/(d3*n))", e.b2_inf, max(0.0, p.chi2 * p.l * f))
    return b.done()


def bounds_upper_A(e: ExtremaTable, p: ModelParams) -> tuple[float, float]:
    """Eventual sup bounds (A1, A2) of u and v; needs the first H1 pair."""
    c = _Terms(p)
    den1 = e.a1_inf - c.kc1
    den2 = e.b2_inf - c.lc2
    if not (den1 > 0 and den2 > 0):
        raise ValueError("A-bar denominators must be positive")
    return e.a0_sup / den1, e.b0_sup / den2


def bounds_upper_B(e: ExtremaTable, p: ModelParams) -> tuple[float, float]:
    """Eventual sup bounds (B1, B2): the positive equilibrium of the cooperative majorant."""
    c = _Terms(p)
    r1 = e.a1_inf - c.kc1
    r2 = e.b2_inf - c.lc2
    det = r1 * r2 - c.lc1 * c.kc2
    if not (r1 > 0 and r2 > 0 and det > 0):
        raise ValueError("H2 determinant must be positive")
    # substitution form: collapses to a0/r1, b0/r2 exactly when the cross terms vanish
    B1 = (e.a0_sup + c.lc1 * e.b0_sup / r2) / (r1 - c.lc1 * c.kc2 / r2)
    B2 = (e.b0_sup + c.kc2 * e.a0_sup / r1) / (r2 - c.kc2 * c.lc1 / r1)
    return B1, B2


def check_h4(e: ExtremaTable, p: ModelParams) -> Condition:
    if not check_h1(e, p):
        return Condition(False)
    A1, A2 = bounds_upper_A(e, p)
    b = _Builder()
    b.gt("a0_inf > a2_sup*A2", e.a0_inf, e.a2_sup * A2)
    b.gt("b0_inf > b1_sup*A1", e.b0_inf, e.b1_sup * A1)
    return b.done()


def check_h5(e: ExtremaTable, p: ModelParams) -> Condition:
    if not check_h2(e, p):
        return Condition(False)
    c = _Terms(p)
    B1, B2 = bounds_upper_B(e, p)
    b = _Builder()
    b.gt("a0_inf > (a2_sup-chi1*l/d3)_+ B2 + (chi1*l/d3) B2", e.a0_inf, _pos(e.a2_sup - c.lc1) * B2 + c.lc1 * B2)
    b.gt("b0_inf > (b1_sup-chi2*k/d3)_+ B1 + (chi2*k/d3) B1", e.b0_inf, _pos(e.b1_sup - c.kc2) * B1 + c.kc2 * B1)
    return b.done()


def check_instability(e: ExtremaTable) -> Condition:
    """Both semitrivial states unstable for the chemotaxis-free system."""
    b = _Builder()
    b.gt("a0_inf*b2_inf > a2_sup*b0_sup", e.a0_inf * e.b2_inf, e.a2_sup * e.b0_sup)
    b.gt("b0_inf*a1_inf > b1_sup*a0_sup", e.b0_inf * e.a1_inf, e.b1_sup * e.a0_sup)
    return b.done()


def check_instability_1_9(e: ExtremaTable) -> bool:
    return check_instability(e).holds


def check_extinction_conditions(e: ExtremaTable, p: ModelParams) -> dict[str, Condition]:
    """The three extra conditions under which species u dies out."""
    c = _Terms(p)
    b = _Builder()
    b.gt("b2_inf > 2*chi2*l/d3", e.b2_inf, 2 * c.lc2)
    b.ge("a2_inf >= chi1*l/d3", e.a2_inf, c.lc1)
    cond12 = b.done()

    lhs_common = e.b0_inf * (e.b2_inf - c.lc2) - e.b0_sup * c.lc2
    b = _Builder()
    b.ge("a2_inf*(b0_inf(b2_inf-l*chi2/d3) - b0_sup*l*chi2/d3) >= a0_sup*((b2_inf-lc2)(b2_sup-lc2) - lc2^2)",
         e.a2_inf * lhs_common,
         e.a0_sup * ((e.b2_inf - c.lc2) * (e.b2_sup - c.lc2) - c.lc2 ** 2))
    cond13 = b.done()

    rhs = ((_pos(e.b1_sup - c.kc2) + c.kc2) * (e.b2_inf - c.lc2) + c.lc2 * _neg(e.b1_inf - c.kc2)) * e.a0_sup
    b = _Builder()
    b.gt("(a1_inf-chi1*k/d3)(b0_inf(b2_inf-lc2) - b0_sup*lc2) > [...]*a0_sup",
         (e.a1_inf - c.kc1) * lhs_common, rhs)
    cond14 = b.done()
    return {"cond_1_12": cond12, "cond_1_13": cond13, "cond_1_14": cond14}


def extinction_limits(e: ExtremaTable, p: ModelParams) -> tuple[float, float]:
    """(alpha, beta): eventual band for min v and max v once u is extinct."""
    c = _Terms(p).lc2
    den = (e.b2_inf - c) * (e.b2_sup - c) - c ** 2
    if not (den > 0 and e.b2_sup - c > 0):
        raise ValueError("non-positive denominator in alpha/beta")
    beta = (e.b0_sup * (e.b2_sup - c) - c * e.b0_inf) / den
    alpha = (e.b0_inf - c * beta) / (e.b2_sup - c)
    if not (0 < alpha <= beta * (1 + 1e-12)):
        raise ValueError(f"expected 0 < alpha <= beta, got alpha={alpha!r}, beta={beta!r}")
    return alpha, beta


def lv_invariant_rect(e: ExtremaTable) -> tuple[float, float, float, float]:
    """(s1, r1, r2, s2) bounding the positive entire solution of the LV system."""
    dens = (e.b2_inf * e.a1_sup - e.a2_sup * e.b1_inf,
            e.b2_sup * e.a1_inf - e.a2_inf * e.b1_sup,
            e.a1_inf * e.b2_sup - e.b1_sup * e.a2_inf,
            e.a1_sup * e.b2_inf - e.b1_inf * e.a2_sup)
    if not all(d > 0 for d in dens):
        raise ValueError("non-positive denominator in invariant rectangle")
    s1 = (e.b2_inf * e.a0_inf - e.a2_sup * e.b0_sup) / dens[0]
    r1 = (e.b2_sup * e.a0_sup - e.a2_inf * e.b0_inf) / dens[1]
    r2 = (e.a1_inf * e.b0_inf - e.b1_sup * e.a0_sup) / dens[2]
    s2 = (e.a1_sup * e.b0_sup - e.b1_inf * e.a0_inf) / dens[3]
    tol = 1e-12
    if not (0 < s1 <= r1 * (1 + tol) and 0 < r2 <= s2 * (1 + tol)):
        raise ValueError(f"invariant rectangle ordering violated: s1={s1}, r1={r1}, r2={r2}, s2={s2}")
    return s1, r1, r2, s2


def mass_bounds(e: ExtremaTable, mass_u0: float, mass_v0: float, volume: float = 1.0) -> tuple[float, float]:
    """Upper bounds on the total masses of u and v for all later times.

    Chemotaxis and diffusion conserve mass and Cauchy-Schwarz gives
    ``int u^2 >= (int u)^2 / |Omega|``, so the logistic ceiling on the mass is
    ``|Omega| a0_sup / a1_inf`` (same for v with b0_sup / b2_inf).
    """
    return (max(mass_u0, volume * e.a0_sup / e.a1_inf), max(mass_v0, volume * e.b0_sup / e.b2_inf))


def decoupled_residual(e: ExtremaTable, p: ModelParams, A: tuple[float, float]) -> float:
    """Relative residual of (A1, A2) in the decoupled logistic majorant."""
    c = _Terms(p)
    r = (e.a0_sup - (e.a1_inf - c.kc1) * A[0], e.b0_sup - (e.b2_inf - c.lc2) * A[1])
    return max(abs(r[0]) / max(1.0, e.a0_sup), abs(r[1]) / max(1.0, e.b0_sup))


def cooperative_residual(e: ExtremaTable, p: ModelParams, B: tuple[float, float]) -> float:
    """Relative residual of (B1, B2) in the cooperative majorant."""
    c = _Terms(p)
    r1 = e.a0_sup - (e.a1_inf - c.kc1) * B[0] + c.lc1 * B[1]
    r2 = e.b0_sup - (e.b2_inf - c.lc2) * B[1] + c.kc2 * B[0]
    scale1 = max(1.0, e.a0_sup, (e.a1_inf - c.kc1) * B[0])
    scale2 = max(1.0, e.b0_sup, (e.b2_inf - c.lc2) * B[1])
    return max(abs(r1) / scale1, abs(r2) / scale2)


@dataclass(frozen=True)
class HypothesisReport:
    h1: Condition
    h2: Condition
    h3: Condition
    h4: Condition
    h5: Condition
    instability: Condition
    extinction: dict[str, Condition] = field(default_factory=dict)
    A_bar: tuple[float, float] | None = None
    B_bar: tuple[float, float] | None = None
    alpha_beta: tuple[float, float] | None = None
    lv_rect: tuple[float, float, float, float] | None = None
    dimension: int = 1

    @property
    def instability_1_9(self) -> bool:
        return self.instability.holds

    @property
    def extinction_holds(self) -> bool:
        return all(c.holds for c in self.extinction.values())


def evaluate(e: ExtremaTable, p: ModelParams, n: int = 1) -> HypothesisReport:
    """Evaluate every condition and, where they apply, every derived bound."""
    h1, h2 = check_h1(e, p), check_h2(e, p)
    A_bar = bounds_upper_A(e, p) if h1 else None
    B_bar = bounds_upper_B(e, p) if h2 else None
    ext = check_extinction_conditions(e, p)
    alpha_beta = None
    if (h1 or h2) and all(c.holds for c in ext.values()):
        alpha_beta = extinction_limits(e, p)
    inst = check_instability(e)
    lv_rect = None
    if inst:
        try:
            lv_rect = lv_invariant_rect(e)
        except ValueError:
            lv_rect = None
    return HypothesisReport(h1=h1, h2=h2, h3=check_h3(e, p, n), h4=check_h4(e, p), h5=check_h5(e, p),
                            instability=inst, extinction=ext, A_bar=A_bar, B_bar=B_bar,
                            alpha_beta=alpha_beta, lv_rect=lv_rect, dimension=n)
