"""Scenario files: a strict INI-style key/value format.

::

    # comment
    [params]
    d1 = 1.0
    chi1 = 0.1
    lambda = 1.0

    [coefficients]
    a0.base = 1.0
    a0.temporal_amplitude = 0.2
    a0.temporal_period = 5.0
    a0.spatial_amplitude = 0.1, 0.0
    a0.spatial_mode = 1, 0

Sections: ``domain``, ``params``, ``coefficients``, ``init``, ``time``,
``analysis``. Unknown sections or keys are errors; every diagnostic names the
line, section and key involved. See ``SCHEMA`` for the full key list with
defaults.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import (COEFFICIENT_NAMES, CoefficientBundle, CoefficientField, FieldState, Grid, Model,
                    ModelParams, coeff_extrema)
from .pde import StepperConfig

REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _floats(text):
    text = text.strip()
    return tuple(float(t) for t in text.split(",")) if text else ()


def _ints(text):
    text = text.strip()
    return tuple(int(t) for t in text.split(",")) if text else ()


def _coefficient_keys():
    keys = {}
    for name in COEFFICIENT_NAMES:
        keys[f"{name}.base"] = (float, REQUIRED)
        keys[f"{name}.temporal_amplitude"] = (float, 0.0)
        keys[f"{name}.temporal_period"] = (float, 1.0)
        keys[f"{name}.temporal_phase"] = (float, 0.0)
        keys[f"{name}.spatial_amplitude"] = (_floats, ())
        keys[f"{name}.spatial_mode"] = (_ints, ())
    return keys


SCHEMA = {
    "domain": {"dim": (int, 1), "lengths": (_floats, (1.0,)), "counts": (_ints, (65,))},
    "params": {name: (float, REQUIRED) for name in ("d1", "d2", "d3", "chi1", "chi2", "k", "l", "lambda")},
    "coefficients": _coefficient_keys(),
    "init": {
        "u0.base": (float, REQUIRED), "u0.amplitude": (_floats, ()), "u0.mode": (_ints, ()),
        "v0.base": (float, REQUIRED), "v0.amplitude": (_floats, ()), "v0.mode": (_ints, ()),
    },
    "time": {"t_final": (float, 50.0), "dt_max": (float, 0.01), "safety": (float, 0.9),
             "sample_every": (float, 0.25)},
    "analysis": {"tail_fraction": (float, 0.2), "eps_extinction": (float, 1e-4),
                 "eta_persistence": (float, 1e-2), "tol_poincare": (float, 1e-8), "max_iter": (int, 50),
                 "poincare_period": (float, 1.0), "band_tol": (float, 0.01)},
}


@dataclass(frozen=True)
class DomainConfig:
    dim: int = 1
    lengths: tuple[float, ...] = (1.0,)
    counts: tuple[int, ...] = (65,)

    def grid(self) -> Grid:
        return Grid(self.lengths, self.counts)


@dataclass(frozen=True)
class InitConfig:
    """Initial densities ``base + sum_i amplitude_i cos(mode_i pi x_i / L_i)``."""

    u0_base: float
    v0_base: float
    u0_amplitude: tuple[float, ...] = ()
    u0_mode: tuple[int, ...] = ()
    v0_amplitude: tuple[float, ...] = ()
    v0_mode: tuple[int, ...] = ()

    def fields(self, grid: Grid):
        return (grid.cosine_field(self.u0_base, self.u0_amplitude, self.u0_mode),
                grid.cosine_field(self.v0_base, self.v0_amplitude, self.v0_mode))


@dataclass(frozen=True)
class TimeConfig:
    t_final: float = 50.0
    dt_max: float = 0.01
    safety: float = 0.9
    sample_every: float = 0.25

    def stepper(self) -> StepperConfig:
        return StepperConfig(dt_max=self.dt_max, safety=self.safety)


@dataclass(frozen=True)
class AnalysisConfig:
    tail_fraction: float = 0.2
    eps_extinction: float = 1e-4
    eta_persistence: float = 1e-2
    tol_poincare: float = 1e-8
    max_iter: int = 50
    poincare_period: float = 1.0
    band_tol: float = 0.01


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    coefficients: CoefficientBundle
    init: InitConfig
    domain: DomainConfig = field(default_factory=DomainConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def model(self) -> Model:
        return Model(self.params, self.coefficients, self.domain.grid())

    def initial_state(self) -> FieldState:
        u, v = self.init.fields(self.domain.grid())
        return FieldState(0.0, u, v)


_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w.]*)\s*\]$")


def read_items(text: str) -> dict:
    """Raw ``{(section, key): (value, line)}`` with syntax and key checks."""
    items = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any section", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key '{key}' in section [{section}]", lineno)
        if (section, key) in items:
            raise ConfigError(f"duplicate key {section}.{key}", lineno)
        items[(section, key)] = (value, lineno)
    return items


class _Values:
    def __init__(self, items):
        self.items = items

    def get(self, section, key):
        conv, default = SCHEMA[section][key]
        if (section, key) not in self.items:
            if default is REQUIRED:
                raise ConfigError(f"missing required key {section}.{key}")
            return default
        value, line = self.items[(section, key)]
        try:
            return conv(value)
        except ValueError:
            raise ConfigError(f"{section}.{key}: cannot parse {value!r}", line) from None

    def line(self, section, key):
        return self.items.get((section, key), (None, None))[1]

    def fail(self, section, key, message):
        raise ConfigError(f"{section}.{key} {message}", self.line(section, key))


def build(items: dict) -> ScenarioConfig:
    val = _Values(items)

    dim = val.get("domain", "dim")
    if dim not in (1, 2):
        val.fail("domain", "dim", "must be 1 or 2")
    lengths, counts = val.get("domain", "lengths"), val.get("domain", "counts")
    if len(lengths) != dim or any(not L > 0 for L in lengths):
        val.fail("domain", "lengths", f"must list {dim} positive value(s)")
    if len(counts) != dim or any(n < 3 for n in counts):
        val.fail("domain", "counts", f"must list {dim} integer(s) >= 3")
    domain = DomainConfig(dim, lengths, counts)

    p = {name: val.get("params", name) for name in SCHEMA["params"]}
    for name in ("d1", "d2", "d3", "lambda"):
        if not p[name] > 0:
            val.fail("params", name, "must be > 0")
    for name in ("chi1", "chi2", "k", "l"):
        if not p[name] >= 0:
            val.fail("params", name, "must be >= 0")
    params = ModelParams(p["d1"], p["d2"], p["d3"], p["chi1"], p["chi2"], p["k"], p["l"], p["lambda"])

    fields = {}
    for name in COEFFICIENT_NAMES:
        g = {key: val.get("coefficients", f"{name}.{key}") for key in
             ("base", "temporal_amplitude", "temporal_period", "temporal_phase", "spatial_amplitude", "spatial_mode")}
        if g["temporal_amplitude"] != 0 and not g["temporal_period"] > 0:
            val.fail("coefficients", f"{name}.temporal_period", "must be > 0")
        if len(g["spatial_amplitude"]) != len(g["spatial_mode"]):
            val.fail("coefficients", f"{name}.spatial_mode", "must have as many entries as spatial_amplitude")
        if len(g["spatial_mode"]) > dim:
            val.fail("coefficients", f"{name}.spatial_mode", f"has more than {dim} axis entries")
        if any(m < 0 for m in g["spatial_mode"]):
            val.fail("coefficients", f"{name}.spatial_mode", "entries must be >= 0")
        fld = CoefficientField(**g)
        if not coeff_extrema(fld, check_positive=False)[0] > 0:
            val.fail("coefficients", f"{name}.base", "gives a non-positive infimum")
        fields[name] = fld
    coefficients = CoefficientBundle(**fields)

    ini = {}
    for sp in ("u0", "v0"):
        base = val.get("init", f"{sp}.base")
        amp, mode = val.get("init", f"{sp}.amplitude"), val.get("init", f"{sp}.mode")
        if len(amp) != len(mode) or len(mode) > dim:
            val.fail("init", f"{sp}.mode", f"must match {sp}.amplitude and have at most {dim} entries")
        if any(m < 0 for m in mode):
            val.fail("init", f"{sp}.mode", "entries must be >= 0")
        lo = base + sum(a for a, m in zip(amp, mode) if m == 0) - sum(abs(a) for a, m in zip(amp, mode) if m)
        if lo < 0:
            val.fail("init", f"{sp}.base", "gives a negative initial density")
        ini.update({f"{sp}_base": base, f"{sp}_amplitude": amp, f"{sp}_mode": mode})
    init = InitConfig(**ini)

    t = {key: val.get("time", key) for key in SCHEMA["time"]}
    for key in ("t_final", "dt_max", "sample_every"):
        if not t[key] > 0:
            val.fail("time", key, "must be > 0")
    if not 0 < t["safety"] <= 1:
        val.fail("time", "safety", "must lie in (0, 1]")
    time = TimeConfig(**t)

    a = {key: val.get("analysis", key) for key in SCHEMA["analysis"]}
    if not 0 < a["tail_fraction"] < 1:
        val.fail("analysis", "tail_fraction", "must lie in (0, 1)")
    if not a["eps_extinction"] > 0:
        val.fail("analysis", "eps_extinction", "must be > 0")
    if not a["eta_persistence"] > a["eps_extinction"]:
        val.fail("analysis", "eta_persistence", "must exceed eps_extinction")
    for key in ("tol_poincare", "poincare_period", "band_tol"):
        if not a[key] > 0:
            val.fail("analysis", key, "must be > 0")
    if a["max_iter"] < 1:
        val.fail("analysis", "max_iter", "must be >= 1")
    analysis = AnalysisConfig(**a)

    return ScenarioConfig(params, coefficients, init, domain, time, analysis)


def parse_config(text: str) -> ScenarioConfig:
    return build(read_items(text))


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return repr(value)


def render(config: ScenarioConfig) -> str:
    """Text form that parses back to an equal config."""
    p = config.params
    sections = {
        "domain": {"dim": config.domain.dim, "lengths": config.domain.lengths, "counts": config.domain.counts},
        "params": {"d1": p.d1, "d2": p.d2, "d3": p.d3, "chi1": p.chi1, "chi2": p.chi2, "k": p.k, "l": p.l,
                   "lambda": p.lam},
        "coefficients": {},
        "init": {},
        "time": vars(config.time),
        "analysis": vars(config.analysis),
    }
    for name in COEFFICIENT_NAMES:
        f = getattr(config.coefficients, name)
        for key in ("base", "temporal_amplitude", "temporal_period", "temporal_phase", "spatial_amplitude",
                    "spatial_mode"):
            sections["coefficients"][f"{name}.{key}"] = getattr(f, key)
    for sp in ("u0", "v0"):
        for key in ("base", "amplitude", "mode"):
            sections["init"][f"{sp}.{key}"] = getattr(config.init, f"{sp}_{key}")
    lines = []
    for section, values in sections.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {_fmt(v)}" for key, v in values.items())
        lines.append("")
    return "\n".join(lines)


def resolve_key(key: str) -> tuple[str, str]:
    """Map ``chi2``, ``a2.base`` or ``params.chi2`` to its (section, key)."""
    head, _, rest = key.partition(".")
    if head in SCHEMA and rest in SCHEMA[head]:
        return head, rest
    hits = [(s, key) for s, keys in SCHEMA.items() if key in keys]
    if len(hits) != 1:
        raise ConfigError(f"unknown or ambiguous config key {key!r}")
    return hits[0]


def override(config: ScenarioConfig, key: str, value) -> ScenarioConfig:
    """Copy of ``config`` with one scalar key replaced (re-validated)."""
    items = read_items(render(config))
    section, name = resolve_key(key)
    conv = SCHEMA[section][name][0]
    if conv in (_floats, _ints):
        raise ConfigError(f"{section}.{name} is not a scalar key")
    items[(section, name)] = (str(value), None)
    return build(items)
