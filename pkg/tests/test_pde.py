import numpy as np
import pytest

from chemolab import CoefficientBundle, CoefficientField, FieldState, Grid, Model, StepperConfig, simulate
from chemolab import hypothesis as hyp
from chemolab.pde import (BlowUpError, PositivityError, SimulationError, adaptive_dt, chemotaxis_flux,
                          flux_divergence, prepare, step)

from conftest import EQ_H4, h4_bundle, model_1d, params


def test_flux_vanishes_for_flat_signal():
    g = Grid((1.0,), (9,))
    rho = np.linspace(0.1, 1, 9)
    assert np.all(chemotaxis_flux(g, rho, np.full(9, 2.0), 0.3)[0] == 0)
    assert np.all(chemotaxis_flux(g, rho, rho ** 2, 0.0)[0] == 0)


def test_flux_linear_signal():
    g = Grid((1.0,), (5,))
    w = 0.5 + 2.0 * g.coords[0]
    f = chemotaxis_flux(g, np.full(5, 0.3), w, 0.7)[0]
    assert f.shape == (4,)
    assert np.allclose(f, 0.7 * 0.3 * 2.0, rtol=1e-14)


def test_flux_is_upwinded():
    g = Grid((1.0,), (3,))
    rho = np.array([1.0, 2.0, 4.0])
    f = chemotaxis_flux(g, rho, np.array([0.0, 1.0, 0.0]), 1.0)[0]
    # uphill towards the middle node from both sides: density taken from the outer nodes
    assert f.tolist() == [1.0 * 2.0, 4.0 * -2.0]


def test_flux_divergence_conserves_mass(rng):
    for shape in ((17,), (9, 13)):
        g = Grid((1.0,) * len(shape), shape)
        rho, w = rng.uniform(0, 1, (2, *shape))
        div = flux_divergence(g, chemotaxis_flux(g, rho, w, 0.8))
        assert abs(g.integrate(div)) <= 1e-12


def test_homogeneous_step_matches_reaction():
    m = model_1d(h4_bundle())
    s = prepare(FieldState(0.0, np.full(65, 0.3), np.full(65, 0.6)), m)
    for dt in (0.02, 0.01):
        nxt = step(s, m, StepperConfig(), dt)
        assert np.ptp(nxt.u) <= 1e-14 and np.ptp(nxt.v) <= 1e-14
        euler = 0.3 + dt * 0.3 * (1 - 2 * 0.3 - 0.2 * 0.6)
        assert abs(nxt.u[0] - euler) <= 0.5 * dt ** 2


def test_zero_state_stays_zero():
    m = model_1d(h4_bundle())
    s = prepare(FieldState(0.0, np.zeros(65), np.zeros(65)), m)
    nxt = step(s, m, StepperConfig(), 0.01)
    assert np.all(nxt.u == 0) and np.all(nxt.v == 0) and np.all(nxt.w == 0)


def test_logistic_bound_not_exceeded():
    p = params()
    b = CoefficientBundle.constant(1, 2, 1, 1, 1, 2)
    A1, A2 = hyp.bounds_upper_A(Model(p, b, Grid((1.0,), (65,))).extrema, p)
    m = model_1d(b, p)
    s = prepare(FieldState(0.0, np.full(65, A1), np.full(65, A2)), m)
    for _ in range(5):
        s = step(s, m, StepperConfig(), adaptive_dt(s, m, StepperConfig()))
        assert s.u.max() <= A1 + 1e-9 and s.v.max() <= A2 + 1e-9


def test_step_requires_consistent_signal():
    m = model_1d(h4_bundle())
    with pytest.raises(ValueError):
        step(FieldState(0.0, np.ones(65), np.ones(65), np.zeros(65)), m, StepperConfig(), 0.01)


def test_dt_for_zero_fields():
    m = model_1d(h4_bundle())
    s = prepare(FieldState(0.0, np.zeros(65), np.zeros(65)), m)
    # reaction rate 1 at zero density: bound min(dt_max, 1) = dt_max
    assert adaptive_dt(s, m, StepperConfig(dt_max=0.05, safety=0.8)) == pytest.approx(0.8 * 0.05)


def test_dt_advective_bound_scales():
    m = model_1d(h4_bundle(), params(chi1=50.0, chi2=50.0), n=33)
    cfg = StepperConfig(dt_max=1.0, safety=1.0)
    x = m.grid.coords[0]
    u = np.full(33, 1e-3)
    s1 = FieldState(0.0, u, u, np.cos(np.pi * x))
    s2 = FieldState(0.0, u, u, 2 * np.cos(np.pi * x))
    assert adaptive_dt(s2, m, cfg) == pytest.approx(adaptive_dt(s1, m, cfg) / 2, rel=1e-12)


def test_dt_reaction_bound():
    m = model_1d(CoefficientBundle.constant(10, 1, 1, 1, 1, 1), params(0, 0))
    s = prepare(FieldState(0.0, np.zeros(65), np.zeros(65)), m)
    cfg = StepperConfig(dt_max=1.0, safety=0.9)
    assert adaptive_dt(s, m, cfg) == pytest.approx(0.9 * 0.1)


def test_homogeneous_run_reaches_equilibrium():
    m = model_1d(h4_bundle())
    out = simulate(m, FieldState(0.0, 0.3, 0.3), 40.0, sample_every=1.0)
    fin = out.final
    assert fin["min_u"] == pytest.approx(EQ_H4, abs=1e-6) and fin["max_u"] == pytest.approx(EQ_H4, abs=1e-6)
    assert fin["min_w"] == pytest.approx(2 * EQ_H4, abs=1e-6)
    assert fin["mass_u"] == pytest.approx(EQ_H4, abs=1e-6)


def test_zero_init_summary():
    out = simulate(model_1d(h4_bundle()), FieldState(0.0, 0.0, 0.0), 2.0, sample_every=0.5)
    assert out.array("t").tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]
    for name in out.COLUMNS[1:]:
        assert np.all(out.array(name) == 0)


def test_sampling_and_snapshots():
    m = model_1d(h4_bundle())
    init = FieldState(0.0, 0.3 + 0.1 * np.cos(np.pi * m.grid.coords[0]), 0.4)
    out = simulate(m, init, 1.1, sample_every=0.5, snapshot_times=(0.7,))
    assert out.array("t").tolist() == pytest.approx([0.0, 0.5, 1.0, 1.1])
    assert out.snapshots[0.7].t == 0.7


def test_strong_chemotaxis_stays_nonnegative(rng):
    m = model_1d(CoefficientBundle.constant(1, 1, 1, 1, 1, 1), params(chi1=5.0, chi2=5.0), n=33)
    u = rng.uniform(0, 1, 33) * (rng.uniform(size=33) < 0.5)
    v = rng.uniform(0, 1, 33)
    out = simulate(m, FieldState(0.0, u, v), 2.0, sample_every=0.1)
    assert min(out.min_u) >= 0 and min(out.min_v) >= 0


def test_two_dimensional_mass_balance_without_reaction_growth():
    # a0 tiny and a1 tiny: transport dominates over a short window, mass nearly conserved
    g = Grid((1.0, 1.0), (17, 17))
    b = CoefficientBundle.constant(1e-9, 1e-9, 1e-9, 1e-9, 1e-9, 1e-9)
    m = Model(params(chi1=1.0, chi2=1.0), b, g)
    x, y = g.coords
    u = 1 + 0.5 * np.cos(np.pi * x) * np.cos(np.pi * y)
    out = simulate(m, FieldState(0.0, u, np.ones(g.shape)), 0.2, sample_every=0.1)
    assert out.mass_u[-1] == pytest.approx(out.mass_u[0], rel=1e-7)


def test_errors_carry_time_and_summary():
    m = model_1d(h4_bundle())
    with pytest.raises(PositivityError):
        simulate(m, FieldState(0.0, -1.0, 0.5), 1.0)
    with pytest.raises(BlowUpError) as info:
        simulate(m, FieldState(0.0, 1e13, 0.5), 1.0)
    assert isinstance(info.value, SimulationError)
    assert info.value.t == 0.0 and info.value.summary is not None


@pytest.mark.parametrize("lengths,counts", [((1.0,), (65,)), ((2.5,), (65,)), ((2.0, 1.5), (21, 17))])
def test_mass_bound(lengths, counts):
    p = params(chi1=0.3, chi2=0.2)
    fields = [CoefficientField(c, 0.2 * c, 3.0, ph, (0.1 * c,), (1,)) for c, ph in
              zip((1, 2, 0.5, 1, 0.5, 2), (0, 1, 2, 0.5, 1.5, 2.5))]
    m = Model(p, CoefficientBundle(*fields), Grid(lengths, counts))
    assert hyp.check_h3(m.extrema, p, m.grid.dim)
    x = m.grid.coords[0]
    for scale in (0.1, 3.0):  # starting below and above the ceiling
        u0 = scale * (1 + 0.5 * np.cos(np.pi * x / lengths[0]))
        v0 = scale * (1 - 0.5 * np.cos(2 * np.pi * x / lengths[0]))
        out = simulate(m, FieldState(0.0, u0, v0), 15.0, sample_every=0.25)
        Mu, Mv = hyp.mass_bounds(m.extrema, out.mass_u[0], out.mass_v[0], m.grid.volume)
        assert max(out.mass_u) <= Mu + 1e-6
        assert max(out.mass_v) <= Mv + 1e-6
