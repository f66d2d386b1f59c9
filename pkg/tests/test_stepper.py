import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from haptosim.diagnostics import DiagnosticsRecord
from haptosim.errors import ConfigError
from haptosim.model import Grid2D, ModelParams, State, homogeneous_steady_states
from haptosim.spatial_ops import StencilConfig
from haptosim.stepper import (BLOWUP, OK, UNDERFLOW, StepperConfig, detect_blowup, logistic_w, run,
                              stable_dt, step)

from conftest import gaussian_bump

G = Grid2D.unit_square(16)
CFG = StepperConfig()
UP = StencilConfig()


def rec(a, gw, **kw):
    base = dict(t=0.0, mass_u=1.0, l2_v_sq=1.0, grad_v_l2_sq=1.0, lp_a={2.0: 1.0}, linf_a=a, linf_u=a,
                linf_v=1.0, grad_w_l5=gw, energy_p={2.0: 1.0})
    base.update(kw)
    return DiagnosticsRecord(**base)


@pytest.mark.parametrize("transformed", [False, True])
@pytest.mark.parametrize("dt", [1e-3, 0.05, 1.0, 10.0])
def test_steady_states_are_fixed_points(transformed, dt):
    p = ModelParams(chi=1.3, xi=0.7, mu=2.0, eta=1.5)
    for ss in homogeneous_steady_states(p):
        s = ss.to_state(G)
        out = step(s, p, G, CFG, UP, dt, transformed=transformed)
        assert out.status == OK
        for a, b in zip((out.state.u, out.state.v, out.state.w), (s.u, s.v, s.w)):
            assert np.max(np.abs(a - b)) <= 10 * CFG.cg_rel_tol


@pytest.mark.parametrize("transformed", [False, True])
def test_zero_state_exactly_invariant(transformed):
    s = State.constant(G, 0, 0, 0)
    r = run(s, ModelParams(), G, CFG, UP, 3.0, 1.0, transformed=transformed)
    assert r.status == OK
    assert all(np.all(f == 0) for f in (r.state.u, r.state.v, r.state.w))


def test_run_one_one_zero_long():
    s = State.constant(G, 1, 1, 0)
    r = run(s, ModelParams(), G, CFG, UP, 10.0, 1.0)
    assert r.status == OK and len(r.records) == 11
    assert max(np.max(np.abs(r.state.u - 1)), np.max(np.abs(r.state.v - 1)), np.max(np.abs(r.state.w))) <= 1e-6


def test_stable_dt_unconstrained():
    s = State.constant(G, 0, 0, 0)
    assert stable_dt(s, ModelParams(mu=0, eta=0), G, CFG) == CFG.dt_init


def test_stable_dt_taxis_limit():
    # v = 10x on a grid with h = 0.01 has |∇v| = 10 in the interior
    g = Grid2D.unit_square(100)
    X, _ = g.centers()
    s = State(np.zeros(g.shape), 10 * X, np.zeros(g.shape))
    dt = stable_dt(s, ModelParams(chi=1, xi=0, mu=0, eta=0), g, StepperConfig(dt_init=1.0))
    assert dt == pytest.approx(0.5 * 0.01 / 10, rel=1e-12)


def test_detect_blowup_examples():
    assert not detect_blowup(rec(1.0, 1.0), 10)
    assert detect_blowup(rec(float("nan"), 1.0), 10)
    assert detect_blowup(rec(8.0, 3.0), 10)
    assert detect_blowup(rec(1.0, 1.0, mass_u=float("inf")), 10)


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0, 10), st.floats(1e-6, 100))
def test_logistic_w_stays_in_bounds(w0, u, v, eta, dt):
    w1 = float(logistic_w(np.array(w0), np.array(u), np.array(v), eta, dt))
    assert 0 <= w1 <= max(w0, 1.0) * (1 + 1e-12)


def test_logistic_w_matches_ode():
    # against a fine RK4 integration of w' = w(α - ηw)
    w0, u, v, eta, T = 0.3, 0.2, 0.4, 1.7, 2.0
    alpha = eta * (1 - u) - v
    f = lambda w: w * (alpha - eta * w)  # noqa: E731
    w, h = w0, T / 20000
    for _ in range(20000):
        k1 = f(w); k2 = f(w + h * k1 / 2); k3 = f(w + h * k2 / 2); k4 = f(w + h * k3)  # noqa: E702
        w += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    assert float(logistic_w(np.array(w0), np.array(u), np.array(v), eta, T)) == pytest.approx(w, rel=1e-12)


def test_logistic_w_alpha_zero_branch():
    # α = 0 reduces to w' = -ηw², w(t) = w0 / (1 + ηw0 t)
    out = float(logistic_w(np.array(0.5), np.array(0.5), np.array(0.5), 1.0, 2.0))
    assert out == pytest.approx(0.5 / (1 + 0.5 * 2.0), rel=1e-14)


def test_run_lands_on_samples_and_counts_steps():
    s = gaussian_bump(G)
    r = run(s, ModelParams(), G, CFG, UP, 0.3, 0.1)
    assert [round(x.t, 12) for x in r.records] == [0.0, 0.1, 0.2, 0.3]
    assert r.state.t == pytest.approx(0.3, abs=1e-12)
    assert r.steps >= 3 and r.clamped_total == 0


def test_blowup_threshold_stops_run():
    s = gaussian_bump(G)
    r = run(s, ModelParams(), G, StepperConfig(blowup_threshold=0.5), UP, 1.0, 0.1)
    assert r.status == BLOWUP


def test_non_finite_step_reports_blowup():
    s = gaussian_bump(G)
    s.u[3, 3] = np.inf
    out = step(s, ModelParams(), G, CFG, UP, 0.01)
    assert out.status == BLOWUP


def test_reject_mode_underflow():
    # huge chemotactic drift with a large dt drives u negative until dt < dt_min
    g = Grid2D.unit_square(16)
    X, Y = g.centers()
    s = State(np.exp(-((X - 0.5) ** 2) / 0.002), 50 * np.cos(np.pi * X), np.zeros(g.shape))
    cfg = StepperConfig(positivity_mode="reject", dt_init=1.0, dt_min=0.5)
    out = step(s, ModelParams(chi=50, xi=0), g, cfg, StencilConfig("central"), 1.0)
    assert out.status == UNDERFLOW and out.clamped_cells > 0


def test_clamp_mode_counts_cells():
    g = Grid2D.unit_square(16)
    X, _ = g.centers()
    s = State(np.exp(-((X - 0.5) ** 2) / 0.002), 50 * np.cos(np.pi * X), np.zeros(g.shape))
    out = step(s, ModelParams(chi=50, xi=0), g, CFG, StencilConfig("central"), 1.0)
    assert out.status == OK and out.clamped_cells > 0
    assert np.all(out.state.u >= 0)


@pytest.mark.parametrize("pre", ["none", "jacobi", "dct"])
@pytest.mark.parametrize("transformed", [False, True])
def test_preconditioners_agree(pre, transformed):
    s = gaussian_bump(G)
    p = ModelParams()
    ref = step(s, p, G, StepperConfig(cg_rel_tol=1e-13), UP, 0.01, transformed=transformed).state
    out = step(s, p, G, StepperConfig(cg_rel_tol=1e-13, preconditioner=pre), UP, 0.01,
               transformed=transformed).state
    assert np.max(np.abs(out.u - ref.u)) <= 1e-10


def test_config_validation():
    with pytest.raises(ConfigError):
        StepperConfig(cfl_safety=0)
    with pytest.raises(ConfigError):
        StepperConfig(dt_min=1.0, dt_init=0.1)
    with pytest.raises(ConfigError):
        StepperConfig(w_update="implicit")


def test_run_rejects_bad_times():
    s = State.constant(G, 0, 0, 0)
    with pytest.raises(ValueError):
        run(s, ModelParams(), G, CFG, UP, 0.0, 0.1)
    with pytest.raises(ValueError):
        run(s, ModelParams(), G, CFG, UP, 1.0, 0.0)


def test_mass_identity_single_step():
    s = gaussian_bump(G)
    p = ModelParams(mu=2.0)
    dt = 0.01
    n = step(s, p, G, CFG, UP, dt).state
    lhs = (G.integrate(n.u) - G.integrate(s.u)) / dt
    rhs = p.mu * G.integrate(s.u * (1 - s.u - n.w))
    assert abs(lhs - rhs) <= 1e-8 * (1 + np.max(n.u)) * G.area
    assert math.isfinite(lhs)


def test_logistic_w_large_decay_no_nan():
    w = np.array([0.0, 0.5])
    out = logistic_w(w, np.full(2, 5.0), np.full(2, 5.0), 10.0, 100.0)
    assert np.all(np.isfinite(out)) and out[0] == 0 and 0 <= out[1] < 1e-300
