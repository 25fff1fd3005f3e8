import numpy as np
import pytest

from chemowave.ibvp_solver import (
    BlowupError,
    Grid,
    SolverConfig,
    State,
    cfl_dt,
    make_grid,
    run,
    run_original,
    step,
)
from chemowave.scenarios import EtaSpec, make_scenario
from chemowave.verify import exact_wave_scenario
from chemowave.wave_model import profile_U, profile_V

DESK = make_scenario()
WP, MP = DESK.wp, DESK.mp
TRACE = EtaSpec.wave_trace(WP, MP, 10.0)


class ZeroFlux:
    def eval(self, t):
        return 0.0


def wave_state(x):
    return State(profile_U(x - 10.0, WP, MP.D), profile_V(x - 10.0, WP, MP.D))


def one_step_grid(dx, dt=None):
    dt = dt or cfl_dt(dx, MP, WP, 0.4)
    return Grid(x_max=80.0, nx=int(round(80.0 / dx)) + 1, t_max=dt, dt=dt)


def test_cfl_examples():
    assert cfl_dt(0.05, MP, WP) == pytest.approx(0.00125)
    assert cfl_dt(0.05, MP, WP, 0.4) == pytest.approx(5e-4)
    # the advective limit binds on coarse grids: dx / (chi (u_- + |v_-|) + s) = dx / 8
    assert cfl_dt(1.0, MP, WP) == pytest.approx(1 / 8)


def test_make_grid_divides_t_max():
    g = make_grid(DESK)
    assert g.nx == 1601 and g.dx == pytest.approx(0.05)
    assert g.n_steps * g.dt == pytest.approx(15.0, rel=1e-14)
    assert g.dt <= cfl_dt(0.05, MP, WP, 0.4)


def test_short_domain_rejected():
    with pytest.raises(ValueError, match="too short"):
        make_grid(DESK.with_grid(x_max=30.0))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(scheme="implicit")
    with pytest.raises(ValueError):
        SolverConfig(cfl_safety=1.5)
    with pytest.raises(ValueError):
        SolverConfig(c_floor=0.0)


def test_zero_equilibrium_unchanged():
    g = one_step_grid(0.1)
    st = State(np.zeros(g.nx), np.zeros(g.nx))
    for scheme in ("explicit-rk2", "explicit-euler"):
        new = step(st, g, MP, WP, ZeroFlux(), SolverConfig(scheme=scheme))
        assert np.all(new.u == 0.0) and np.all(new.v == 0.0)
        assert new.t == g.dt and new.step_count == 1


def test_one_step_of_exact_wave_is_second_order_in_space():
    """Local error over one step is O(dt (dx^2 + dt)); with dt ~ dx^2 the ratio to dt falls by 4."""
    per_dt = []
    for dx in (0.1, 0.05, 0.025):
        g = one_step_grid(dx)
        x = g.x
        new = step(wave_state(x), g, MP, WP, TRACE)
        err = np.max(np.abs(new.u - profile_U(x - WP.s * g.dt - 10.0, WP, MP.D)))
        assert err <= g.dt * (dx * dx + g.dt)
        per_dt.append(err / g.dt)
    assert 3.5 <= per_dt[0] / per_dt[1] <= 4.5
    assert 3.5 <= per_dt[1] / per_dt[2] <= 4.5


def test_rk2_half_steps_agree_to_third_order():
    diffs = []
    for dx in (0.1, 0.05):
        g = one_step_grid(dx)
        half = Grid(g.x_max, g.nx, g.dt, g.dt / 2)
        st = wave_state(g.x)
        full = step(st, g, MP, WP, TRACE)
        two = step(step(st, half, MP, WP, TRACE), half, MP, WP, TRACE)
        diffs.append(np.max(np.abs(full.u - two.u)))
    # dt ~ dx^2, so dt^3 falls by 64 per halving of dx
    assert 40 <= diffs[0] / diffs[1] <= 90


def test_euler_and_rk2_differ_at_second_order():
    diffs = []
    for dt in (1e-3, 5e-4):
        g = one_step_grid(0.1, dt=dt)
        st = wave_state(g.x)
        e = step(st, g, MP, WP, TRACE, SolverConfig(scheme="explicit-euler"))
        h = step(st, g, MP, WP, TRACE)
        diffs.append(np.max(np.abs(e.u - h.u)))
    assert 3.5 <= diffs[0] / diffs[1] <= 4.5


@pytest.mark.parametrize("scheme", ["explicit-rk2", "explicit-euler"])
def test_mass_changes_by_boundary_flux(scheme):
    """The trapezoid mass changes by exactly -dt times the (averaged) boundary flux."""
    eta = EtaSpec("power-law", -1.0, delta=0.3, k=3)
    g = one_step_grid(0.05)
    st = wave_state(g.x)
    st.u = st.u + 1e-3 * np.exp(-((g.x - 5) ** 2))
    new = step(st, g, MP, WP, eta, SolverConfig(scheme=scheme))
    mass = lambda u: g.dx * (u.sum() - 0.5 * (u[0] + u[-1]))
    flux = eta.eval(0.0) if scheme == "explicit-euler" else 0.5 * (eta.eval(0.0) + eta.eval(g.dt))
    assert abs((mass(new.u) - mass(st.u)) + g.dt * flux) <= 1e-15


def test_dt_above_stability_limit_rejected():
    g = one_step_grid(0.05, dt=0.01)
    with pytest.raises(ValueError, match="stability"):
        step(wave_state(g.x), g, MP, WP, TRACE)


def test_non_finite_state_raises_blowup():
    g = one_step_grid(0.1)
    st = wave_state(g.x)
    st.u[100] = np.nan
    with pytest.raises(BlowupError, match="blowup"):
        step(st, g, MP, WP, TRACE)


def test_run_is_deterministic():
    sc = make_scenario(form="power-law", delta=0.01, amp_phi=1e-3, amp_psi=1e-3, t_max=0.5, dx=0.1)
    a, b = run(sc), run(sc)
    assert [r.row() for r in a.records] == [r.row() for r in b.records]
    assert np.array_equal(a.state.u, b.state.u)


def test_exact_wave_error_levels_off():
    ex = exact_wave_scenario(DESK.with_grid(dx=0.1, t_max=10.0))
    res = run(ex)
    assert res.error is None and res.alpha == 0.0
    err = {round(r.t, 6): r.sup_u_err for r in res.records}
    assert err[10.0] <= 1.05 * err[5.0]
    assert err[10.0] <= 1e-3
    assert res.negative_undershoots == 0


def test_run_keeps_far_field():
    sc = make_scenario(amp_phi=1e-3, amp_psi=1e-3, t_max=1.0, dx=0.1)
    res = run(sc, snapshot_every=500)
    assert res.state.u[-1] == 0.0 and res.state.v[-1] == 0.0
    assert res.snapshots[0][0] == 0.0 and res.snapshots[-1][0] == 1.0
    assert all(abs(r.c_right - MP.c_plus) <= 1e-10 for r in res.records)


def test_run_original_far_field_and_agreement():
    sc = make_scenario(form="power-law", delta=0.01, amp_phi=1e-3, amp_psi=1e-3, t_max=1.0, dx=0.1)
    orig = run_original(sc)
    trans = run(sc)
    assert orig.max_clamped == 0 and not orig.singular
    assert np.max(np.abs(orig.state.c[-5:] - MP.c_plus)) <= 1e-10
    assert np.max(np.abs(orig.state.u - trans.state.u)) <= 1e-3 * WP.u_minus


def test_run_original_flags_singular_region():
    # with a floor of 1e-3 c_+ the concentration behind the front is soon clamped
    sc = make_scenario(t_max=4.0, dx=0.1, c_floor=1e-3)
    res = run_original(sc)
    assert res.max_clamped > 0.01 * res.grid.nx
    assert res.singular
    assert res.clamped_mask[0] and not res.clamped_mask[-1]
