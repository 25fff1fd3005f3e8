import logging
import math

import numpy as np
import pytest

from chemowave.diagnostics import (
    CSV_COLUMNS,
    DiagRecord,
    Recorder,
    ShiftedWave,
    anti_derivative,
    convergence_order,
    energy_terms,
    perturbation,
    read_csv,
    weight_w,
    weighted_sobolev_norm,
    write_csv,
)
from chemowave.scenarios import EtaSpec, make_scenario
from chemowave.wave_model import profile_U, profile_V

DESK = make_scenario()


def test_anti_derivative_examples():
    np.testing.assert_array_equal(anti_derivative(np.zeros(11), 0.1), np.zeros(11))
    # phi = -int_x^inf f is zero at the right end and non-decreasing for f >= 0
    x = np.linspace(0, 1, 11)
    f = np.exp(-50 * (x - 0.5) ** 2)
    phi = anti_derivative(f, 0.1)
    assert phi[-1] == 0.0 and np.all(np.diff(phi) >= 0)


def test_anti_derivative_recovers_bump_second_order():
    errs = []
    for dx in (0.1, 0.05, 0.025):
        x = np.arange(0, 20 + dx / 2, dx)
        g = np.exp(-((x - 5) ** 2))
        gp = -2 * (x - 5) * g
        errs.append(np.max(np.abs(anti_derivative(gp, dx) - g)))
    assert errs[-1] <= 1e-3
    rep = convergence_order([(0.1, errs[0]), (0.05, errs[1]), (0.025, errs[2])])
    assert 1.8 <= rep.order <= 2.2


def test_anti_derivative_tail_is_a_constant_shift():
    f = np.exp(-np.linspace(0, 30, 301))
    a = anti_derivative(f, 0.1)
    b = anti_derivative(f, 0.1, analytic_tail=0.25)
    np.testing.assert_allclose(a - b, 0.25, rtol=0, atol=1e-15)


def test_anti_derivative_warns_without_decay(caplog):
    with caplog.at_level(logging.WARNING):
        phi = anti_derivative(np.ones(5), 0.1, analytic_tail=3.0)
    assert "does not decay" in caplog.text
    assert phi[-1] == 0.0


def test_weight_examples():
    wp, D = DESK.wp, DESK.mp.D
    assert weight_w(10.0, 0.0, 0.0, 10.0, wp, D) == 2.0
    assert weight_w(0.0, 0.0, 0.0, 10.0, wp, D) == pytest.approx(1 + math.exp(-20))
    assert weight_w(12.0, 1.0, 0.0, 10.0, wp, D) == 2.0
    assert np.isfinite(weight_w(1e6, 0.0, 0.0, 10.0, wp, D))


def test_weighted_norm_examples():
    dx = 1e-3
    x = np.arange(0, np.pi + dx / 2, dx)
    # ||sin||_0 over [0, pi] = sqrt(pi/2); ||sin||_1 adds ||cos||_0 = sqrt(pi/2)
    assert weighted_sobolev_norm(np.sin(x), 1.0, 0, dx) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-3)
    assert weighted_sobolev_norm(np.sin(x), 1.0, 1, dx) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-3)
    assert weighted_sobolev_norm(np.sin(x), 4.0, 0, dx) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-3)
    assert weighted_sobolev_norm(np.zeros(10), 1.0, 2, 0.1) == 0.0


def test_weighted_norm_monotone_in_order():
    x = np.linspace(0, 10, 501)
    f = np.exp(-((x - 5) ** 2))
    n = [weighted_sobolev_norm(f, 1.0, m, x[1] - x[0]) for m in (0, 1, 2)]
    assert n[0] < n[1] < n[2]
    with pytest.raises(ValueError):
        weighted_sobolev_norm(f, 1.0, 3, 0.02)


@pytest.mark.parametrize("p", [2.0, 1.0])
def test_convergence_order_exact_power(p):
    rep = convergence_order([(0.4 / 2**k, 3.0 * (0.4 / 2**k) ** p) for k in range(4)])
    assert rep.order == pytest.approx(p, abs=1e-12)
    assert rep.ok


def test_convergence_order_flags():
    three = convergence_order([(0.2, 4e-2), (0.1, 1e-2), (0.05, 2.5e-3)])
    assert three.quality == "wide" and three.order == pytest.approx(2.0)
    bad = convergence_order([(0.2, 1e-2), (0.1, 2e-2), (0.05, 1e-3)])
    assert bad.quality == "non-monotone"
    with pytest.raises(ValueError, match="duplicate"):
        convergence_order([(0.1, 1e-2), (0.1, 1e-2), (0.05, 1e-3)])
    with pytest.raises(ValueError, match="at least 3"):
        convergence_order([(0.1, 1e-2), (0.05, 1e-3)])
    with pytest.raises(ValueError):
        convergence_order([(0.1, 1e-2), (0.03, 1e-3), (0.01, 1e-4)])


def _record(t):
    return DiagRecord(*[float(i) + t for i in range(len(CSV_COLUMNS))])


def test_csv_roundtrip_and_column_order(tmp_path):
    path = tmp_path / "d.csv"
    recs = [_record(0.0), _record(0.1)]
    write_csv(recs, path)
    header = path.read_text().splitlines()[0]
    assert header.split(",") == list(CSV_COLUMNS)
    assert CSV_COLUMNS[:3] == ("t", "sup_u_err", "sup_v_err")
    back = read_csv(path)
    assert [r.row() for r in back] == [r.row() for r in recs]


def test_read_csv_rejects_wrong_columns(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("t,foo\n0,1\n")
    with pytest.raises(ValueError):
        read_csv(path)


def test_record_of_exact_wave_is_clean():
    x = DESK.grid.coordinates()
    wp, mp = DESK.wp, DESK.mp
    wave = ShiftedWave(x=x, wp=wp, mp=mp, alpha=0.0, beta=10.0)
    rec = Recorder(wave=wave, eta=EtaSpec.wave_trace(wp, mp, 10.0))
    u, v = profile_U(x - 10.0, wp, mp.D), profile_V(x - 10.0, wp, mp.D)
    r = rec.record(u, v, 0.0)
    assert r.sup_u_err <= 1e-15 and r.sup_v_err <= 1e-15 and r.sup_c_err <= 1e-15
    assert abs(r.mass_residual_sim) <= 1e-12 and r.mass_residual_closed == 0.0
    assert r.phi_at_0 == -r.mass_residual_sim
    assert r.E <= 1e-24 and r.D_int == 0.0
    assert r.is_finite()
    assert r.c_right == pytest.approx(mp.c_plus, abs=1e-15)


def test_dissipation_integral_accumulates_trapezoid():
    x = DESK.grid.coordinates()
    wp, mp = DESK.wp, DESK.mp
    dx = x[1] - x[0]
    wave = ShiftedWave(x=x, wp=wp, mp=mp, alpha=0.0, beta=10.0)
    rec = Recorder(wave=wave, eta=EtaSpec("constant", -1.0))
    bump = 1e-3 * np.exp(-((x - 5) ** 2))
    ts, rates = (0.0, 0.5, 1.0), []
    for t in ts:
        u = profile_U(x - wave.offset(t), wp, mp.D) + bump
        v = profile_V(x - wave.offset(t), wp, mp.D)
        r = rec.record(u, v, t)
        rates.append(energy_terms(perturbation(u, v, t, wave), wave.weight(t), dx)[1])
    assert r.D_int > 0
    assert r.D_int == pytest.approx(np.trapezoid(rates, ts), rel=1e-14)
