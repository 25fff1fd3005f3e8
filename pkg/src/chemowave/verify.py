"""Property checks of the closed-form wave and the exact-wave refinement study."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from chemowave.cole_hopf import forward_transform
from chemowave.diagnostics import OrderReport, convergence_order
from chemowave.ibvp_solver import make_grid, run
from chemowave.scenarios import EtaSpec, PerturbationSpec, Scenario
from chemowave.wave_model import (
    ModelParams,
    WaveParams,
    ode_residual,
    profile_C,
    profile_U,
    profile_V,
    wave_flux,
)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    limit: float

    def __post_init__(self):
        self.passed = bool(self.passed)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": float(self.value),
                "limit": float(self.limit)}


def cole_hopf_order(mp: ModelParams, wp: WaveParams, dx0: float = 0.1, levels: int = 3,
                    half_width: float = 10.0) -> OrderReport:
    """Observed order of forward_transform(C) -> V on a dx-halving ladder."""
    L = half_width * mp.D / wp.s
    errors = []
    for k in range(levels):
        dx = dx0 / 2**k
        z = np.linspace(-L, L, int(round(2 * L / dx)) + 1)
        v = forward_transform(profile_C(z, wp, mp), mp.mu, z[1] - z[0])
        errors.append((dx, float(np.max(np.abs(v - profile_V(z, wp, mp.D))))))
    return convergence_order(errors)


def _monotone(f, core) -> bool:
    """Non-decreasing everywhere and strictly increasing on the core samples."""
    d = np.diff(f)
    strict = core[:-1] & core[1:]
    return bool(np.all(d >= 0) and np.all(d[strict] > 0))


def wave_property_suite(mp: ModelParams, wp: WaveParams, n_samples: int = 1000,
                        seed: int = 0) -> list[Check]:
    """ODE residuals, monotonicity, U = -sV, flux limits and the Cole-Hopf fixed point."""
    D = mp.D
    rng = np.random.default_rng(seed)
    L = 30.0 * D / wp.s
    z = np.sort(rng.uniform(-L, L, n_samples))
    U, V, C = profile_U(z, wp, D), profile_V(z, wp, D), profile_C(z, wp, mp)
    r1, r2 = ode_residual(z, wp, D)
    # strict monotonicity where the logistic factor is resolved in double precision
    core = np.abs(wp.s * z / D) <= 30.0
    eps = np.finfo(float).eps
    rel_sv = np.abs(U + wp.s * V) / np.maximum(np.abs(U), np.finfo(float).tiny)
    far = 1e3 * D / wp.s
    flux_left = wave_flux(-far, wp, D)
    flux_right = wave_flux(far, wp, D)
    order = cole_hopf_order(mp, wp)
    huge = np.array([-1e6, 1e6])
    finite = all(np.all(np.isfinite(f(huge, wp, D))) for f in (profile_U, profile_V)) and np.all(
        np.isfinite(profile_C(huge, wp, mp)))
    return [
        Check("ode_residual_flux", float(r1.max()) <= 1e-12 * wp.u_minus, float(r1.max()), 1e-12 * wp.u_minus),
        Check("ode_residual_mass", float(r2.max()) <= 1e-12 * wp.u_minus, float(r2.max()), 1e-12 * wp.u_minus),
        Check("U_decreasing", _monotone(-U, core), float(np.max(np.diff(U))), 0.0),
        Check("V_increasing", _monotone(V, core), float(np.min(np.diff(V))), 0.0),
        Check("C_increasing", _monotone(C, core), float(np.min(np.diff(C))), 0.0),
        Check("U_equals_minus_sV", float(rel_sv.max()) <= 4 * eps, float(rel_sv.max()), 4 * eps),
        Check("flux_left_limit", abs(flux_left - wp.eta_minus) <= 1e-12 * abs(wp.eta_minus),
              abs(flux_left - wp.eta_minus), 1e-12 * abs(wp.eta_minus)),
        Check("flux_right_limit", abs(flux_right) <= 1e-12, abs(flux_right), 1e-12),
        Check("profiles_finite", bool(finite), 0.0, 0.0),
        Check("cole_hopf_order", 1.7 <= order.order <= 2.3, order.order, 2.0),
    ]


def exact_wave_scenario(sc: Scenario) -> Scenario:
    """Same model and grid, initial data (U, V)(x - beta) and the wave's own boundary flux."""
    eta = EtaSpec.wave_trace(sc.wp, sc.mp, sc.beta)
    return replace(sc, eta=eta, pert=PerturbationSpec(beta=sc.beta, center=sc.pert.center,
                                                      width=sc.pert.width))


@dataclass
class LadderResult:
    levels: list[tuple[float, float, float]]  # (dx, dt, sup error at t_max)
    report: OrderReport

    def as_dict(self) -> dict:
        return {
            "levels": [{"dx": dx, "dt": dt, "sup_u_err": e} for dx, dt, e in self.levels],
            "order": self.report.order,
            "pairwise": self.report.pairwise,
            "quality": self.report.quality,
        }


def exact_wave_ladder(sc: Scenario, dxs) -> LadderResult:
    """Sup error of the exact-wave run at t_max on each dx; dt follows the diffusive CFL (dt ~ dx^2)."""
    dxs = [float(d) for d in dxs]
    if len(set(dxs)) != len(dxs):
        raise ValueError("duplicate refinement levels")
    ex = exact_wave_scenario(sc)
    rows = []
    for dx in dxs:
        grid = make_grid(ex, dx=dx)
        res = run(ex, grid, diag_every=grid.n_steps)
        if res.error:
            raise RuntimeError(res.error)
        rows.append((dx, grid.dt, res.records[-1].sup_u_err))
    return LadderResult(levels=rows, report=convergence_order([(dx, e) for dx, _, e in rows]))
