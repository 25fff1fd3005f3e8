"""Explicit finite-difference solvers on the truncated half line [0, x_max].

The transformed system

    u_t = D u_xx + chi (u v)_x,    v_t = u_x,

is discretised with centered differences in space and Heun's method (or
forward Euler) in time.  At x = 0 the flux D u_x + chi u v = eta(t) is
imposed through a ghost value of u; together with a one-sided difference of
the advective flux at the boundary node this makes the scheme conservative:
the trapezoidal mass changes by exactly -eta(t) per unit time, up to the
outflow at x_max.  The right end is pinned to the far field (0, 0).

The original system u_t = [D u_x - xi u (ln c)_x]_x, c_t = -mu u c is solved
by the same u-update with v replaced by -(ln c)_x / mu, alternated with the
exact exponential update of c.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from chemowave.cole_hopf import forward_transform, ode_update_c
from chemowave.diagnostics import DiagRecord, Recorder, ShiftedWave
from chemowave.scenarios import Scenario, build_initial
from chemowave.shift_and_balance import ShiftInputs, compute_alpha
from chemowave.wave_model import ModelParams, WaveParams

logger = logging.getLogger(__name__)

SCHEMES = ("explicit-rk2", "explicit-euler")


class BlowupError(RuntimeError):
    """Non-finite values appeared in the solution."""


@dataclass(frozen=True)
class SolverConfig:
    scheme: str = "explicit-rk2"
    cfl_safety: float = 0.4
    right_bc: str = "dirichlet-farfield"
    # relative to c_+
    c_floor: float = 1e-12

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.right_bc != "dirichlet-farfield":
            raise ValueError(f"unsupported right boundary {self.right_bc!r}")
        if not self.c_floor > 0:
            raise ValueError("c_floor must be positive")


@dataclass(frozen=True)
class Grid:
    x_max: float
    nx: int
    t_max: float
    dt: float

    @property
    def dx(self) -> float:
        return self.x_max / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.nx)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class State:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0
    step_count: int = 0
    c: np.ndarray | None = None

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.t, self.step_count,
                     None if self.c is None else self.c.copy())


def cfl_dt(dx: float, mp: ModelParams, wp: WaveParams, cfl_safety: float = 1.0) -> float:
    """cfl_safety * min(dx^2 / (2D), dx / (chi (u_- + |v_-|) + s))."""
    diffusive = dx * dx / (2.0 * mp.D)
    advective = dx / (mp.chi * (wp.u_minus + abs(wp.v_minus)) + wp.s)
    return cfl_safety * min(diffusive, advective)


def check_domain(x_max: float, beta: float, t_max: float, wp: WaveParams, D: float) -> None:
    need = beta + wp.s * t_max + 40.0 * D / wp.s
    if x_max < need:
        raise ValueError(f"x_max={x_max} too short: the front needs x_max >= {need:.6g}")


def make_grid(sc: Scenario, dx: float | None = None, t_max: float | None = None,
              dt: float | None = None, cfg: SolverConfig | None = None) -> Grid:
    """Grid for a scenario; dt defaults to the CFL step rounded down to divide t_max."""
    g = sc.grid
    dx = g.dx if dx is None else dx
    t_max = g.t_max if t_max is None else t_max
    cfg = cfg or solver_config(sc)
    check_domain(g.x_max, sc.beta, t_max, sc.wp, sc.mp.D)
    nx = int(round(g.x_max / dx)) + 1
    if dt is None:
        dt = cfl_dt(g.x_max / (nx - 1), sc.mp, sc.wp, cfg.cfl_safety)
    n = max(1, math.ceil(t_max / dt - 1e-9))
    return Grid(x_max=g.x_max, nx=nx, t_max=t_max, dt=t_max / n)


def solver_config(sc: Scenario) -> SolverConfig:
    return SolverConfig(scheme=sc.grid.scheme, cfl_safety=sc.grid.cfl_safety, c_floor=sc.grid.c_floor)


def _rhs_u(u, v, eta_t: float, dx: float, D: float, chi: float, out=None):
    """u_t for the flux form; the last node is held fixed."""
    w = u * v
    du = np.empty_like(u) if out is None else out
    du[1:-1] = D * (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx) + chi * (w[2:] - w[:-2]) / (2.0 * dx)
    # ghost u_{-1} = u_1 - 2 dx (eta - chi u_0 v_0) / D, advective flux one-sided
    u_ghost = u[1] - 2.0 * dx * (eta_t - chi * w[0]) / D
    du[0] = D * (u[1] - 2.0 * u[0] + u_ghost) / (dx * dx) + chi * (w[1] - w[0]) / dx
    du[-1] = 0.0
    return du


def _rhs_v(u, dx: float):
    dv = np.empty_like(u)
    dv[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
    dv[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx)
    dv[-1] = 0.0
    return dv


def _check_finite(state: State, *arrays) -> None:
    for arr in arrays:
        bad = ~np.isfinite(arr)
        if bad.any():
            i = int(np.argmax(bad))
            raise BlowupError(
                f"blowup: step rejected at step {state.step_count}, t={state.t:.6g}, "
                f"first bad index {i}, max|u|={np.nanmax(np.abs(state.u)):.3g}"
            )


def step(state: State, grid: Grid, mp: ModelParams, wp: WaveParams, eta,
         cfg: SolverConfig = SolverConfig()) -> State:
    """One explicit step of the transformed system."""
    dx, dt = grid.dx, grid.dt
    limit = cfl_dt(dx, mp, wp, 1.0)
    if dt > limit * (1 + 1e-12):
        raise ValueError(f"dt={dt:.3g} exceeds the stability limit {limit:.3g}")
    D, chi = mp.D, mp.chi
    u, v, t = state.u, state.v, state.t
    du1 = _rhs_u(u, v, eta.eval(t), dx, D, chi)
    dv1 = _rhs_v(u, dx)
    if cfg.scheme == "explicit-euler":
        u_new = u + dt * du1
        v_new = v + dt * dv1
    else:
        u1 = u + dt * du1
        v1 = v + dt * dv1
        du2 = _rhs_u(u1, v1, eta.eval(t + dt), dx, D, chi)
        dv2 = _rhs_v(u1, dx)
        u_new = u + 0.5 * dt * (du1 + du2)
        v_new = v + 0.5 * dt * (dv1 + dv2)
    new = State(u_new, v_new, t + dt, state.step_count + 1)
    _check_finite(new, u_new, v_new)
    return new


def _step_u_frozen(u, v, t, dt, dx, mp: ModelParams, eta, scheme: str):
    du1 = _rhs_u(u, v, eta.eval(t), dx, mp.D, mp.chi)
    if scheme == "explicit-euler":
        return u + dt * du1
    u1 = u + dt * du1
    du2 = _rhs_u(u1, v, eta.eval(t + dt), dx, mp.D, mp.chi)
    return u + 0.5 * dt * (du1 + du2)


@dataclass
class RunResult:
    records: list[DiagRecord]
    state: State
    alpha: float
    grid: Grid
    wave: ShiftedWave
    snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)
    negative_undershoots: int = 0
    max_clamped: int = 0
    clamped_mask: np.ndarray | None = None
    singular: bool = False
    error: str | None = None


def initial_alpha(sc: Scenario, x: np.ndarray, u0: np.ndarray) -> float:
    return compute_alpha(ShiftInputs(x=x, u0=u0, beta=sc.beta, wp=sc.wp, mp=sc.mp, eta=sc.eta))


def default_diag_every(grid: Grid, interval: float = 0.1) -> int:
    return max(1, int(round(interval / grid.dt)))


def run(sc: Scenario, grid: Grid | None = None, cfg: SolverConfig | None = None,
        diag_every: int | None = None, snapshot_every: int | None = None) -> RunResult:
    """Integrate the transformed system to grid.t_max, recording diagnostics.

    On a blowup the records gathered so far are kept in the result and the
    error message is stored in ``error``.
    """
    cfg = cfg or solver_config(sc)
    grid = grid or make_grid(sc, cfg=cfg)
    diag_every = diag_every or default_diag_every(grid)
    x = grid.x
    data = build_initial(sc.pert, sc.wp, sc.mp, x)
    alpha = initial_alpha(sc, x, data.u0)
    wave = ShiftedWave(x=x, wp=sc.wp, mp=sc.mp, alpha=alpha, beta=sc.beta)
    recorder = Recorder(wave=wave, eta=sc.eta)
    state = State(data.u0.copy(), data.v0.copy())
    result = RunResult(records=[recorder.record(state.u, state.v, 0.0)], state=state,
                       alpha=alpha, grid=grid, wave=wave)
    tol_neg = 1e-10 * sc.wp.u_minus
    n = grid.n_steps
    if snapshot_every:
        result.snapshots.append((0.0, state.u.copy()))
    for i in range(1, n + 1):
        try:
            state = step(state, grid, sc.mp, sc.wp, sc.eta, cfg)
        except BlowupError as exc:
            logger.error("%s", exc)
            result.error = str(exc)
            break
        if i == n:
            state.t = grid.t_max
        if state.u.min() < -tol_neg:
            result.negative_undershoots += 1
        result.state = state
        if i % diag_every == 0 or i == n:
            result.records.append(recorder.record(state.u, state.v, state.t))
        if snapshot_every and (i % snapshot_every == 0 or i == n):
            result.snapshots.append((state.t, state.u.copy()))
    if result.negative_undershoots:
        logger.info("u fell below -%g on %d steps", tol_neg, result.negative_undershoots)
    return result


def run_original(sc: Scenario, grid: Grid | None = None, cfg: SolverConfig | None = None,
                 diag_every: int | None = None, snapshot_every: int | None = None) -> RunResult:
    """Integrate the original (u, c) system as a cross-check of the transformed run.

    (ln c)_x is taken from c clamped at ``c_floor * c_+``; the number of
    clamped cells is tracked and a run with more than 1% clamped cells is
    flagged as singular.
    """
    cfg = cfg or solver_config(sc)
    grid = grid or make_grid(sc, cfg=cfg)
    diag_every = diag_every or default_diag_every(grid)
    mp, wp = sc.mp, sc.wp
    x, dx, dt = grid.x, grid.dx, grid.dt
    floor = cfg.c_floor * mp.c_plus
    data = build_initial(sc.pert, wp, mp, x)
    if np.any(data.c0 < floor):
        raise ValueError("initial concentration below c_floor")
    alpha = initial_alpha(sc, x, data.u0)
    wave = ShiftedWave(x=x, wp=wp, mp=mp, alpha=alpha, beta=sc.beta)
    recorder = Recorder(wave=wave, eta=sc.eta)
    u, c = data.u0.copy(), data.c0.copy()
    u[-1] = 0.0
    state = State(u, forward_transform(c, mp.mu, dx), 0.0, 0, c)
    result = RunResult(records=[recorder.record(u, state.v, 0.0, c=c)], state=state,
                       alpha=alpha, grid=grid, wave=wave, clamped_mask=np.zeros(grid.nx, dtype=bool))
    if snapshot_every:
        result.snapshots.append((0.0, u.copy()))
    limit = cfl_dt(dx, mp, wp, 1.0)
    if dt > limit * (1 + 1e-12):
        raise ValueError(f"dt={dt:.3g} exceeds the stability limit {limit:.3g}")
    n = grid.n_steps
    t = 0.0
    for i in range(1, n + 1):
        clamped = c < floor
        n_clamped = int(clamped.sum())
        if n_clamped:
            result.clamped_mask |= clamped
            result.max_clamped = max(result.max_clamped, n_clamped)
            if n_clamped > 0.01 * grid.nx and not result.singular:
                logger.warning("singularity dominated: original-system solve unreliable "
                               "(%d clamped cells at t=%.4g)", n_clamped, t)
                result.singular = True
        v_c = forward_transform(np.maximum(c, floor), mp.mu, dx)
        u_new = _step_u_frozen(u, v_c, t, dt, dx, mp, sc.eta, cfg.scheme)
        c = ode_update_c(c, u_new, u, mp.mu, dt)
        u = u_new
        t = grid.t_max if i == n else t + dt
        state = State(u, v_c, t, i, c)
        try:
            _check_finite(state, u, c)
        except BlowupError as exc:
            logger.error("%s", exc)
            result.error = str(exc)
            break
        result.state = state
        if i % diag_every == 0 or i == n:
            v_now = forward_transform(np.maximum(c, floor), mp.mu, dx)
            result.records.append(recorder.record(u, v_now, t, c=c))
        if snapshot_every and (i % snapshot_every == 0 or i == n):
            result.snapshots.append((t, u.copy()))
    return result
