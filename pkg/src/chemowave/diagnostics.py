"""Measured quantities: anti-derivative perturbations, weighted Sobolev norms,
sup-norm distances to the shifted wave, residual masses, boundary traces and
the energy functional of the a priori estimate."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from chemowave.cole_hopf import reconstruct_c
from chemowave.shift_and_balance import boundary_A, residual_mass_closed, wave_mass_tail
from chemowave.wave_model import SATURATION, ModelParams, WaveParams, profile_C, profile_U, profile_V

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "t",
    "sup_u_err",
    "sup_v_err",
    "sup_c_err",
    "mass_residual_sim",
    "mass_residual_closed",
    "phi_at_0",
    "A_of_t",
    "E",
    "D_int",
    "norm_phi_2w",
    "norm_psi",
    "norm_psix_1w",
)


@dataclass
class DiagRecord:
    t: float
    sup_u_err: float
    sup_v_err: float
    sup_c_err: float
    mass_residual_sim: float
    mass_residual_closed: float
    phi_at_0: float
    A_of_t: float
    E: float
    D_int: float
    norm_phi_2w: float
    norm_psi: float
    norm_psix_1w: float
    # not part of the CSV contract
    sup_psi: float = 0.0
    c_right: float = math.nan

    def row(self) -> list[float]:
        return [getattr(self, name) for name in CSV_COLUMNS]

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.row())


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([repr(float(v)) for v in rec.row()])


def read_csv(path) -> list[DiagRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
        return [DiagRecord(**{k: float(v) for k, v in row.items()}) for row in reader]


def anti_derivative(f, dx: float, analytic_tail: float = 0.0, decay_tol: float = 1e-8):
    """phi(x) = -int_x^inf f, as a right-to-left cumulative trapezoid plus the tail.

    ``analytic_tail`` is the integral of ``f`` over ``[x_max, inf)``.  The sum
    runs from the right so small far-field values keep their relative accuracy.
    """
    f = np.asarray(f, dtype=float)
    scale = max(1.0, float(np.max(np.abs(f))))
    if abs(f[-1]) > decay_tol * scale:
        logger.warning("anti_derivative: integrand does not decay (f[-1]=%g); tail set to 0", f[-1])
        analytic_tail = 0.0
    right = cumulative_trapezoid(f[::-1], dx=dx, initial=0.0)[::-1]
    return -right - analytic_tail


def weight_w(x, t, alpha, beta, wp: WaveParams, D: float):
    """w(x, t) = 1 + exp((s/D)(x - st + alpha - beta)), exponent capped against overflow."""
    e = (wp.s / D) * (np.asarray(x, dtype=float) - wp.s * t + alpha - beta)
    w = 1.0 + np.exp(np.minimum(e, SATURATION))
    return float(w) if np.ndim(x) == 0 else w


def derivative(f, dx: float):
    return np.gradient(f, dx, edge_order=2)


def weighted_sobolev_norm(f, w, m: int, dx: float) -> float:
    """sum_{k<=m} sqrt(sum_i w_i (d^k f)_i^2 dx), derivatives by centered differences."""
    if m not in (0, 1, 2):
        raise ValueError("order m must be 0, 1 or 2")
    f = np.asarray(f, dtype=float)
    if f.size < m + 2:
        raise ValueError("field too short for the requested order")
    w = np.broadcast_to(np.asarray(w, dtype=float), f.shape)
    total = 0.0
    g = f
    for k in range(m + 1):
        if k:
            g = derivative(g, dx)
        total += math.sqrt(float(np.sum(w * g * g)) * dx)
    return total


@dataclass
class OrderReport:
    order: float
    pairwise: list[float]
    quality: str

    @property
    def ok(self) -> bool:
        return self.quality == "ok"


def convergence_order(errors) -> OrderReport:
    """Least-squares slope of log(error) against log(dx) over a halving ladder.

    ``quality`` is "ok", "wide" (only three levels or scattered pairwise
    orders) or "non-monotone" (errors do not decrease with dx).
    """
    pairs = sorted(((float(h), float(e)) for h, e in errors), reverse=True)
    if len(pairs) < 3:
        raise ValueError("need at least 3 refinement levels")
    hs = np.array([p[0] for p in pairs])
    es = np.array([p[1] for p in pairs])
    if len(set(hs.tolist())) != len(hs):
        raise ValueError("duplicate refinement levels")
    if np.any(hs <= 0) or np.any(es <= 0):
        raise ValueError("dx and errors must be positive")
    ratios = hs[:-1] / hs[1:]
    if not np.allclose(ratios, 2.0, rtol=1e-9):
        raise ValueError("levels must halve dx")
    order = float(np.polyfit(np.log(hs), np.log(es), 1)[0])
    pairwise = [float(v) for v in np.log(es[:-1] / es[1:]) / np.log(ratios)]
    if np.any(np.diff(es) >= 0):
        quality = "non-monotone"
    elif len(pairs) == 3 or max(pairwise) - min(pairwise) > 0.5:
        quality = "wide"
    else:
        quality = "ok"
    return OrderReport(order=order, pairwise=pairwise, quality=quality)


@dataclass
class ShiftedWave:
    """The target profile (U, V, C)(x - st + alpha - beta) on a fixed grid."""

    x: np.ndarray
    wp: WaveParams
    mp: ModelParams
    alpha: float
    beta: float

    def offset(self, t: float) -> float:
        # z = x - offset(t)
        return self.wp.s * t - self.alpha + self.beta

    def U(self, t):
        return profile_U(self.x - self.offset(t), self.wp, self.mp.D)

    def V(self, t):
        return profile_V(self.x - self.offset(t), self.wp, self.mp.D)

    def C(self, t):
        return profile_C(self.x - self.offset(t), self.wp, self.mp)

    def mass_tail(self, t) -> float:
        return wave_mass_tail(self.x[-1], self.offset(t), self.wp, self.mp.D)

    def weight(self, t):
        return weight_w(self.x, t, self.alpha, self.beta, self.wp, self.mp.D)


@dataclass
class Perturbation:
    """Anti-derivative perturbation (phi, psi) and its sampled derivatives."""

    phi: np.ndarray
    psi: np.ndarray
    phi_x: np.ndarray
    psi_x: np.ndarray


def perturbation(u, v, t: float, wave: ShiftedWave) -> Perturbation:
    dx = float(wave.x[1] - wave.x[0])
    phi_x = np.asarray(u) - wave.U(t)
    psi_x = np.asarray(v) - wave.V(t)
    # beyond the grid u = v = 0, so the tails are -int U and -int V
    tail_u = -wave.mass_tail(t)
    tail_v = tail_u * wave.wp.v_minus / wave.wp.u_minus
    return Perturbation(
        phi=anti_derivative(phi_x, dx, tail_u),
        psi=anti_derivative(psi_x, dx, tail_v),
        phi_x=phi_x,
        psi_x=psi_x,
    )


def energy_terms(p: Perturbation, w, dx: float):
    """Return (E, dissipation rate, (|phi|_{2,w}, |psi|, |psi_x|_{1,w}))."""
    n_phi = weighted_sobolev_norm(p.phi, w, 2, dx)
    n_psi = weighted_sobolev_norm(p.psi, 1.0, 0, dx)
    n_psix = weighted_sobolev_norm(p.psi_x, w, 1, dx)
    E = n_phi**2 + n_psi**2 + n_psix**2
    rate = weighted_sobolev_norm(p.phi_x, w, 2, dx) ** 2 + n_psix**2
    return E, rate, (n_phi, n_psi, n_psix)


@dataclass
class Recorder:
    """Per-run diagnostics; owns the running dissipation integral."""

    wave: ShiftedWave
    eta: object
    D_int: float = 0.0
    _last: tuple | None = field(default=None, repr=False)

    def record(self, u, v, t: float, c=None) -> DiagRecord:
        wave = self.wave
        wp, mp = wave.wp, wave.mp
        dx = float(wave.x[1] - wave.x[0])
        p = perturbation(u, v, t, wave)
        w = wave.weight(t)
        E, rate, norms = energy_terms(p, w, dx)
        if self._last is not None:
            t_prev, rate_prev = self._last
            self.D_int += 0.5 * (t - t_prev) * (rate + rate_prev)
        self._last = (t, rate)

        C_shift = wave.C(t)
        if c is None:
            c = reconstruct_c(p.psi, C_shift, mp.mu)
        A = boundary_A(t, wave.alpha, wave.beta, wp, mp.D, self.eta)
        return DiagRecord(
            t=float(t),
            sup_u_err=float(np.max(np.abs(p.phi_x))),
            sup_v_err=float(np.max(np.abs(p.psi_x))),
            sup_c_err=float(np.max(np.abs(np.asarray(c) - C_shift))),
            mass_residual_sim=float(-p.phi[0]),
            mass_residual_closed=residual_mass_closed(t, wave.alpha, wave.beta, wp, mp.D, self.eta),
            phi_at_0=float(p.phi[0]),
            A_of_t=A,
            E=E,
            D_int=self.D_int,
            norm_phi_2w=norms[0],
            norm_psi=norms[1],
            norm_psix_1w=norms[2],
            sup_psi=float(np.max(np.abs(p.psi))),
            c_right=float(np.asarray(c)[-1]),
        )

