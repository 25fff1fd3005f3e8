"""Shift of the asymptotic wave, closed-form residual-mass law and the
boundary trace of the anti-derivative perturbation.

Every flux signal passed here must provide ``eval(t)``, ``excess_integral()``
(the integral of ``eta - eta_-`` over ``[0, inf)``) and ``excess_tail(t)``
(the same integral over ``[t, inf)``); see :class:`chemowave.scenarios.EtaSpec`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import expit

from chemowave.wave_model import ModelParams, WaveParams, profile_U

DECAY_THRESHOLD = 1e-12


@dataclass
class ShiftInputs:
    x: np.ndarray
    u0: np.ndarray
    beta: float
    wp: WaveParams
    mp: ModelParams
    eta: object

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if abs(self.u0[-1]) > DECAY_THRESHOLD * self.wp.u_minus:
            raise ValueError("initial data does not decay; alpha ill-defined")


def wave_mass_tail(x_end: float, shift: float, wp: WaveParams, D: float) -> float:
    """Integral of U(x - shift) over [x_end, inf): (D u_-/s) ln(1 + e^{-s(x_end - shift)/D})."""
    return (D * wp.u_minus / wp.s) * np.log1p(np.exp(-wp.s * (x_end - shift) / D))


def compute_alpha(inp: ShiftInputs) -> float:
    """Shift making the residual mass vanish as t -> inf.

    alpha = -(1/u_-) int_0^inf [u0 - U(x - beta)] dx - (D/s) ln(1 + e^{-s beta/D})
            + (1/u_-) int_0^inf (eta - eta_-) dt
    """
    wp, D = inp.wp, inp.mp.D
    x = np.asarray(inp.x, dtype=float)
    diff = np.asarray(inp.u0) - np.asarray(profile_U(x - inp.beta, wp, D))
    # beyond the grid u0 vanishes, leaving -int U(x - beta)
    mass = simpson(diff, x=x) - wave_mass_tail(x[-1], inp.beta, wp, D)
    return float(
        -mass / wp.u_minus
        - (D / wp.s) * np.log1p(np.exp(-wp.s * inp.beta / D))
        + inp.eta.excess_integral() / wp.u_minus
    )


def _front_exponent(t, alpha, beta, wp, D):
    return (wp.s / D) * (-wp.s * np.asarray(t, dtype=float) + alpha - beta)


def residual_mass_closed(t, alpha, beta, wp: WaveParams, D: float, eta):
    """Closed form of int_0^inf [u - U(x - st + alpha - beta)] dx at time t."""
    e = _front_exponent(t, alpha, beta, wp, D)
    value = -(D * wp.u_minus / wp.s) * np.logaddexp(0.0, e) + eta.excess_tail(t)
    return float(value) if np.ndim(t) == 0 else value


def boundary_A(t, alpha, beta, wp: WaveParams, D: float, eta):
    """A(t), the prescribed boundary value of the anti-derivative perturbation.

    Same closed form as :func:`residual_mass_closed`.  Note that with the
    anti-derivative taken as -int_x^inf, phi(0, t) equals minus the residual
    mass, so phi(0, t) = -A(t); diagnostics report both signs.
    """
    return residual_mass_closed(t, alpha, beta, wp, D, eta)


def boundary_A_prime(t, alpha, beta, wp: WaveParams, D: float, eta):
    """A'(t) = s (u_- - U(-st + alpha - beta)) - (eta(t) - eta_-)."""
    t_arr = np.asarray(t, dtype=float)
    e = _front_exponent(t_arr, alpha, beta, wp, D)
    # u_- - U(z) = u_- e^a / (1 + e^a), a = s z / D
    gap = wp.u_minus * expit(e)
    value = wp.s * gap - (np.asarray(eta.eval(t_arr)) - wp.eta_minus)
    return float(value) if np.ndim(t) == 0 else value


def mass_balance_rhs(t, alpha, beta, wp: WaveParams, D: float, eta):
    """Predicted rate d/dt int_0^inf [u - U(x - st + alpha - beta)] dx."""
    return boundary_A_prime(t, alpha, beta, wp, D, eta)
