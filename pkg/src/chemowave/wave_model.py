"""Closed-form traveling waves of the chemotaxis system and their selection
by the asymptotic boundary flux.

Original variables (u, c) and transformed variables (u, v) share the logistic
profile.  With ``a = s z / D`` and the translation constant fixed to one::

    U(z) = u_- / (e^a + 1)
    V(z) = v_- / (e^a + 1)
    C(z) = c_+ (e^a / (e^a + 1)) ** (D / xi)

The speed and left states are fixed by the flux ``eta_-``:
``s = (chi |eta_-|)^(1/3)``, ``u_- = (eta_-^2 / chi)^(1/3)``,
``v_- = (eta_- / chi^2)^(1/3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

# exponent beyond which the logistic factor is treated as saturated
SATURATION = 700.0

_ULPS = 4


def _close_ulps(a: float, b: float, ulps: int = _ULPS) -> bool:
    return abs(a - b) <= ulps * np.finfo(float).eps * max(abs(a), abs(b))


@dataclass(frozen=True)
class ModelParams:
    """Physical constants shared by the original and transformed systems.

    ``chi`` is stored explicitly and must equal ``mu * xi`` exactly; use
    :meth:`from_rates` to have it computed.
    """

    D: float
    xi: float
    mu: float
    chi: float
    c_plus: float

    def __post_init__(self):
        for name in ("D", "xi", "mu", "c_plus"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.chi != self.mu * self.xi:
            raise ValueError(
                f"chi={self.chi!r} does not equal mu*xi={self.mu * self.xi!r}"
            )

    @classmethod
    def from_rates(cls, D: float, mu: float, xi: float, c_plus: float = 1.0):
        return cls(D=D, xi=xi, mu=mu, chi=mu * xi, c_plus=c_plus)


@dataclass(frozen=True)
class WaveParams:
    """The wave selected by a boundary flux: speed and left far-field states."""

    s: float
    u_minus: float
    v_minus: float
    eta_minus: float

    def __post_init__(self):
        if not (self.s > 0 and self.u_minus > 0 and self.v_minus < 0 and self.eta_minus < 0):
            raise ValueError(f"invalid wave parameters {self!r}")

    @property
    def chi(self) -> float:
        return self.s * self.s / self.u_minus

    def check(self, chi: float) -> None:
        """Assert the closure identities linking (s, u_-, v_-, eta_-) for ``chi``."""
        checks = {
            "s^3 = chi|eta_-|": (self.s ** 3, chi * abs(self.eta_minus)),
            "s = sqrt(chi u_-)": (self.s, math.sqrt(chi * self.u_minus)),
            "v_- = -sqrt(u_-/chi)": (self.v_minus, -math.sqrt(self.u_minus / chi)),
            "eta_- = chi u_- v_-": (self.eta_minus, chi * self.u_minus * self.v_minus),
        }
        for label, (lhs, rhs) in checks.items():
            if not _close_ulps(lhs, rhs):
                raise ValueError(f"wave identity {label} violated: {lhs!r} vs {rhs!r}")


def select_wave(chi: float, eta_minus: float) -> WaveParams:
    """Select the unique wave for coupling ``chi`` and asymptotic flux ``eta_minus``."""
    if not chi > 0:
        raise ValueError(f"chi must be positive, got {chi!r}")
    if not eta_minus < 0:
        raise ValueError(f"flux must be inward (eta_minus < 0), got {eta_minus!r}")
    s = float(np.cbrt(chi * -eta_minus))
    u_minus = float(np.cbrt(eta_minus * eta_minus / chi))
    v_minus = float(np.cbrt(eta_minus / (chi * chi)))
    wp = WaveParams(s=s, u_minus=u_minus, v_minus=v_minus, eta_minus=eta_minus)
    wp.check(chi)
    return wp


def _logistic(z, wp: WaveParams, D: float):
    """Return ``a = s z / D``, ``p = 1/(e^a + 1)`` and ``q = 1 - p``."""
    a = wp.s * np.asarray(z, dtype=float) / D
    p = expit(-a)
    q = expit(a)
    return a, p, q


def _out(values, z):
    return float(values) if np.ndim(z) == 0 else values


def profile_U(z, wp: WaveParams, D: float):
    a, p, _ = _logistic(z, wp, D)
    U = wp.u_minus * p
    U = np.where(a > SATURATION, 0.0, np.where(a < -SATURATION, wp.u_minus, U))
    return _out(U, z)


def profile_V(z, wp: WaveParams, D: float):
    a, p, _ = _logistic(z, wp, D)
    V = wp.v_minus * p
    V = np.where(a > SATURATION, 0.0, np.where(a < -SATURATION, wp.v_minus, V))
    return _out(V, z)


def profile_C(z, wp: WaveParams, mp: ModelParams):
    """Chemical profile, evaluated through its logarithm.

    ``ln(e^a / (e^a + 1)) = -log(1 + e^-a)`` stays finite for ``a << 0`` where
    the power form underflows.
    """
    a = wp.s * np.asarray(z, dtype=float) / mp.D
    log_c = np.log(mp.c_plus) - (mp.D / mp.xi) * np.logaddexp(0.0, -a)
    C = np.where(a > SATURATION, mp.c_plus, np.exp(log_c))
    return _out(C, z)


def profile_U_prime(z, wp: WaveParams, D: float):
    # U' = -(s/D) U (1 - U/u_-)
    _, p, q = _logistic(z, wp, D)
    return _out(-(wp.s / D) * wp.u_minus * p * q, z)


def profile_V_prime(z, wp: WaveParams, D: float):
    _, p, q = _logistic(z, wp, D)
    return _out(-(wp.s / D) * wp.v_minus * p * q, z)


def profile_C_prime(z, wp: WaveParams, mp: ModelParams):
    # (ln C)' = (s / xi) / (e^a + 1)
    _, p, _ = _logistic(z, wp, mp.D)
    C = np.asarray(profile_C(z, wp, mp))
    return _out(C * (wp.s / mp.xi) * p, z)


def wave_flux(z, wp: WaveParams, D: float):
    """Flux ``D U' + chi U V`` of the wave at moving coordinate ``z``.

    Integrating the wave ODE over ``[z, inf)`` gives ``D U' + chi U V = -s U``;
    this routine evaluates the left side directly so the identity can be
    checked independently.
    """
    chi = wp.chi
    U = np.asarray(profile_U(z, wp, D))
    V = np.asarray(profile_V(z, wp, D))
    flux = D * np.asarray(profile_U_prime(z, wp, D)) + chi * U * V
    return _out(flux, z)


def ode_residual(z, wp: WaveParams, D: float):
    """Residuals ``(|-sU - chi U V - D U'|, |-sV - U|)`` of the integrated wave ODE."""
    chi = wp.chi
    U = np.asarray(profile_U(z, wp, D))
    V = np.asarray(profile_V(z, wp, D))
    Up = np.asarray(profile_U_prime(z, wp, D))
    r1 = np.abs(-wp.s * U - chi * U * V - D * Up)
    r2 = np.abs(-wp.s * V - U)
    return _out(r1, z), _out(r2, z)
