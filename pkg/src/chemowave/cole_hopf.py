"""Cole-Hopf map between the chemical concentration c and the transformed
variable v = -(ln c)_x / mu, and the exact exponential update of the c-ODE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularityError(ValueError):
    """Raised when the concentration touches zero, where ln c is undefined."""


@dataclass
class FieldPair:
    """Density samples paired with either concentration or transformed samples."""

    x: np.ndarray
    u: np.ndarray
    companion: np.ndarray
    t: float = 0.0
    kind: str = "c"

    def __post_init__(self):
        n = len(self.x)
        if n < 3 or len(self.u) != n or len(self.companion) != n:
            raise ValueError("fields must share a length of at least 3")
        if self.kind not in ("c", "v"):
            raise ValueError(f"unknown companion kind {self.kind!r}")
        if self.kind == "c" and np.any(self.companion <= 0):
            raise SingularityError("singularity: chemical concentration vanished")


def log_derivative(f: np.ndarray, dx: float) -> np.ndarray:
    """Second-order derivative of sampled ``f``: centered inside, one-sided at the ends."""
    return np.gradient(f, dx, edge_order=2)


def forward_transform(c: np.ndarray, mu: float, dx: float) -> np.ndarray:
    """v = -(ln c)_x / mu, differentiated on ln c for conditioning across the front."""
    c = np.asarray(c, dtype=float)
    if c.size < 3:
        raise ValueError("need at least 3 samples")
    if np.any(~(c > 0)):
        raise SingularityError("singularity: chemical concentration vanished")
    return -log_derivative(np.log(c), dx) / mu


def reconstruct_c(psi: np.ndarray, shifted_C: np.ndarray, mu: float) -> np.ndarray:
    """c = C(x - st + alpha - beta) * exp(-mu psi)."""
    return np.asarray(shifted_C) * np.exp(-mu * np.asarray(psi))


def ode_update_c(c_prev, u_now, u_prev, mu: float, dt: float) -> np.ndarray:
    """Advance c_t = -mu u c over one step with a trapezoidal exponent.

    Exact for u constant in time and positive for any bounded u.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    return np.asarray(c_prev) * np.exp(-0.5 * mu * dt * (np.asarray(u_now) + np.asarray(u_prev)))
