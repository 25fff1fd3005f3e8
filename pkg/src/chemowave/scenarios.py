"""Boundary-flux signals, perturbed initial data and scenario files.

A scenario file is INI-style text with the sections ``[model]``, ``[wave]``,
``[eta]``, ``[perturbation]`` and ``[grid]``::

    [model]
    D = 1.0
    mu = 2.0
    xi = 4.0
    c_plus = 1.0

    [wave]
    beta = 10.0

    [eta]
    form = power-law
    eta_minus = -1.0
    delta = 0.01
    k = 3

    [perturbation]
    amp_phi = 1e-3
    amp_psi = 1e-3
    center = 5.0
    width = 1.0

    [grid]
    x_max = 80.0
    dx = 0.05
    t_max = 15.0
    cfl_safety = 0.4

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import expit, spence

from chemowave.diagnostics import weight_w, weighted_sobolev_norm
from chemowave.shift_and_balance import ShiftInputs, compute_alpha
from chemowave.wave_model import ModelParams, WaveParams, profile_C, profile_U, profile_V, select_wave

FORMS = ("constant", "power-law", "wave-trace")


@dataclass(frozen=True)
class EtaSpec:
    """Boundary flux eta(t) converging to ``eta_minus``.

    ``constant``: eta = eta_-.
    ``power-law``: eta = eta_- + delta (1 + t)^-k.
    ``wave-trace``: eta(t) is the flux of the wave U(x - st - beta) at x = 0,
    i.e. -s U(-st - beta); it needs ``chi``, ``D`` and ``beta``.
    """

    form: str
    eta_minus: float
    delta: float = 0.0
    k: float = 3.0
    chi: float | None = None
    D: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown eta form {self.form!r}")
        if not self.eta_minus < 0:
            raise ValueError("flux must be inward (eta_minus < 0)")
        if self.form == "power-law":
            if self.delta < 0:
                raise ValueError("delta must be non-negative")
            if not self.k > 1:
                raise ValueError("power-law decay exponent must exceed 1")
        if self.form == "wave-trace" and None in (self.chi, self.D, self.beta):
            raise ValueError("wave-trace flux needs chi, D and beta")

    @classmethod
    def wave_trace(cls, wp: WaveParams, mp: ModelParams, beta: float) -> "EtaSpec":
        return cls("wave-trace", wp.eta_minus, chi=mp.chi, D=mp.D, beta=beta)

    def _trace(self):
        wp = select_wave(self.chi, self.eta_minus)
        return wp.s, wp.u_minus, self.D, self.beta

    def excess(self, t):
        """eta(t) - eta_-, evaluated without cancellation."""
        t = np.asarray(t, dtype=float)
        if self.form == "constant":
            out = np.zeros_like(t)
        elif self.form == "power-law":
            out = self.delta * (1.0 + t) ** (-self.k)
        else:
            s, u_minus, D, beta = self._trace()
            out = s * u_minus * expit(-(s / D) * (s * t + beta))
        return float(out) if out.ndim == 0 else out

    def eval(self, t):
        return self.eta_minus + self.excess(t)

    def excess_integral(self) -> float:
        """int_0^inf (eta - eta_-) dt."""
        return self.excess_tail(0.0)

    def excess_tail(self, t):
        """int_t^inf (eta - eta_-) dtau."""
        t = np.asarray(t, dtype=float)
        if self.form == "constant":
            out = np.zeros_like(t)
        elif self.form == "power-law":
            out = self.delta * (1.0 + t) ** (1.0 - self.k) / (self.k - 1.0)
        else:
            s, u_minus, D, beta = self._trace()
            out = (D * u_minus / s) * np.logaddexp(0.0, -(s / D) * (s * t + beta))
        return float(out) if out.ndim == 0 else out

    def variation(self) -> float:
        """int_0^inf |eta'| dt; every form is monotone, so this is the total drop."""
        return self.excess(0.0)

    def tail_integral(self) -> float:
        """int_0^inf int_tau^inf |eta - eta_-| dz dtau."""
        if self.form == "constant":
            return 0.0
        if self.form == "power-law":
            if not self.k > 2:
                raise ValueError("fourth around-integral diverges for k <= 2")
            return self.delta / ((self.k - 1.0) * (self.k - 2.0))
        s, u_minus, D, beta = self._trace()
        # int_0^inf ln(1 + a e^{-b t}) dt = -Li2(-a) / b, Li2(z) = spence(1 - z)
        a = math.exp(-s * beta / D)
        b = s * s / D
        return (D * u_minus / s) * (-float(spence(1.0 + a))) / b


def eta_eval(spec: EtaSpec, t):
    return spec.eval(t)


def around_budget(spec: EtaSpec) -> float:
    """Closed-form flux budget: the sum of the suprema over t of the four terms

    int_0^t |eta'|,  |eta(t) - eta_-|,  int_0^inf |eta - eta_-|,
    int_0^t int_tau^inf |eta - eta_-|.

    Each term is bounded by its supremum, so the sum is an admissible delta.
    For the power law this is delta (2 + 1/(k-1) + 1/((k-1)(k-2))).
    """
    return spec.variation() + spec.excess(0.0) + spec.excess_integral() + spec.tail_integral()


@dataclass(frozen=True)
class PerturbationSpec:
    """Gaussian anti-derivative bumps on top of the wave U(x - beta + translate).

    ``translate`` is an exact translation of the base wave; it is not part of
    the bump family and defaults to zero.
    """

    amp_phi: float = 0.0
    amp_psi: float = 0.0
    center: float = 5.0
    width: float = 1.0
    beta: float = 10.0
    translate: float = 0.0

    def __post_init__(self):
        if not self.center > 0:
            raise ValueError("bump center must be positive")
        if not self.width > 0:
            raise ValueError("bump width must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def bump(self, x):
        return np.exp(-(((np.asarray(x) - self.center) / self.width) ** 2))

    def bump_prime(self, x):
        y = (np.asarray(x) - self.center) / self.width
        return -2.0 * y / self.width * np.exp(-y * y)


@dataclass
class InitialData:
    x: np.ndarray
    u0: np.ndarray
    v0: np.ndarray
    Phi0: np.ndarray
    Psi0: np.ndarray
    c0: np.ndarray | None = None


def check_support(p: PerturbationSpec, x_max: float, tol: float = 1e-13) -> None:
    amp = max(abs(p.amp_phi), abs(p.amp_psi))
    if amp == 0:
        return
    for end in (0.0, x_max):
        if amp * math.exp(-(((end - p.center) / p.width) ** 2)) > tol:
            raise ValueError(f"perturbation bump is not supported inside (0, {x_max})")


def build_initial(p: PerturbationSpec, wp: WaveParams, mp: ModelParams, x: np.ndarray) -> InitialData:
    """u0 = U(x - beta + a) + Phi0', v0 = V(x - beta + a) + Psi0', c0 = C(x - beta + a) e^{-mu Psi0}.

    ``Phi0``/``Psi0`` are the Gaussian bumps themselves; with a nonzero
    translation they describe the deviation from the translated wave.  The
    right end is pinned to the far-field state (0, 0, c_+ e^{-mu Psi0}).
    """
    x = np.asarray(x, dtype=float)
    check_support(p, float(x[-1]))
    z = x - p.beta + p.translate
    g = p.bump(x)
    gp = p.bump_prime(x)
    Phi0 = p.amp_phi * g
    Psi0 = p.amp_psi * g
    u0 = np.asarray(profile_U(z, wp, mp.D)) + p.amp_phi * gp
    v0 = np.asarray(profile_V(z, wp, mp.D)) + p.amp_psi * gp
    c0 = np.asarray(profile_C(z, wp, mp)) * np.exp(-mp.mu * Psi0)
    u0[-1] = 0.0
    v0[-1] = 0.0
    return InitialData(x=x, u0=u0, v0=v0, Phi0=Phi0, Psi0=Psi0, c0=c0)


@dataclass
class SmallnessReport:
    norm_Phi0_2w: float
    norm_Psi0_2: float
    norm_Psi0x_1w: float
    norm_Phi0_1: float
    delta: float
    beta_inv: float
    product: float
    eps0: float
    alpha: float
    small_ok: bool = field(init=False)
    product_ok: bool = field(init=False)

    def __post_init__(self):
        self.small_ok = self.total <= self.eps0
        self.product_ok = self.product <= 1.0

    @property
    def total(self) -> float:
        return self.norm_Phi0_2w + self.norm_Psi0_2 + self.norm_Psi0x_1w + self.delta + self.beta_inv

    @property
    def admissible(self) -> bool:
        return self.small_ok and self.product_ok

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(total=self.total, admissible=self.admissible)
        return d


def smallness_report(p: PerturbationSpec, spec: EtaSpec, wp: WaveParams, mp: ModelParams,
                     x: np.ndarray, eps0: float, data: InitialData | None = None) -> SmallnessReport:
    """Evaluate the smallness hypotheses for one scenario.

    eps0 is supplied by the caller; no numeric value of it is known a priori.
    The weight w0 uses the shift alpha computed from the initial density.
    """
    if data is None:
        data = build_initial(p, wp, mp, x)
    dx = float(x[1] - x[0])
    delta = around_budget(spec)
    alpha = compute_alpha(ShiftInputs(x=x, u0=data.u0, beta=p.beta, wp=wp, mp=mp, eta=spec))
    w0 = weight_w(x, 0.0, alpha, p.beta, wp, mp.D)
    norm_Phi0_1 = weighted_sobolev_norm(data.Phi0, 1.0, 1, dx)
    return SmallnessReport(
        norm_Phi0_2w=weighted_sobolev_norm(data.Phi0, w0, 2, dx),
        norm_Psi0_2=weighted_sobolev_norm(data.Psi0, 1.0, 2, dx),
        norm_Psi0x_1w=weighted_sobolev_norm(p.amp_psi * p.bump_prime(x), w0, 1, dx),
        norm_Phi0_1=norm_Phi0_1,
        delta=delta,
        beta_inv=1.0 / p.beta,
        product=(norm_Phi0_1 + delta) * p.beta,
        eps0=eps0,
        alpha=alpha,
    )


@dataclass(frozen=True)
class GridSpec:
    x_max: float = 80.0
    dx: float = 0.05
    t_max: float = 15.0
    cfl_safety: float = 0.4
    scheme: str = "explicit-rk2"
    # concentration floor of the original-system solver, relative to c_+
    c_floor: float = 1e-12

    @property
    def nx(self) -> int:
        return int(round(self.x_max / self.dx)) + 1

    def coordinates(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.nx)


@dataclass(frozen=True)
class Scenario:
    mp: ModelParams
    wp: WaveParams
    eta: EtaSpec
    pert: PerturbationSpec
    grid: GridSpec = GridSpec()
    eps0: float = 0.2

    @property
    def beta(self) -> float:
        return self.pert.beta

    def with_grid(self, **changes) -> "Scenario":
        return replace(self, grid=replace(self.grid, **changes))

    def with_value(self, axis: str, value: float) -> "Scenario":
        """Copy with one sweep parameter replaced (beta, delta, k, amp_phi, amp_psi)."""
        if axis in ("beta", "amp_phi", "amp_psi"):
            pert = replace(self.pert, **{axis: value})
            eta = self.eta
            if axis == "beta" and eta.form == "wave-trace":
                eta = replace(eta, beta=value)
            return replace(self, pert=pert, eta=eta)
        if axis in ("delta", "k"):
            return replace(self, eta=replace(self.eta, **{axis: value}))
        raise ValueError(f"unknown sweep axis {axis!r}")


def make_scenario(D=1.0, mu=2.0, xi=4.0, c_plus=1.0, eta_minus=-1.0, beta=10.0,
                  form="constant", delta=0.0, k=3.0, amp_phi=0.0, amp_psi=0.0,
                  center=5.0, width=1.0, translate=0.0, eps0=0.2, **grid) -> Scenario:
    mp = ModelParams.from_rates(D=D, mu=mu, xi=xi, c_plus=c_plus)
    wp = select_wave(mp.chi, eta_minus)
    if form == "wave-trace":
        eta = EtaSpec.wave_trace(wp, mp, beta)
    else:
        eta = EtaSpec(form, eta_minus, delta=delta, k=k)
    pert = PerturbationSpec(amp_phi=amp_phi, amp_psi=amp_psi, center=center, width=width,
                            beta=beta, translate=translate)
    return Scenario(mp=mp, wp=wp, eta=eta, pert=pert, grid=GridSpec(**grid), eps0=eps0)


_SCHEMA = {
    "model": {"D": float, "xi": float, "mu": float, "chi": float, "c_plus": float},
    "wave": {"beta": float, "translate": float},
    "eta": {"form": str, "eta_minus": float, "delta": float, "k": float},
    "perturbation": {"amp_phi": float, "amp_psi": float, "center": float, "width": float, "eps0": float},
    "grid": {"x_max": float, "dx": float, "t_max": float, "cfl_safety": float,
             "scheme": str, "c_floor": float},
}


def parse_scenario(text: str) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    cp.read_string(text)
    values: dict[str, dict] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ValueError(f"unknown section [{section}]")
        values[section] = {}
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ValueError(f"unknown key {key!r} in [{section}]")
            values[section][key] = _SCHEMA[section][key](raw.strip())
    model = values.get("model", {})
    chi = model.pop("chi", None)
    kwargs = {**model, **values.get("wave", {}), **values.get("eta", {}),
              **values.get("perturbation", {}), **values.get("grid", {})}
    sc = make_scenario(**kwargs)
    if chi is not None and chi != sc.mp.chi:
        raise ValueError(f"chi={chi!r} does not equal mu*xi={sc.mp.chi!r}")
    return sc


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def dump_scenario(sc: Scenario) -> str:
    """Inverse of :func:`parse_scenario`."""
    g, p, e, m = sc.grid, sc.pert, sc.eta, sc.mp
    lines = [
        "[model]", f"D = {m.D!r}", f"xi = {m.xi!r}", f"mu = {m.mu!r}", f"c_plus = {m.c_plus!r}", "",
        "[wave]", f"beta = {p.beta!r}", f"translate = {p.translate!r}", "",
        "[eta]", f"form = {e.form}", f"eta_minus = {e.eta_minus!r}", f"delta = {e.delta!r}", f"k = {e.k!r}", "",
        "[perturbation]", f"amp_phi = {p.amp_phi!r}", f"amp_psi = {p.amp_psi!r}",
        f"center = {p.center!r}", f"width = {p.width!r}", f"eps0 = {sc.eps0!r}", "",
        "[grid]", f"x_max = {g.x_max!r}", f"dx = {g.dx!r}", f"t_max = {g.t_max!r}",
        f"cfl_safety = {g.cfl_safety!r}", f"scheme = {g.scheme}", f"c_floor = {g.c_floor!r}", "",
    ]
    return "\n".join(lines)
