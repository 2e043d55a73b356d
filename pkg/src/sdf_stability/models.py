"""Model families for one-period stochastic discount factor processes.

Each family is a frozen parameter dataclass. Families whose one-step factor
is a deterministic function of the current state times an iid lognormal
innovation expose a state weight through `phi_weight`; conditionally
lognormal consumption-based families additionally have closed-form stability
exponents (`lphi_analytic_*`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .markov import MarkovChain

__all__ = [
    "RiskNeutralParams",
    "CrraCvParams",
    "FiniteCrraParams",
    "HabitParams",
    "EzByParams",
    "EzSsyParams",
    "phi_weight",
    "lphi_analytic_crra",
    "lphi_analytic_habit",
    "lphi_analytic",
    "crra_cv_benchmark",
    "habit_base",
    "ez_by_benchmark",
    "ez_ssy_benchmark",
    "FAMILY_NAMES",
]


def _check(cond, msg):
    if not cond:
        raise ParameterError(msg)


@dataclass(frozen=True)
class RiskNeutralParams:
    """Constant discounting: Phi_t = beta every period.

    beta = 1 is permitted; it sits exactly on the stability boundary.
    """

    beta: float

    def __post_init__(self):
        _check(0 < self.beta <= 1, f"beta must be in (0, 1], got {self.beta}")


@dataclass(frozen=True)
class CrraCvParams:
    """Power utility with consumption and dividend growth loading on a
    latent Gaussian AR(1) state.

    One-step factor between t and t+1:
        beta * exp(mu_d + varphi X_t + sigma_d xi')
             * exp(-gamma (mu_c + X_t + sigma_c eps'))
    with X' = rho X + sigma eta'.
    """

    beta: float
    gamma: float
    mu_c: float
    mu_d: float
    sigma_c: float
    sigma_d: float
    rho: float
    sigma: float
    varphi: float = 1.0

    def __post_init__(self):
        _check(0 < self.beta < 1, f"beta must be in (0, 1), got {self.beta}")
        _check(self.gamma >= 0, f"gamma must be nonnegative, got {self.gamma}")
        _check(self.gamma != 1, "gamma = 1 is outside this family")
        _check(abs(self.rho) < 1, f"|rho| < 1 required, got {self.rho}")
        _check(self.sigma >= 0, "sigma must be nonnegative")
        _check(self.sigma_c >= 0 and self.sigma_d >= 0,
               "sigma_c and sigma_d must be nonnegative")


@dataclass(frozen=True, eq=False)
class FiniteCrraParams:
    """Power-utility factor driven by a finite-state chain (unit dividend
    loading on the state)."""

    beta: float
    gamma: float
    mu_c: float
    mu_d: float
    sigma_c: float
    sigma_d: float
    chain: MarkovChain

    def __post_init__(self):
        _check(0 < self.beta < 1, f"beta must be in (0, 1), got {self.beta}")
        _check(self.gamma >= 0, f"gamma must be nonnegative, got {self.gamma}")
        _check(self.gamma != 1, "gamma = 1 is outside this family")
        _check(self.sigma_c >= 0 and self.sigma_d >= 0,
               "sigma_c and sigma_d must be nonnegative")
        _check(isinstance(self.chain, MarkovChain), "chain must be a MarkovChain")


@dataclass(frozen=True)
class HabitParams:
    """External-habit factor. Given the AR(1) surplus state the one-step
    factor is deterministic:

        Phi' = k0 * exp((1 - gamma)(rho - alpha) X_t),
        X' = b + rho X + sigma eta',

    where b and k0 are derived from (x0, sigma, gamma, beta)."""

    beta: float
    gamma: float
    rho: float
    sigma: float
    alpha: float
    x0: float

    def __post_init__(self):
        _check(0 < self.beta < 1, f"beta must be in (0, 1), got {self.beta}")
        _check(abs(self.rho) < 1, f"|rho| < 1 required, got {self.rho}")
        _check(self.sigma >= 0, "sigma must be nonnegative")

    @property
    def b(self):
        return self.x0 + self.sigma**2 * (1.0 - self.gamma)

    @property
    def k0(self):
        return self.beta * math.exp(self.b * (1.0 - self.gamma)
                                    + self.sigma**2 * (self.gamma - 1.0) ** 2 / 2.0)


@dataclass(frozen=True)
class EzByParams:
    """Recursive preferences over long-run-risk consumption dynamics with a
    square-volatility AR(1) (state X = (z, sigma)).

        g_c' = mu_c + z + sigma eta_c',       z' = rho z + varphi_z sigma eta_z'
        g_d' = mu_d + alpha z + varphi_d sigma eta_d'
        sigma2' = max(v sigma2 + d + varphi_sigma eta_s', 0)
    """

    beta: float
    gamma: float
    psi: float
    mu_c: float
    rho: float
    varphi_z: float
    v: float
    d: float
    varphi_sigma: float
    mu_d: float
    alpha: float
    varphi_d: float

    def __post_init__(self):
        _check(0 < self.beta < 1, f"beta must be in (0, 1), got {self.beta}")
        _check(self.psi > 0 and self.psi != 1, "psi must be positive and != 1")
        _check(self.gamma != 1, "gamma = 1 makes theta = 0")
        _check(abs(self.rho) < 1, f"|rho| < 1 required, got {self.rho}")
        _check(0 <= self.v < 1, f"v must be in [0, 1), got {self.v}")
        _check(self.d >= 0, "d must be nonnegative")
        _check(self.varphi_z >= 0 and self.varphi_sigma >= 0 and self.varphi_d >= 0,
               "volatility loadings must be nonnegative")

    @property
    def theta(self):
        return (1.0 - self.gamma) / (1.0 - 1.0 / self.psi)


@dataclass(frozen=True)
class EzSsyParams:
    """Recursive preferences over dynamics with three log-volatility AR(1)
    states (state X = (z, h_z, h_c, h_d)).

        g_c' = mu_c + z + sigma_c(h_c) eta_c'
        g_d' = mu_d + alpha z + delta sigma_c(h_c) eta_c' + sigma_d(h_d) eta_d'
        z'   = rho z + sqrt(1 - rho^2) sigma_z(h_z) ups'
        h_i' = rho_hi h_i + sigma_hi xi_i',   sigma_i(h) = varphi_i bar_sigma e^h
    """

    beta: float
    gamma: float
    psi: float
    mu_c: float
    rho: float
    varphi_z: float
    bar_sigma: float
    varphi_c: float
    rho_hz: float
    sigma_hz: float
    rho_hc: float
    sigma_hc: float
    mu_d: float
    alpha: float
    delta: float
    varphi_d: float
    rho_hd: float
    sigma_hd: float

    def __post_init__(self):
        _check(0 < self.beta < 1, f"beta must be in (0, 1), got {self.beta}")
        _check(self.psi > 0 and self.psi != 1, "psi must be positive and != 1")
        _check(self.gamma != 1, "gamma = 1 makes theta = 0")
        _check(abs(self.rho) < 1, f"|rho| < 1 required, got {self.rho}")
        for nm in ("rho_hz", "rho_hc", "rho_hd"):
            _check(abs(getattr(self, nm)) < 1, f"|{nm}| < 1 required")
        for nm in ("sigma_hz", "sigma_hc", "sigma_hd"):
            _check(getattr(self, nm) >= 0, f"{nm} must be nonnegative")
        _check(self.bar_sigma > 0, "bar_sigma must be positive")
        _check(self.varphi_z >= 0 and self.varphi_c >= 0 and self.varphi_d >= 0,
               "volatility loadings must be nonnegative")

    @property
    def theta(self):
        return (1.0 - self.gamma) / (1.0 - 1.0 / self.psi)


FAMILY_NAMES = {
    RiskNeutralParams: "risk-neutral",
    CrraCvParams: "crra-cv",
    FiniteCrraParams: "finite-crra",
    HabitParams: "habit",
    EzByParams: "ez-by",
    EzSsyParams: "ez-ssy",
}


def phi_weight(model, x):
    """State weight of the one-step factor after integrating out the iid
    innovations: E[Phi' | X_t = x].

    Defined for the families whose factor is (state function) x (iid
    lognormal): risk-neutral, crra-cv, finite-crra, habit.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(model, RiskNeutralParams):
        return np.full(x.shape, model.beta) if x.ndim else float(model.beta)
    if isinstance(model, CrraCvParams):
        out = model.beta * np.exp(
            model.mu_d - model.gamma * model.mu_c
            + (model.varphi - model.gamma) * x
            + (model.sigma_d**2 + (model.gamma * model.sigma_c) ** 2) / 2.0)
    elif isinstance(model, FiniteCrraParams):
        out = model.beta * np.exp(
            model.mu_d - model.gamma * model.mu_c
            + (1.0 - model.gamma) * x
            + (model.sigma_d**2 + (model.gamma * model.sigma_c) ** 2) / 2.0)
    elif isinstance(model, HabitParams):
        out = model.k0 * np.exp((1.0 - model.gamma) * (model.rho - model.alpha) * x)
    else:
        raise ParameterError(
            f"{type(model).__name__} has no state-weight representation")
    return float(out) if out.ndim == 0 else out


def lphi_analytic_crra(params):
    """Closed-form stability exponent of the crra-cv family."""
    if not isinstance(params, CrraCvParams):
        raise ParameterError("lphi_analytic_crra requires CrraCvParams")
    return (math.log(params.beta) + params.mu_d - params.gamma * params.mu_c
            + (params.sigma**2 / 2.0) * (params.varphi - params.gamma) ** 2
            / (1.0 - params.rho) ** 2
            + (params.sigma_d**2 + (params.gamma * params.sigma_c) ** 2) / 2.0)


def lphi_analytic_habit(params):
    """Closed-form stability exponent of the habit family."""
    if not isinstance(params, HabitParams):
        raise ParameterError("lphi_analytic_habit requires HabitParams")
    a = (1.0 - params.gamma) * (params.rho - params.alpha)
    return (math.log(params.k0) + a * params.b / (1.0 - params.rho)
            + a**2 * params.sigma**2 / (2.0 * (1.0 - params.rho) ** 2))


def lphi_analytic(model):
    """Closed-form stability exponent for families that have one."""
    if isinstance(model, RiskNeutralParams):
        return math.log(model.beta)
    if isinstance(model, CrraCvParams):
        return lphi_analytic_crra(model)
    if isinstance(model, HabitParams):
        return lphi_analytic_habit(model)
    raise ParameterError(
        f"{FAMILY_NAMES.get(type(model), type(model).__name__)} has no "
        "closed-form stability exponent")


def crra_cv_benchmark():
    """Benchmark crra-cv calibration (monthly long-run-risk consumption and
    dividend parameters; L = -0.0031545)."""
    return CrraCvParams(beta=0.998, gamma=2.5, mu_c=0.0015, mu_d=0.0015,
                        sigma_c=0.0078, sigma_d=0.035, rho=0.979,
                        sigma=0.00034, varphi=1.0)


def habit_base(beta=0.96, sigma=0.15):
    """Habit calibration used for the (beta, sigma) stability maps."""
    return HabitParams(beta=beta, gamma=2.5, rho=-0.14, sigma=sigma,
                       alpha=1.0, x0=0.05)


def ez_by_benchmark():
    """Benchmark two-state long-run-risk calibration (monthly)."""
    return EzByParams(beta=0.998, gamma=10.0, psi=1.5, mu_c=0.0015,
                      rho=0.979, varphi_z=0.044, v=0.987, d=7.9092e-7,
                      varphi_sigma=2.3e-6, mu_d=0.0015, alpha=3.0,
                      varphi_d=4.5)


def ez_ssy_benchmark():
    """Benchmark four-state long-run-risk calibration (monthly)."""
    return EzSsyParams(beta=0.999, gamma=8.89, psi=1.97, mu_c=0.0016,
                       rho=0.987, varphi_z=0.215, bar_sigma=0.0032,
                       varphi_c=1.0, rho_hz=0.992, sigma_hz=math.sqrt(0.0039),
                       rho_hc=0.991, sigma_hc=math.sqrt(0.0096),
                       mu_d=0.001, alpha=3.65, delta=1.47, varphi_d=4.54,
                       rho_hd=0.969, sigma_hd=math.sqrt(0.0447))
