"""Price recursions h = V h + g_hat on finite chains.

`solve_markov_solution` runs successive approximations of the affine
operator T h = V h + g_hat from h = 0, whose iterates are the partial
Neumann sums sum_{k<=K} V^k g_hat. It converges to the unique fixed point
exactly when ln r(V) < 0, diverges when ln r(V) > 0, and refuses to guess
in the numerical gray zone around zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IndeterminateError, InstabilityError, ParameterError
from .spectral import ValuationMatrix, spectral_radius

__all__ = [
    "PricingProblem",
    "PricingSolution",
    "apply_T",
    "neumann_partial_sum",
    "solve_markov_solution",
]

GROWTH_FACTOR = 1.0 + 1e-6
GROWTH_RUN = 50
LN_R_NOISE = 1e-8


@dataclass(frozen=True, eq=False)
class PricingProblem:
    """Valuation operator plus the nonnegative forcing term g_hat."""

    V: ValuationMatrix
    g_hat: np.ndarray

    def __post_init__(self):
        g = np.array(self.g_hat, dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, "g_hat", g)
        if g.shape != (self.V.n_states,) or not np.all(np.isfinite(g)):
            raise ParameterError("g_hat must be a finite vector over the states")
        if np.any(g < 0) or not np.any(g > 0):
            raise ParameterError("g_hat must be nonnegative and not identically zero")

    @property
    def n_states(self):
        return self.V.n_states


@dataclass(frozen=True, eq=False)
class PricingSolution:
    h_star: np.ndarray
    residual: float
    iterations: int
    ln_r: float


def apply_T(problem, h):
    """One application of T h = V h + g_hat."""
    h = np.asarray(h, dtype=float)
    if h.shape != (problem.n_states,):
        raise ParameterError("h has the wrong shape for this problem")
    return problem.V.V @ h + problem.g_hat


def neumann_partial_sum(problem, K):
    """Partial sum sum_{k=0}^{K} V^k g_hat, evaluated Horner-style."""
    K = int(K)
    if K < 0:
        raise ParameterError("K must be nonnegative")
    s = problem.g_hat.copy()
    for _ in range(K):
        s = problem.V.V @ s + problem.g_hat
    return s


def solve_markov_solution(problem, h0=None, tol=1e-10, max_iter=100_000):
    """Solve h = V h + g_hat by successive approximations.

    Starts from h0 (default zero, making the iterates Neumann partial
    sums). Divergence is declared, as an InstabilityError carrying ln r(V),
    only when the iterate norm has grown by more than a factor 1 + 1e-6 for
    50 consecutive iterations AND ln r(V) >= 0; sustained growth with
    ln r(V) inside (-1e-8, 0) is reported as indeterminate rather than
    resolved by guesswork. Exhausting max_iter raises IndeterminateError
    with the trailing residual trace.
    """
    V = problem.V.V
    pi = problem.V.chain.pi
    r = spectral_radius(problem.V)
    ln_r = math.log(r) if r > 0 else -math.inf
    if h0 is None:
        h = np.zeros(problem.n_states)
    else:
        h = np.array(h0, dtype=float)
        if h.shape != (problem.n_states,) or not np.all(np.isfinite(h)):
            raise ParameterError("h0 must be a finite vector over the states")
    norm = float(pi @ np.abs(h))
    growth_run = 0
    residuals = []
    for k in range(1, int(max_iter) + 1):
        h_new = V @ h + problem.g_hat
        change = float(np.max(np.abs(h_new - h)))
        residuals.append(change)
        if len(residuals) > 10:
            residuals.pop(0)
        norm_new = float(pi @ np.abs(h_new))
        if norm > 0 and norm_new > GROWTH_FACTOR * norm:
            growth_run += 1
        else:
            growth_run = 0
        h, norm = h_new, norm_new
        if not math.isfinite(norm):
            raise InstabilityError(
                f"iterates overflowed after {k} steps (ln r = {ln_r:.6g})",
                ln_r=ln_r)
        if change < tol:
            residual = float(np.max(np.abs(V @ h + problem.g_hat - h)))
            return PricingSolution(h_star=h, residual=residual,
                                   iterations=k, ln_r=ln_r)
        if growth_run >= GROWTH_RUN:
            if ln_r >= 0:
                raise InstabilityError(
                    f"iterates grew for {GROWTH_RUN} consecutive steps and "
                    f"ln r(V) = {ln_r:.6g} >= 0: no finite solution exists",
                    ln_r=ln_r)
            if ln_r > -LN_R_NOISE:
                raise IndeterminateError(
                    f"sustained growth with ln r(V) = {ln_r:.6g} inside the "
                    f"numerical noise band (-{LN_R_NOISE}, 0)",
                    ln_r=ln_r, residuals=residuals)
            growth_run = 0  # transient growth of a strictly stable operator
    raise IndeterminateError(
        f"no convergence and no certified divergence within {max_iter} "
        f"iterations (ln r = {ln_r:.6g})", ln_r=ln_r, residuals=residuals)
