"""Finite-state Markov chains and AR(1) discretization.

The chain object is the common currency of the spectral and pricing layers:
states are real numbers on a strictly increasing grid, `P` is row-stochastic
and `pi` is the stationary distribution, all validated at construction and
stored read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DegeneracyError, NumericalError, ParameterError

__all__ = [
    "Ar1Spec",
    "MarkovChain",
    "rouwenhorst",
    "stationary_distribution",
    "is_irreducible",
    "simulate_chain",
]

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10


def _readonly(a):
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Ar1Spec:
    """Gaussian AR(1) law X' = b + rho X + sigma eta, eta ~ N(0, 1)."""

    rho: float
    sigma: float
    b: float = 0.0

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise ParameterError(f"ar1 requires |rho| < 1, got rho={self.rho}")
        if not self.sigma > 0:
            raise ParameterError(f"ar1 requires sigma > 0, got sigma={self.sigma}")

    @property
    def mean(self):
        return self.b / (1.0 - self.rho)

    @property
    def std(self):
        return self.sigma / np.sqrt(1.0 - self.rho**2)


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Finite chain: state grid, transition matrix, stationary distribution."""

    states: np.ndarray
    P: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        states = _readonly(self.states)
        P = _readonly(self.P)
        pi = _readonly(self.pi)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)
        n = states.shape[0]
        if states.ndim != 1 or n == 0 or not np.all(np.isfinite(states)):
            raise ParameterError("states must be a nonempty finite 1-d array")
        if n > 1 and not np.all(np.diff(states) > 0):
            raise ParameterError("states must be strictly increasing")
        if P.shape != (n, n) or not np.all(np.isfinite(P)):
            raise ParameterError(f"P must be a finite {n}x{n} matrix")
        if np.any(P < 0):
            raise ParameterError("P must be entrywise nonnegative")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ParameterError(f"P rows must sum to 1 within {ROW_SUM_TOL}")
        if pi.shape != (n,) or np.any(pi < 0) or abs(pi.sum() - 1.0) > ROW_SUM_TOL:
            raise ParameterError("pi must be a probability vector over the states")
        if np.max(np.abs(pi @ P - pi)) > STATIONARY_TOL:
            raise ParameterError(f"pi must be stationary for P within {STATIONARY_TOL}")

    @property
    def n_states(self):
        return self.states.shape[0]

    @classmethod
    def from_transition(cls, states, P):
        """Build a chain, computing the stationary distribution of `P`."""
        return cls(states=np.asarray(states, float), P=np.asarray(P, float),
                   pi=stationary_distribution(P))


def rouwenhorst(spec, n):
    """Discretize a Gaussian AR(1) on `n` states by Rouwenhorst's method.

    The grid spans the stationary mean plus/minus sqrt(n-1) stationary
    standard deviations and the transition matrix uses p = q = (1+rho)/2,
    which matches the stationary mean, variance and first autocorrelation
    of the AR(1) exactly.

    Parameters
    ----------
    spec : Ar1Spec
    n : int
        Number of states, at least 2.

    Returns
    -------
    MarkovChain
    """
    if not isinstance(spec, Ar1Spec):
        raise ParameterError("spec must be an Ar1Spec")
    n = int(n)
    if n < 2:
        raise ParameterError(f"rouwenhorst requires n >= 2, got {n}")
    p = (1.0 + spec.rho) / 2.0
    P = np.array([[p, 1.0 - p], [1.0 - p, p]])
    for k in range(3, n + 1):
        Q = np.zeros((k, k))
        Q[:-1, :-1] += p * P
        Q[:-1, 1:] += (1.0 - p) * P
        Q[1:, :-1] += (1.0 - p) * P
        Q[1:, 1:] += p * P
        Q[1:-1, :] /= 2.0
        P = Q
    half_width = np.sqrt(n - 1.0) * spec.std
    states = np.linspace(spec.mean - half_width, spec.mean + half_width, n)
    # guard against accumulated roundoff in the recursion
    P /= P.sum(axis=1, keepdims=True)
    return MarkovChain(states=states, P=P, pi=stationary_distribution(P))


def stationary_distribution(P):
    """Stationary distribution of a row-stochastic matrix.

    Takes the eigenvector of P^T at eigenvalue 1 and refines it by one
    power-iteration step. A chain whose eigenvalue 1 is not simple (several
    closed communicating classes) has no unique stationary distribution and
    raises DegeneracyError.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ParameterError("P must be a nonempty square matrix")
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        raise ParameterError("P must be finite and nonnegative")
    if np.max(np.abs(P.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
        raise ParameterError(f"P rows must sum to 1 within {ROW_SUM_TOL}")
    if P.shape[0] == 1:
        return np.array([1.0])
    evals, evecs = np.linalg.eig(P.T)
    near_one = np.abs(evals - 1.0) < 1e-8
    if near_one.sum() > 1:
        raise DegeneracyError(
            "eigenvalue 1 is not simple: the chain has multiple closed "
            "classes and no unique stationary distribution")
    idx = int(np.argmin(np.abs(evals - 1.0)))
    v = np.real(evecs[:, idx])
    if v.sum() < 0:
        v = -v
    v = np.maximum(v, 0.0)
    if v.sum() <= 0:
        raise NumericalError("failed to extract a nonnegative eigenvector")
    v = v / v.sum()
    pi = v @ P  # one refinement step
    pi = pi / pi.sum()
    if np.max(np.abs(pi @ P - pi)) > STATIONARY_TOL:
        raise NumericalError("stationary distribution did not verify to tolerance")
    return pi


def is_irreducible(P):
    """True iff the directed graph of strictly positive entries of `P` is
    strongly connected."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ParameterError("P must be a nonempty square matrix")
    ncomp, _ = connected_components(csr_matrix(P > 0), directed=True,
                                    connection="strong")
    return bool(ncomp == 1)


def simulate_chain(chain, length, seed=0, init="stationary"):
    """Simulate a path of state indices.

    Parameters
    ----------
    chain : MarkovChain
    length : int
        Number of entries in the path (0 gives an empty path, no draws).
    seed : int
        Keyed Philox stream; identical seeds give identical paths.
    init : "stationary" or int
        Draw the initial state from `chain.pi`, or start at a fixed index.

    Returns
    -------
    ndarray of int indices, shape (length,)
    """
    length = int(length)
    if length < 0:
        raise ParameterError("length must be nonnegative")
    if length == 0:
        return np.empty(0, dtype=np.intp)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed),))))
    n = chain.n_states
    cum_rows = np.cumsum(chain.P, axis=1)
    path = np.empty(length, dtype=np.intp)
    if init == "stationary":
        cum_pi = np.cumsum(chain.pi)
        path[0] = min(int(np.searchsorted(cum_pi, rng.random(), side="right")), n - 1)
    else:
        i0 = int(init)
        if not 0 <= i0 < n:
            raise ParameterError(f"init index {i0} out of range for {n} states")
        path[0] = i0
    if length > 1:
        u = rng.random(length - 1)
        for t in range(1, length):
            row = cum_rows[path[t - 1]]
            path[t] = min(int(np.searchsorted(row, u[t - 1], side="right")), n - 1)
    return path
