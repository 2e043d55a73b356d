"""Monte Carlo estimation of stability exponents from simulated products.

The p = 1 estimator is (1/n) ln[(1/m) sum_j prod_i Phi_i^(j)]; per-path
products are accumulated in log space and averaged with logsumexp. The
p-th order variant draws m outer initial states, inner_m inner paths
sharing each outer state, and averages the p-th powers of the inner means
(biased O(1/inner_m) for finite inner samples).

Reproducibility: innovations come from Philox streams keyed by
(seed, replication, batch) with a fixed batch size, so results are bitwise
identical for a given seed regardless of the worker count. Replications
use disjoint stream keys and are mutually independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import recursive
from .errors import ParameterError
from .models import (CrraCvParams, EzByParams, EzSsyParams, FiniteCrraParams,
                     HabitParams, RiskNeutralParams)

__all__ = [
    "McConfig",
    "McEstimate",
    "estimate_lphi",
    "estimate_lphi_p",
    "run_table1",
    "read_table1_csv",
    "write_table1_csv",
    "BATCH",
]

BATCH = 1024


@dataclass(frozen=True)
class McConfig:
    """Sample sizes and seeding for one estimation run."""

    n: int
    m: int
    p: float = 1.0
    inner_m: int | None = None
    seed: int = 0
    replications: int = 1

    def __post_init__(self):
        if int(self.n) < 1 or int(self.m) < 1:
            raise ParameterError("n and m must be at least 1")
        if self.p <= 0:
            raise ParameterError(f"p must be positive, got {self.p}")
        if self.inner_m is not None and int(self.inner_m) < 1:
            raise ParameterError("inner_m must be at least 1 when given")
        if int(self.replications) < 1:
            raise ParameterError("replications must be at least 1")
        if int(self.seed) < 0:
            raise ParameterError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class McEstimate:
    """Point estimate; std_dev is across replications (None if only one)."""

    value: float
    std_dev: float | None
    n: int
    m: int
    p: float
    seed: int


def _stream(seed, *key):
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key))))


class _RiskNeutralSampler:
    def __init__(self, model):
        self.log_beta = math.log(model.beta)

    def draw_init(self, rng, k):
        return (np.zeros(k),)

    def log_products(self, rng, init, n):
        return np.full(init[0].shape[0], n * self.log_beta)


class _CrraCvSampler:
    def __init__(self, model):
        m = model
        self.rho, self.sigma = m.rho, m.sigma
        self.sig_x = m.sigma / math.sqrt(1.0 - m.rho**2)
        self.base = math.log(m.beta) + m.mu_d - m.gamma * m.mu_c
        self.load = m.varphi - m.gamma
        self.s_iid = math.sqrt(m.sigma_d**2 + (m.gamma * m.sigma_c) ** 2)

    def draw_init(self, rng, k):
        return (rng.standard_normal(k) * self.sig_x,)

    def log_products(self, rng, init, n):
        (x0,) = init
        rho = self.rho
        # sum_{t<n} X_t by linearity: X_0 factor + one weight per innovation
        s = x0 * ((1.0 - rho**n) / (1.0 - rho))
        if n > 1 and self.sigma > 0:
            eta = rng.standard_normal((x0.shape[0], n - 1))
            wts = self.sigma * (1.0 - rho ** (n - np.arange(1, n))) / (1.0 - rho)
            s = s + np.einsum("ij,j->i", eta, wts)
        out = n * self.base + self.load * s
        if self.s_iid > 0:
            out = out + self.s_iid * rng.standard_normal((x0.shape[0], n)).sum(axis=1)
        return out


class _HabitSampler:
    def __init__(self, model):
        m = model
        self.rho, self.sigma = m.rho, m.sigma
        self.mean = m.b / (1.0 - m.rho)
        self.sig_x = m.sigma / math.sqrt(1.0 - m.rho**2)
        self.log_k0 = math.log(m.k0)
        self.load = (1.0 - m.gamma) * (m.rho - m.alpha)

    def draw_init(self, rng, k):
        return (self.mean + rng.standard_normal(k) * self.sig_x,)

    def log_products(self, rng, init, n):
        (x0,) = init
        rho = self.rho
        s = n * self.mean + (x0 - self.mean) * ((1.0 - rho**n) / (1.0 - rho))
        if n > 1 and self.sigma > 0:
            eta = rng.standard_normal((x0.shape[0], n - 1))
            wts = self.sigma * (1.0 - rho ** (n - np.arange(1, n))) / (1.0 - rho)
            s = s + np.einsum("ij,j->i", eta, wts)
        return n * self.log_k0 + self.load * s


class _FiniteCrraSampler:
    def __init__(self, model):
        m = model
        ch = m.chain
        self.states = ch.states
        self.cum_rows = np.cumsum(ch.P, axis=1)
        self.cum_pi = np.cumsum(ch.pi)
        self.base = math.log(m.beta) + m.mu_d - m.gamma * m.mu_c
        self.load = 1.0 - m.gamma
        self.s_iid = math.sqrt(m.sigma_d**2 + (m.gamma * m.sigma_c) ** 2)

    def draw_init(self, rng, k):
        u = rng.random(k)
        idx = np.searchsorted(self.cum_pi, u, side="right")
        return (np.minimum(idx, self.states.shape[0] - 1).astype(np.intp),)

    def log_products(self, rng, init, n):
        idx = init[0].astype(np.intp)
        k = idx.shape[0]
        last = self.states.shape[0] - 1
        ssum = self.states[idx].copy()
        if n > 1:
            u = rng.random((k, n - 1))
            for t in range(n - 1):
                rows = self.cum_rows[idx]
                idx = np.minimum((u[:, t][:, None] > rows).sum(axis=1), last)
                ssum += self.states[idx]
        out = n * self.base + self.load * ssum
        if self.s_iid > 0:
            out = out + self.s_iid * rng.standard_normal((k, n)).sum(axis=1)
        return out


def _sampler_for(model, wc):
    if isinstance(model, RiskNeutralParams):
        return _RiskNeutralSampler(model)
    if isinstance(model, CrraCvParams):
        return _CrraCvSampler(model)
    if isinstance(model, HabitParams):
        return _HabitSampler(model)
    if isinstance(model, FiniteCrraParams):
        return _FiniteCrraSampler(model)
    if isinstance(model, (EzByParams, EzSsyParams)):
        if wc is None:
            raise ParameterError(
                "a wealth-consumption solution is required before simulating "
                "this family; call solve_wealth_consumption first")
        return recursive.path_sampler(model, wc)
    raise ParameterError(f"no sampler for {type(model).__name__}")


def estimate_lphi(model, config, wc=None, threads=1):
    """Monte Carlo estimate of the stability exponent.

    For config.p == 1 this is the direct product-average estimator; other
    p delegate to `estimate_lphi_p`. `threads` only schedules batches; it
    never changes the result.
    """
    if not isinstance(config, McConfig):
        raise ParameterError("config must be a McConfig")
    if config.p != 1.0:
        return estimate_lphi_p(model, config, wc=wc, threads=threads)
    sampler = _sampler_for(model, wc)
    n, m, reps, seed = int(config.n), int(config.m), int(config.replications), int(config.seed)
    nbatches = -(-m // BATCH)

    def run_job(job):
        r, b = job
        lo = b * BATCH
        k = min(BATCH, m - lo)
        rng = _stream(seed, r, b)
        init = sampler.draw_init(rng, k)
        return sampler.log_products(rng, init, n)

    jobs = [(r, b) for r in range(reps) for b in range(nbatches)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            chunks = list(ex.map(run_job, jobs))
    else:
        chunks = [run_job(j) for j in jobs]
    values = np.empty(reps)
    for r in range(reps):
        lp = np.concatenate(chunks[r * nbatches:(r + 1) * nbatches])
        values[r] = (logsumexp(lp) - math.log(m)) / n
    value = float(values.mean())
    sd = float(values.std(ddof=1)) if reps > 1 else None
    return McEstimate(value=value, std_dev=sd, n=n, m=m, p=1.0, seed=seed)


def estimate_lphi_p(model, config, wc=None, threads=1):
    """Nested estimator of the p-th order exponent.

    Outer loop draws m initial states; each gets inner_m (default m) paths
    started from that state. Runs single-threaded; keyed per outer draw.
    """
    if not isinstance(config, McConfig):
        raise ParameterError("config must be a McConfig")
    sampler = _sampler_for(model, wc)
    n, m, reps, seed = int(config.n), int(config.m), int(config.replications), int(config.seed)
    p = float(config.p)
    inner = int(config.inner_m) if config.inner_m is not None else m
    values = np.empty(reps)
    for r in range(reps):
        ln_inner_mean = np.empty(m)
        for j in range(m):
            rng = _stream(seed, r, j)
            init1 = sampler.draw_init(rng, 1)
            parts = []
            for lo in range(0, inner, BATCH):
                k = min(BATCH, inner - lo)
                init = tuple(np.repeat(a, k) for a in init1)
                parts.append(sampler.log_products(rng, init, n))
            lp = np.concatenate(parts)
            ln_inner_mean[j] = logsumexp(lp) - math.log(inner)
        values[r] = (logsumexp(p * ln_inner_mean) - math.log(m)) / (n * p)
    value = float(values.mean())
    sd = float(values.std(ddof=1)) if reps > 1 else None
    return McEstimate(value=value, std_dev=sd, n=n, m=m, p=p, seed=seed)


def _derive_seed(seed, index):
    return int(np.random.SeedSequence((int(seed), int(index))).generate_state(1, np.uint64)[0])


def run_table1(model, n_list=(250, 500, 750),
               m_list=(1000, 2000, 3000, 4000, 5000),
               replications=1000, seed=1234, threads=1, wc=None):
    """Replicated estimates over an (n, m) grid.

    Returns a list of (n, m, mean, sd) rows in row-major order; each cell
    gets an independent derived seed so the grid is reproducible cell by
    cell.
    """
    rows = []
    idx = 0
    for n in n_list:
        for m in m_list:
            cfg = McConfig(n=int(n), m=int(m), seed=_derive_seed(seed, idx),
                           replications=int(replications))
            est = estimate_lphi(model, cfg, wc=wc, threads=threads)
            rows.append((int(n), int(m), est.value, est.std_dev))
            idx += 1
    return rows


def write_table1_csv(rows, path):
    with open(path, "w") as fh:
        fh.write("n,m,mean,sd\n")
        for n, m, mean, sd in rows:
            sd_txt = f"{sd:.17g}" if sd is not None else ""
            fh.write(f"{n},{m},{mean:.17g},{sd_txt}\n")


def read_table1_csv(path):
    """Inverse of write_table1_csv; empty sd fields read back as None."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "n,m,mean,sd":
            raise ParameterError(f"unexpected table header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            n, m, mean, sd = line.split(",")
            rows.append((int(n), int(m), float(mean),
                         float(sd) if sd else None))
    return rows
