"""Wealth-consumption fixed points and path simulation for recursive
preferences over long-run-risk dynamics.

The wealth-consumption ratio solves w = 1 + (K w^theta)^(1/theta), where K
is the conditional-expectation operator of the continuation recursion. It
is discretized on a tensor grid spanning +-span unconditional standard
deviations per state dimension, with per-dimension Gauss-Hermite weight
matrices (conditionally independent next-state coordinates make the
transition operator Kronecker-factorized) and linear interpolation with
constant extrapolation. The volatility floor sits inside the quadrature.

Simulated one-step factors need w along the path; both samplers draw every
innovation per step (fixed order, documented per family) and evaluate w by
multilinear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import (ConvergenceError, DomainError, InstabilityError,
                     ParameterError)
from .models import EzByParams, EzSsyParams

__all__ = [
    "WcGridSpec",
    "WcSolution",
    "SdfPathProduct",
    "solve_wealth_consumption",
    "simulate_sdf_log_product",
    "path_sampler",
]

W_START_EPS = 1e-2
W_ESCAPE = 1e12


@dataclass(frozen=True)
class WcGridSpec:
    """Grid sizes per state dimension (family default when None), half-width
    in unconditional standard deviations, and Gauss-Hermite nodes per shock."""

    sizes: tuple | None = None
    span: float = 6.0
    gh_nodes: int = 7

    def __post_init__(self):
        if self.span <= 0:
            raise ParameterError("span must be positive")
        if int(self.gh_nodes) < 1:
            raise ParameterError("gh_nodes must be at least 1")
        if self.sizes is not None and any(int(s) < 1 for s in self.sizes):
            raise ParameterError("grid sizes must be at least 1")


@dataclass(frozen=True, eq=False)
class WcSolution:
    """Converged wealth-consumption ratio on its grid (w > 1 everywhere)."""

    dims: tuple
    grids: tuple
    w: np.ndarray
    residual: float
    iterations: int

    def __post_init__(self):
        grids = tuple(np.asarray(g, dtype=float) for g in self.grids)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if len(self.dims) != len(grids):
            raise ParameterError("dims and grids must align")
        if self.w.shape != tuple(g.shape[0] for g in grids):
            raise ParameterError("w shape must match the grid sizes")
        if not np.all(np.isfinite(self.w)) or np.any(self.w <= 1.0):
            raise ParameterError("w must be finite and > 1 everywhere")

    def save(self, path):
        arrays = {f"grid{i}": g for i, g in enumerate(self.grids)}
        np.savez(path, w=self.w, residual=self.residual,
                 iterations=self.iterations,
                 dims=np.array(self.dims, dtype="U16"), **arrays)

    @staticmethod
    def load(path):
        with np.load(path) as z:
            dims = tuple(str(d) for d in z["dims"])
            grids = tuple(z[f"grid{i}"] for i in range(len(dims)))
            return WcSolution(dims=dims, grids=grids, w=z["w"],
                              residual=float(z["residual"]),
                              iterations=int(z["iterations"]))


@dataclass(frozen=True)
class SdfPathProduct:
    """Log of one simulated n-period SDF product."""

    log_product: float
    n: int
    seed: int


def _lin_grid(center, std, span, count):
    if std == 0.0:
        return np.array([float(center)])
    return np.linspace(center - span * std, center + span * std, int(count))


def _lin_weights(grid, pts):
    """Linear-interpolation cell index and weight, constant beyond the edges."""
    pts = np.asarray(pts, dtype=float)
    ng = grid.shape[0]
    if ng == 1:
        z = np.zeros(pts.shape)
        return z.astype(np.intp), z
    pc = np.clip(pts, grid[0], grid[-1])
    i = np.clip(np.searchsorted(grid, pc, side="right") - 1, 0, ng - 2)
    t = (pc - grid[i]) / (grid[i + 1] - grid[i])
    return i, np.clip(t, 0.0, 1.0)


def _interp_nd(grids, values, cols):
    """Multilinear interpolation of `values` at column-stacked points."""
    i_list, t_list = [], []
    for g, c in zip(grids, cols):
        i, t = _lin_weights(g, c)
        i_list.append(i)
        t_list.append(t)
    d = len(grids)
    acc = np.zeros(np.asarray(cols[0]).shape)
    for mask in range(1 << d):
        wgt = np.ones_like(acc)
        idx = []
        for ax in range(d):
            if (mask >> ax) & 1:
                wgt = wgt * t_list[ax]
                idx.append(np.minimum(i_list[ax] + 1, grids[ax].shape[0] - 1))
            else:
                wgt = wgt * (1.0 - t_list[ax])
                idx.append(i_list[ax])
        acc += wgt * values[tuple(idx)]
    return acc


def _gh_nodes(q):
    x, w = np.polynomial.hermite.hermgauss(int(q))
    nodes = math.sqrt(2.0) * x
    wgt = w / w.sum()
    return nodes, wgt


def _gh_weight_matrix(grid, pts, ghw):
    """Convex weight rows over `grid` for quadrature points (..., q)."""
    i, t = _lin_weights(grid, pts)
    ng = grid.shape[0]
    q = pts.shape[-1]
    lead = pts.shape[:-1]
    flat_i = i.reshape(-1, q)
    flat_t = t.reshape(-1, q)
    rows = np.repeat(np.arange(flat_i.shape[0]), q)
    wq = np.tile(ghw, flat_i.shape[0])
    out = np.zeros((flat_i.shape[0], ng))
    np.add.at(out, (rows, flat_i.ravel()), (1.0 - flat_t.ravel()) * wq)
    np.add.at(out, (rows, np.minimum(flat_i.ravel() + 1, ng - 1)), flat_t.ravel() * wq)
    return out.reshape(lead + (ng,))


class _ByOperator:
    """K on the (z, sigma) grid for the two-state family."""

    dims = ("z", "sigma")

    def __init__(self, p, spec):
        # w varies steeply in z and the theta power amplifies interpolation
        # bias, so the z dimension needs a fine default grid
        sizes = spec.sizes if spec.sizes is not None else (151, 41)
        if len(sizes) != 2:
            raise ParameterError("this family needs 2 grid sizes (z, sigma)")
        mu_s2 = p.d / (1.0 - p.v)
        sd_s2 = p.varphi_sigma / math.sqrt(1.0 - p.v**2)
        std_z = p.varphi_z * math.sqrt(mu_s2 / (1.0 - p.rho**2))
        self.zg = _lin_grid(0.0, std_z, spec.span, sizes[0])
        if sd_s2 == 0.0:
            self.sg = np.array([math.sqrt(mu_s2)])
        else:
            lo = max(0.0, mu_s2 - spec.span * sd_s2)
            hi = mu_s2 + spec.span * sd_s2
            self.sg = np.sqrt(np.linspace(lo, hi, int(sizes[1])))
        nodes, ghw = _gh_nodes(spec.gh_nodes)
        zpts = (p.rho * self.zg[None, :, None]
                + p.varphi_z * self.sg[:, None, None] * nodes)
        self.Az = _gh_weight_matrix(self.zg, zpts, ghw)        # (ns, nz, nz)
        s2pts = np.maximum(p.v * self.sg[:, None] ** 2 + p.d
                           + p.varphi_sigma * nodes, 0.0)
        self.As = _gh_weight_matrix(self.sg, np.sqrt(s2pts), ghw)  # (ns, ns)
        self.kappa = (p.beta**p.theta
                      * np.exp((1.0 - p.gamma) * (p.mu_c + self.zg[:, None])
                               + (1.0 - p.gamma) ** 2 * self.sg[None, :] ** 2 / 2.0))
        self.shape = (self.zg.shape[0], self.sg.shape[0])
        self.grids = (self.zg, self.sg)

    def apply(self, g):
        H = g @ self.As.T
        return self.kappa * np.einsum("jik,kj->ij", self.Az, H)


class _SsyOperator:
    """K on the (z, h_z, h_c) grid for the four-state family (the dividend
    volatility state does not enter the consumption recursion)."""

    dims = ("z", "h_z", "h_c")

    def __init__(self, p, spec):
        sizes = spec.sizes if spec.sizes is not None else (15, 11, 11, 3)
        if len(sizes) != 4:
            raise ParameterError("this family needs 4 grid sizes (z, h_z, h_c, h_d)")
        std_hz = p.sigma_hz / math.sqrt(1.0 - p.rho_hz**2)
        std_hc = p.sigma_hc / math.sqrt(1.0 - p.rho_hc**2)
        std_hd = p.sigma_hd / math.sqrt(1.0 - p.rho_hd**2)
        var_z = (p.varphi_z * p.bar_sigma) ** 2 * math.exp(2.0 * std_hz**2)
        self.zg = _lin_grid(0.0, math.sqrt(var_z), spec.span, sizes[0])
        self.hzg = _lin_grid(0.0, std_hz, spec.span, sizes[1])
        self.hcg = _lin_grid(0.0, std_hc, spec.span, sizes[2])
        self.hdg = _lin_grid(0.0, std_hd, spec.span, sizes[3])
        nodes, ghw = _gh_nodes(spec.gh_nodes)
        self.Ahz = _gh_weight_matrix(
            self.hzg, p.rho_hz * self.hzg[:, None] + p.sigma_hz * nodes, ghw)
        self.Ahc = _gh_weight_matrix(
            self.hcg, p.rho_hc * self.hcg[:, None] + p.sigma_hc * nodes, ghw)
        sig_z = p.varphi_z * p.bar_sigma * np.exp(self.hzg)
        zpts = (p.rho * self.zg[None, :, None]
                + math.sqrt(1.0 - p.rho**2) * sig_z[:, None, None] * nodes)
        self.Az = _gh_weight_matrix(self.zg, zpts, ghw)        # (nhz, nz, nz)
        sig_c = p.varphi_c * p.bar_sigma * np.exp(self.hcg)
        self.kappa = (p.beta**p.theta
                      * np.exp((1.0 - p.gamma) * (p.mu_c + self.zg[:, None, None])
                               + (1.0 - p.gamma) ** 2 * sig_c[None, None, :] ** 2 / 2.0))
        self.shape = (self.zg.shape[0], self.hzg.shape[0], self.hcg.shape[0])
        self.grids = (self.zg, self.hzg, self.hcg)

    def apply(self, g):
        g1 = np.einsum("kc,zhc->zhk", self.Ahc, g)
        g2 = np.einsum("jh,zhk->zjk", self.Ahz, g1)
        return self.kappa * np.einsum("jiz,zjk->ijk", self.Az, g2)


def _operator_for(params, spec):
    if isinstance(params, EzByParams):
        return _ByOperator(params, spec)
    if isinstance(params, EzSsyParams):
        return _SsyOperator(params, spec)
    raise ParameterError(
        f"{type(params).__name__} has no wealth-consumption recursion")


def solve_wealth_consumption(params, grid=None, tol=1e-9, max_iter=200_000):
    """Solve w = 1 + (K w^theta)^(1/theta) by damped successive
    approximations from w = 1 + 1e-2.

    Raises InstabilityError when the iterates escape (no fixed point with
    w > 1 exists) and ConvergenceError when max_iter is exhausted.
    """
    spec = grid if grid is not None else WcGridSpec()
    if not isinstance(spec, WcGridSpec):
        raise ParameterError("grid must be a WcGridSpec")
    op = _operator_for(params, spec)
    th = params.theta
    inv = 1.0 / th
    w = np.full(op.shape, 1.0 + W_START_EPS)
    delta_prev = None
    change = math.inf
    tiny = float(np.finfo(float).tiny)
    for it in range(1, int(max_iter) + 1):
        g = w**th
        # Once w^theta leaves the normal floating range the map is constant
        # in w and would fake a fixed point. The iteration is monotone from
        # below, so this range is reached only when any true fixed point
        # lies beyond it: escape, do not return garbage.
        if not np.all(np.isfinite(g)) or np.any(g < tiny):
            raise InstabilityError(
                f"iterates left the representable range of w**theta after "
                f"{it} iterations; no attainable wealth-consumption ratio "
                "exists at these parameters")
        kg = op.apply(g)
        if not np.all(np.isfinite(kg)) or np.any(kg <= 0.0):
            raise InstabilityError(
                f"continuation operator escaped after {it} iterations; "
                "no wealth-consumption ratio exists at these parameters")
        w_new = 1.0 + kg**inv
        delta = w_new - w
        if delta_prev is not None and float(np.vdot(delta, delta_prev)) < 0.0:
            w_new = w + 0.5 * delta
            delta = 0.5 * delta
        change = float(np.max(np.abs(delta)))
        w = w_new
        delta_prev = delta
        if not np.all(np.isfinite(w)) or float(w.max()) > W_ESCAPE:
            raise InstabilityError(
                f"iterates escaped after {it} iterations; no "
                "wealth-consumption ratio exists at these parameters")
        if change < tol:
            residual = float(np.max(np.abs(w - (1.0 + op.apply(w**th) ** inv))))
            w_full, grids, dims = _expand_solution(params, op, w)
            return WcSolution(dims=dims, grids=grids, w=w_full,
                              residual=residual, iterations=it)
    raise ConvergenceError(
        f"no convergence within {max_iter} iterations (last change {change:.3g})",
        residual=change)


def _expand_solution(params, op, w):
    if isinstance(params, EzSsyParams):
        nhd = op.hdg.shape[0]
        w_full = np.repeat(w[..., None], nhd, axis=-1)
        return w_full, op.grids + (op.hdg,), op.dims + ("h_d",)
    return w, op.grids, op.dims


def path_sampler(model, wc):
    """Batch sampler of log SDF products for the long-run-risk families
    (montecarlo protocol: draw_init + log_products)."""
    if isinstance(model, EzByParams):
        return _ByPathSampler(model, wc)
    if isinstance(model, EzSsyParams):
        return _SsyPathSampler(model, wc)
    raise ParameterError(f"no long-run-risk sampler for {type(model).__name__}")


def _check_wc(wc, dims):
    if not isinstance(wc, WcSolution):
        raise ParameterError("wc must be a WcSolution")
    if tuple(wc.dims) != dims:
        raise ParameterError(f"wc solution has dims {wc.dims}, expected {dims}")


class _ByPathSampler:
    """Draw order per batch: z_0, sigma2_0, then per-step eta_z, eta_sigma,
    and the combined measurement shock."""

    def __init__(self, p, wc):
        _check_wc(wc, ("z", "sigma"))
        self.p = p
        self.wc = wc
        self.base = p.theta * math.log(p.beta) + p.mu_d - p.gamma * p.mu_c
        self.coef_z = p.alpha - p.gamma
        self.s_iid = math.sqrt(p.gamma**2 + p.varphi_d**2)
        self.mu_s2 = p.d / (1.0 - p.v)
        self.sd_s2 = p.varphi_sigma / math.sqrt(1.0 - p.v**2)
        self.std_z = p.varphi_z * math.sqrt(self.mu_s2 / (1.0 - p.rho**2))

    def draw_init(self, rng, k):
        z0 = rng.standard_normal(k) * self.std_z
        s20 = np.maximum(self.mu_s2 + rng.standard_normal(k) * self.sd_s2, 0.0)
        return (z0, s20)

    def log_products(self, rng, init, n):
        z0, s20 = init
        k = z0.shape[0]
        if n == 0:
            return np.zeros(k)
        p = self.p
        eta_z = rng.standard_normal((k, n))
        eta_s = rng.standard_normal((k, n))
        zeta = rng.standard_normal((k, n))
        s2 = np.empty((k, n + 1))
        s2[:, 0] = s20
        for t in range(n):
            s2[:, t + 1] = np.maximum(
                p.v * s2[:, t] + p.d + p.varphi_sigma * eta_s[:, t], 0.0)
        sig = np.sqrt(s2)
        z = np.empty((k, n + 1))
        z[:, 0] = z0
        u = p.varphi_z * sig[:, :n] * eta_z
        z[:, 1:] = lfilter([1.0], [1.0, -p.rho], u, axis=1,
                           zi=(p.rho * z0)[:, None])[0]
        w_path = _interp_nd(self.wc.grids, self.wc.w,
                            (z.ravel(), sig.ravel())).reshape(k, n + 1)
        if w_path.min() <= 1.0:
            raise DomainError("wealth-consumption ratio <= 1 on a simulated path")
        return (n * self.base
                + self.coef_z * z[:, :n].sum(axis=1)
                + self.s_iid * np.einsum("ij,ij->i", sig[:, :n], zeta)
                + (p.theta - 1.0) * (np.log(w_path[:, 1:]).sum(axis=1)
                                     - np.log(w_path[:, :n] - 1.0).sum(axis=1)))


class _SsyPathSampler:
    """Draw order per batch: z_0, h_z0, h_c0, h_d0, then per-step xi_z,
    xi_c, xi_d, ups, and the combined measurement shock."""

    def __init__(self, p, wc):
        _check_wc(wc, ("z", "h_z", "h_c", "h_d"))
        self.p = p
        self.wc3 = (wc.grids[0], wc.grids[1], wc.grids[2])
        self.w3 = wc.w[..., 0]
        self.base = p.theta * math.log(p.beta) + p.mu_d - p.gamma * p.mu_c
        self.std_hz = p.sigma_hz / math.sqrt(1.0 - p.rho_hz**2)
        self.std_hc = p.sigma_hc / math.sqrt(1.0 - p.rho_hc**2)
        self.std_hd = p.sigma_hd / math.sqrt(1.0 - p.rho_hd**2)
        self.std_z = p.varphi_z * p.bar_sigma * math.exp(self.std_hz**2)

    def draw_init(self, rng, k):
        z0 = rng.standard_normal(k) * self.std_z
        hz0 = rng.standard_normal(k) * self.std_hz
        hc0 = rng.standard_normal(k) * self.std_hc
        hd0 = rng.standard_normal(k) * self.std_hd
        return (z0, hz0, hc0, hd0)

    @staticmethod
    def _ar1_path(x0, rho, shocks):
        out = np.empty((x0.shape[0], shocks.shape[1] + 1))
        out[:, 0] = x0
        out[:, 1:] = lfilter([1.0], [1.0, -rho], shocks, axis=1,
                             zi=(rho * x0)[:, None])[0]
        return out

    def log_products(self, rng, init, n):
        z0, hz0, hc0, hd0 = init
        k = z0.shape[0]
        if n == 0:
            return np.zeros(k)
        p = self.p
        xi_z = rng.standard_normal((k, n))
        xi_c = rng.standard_normal((k, n))
        xi_d = rng.standard_normal((k, n))
        ups = rng.standard_normal((k, n))
        zeta = rng.standard_normal((k, n))
        hz = self._ar1_path(hz0, p.rho_hz, p.sigma_hz * xi_z)
        hc = self._ar1_path(hc0, p.rho_hc, p.sigma_hc * xi_c)
        hd = self._ar1_path(hd0, p.rho_hd, p.sigma_hd * xi_d)
        sig_z = p.varphi_z * p.bar_sigma * np.exp(hz)
        sig_c = p.varphi_c * p.bar_sigma * np.exp(hc)
        sig_d = p.varphi_d * p.bar_sigma * np.exp(hd)
        u = math.sqrt(1.0 - p.rho**2) * sig_z[:, :n] * ups
        z = self._ar1_path(z0, p.rho, u)
        s_comb = np.sqrt((p.delta - p.gamma) ** 2 * sig_c[:, :n] ** 2
                         + sig_d[:, :n] ** 2)
        w_path = _interp_nd(self.wc3, self.w3,
                            (z.ravel(), hz.ravel(), hc.ravel())).reshape(k, n + 1)
        if w_path.min() <= 1.0:
            raise DomainError("wealth-consumption ratio <= 1 on a simulated path")
        return (n * self.base
                + (p.alpha - p.gamma) * z[:, :n].sum(axis=1)
                + np.einsum("ij,ij->i", s_comb, zeta)
                + (p.theta - 1.0) * (np.log(w_path[:, 1:]).sum(axis=1)
                                     - np.log(w_path[:, :n] - 1.0).sum(axis=1)))


def simulate_sdf_log_product(params, wc, n, seed=0):
    """Log product of n one-step factors along one simulated path."""
    n = int(n)
    if n < 0:
        raise ParameterError("n must be nonnegative")
    sampler = path_sampler(params, wc)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed),))))
    init = sampler.draw_init(rng, 1)
    lp = 0.0 if n == 0 else float(sampler.log_products(rng, init, n)[0])
    return SdfPathProduct(log_product=lp, n=n, seed=int(seed))
