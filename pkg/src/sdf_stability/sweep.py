"""Two-parameter stability maps.

A sweep evaluates the stability exponent on an inclusive rectangular grid
of two model parameters by the chosen method. Each cell derives its own
seed from (seed, cell_index), so the map is reproducible cell by cell and
independent of evaluation order; a cell whose parameters are invalid (or
whose family the method does not support) records an error tag in-place
instead of aborting the sweep.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import montecarlo, recursive
from .errors import ParameterError
from .markov import Ar1Spec, rouwenhorst
from .models import (FAMILY_NAMES, CrraCvParams, EzByParams, EzSsyParams,
                     FiniteCrraParams, HabitParams, RiskNeutralParams,
                     lphi_analytic)
from .spectral import build_valuation_matrix, spectral_radius

__all__ = ["SweepAxis", "SweepSpec", "SweepResult", "run_sweep", "read_sweep_csv"]

METHODS = ("analytic", "spectral", "monte-carlo")


@dataclass(frozen=True)
class SweepAxis:
    """Inclusive linspace over one scalar model parameter."""

    name: str
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if int(self.count) < 1:
            raise ParameterError("axis count must be at least 1")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ParameterError("axis bounds must be finite")

    @property
    def values(self):
        return np.linspace(self.lo, self.hi, int(self.count))


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """Base model, two swept axes, and the evaluation method."""

    model: object
    axis1: SweepAxis
    axis2: SweepAxis
    method: str = "analytic"
    states: int = 10
    mc: montecarlo.McConfig | None = None
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}")
        fields = {f.name for f in dataclasses.fields(self.model)}
        for ax in (self.axis1, self.axis2):
            if ax.name not in fields:
                raise ParameterError(
                    f"{type(self.model).__name__} has no parameter {ax.name!r}")
        if self.method == "monte-carlo" and self.mc is None:
            raise ParameterError("monte-carlo sweeps need an McConfig")
        if self.method == "spectral" and int(self.states) < 2:
            raise ParameterError("spectral sweeps need at least 2 states")


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Row-major lphi grid over (axis1, axis2) with per-cell status."""

    spec: SweepSpec
    values1: np.ndarray
    values2: np.ndarray
    lphi: np.ndarray
    status: np.ndarray

    def to_csv(self, path):
        sp = self.spec
        family = FAMILY_NAMES.get(type(sp.model), type(sp.model).__name__)
        fixed = []
        for f in dataclasses.fields(sp.model):
            if f.name in (sp.axis1.name, sp.axis2.name):
                continue
            val = getattr(sp.model, f.name)
            if isinstance(val, (int, float)):
                fixed.append(f"{f.name}={val:.17g}")
        with open(path, "w") as fh:
            fh.write(f"# family: {family}\n")
            fh.write(f"# method: {sp.method}\n")
            fh.write(f"# seed: {sp.seed}\n")
            fh.write(f"# fixed: {' '.join(fixed)}\n")
            fh.write(f"# shape: {len(self.values1)}x{len(self.values2)}\n")
            fh.write(f"{sp.axis1.name},{sp.axis2.name},lphi,status\n")
            for i, v1 in enumerate(self.values1):
                for j, v2 in enumerate(self.values2):
                    fh.write(f"{v1:.17g},{v2:.17g},{self.lphi[i, j]:.17g},"
                             f"{self.status[i, j]}\n")


def read_sweep_csv(path):
    """Parse a sweep CSV back into metadata and row arrays."""
    meta = {}
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            elif header is None:
                header = line.split(",")
            elif line:
                p1, p2, lp, st = line.split(",")
                rows.append((float(p1), float(p2), float(lp), st))
    v1 = np.array([r[0] for r in rows])
    v2 = np.array([r[1] for r in rows])
    lphi = np.array([r[2] for r in rows])
    status = np.array([r[3] for r in rows], dtype=object)
    return {"meta": meta, "header": header, "param1": v1, "param2": v2,
            "lphi": lphi, "status": status}


def _discretized_lphi(model, states):
    if isinstance(model, RiskNeutralParams):
        return math.log(model.beta)
    if isinstance(model, CrraCvParams):
        chain = rouwenhorst(Ar1Spec(rho=model.rho, sigma=model.sigma), states)
    elif isinstance(model, HabitParams):
        chain = rouwenhorst(Ar1Spec(rho=model.rho, sigma=model.sigma, b=model.b),
                            states)
    elif isinstance(model, FiniteCrraParams):
        chain = model.chain
    else:
        raise ParameterError(
            f"{type(model).__name__} has no spectral discretization")
    r = spectral_radius(build_valuation_matrix(model, chain))
    return math.log(r) if r > 0 else -math.inf


_WC_DIVIDEND_ONLY = {"mu_d", "alpha", "delta", "varphi_d"}


def _wc_for(model, cache):
    """Wealth-consumption solution, reused across cells that differ only in
    dividend-side parameters (those never enter the consumption recursion)."""
    key = tuple((f.name, getattr(model, f.name))
                for f in dataclasses.fields(model)
                if f.name not in _WC_DIVIDEND_ONLY)
    if key not in cache:
        cache[key] = recursive.solve_wealth_consumption(model)
    return cache[key]


def _cell_value(spec, model, cell_seed, threads, wc_cache):
    if spec.method == "analytic":
        return lphi_analytic(model)
    if spec.method == "spectral":
        return _discretized_lphi(model, int(spec.states))
    cfg = dataclasses.replace(spec.mc, seed=cell_seed)
    wc = None
    if isinstance(model, (EzByParams, EzSsyParams)):
        wc = _wc_for(model, wc_cache)
    return montecarlo.estimate_lphi(model, cfg, wc=wc, threads=threads).value


def run_sweep(spec, threads=1):
    """Evaluate the sweep; cells that fail record their exception type."""
    if not isinstance(spec, SweepSpec):
        raise ParameterError("spec must be a SweepSpec")
    v1 = spec.axis1.values
    v2 = spec.axis2.values
    n1, n2 = len(v1), len(v2)
    lphi = np.full((n1, n2), np.nan)
    status = np.full((n1, n2), "ok", dtype=object)
    wc_cache = {}

    def eval_cell(args):
        i, j = args
        idx = i * n2 + j
        cell_seed = montecarlo._derive_seed(spec.seed, idx)
        try:
            model = dataclasses.replace(
                spec.model, **{spec.axis1.name: float(v1[i]),
                               spec.axis2.name: float(v2[j])})
            val = _cell_value(spec, model, cell_seed,
                              threads if spec.method == "monte-carlo" else 1,
                              wc_cache)
        except Exception as exc:  # recorded in-cell, sweep continues
            return i, j, math.nan, type(exc).__name__
        return i, j, float(val), "ok"

    cells = [(i, j) for i in range(n1) for j in range(n2)]
    if spec.method != "monte-carlo" and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            results = list(ex.map(eval_cell, cells))
    else:
        results = [eval_cell(c) for c in cells]
    for i, j, val, st in results:
        lphi[i, j] = val
        status[i, j] = st
    return SweepResult(spec=spec, values1=v1, values2=v2, lphi=lphi,
                       status=status)
