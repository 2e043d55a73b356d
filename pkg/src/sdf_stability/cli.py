"""Command line interface.

Configuration is TOML: exactly one model-family table plus optional
[method], [output] and [sweep] tables; command-line flags override config
values. Unknown keys anywhere are usage errors (listed in the message).

Exit codes: 0 success / STABLE verdict, 1 usage or parameter error,
2 UNSTABLE verdict (or certified divergence in `solve`), 3 INDETERMINATE.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import sweep as sweep_mod
from .errors import IndeterminateError, InstabilityError, ParameterError
from .markov import Ar1Spec, MarkovChain, rouwenhorst
from .models import (FAMILY_NAMES, CrraCvParams, EzByParams, EzSsyParams,
                     FiniteCrraParams, HabitParams, RiskNeutralParams,
                     crra_cv_benchmark, lphi_analytic, phi_weight)
from .montecarlo import McConfig, estimate_lphi, run_table1, write_table1_csv
from .pricing import PricingProblem, solve_markov_solution
from .recursive import WcGridSpec, WcSolution, solve_wealth_consumption
from .spectral import build_valuation_matrix, spectral_radius

__all__ = ["main", "model_from_config", "model_to_config", "format_config"]

MODEL_TABLES = {
    "risk-neutral": RiskNeutralParams,
    "crra-cv": CrraCvParams,
    "finite-crra": FiniteCrraParams,
    "habit": HabitParams,
    "ez-by": EzByParams,
    "ez-ssy": EzSsyParams,
}
OTHER_TABLES = ("method", "output", "sweep")
METHOD_KEYS = ("name", "states", "n", "m", "reps", "p", "inner_m", "seed",
               "threads", "tol", "max_iter", "span", "sizes", "gh_nodes")
VERDICT_EPS = 1e-12

STABLE, UNSTABLE, INDETERMINATE = "STABLE", "UNSTABLE", "INDETERMINATE"


class UsageError(Exception):
    pass


def _load_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"invalid TOML in {path}: {exc}")


def _check_tables(cfg):
    unknown = [k for k in cfg
               if k not in MODEL_TABLES and k not in OTHER_TABLES]
    if unknown:
        raise UsageError(f"unknown config table(s): {', '.join(sorted(unknown))}")
    fams = [k for k in cfg if k in MODEL_TABLES]
    if len(fams) > 1:
        raise UsageError(f"config must contain one model table, found: "
                         f"{', '.join(sorted(fams))}")
    return fams[0] if fams else None


def model_from_config(cfg):
    """Build the model from a parsed config dict (exactly one family table)."""
    family = _check_tables(cfg)
    if family is None:
        raise UsageError("config contains no model family table")
    cls = MODEL_TABLES[family]
    body = dict(cfg[family])
    field_names = {f.name for f in dataclasses.fields(cls)}
    if cls is FiniteCrraParams:
        allowed = (field_names - {"chain"}) | {"states", "P"}
    else:
        allowed = field_names
    unknown = set(body) - allowed
    if unknown:
        raise UsageError(f"unknown key(s) in [{family}]: "
                         f"{', '.join(sorted(unknown))}")
    if cls is FiniteCrraParams:
        if "states" not in body or "P" not in body:
            raise UsageError("[finite-crra] needs 'states' and 'P'")
        chain = MarkovChain.from_transition(body.pop("states"), body.pop("P"))
        return cls(chain=chain, **{k: float(v) for k, v in body.items()})
    return cls(**{k: float(v) for k, v in body.items()})


def model_to_config(model):
    """Inverse of model_from_config."""
    family = FAMILY_NAMES[type(model)]
    body = {}
    for f in dataclasses.fields(model):
        if f.name == "chain":
            body["states"] = [float(x) for x in model.chain.states]
            body["P"] = [[float(x) for x in row] for row in model.chain.P]
        else:
            body[f.name] = float(getattr(model, f.name))
    return {family: body}


def format_config(model):
    """Render the model as TOML text."""
    cfg = model_to_config(model)
    family, body = next(iter(cfg.items()))
    lines = [f"[{family}]"]
    for k, v in body.items():
        if isinstance(v, list) and v and isinstance(v[0], list):
            rows = ", ".join("[" + ", ".join(f"{x:.17g}" for x in r) + "]"
                             for r in v)
            lines.append(f"{k} = [{rows}]")
        elif isinstance(v, list):
            lines.append(f"{k} = [" + ", ".join(f"{x:.17g}" for x in v) + "]")
        else:
            lines.append(f"{k} = {v:.17g}")
    return "\n".join(lines) + "\n"


def _method_cfg(cfg):
    body = dict(cfg.get("method", {}))
    unknown = set(body) - set(METHOD_KEYS)
    if unknown:
        raise UsageError(f"unknown key(s) in [method]: "
                         f"{', '.join(sorted(unknown))}")
    return body


def _output_cfg(cfg):
    body = dict(cfg.get("output", {}))
    unknown = set(body) - {"path"}
    if unknown:
        raise UsageError(f"unknown key(s) in [output]: "
                         f"{', '.join(sorted(unknown))}")
    return body.get("path")


def _pick(flag_value, cfg_body, key, default):
    if flag_value is not None:
        return flag_value
    if key in cfg_body:
        return cfg_body[key]
    return default


def _normalize_method(name):
    if name in ("mc", "monte-carlo"):
        return "monte-carlo"
    if name in ("analytic", "spectral"):
        return name
    raise UsageError(f"unknown method: {name}")


def _verdict(lphi):
    if abs(lphi) <= VERDICT_EPS:
        return INDETERMINATE
    return STABLE if lphi < 0 else UNSTABLE


def _verdict_code(verdict):
    return {STABLE: 0, UNSTABLE: 2, INDETERMINATE: 3}[verdict]


def _discretize_for(model, states):
    if isinstance(model, RiskNeutralParams):
        p = np.full((int(states), int(states)), 1.0 / int(states))
        grid = np.arange(int(states), dtype=float)
        return MarkovChain.from_transition(grid, p)
    if isinstance(model, CrraCvParams):
        return rouwenhorst(Ar1Spec(rho=model.rho, sigma=model.sigma), states)
    if isinstance(model, HabitParams):
        return rouwenhorst(Ar1Spec(rho=model.rho, sigma=model.sigma,
                                   b=model.b), states)
    if isinstance(model, FiniteCrraParams):
        return model.chain
    raise ParameterError(
        f"{FAMILY_NAMES.get(type(model), '?')} has no finite-state reduction")


def _spectral_lphi(model, states):
    chain = _discretize_for(model, states)
    r = spectral_radius(build_valuation_matrix(model, chain))
    return math.log(r) if r > 0 else -math.inf


def _grid_from_cfg(mcfg):
    if not any(k in mcfg for k in ("span", "sizes", "gh_nodes")):
        return None
    kw = {}
    if "span" in mcfg:
        kw["span"] = float(mcfg["span"])
    if "sizes" in mcfg:
        kw["sizes"] = tuple(int(x) for x in mcfg["sizes"])
    if "gh_nodes" in mcfg:
        kw["gh_nodes"] = int(mcfg["gh_nodes"])
    return WcGridSpec(**kw)


def _wc_for_model(model, wc_path, mcfg):
    if wc_path:
        return WcSolution.load(wc_path)
    return solve_wealth_consumption(model, grid=_grid_from_cfg(mcfg))


def _emit(lines, out_path):
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)


def cmd_lphi(args):
    cfg = _load_toml(args.config) if args.config else {}
    model = model_from_config(cfg)
    mcfg = _method_cfg(cfg)
    method = _normalize_method(_pick(args.method, mcfg, "name", "analytic"))
    out_path = args.out or _output_cfg(cfg)
    family = FAMILY_NAMES[type(model)]
    lines = [f"method: {method}", f"family: {family}"]
    std_err = None
    if method == "analytic":
        lphi = lphi_analytic(model)
    elif method == "spectral":
        states = int(_pick(args.states, mcfg, "states", 10))
        lphi = _spectral_lphi(model, states)
    else:
        cfg_mc = McConfig(
            n=int(_pick(args.n, mcfg, "n", 1000)),
            m=int(_pick(args.m, mcfg, "m", 10000)),
            p=float(_pick(args.p, mcfg, "p", 1.0)),
            inner_m=mcfg.get("inner_m"),
            seed=int(_pick(args.seed, mcfg, "seed", 0)),
            replications=int(_pick(args.reps, mcfg, "reps", 1)))
        wc = None
        if isinstance(model, (EzByParams, EzSsyParams)):
            wc = _wc_for_model(model, args.wc, mcfg)
        est = estimate_lphi(model, cfg_mc, wc=wc,
                            threads=int(_pick(args.threads, mcfg, "threads", 1)))
        lphi, std_err = est.value, est.std_dev
    lines.append(f"lphi: {lphi:.7g}")
    if std_err is not None:
        lines.append(f"std_error: {std_err:.7g}")
    verdict = _verdict(lphi)
    lines.append(f"verdict: {verdict}")
    _emit(lines, out_path)
    return _verdict_code(verdict)


def cmd_solve(args):
    cfg = _load_toml(args.config) if args.config else {}
    model = model_from_config(cfg)
    mcfg = _method_cfg(cfg)
    out_path = args.out or _output_cfg(cfg)
    states = int(_pick(args.states, mcfg, "states", 10))
    tol = float(_pick(args.tol, mcfg, "tol", 1e-10))
    max_iter = int(_pick(None, mcfg, "max_iter", 100_000))
    chain = _discretize_for(model, states)
    V = build_valuation_matrix(model, chain)
    problem = PricingProblem(V=V, g_hat=np.asarray(phi_weight(model, chain.states),
                                                   dtype=float))
    try:
        sol = solve_markov_solution(problem, tol=tol, max_iter=max_iter)
    except InstabilityError as exc:
        print(f"unstable: {exc} (ln_r: {exc.ln_r:.7g})", file=sys.stderr)
        return 2
    except IndeterminateError as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return 3
    print(f"iterations: {sol.iterations}  residual: {sol.residual:.3g}  "
          f"ln_r: {sol.ln_r:.7g}", file=sys.stderr)
    rows = ["state,h_star"]
    rows += [f"{x:.17g},{h:.17g}" for x, h in zip(chain.states, sol.h_star)]
    text = "\n".join(rows) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve_wc(args):
    cfg = _load_toml(args.config) if args.config else {}
    model = model_from_config(cfg)
    if not isinstance(model, (EzByParams, EzSsyParams)):
        raise UsageError("solve-wc needs a long-run-risk family (ez-by/ez-ssy)")
    mcfg = _method_cfg(cfg)
    tol = float(_pick(args.tol, mcfg, "tol", 1e-9))
    max_iter = int(_pick(None, mcfg, "max_iter", 200_000))
    out_path = args.out or _output_cfg(cfg) or "wc_solution.npz"
    sol = solve_wealth_consumption(model, grid=_grid_from_cfg(mcfg), tol=tol,
                                   max_iter=max_iter)
    sol.save(out_path)
    print(f"dims: {','.join(sol.dims)}  shape: "
          f"{'x'.join(str(len(g)) for g in sol.grids)}  "
          f"iterations: {sol.iterations}  residual: {sol.residual:.3g}")
    print(f"saved: {out_path}")
    return 0


def cmd_table1(args):
    cfg = _load_toml(args.config) if args.config else {}
    model = model_from_config(cfg) if _check_tables(cfg) else crra_cv_benchmark()
    mcfg = _method_cfg(cfg)
    reps = int(_pick(args.reps, mcfg, "reps", 1000))
    seed = int(_pick(args.seed, mcfg, "seed", 1234))
    threads = int(_pick(args.threads, mcfg, "threads", 1))
    out_path = args.out or _output_cfg(cfg) or "table1.csv"
    n_list = [int(x) for x in args.n.split(",")] if args.n else (250, 500, 750)
    m_list = ([int(x) for x in args.m.split(",")] if args.m
              else (1000, 2000, 3000, 4000, 5000))
    rows = run_table1(model, n_list=n_list, m_list=m_list, replications=reps,
                      seed=seed, threads=threads)
    write_table1_csv(rows, out_path)
    print("n,m,mean,sd")
    for n, m, mean, sd in rows:
        print(f"{n},{m},{mean:.7g},{'' if sd is None else f'{sd:.7g}'}")
    print(f"saved: {out_path}")
    return 0


def cmd_disc_curve(args):
    cfg = _load_toml(args.config) if args.config else {}
    model = model_from_config(cfg) if _check_tables(cfg) else crra_cv_benchmark()
    if not isinstance(model, CrraCvParams):
        raise UsageError("disc-curve needs a crra-cv model")
    n_max = int(args.states or 25)
    if n_max < 2:
        raise UsageError("--states must be at least 2")
    exact = lphi_analytic(model)
    out_path = args.out or _output_cfg(cfg)
    lines = ["n_states,lphi,abs_error_vs_analytic"]
    for ns in range(2, n_max + 1):
        val = _spectral_lphi(model, ns)
        lines.append(f"{ns},{val:.17g},{abs(val - exact):.17g}")
    _emit(lines, out_path)
    return 0


def cmd_sweep(args):
    if not args.config:
        raise UsageError("sweep needs --config with a [sweep] table")
    cfg = _load_toml(args.config)
    model = model_from_config(cfg)
    mcfg = _method_cfg(cfg)
    body = dict(cfg.get("sweep", {}))
    unknown = set(body) - {"param1", "param2"}
    if unknown:
        raise UsageError(f"unknown key(s) in [sweep]: "
                         f"{', '.join(sorted(unknown))}")
    if "param1" not in body or "param2" not in body:
        raise UsageError("[sweep] needs param1 and param2 tables")
    axes = []
    for key in ("param1", "param2"):
        ax = dict(body[key])
        unknown = set(ax) - {"name", "min", "max", "count"}
        if unknown:
            raise UsageError(f"unknown key(s) in [sweep.{key}]: "
                             f"{', '.join(sorted(unknown))}")
        try:
            axes.append(sweep_mod.SweepAxis(name=str(ax["name"]),
                                            lo=float(ax["min"]),
                                            hi=float(ax["max"]),
                                            count=int(ax["count"])))
        except KeyError as exc:
            raise UsageError(f"[sweep.{key}] is missing {exc.args[0]}")
    method = _normalize_method(_pick(args.method, mcfg, "name", "analytic"))
    mc = None
    if method == "monte-carlo":
        mc = McConfig(n=int(_pick(args.n, mcfg, "n", 500)),
                      m=int(_pick(args.m, mcfg, "m", 1000)),
                      p=float(_pick(args.p, mcfg, "p", 1.0)),
                      replications=int(_pick(args.reps, mcfg, "reps", 1)))
    spec = sweep_mod.SweepSpec(
        model=model, axis1=axes[0], axis2=axes[1], method=method,
        states=int(_pick(args.states, mcfg, "states", 10)),
        mc=mc, seed=int(_pick(args.seed, mcfg, "seed", 0)))
    result = sweep_mod.run_sweep(
        spec, threads=int(_pick(args.threads, mcfg, "threads", 1)))
    out_path = args.out or _output_cfg(cfg) or "sweep.csv"
    result.to_csv(out_path)
    n_err = int(np.sum(result.status != "ok"))
    print(f"cells: {result.lphi.size}  errors: {n_err}  saved: {out_path}")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="TOML config path")
    sub.add_argument("--method", help="analytic | spectral | mc")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--threads", type=int)
    sub.add_argument("--out", help="output path")
    sub.add_argument("--n", help="path length (int, or comma list for table1)")
    sub.add_argument("--m", help="paths per estimate (int, or comma list)")
    sub.add_argument("--reps", type=int, help="replications")
    sub.add_argument("--p", type=float, help="moment order")
    sub.add_argument("--states", type=int, help="discretization size")
    sub.add_argument("--tol", type=float)
    sub.add_argument("--wc", help="saved wealth-consumption .npz")


def _int_or_none(v):
    if v is None:
        return None
    try:
        return int(v)
    except ValueError:
        raise UsageError(f"expected an integer, got {v!r}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sdfstab",
        description="Stability exponents and pricing for SDF processes")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("lphi", cmd_lphi), ("solve", cmd_solve),
                     ("solve-wc", cmd_solve_wc), ("table1", cmd_table1),
                     ("disc-curve", cmd_disc_curve), ("sweep", cmd_sweep)):
        sub = subs.add_parser(name)
        _add_common(sub)
        sub.set_defaults(func=fn)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command != "table1":
            args.n = _int_or_none(args.n)
            args.m = _int_or_none(args.m)
        return args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InstabilityError as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return 2
    except IndeterminateError as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
