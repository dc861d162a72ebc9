"""Command-line frontend.

Every subcommand reads an optional ``--config`` file of flat ``key=value``
lines; flags given on the command line override it.  ``--json`` switches to a
versioned JSON document on stdout.

Exit codes: 0 ok, 2 validation error, 3 numeric failure, 4 table mismatch.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

from . import __version__
from ._backend import BACKEND
from .discrete import DiscreteConfig, convergence_study, simulate
from .distributions import parse_distribution
from .equilibrium import (Corner, GameParams, security_max_cstar, solve_threshold_equilibrium,
                          welfare, welfare_optimal_cstar)
from .errors import NumericError, ValidationError
from .extensions import (CostlyDelegationParams, EndogenousParams, classify_return_competition,
                         max_security_costly, solve_costly_delegation, solve_endogenous)
from .reward_design import lambda_grid, minimize_malicious_reward, sweep_lambda
from .tables import build_tables

SCHEMA_VERSION = 1

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_TABLE = 0, 2, 3, 4

# config key -> (argparse dest, converter)
CONFIG_KEYS = {
    "H": ("H", float), "M": ("M", float), "R": ("R", float),
    "lambda": ("lam", float), "dist": ("dist", str), "cd": ("cd", float),
    "theta": ("theta", float), "floor": ("floor", float), "n": ("n", int),
    "m": ("m", int), "reps": ("reps", int), "seed": ("seed", int),
}
DEFAULTS = {"H": 1.0, "M": 0.5, "R": 1.0, "lam": None, "dist": "uniform", "cd": None,
            "theta": None, "floor": None, "n": None, "m": None, "reps": 100, "seed": 0}


def read_config(path: str | Path) -> dict:
    """Parse a flat key=value file; '#' starts a comment, unknown keys are rejected."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r} "
                                  f"(allowed: {', '.join(CONFIG_KEYS)})")
        dest, conv = CONFIG_KEYS[key]
        try:
            out[dest] = conv(value)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def _scenario(args) -> dict:
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(read_config(args.config))
    for dest in DEFAULTS:
        v = getattr(args, dest, None)
        if v is not None:
            merged[dest] = v
    return merged


def _params(sc: dict, lam: float | None = None) -> GameParams:
    lam = sc["lam"] if lam is None else lam
    return GameParams(sc["H"], sc["M"], sc["R"], 1.0 if lam is None else lam)


def _require(sc: dict, key: str, flag: str):
    if sc[key] is None:
        raise ValidationError(f"this command needs {flag}")
    return sc[key]


def _clean(obj):
    """JSON-safe copy: NaN/inf become null."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(args, command: str, result: dict, text: str):
    if args.json:
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "result": _clean(result)}
        out = json.dumps(doc, indent=2, sort_keys=True)
    else:
        out = text
    if args.out and command != "sweep":
        Path(args.out).write_text(out + "\n")
    else:
        print(out)


def _kv(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    lines = []
    for k, v in pairs:
        if isinstance(v, float):
            v = "nan" if math.isnan(v) else f"{v:.6f}"
        lines.append(f"{k.ljust(width)}  {v}")
    return "\n".join(lines)


# -- subcommands -------------------------------------------------------------

def cmd_solve(args) -> int:
    sc = _scenario(args)
    lam = _require(sc, "lam", "--lambda")
    dist = parse_distribution(sc["dist"])
    p = _params(sc, lam)
    eq = solve_threshold_equilibrium(p, dist)
    W = welfare(eq.cstar, p, dist)
    if eq.corner is Corner.NO_INTERIOR:
        print(f"warning: lambda={lam} is below M/(H+M)={p.lambda_bound:.6f}; "
              "no honest agent runs a pool", file=sys.stderr)
    res = dict(eq.to_dict(), W=W, lambda_bound=p.lambda_bound)
    text = _kv([("c*", eq.cstar), ("P", eq.P), ("D", eq.D), ("s", eq.s), ("r", eq.r),
                ("security", eq.security), ("W", W), ("corner", eq.corner.value)])
    _emit(args, "solve", res, text)
    return EXIT_OK


def cmd_design(args) -> int:
    sc = _scenario(args)
    dist = parse_distribution(sc["dist"])
    p = _params(sc)
    if args.objective == "security":
        eq = security_max_cstar(p, dist)
        lam, cstar, extra = 1.0, eq.cstar, {}
    elif args.objective == "welfare":
        d = welfare_optimal_cstar(p, dist)
        lam, cstar, extra = d.lam, d.cstar, {"heuristic": d.heuristic, "notes": list(d.notes)}
    else:
        d = minimize_malicious_reward(p, dist, lambda_floor=sc["floor"])
        lam, cstar, extra = d.lam, d.cstar, {"notes": list(d.notes)}
    q = p.with_lambda(min(lam, 1.0))
    eq = solve_threshold_equilibrium(q, dist)
    mu = p.M * q.lam / (eq.P + p.M) if eq.P + p.M > 0 else math.nan
    res = dict(objective=args.objective, **{"lambda": lam}, cstar=cstar, mu=mu,
               security=eq.security, W=welfare(cstar, p, dist), **extra)
    text = _kv([("objective", args.objective), ("lambda", lam), ("c*", cstar), ("mu", mu),
                ("security", eq.security), ("W", res["W"])]
               + [("note", n) for n in extra.get("notes", [])])
    _emit(args, "design", res, text)
    return EXIT_OK


def _parse_grid(spec: str | None, p: GameParams):
    if spec is None:
        return lambda_grid(p, 11)
    if ":" in spec:
        lo, hi, k = spec.split(":")
        return lambda_grid(p, int(k), lo=float(lo), hi=float(hi))
    return [float(x) for x in spec.split(",")]


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    dist = parse_distribution(sc["dist"])
    p = _params(sc)
    try:
        grid = _parse_grid(args.grid, p)
    except ValueError:
        raise ValidationError(f"bad --grid {args.grid!r}; use lo:hi:points or a,b,c") from None
    curve = sweep_lambda(p, dist, grid)
    if args.json:
        rows = [dict(zip(("lambda", "cstar", "P", "mu", "security", "welfare"), r.as_tuple()))
                for r in curve.rows]
        out = json.dumps({"schema_version": SCHEMA_VERSION, "command": "sweep",
                          "result": _clean({"shape": curve.shape.value, "rows": rows})},
                         indent=2, sort_keys=True)
    else:
        out = curve.to_csv().rstrip("\n")
    if args.out:
        Path(args.out).write_text(out + "\n")
    else:
        print(out)
    return EXIT_OK


def cmd_tables(args) -> int:
    ts = build_tables(reference_rounding=args.reference_rounding)
    res = {"tables": {str(k): v for k, v in ts.text.items()},
           "mismatches": [{"table": c.table, "cell": c.label, "computed": c.computed,
                           "printed": c.printed, "tol": c.tol} for c in ts.mismatches],
           "reference_rounding": args.reference_rounding}
    parts = [f"Table {k}\n{v}" for k, v in ts.text.items()]
    text = "\n\n".join(parts)
    _emit(args, "tables", res, text)
    if ts.mismatches:
        for c in ts.mismatches:
            print(f"mismatch: table {c.table} {c.label}: computed {c.computed:.9f}, "
                  f"printed {c.printed}, |diff| {abs(c.computed - c.printed):.2e} > {c.tol:g}",
                  file=sys.stderr)
        return EXIT_TABLE
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    dist = parse_distribution(sc["dist"])
    p = _params(sc)
    if args.convergence:
        try:
            grid = [int(float(x)) for x in args.convergence.split(",")]
        except ValueError:
            raise ValidationError(f"bad --convergence {args.convergence!r}") from None
        rows = convergence_study(p, dist, grid, replications=sc["reps"], seed=sc["seed"])
        text = "\n".join(
            f"n={r['n']:>8d}  m={r['m']:>7d}  rms_dev={r['deviation']:.6f}  "
            f"pooled={r['pooled_cstar']:.6f}  mean_field={r['mean_field_cstar']:.6f}  "
            f"continuum={r['continuum_cstar']:.6f}" for r in rows)
        _emit(args, "simulate", {"convergence": rows}, text)
        return EXIT_OK
    n = _require(sc, "n", "--n")
    cfg = DiscreteConfig.from_continuum(p, dist, n, m=sc["m"], replications=sc["reps"],
                                        seed=sc["seed"])
    rep = simulate(cfg)
    if not rep.sustainable:
        print(f"warning: lambda={cfg.lam} <= m/(n+m)={cfg.lambda_bound:.6f}; "
              "pooling is unsustainable, every honest agent delegates", file=sys.stderr)
    d = rep.to_dict(per_replication=args.per_rep)
    agg = d["aggregate"]
    pairs = [("n", cfg.n), ("m", cfg.m), ("block reward", cfg.R), ("lambda", cfg.lam),
             ("replications", cfg.replications), ("seed", cfg.seed),
             ("threshold", rep.threshold), ("sustainable", rep.sustainable)]
    for key in ("k", "security", "indifference_gap"):
        m = agg[key]["mean"]
        pairs.append((f"{key} mean", math.nan if m is None else m))
        pairs.append((f"{key} se", math.nan if agg[key]["se"] is None else agg[key]["se"]))
    pairs.append(("degenerate", agg["degenerate"]))
    _emit(args, "simulate", d, _kv(pairs))
    return EXIT_OK


def cmd_costly(args) -> int:
    sc = _scenario(args)
    cd = _require(sc, "cd", "--cd")
    dist = parse_distribution(sc["dist"])
    p = _params(sc)
    cdp = CostlyDelegationParams(p, cd)
    res = {"cd": cd, "lambda_bound": cdp.lambda_bound}
    pairs = [("cd", cd), ("lambda bound", cdp.lambda_bound)]
    if sc["lam"] is not None:
        out = solve_costly_delegation(cdp, dist)
        res["equilibrium"] = out.to_dict()
        pairs += [("lambda", p.lam), ("c*", out.cstar), ("regime", out.regime.value)]
        if out.c_prime is not None:
            pairs.append(("c'", out.c_prime))
    best = max_security_costly(cdp, dist)
    res["max_security"] = best.to_dict()
    pairs += [("best lambda", best.lam), ("best c*", best.cstar), ("best security", best.value),
              ("best regime", best.regime)]
    _emit(args, "costly", res, _kv(pairs))
    return EXIT_OK


def cmd_endogenous(args) -> int:
    sc = _scenario(args)
    theta = _require(sc, "theta", "--theta")
    dist = parse_distribution(sc["dist"])
    p = _params(sc)
    out = solve_endogenous(EndogenousParams(p, theta), dist)
    pairs = [("theta", theta), ("c_theta", out.c_theta), ("lambda_min", out.lambda_min),
             ("lambda", p.lam), ("c*", out.equilibrium.cstar), ("security", out.security),
             ("full security", out.full_security)]
    _emit(args, "endogenous", out.to_dict(), _kv(pairs))
    return EXIT_OK


def cmd_compete(args) -> int:
    sc = _scenario(args)
    dist = parse_distribution(sc["dist"])
    p = _params(sc)
    out = classify_return_competition(p, dist, lambda_floor=sc["floor"])
    pairs = [("floor", "none" if sc["floor"] is None else sc["floor"]),
             ("regime", out.regime.value)]
    if out.equilibrium is not None:
        pairs += [("c*", out.equilibrium.cstar), ("security", out.equilibrium.security)]
    _emit(args, "compete", out.to_dict(), _kv(pairs))
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _common(sp: argparse.ArgumentParser):
    g = sp.add_argument_group("scenario")
    g.add_argument("--config", help="key=value file; flags override it")
    g.add_argument("--H", type=float, help="honest stake (default 1)")
    g.add_argument("--M", type=float, help="malicious stake (default 0.5)")
    g.add_argument("--R", type=float, help="reward per unit (default 1)")
    g.add_argument("--lambda", dest="lam", type=float, help="owner's reward share")
    g.add_argument("--dist", help="uniform[:T=..] | power:alpha=..[,T=..] | table:<csv>")
    g.add_argument("--cd", type=float, help="delegation cost")
    g.add_argument("--theta", type=float, help="fault tolerance in [0, 1/2]")
    g.add_argument("--floor", type=float, help="protocol floor on lambda")
    g.add_argument("--n", type=int, help="honest agents (simulation)")
    g.add_argument("--m", type=int, help="malicious agents (simulation)")
    g.add_argument("--reps", type=int, help="replications (default 100)")
    g.add_argument("--seed", type=int, help="base seed (default 0)")
    g.add_argument("--json", action="store_true", help="versioned JSON output")
    g.add_argument("--out", help="write output to this path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stakepool", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="threshold equilibrium at a given lambda")
    _common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("design", help="optimal reward split for an objective")
    _common(sp)
    sp.add_argument("--objective", choices=("security", "welfare", "min-malicious"),
                    default="security")
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("sweep", help="CSV of equilibrium quantities over a lambda grid")
    _common(sp)
    sp.add_argument("--grid", help="lo:hi:points or comma list (default: 11 points on [M/(H+M), 1])")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("tables", help="regenerate the four uniform-cost tables")
    sp.add_argument("--reference-rounding", action="store_true",
                    help="round c* to 6 decimals before forming Table 4 shares")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_tables)

    sp = sub.add_parser("simulate", help="discrete Monte Carlo simulation")
    _common(sp)
    sp.add_argument("--convergence", help="comma list of n for a convergence study")
    sp.add_argument("--per-rep", action="store_true", help="include per-replication stats in JSON")
    sp.set_defaults(func=cmd_simulate)

    for name, func, helptext in (("costly", cmd_costly, "costly delegation"),
                                 ("endogenous", cmd_endogenous, "endogenous rewards"),
                                 ("compete", cmd_compete, "competition over returns")):
        sp = sub.add_parser(name, help=helptext)
        _common(sp)
        sp.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
