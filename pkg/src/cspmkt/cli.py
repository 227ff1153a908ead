"""Command-line front end.

Usage::

    cspmkt monopoly --config params.json [--out FILE] [--format json|csv]
    cspmkt sweep --config duo.json --x alpha_plus:0.9:2.7:50 --y alpha_minus:-1.5:1.5:50

Exit codes: 0 success, 2 configuration or flag error, 3 solver failure,
4 gating condition failure (the condition report goes to stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Any

from cspmkt import output
from cspmkt.constrained import ConstraintSpec, GridSpec, constrained_nash
from cspmkt.core import (
    ConditionError,
    CSPError,
    DuopolyParams,
    InvalidParameterError,
    MonopolyParams,
    validate_duopoly,
    validate_monopoly,
)
from cspmkt.duopoly import nash_equilibrium
from cspmkt.monopoly import monopoly_equilibrium
from cspmkt.multihome import onesided_equilibrium, validate_appendix
from cspmkt.sweep import MODELS, AxisSpec, SweepOptions, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CONDITION = 0, 2, 3, 4

TOP_KEYS = ("model", "params", "constraint", "sweep", "output", "seed")
REQUIRED_TOP = ("model", "params")
MONO_PARAMS = ("u0_b", "u0_c", "b_b", "b_c", "t_b", "t_c", "f_b", "f_c")
DUO_PARAMS = ("alpha_n", "alpha_w", "beta_n", "beta_w", "t_b", "t_c", "f_wb", "f_nb", "f_wc", "f_nc")
DUO_OPTIONAL = ("u0_b", "u0_c")


class ConfigError(InvalidParameterError):
    code = "config_error"


@dataclass(frozen=True)
class RunConfig:
    model: str
    params: MonopolyParams | DuopolyParams
    constraint: ConstraintSpec | None = None
    x: AxisSpec | None = None
    y: AxisSpec | None = None
    verify: bool = False
    out: str | None = None
    format: str | None = None
    seed: int = 0


def _check_keys(obj: Any, allowed, required, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object", where="cli.parse_config")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}", where="cli.parse_config")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {', '.join(missing)}", where="cli.parse_config")
    return obj


def _number(v: Any, name: str) -> float:
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number, got {v!r}", where="cli.parse_config")
    return float(v)


def _grid(obj: Any, name: str) -> GridSpec:
    g = _check_keys(obj, ("min", "max", "step"), ("min", "max", "step"), name)
    return GridSpec(_number(g["min"], f"{name}.min"), _number(g["max"], f"{name}.max"), _number(g["step"], f"{name}.step"))


def _axis(obj: Any, name: str) -> AxisSpec:
    if isinstance(obj, str):
        return AxisSpec.parse(obj)
    a = _check_keys(obj, ("key", "min", "max", "count"), ("key", "min", "max", "count"), name)
    if not isinstance(a["count"], int) or isinstance(a["count"], bool):
        raise ConfigError(f"{name}.count must be an integer", where="cli.parse_config")
    return AxisSpec(str(a["key"]), _number(a["min"], f"{name}.min"), _number(a["max"], f"{name}.max"), a["count"])


def parse_config(text: str) -> RunConfig:
    """Validate a JSON run configuration.

    Model parameters are never defaulted; only grids and sweep settings are.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", where="cli.parse_config") from None
    doc = _check_keys(doc, TOP_KEYS, REQUIRED_TOP, "config")
    model = doc["model"]
    if model not in MODELS:
        raise ConfigError(f"model must be one of {', '.join(MODELS)}, got {model!r}", where="cli.parse_config")

    if model == "monopoly":
        raw = _check_keys(doc["params"], MONO_PARAMS, MONO_PARAMS, "params")
        params = MonopolyParams(**{k: _number(raw[k], k) for k in MONO_PARAMS})
    else:
        raw = _check_keys(doc["params"], DUO_PARAMS + DUO_OPTIONAL, DUO_PARAMS, "params")
        params = DuopolyParams(**{k: _number(v, k) for k, v in raw.items()})

    constraint = None
    if "constraint" in doc:
        c = _check_keys(doc["constraint"], ("eta", "price_grid", "diff_grid"), ("eta",), "constraint")
        kw = {"eta": _number(c["eta"], "constraint.eta")}
        if "price_grid" in c:
            kw["price_grid"] = _grid(c["price_grid"], "constraint.price_grid")
        if "diff_grid" in c:
            kw["diff_grid"] = _grid(c["diff_grid"], "constraint.diff_grid")
        constraint = ConstraintSpec(**kw)

    x = y = None
    verify = False
    if "sweep" in doc:
        s = _check_keys(doc["sweep"], ("x", "y", "verify"), (), "sweep")
        x = _axis(s["x"], "sweep.x") if "x" in s else None
        y = _axis(s["y"], "sweep.y") if "y" in s else None
        verify = bool(s.get("verify", False))

    out = fmt = None
    if "output" in doc:
        o = _check_keys(doc["output"], ("path", "format"), (), "output")
        out = o.get("path")
        fmt = o.get("format")
        if fmt not in (None, "json", "csv"):
            raise ConfigError(f"output.format must be json or csv, got {fmt!r}", where="cli.parse_config")

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer", where="cli.parse_config")
    return RunConfig(model, params, constraint, x, y, verify, out, fmt, seed)


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cspmkt", description="Platform pricing equilibria for commuting-service markets.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("monopoly", "duopoly", "constrained", "multihome", "sweep", "check"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--seed", type=int)
        if name in ("constrained", "sweep"):
            p.add_argument("--eta", type=float, help="cap on |q_wc - q_wb|")
        if name == "sweep":
            p.add_argument("--x", help="key:min:max:count")
            p.add_argument("--y", help="key:min:max:count")
    return ap


def _report(cfg: RunConfig):
    if cfg.model == "monopoly":
        return validate_monopoly(cfg.params)
    rep = validate_duopoly(cfg.params)
    if cfg.model == "multihome":
        rep = rep.merged(validate_appendix(cfg.params))
    return rep


def _run(args, cfg: RunConfig) -> tuple[str, str]:
    """Return (text, format) for the chosen command."""
    fmt = args.format or cfg.format
    cmd = args.command
    if cmd in ("monopoly", "duopoly", "constrained", "multihome") and cmd != cfg.model:
        raise ConfigError(f"command {cmd!r} does not match config model {cfg.model!r}", where="cli.main")
    seed = args.seed if args.seed is not None else cfg.seed

    if cmd == "check":
        rep = _report(cfg)
        fmt = fmt or "json"
        return (output.dumps(output.report_to_dict(rep)) if fmt == "json" else output.report_to_csv(rep)), fmt

    eta = getattr(args, "eta", None)
    constraint = cfg.constraint
    if eta is not None:
        constraint = ConstraintSpec(eta) if constraint is None else ConstraintSpec(eta, constraint.price_grid, constraint.diff_grid)

    if cmd == "sweep":
        x = AxisSpec.parse(args.x) if args.x else cfg.x
        y = AxisSpec.parse(args.y) if args.y else cfg.y
        if x is None:
            raise ConfigError("sweep needs an x axis (--x or sweep.x)", where="cli.main")
        if cfg.model == "constrained" and constraint is None and not (x.key == "eta" or (y and y.key == "eta")):
            raise ConfigError("constrained sweep needs eta (--eta or constraint.eta)", where="cli.main")
        opts = SweepOptions(eta=constraint.eta if constraint else None, constraint=constraint,
                            verify=cfg.verify, seed=seed)
        grid = run_sweep(cfg.model, cfg.params, x, y, opts)
        fmt = fmt or "csv"
        return (output.grid_to_csv(grid) if fmt == "csv" else output.dumps(output.grid_to_dict(grid))), fmt

    feasible = None
    if cmd == "monopoly":
        outcome = monopoly_equilibrium(cfg.params)
    elif cmd == "duopoly":
        outcome = nash_equilibrium(cfg.params, seed=seed)
    elif cmd == "multihome":
        outcome = onesided_equilibrium(cfg.params).to_outcome(cfg.params)
    else:
        if constraint is None:
            raise ConfigError("constrained run needs eta (--eta or constraint.eta)", where="cli.main")
        outcome = constrained_nash(cfg.params, constraint)
        feasible = abs(outcome.participation.q_wc - outcome.participation.q_wb) <= constraint.eta
    fmt = fmt or "json"
    if fmt == "json":
        return output.dumps(output.outcome_to_dict(outcome)), fmt
    return output.outcome_to_csv(outcome, feasible), fmt


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _ArgError as exc:
        print(f"cspmkt: error: [cli.main] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        text, _ = _run(args, cfg)
        dest = args.out or cfg.out
        if dest:
            output.atomic_write(dest, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except OSError as exc:
        print(f"cspmkt: error: [cli.main] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConditionError as exc:
        print(f"cspmkt: condition failure: {exc}", file=sys.stderr)
        print(output.dumps(output.report_to_dict(exc.report)), file=sys.stderr, end="")
        return EXIT_CONDITION
    except InvalidParameterError as exc:
        print(f"cspmkt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CSPError as exc:
        print(f"cspmkt: solver failure ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
