"""Batch command line: solve, oracle, verify, equilibrium, counterexample.

Exit codes: 0 on success, 1 on operational errors (bad flags, missing or
malformed files), 2 on certification failure (the run finished but the
result does not meet its tolerance).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import jsonio
from .dual_solver import PricePair, SolverOptions
from .errors import OTMarketError, RecoveryFailed, UsageError
from .model import Coupling
from .generate import (
    generate_random_scenario,
    indifference_grid_economy,
    random_goods_economy,
)
from .scenario import scenario_to_model
from .workflows import (
    counterexample_rows,
    economy_from_model,
    run_equilibrium,
    run_oracle,
    run_solve,
    run_verify,
    triplets_to_coupling,
)

MAX_SEED = 2 ** 64 - 1


@dataclass
class RunConfig:
    subcommand: str
    scenario_path: Optional[Path] = None
    seed: Optional[int] = None
    n_types: int = 10
    n_goods: int = 2
    goods: Optional[tuple[str, ...]] = None
    supply: Optional[dict[str, float]] = None
    coupling_path: Optional[Path] = None
    prices_path: Optional[Path] = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    trace_path: Optional[Path] = None
    gap_tol: float = 1e-3
    feas_tol: float = 1e-8
    eq_tol: float = 1e-3
    max_level: int = 12
    out_path: Optional[Path] = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="otmarket", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_source(p, generated: bool):
        p.add_argument("--scenario", type=Path, help="scenario JSON file")
        if generated:
            p.add_argument("--seed", type=int, help="generate a random scenario")
            p.add_argument("--types", type=int, default=10)
            p.add_argument("--goods", type=int, default=2)

    def add_solver(p):
        p.add_argument("--max-iters", type=int, default=5000)
        p.add_argument("--stop-tol", type=float, default=1e-6)
        p.add_argument("--step0", type=float, default=None)
        p.add_argument("--trace", type=Path, default=None,
                       help="write per-iteration CSV to this path")

    def add_tols(p):
        p.add_argument("--gap-tol", type=float, default=1e-3)
        p.add_argument("--feas-tol", type=float, default=1e-8)

    def add_out(p):
        p.add_argument("--out", type=Path, default=None,
                       help="report path (default: stdout)")

    p_solve = sub.add_parser("solve", help="descend the potential and certify")
    add_source(p_solve, generated=True)
    add_solver(p_solve)
    add_tols(p_solve)
    add_out(p_solve)

    p_oracle = sub.add_parser("oracle", help="solve the primal directly")
    add_source(p_oracle, generated=True)
    add_out(p_oracle)

    p_verify = sub.add_parser("verify", help="certify a given coupling/prices pair")
    p_verify.add_argument("--scenario", type=Path, required=True)
    p_verify.add_argument("--coupling", type=Path, required=True)
    p_verify.add_argument("--prices", type=Path, required=True)
    add_tols(p_verify)
    add_out(p_verify)

    p_eq = sub.add_parser("equilibrium", help="market prices by tatonnement")
    p_eq.add_argument("--scenario", type=Path, help="goods-shaped scenario file")
    p_eq.add_argument("--goods", type=str, help="comma-separated good labels")
    p_eq.add_argument("--types", type=int, default=16)
    p_eq.add_argument("--supply", type=str, default=None,
                      help="per-good supply, e.g. g1=0.5,g2=0.25")
    p_eq.add_argument("--seed", type=int, default=None,
                      help="draw random valuations instead of the grid economy")
    add_solver(p_eq)
    add_tols(p_eq)
    p_eq.add_argument("--eq-tol", type=float, default=1e-3)
    add_out(p_eq)

    p_cx = sub.add_parser("counterexample", help="exact dyadic distance table")
    p_cx.add_argument("--max-level", type=int, default=12)
    add_out(p_cx)

    return parser


def _check_seed(seed: Optional[int]) -> None:
    if seed is not None and not 0 <= seed <= MAX_SEED:
        raise UsageError(f"--seed must be a 64-bit unsigned integer, got {seed}")


def _parse_supply(text: Optional[str]) -> Optional[dict[str, float]]:
    if text is None:
        return None
    supply = {}
    for piece in text.split(","):
        if "=" not in piece:
            raise UsageError(f"--supply entries must look like g=v, got {piece!r}")
        name, value = piece.split("=", 1)
        try:
            supply[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--supply value {value!r} is not a number") from None
    return supply


def parse_config(argv) -> RunConfig:
    """Parse the command line; UsageError names the offending flag."""
    args = _build_parser().parse_args(argv)
    cmd = args.subcommand
    config = RunConfig(subcommand=cmd)

    if cmd in ("solve", "oracle"):
        _check_seed(args.seed)
        if (args.scenario is None) == (args.seed is None):
            raise UsageError(
                "provide exactly one input source: --scenario or --seed"
            )
        config.scenario_path = args.scenario
        config.seed = args.seed
        config.n_types = args.types
        config.n_goods = args.goods
    elif cmd == "verify":
        config.scenario_path = args.scenario
        config.coupling_path = args.coupling
        config.prices_path = args.prices
    elif cmd == "equilibrium":
        _check_seed(args.seed)
        if (args.scenario is None) == (args.goods is None):
            raise UsageError(
                "provide exactly one input source: --scenario or --goods"
            )
        config.scenario_path = args.scenario
        config.seed = args.seed
        config.n_types = args.types
        if args.goods is not None:
            config.goods = tuple(
                g.strip() for g in args.goods.split(",") if g.strip()
            )
            if not config.goods:
                raise UsageError("--goods must name at least one good")
        config.supply = _parse_supply(args.supply)
        config.eq_tol = args.eq_tol
    elif cmd == "counterexample":
        if args.max_level < 2:
            raise UsageError("--max-level must be at least 2")
        config.max_level = args.max_level

    if cmd in ("solve", "equilibrium"):
        if args.max_iters < 1:
            raise UsageError("--max-iters must be >= 1")
        if args.stop_tol <= 0:
            raise UsageError("--stop-tol must be positive")
        config.solver = SolverOptions(
            max_iters=args.max_iters,
            stop_tol=args.stop_tol,
            step0=args.step0,
            keep_trace=args.trace is not None,
        )
        config.trace_path = args.trace
    if cmd in ("solve", "verify", "equilibrium"):
        config.gap_tol = args.gap_tol
        config.feas_tol = args.feas_tol
    config.out_path = args.out
    return config


def _load_model(config: RunConfig):
    if config.scenario_path is not None:
        return scenario_to_model(jsonio.load(config.scenario_path))
    doc = generate_random_scenario(config.seed, config.n_types, config.n_goods)
    return scenario_to_model(doc)


def _load_coupling(path: Path, model):
    doc = jsonio.load(path)
    if isinstance(doc, dict) and "coupling" in doc:
        doc = doc["coupling"]
    if isinstance(doc, dict) and "triplets" in doc:
        return triplets_to_coupling(
            doc["triplets"], model.n_types, model.n_alternatives
        )
    if isinstance(doc, dict) and "mass" in doc:
        return Coupling(mass=np.asarray(doc["mass"], dtype=float))
    raise UsageError(f"{path} holds neither 'triplets' nor 'mass'")


def _load_prices(path: Path) -> PricePair:
    doc = jsonio.load(path)
    if isinstance(doc, dict) and "duals" in doc:
        doc = doc["duals"]
    if isinstance(doc, dict) and "prices" in doc:
        doc = doc["prices"]
    if not isinstance(doc, dict) or "q" not in doc:
        raise UsageError(f"{path} does not hold a p/q price document")
    return PricePair(p=doc.get("p", []), q=doc["q"])


def _emit(doc: dict, config: RunConfig) -> None:
    trace = doc.pop("trace", None)
    if trace is not None and config.trace_path is not None:
        lines = ["iter,F,grad_norm"]
        for it, value, norm in trace:
            lines.append(
                f"{it},{jsonio.format_float(value)},{jsonio.format_float(norm)}"
            )
        config.trace_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    text = jsonio.dumps(doc)
    if config.out_path is not None:
        config.out_path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(config: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit code."""
    if config.subcommand == "solve":
        model = _load_model(config)
        doc = run_solve(
            model,
            options=config.solver,
            gap_tol=config.gap_tol,
            feas_tol=config.feas_tol,
        )
        _emit(doc, config)
        return 0 if doc["certified"] else 2

    if config.subcommand == "oracle":
        model = _load_model(config)
        doc = run_oracle(model)
        _emit(doc, config)
        return 0

    if config.subcommand == "verify":
        model = _load_model(config)
        coupling = _load_coupling(config.coupling_path, model)
        prices = _load_prices(config.prices_path)
        doc = run_verify(
            model,
            coupling,
            prices,
            gap_tol=config.gap_tol,
            feas_tol=config.feas_tol,
        )
        _emit(doc, config)
        return 0 if doc["certified"] else 2

    if config.subcommand == "equilibrium":
        if config.scenario_path is not None:
            economy = economy_from_model(_load_model(config))
        elif config.seed is not None:
            if config.supply:
                raise UsageError("seeded economies draw their own supply")
            economy = random_goods_economy(
                config.seed, config.n_types, len(config.goods)
            )
        else:
            supply = [
                (config.supply or {}).get(g, 0.5) for g in config.goods
            ]
            if config.supply:
                unknown = set(config.supply) - set(config.goods)
                if unknown:
                    raise UsageError(
                        f"--supply names unknown goods: {sorted(unknown)}"
                    )
            economy = indifference_grid_economy(
                config.goods, config.n_types, supply
            )
        doc = run_equilibrium(
            economy,
            options=config.solver,
            gap_tol=config.gap_tol,
            feas_tol=config.feas_tol,
            eq_tol=config.eq_tol,
        )
        _emit(doc, config)
        return 0 if doc["certified"] else 2

    if config.subcommand == "counterexample":
        rows = counterexample_rows(config.max_level)
        lines = ["n,m,distance"]
        lines.extend(f"{r['n']},{r['m']},{r['distance']}" for r in rows)
        text = "\n".join(lines) + "\n"
        if config.out_path is not None:
            config.out_path.write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0

    raise UsageError(f"unknown subcommand {config.subcommand!r}")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return run(config)
    except RecoveryFailed as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OTMarketError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
