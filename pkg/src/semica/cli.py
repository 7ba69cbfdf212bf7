"""Command-line interface.

Exit codes: 0 success, 2 usage or malformed input, 3 I/O failure,
4 numerical degeneracy, 5 inconsistent path verdicts.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .absorb import minimal_reduction
from .benchmark import BenchmarkConfig, run_benchmark
from .errors import DegenerateCovariance, InconsistentVerdicts, SemicaError
from .fileio import (
    read_graph_json,
    read_prices_csv,
    read_samples_csv,
    write_benchmark_csv,
    write_graph_json,
    write_json,
    write_manifest,
    write_returns_csv,
    write_samples_csv,
)
from .ica import IcaConfig
from .pipeline import DiscoveryConfig, discover
from .simulate import random_sem, returns_from_prices, simulate_samples


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = int.from_bytes(os.urandom(4), "little")
    try:
        return args.handler(args)
    except DegenerateCovariance as exc:
        print(f"error: {exc}\nremedy: drop constant or collinear variables", file=sys.stderr)
        return 4
    except InconsistentVerdicts as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SemicaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semica",
        description="Causal orders and total causal effects for linear "
        "non-Gaussian SEMs with latent variables.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(required=True, metavar="command")

    sim = sub.add_parser("simulate", help="generate a random model and samples")
    sim.add_argument("--p", type=int, required=True, help="total number of variables")
    sim.add_argument("--n", type=int, required=True, help="number of samples")
    sim.add_argument("--edge-prob", type=float, default=0.3,
                     help="probability of each order-respecting edge (default 0.3)")
    sim.add_argument("--weight", type=float, default=0.9,
                     help="direct effect of every edge (default 0.9)")
    sim.add_argument("--latent-frac", type=float, default=0.5,
                     help="fraction of variables hidden (default 0.5)")
    sim.add_argument("--noise", choices=("uniform", "laplace", "gaussian"),
                     default="uniform", help="exogenous noise family (default uniform)")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out-dir", type=Path, required=True)
    sim.set_defaults(handler=_cmd_simulate)

    dis = sub.add_parser("discover", help="run the discovery pipeline on samples")
    dis.add_argument("--data", type=Path, required=True, help="samples CSV")
    dis.add_argument("--out-dir", type=Path, required=True)
    dis.add_argument("--holdout-frac", type=float, default=0.25,
                     help="held-out fraction for model selection (default 0.25)")
    dis.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="reconstruction penalty weight (default 1/p_o)")
    dis.add_argument("--k-min", type=int, default=None,
                     help="smallest column count tried (default p_o)")
    dis.add_argument("--k-max", type=int, default=None,
                     help="largest column count tried (default 2*p_o)")
    dis.add_argument("--bootstrap", type=int, default=10,
                     help="bootstrap replicates (default 10)")
    dis.add_argument("--alpha", type=float, default=0.05,
                     help="significance level of the zero tests (default 0.05)")
    dis.add_argument("--restarts", type=int, default=5,
                     help="optimizer restarts per fit (default 5)")
    dis.add_argument("--max-iters", type=int, default=5000,
                     help="optimizer iteration cap per restart (default 5000)")
    dis.add_argument("--grad-tol", type=float, default=1e-6,
                     help="gradient max-norm convergence tolerance (default 1e-6)")
    dis.add_argument("--contrast-sign", type=float, default=-1.0,
                     help="contrast direction: -1 for light-tailed (uniform-like) "
                     "noise, +1 for heavy-tailed (default -1)")
    dis.add_argument("--match", choices=("optimal", "greedy"), default="optimal",
                     help="bootstrap column matching strategy (default optimal)")
    dis.add_argument("--enumerate", action="store_true",
                     help="always enumerate the full candidate effect family")
    dis.add_argument("--break-cycles", action="store_true",
                     help="drop weakest verdicts until the path graph is acyclic")
    dis.add_argument("--threads", type=int, default=1,
                     help="worker threads for bootstrap fits (default 1)")
    dis.add_argument("--seed", type=int, default=None)
    dis.set_defaults(handler=_cmd_discover)

    ana = sub.add_parser("analyze", help="minimality and absorbability of a graph")
    ana.add_argument("--graph", type=Path, required=True, help="graph JSON")
    ana.add_argument("--out", type=Path, default=None, help="report path (default stdout)")
    ana.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    ana.set_defaults(handler=_cmd_analyze)

    ben = sub.add_parser("benchmark", help="normalized-error benchmark on random models")
    ben.add_argument("--p", type=_int_list, default=(6,),
                     help="comma-separated variable counts (default 6)")
    ben.add_argument("--samples", type=_int_list, default=(1000,),
                     help="comma-separated sample sizes (default 1000)")
    ben.add_argument("--graphs", type=int, default=50,
                     help="random models per (p, n) cell (default 50)")
    ben.add_argument("--edge-prob", type=float, default=0.3)
    ben.add_argument("--weight", type=float, default=0.9)
    ben.add_argument("--latent-frac", type=float, default=0.5)
    ben.add_argument("--bootstrap", type=int, default=10)
    ben.add_argument("--restarts", type=int, default=5)
    ben.add_argument("--alpha", type=float, default=0.05)
    ben.add_argument("--lambda", dest="lam", type=float, default=None)
    ben.add_argument("--threads", type=int, default=1)
    ben.add_argument("--seed", type=int, default=None)
    ben.add_argument("--out", type=Path, required=True, help="result CSV path")
    ben.set_defaults(handler=_cmd_benchmark)

    ret = sub.add_parser("returns", help="per-period returns from a price CSV")
    ret.add_argument("--prices", type=Path, required=True,
                     help="CSV: date column then one price series per column")
    ret.add_argument("--out", type=Path, required=True)
    ret.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    ret.set_defaults(handler=_cmd_returns)

    return parser


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _config_dict(args: argparse.Namespace) -> dict:
    return {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k not in ("handler",)
    }


def _cmd_simulate(args) -> int:
    sem = random_sem(
        args.p, args.edge_prob, args.weight, args.latent_frac,
        seed=args.seed, noise_family=args.noise,
    )
    samples = simulate_samples(sem, args.n, seed=args.seed)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_graph_json(sem, args.out_dir / "graph.json")
    write_samples_csv(samples, args.out_dir / "samples.csv")
    write_manifest(
        args.out_dir / "manifest.json", "simulate", _config_dict(args),
        args.seed, {}, __version__,
    )
    print(f"wrote graph.json and samples.csv to {args.out_dir}")
    return 0


def _discovery_config(args) -> DiscoveryConfig:
    ica = IcaConfig(
        lam=args.lam,
        k_min=args.k_min,
        k_max=args.k_max,
        holdout_frac=args.holdout_frac,
        restarts=args.restarts,
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        seed=args.seed,
        contrast_sign=args.contrast_sign,
    )
    return DiscoveryConfig(
        ica=ica,
        bootstrap_reps=args.bootstrap,
        alpha=args.alpha,
        greedy_match=args.match == "greedy",
        enumerate_all=getattr(args, "enumerate"),
        break_cycles=args.break_cycles,
        threads=args.threads,
    )


def _cmd_discover(args) -> int:
    data = read_samples_csv(args.data)
    result = discover(data, _discovery_config(args))
    args.out_dir.mkdir(parents=True, exist_ok=True)

    write_json(
        {
            "shape": list(result.mixing.shape),
            "entries": [[float(v) for v in row] for row in result.mixing.entries],
            "scale_convention": result.mixing.scale_convention,
            "k_selected": result.reference.k,
            "holdout_costs": {str(k): v for k, v in sorted(result.reference.holdout_costs.items())},
        },
        args.out_dir / "mixing.json",
    )
    write_json(result.support.to_json_dict(), args.out_dir / "support.json")
    write_json(result.verdicts.to_json_dict(result.names), args.out_dir / "verdicts.json")

    order_names = None
    if result.order is not None:
        order_names = [result.names[v] for v in result.order.order.sorted_vertices()]
    effects_doc = {
        "order": order_names,
        "verdicts": result.verdicts.to_json_dict(result.names)["verdicts"],
        "candidates": result.candidates.to_json_dict()["candidates"] if result.candidates else [],
        "unique": [[float(v) for v in row] for row in result.effects]
        if result.effects is not None else None,
        "multiplicity": result.candidates.multiplicity if result.candidates
        else (1 if result.effects is not None else None),
        "dropped_verdicts": [[i + 1, j + 1] for i, j in result.order.dropped_edges]
        if result.order else [],
        "error": result.effects_error,
    }
    write_json(effects_doc, args.out_dir / "effects.json")
    write_manifest(
        args.out_dir / "manifest.json", "discover", _config_dict(args),
        args.seed, {"data": args.data}, __version__,
    )
    print(f"wrote mixing.json, support.json, verdicts.json, effects.json to {args.out_dir}")
    return 0


def _cmd_analyze(args) -> int:
    sem = read_graph_json(args.graph)
    report = minimal_reduction(sem).report.to_json_dict()
    if args.out is None:
        import json

        print(json.dumps(report, indent=2))
    else:
        write_json(report, args.out)
        write_manifest(
            args.out.with_suffix(".manifest.json"), "analyze", _config_dict(args),
            args.seed, {"graph": args.graph}, __version__,
        )
    return 0


def _cmd_benchmark(args) -> int:
    ica = IcaConfig(lam=args.lam, restarts=args.restarts, seed=args.seed)
    config = BenchmarkConfig(
        p_values=tuple(args.p),
        edge_prob=args.edge_prob,
        weight=args.weight,
        latent_fraction=args.latent_frac,
        sample_sizes=tuple(args.samples),
        num_graphs=args.graphs,
        seed=args.seed,
        discovery=DiscoveryConfig(ica=ica, bootstrap_reps=args.bootstrap, alpha=args.alpha),
        threads=args.threads,
    )
    result = run_benchmark(config)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_benchmark_csv(result, args.out)
    write_manifest(
        args.out.with_suffix(".manifest.json"), "benchmark", _config_dict(args),
        args.seed, {}, __version__,
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_returns(args) -> int:
    dates, prices = read_prices_csv(args.prices)
    rets = returns_from_prices(prices)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_returns_csv(dates[1:], rets, args.out)
    write_manifest(
        args.out.with_suffix(".manifest.json"), "returns", _config_dict(args),
        args.seed, {"prices": args.prices}, __version__,
    )
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
