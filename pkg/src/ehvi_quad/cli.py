"""Command-line harness.

Subcommands
-----------
compare      EHVI of random densities by MC, GH_n and the analytic baseline; pairwise Kendall tau
sweep        tau of GH_n against the baseline for each n (odd/even split)
correlated   compare with correlated (Wishart) densities
gh-grid      dump the nodes and weights of one Gauss-Hermite grid as CSV
ehvi         evaluate one density against one front

Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .ehvi import ehvi_exact_2d, ehvi_gh, ehvi_mc, ehvi_reference
from .errors import ConfigError, EhviQuadError, NumericalError
from .experiment import (
    CORRELATED,
    ExperimentConfig,
    run_compare,
    run_grid_dump,
    run_sweep,
    timings_csv,
    write_result,
)
from .experiment import _atomic_write
from .fronts import RefPolicy, load_front
from .gaussians import GaussianDensity
from .numerics import RngStream

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

CSV_LAYOUT = """\
CSV output: one row per trial with columns
  trial, mean_1..mean_m, cov_11..cov_mm (row-major),
  then for each method in order MC, GH<n>..., baseline: <method>, <method>_evals.
Pairwise tau (or the sweep table) goes to <out stem>.summary.csv."""


def parse_nodes(text: str) -> tuple[int, ...]:
    """'3-15', '3,5,15' or a mix such as '3-5,9'."""
    nodes: list[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = part.split("-")
                nodes.extend(range(int(lo), int(hi) + 1))
            elif part:
                nodes.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad node list {text!r}") from None
    return tuple(nodes)


def _matrix(text: str) -> np.ndarray:
    try:
        return np.array(json.loads(text), dtype=np.float64)
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"expected a JSON array, got {text!r}") from exc


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--front", help="CSV file with one front point per line")
    p.add_argument("--shape", default="concave",
                   help="generated front shape: linear, concave, ellipsoid, convex, disconnected")
    p.add_argument("--m", type=int, default=2, help="number of objectives for a generated front")
    p.add_argument("--front-size", type=int, default=50, help="points sampled on a generated front")
    p.add_argument("--ref-policy", default="box", help="'box' (upper box corner) or 'nadir[:margin]'")
    p.add_argument("--kind", default="INDEPENDENT", type=str.upper, choices=["INDEPENDENT", "CORRELATED"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mc-samples", type=int, default=10_000)
    p.add_argument("--gh-nodes", type=parse_nodes, default=tuple(range(3, 16)),
                   help="GH points per dimension, e.g. 3-15 or 5,10,15")
    p.add_argument("--prune", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wishart-dof", type=int, default=None, help="correlated kind only; default m + 2")
    p.add_argument("--out", help="output file (stdout summary only if omitted)")
    p.add_argument("--format", default="json", type=str.lower, choices=["json", "csv"])
    p.add_argument("--timings", help="write per-method wall-clock nanoseconds to this CSV")
    p.add_argument("--config", help="JSON file whose keys set any flag (flags given explicitly win)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehvi-quad",
        description="Expected hypervolume improvement by Gauss-Hermite quadrature, Monte Carlo and closed form.",
        epilog=CSV_LAYOUT,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("compare", "rank agreement of MC, GH_n and the analytic baseline"),
        ("sweep", "tau against the baseline for each GH node count"),
        ("correlated", "compare with correlated densities (MC baseline)"),
    ):
        p = sub.add_parser(name, help=help_text, epilog=CSV_LAYOUT,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        _experiment_flags(p)

    p = sub.add_parser("gh-grid", help="dump Gauss-Hermite nodes and weights as CSV")
    p.add_argument("--mean", type=_matrix, default=_matrix("[0, 0]"))
    p.add_argument("--cov", type=_matrix, default=_matrix("[[1, 0.5], [0.5, 1]]"))
    p.add_argument("--gh-nodes", type=int, default=8)
    p.add_argument("--prune", type=float, default=0.2)
    p.add_argument("--out", help="CSV path (stdout if omitted)")

    p = sub.add_parser("ehvi", help="EHVI of one density against one front")
    p.add_argument("--front", required=True, help="CSV front file")
    p.add_argument("--reference", type=_matrix, help="reference point as a JSON array")
    p.add_argument("--ref-policy", default="box")
    p.add_argument("--density", help="JSON file {mean, cov}")
    p.add_argument("--mean", type=_matrix)
    p.add_argument("--cov", type=_matrix)
    p.add_argument("--methods", default="mc,gh,exact",
                   help="comma list of mc, gh, exact, reference (exact needs m == 2 and diagonal cov)")
    p.add_argument("--mc-samples", type=int, default=10_000)
    p.add_argument("--gh-nodes", type=int, default=15)
    p.add_argument("--prune", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        # re-parse with the file's values as defaults so explicit flags still win
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "gh_nodes" in overrides and not isinstance(overrides["gh_nodes"], str):
            overrides["gh_nodes"] = tuple(overrides["gh_nodes"])
        sub.set_defaults(**overrides)
        args = parser.parse_args(argv)
    return args


def _config_from_args(args) -> ExperimentConfig:
    kind = CORRELATED if args.command == "correlated" else args.kind
    return ExperimentConfig(
        shape=args.shape,
        m=args.m,
        front_size=args.front_size,
        front=args.front,
        ref_policy=args.ref_policy,
        kind=kind,
        trials=args.trials,
        mc_samples=args.mc_samples,
        gh_nodes=args.gh_nodes,
        prune=args.prune,
        seed=args.seed,
        wishart_dof=args.wishart_dof,
        out=args.out,
        format=args.format,
    )


def _print_summaries(summaries, stream) -> None:
    for s in summaries:
        print(f"tau({s['a']}, {s['b']}) = {s['tau']:.4f}  p = {s['p_value']:.3g}", file=stream)


def _cmd_experiment(args) -> int:
    config = _config_from_args(args)
    extra = None
    if args.command == "sweep":
        result, rows = run_sweep(config)
        table = [row.__dict__ for row in rows]
        extra = {"sweep": table}
        for row in rows:
            flag = "" if row.monotone_ok in (None, True) else "  (non-monotone)"
            print(f"{row.method:>12} {row.parity:>4} nodes={row.nodes:<6} tau={row.tau:.4f} "
                  f"p={row.p_value:.3g}{flag}")
    else:
        result = run_compare(config)
        _print_summaries(result.summaries, sys.stdout)
    if config.out:
        for path in write_result(result, config.out, config.format, extra):
            print(f"wrote {path}", file=sys.stderr)
    if args.timings:
        _atomic_write(args.timings, timings_csv(result))
    return EXIT_OK


def _cmd_gh_grid(args) -> int:
    text = run_grid_dump(args.mean, args.cov, args.gh_nodes, args.prune, args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_ehvi(args) -> int:
    ref = None if args.reference is None else args.reference
    front = load_front(args.front, reference=ref, policy=RefPolicy.parse(args.ref_policy))
    if args.density:
        try:
            with open(args.density) as fh:
                g = GaussianDensity.from_record(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot read density {args.density}: {exc}") from exc
    elif args.mean is not None and args.cov is not None:
        g = GaussianDensity(args.mean, args.cov)
    else:
        raise ConfigError("give --density FILE or both --mean and --cov")
    out = {"density": g.to_record()}
    for method in (m.strip().lower() for m in args.methods.split(",") if m.strip()):
        if method == "mc":
            est = ehvi_mc(g, front, args.mc_samples, RngStream(args.seed))
        elif method == "gh":
            est = ehvi_gh(g, front, args.gh_nodes, args.prune)
        elif method == "exact":
            est = ehvi_exact_2d(g, front)
        elif method == "reference":
            est = ehvi_reference(g, front)
        else:
            raise ConfigError(f"unknown method {method!r}")
        out[method] = {"value": est.value, "evaluations": est.evaluations, "mc_std_error": est.mc_std_error}
    print(json.dumps(out, indent=1))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parse(argv)
        if args.command == "gh-grid":
            return _cmd_gh_grid(args)
        if args.command == "ehvi":
            return _cmd_ehvi(args)
        return _cmd_experiment(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (EhviQuadError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
