"""Command line entry point.

Subcommands: norm-rate, tv-rate, optimality, spectrum, tail, cross-validate.
Common flags: --config PATH (key = value file), --seed N, --out PATH,
--samples N, --threads N; flags override file values.  The default output
directory comes from the CHAOSLAB_OUT environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import load_config
from .experiments import EXIT_NUMERICAL, RUNNERS, write_csv
from .kernels import DomainError, ToleranceError

_GNUPLOT_TEMPLATES = {
    "norm-rate": "set logscale xy\nplot '{csv}' using 1:2 with linespoints title 'distance'\n",
    "tv-rate": "set logscale xy\nplot '{csv}' using 1:2 with yerrorbars title 'tv', "
               "'{csv}' using 1:5 with lines title 'distance'\n",
    "optimality": "set logscale xy\nplot '{csv}' using 1:2 with yerrorbars title 'tv'\n",
    "spectrum": "set logscale y\nplot '{csv}' using 1:3 with points title '|eigenvalue|'\n",
    "tail": "set logscale xy\nplot '{csv}' using 1:3 with linespoints title 'P(V<=u)', "
            "'{csv}' using 1:4 with lines title 'five-mode bound'\n",
    "cross-validate": "set logscale x\nplot '{csv}' using 1:2 with yerrorbars title 'tv to limit'\n",
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaoslab",
                                description="second-chaos total variation laboratory")
    sub = p.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", metavar="PATH", help="key = value config file")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--out", metavar="PATH", help="output CSV path or directory")
        sp.add_argument("--samples", type=int, help="draws per Monte Carlo point")
        sp.add_argument("--threads", type=int,
                        help="worker threads (speed only, never results)")
        sp.add_argument("--h1", type=float, help="first Hurst index")
        sp.add_argument("--h2", type=float, help="second Hurst index")
        sp.add_argument("--n-grid", help="comma separated n values")
        sp.add_argument("--bins", type=int, help="histogram bins")
        sp.add_argument("--tv-method", choices=("histogram", "kde"))
        sp.add_argument("--gnuplot", action="store_true",
                        help="emit a companion gnuplot script next to the CSV")
        sp.add_argument("--dump-samples", metavar="PATH",
                        help="dump raw sample values, one per row")
        if name == "optimality":
            sp.add_argument("--c-grid", help="comma separated scale perturbations")
        if name == "tail":
            sp.add_argument("--u-grid", help="comma separated u values")
        if name == "cross-validate":
            sp.add_argument("--ks-n", type=int, help="block count for the KS leg")
    return p


def _overrides(args: argparse.Namespace) -> dict:
    out = {}
    mapping = {
        "seed": "seed",
        "samples": "sample_count",
        "threads": "threads",
        "h1": "h1",
        "h2": "h2",
        "bins": "bins",
        "tv_method": "tv_method",
        "ks_n": "ks_n",
    }
    for arg, key in mapping.items():
        v = getattr(args, arg, None)
        if v is not None:
            out[key] = v
    if getattr(args, "n_grid", None):
        out["n_grid"] = tuple(int(x) for x in args.n_grid.split(","))
    if getattr(args, "c_grid", None):
        out["c_grid"] = tuple(float(x) for x in args.c_grid.split(","))
    if getattr(args, "u_grid", None):
        out["u_grid"] = tuple(float(x) for x in args.u_grid.split(","))
    return out


def _out_path(args: argparse.Namespace, cfg, name: str) -> str:
    out = getattr(args, "out", None)
    if out and out.endswith(".csv"):
        return out
    base = out or cfg.output_dir
    return os.path.join(base, f"{name}.csv")


def _dump_samples(result, cfg, path: str):
    from .chaos import sample_malliavin_norm_sq, sample_second_chaos
    from .experiments import _limit_decomposition
    d_inf, tail_sd = _limit_decomposition(cfg)
    if result.name == "tail":
        pool = sample_malliavin_norm_sq(d_inf, cfg.sample_count, cfg.seed,
                                        threads=cfg.threads)
    else:
        pool = sample_second_chaos(d_inf, cfg.sample_count, cfg.seed,
                                   tail_sd=tail_sd, threads=cfg.threads)
    np.savetxt(path, pool.values, fmt="%.16e")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(getattr(args, "config", None), **_overrides(args))
        runner = RUNNERS[args.command]
        result = runner(cfg)
        csv_path = _out_path(args, cfg, result.name)
        write_csv(result, cfg, csv_path)
        if getattr(args, "gnuplot", False):
            gp = csv_path[:-4] + ".gp"
            with open(gp, "w", encoding="utf-8") as fh:
                fh.write(_GNUPLOT_TEMPLATES[result.name].format(csv=csv_path))
        if getattr(args, "dump_samples", None):
            _dump_samples(result, cfg, args.dump_samples)
        for k, v in sorted(result.info.items()):
            print(f"{result.name}: {k} = {v}")
        for k, v in sorted(result.checks.items()):
            print(f"{result.name}: check {k}: {'pass' if v else 'FAIL'}")
        print(f"{result.name}: wrote {csv_path}")
        return result.exit_code
    except (DomainError, ToleranceError, np.linalg.LinAlgError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
