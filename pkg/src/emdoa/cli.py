"""Command line front end: simulate, solve, montecarlo, reproduce-fig.

Every subcommand accepts ``--config FILE`` (JSON) plus flags named after the
:class:`ExperimentConfig` fields; flags win over the file.

Exit codes: 0 success, 1 configuration error, 2 every realization aborted
numerically.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .runner import (FIGURES, ConfigError, ExperimentConfig, monte_carlo,
                     reproduce_figure, run_solver, save_monte_carlo, simulate)
from .signals import load_snapshots, save_snapshots

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2

# flag name -> argparse options; dest is the config field name
_FIELDS = {
    "model": dict(choices=["deterministic", "stochastic", "det", "sto"]),
    "algorithms": dict(nargs="+", choices=["em", "mem", "sage"]),
    "solver_models": dict(nargs="+"),
    "n_sensors": dict(type=int),
    "elevation_deg": dict(type=float),
    "doa_deg": dict(type=float, nargs="+"),
    "powers_db": dict(type=float, nargs="+"),
    "sigma_db": dict(type=float),
    "T": dict(type=int),
    "init_doa_deg": dict(type=float, nargs="+"),
    "init_signal": dict(type=float),
    "init_powers": dict(type=float, nargs="+"),
    "init_sigma": dict(type=float),
    "init_sigmas": dict(type=float, nargs="+"),
    "alpha": dict(type=float, nargs="+"),
    "epsilon_deg": dict(type=float),
    "max_iterations": dict(type=int),
    "realizations": dict(type=int),
    "master_seed": dict(type=int),
    "wanted_tol_deg": dict(type=float),
    "workers": dict(type=int),
}
_SEARCH = {"rho": float, "eta": float, "gamma": float, "search_tol": float,
           "max_gradient_steps": int, "max_halvings": int}


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON config file")
    g = p.add_argument_group("experiment")
    for name, opts in _FIELDS.items():
        g.add_argument("--" + name.replace("_", "-"), dest=name, default=None, **opts)
    g.add_argument("--geometry", type=Path, default=None,
                   help="JSON file with wavelength and sensor positions")
    s = p.add_argument_group("angle search")
    for name, typ in _SEARCH.items():
        s.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)


def _overrides(args) -> dict:
    out = {k: getattr(args, k) for k in _FIELDS if getattr(args, k) is not None}
    if args.geometry is not None:
        out["geometry"] = _read_json(args.geometry)
    search = {("tol" if k == "search_tol" else k): getattr(args, k)
              for k in _SEARCH if getattr(args, k) is not None}
    if search:
        out["search"] = search
    return out


def _read_json(path: Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _merge(base: dict, over: dict) -> dict:
    doc = dict(base)
    if "search" in over:
        doc["search"] = {**doc.get("search", {}), **over.pop("search")}
    doc.update(over)
    return doc


def build_config(args) -> ExperimentConfig:
    base = _read_json(args.config) if args.config is not None else {}
    return ExperimentConfig.from_dict(_merge(base, _overrides(args)))


def _dump(doc, out: Path | None):
    text = json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def cmd_simulate(args) -> int:
    cfg = build_config(args)
    save_snapshots(simulate(cfg, args.realization), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = build_config(args)
    if args.samples is not None:
        try:
            Y = load_snapshots(args.samples)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read samples {args.samples}: {exc}") from None
        if Y.shape[0] != cfg.array().n_sensors or not np.all(np.isfinite(Y)):
            raise ConfigError(f"samples in {args.samples} must be finite with one row per sensor")
    else:
        Y = simulate(cfg, args.realization)
    results = {s: dataclasses.asdict(run_solver(cfg, Y, s)) for s in cfg.solvers}
    _dump({"config": cfg.to_dict(), "results": results}, args.out)
    return EXIT_ABORT if all(r["aborted"] for r in results.values()) else EXIT_OK


def _all_aborted(runs) -> bool:
    return all(res.aborted for run in runs for res in run.values())


def cmd_montecarlo(args) -> int:
    cfg = build_config(args)
    mc = monte_carlo(cfg)
    paths = save_monte_carlo(mc, args.outdir, args.stem)
    _dump({"summary": mc.summary, "files": {k: str(v) for k, v in paths.items()}}, None)
    return EXIT_ABORT if _all_aborted(mc.runs) else EXIT_OK


def cmd_reproduce(args) -> int:
    over = _merge(_read_json(args.config) if args.config is not None else {}, _overrides(args))
    out = reproduce_figure(args.name, args.outdir, **over)
    _dump({"summary": out["summary"], "files": {"csv": str(out["csv"]), "json": str(out["json"])}},
          None)
    return EXIT_ABORT if _all_aborted(out["result"].runs) else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emdoa", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw one realization of snapshots")
    _add_config_flags(p)
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="output .csv or .json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("solve", help="run the configured solvers on one realization")
    _add_config_flags(p)
    p.add_argument("--samples", type=Path, help="snapshot file; simulated when omitted")
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--out", type=Path, help="result JSON (stdout when omitted)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("montecarlo", help="many realizations, same samples for every solver")
    _add_config_flags(p)
    p.add_argument("--outdir", type=Path, default=Path("."))
    p.add_argument("--stem", default="montecarlo")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("reproduce-fig", help="regenerate the data behind a figure")
    p.add_argument("name", choices=sorted(FIGURES))
    _add_config_flags(p)
    p.add_argument("--outdir", type=Path, default=Path("."))
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"emdoa: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
