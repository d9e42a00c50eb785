"""Command-line experiment runner.

Subcommands ``verify``, ``decay``, ``crossed``, ``doubled``, ``perturb`` and
``sweep``.  Exit codes: 0 success, 1 identity failure, 2 configuration error,
3 numerical failure.  Output file names carry the first ten hex digits of
the configuration hash; the JSON manifest records the full hash.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ExperimentConfig
from .exceptions import (
    AssemblyError,
    CapacityError,
    ConfigError,
    DomainError,
    IllConditionedError,
    KrylovError,
    WindowError,
)
from . import experiments
from .verify import identity_suite
from .writers import manifest_json, records_to_csv, series_svg, sweep_to_csv, write_text

EXIT_OK, EXIT_IDENTITY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERICAL_ERRORS = (AssemblyError, DomainError, IllConditionedError, KrylovError, WindowError,
                    ArithmeticError)

RUNNERS = {
    "decay": experiments.run_decay,
    "crossed": experiments.run_crossed,
    "doubled": experiments.run_doubled,
    "perturb": experiments.run_perturb,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fermi-asymptotics", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("verify", *RUNNERS, "sweep"):
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON configuration file")
        s.add_argument("--out", type=Path, help="output directory (overrides output.out_dir)")
        s.add_argument("--seed", type=int, help="override run.seed")
        s.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
        s.add_argument("--svg", action="store_true", help="also write one SVG plot per series")
    return p


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    run, out = {}, {}
    if args.seed is not None:
        run["seed"] = args.seed
    if args.out is not None:
        out["out_dir"] = str(args.out)
    if args.svg:
        out["svg"] = True
    return cfg.replace(run=run, output=out) if (run or out) else cfg


def _label(rec) -> str:
    lam = rec.metadata.get("lambda")
    beta = rec.metadata.get("beta")
    parts = [rec.quantity]
    if lam is not None:
        parts.append(f"lam{lam:g}")
    if beta is not None and rec.quantity == "perturbed_correlator":
        parts.append(f"beta{beta:g}")
    return "_".join(parts)


def write_outputs(command: str, cfg: ExperimentConfig, result) -> list:
    out = Path(cfg.output.out_dir)
    tag = cfg.hash[:10]
    files = []
    context = {"N": cfg.system.n_modes, "beta": cfg.system.beta, "seed": cfg.run.seed,
               "lambda": cfg.model.coupling}
    for rec in result.records:
        stem = f"{command}_{_label(rec)}_{tag}"
        if "csv" in cfg.output.formats:
            files.append(write_text(out / f"{stem}.csv", records_to_csv([rec], context)))
        if cfg.output.svg:
            files.append(write_text(out / f"{stem}.svg", series_svg(rec)))
    if "json" in cfg.output.formats:
        man = manifest_json(command, cfg, files, result.derived, result.windows)
        files.append(write_text(out / f"{command}_manifest_{tag}.json", man))
    return files


def cmd_verify(cfg: ExperimentConfig) -> int:
    lam = cfg.model.coupling
    kw = {k: getattr(cfg.model, k) for k in
          ("spacing_p", "spacing_q", "p0", "q0", "mass", "w_width", "v_width")}
    report = identity_suite(cfg.system.n_modes, cfg.run.n_random, cfg.run.seed, cfg.run.identity_tol,
                            lam=lam, model_kwargs=kw, doubled=cfg.system.doubled)
    for line in report.lines():
        print(line)
    out = Path(cfg.output.out_dir)
    if "json" in cfg.output.formats:
        body = {"config_hash": cfg.hash, **report.to_dict()}
        write_text(out / f"verify_report_{cfg.hash[:10]}.json", json.dumps(body, indent=2, sort_keys=True) + "\n")
    if not report.passed:
        print("FAILED: " + ", ".join(r.name for r in report.failures()), file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


def cmd_run(command: str, cfg: ExperimentConfig) -> int:
    result = RUNNERS[command](cfg)
    files = write_outputs(command, cfg, result)
    for key in sorted(result.derived):
        print(f"{key} = {result.derived[key]:.6g}")
    print(f"wrote {len(files)} files to {cfg.output.out_dir}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, threads: int) -> int:
    rows = experiments.run_sweep(cfg, threads)
    out = Path(cfg.output.out_dir)
    name = write_text(out / f"sweep_{cfg.hash[:10]}.csv", sweep_to_csv(rows))
    for row in rows:
        print(f"N={row['N']} lambda={row['lambda']:g} status={row['status']}")
    print(f"wrote {name}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.threads)
        return cmd_run(args.command, cfg)
    except (ConfigError, CapacityError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
