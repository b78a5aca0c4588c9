"""Command-line front end: ``cvpm {square,commutativity,bench,sweep}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .algebra import contexts
from .analysis import inequality_report
from .bench import bench_report
from .circuits import (
    Backend,
    ExperimentConfig,
    experiment_square,
    run_commutativity_suite,
    run_pm_experiment,
    sample_counts,
)
from .config import ConfigError, LoadedConfig, load_config
from .fock import CutoffError, convergence_scan, expectation_exact
from .noise import dephase, effective_visibility
from . import report as rp

log = logging.getLogger("cvpm")

OUT_ENV = "CVPM_OUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SWEEP_PARAMS = ("visibility", "g2", "eps_q", "eps_p", "cutoff")
KAPPA_SANITY = 0.03


class _Run:
    """Collects output files for one command and writes the manifest last."""

    def __init__(self, out: Path, argv: Sequence[str], seed: int, loaded: LoadedConfig):
        self.out = out
        self.argv = list(argv)
        self.seed = seed
        self.loaded = loaded
        self.files: list[Path] = []
        out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.files.append(path)
        return path

    def write_json(self, name: str, obj: dict, schema: str) -> Path:
        rp.validate(obj, schema)
        return self.write(name, rp.dumps(obj))

    def finish(self):
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        stamp = datetime.fromtimestamp(int(epoch) if epoch else time.time(), tz=timezone.utc)
        manifest = {
            "schema": f"cvpm.manifest/{rp.SCHEMA_VERSION}",
            "tool_version": __version__,
            "command": self.argv,
            "seed": self.seed,
            "config": self.loaded.raw,
            "created": stamp.isoformat(timespec="seconds"),
            "outputs": {p.name: rp.sha256_file(p) for p in self.files},
        }
        rp.validate(manifest, "manifest")
        name = f"{self.argv[0]}.manifest.json"
        (self.out / name).write_text(rp.dumps(manifest), encoding="utf-8")


def _prepare(args) -> tuple[LoadedConfig, ExperimentConfig, _Run]:
    loaded = load_config(args.config)
    cfg = loaded.experiment
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = dataclasses.replace(cfg, rng_seed=args.seed)
    try:
        cfg.probe.gaussian()
    except ValueError as exc:
        raise ConfigError(f"probe: {exc}") from None
    out = Path(args.out or os.environ.get(OUT_ENV) or "cvpm-out")
    argv = [args.command] + [a for a in (args.raw_argv or [])]
    return loaded, cfg, _Run(out, argv, cfg.rng_seed, loaded)


def cmd_square(args) -> int:
    loaded, cfg, run = _prepare(args)
    result = run_pm_experiment(cfg)
    rep = result.report
    record = rp.square_record(rep, result.kappas, cfg.slots_per_context, result.visibility_fit,
                              result.notes)
    run.write_json("square.json", record, "square")
    run.write("square.csv", rp.square_csv(rep))
    run.finish()
    print(f"L = {rp.fmt_float(rep.L)} +- {rp.fmt_float(rep.sd)}  "
          f"(bound {rep.nc_bound:.6f}, significance {rp.fmt_float(rep.significance)} sd, "
          f"corrected bound {rep.corrected_bound:.6f})")
    return EXIT_OK


def cmd_commutativity(args) -> int:
    loaded, cfg, run = _prepare(args)
    kappas = run_commutativity_suite(cfg)
    notes = []
    if kappas.max_kappa >= KAPPA_SANITY:
        notes.append(f"max kappa {kappas.max_kappa:.4f} exceeds sanity bound {KAPPA_SANITY}")
    run.write_json("kappa.json", rp.kappa_record(kappas, notes), "kappa")
    run.write("kappa.csv", rp.kappa_csv(kappas))
    run.finish()
    print(f"mean kappa = {kappas.mean_kappa:.6f}, max kappa = {kappas.max_kappa:.6f}")
    for n in notes:
        print(f"note: {n}")
    return EXIT_OK


def cmd_bench(args) -> int:
    loaded, cfg, run = _prepare(args)
    if loaded.bench is None:
        raise ConfigError("config has no [bench] section (need wavelength, shear, farfield_distance)")
    rec = {"schema": f"cvpm.bench/{rp.SCHEMA_VERSION}", **bench_report(loaded.bench)}
    run.write_json("bench.json", rec, "bench")
    run.finish()
    print(f"tilt = {rec['tilt_rad'] * 1e6:.2f} urad, far-field shift = "
          f"{rec['farfield_shift_m'] * 1e6:.1f} um, q0*p0 = {rec['product']:.9f} "
          f"({'ok' if rec['product_valid'] else 'NOT pi/2'})")
    for n in rec["notes"]:
        print(f"advisory: {n}")
    return EXIT_OK


def parse_range(text: str, parameter: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = text.strip()
    if not text:
        raise ConfigError("empty sweep range")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range {text!r} is not start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"range {text!r} is empty")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = [start + i * step for i in range(n)]
    else:
        values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("empty sweep range")
    if parameter == "cutoff":
        values = [int(round(v)) for v in values]
    return values


def _sweep_point(cfg: ExperimentConfig, parameter: str, value: float) -> ExperimentConfig:
    noise = cfg.noise
    if parameter == "visibility":
        noise = noise.with_(visibility_hadamard=value, per_context_visibility=None)
    elif parameter == "g2":
        noise = noise.with_(g2=value)
    elif parameter == "eps_q":
        noise = noise.with_(calib_eps_q=value)
    elif parameter == "eps_p":
        noise = noise.with_(calib_eps_p=value)
    return dataclasses.replace(cfg, noise=noise)


def _cutoff_row(cfg: ExperimentConfig, cutoff: int, kappas) -> tuple:
    square = experiment_square(cfg)
    op_sets = [square.context_ops(ctx) for ctx in contexts()]
    scan = convergence_scan(op_sets, [cutoff], probe=cfg.probe)[0]
    state = cfg.probe.fock(cutoff)
    per_context = []
    for i, (ctx, ops) in enumerate(zip(contexts(), op_sets)):
        e = expectation_exact(state, ops).real
        v = effective_visibility(cfg.noise, cfg.noise.context_visibility(i))
        p = dephase(min(max(0.5 * (1 + e), 0.0), 1.0), v)
        rec = sample_counts(p, cfg, cfg.rng(i), cfg.context_rate(i))
        per_context.append({"label": ctx.label, "expectation": rec.expectation, "sd": rec.sd})
    rep = inequality_report(per_context, kappas, cfg.slots_per_context)
    return rep, scan["max_deviation"]


def cmd_sweep(args) -> int:
    loaded, cfg, run = _prepare(args)
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {args.param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    values = parse_range(args.range, args.param)
    rows = []
    for value in values:
        if args.param == "cutoff":
            if value < 2:
                raise ConfigError("cutoff values must be at least 2")
            gcfg = dataclasses.replace(cfg, backend=Backend("gaussian"))
            kappas = run_commutativity_suite(gcfg)
            rep, dev = _cutoff_row(cfg, value, kappas)
        else:
            point = _sweep_point(cfg, args.param, value)
            rep = run_pm_experiment(point).report
            dev = None
        rows.append((value, rep.L, rep.sd, rep.significance, rep.corrected_bound, dev))
    header = (args.param, "L", "sd", "significance", "corrected_bound", "max_deviation")
    run.write("sweep.csv", rp.csv_text(header, [
        (float(r[0]) if args.param != "cutoff" else r[0],) + r[1:] for r in rows
    ]))
    run.finish()
    print(f"wrote {len(rows)} sweep points to {run.out / 'sweep.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvpm",
        description="Simulate the continuous-variable Peres-Mermin contextuality test.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML experiment configuration")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (overrides [run].seed)")
        p.add_argument("--out", default=None, help=f"output directory (default: ${OUT_ENV} or ./cvpm-out)")

    common(sub.add_parser("square", help="Hadamard tests of all six contexts"))
    common(sub.add_parser("commutativity", help="commutativity tests of the 18 in-context pairs"))
    common(sub.add_parser("bench", help="bench calibration arithmetic"))
    sp = sub.add_parser("sweep", help="sweep one noise or numerics parameter")
    common(sp)
    sp.add_argument("--param", required=True, help=f"one of {', '.join(SWEEP_PARAMS)}")
    sp.add_argument("--range", required=True, help="start:stop:step (inclusive) or v1,v2,...")
    return parser


COMMANDS = {
    "square": cmd_square,
    "commutativity": cmd_commutativity,
    "bench": cmd_bench,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.raw_argv = argv[1:] if argv and argv[0] == args.command else argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CutoffError as exc:
        print(f"numeric guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
