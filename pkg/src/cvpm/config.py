"""TOML experiment configuration.

Complex numbers are written as ``[re, im]`` pairs. Per-context tables are
keyed by context label (``"Row 1"`` ... ``"Column 3"``) and must list all six
contexts. See ``configs/measured_fit.toml`` for an annotated example.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import tomli

from .algebra import CONTEXT_LABELS, SquareParams
from .bench import BenchParams
from .circuits import Backend, ExperimentConfig, ProbeState
from .noise import NoiseModel

_SECTIONS = {
    "square": {"q0", "p0"},
    "backend": {"kind", "cutoff"},
    "probe": {"alpha", "r", "phi", "nbar"},
    "noise": {
        "visibility_hadamard", "visibility_sagnac", "per_context_visibility", "calib_eps_q",
        "calib_eps_p", "residual_amp", "g2", "visibility_jitter_sd",
    },
    "counting": {"count_rate", "context_rates", "pair_rate", "window_s", "n_windows", "sampling"},
    "analysis": {"slots_per_context"},
    "run": {"seed"},
    "bench": {
        "wavelength", "shear", "farfield_distance", "wedge_deflection", "length_scale",
        "emitter_wavelength",
    },
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending line when known."""


@dataclass
class LoadedConfig:
    raw: dict
    experiment: ExperimentConfig
    bench: Optional[BenchParams]
    text: str


def _line_of(text: str, key: str) -> Optional[int]:
    pat = re.compile(rf"^\s*(\[+\s*)?[\"']?{re.escape(key.split('.')[-1])}[\"']?\s*(=|\]|\.)", re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(text: str, key: str, msg: str):
    line = _line_of(text, key)
    where = f"line {line}: " if line else ""
    raise ConfigError(f"{where}{key}: {msg}")


def _complex(value: Any) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise TypeError("expected a number or an [re, im] pair")


def _pair(value: Any, conv, default) -> tuple:
    # one entry per mode; a flat numeric pair for a complex field means two real amplitudes
    if value is None:
        return (default, default)
    if not isinstance(value, list) or len(value) != 2:
        raise TypeError("expected a list with one entry per mode")
    return tuple(conv(v) for v in value)


def _per_context(text: str, key: str, table: Any) -> tuple[float, ...]:
    if not isinstance(table, dict):
        _fail(text, key, "expected a table keyed by context label")
    unknown = sorted(set(table) - set(CONTEXT_LABELS))
    if unknown:
        _fail(text, key, f"unknown context label(s): {', '.join(unknown)}")
    missing = [lab for lab in CONTEXT_LABELS if lab not in table]
    if missing:
        _fail(text, key, f"missing context: {', '.join(missing)}")
    return tuple(float(table[lab]) for lab in CONTEXT_LABELS)


def parse_config(text: str) -> LoadedConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    for section, body in raw.items():
        if section not in _SECTIONS:
            _fail(text, section, "unknown section")
        if not isinstance(body, dict):
            _fail(text, section, "expected a table")
        for key in body:
            if key not in _SECTIONS[section]:
                _fail(text, f"{section}.{key}", "unknown key")

    def get(section, key, default=None):
        return raw.get(section, {}).get(key, default)

    try:
        sq = raw.get("square", {})
        if sq:
            if "q0" not in sq or "p0" not in sq:
                _fail(text, "square", "give both q0 and p0, or omit the section")
            params = SquareParams(float(sq["q0"]), float(sq["p0"]))
            if not (params.q0 > 0 and params.p0 > 0 and math.isfinite(params.product)):
                _fail(text, "square.q0", "q0 and p0 must be positive and finite")
        else:
            params = SquareParams.canonical()

        backend = Backend(str(get("backend", "kind", "gaussian")),
                          int(get("backend", "cutoff", 60)))

        probe = ProbeState(
            alphas=_pair(get("probe", "alpha"), _complex, 0j),
            rs=_pair(get("probe", "r"), float, 0.0),
            phis=_pair(get("probe", "phi"), float, 0.0),
            nbars=_pair(get("probe", "nbar"), float, 0.0),
        )

        pcv = get("noise", "per_context_visibility")
        noise = NoiseModel(
            visibility_hadamard=float(get("noise", "visibility_hadamard", 1.0)),
            visibility_sagnac=float(get("noise", "visibility_sagnac", 1.0)),
            per_context_visibility=None if pcv is None else _per_context(
                text, "noise.per_context_visibility", pcv),
            calib_eps_q=float(get("noise", "calib_eps_q", 0.0)),
            calib_eps_p=float(get("noise", "calib_eps_p", 0.0)),
            residual_amp=_pair(get("noise", "residual_amp"), _complex, 0j),
            g2=float(get("noise", "g2", 0.0)),
            visibility_jitter_sd=float(get("noise", "visibility_jitter_sd", 0.0)),
        )

        rates = get("counting", "context_rates")
        pair_rate = get("counting", "pair_rate")
        experiment = ExperimentConfig(
            square_params=params,
            backend=backend,
            probe=probe,
            noise=noise,
            count_rate=float(get("counting", "count_rate", 1.0e5)),
            context_rates=None if rates is None else _per_context(
                text, "counting.context_rates", rates),
            pair_rate=None if pair_rate is None else float(pair_rate),
            window_s=float(get("counting", "window_s", 1.0)),
            n_windows=int(get("counting", "n_windows", 100)),
            rng_seed=int(get("run", "seed", 0)),
            sampling=bool(get("counting", "sampling", True)),
            slots_per_context=int(get("analysis", "slots_per_context", 3)),
        )

        bench = None
        if "bench" in raw:
            b = raw["bench"]
            bench = BenchParams(**{k: float(v) for k, v in b.items()})
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        key = _guess_key(str(exc), raw)
        _fail(text, key, str(exc))
    return LoadedConfig(raw, experiment, bench, text)


def _guess_key(message: str, raw: dict) -> str:
    for section, body in raw.items():
        for key in body:
            if key in message:
                return f"{section}.{key}"
    return next(iter(raw), "config")


def load_config(path) -> LoadedConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
