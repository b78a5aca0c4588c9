"""Serialization of reports to versioned JSON and table-shaped CSV."""

from __future__ import annotations

import hashlib
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

import jsonschema
import numpy as np

from .analysis import InequalityReport, KappaReport, kappa_threshold

SCHEMA_VERSION = "v1"


def fmt_float(x: float) -> str:
    """17 significant digits; infinities as the strings ``inf``/``-inf``."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return json.dumps(fmt_float(x)) if not math.isfinite(x) else fmt_float(x)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return _encode(obj, 2, 0) + "\n"


def load_schema(name: str) -> dict:
    text = resources.files("cvpm").joinpath("schemas", f"{name}.{SCHEMA_VERSION}.json").read_text()
    return json.loads(text)


def validate(obj: dict, name: str) -> None:
    # round-trip first so the schema sees exactly what lands on disk
    jsonschema.validate(json.loads(dumps(obj)), load_schema(name))


def square_record(report: InequalityReport, kappas: KappaReport | None, slots: int,
                  visibility_fit: dict, notes: Sequence[str]) -> dict:
    return {
        "schema": f"cvpm.square/{SCHEMA_VERSION}",
        "L": report.L,
        "sd": report.sd,
        "nc_bound": report.nc_bound,
        "quantum_max": report.quantum_max,
        "significance": report.significance,
        "violation": report.violation,
        "per_context": [
            {k: e[k] for k in ("label", "operator", "n_plus", "n_minus", "expectation", "sd",
                               "sem", "exact_re", "exact_im")}
            for e in report.per_context
        ],
        "corrected_bound": report.corrected_bound,
        "corrected_violation": report.corrected_violation,
        "slots_per_context": slots,
        "kappa_threshold": kappa_threshold(report.quantum_max, slots),
        "mean_kappa": kappas.mean_kappa if kappas is not None else None,
        "max_kappa": kappas.max_kappa if kappas is not None else None,
        "visibility_fit": visibility_fit,
        "notes": list(notes),
    }


def kappa_record(kappas: KappaReport, notes: Sequence[str]) -> dict:
    return {
        "schema": f"cvpm.kappa/{SCHEMA_VERSION}",
        "pairs": [
            {k: p[k] for k in ("context", "a", "b", "n_plus", "n_minus", "kappa", "sd",
                               "kappa_ideal", "visibility")}
            for p in kappas.pairs
        ],
        "mean_kappa": kappas.mean_kappa,
        "max_kappa": kappas.max_kappa,
        "notes": list(notes),
    }


def _cell(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if v is None:
        return ""
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_quote(_cell(v)) for v in row))
    return "\n".join(lines) + "\n"


def _quote(s: str) -> str:
    return f'"{s}"' if ("," in s or '"' in s) else s


def square_csv(report: InequalityReport) -> str:
    rows = [
        (e["label"], e["operator"], e["n_plus"], e["n_minus"], e["expectation"], e["sd"])
        for e in report.per_context
    ]
    rows.append(("", "L", None, None, report.L, report.sd))
    return csv_text(("context", "operator", "n_plus", "n_minus", "re_expectation", "sd"), rows)


def kappa_csv(kappas: KappaReport) -> str:
    rows = [
        (p["context"], f"{p['a']} {p['b']}", p["n_plus"], p["n_minus"], p["kappa"], p["sd"])
        for p in kappas.pairs
    ]
    rows.append(("mean", "", None, None, kappas.mean_kappa, None))
    rows.append(("max", "", None, None, kappas.max_kappa, None))
    return csv_text(("context", "operators", "n_plus", "n_minus", "kappa", "sd"), rows)


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
