"""Plain-text sweep configs, CSV curves and JSON summaries.

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Keys are ModelParams / TruncationSpec / SweepConfig field names. Values are
numbers, identifiers, or comma lists. ``grid = start, stop, points`` gives a
uniform grid and ``grid_list = v1, v2, ...`` an explicit one; each
``refine = start, stop, points`` line adds a refinement window. The
shorthands ``delta``, ``g`` and ``kappa`` set both cavities at once.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .fock import TruncationSpec
from .model import ModelParams
from .sweep import CSV_FIELDS, CurvePoint, SweepConfig

MODEL_KEYS = tuple(f.name for f in dataclasses.fields(ModelParams))
TRUNC_KEYS = tuple(f.name for f in dataclasses.fields(TruncationSpec))
SWEEP_KEYS = ("axis", "grid", "grid_list", "methods", "output", "lock_resonance",
              "drive_ratio", "refine", "threads", "name")
SHORTHANDS = ("delta", "g", "kappa")


class ConfigError(ValueError):
    pass


def _number(text: str, lineno: int, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: key '{key}' expects a number, got {text!r}") from None


def _list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_config(text: str) -> SweepConfig:
    model: dict[str, float] = {}
    trunc: dict[str, int] = {}
    sweep: dict = {}
    refine = []
    grid = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise ConfigError(f"line {lineno}: key '{key}' has no value")
        if key in MODEL_KEYS:
            model[key] = _number(value, lineno, key)
        elif key in SHORTHANDS:
            v = _number(value, lineno, key)
            if key == "delta":
                model["delta_L"] = model["delta_R"] = v
            elif key == "kappa":
                model["kappa_L"] = model["kappa_R"] = v
            else:
                model["g_L"] = model["g_R"] = v
        elif key in TRUNC_KEYS:
            v = _number(value, lineno, key)
            if v != int(v):
                raise ConfigError(f"line {lineno}: key '{key}' expects an integer")
            trunc[key] = int(v)
        elif key == "grid":
            parts = _list(value)
            if len(parts) != 3:
                raise ConfigError(f"line {lineno}: key 'grid' expects 'start, stop, points'")
            lo, hi, n = (_number(s, lineno, key) for s in parts)
            if n != int(n) or n < 2:
                raise ConfigError(f"line {lineno}: key 'grid' needs an integer number of points >= 2")
            grid = tuple(float(x) for x in np.linspace(lo, hi, int(n)))
        elif key == "grid_list":
            grid = tuple(_number(s, lineno, key) for s in _list(value))
        elif key == "refine":
            parts = _list(value)
            if len(parts) != 3:
                raise ConfigError(f"line {lineno}: key 'refine' expects 'start, stop, points'")
            lo, hi, n = (_number(s, lineno, key) for s in parts)
            refine.append((lo, hi, int(n)))
        elif key == "methods":
            sweep["methods"] = tuple(_list(value))
        elif key in ("drive_ratio",):
            sweep[key] = _number(value, lineno, key)
        elif key == "threads":
            sweep[key] = int(_number(value, lineno, key))
        elif key in ("axis", "output", "lock_resonance", "name"):
            sweep[key] = value
        else:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
    if grid is not None:
        sweep["grid"] = grid
    if refine:
        sweep["refine"] = tuple(refine)
    try:
        return SweepConfig(base=ModelParams(**model), truncation=TruncationSpec(**trunc), **sweep)
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: str | Path) -> SweepConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def shipped_configs() -> dict[str, SweepConfig]:
    """Configs bundled with the package, keyed by file stem."""
    out = {}
    for entry in sorted(resources.files("loopblockade.configs").iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".cfg"):
            out[entry.name[:-4]] = parse_config(entry.read_text(encoding="utf-8"))
    return out


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def format_config(cfg: SweepConfig) -> str:
    """Resolved config as text that parse_config reads back to an equal object."""
    lines = [f"name = {cfg.name}", f"axis = {cfg.axis}"]
    lines.append("grid_list = " + ", ".join(_fmt(v) for v in cfg.grid))
    for lo, hi, n in cfg.refine:
        lines.append(f"refine = {_fmt(lo)}, {_fmt(hi)}, {int(n)}")
    lines.append("methods = " + ", ".join(cfg.methods))
    if cfg.lock_resonance is not None:
        lines.append(f"lock_resonance = {cfg.lock_resonance}")
    if cfg.drive_ratio is not None:
        lines.append(f"drive_ratio = {_fmt(cfg.drive_ratio)}")
    if cfg.output is not None:
        lines.append(f"output = {cfg.output}")
    lines.append(f"threads = {cfg.threads}")
    for k in MODEL_KEYS:
        lines.append(f"{k} = {_fmt(getattr(cfg.base, k))}")
    for k in TRUNC_KEYS:
        lines.append(f"{k} = {getattr(cfg.truncation, k)}")
    return "\n".join(lines) + "\n"


def write_csv(path: str | Path, rows, cfg: SweepConfig | None = None) -> None:
    """Comment block with the resolved config, then a header in CurvePoint field order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# loopblockade sweep\n")
        fh.write("# columns: " + ", ".join(CSV_FIELDS) + "\n")
        if cfg is not None:
            for line in format_config(cfg).splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def read_csv(path: str | Path) -> tuple[list[CurvePoint], SweepConfig | None]:
    rows, header_lines = [], []
    with open(path, encoding="utf-8") as fh:
        body = []
        for line in fh:
            if line.startswith("#"):
                header_lines.append(line[1:].strip())
            else:
                body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_FIELDS:
        raise ConfigError(f"{path}: unexpected CSV header {header!r}")
    for rec in reader:
        if not rec:
            continue
        vals = dict(zip(header, rec))
        rows.append(CurvePoint(**{
            k: (vals[k] if k in ("method", "status") else float(vals[k])) for k in CSV_FIELDS
        }))
    cfg_text = "\n".join(line for line in header_lines if "=" in line and not line.startswith("columns"))
    cfg = None
    if cfg_text:
        try:
            cfg = parse_config(cfg_text)
        except ConfigError:
            cfg = None
    return rows, cfg


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def write_json(path: str | Path, payload: dict) -> None:
    """JSON with NaN/inf written as null."""
    Path(path).write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
