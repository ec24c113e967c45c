"""Plain-text formats: headerless CSV matrices, one-per-line vectors, block
files and flat ``key=value`` configs."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .covariance import BlockSpec


def read_matrix(path) -> np.ndarray:
    """Headerless CSV, rows are samples. Empty or ``NA`` cells become NaN."""
    path = Path(path)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(c) if c.strip() not in ("", "NA", "nan", "NaN")
                             else np.nan for c in line.split(",")])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data")
    width = len(rows[0])
    for i, r in enumerate(rows, 1):
        if len(r) != width:
            raise ValueError(f"{path}: row {i} has {len(r)} fields, expected {width}")
    return np.array(rows, dtype=float)


def read_vector(path) -> np.ndarray:
    path = Path(path)
    vals = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not vals:
        raise ValueError(f"{path}: no data")
    return np.array(vals)


def _fmt(x) -> str:
    # repr round-trips doubles exactly
    return repr(float(x))


def write_matrix(path, X) -> None:
    with Path(path).open("w") as fh:
        for row in np.asarray(X, dtype=float):
            fh.write(",".join(_fmt(v) for v in row))
            fh.write("\n")


def write_vector(path, v) -> None:
    with Path(path).open("w") as fh:
        for x in np.asarray(v, dtype=float).ravel():
            fh.write(_fmt(x) + "\n")


def read_blocks(path, p: int) -> BlockSpec:
    """Parse a block file.

    Each non-comment line is either ``start:end`` (1-based, inclusive) or a
    block size. A file holding a single size repeats it to cover p columns;
    several sizes are laid out consecutively.
    """
    ranges, sizes = [], []
    with Path(path).open() as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                if ":" in line:
                    a, b = line.split(":")
                    ranges.append((int(a) - 1, int(b)))
                else:
                    sizes.append(int(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed block line {line!r}") from None
    if ranges and sizes:
        raise ValueError(f"{path}: mixes start:end ranges with block sizes")
    if sizes:
        if any(s < 1 for s in sizes):
            raise ValueError(f"{path}: block sizes must be positive")
        if len(sizes) == 1:
            return BlockSpec.uniform(p, sizes[0])
        bounds = np.concatenate([[0], np.cumsum(sizes)])
        ranges = list(zip(bounds[:-1], bounds[1:]))
    spec = BlockSpec(tuple(ranges))
    if spec.p != p:
        raise ValueError(f"{path}: blocks cover {spec.p} columns but X has {p}")
    return spec


def _coerce(value: str, kind):
    if kind is bool or kind == "bool":
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if kind in (int, "int"):
        return int(value)
    if kind in (float, "float"):
        return float(value)
    return value.strip()


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with Path(path).open() as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def config_to_dataclass(cls, raw: dict, **overrides):
    """Build dataclass ``cls`` from string values, converting by field type."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in fields:
            raise ValueError(f"unknown config key {key!r}")
        kind = fields[key].type
        kind = {"int": int, "float": float, "bool": bool, "str": str}.get(kind, kind)
        kwargs[key] = _coerce(value, kind)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**kwargs)


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
