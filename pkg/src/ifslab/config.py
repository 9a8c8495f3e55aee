"""YAML description of an IFS.

Example::

    dimension: 1
    tolerances: {tol_attr: 1.0e-6}
    seed: origin            # or a list of points, e.g. [[0.0], [1.0]]
    maps:
      - name: L
        kind: affine
        matrix: [["1/3"]]    # row-major; nested or flat
        offset: [0]
        witness: {family: linear, c: "1/3"}
      - name: R
        kind: affine
        matrix: [["1/3"]]
        offset: ["2/3"]
        witness: {family: linear, c: "1/3"}

Numbers may be written as ``"p/q"`` strings. Unknown keys are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from .contractions import NAMED_FAMILIES, ComparisonFunction, ContractionMap
from .ifscore import IfsInstance
from .metricsets import PointCloud


class ConfigError(ValueError):
    pass


TOP_KEYS = {"dimension", "maps", "tolerances", "seed"}
MAP_KEYS = {"name", "kind", "matrix", "offset", "params", "witness"}
TOL_KEYS = {"tol_point", "tol_attr", "max_depth", "dedup", "word_cap", "max_iter"}
WITNESS_KEYS = {"family", "c", "knots", "values"}


@dataclass
class IfsConfig:
    instance: IfsInstance
    seed: PointCloud
    names: tuple[str, ...]


def _num(v, where: str) -> float:
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(Fraction(v.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigError(f"{where}: expected a number, got {v!r}")


def _vec(v, where: str) -> list[float]:
    if not isinstance(v, list):
        raise ConfigError(f"{where}: expected a list")
    return [_num(x, f"{where}[{k}]") for k, x in enumerate(v)]


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def _witness(d, where) -> ComparisonFunction:
    _reject_unknown(d, WITNESS_KEYS, where)
    fam = d.get("family")
    try:
        if fam == "linear":
            return ComparisonFunction.linear(_num(d.get("c"), f"{where}.c"))
        if fam == "rational":
            return ComparisonFunction.rational()
        if fam == "table":
            return ComparisonFunction.table(_vec(d.get("knots"), f"{where}.knots"),
                                            _vec(d.get("values"), f"{where}.values"))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unknown comparison family {fam!r}")


def _map(d, m: int, where: str) -> tuple[str | None, ContractionMap]:
    _reject_unknown(d, MAP_KEYS, where)
    kind = d.get("kind", "affine")
    witness = _witness(d["witness"], f"{where}.witness") if "witness" in d else None
    name = d.get("name")
    try:
        if kind == "affine":
            if "params" in d:
                raise ConfigError(f"{where}: affine maps take matrix/offset, not params")
            raw = d.get("matrix")
            if not isinstance(raw, list):
                raise ConfigError(f"{where}.matrix: expected a list")
            flat = [x for row in raw for x in row] if raw and isinstance(raw[0], list) else raw
            entries = _vec(flat, f"{where}.matrix")
            if len(entries) != m * m:
                raise ConfigError(f"{where}.matrix: need {m * m} entries, got {len(entries)}")
            offset = _vec(d.get("offset", [0] * m), f"{where}.offset")
            f = ContractionMap.affine(np.array(entries).reshape(m, m), offset, witness)
        elif kind in NAMED_FAMILIES:
            if "matrix" in d or "offset" in d:
                raise ConfigError(f"{where}: named families take params only")
            params = dict(d.get("params") or {})
            parsed = {}
            for key, val in params.items():
                parsed[key] = _vec(val, f"{where}.params.{key}") if isinstance(val, list) else _num(val, f"{where}.params.{key}")
            if "offset" not in parsed:
                parsed["offset"] = [0.0] * m
            f = ContractionMap(kind, params=parsed, witness=witness)
        else:
            raise ConfigError(f"{where}: unknown map kind {kind!r}")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    if f.dimension != m:
        raise ConfigError(f"{where}: map acts on R^{f.dimension}, config says dimension {m}")
    return (None if name is None else str(name)), f


def parse_config(data) -> IfsConfig:
    _reject_unknown(data, TOP_KEYS, "config")
    m = data.get("dimension")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ConfigError("config.dimension: expected a positive integer")
    raw_maps = data.get("maps")
    if not isinstance(raw_maps, list) or not raw_maps:
        raise ConfigError("config.maps: expected a non-empty list")
    named = [_map(d, m, f"maps[{k}]") for k, d in enumerate(raw_maps)]
    names = tuple(n if n is not None else str(k) for k, (n, _) in enumerate(named))
    if len(set(names)) != len(names):
        raise ConfigError("map names must be unique")
    if any("." in n or "|" in n or not n for n in names):
        raise ConfigError("map names must be non-empty and free of '.' and '|'")
    tol = data.get("tolerances") or {}
    _reject_unknown(tol, TOL_KEYS, "config.tolerances")
    kw = {}
    for key, val in tol.items():
        v = _num(val, f"tolerances.{key}")
        kw[key] = int(v) if key in {"max_depth", "word_cap", "max_iter"} else v
    instance = IfsInstance(tuple(f for _, f in named), names=names, **kw)
    seed = data.get("seed", "origin")
    if seed == "origin":
        cloud = instance.origin()
    elif isinstance(seed, list) and seed:
        pts = [_vec(p if isinstance(p, list) else [p], f"seed[{k}]") for k, p in enumerate(seed)]
        if any(len(p) != m for p in pts):
            raise ConfigError(f"seed points must have {m} coordinates")
        cloud = PointCloud(pts)
    else:
        raise ConfigError("config.seed: expected 'origin' or a list of points")
    return IfsConfig(instance, cloud, names)


def load_config(path) -> IfsConfig:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data)
