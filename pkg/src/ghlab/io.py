"""Readers and writers for the on-disk formats.

Spaces
    JSON ``{"labels": [...], "dist": [[...], ...]}``, a point cloud
    ``{"points": [[...], ...], "metric": "euclidean"}`` (or a bare list of
    coordinate vectors), or CSV with a header row of labels followed by the
    matrix rows.
Subsets
    JSON list of indices or labels, or ``{"members": [...]}``.
Relations
    JSON ``{"rows": n, "cols": m, "cells": [[i, j], ...]}``.
Topologies
    JSON ``{"points": [...], "min_open": [[...], ...]}``.
Set-valued maps
    JSON ``{"image": [[...], ...]}``.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .metric import FiniteMetricSpace, MetricAxiomError, Subset, from_points, validate
from .relations import Relation, relation_from_json
from .topology import FiniteTopology, SetValuedMap

__all__ = [
    "ParseError",
    "InvariantViolation",
    "read_json",
    "space_from_json",
    "load_space",
    "load_subset",
    "load_relation",
    "load_topology",
    "load_map",
    "dump_json",
]


class ParseError(ValueError):
    """Input file is unreadable or does not follow the expected format."""


class InvariantViolation(ValueError):
    """Input parses but breaks an axiom of the object it describes."""


def read_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def space_from_json(data) -> FiniteMetricSpace:
    """Build a space from decoded JSON; metric axioms are validated."""
    if not isinstance(data, (dict, list)):
        raise ParseError("space JSON must be an object or a list of points")
    try:
        if isinstance(data, list):
            return from_points(data)
        if "dist" in data:
            return validate(data["dist"], data.get("labels"))
        if "points" in data:
            return from_points(data["points"], data.get("metric", "euclidean"), data.get("labels"))
    except MetricAxiomError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    raise ParseError("space JSON needs a 'dist' matrix or a 'points' list")


def _load_csv(path) -> FiniteMetricSpace:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty CSV")
    labels = [c.strip() for c in rows[0]]
    try:
        dist = [[float(c) for c in r] for r in rows[1:]]
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if any(len(r) != len(labels) for r in dist):
        raise ParseError(f"{path}: every row needs {len(labels)} entries")
    return validate(dist, labels)


def load_space(path) -> FiniteMetricSpace:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _load_csv(path)
    return space_from_json(read_json(path))


def load_subset(path, space: FiniteMetricSpace) -> Subset:
    data = read_json(path)
    if isinstance(data, dict):
        data = data.get("members")
    if not isinstance(data, list):
        raise ParseError(f"{path}: subset must be a list or {{'members': [...]}}")
    where = {lab: i for i, lab in enumerate(space.labels)}
    idx = []
    for item in data:
        if isinstance(item, int):
            idx.append(item)
        elif str(item) in where:
            idx.append(where[str(item)])
        else:
            raise ParseError(f"{path}: unknown point {item!r}")
    try:
        return Subset(space, idx)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_relation(path, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Relation:
    data = read_json(path)
    try:
        return relation_from_json(data, X, Y)
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise InvariantViolation(f"{path}: {exc}") from exc


def load_topology(path) -> FiniteTopology:
    data = read_json(path)
    try:
        return FiniteTopology.from_json(data)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise InvariantViolation(f"{path}: {exc}") from exc


def load_map(path, source: FiniteTopology, target: FiniteTopology) -> SetValuedMap:
    data = read_json(path)
    try:
        return SetValuedMap.from_json(data, source, target)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise InvariantViolation(f"{path}: {exc}") from exc


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True)
