"""Uniform nets of simple compact spaces and convergence experiments on them.

Net points are labelled by their exact rational position (``"3/8"`` for the
point at three eighths of an interval or of a circle), so nets of the same
model at different resolutions share labels on common points.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .gh import ORACLE_MAX_CELLS, default_budget, gh_exact, gh_oracle
from .metric import FiniteMetricSpace, delta1, diameter, hausdorff
from .relations import ALL, Correspondence, FamilyFilter, Relation, distortion, epsilon_thicken

__all__ = [
    "NetSpec",
    "net_fractions",
    "generate_net",
    "covering_radius",
    "subnet_indices",
    "nearest_point_correspondence",
    "ExperimentTable",
    "dense_subnet_experiment",
    "epsilon_limit_experiment",
    "extend_correspondence",
    "extension_gap",
    "restrict_rows",
    "delta1_convergence",
]

MODELS = ("interval", "circle", "grid")


@dataclass(frozen=True)
class NetSpec:
    """A model compact space and the resolution of a uniform net on it.

    ``length`` is the interval length, the circle circumference, or a tuple
    of side lengths for a grid. Resolution comes from ``points`` (per axis)
    when given, otherwise from ``mesh``, the largest allowed spacing.
    Grids use ``metric`` (``euclidean`` or ``chebyshev``) on the box.
    """

    model: str
    length: float | tuple[float, ...] = 1.0
    mesh: float | None = None
    points: int | None = None
    metric: str = "euclidean"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.mesh is None and self.points is None:
            raise ValueError("give either mesh or points")
        if self.mesh is not None and not self.mesh > 0:
            raise ValueError("mesh must be positive")
        if self.points is not None and self.points < 1:
            raise ValueError("points must be at least 1")

    def with_points(self, n: int) -> "NetSpec":
        return replace(self, points=n, mesh=None)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(self.length) if isinstance(self.length, (tuple, list)) else (float(self.length),)

    def segments(self, length: float) -> int:
        """Number of equal steps along one axis."""
        if self.points is not None:
            return self.points if self.model == "circle" else max(self.points - 1, 0)
        # the epsilon guards against L / mesh landing a hair above an integer
        return max(1, math.ceil(length / self.mesh - 1e-9))


def net_fractions(spec: NetSpec) -> list[tuple[Fraction, ...]]:
    """Net positions as exact fractions of each axis length."""
    axes = []
    for L in spec.lengths:
        k = spec.segments(L)
        if spec.model == "circle":
            axes.append([Fraction(i, k) for i in range(k)])
        elif k == 0:
            axes.append([Fraction(0)])
        else:
            axes.append([Fraction(i, k) for i in range(k + 1)])
    if spec.model != "grid":
        axes = axes[:1]
    return list(product(*axes))


def _label(pos: tuple[Fraction, ...]) -> str:
    return ",".join(str(p) for p in pos)


def generate_net(spec: NetSpec) -> FiniteMetricSpace:
    """Uniform net on the model with exact model distances."""
    pos = net_fractions(spec)
    labels = [_label(p) for p in pos]
    if spec.model == "circle":
        c = spec.lengths[0]
        n = len(pos)
        k = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        d = np.minimum(k, n - k) * (c / n)
    elif spec.model == "interval":
        L = spec.lengths[0]
        x = np.array([float(p[0]) for p in pos]) * L
        d = np.abs(np.subtract.outer(x, x))
    else:
        coords = np.array([[float(f) * L for f, L in zip(p, spec.lengths)] for p in pos])
        d = cdist(coords, coords, metric=spec.metric)
        d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return FiniteMetricSpace(d, labels)


def covering_radius(spec: NetSpec) -> float:
    """Largest model distance from a model point to the nearest net point."""
    halves = []
    for L in spec.lengths:
        k = spec.segments(L)
        halves.append(L / (2 * k) if k else L)
    if spec.model != "grid":
        return halves[0]
    if spec.metric == "chebyshev":
        return max(halves)
    return math.sqrt(sum(h * h for h in halves))


def subnet_indices(spec: NetSpec, stride: int) -> list[int]:
    """Indices of the net points whose position is a multiple of ``stride`` steps."""
    pos = net_fractions(spec)
    steps = [spec.segments(L) for L in spec.lengths]
    out = []
    for idx, p in enumerate(pos):
        if all((f * k) % stride == 0 for f, k in zip(p, steps)):
            out.append(idx)
    return out


def nearest_point_correspondence(X: FiniteMetricSpace, members: Sequence[int]) -> Correspondence:
    """Correspondence from ``X`` to its subspace on ``members``.

    Each point of ``X`` is related to its nearest member (lowest index on
    ties), and each member also to itself. Its distortion is at most twice
    the Hausdorff distance between ``X`` and the subspace.
    """
    idx = list(members)
    Y = X.submetric(idx)
    inc = np.zeros((X.n, len(idx)), dtype=bool)
    near = X.dist[:, idx].argmin(axis=1)
    inc[np.arange(X.n), near] = True
    inc[idx, np.arange(len(idx))] = True
    return Correspondence(X, Y, inc)


@dataclass
class ExperimentTable:
    """Rows of one experiment plus the per-row solver results."""

    name: str
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    results: list[dict] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(self.columns), extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        for r in self.rows:
            writer.writerow(r)
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"experiment": self.name, "rows": self.rows, "results": self.results,
                "checks": self.checks}


def dense_subnet_experiment(spec: NetSpec, levels: Sequence[int], family: FamilyFilter = ALL,
                            budget: int | None = None, oracle: bool = False,
                            tol: float = 1e-9) -> ExperimentTable:
    """Distance between a net and its sub-nets of decreasing stride.

    ``levels`` are strides, listed coarse to fine; stride 1 is the net
    itself. Each row checks ``value <= mesh`` where ``mesh`` is the Hausdorff
    distance of the sub-net inside the net. Above the exact budget the nearest
    point correspondence supplies a labelled upper bound.
    """
    budget = default_budget() if budget is None else budget
    X = generate_net(spec)
    table = ExperimentTable("dense_subnet", ("level", "points", "mesh", "value", "bound_status",
                                             "inclusion_bound", "within_mesh"))
    for stride in levels:
        idx = subnet_indices(spec, stride)
        Y = X.submetric(idx)
        mesh = hausdorff(X.whole(), X.subset(idx))
        incl = nearest_point_correspondence(X, idx)
        res = gh_exact(X, Y, family, budget)
        value = res.value
        if not res.is_exact:
            value = min(value, distortion(incl) / 2)
        row = {"level": stride, "points": len(idx), "mesh": mesh, "value": value,
               "bound_status": res.status, "inclusion_bound": distortion(incl) / 2,
               "within_mesh": value <= mesh + tol}
        if oracle and X.n * Y.n <= ORACLE_MAX_CELLS:
            row["oracle"] = gh_oracle(X, Y, family).value
        table.rows.append(row)
        table.results.append(res.to_json())
    values = table.column("value")
    table.checks["value_le_mesh"] = all(table.column("within_mesh"))
    table.checks["inclusion_le_2_mesh"] = all(
        r["inclusion_bound"] <= r["mesh"] + tol for r in table.rows)
    table.checks["nonincreasing"] = all(b <= a + tol for a, b in zip(values, values[1:]))
    if oracle:
        table.checks["oracle_agrees"] = all(r["value"] == r["oracle"] for r in table.rows if "oracle" in r)
    return table


def _min_positive(X: FiniteMetricSpace) -> float:
    pos = X.dist[X.dist > 0]
    return float(pos.min()) if pos.size else math.inf


def epsilon_limit_experiment(sigma: Relation, schedule: Sequence[float]) -> ExperimentTable:
    """Distortion of the ``eps``-thickened relation along a decreasing schedule.

    Once ``eps`` is at most the smallest positive distance in either space,
    thickening adds nothing and the distortion equals that of ``sigma``.
    """
    eps_values = sorted((float(e) for e in schedule), reverse=True)
    base = distortion(sigma)
    threshold = min(_min_positive(sigma.source), _min_positive(sigma.target))
    table = ExperimentTable("epsilon_limit", ("eps", "distortion", "cells", "stable_predicted"))
    for eps in eps_values:
        thick = epsilon_thicken(sigma, eps)
        table.rows.append({"eps": eps, "distortion": distortion(thick), "cells": len(thick),
                           "stable_predicted": eps <= threshold})
    dis = table.column("distortion")
    table.checks["nonincreasing"] = all(b <= a for a, b in zip(dis, dis[1:]))
    table.checks["never_below_base"] = all(d >= base for d in dis)
    table.checks["stabilizes"] = all(r["distortion"] == base for r in table.rows if r["stable_predicted"])
    table.results.append({"base_distortion": base, "threshold": threshold})
    return table


def _embedding(coarse: FiniteMetricSpace, fine: FiniteMetricSpace,
               embedding: Sequence[int] | None) -> list[int]:
    if embedding is not None:
        return list(embedding)
    where = {lab: i for i, lab in enumerate(fine.labels)}
    try:
        return [where[lab] for lab in coarse.labels]
    except KeyError as exc:
        raise ValueError(f"coarse point {exc.args[0]!r} not found in the fine net") from None


def extension_gap(coarse: FiniteMetricSpace, fine: FiniteMetricSpace,
                  embedding: Sequence[int] | None = None) -> float:
    """Largest distance from a fine point to the nearest coarse point."""
    emb = _embedding(coarse, fine, embedding)
    return float(fine.dist[:, emb].min(axis=1).max())


def extend_correspondence(R: Correspondence, fine: FiniteMetricSpace,
                          embedding: Sequence[int] | None = None) -> Correspondence:
    """Extend ``R`` from a coarse net to a finer net containing it.

    ``R`` relates ``Y_coarse`` (its source) to some ``X``; ``embedding[k]`` is
    the index in ``fine`` of coarse point ``k`` (matched by label when
    omitted). A new fine point copies the image of its nearest coarse point,
    lowest coarse index first on ties. With ``delta`` the coarse-to-fine
    gap, the result has distortion at most ``distortion(R) + 2 * delta``.
    """
    coarse = R.source
    emb = _embedding(coarse, fine, embedding)
    sub = fine.dist[np.ix_(emb, emb)]
    if not np.array_equal(sub, coarse.dist):
        raise ValueError("coarse net is not an isometric subspace of the fine net at the embedding")
    inc = np.zeros((fine.n, R.target.n), dtype=bool)
    inc[emb] = R.incidence
    is_coarse = np.zeros(fine.n, dtype=bool)
    is_coarse[emb] = True
    for p in np.nonzero(~is_coarse)[0]:
        k = int(fine.dist[p, emb].argmin())
        inc[p] = R.incidence[k]
    return Correspondence(fine, R.target, inc)


def restrict_rows(R: Relation, rows: Sequence[int], source: FiniteMetricSpace) -> Relation:
    """Restriction of ``R`` to the source points ``rows``, re-based on ``source``."""
    return Relation(source, R.target, R.incidence[list(rows)])


def delta1_convergence(spec: NetSpec, levels: Sequence[int], tol: float = 1e-9) -> ExperimentTable:
    """Distance from the one-point space to nets of ``levels`` points each.

    The value equals half the net diameter at every level; for a circle of
    circumference ``c`` with an even number of points that is exactly ``c/4``.
    """
    table = ExperimentTable("delta1", ("level", "points", "diam", "value", "bound_status", "predicted"))
    point = delta1()
    for n in levels:
        net = generate_net(spec.with_points(n))
        res = gh_exact(point, net, budget=max(default_budget(), net.n))
        if spec.model == "circle" and net.n % 2 == 0:
            predicted = spec.lengths[0] / 4
        else:
            predicted = diameter(net) / 2
        table.rows.append({"level": n, "points": net.n, "diam": diameter(net), "value": res.value,
                           "bound_status": res.status, "predicted": predicted})
        table.results.append(res.to_json())
    table.checks["half_diameter"] = all(r["value"] == r["diam"] / 2 for r in table.rows)
    table.checks["matches_prediction"] = all(abs(r["value"] - r["predicted"]) <= tol for r in table.rows)
    return table
