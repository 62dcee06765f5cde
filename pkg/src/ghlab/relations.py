"""Relations and correspondences between finite metric spaces.

A relation is stored as a read-only boolean incidence matrix whose rows are
indexed by the source space and columns by the target space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .metric import FiniteMetricSpace

__all__ = [
    "EmptyRelationError",
    "EmptyCompositionError",
    "Relation",
    "Correspondence",
    "full_relation",
    "identity",
    "distortion",
    "inverse",
    "compose",
    "epsilon_thicken",
    "closure",
    "is_isometry_graph",
    "correspondence_masks",
    "enumerate_correspondences",
    "FamilyFilter",
    "ALL",
    "functions_only",
    "FamilyAxiomReport",
    "check_family_axioms",
    "relation_to_json",
    "relation_from_json",
]


class EmptyRelationError(ValueError):
    pass


class EmptyCompositionError(ValueError):
    pass


class Relation:
    """A nonempty relation between two finite metric spaces."""

    __slots__ = ("source", "target", "incidence")

    def __init__(self, source: FiniteMetricSpace, target: FiniteMetricSpace, incidence):
        inc = np.array(incidence, dtype=bool)
        if inc.shape != (source.n, target.n):
            raise ValueError(
                f"incidence shape {inc.shape} does not match spaces ({source.n}, {target.n})")
        if not inc.any():
            raise EmptyRelationError("relations must be nonempty")
        inc.setflags(write=False)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "incidence", inc)
        self._check()

    def _check(self) -> None:
        pass

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def from_cells(cls, source, target, cells: Iterable[tuple[int, int]]):
        inc = np.zeros((source.n, target.n), dtype=bool)
        for i, j in cells:
            inc[i, j] = True
        return cls(source, target, inc)

    @classmethod
    def from_map(cls, source, target, mapping: Sequence[int]):
        """Graph of a single-valued map given as ``mapping[i] = j``."""
        return cls.from_cells(source, target, enumerate(mapping))

    @property
    def cells(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.incidence))]

    @property
    def shape(self) -> tuple[int, int]:
        return self.incidence.shape

    @property
    def is_correspondence(self) -> bool:
        return bool(self.incidence.any(axis=1).all() and self.incidence.any(axis=0).all())

    def image(self, i: int) -> list[int]:
        return np.nonzero(self.incidence[i])[0].tolist()

    def preimage(self, j: int) -> list[int]:
        return np.nonzero(self.incidence[:, j])[0].tolist()

    def as_correspondence(self) -> "Correspondence":
        return Correspondence(self.source, self.target, self.incidence)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return (np.array_equal(self.incidence, other.incidence)
                and self.source == other.source and self.target == other.target)

    def __hash__(self) -> int:
        return hash((self.incidence.shape, np.packbits(self.incidence).tobytes()))

    def __le__(self, other: "Relation") -> bool:
        return bool(np.all(~self.incidence | other.incidence))

    def __len__(self) -> int:
        return int(self.incidence.sum())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.cells})"


class Correspondence(Relation):
    """A relation whose projections onto both factors are surjective."""

    __slots__ = ()

    def _check(self) -> None:
        if not self.is_correspondence:
            rows = np.nonzero(~self.incidence.any(axis=1))[0].tolist()
            cols = np.nonzero(~self.incidence.any(axis=0))[0].tolist()
            raise ValueError(f"not a correspondence: uncovered rows {rows}, columns {cols}")


def _wrap(source, target, inc, keep_corr: bool) -> Relation:
    if keep_corr and inc.any(axis=1).all() and inc.any(axis=0).all():
        return Correspondence(source, target, inc)
    return Relation(source, target, inc)


def full_relation(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Correspondence:
    return Correspondence(X, Y, np.ones((X.n, Y.n), dtype=bool))


def identity(X: FiniteMetricSpace) -> Correspondence:
    return Correspondence(X, X, np.eye(X.n, dtype=bool))


def distortion(sigma: Relation) -> float:
    """Largest mismatch ``| |xx'| - |yy'| |`` over pairs of cells of ``sigma``."""
    rows, cols = np.nonzero(sigma.incidence)
    dx = sigma.source.dist[np.ix_(rows, rows)]
    dy = sigma.target.dist[np.ix_(cols, cols)]
    return float(np.abs(dx - dy).max())


def inverse(sigma: Relation) -> Relation:
    return type(sigma)(sigma.target, sigma.source, sigma.incidence.T)


def compose(sigma: Relation, tau: Relation) -> Relation:
    """The relation ``tau o sigma``: first ``sigma`` (X to Y), then ``tau`` (Y to Z)."""
    if sigma.target.n != tau.source.n or sigma.target != tau.source:
        raise ValueError("composition needs sigma.target == tau.source")
    inc = (sigma.incidence.astype(np.int64) @ tau.incidence.astype(np.int64)) > 0
    if not inc.any():
        raise EmptyCompositionError("composition of the two relations is empty")
    both = isinstance(sigma, Correspondence) and isinstance(tau, Correspondence)
    return _wrap(sigma.source, tau.target, inc, both)


def epsilon_thicken(sigma: Relation, eps: float) -> Relation:
    """Open ``eps``-neighborhood of ``sigma`` in ``X x Y`` under the max product metric."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    near_x = (sigma.source.dist < eps).astype(np.int64)
    near_y = (sigma.target.dist < eps).astype(np.int64)
    inc = (near_x @ sigma.incidence.astype(np.int64) @ near_y) > 0
    return _wrap(sigma.source, sigma.target, inc, isinstance(sigma, Correspondence))


def closure(sigma: Relation) -> Relation:
    """Topological closure in ``X x Y``.

    Finite metric spaces are discrete, so every relation is already closed.
    """
    return sigma


def is_isometry_graph(R: Relation) -> bool:
    """True iff ``R`` is the graph of a distance-preserving bijection."""
    inc = R.incidence
    if inc.shape[0] != inc.shape[1]:
        return False
    if not (np.all(inc.sum(axis=1) == 1) and np.all(inc.sum(axis=0) == 1)):
        return False
    perm = inc.argmax(axis=1)
    return bool(np.array_equal(R.source.dist, R.target.dist[np.ix_(perm, perm)]))


@lru_cache(maxsize=None)
def correspondence_masks(n: int, m: int) -> np.ndarray:
    """Every doubly-surjective ``n x m`` boolean matrix, shape ``(K, n, m)``.

    Rows of the stack are ordered by the integer whose bit ``i*m + j`` is cell
    ``(i, j)``, so the ordering is deterministic. Intended for ``n*m <= 16``.
    """
    cells = n * m
    if cells > 20:
        raise ValueError(f"refusing to enumerate 2**{cells} relations")
    codes = np.arange(1, 1 << cells, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(cells)) & 1).astype(bool).reshape(-1, n, m)
    keep = bits.any(axis=2).all(axis=1) & bits.any(axis=1).all(axis=1)
    out = bits[keep]
    out.setflags(write=False)
    return out


def enumerate_correspondences(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Iterator[Correspondence]:
    for mask in correspondence_masks(X.n, Y.n):
        yield Correspondence(X, Y, mask)


@dataclass(frozen=True)
class FamilyFilter:
    """A family of correspondences, given as a membership predicate.

    ``accepts_all`` may be supplied when the family is known to contain every
    correspondence between ``X`` and ``Y``; solvers then skip the predicate.
    """

    tag: str
    predicate: Callable[[Relation], bool]
    accepts_all: Callable[[FiniteMetricSpace, FiniteMetricSpace], bool] | None = None

    def __call__(self, R: Relation) -> bool:
        return bool(self.predicate(R))

    def is_trivial_on(self, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> bool:
        return self.accepts_all is not None and bool(self.accepts_all(X, Y))


ALL = FamilyFilter("all", lambda R: R.is_correspondence, lambda X, Y: True)


def functions_only() -> FamilyFilter:
    """Correspondences that are graphs of single-valued maps (not a valid family)."""
    return FamilyFilter("custom", lambda R: bool(np.all(R.incidence.sum(axis=1) == 1)))


@dataclass
class FamilyAxiomReport:
    passed: bool
    checked: dict[str, int] = field(default_factory=dict)
    counterexamples: list[tuple[str, str]] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"{axiom}: {count} checks" for axiom, count in self.checked.items()]
        out += [f"FAIL {axiom}: {what}" for axiom, what in self.counterexamples]
        return out


def _members(f: FamilyFilter, X, Y) -> np.ndarray:
    masks = correspondence_masks(X.n, Y.n)
    if f.is_trivial_on(X, Y):
        return masks
    keep = [f(Correspondence(X, Y, m)) for m in masks]
    return masks[np.array(keep, dtype=bool)] if masks.size else masks


def check_family_axioms(f: FamilyFilter, samples: Sequence[FiniteMetricSpace],
                        max_counterexamples: int = 5) -> FamilyAxiomReport:
    """Check nonemptiness, identity, inverse and composition closure on ``samples``.

    Every correspondence between every ordered pair (and triple, for
    composition) of sample spaces is enumerated, so samples should stay small
    (three or four points each).
    """
    report = FamilyAxiomReport(True, {a: 0 for a in ("nonempty", "identity", "inverse", "composition")})

    def fail(axiom: str, what: str) -> None:
        report.passed = False
        if sum(a == axiom for a, _ in report.counterexamples) < max_counterexamples:
            report.counterexamples.append((axiom, what))

    members = {(a, b): _members(f, samples[a], samples[b])
               for a, b in product(range(len(samples)), repeat=2)}
    for a, X in enumerate(samples):
        report.checked["identity"] += 1
        if not f(identity(X)):
            fail("identity", f"identity of sample {a} rejected")
    for (a, b), mem in members.items():
        report.checked["nonempty"] += 1
        if len(mem) == 0:
            fail("nonempty", f"no member between samples {a} and {b}")
        back = {m.tobytes() for m in members[(b, a)]}
        for m in mem:
            report.checked["inverse"] += 1
            if np.ascontiguousarray(m.T).tobytes() not in back:
                cells = [(int(i), int(j)) for i, j in zip(*np.nonzero(m))]
                fail("inverse", f"{cells} in family({a},{b}) but its inverse is not in family({b},{a})")
    k = len(samples)
    for a, b, c in product(range(k), repeat=3):
        first, second = members[(a, b)], members[(b, c)]
        if len(first) == 0 or len(second) == 0:
            continue
        comp = np.einsum("kij,ljm->klim", first.astype(np.int64), second.astype(np.int64)) > 0
        comp = comp.reshape(-1, samples[a].n, samples[c].n)
        report.checked["composition"] += len(comp)
        target = {m.tobytes() for m in members[(a, c)]}
        for m in np.unique(comp, axis=0):
            if np.ascontiguousarray(m).tobytes() not in target:
                cells = [(int(i), int(j)) for i, j in zip(*np.nonzero(m))]
                fail("composition", f"composite {cells} of samples {a}->{b}->{c} not in family({a},{c})")
    return report


def relation_to_json(sigma: Relation) -> dict:
    n, m = sigma.shape
    return {"rows": n, "cols": m, "cells": [list(c) for c in sigma.cells]}


def relation_from_json(data: dict, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Relation:
    if data.get("rows", X.n) != X.n or data.get("cols", Y.n) != Y.n:
        raise ValueError(f"relation is {data.get('rows')}x{data.get('cols')}, spaces are {X.n}x{Y.n}")
    sigma = Relation.from_cells(X, Y, (tuple(c) for c in data["cells"]))
    return sigma.as_correspondence() if sigma.is_correspondence else sigma
