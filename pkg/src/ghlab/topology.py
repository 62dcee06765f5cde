"""Finite topological spaces and semicontinuity of set-valued maps.

A finite topology is stored by the minimal open neighborhood of each point
(every finite topology is Alexandrov). Point sets are encoded internally as
int bitmasks: bit ``i`` set means point ``i`` is a member.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from .metric import FiniteMetricSpace
from .relations import FamilyFilter, Relation

__all__ = [
    "FiniteTopology",
    "SetValuedMap",
    "Verdict",
    "discrete_topology",
    "indiscrete_topology",
    "sierpinski",
    "from_metric",
    "all_topologies",
    "all_maps",
    "full_preimage",
    "small_preimage",
    "is_lower_semicontinuous",
    "is_upper_semicontinuous",
    "is_continuous",
    "is_lsc_pointwise",
    "is_usc_pointwise",
    "compose_sv",
    "restrict_sv",
    "FAMILY_TAGS",
    "classify_correspondence",
    "semicontinuity_filter",
    "is_open_relation",
    "is_closed_relation",
    "AuditReport",
    "projection_is_open_audit",
    "closed_graph_usc_audit",
]


def _mask(members: Iterable[int] | int) -> int:
    if isinstance(members, (int, np.integer)):
        return int(members)
    out = 0
    for i in members:
        out |= 1 << int(i)
    return out


def _members(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def _iter(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class FiniteTopology:
    """A topology on ``n`` points given by minimal open neighborhoods.

    Parameters
    ----------
    min_open : sequence of iterables of int
        ``min_open[x]`` is the smallest open set containing ``x``. It must
        contain ``x``, and ``y in min_open[x]`` must imply
        ``min_open[y] <= min_open[x]``.
    points : sequence, optional
        Labels; defaults to ``"0", "1", ...``.
    """

    def __init__(self, min_open: Sequence[Iterable[int]], points: Sequence | None = None):
        masks = tuple(_mask(m) for m in min_open)
        n = len(masks)
        if n == 0:
            raise ValueError("a finite topology needs at least one point")
        full = (1 << n) - 1
        for x, m in enumerate(masks):
            if m & ~full:
                raise ValueError(f"min_open[{x}] has indices outside 0..{n - 1}")
            if not m >> x & 1:
                raise ValueError(f"point {x} is not in its minimal neighborhood")
            for y in _iter(m):
                if masks[y] & ~m:
                    raise ValueError(
                        f"min_open[{y}] is not inside min_open[{x}] although {y} is in it")
        self.n = n
        self.min_masks = masks
        self.points = tuple(str(p) for p in (points if points is not None else range(n)))
        if len(self.points) != n:
            raise ValueError("one label per point required")

    @property
    def min_open(self) -> tuple[frozenset[int], ...]:
        return tuple(_members(m) for m in self.min_masks)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteTopology) and self.min_masks == other.min_masks

    def __hash__(self) -> int:
        return hash(self.min_masks)

    def __repr__(self) -> str:
        return f"FiniteTopology({[sorted(s) for s in self.min_open]})"

    def is_open(self, members: Iterable[int] | int) -> bool:
        m = _mask(members)
        return all(self.min_masks[x] & ~m == 0 for x in _iter(m))

    def is_closed(self, members: Iterable[int] | int) -> bool:
        return self.is_open(self.full & ~_mask(members))

    def open_hull(self, members: Iterable[int] | int) -> int:
        """Smallest open set containing ``members`` (as a mask)."""
        out = 0
        for x in _iter(_mask(members)):
            out |= self.min_masks[x]
        return out

    def closure(self, members: Iterable[int] | int) -> int:
        m = _mask(members)
        return sum(1 << x for x in range(self.n) if self.min_masks[x] & m)

    @cached_property
    def opens(self) -> tuple[int, ...]:
        """Every open set as a mask: all unions of minimal neighborhoods."""
        found = {0}
        for m in self.min_masks:
            found |= {u | m for u in found}
        return tuple(sorted(found))

    @cached_property
    def closeds(self) -> tuple[int, ...]:
        return tuple(sorted(self.full & ~u for u in self.opens))

    @cached_property
    def is_discrete(self) -> bool:
        return all(m == 1 << x for x, m in enumerate(self.min_masks))

    @cached_property
    def is_hausdorff(self) -> bool:
        """Distinct points have disjoint neighborhoods."""
        return all(not self.min_masks[x] & self.min_masks[y]
                   for x in range(self.n) for y in range(x + 1, self.n))

    def subspace(self, members: Iterable[int]) -> "FiniteTopology":
        """Subspace topology on ``members``, re-indexed in increasing order."""
        idx = sorted(set(int(i) for i in members))
        if not idx:
            raise ValueError("subspace needs at least one point")
        pos = {x: k for k, x in enumerate(idx)}
        sub = [[pos[y] for y in _iter(self.min_masks[x]) if y in pos] for x in idx]
        return FiniteTopology(sub, [self.points[x] for x in idx])

    def product(self, other: "FiniteTopology") -> "FiniteTopology":
        """Product topology; point ``(x, y)`` gets index ``x * other.n + y``."""
        m = other.n
        mins = []
        for x, y in product(range(self.n), range(m)):
            mins.append([a * m + b for a in _iter(self.min_masks[x]) for b in _iter(other.min_masks[y])])
        return FiniteTopology(mins, [f"({p},{q})" for p, q in product(self.points, other.points)])

    def to_json(self) -> dict:
        return {"points": list(self.points), "min_open": [sorted(s) for s in self.min_open]}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteTopology":
        return cls(data["min_open"], data.get("points"))


def discrete_topology(n: int, points=None) -> FiniteTopology:
    return FiniteTopology([[x] for x in range(n)], points)


def indiscrete_topology(n: int) -> FiniteTopology:
    return FiniteTopology([range(n)] * n)


def sierpinski() -> FiniteTopology:
    """Points ``a`` (open) and ``b`` (whose only neighborhood is everything)."""
    return FiniteTopology([[0], [0, 1]], ["a", "b"])


def from_metric(X: FiniteMetricSpace) -> FiniteTopology:
    """Topology induced by a finite metric, which is always discrete."""
    return discrete_topology(X.n, X.labels)


@lru_cache(maxsize=None)
def all_topologies(n: int) -> tuple[FiniteTopology, ...]:
    """Every topology on the labelled set ``{0, ..., n-1}``."""
    choices = [[(1 << x) | s for s in range(1 << n) if not s >> x & 1] for x in range(n)]
    out = []
    for masks in product(*choices):
        try:
            out.append(FiniteTopology(masks))
        except ValueError:
            continue
    return tuple(out)


class SetValuedMap:
    """A map assigning a nonempty set of target points to every source point."""

    def __init__(self, source: FiniteTopology, target: FiniteTopology,
                 image: Sequence[Iterable[int] | int]):
        masks = tuple(_mask(s) for s in image)
        if len(masks) != source.n:
            raise ValueError(f"{len(masks)} images for {source.n} source points")
        for x, m in enumerate(masks):
            if m == 0:
                raise ValueError(f"image of point {x} is empty")
            if m & ~target.full:
                raise ValueError(f"image of point {x} has indices outside the target")
        self.source = source
        self.target = target
        self.masks = masks

    @classmethod
    def from_relation(cls, R: Relation | np.ndarray, source: FiniteTopology,
                      target: FiniteTopology) -> "SetValuedMap":
        inc = np.asarray(R.incidence if isinstance(R, Relation) else R, dtype=bool)
        return cls(source, target, [np.nonzero(row)[0] for row in inc])

    def image(self, x: int) -> frozenset[int]:
        return _members(self.masks[x])

    @property
    def images(self) -> tuple[frozenset[int], ...]:
        return tuple(_members(m) for m in self.masks)

    def graph(self) -> np.ndarray:
        g = np.zeros((self.source.n, self.target.n), dtype=bool)
        for x, m in enumerate(self.masks):
            g[x, list(_iter(m))] = True
        return g

    def inverse(self) -> "SetValuedMap":
        """Inverse relation as a map; requires the map to be surjective."""
        return SetValuedMap.from_relation(self.graph().T, self.target, self.source)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SetValuedMap) and self.masks == other.masks
                and self.source == other.source and self.target == other.target)

    def __repr__(self) -> str:
        return f"SetValuedMap({[sorted(s) for s in self.images]})"

    def to_json(self) -> dict:
        return {"image": [sorted(s) for s in self.images]}

    @classmethod
    def from_json(cls, data: dict, source: FiniteTopology, target: FiniteTopology) -> "SetValuedMap":
        return cls(source, target, data["image"])


def all_maps(source: FiniteTopology, target: FiniteTopology):
    """Yield every set-valued map ``source -> target``."""
    nonempty = range(1, 1 << target.n)
    for images in product(nonempty, repeat=source.n):
        yield SetValuedMap(source, target, images)


def _full_pre(f: SetValuedMap, d: int) -> int:
    return sum(1 << x for x, m in enumerate(f.masks) if m & d)


def _small_pre(f: SetValuedMap, d: int) -> int:
    return sum(1 << x for x, m in enumerate(f.masks) if not m & ~d)


def full_preimage(f: SetValuedMap, D: Iterable[int] | int) -> frozenset[int]:
    """Points whose image meets ``D``."""
    return _members(_full_pre(f, _mask(D)))


def small_preimage(f: SetValuedMap, D: Iterable[int] | int) -> frozenset[int]:
    """Points whose image lies inside ``D``."""
    return _members(_small_pre(f, _mask(D)))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a semicontinuity check, with a counterexample on failure."""

    holds: bool
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.holds


def is_lower_semicontinuous(f: SetValuedMap) -> Verdict:
    """Full preimage of every open set is open.

    On failure the witness names the open set ``U`` and a point of the
    preimage whose minimal neighborhood leaves the preimage.
    """
    src = f.source
    for u in f.target.opens:
        pre = _full_pre(f, u)
        for x in _iter(pre):
            if src.min_masks[x] & ~pre:
                return Verdict(False, {"open_set": sorted(_members(u)),
                                       "preimage": sorted(_members(pre)), "point": x})
    return Verdict(True)


def is_upper_semicontinuous(f: SetValuedMap) -> Verdict:
    """Full preimage of every closed set is closed.

    On failure the witness names the closed set ``W`` and a point of the
    preimage's closure that is missing from the preimage.
    """
    src = f.source
    if src.is_discrete:
        return Verdict(True)
    for w in f.target.closeds:
        pre = _full_pre(f, w)
        missing = src.closure(pre) & ~pre
        if missing:
            x = next(_iter(missing))
            return Verdict(False, {"closed_set": sorted(_members(w)),
                                   "preimage": sorted(_members(pre)), "point": x})
    return Verdict(True)


def is_continuous(f: SetValuedMap) -> Verdict:
    lower = is_lower_semicontinuous(f)
    if not lower:
        return Verdict(False, {"lower": lower.witness})
    upper = is_upper_semicontinuous(f)
    if not upper:
        return Verdict(False, {"upper": upper.witness})
    return Verdict(True)


def _neighborhoods(top: FiniteTopology, x: int) -> list[int]:
    return [v for v in top.opens if v >> x & 1]


def is_lsc_pointwise(f: SetValuedMap) -> Verdict:
    """Neighborhood definition, brute force over every open set and neighborhood."""
    for x in range(f.source.n):
        nbhds = _neighborhoods(f.source, x)
        for u in f.target.opens:
            if not f.masks[x] & u:
                continue
            if not any(all(f.masks[x2] & u for x2 in _iter(v)) for v in nbhds):
                return Verdict(False, {"point": x, "open_set": sorted(_members(u))})
    return Verdict(True)


def is_usc_pointwise(f: SetValuedMap) -> Verdict:
    """Neighborhood definition, brute force over every open set and neighborhood."""
    for x in range(f.source.n):
        nbhds = _neighborhoods(f.source, x)
        for u in f.target.opens:
            if f.masks[x] & ~u:
                continue
            if not any(all(not f.masks[x2] & ~u for x2 in _iter(v)) for v in nbhds):
                return Verdict(False, {"point": x, "open_set": sorted(_members(u))})
    return Verdict(True)


def compose_sv(f: SetValuedMap, g: SetValuedMap) -> SetValuedMap:
    """``g o f``: a point goes to the union of ``g`` over its ``f``-image."""
    if f.target != g.source:
        raise ValueError("composition needs f.target == g.source")
    images = []
    for m in f.masks:
        out = 0
        for y in _iter(m):
            out |= g.masks[y]
        images.append(out)
    return SetValuedMap(f.source, g.target, images)


def restrict_sv(f: SetValuedMap, Z: Iterable[int]) -> SetValuedMap:
    """Restriction to source points ``Z`` with the subspace topology."""
    idx = sorted(set(int(i) for i in Z))
    return SetValuedMap(f.source.subspace(idx), f.target, [f.masks[x] for x in idx])


FAMILY_TAGS = ("all", "us", "ls", "rc")


def classify_correspondence(R: Relation | np.ndarray, top_x: FiniteTopology,
                            top_y: FiniteTopology) -> frozenset[str]:
    """Families among ``all``, ``us``, ``ls``, ``rc`` that contain ``R``.

    ``us``/``ls``/``rc`` require ``R`` and its inverse to be upper
    semicontinuous / lower semicontinuous / continuous. ``rc`` is computed
    from the continuity decider on its own, not as ``us and ls``.
    """
    inc = np.asarray(R.incidence if isinstance(R, Relation) else R, dtype=bool)
    if not (inc.any(axis=1).all() and inc.any(axis=0).all()):
        return frozenset()
    fwd = SetValuedMap.from_relation(inc, top_x, top_y)
    back = SetValuedMap.from_relation(inc.T, top_y, top_x)
    out = {"all"}
    if is_upper_semicontinuous(fwd) and is_upper_semicontinuous(back):
        out.add("us")
    if is_lower_semicontinuous(fwd) and is_lower_semicontinuous(back):
        out.add("ls")
    if is_continuous(fwd) and is_continuous(back):
        out.add("rc")
    return frozenset(out)


def semicontinuity_filter(tag: str,
                          topology_of: Callable[[FiniteMetricSpace], FiniteTopology] = from_metric,
                          shortcut: bool = True) -> FamilyFilter:
    """Family filter for ``all``/``us``/``ls``/``rc`` over topologized metric spaces.

    ``topology_of`` attaches a topology to each metric space (the metric one,
    i.e. discrete, by default). With ``shortcut`` the filter declares itself
    trivial when both topologies are discrete, since then every set-valued
    map is continuous.
    """
    if tag not in FAMILY_TAGS:
        raise ValueError(f"unknown family {tag!r}; choose from {FAMILY_TAGS}")

    def member(R: Relation) -> bool:
        return tag in classify_correspondence(R, topology_of(R.source), topology_of(R.target))

    def trivial(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> bool:
        return tag == "all" or (topology_of(X).is_discrete and topology_of(Y).is_discrete)

    return FamilyFilter(tag, member, trivial if shortcut else None)


def _relation_mask(inc: np.ndarray) -> int:
    return _mask(np.flatnonzero(np.asarray(inc, dtype=bool).ravel()))


def is_open_relation(R: Relation | np.ndarray, top_x: FiniteTopology, top_y: FiniteTopology) -> bool:
    """Is the relation an open subset of the product ``X x Y``?"""
    inc = np.asarray(R.incidence if isinstance(R, Relation) else R, dtype=bool)
    return top_x.product(top_y).is_open(_relation_mask(inc))


def is_closed_relation(R: Relation | np.ndarray, top_x: FiniteTopology, top_y: FiniteTopology) -> bool:
    inc = np.asarray(R.incidence if isinstance(R, Relation) else R, dtype=bool)
    return top_x.product(top_y).is_closed(_relation_mask(inc))


@dataclass
class AuditReport:
    name: str
    checked: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def projection_is_open_audit(top_x: FiniteTopology, top_y: FiniteTopology) -> AuditReport:
    """Check that projecting each open set of ``X x Y`` onto ``X`` gives an open set."""
    prod = top_x.product(top_y)
    m = top_y.n
    report = AuditReport("projection_open")
    for u in prod.opens:
        proj = 0
        for c in _iter(u):
            proj |= 1 << (c // m)
        report.checked += 1
        if not top_x.is_open(proj):
            report.counterexamples.append({"open_set": sorted(_members(u)),
                                           "projection": sorted(_members(proj))})
    return report


def closed_graph_usc_audit(top_x: FiniteTopology, top_y: FiniteTopology) -> AuditReport:
    """Every map out of a Hausdorff space with closed graph is upper semicontinuous.

    Finite spaces are compact, so the only hypothesis left to check is that
    ``top_x`` is Hausdorff; a non-Hausdorff source raises ``ValueError``.
    """
    if not top_x.is_hausdorff:
        raise ValueError("closed-graph audit needs a Hausdorff source topology")
    prod = top_x.product(top_y)
    report = AuditReport("closed_graph_usc")
    for f in all_maps(top_x, top_y):
        if not prod.is_closed(_relation_mask(f.graph())):
            continue
        report.checked += 1
        verdict = is_upper_semicontinuous(f)
        if not verdict:
            report.counterexamples.append({"map": [sorted(s) for s in f.images],
                                           "witness": verdict.witness})
    return report
