"""Finite metric spaces, subsets, neighborhoods and the Hausdorff distance.

Everything here works on an explicit distance matrix. Arithmetic is limited to
``min``, ``max`` and ``abs`` over stored entries, so results are exact with
respect to the stored floats; the comparison tolerance only enters
:func:`check_metric`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "TOLERANCE",
    "MetricAxiomError",
    "Violation",
    "FiniteMetricSpace",
    "Subset",
    "check_metric",
    "validate",
    "delta1",
    "from_points",
    "random_space",
    "random_graph_space",
    "point_set_distance",
    "set_set_distance",
    "open_neighborhood",
    "closed_neighborhood",
    "hausdorff",
    "diameter",
    "scale",
]

TOLERANCE = 1e-9

POINT_METRICS = {"euclidean": "euclidean", "chebyshev": "chebyshev", "manhattan": "cityblock"}


@dataclass(frozen=True)
class Violation:
    """One failed metric axiom with the offending indices."""

    axiom: str
    witness: tuple[int, ...]
    detail: str = ""

    def __str__(self) -> str:
        idx = ",".join(str(i) for i in self.witness)
        msg = f"{self.axiom} at ({idx})"
        return f"{msg}: {self.detail}" if self.detail else msg


class MetricAxiomError(ValueError):
    """Raised when a candidate distance matrix is not a metric.

    The ``violations`` attribute lists every failed axiom, not just the first.
    """

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:10])
        more = len(self.violations) - 10
        if more > 0:
            lines += f"; ... {more} more"
        super().__init__(lines)

    @property
    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}


def check_metric(dist, tol: float = TOLERANCE) -> list[Violation]:
    """Return every metric-axiom violation of a candidate distance matrix.

    Axiom names are ``shape``, ``empty``, ``nonfinite``, ``negative``,
    ``nonzero_diagonal``, ``asymmetry``, ``pseudometric`` (a zero distance
    between distinct points) and ``triangle``. Symmetry and the diagonal are
    checked exactly; ``tol`` only slackens the triangle inequality.
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        return [Violation("shape", (), f"expected a square matrix, got shape {d.shape}")]
    n = d.shape[0]
    if n == 0:
        return [Violation("empty", (), "a metric space needs at least one point")]
    out: list[Violation] = []
    for i, j in zip(*np.nonzero(~np.isfinite(d))):
        out.append(Violation("nonfinite", (int(i), int(j)), f"value {d[i, j]}"))
    if out:
        return out
    for i in range(n):
        if d[i, i] != 0.0:
            out.append(Violation("nonzero_diagonal", (i, i), f"value {d[i, i]}"))
    for i in range(n):
        for j in range(n):
            if d[i, j] < 0.0:
                out.append(Violation("negative", (i, j), f"value {d[i, j]}"))
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] != d[j, i]:
                out.append(Violation("asymmetry", (i, j), f"{d[i, j]} != {d[j, i]}"))
            if d[i, j] == 0.0 or d[j, i] == 0.0:
                out.append(Violation("pseudometric", (i, j), "distinct points at distance 0"))
    # d[i, k] <= d[i, j] + d[j, k], vectorised over (i, k) for each j
    for j in range(n):
        bound = d[:, j][:, None] + d[j, :][None, :]
        for i, k in zip(*np.nonzero(d > bound + tol)):
            if i != j and k != j:
                out.append(
                    Violation("triangle", (int(i), j, int(k)),
                              f"{d[i, k]} > {d[i, j]} + {d[j, k]}")
                )
    return out


class FiniteMetricSpace:
    """A nonempty finite metric space given by labels and a distance matrix.

    Instances are immutable: the matrix is copied and marked read-only.
    Construction validates all metric axioms unless ``check=False``.
    """

    __slots__ = ("labels", "dist")

    def __init__(self, dist, labels: Iterable | None = None, *, check: bool = True):
        d = np.array(dist, dtype=float)
        if check:
            problems = check_metric(d)
            if problems:
                raise MetricAxiomError(problems)
        d.setflags(write=False)
        if labels is None:
            labels = [str(i) for i in range(d.shape[0])]
        labels = tuple(str(x) for x in labels)
        if len(labels) != d.shape[0]:
            raise ValueError(f"{len(labels)} labels for a {d.shape[0]}-point space")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", d)

    def __setattr__(self, name, value):
        raise AttributeError("FiniteMetricSpace is immutable")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)

    def __hash__(self) -> int:
        return hash((self.labels, self.dist.tobytes()))

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={self.n}, diam={diameter(self):g})"

    def subset(self, members: Iterable[int]) -> "Subset":
        return Subset(self, members)

    def whole(self) -> "Subset":
        return Subset(self, range(self.n))

    def submetric(self, members: Sequence[int]) -> "FiniteMetricSpace":
        """The subspace on ``members`` (in the given order) with induced metric."""
        idx = list(members)
        return FiniteMetricSpace(self.dist[np.ix_(idx, idx)],
                                 [self.labels[i] for i in idx], check=False)

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "dist": self.dist.tolist()}


class Subset:
    """A nonempty set of point indices of one :class:`FiniteMetricSpace`."""

    __slots__ = ("space", "members")

    def __init__(self, space: FiniteMetricSpace, members: Iterable[int]):
        idx = tuple(sorted({int(i) for i in members}))
        if not idx:
            raise ValueError("subsets must be nonempty")
        if idx[0] < 0 or idx[-1] >= space.n:
            raise IndexError(f"subset index out of range for a {space.n}-point space")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "members", idx)

    def __setattr__(self, name, value):
        raise AttributeError("Subset is immutable")

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i) -> bool:
        return i in self.members

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subset):
            return NotImplemented
        return self.members == other.members and (
            self.space is other.space or self.space == other.space)

    def __hash__(self) -> int:
        return hash(self.members)

    def __le__(self, other: "Subset") -> bool:
        return set(self.members) <= set(other.members)

    def __repr__(self) -> str:
        return f"Subset({list(self.members)})"


def validate(dist, labels=None, tol: float = TOLERANCE) -> FiniteMetricSpace:
    """Return a :class:`FiniteMetricSpace` or raise :class:`MetricAxiomError`.

    No repair is attempted; an asymmetric matrix is an error even if the
    mismatch is tiny.
    """
    if isinstance(dist, FiniteMetricSpace):
        labels = dist.labels if labels is None else labels
        dist = dist.dist
    problems = check_metric(dist, tol)
    if problems:
        raise MetricAxiomError(problems)
    return FiniteMetricSpace(dist, labels, check=False)


def delta1(label: str = "*") -> FiniteMetricSpace:
    """The one-point space."""
    return FiniteMetricSpace([[0.0]], [label], check=False)


def from_points(points, metric: str = "euclidean", labels=None) -> FiniteMetricSpace:
    """Build a space from coordinate vectors.

    ``metric`` is one of ``euclidean``, ``chebyshev`` or ``manhattan``.
    """
    if metric not in POINT_METRICS:
        raise ValueError(f"unknown point metric {metric!r}; choose from {sorted(POINT_METRICS)}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise MetricAxiomError([Violation("empty", (), "no points")])
    d = cdist(pts, pts, metric=POINT_METRICS[metric])
    np.fill_diagonal(d, 0.0)
    # cdist can leave 1-ulp asymmetries for some metrics
    d = np.minimum(d, d.T)
    return validate(d, labels)


def random_space(n: int, rng: np.random.Generator, dim: int = 2) -> FiniteMetricSpace:
    """Uniform random points in the unit cube with the Euclidean metric."""
    while True:
        pts = rng.random((n, dim))
        d = cdist(pts, pts)
        d = np.minimum(d, d.T)
        np.fill_diagonal(d, 0.0)
        if not check_metric(d):
            return FiniteMetricSpace(d, check=False)


def random_graph_space(n: int, rng: np.random.Generator, max_weight: int = 4) -> FiniteMetricSpace:
    """Shortest-path metric of a complete graph with random integer weights.

    Integer distances produce many ties, which makes combinatorial searches
    harder than generic Euclidean samples.
    """
    w = rng.integers(1, max_weight + 1, size=(n, n)).astype(float)
    w = np.minimum(w, w.T)
    np.fill_diagonal(w, 0.0)
    for k in range(n):
        w = np.minimum(w, w[:, k][:, None] + w[k, :][None, :])
    return FiniteMetricSpace(w, check=False)


def point_set_distance(x: int, A: Subset) -> float:
    """Distance from point ``x`` to the subset ``A``."""
    return float(A.space.dist[x, list(A.members)].min())


def set_set_distance(A: Subset, B: Subset) -> float:
    """Smallest distance between a point of ``A`` and a point of ``B``."""
    _same_space(A, B)
    return float(A.space.dist[np.ix_(A.members, B.members)].min())


def _dist_to(A: Subset) -> np.ndarray:
    return A.space.dist[:, list(A.members)].min(axis=1)


def open_neighborhood(A: Subset, r: float) -> Subset:
    """Points at distance strictly less than ``r`` from ``A``."""
    if not r > 0:
        raise ValueError("open neighborhoods need r > 0")
    return Subset(A.space, np.nonzero(_dist_to(A) < r)[0])


def closed_neighborhood(A: Subset, s: float) -> Subset:
    """Points at distance at most ``s`` from ``A``."""
    if not s >= 0:
        raise ValueError("closed neighborhoods need s >= 0")
    return Subset(A.space, np.nonzero(_dist_to(A) <= s)[0])


def hausdorff(A: Subset, B: Subset) -> float:
    """Hausdorff distance between two subsets of one space."""
    _same_space(A, B)
    block = A.space.dist[np.ix_(A.members, B.members)]
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


def diameter(X: FiniteMetricSpace) -> float:
    return float(X.dist.max())


def scale(X: FiniteMetricSpace, lam: float) -> FiniteMetricSpace:
    """Multiply all distances by ``lam``; ``lam == 0`` gives the one-point space."""
    if lam < 0:
        raise ValueError("scale factor must be nonnegative")
    if lam == 0:
        return delta1()
    return FiniteMetricSpace(X.dist * lam, X.labels, check=False)


def _same_space(A: Subset, B: Subset) -> None:
    if A.space is not B.space and A.space != B.space:
        raise ValueError("subsets belong to different spaces")
