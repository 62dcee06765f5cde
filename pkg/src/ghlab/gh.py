"""Exact Gromov-Hausdorff distance between finite metric spaces.

The distance is half the smallest distortion of a correspondence. Every
distortion is one of the finitely many numbers ``|d_X(i, k) - d_Y(j, l)|``,
so :func:`gh_exact` binary-searches that candidate set and answers each
"is there a correspondence with distortion <= v" question with an exact
backtracking search over cells of ``X x Y`` encoded as Python-int bitsets.

:func:`gh_oracle` is an independent brute-force check that enumerates every
correspondence when ``|X| * |Y| <= 16``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .metric import FiniteMetricSpace, diameter, scale
from .relations import (
    ALL,
    Correspondence,
    FamilyFilter,
    compose,
    correspondence_masks,
    distortion,
    full_relation,
    inverse,
    relation_to_json,
)

__all__ = [
    "DEFAULT_BUDGET",
    "ORACLE_MAX_CELLS",
    "GHResult",
    "default_budget",
    "pair_mismatch",
    "candidate_values",
    "gh_bounds",
    "gh_feasible",
    "gh_exact",
    "gh_oracle",
    "greedy_correspondence",
    "TriangleReport",
    "triangle_audit",
    "GeodesicTable",
    "geodesic_probe",
]

DEFAULT_BUDGET = 64
ORACLE_MAX_CELLS = 16
EXACT, LOWER, UPPER = "exact", "lower_bound", "upper_bound"


def default_budget() -> int:
    """Exact-mode cell budget ``|X|*|Y|``; ``GHLAB_BUDGET`` overrides the default."""
    raw = os.environ.get("GHLAB_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class GHResult:
    """Distance value with its certificate and bound status.

    For ``status == "exact"`` the certificate attains ``2 * value``. Otherwise
    ``value`` is a bound of the named kind and ``lower``/``upper`` hold every
    bound that was computed.
    """

    value: float
    status: str
    family: str = "all"
    certificate: Correspondence | None = None
    lower: float | None = None
    upper: float | None = None

    @property
    def is_exact(self) -> bool:
        return self.status == EXACT

    def to_json(self) -> dict:
        out = {
            "value": self.value,
            "status": self.status,
            "family": self.family,
            "certificate": relation_to_json(self.certificate) if self.certificate is not None else None,
        }
        if self.lower is not None:
            out["lower"] = self.lower
        if self.upper is not None:
            out["upper"] = self.upper
        return out


def pair_mismatch(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> np.ndarray:
    """Matrix ``M[(i,j), (k,l)] = | |x_i x_k| - |y_j y_l| |`` over cells ``i*|Y| + j``."""
    n, m = X.n, Y.n
    diff = X.dist[:, None, :, None] - Y.dist[None, :, None, :]
    return np.abs(diff).reshape(n * m, n * m)


def candidate_values(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> np.ndarray:
    """Sorted distinct values any distortion of a relation ``X <-> Y`` can take."""
    return np.unique(pair_mismatch(X, Y))


def gh_bounds(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> tuple[float, float]:
    """Diameter bounds ``(|diam X - diam Y| / 2, max(diam X, diam Y) / 2)``."""
    a, b = diameter(X), diameter(Y)
    return abs(a - b) / 2, max(a, b) / 2


# -- bitset feasibility search ------------------------------------------------


def _bits(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Search:
    """Cell-compatibility bitsets for one pair of spaces and one threshold."""

    def __init__(self, X: FiniteMetricSpace, Y: FiniteMetricSpace, mismatch: np.ndarray, v: float):
        self.n, self.m = n, m = X.n, Y.n
        ok = mismatch <= v
        self.compat = [_bits(ok[c]) for c in range(n * m)]
        cell_rows = np.arange(n * m) // m
        cell_cols = np.arange(n * m) % m
        self.row_mask = [_bits(cell_rows == i) for i in range(n)]
        self.col_mask = [_bits(cell_cols == j) for j in range(m)]
        self.lines = self.row_mask + self.col_mask
        # eccentric points first: their cells are the most constrained
        ecc = np.concatenate([X.dist.max(axis=1), Y.dist.max(axis=1)])
        self.line_order = sorted(range(n + m), key=lambda k: (-ecc[k], k))

    def prune(self, allowed: int) -> int:
        """Drop cells that cannot coexist with some cell in every row and column."""
        changed = True
        while changed:
            changed = False
            for c in _iter_bits(allowed):
                reach = allowed & self.compat[c]
                if any(not reach & line for line in self.lines):
                    allowed &= ~(1 << c)
                    changed = True
        return allowed

    def solve(self, allowed: int) -> int | None:
        allowed = self.prune(allowed)
        if any(not allowed & line for line in self.lines):
            return None
        return self._dfs(allowed, 0, tuple(self.line_order))

    def _dfs(self, allowed: int, chosen: int, open_lines: tuple[int, ...]) -> int | None:
        if not open_lines:
            return chosen
        best, best_count = -1, None
        for k in open_lines:
            count = (allowed & self.lines[k]).bit_count()
            if count == 0:
                return None
            if best_count is None or count < best_count:
                best, best_count = k, count
                if count == 1:
                    break
        options = list(_iter_bits(allowed & self.lines[best]))
        options.sort(key=lambda c: -(allowed & self.compat[c]).bit_count())
        n = self.n
        for c in options:
            row, col = divmod(c, self.m)
            rest = tuple(k for k in open_lines if k != row and k != n + col)
            sub = allowed & self.compat[c]
            if any(not sub & self.lines[k] for k in rest):
                continue
            found = self._dfs(sub, chosen | (1 << c), rest)
            if found is not None:
                return found
        return None

    def enumerate(self, allowed: int):
        """Yield every correspondence (as a cell bitset) inside ``allowed``."""
        allowed = self.prune(allowed)
        if any(not allowed & line for line in self.lines):
            return
        total = self.n * self.m
        suffix = [0] * (total + 1)
        for c in range(total - 1, -1, -1):
            suffix[c] = suffix[c + 1] | (1 << c)
        lines = self.lines

        def rec(c: int, allowed: int, chosen: int):
            avail = allowed & suffix[c]
            for line in lines:
                if not chosen & line and not avail & line:
                    return
            if c == total:
                yield chosen
                return
            if allowed >> c & 1:
                yield from rec(c + 1, allowed & self.compat[c], chosen | (1 << c))
            yield from rec(c + 1, allowed & ~(1 << c), chosen)

        yield from rec(0, allowed, 0)


def _to_corr(X, Y, cells: int) -> Correspondence:
    flat = np.array([(cells >> c) & 1 for c in range(X.n * Y.n)], dtype=bool)
    return Correspondence(X, Y, flat.reshape(X.n, Y.n))


def _feasible(X, Y, mismatch, v, family: FamilyFilter) -> Correspondence | None:
    search = _Search(X, Y, mismatch, v)
    everything = (1 << (X.n * Y.n)) - 1
    if family.is_trivial_on(X, Y):
        cells = search.solve(everything)
        return None if cells is None else _to_corr(X, Y, cells)
    for cells in search.enumerate(everything):
        R = _to_corr(X, Y, cells)
        if family(R):
            return R
    return None


def gh_feasible(X: FiniteMetricSpace, Y: FiniteMetricSpace, v: float,
                family: FamilyFilter = ALL) -> Correspondence | None:
    """A correspondence in ``family`` with distortion at most ``v``, or ``None``."""
    if v < 0:
        raise ValueError("threshold must be nonnegative")
    return _feasible(X, Y, pair_mismatch(X, Y), v, family)


# -- optimisation -------------------------------------------------------------


def greedy_correspondence(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Correspondence:
    """Cheap correspondence for upper bounds on large inputs.

    Rows are added in decreasing eccentricity, each to the column with the
    smallest distortion increase, then uncovered columns are patched the
    same way.
    """
    n, m = X.n, Y.n
    inc = np.zeros((n, m), dtype=bool)
    cost = np.zeros((n, m))

    def add(i: int, j: int) -> None:
        nonlocal cost
        inc[i, j] = True
        cost = np.maximum(cost, np.abs(X.dist[:, i][:, None] - Y.dist[:, j][None, :]))

    x_order = np.argsort(-X.dist.max(axis=1), kind="stable")
    y_ecc = Y.dist.max(axis=1)
    first = x_order[0]
    add(first, int(np.argmin(np.abs(y_ecc - X.dist[first].max()))))
    for i in x_order[1:]:
        add(int(i), int(np.argmin(cost[i])))
    for j in range(m):
        if not inc[:, j].any():
            add(int(np.argmin(cost[:, j])), j)
    return Correspondence(X, Y, inc)


def _canonical(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> bool:
    """True when ``(X, Y)`` is already in canonical argument order."""
    kx = (X.n, X.dist.tobytes(), X.labels)
    ky = (Y.n, Y.dist.tobytes(), Y.labels)
    return kx <= ky


def _family_swapped(family: FamilyFilter) -> FamilyFilter:
    if family.accepts_all is None:
        accepts = None
    else:
        accepts = lambda A, B: family.accepts_all(B, A)  # noqa: E731
    return FamilyFilter(family.tag, lambda R: family(inverse(R)), accepts)


def _bounds_only(X, Y, family: FamilyFilter) -> GHResult:
    lo, hi = gh_bounds(X, Y)
    cert = None
    if family.is_trivial_on(X, Y):
        cert = greedy_correspondence(X, Y)
    elif family(full_relation(X, Y)):
        cert = full_relation(X, Y)
    if cert is not None:
        hi = min(hi, distortion(cert) / 2)
    else:
        hi = math.inf
    return GHResult(hi, UPPER, family.tag, cert, lower=lo, upper=hi)


def gh_exact(X: FiniteMetricSpace, Y: FiniteMetricSpace, family: FamilyFilter = ALL,
             budget: int | None = None) -> GHResult:
    """Gromov-Hausdorff distance over the correspondences accepted by ``family``.

    Parameters
    ----------
    X, Y : FiniteMetricSpace
    family : FamilyFilter
        Restricts the admissible correspondences; the default admits all.
    budget : int, optional
        Largest ``|X|*|Y|`` solved exactly. Larger inputs get a labelled
        ``upper_bound`` result carrying the diameter lower bound. Defaults to
        :func:`default_budget`.

    Returns
    -------
    GHResult
        With ``status == "exact"`` the value is half the minimum distortion
        and ``certificate`` attains it. ``value`` is ``inf`` when the family
        has no member between ``X`` and ``Y``.
    """
    budget = default_budget() if budget is None else budget
    if not _canonical(X, Y):
        res = gh_exact(Y, X, _family_swapped(family), budget)
        cert = inverse(res.certificate) if res.certificate is not None else None
        return GHResult(res.value, res.status, family.tag, cert, res.lower, res.upper)
    if X.n * Y.n > budget:
        return _bounds_only(X, Y, family)

    mismatch = pair_mismatch(X, Y)
    values = np.unique(mismatch)
    lo_bound = abs(diameter(X) - diameter(Y))
    values = values[values >= lo_bound]
    lo, hi = 0, len(values) - 1
    best = _feasible(X, Y, mismatch, values[hi], family)
    if best is None:
        return GHResult(math.inf, EXACT, family.tag, None)
    hi = int(np.searchsorted(values, distortion(best)))
    if hi > 0:
        # the diameter bound is tight surprisingly often; try it first
        found = _feasible(X, Y, mismatch, values[0], family)
        if found is not None:
            best, hi = found, 0
        else:
            lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        found = _feasible(X, Y, mismatch, values[mid], family)
        if found is None:
            lo = mid + 1
        else:
            best = found
            hi = int(np.searchsorted(values, distortion(found)))
    value = distortion(best) / 2
    return GHResult(value, EXACT, family.tag, best)


def gh_oracle(X: FiniteMetricSpace, Y: FiniteMetricSpace, family: FamilyFilter = ALL) -> GHResult:
    """Brute-force distance: enumerate every correspondence.

    Limited to ``|X| * |Y| <= 16`` (4 x 4, or 5 x 3).
    """
    if X.n * Y.n > ORACLE_MAX_CELLS:
        raise ValueError(f"oracle supports at most {ORACLE_MAX_CELLS} cells, got {X.n} x {Y.n}")
    masks = correspondence_masks(X.n, Y.n)
    flat = masks.reshape(len(masks), -1)
    mismatch = pair_mismatch(X, Y)
    dis = np.zeros(len(masks))
    for c in range(flat.shape[1]):
        rows = flat[:, c]
        part = np.where(flat, mismatch[c][None, :], 0.0).max(axis=1)
        dis = np.where(rows, np.maximum(dis, part), dis)
    for k in np.argsort(dis, kind="stable"):
        R = Correspondence(X, Y, masks[k])
        if family(R):
            return GHResult(float(dis[k]) / 2, EXACT, family.tag, R)
    return GHResult(math.inf, EXACT, family.tag, None)


# -- audits -------------------------------------------------------------------


@dataclass
class TriangleReport:
    d_xy: float
    d_yz: float
    d_xz: float
    composite_distortion: float | None
    tol: float = 1e-9

    @property
    def holds(self) -> bool:
        return self.d_xz <= self.d_xy + self.d_yz + self.tol

    @property
    def composite_bounds(self) -> bool:
        """The composite certificate is a valid upper witness for ``d(X, Z)``."""
        if self.composite_distortion is None:
            return True
        return self.composite_distortion + self.tol >= 2 * self.d_xz

    @property
    def slack(self) -> float:
        return self.d_xy + self.d_yz - self.d_xz


def triangle_audit(X: FiniteMetricSpace, Y: FiniteMetricSpace, Z: FiniteMetricSpace,
                   family: FamilyFilter = ALL,
                   solver: Callable[..., GHResult] = gh_exact,
                   tol: float = 1e-9) -> TriangleReport:
    """Compute the three pairwise distances and the distortion of the composed certificate."""
    xy = solver(X, Y, family)
    yz = solver(Y, Z, family)
    xz = solver(X, Z, family)
    comp = None
    if xy.certificate is not None and yz.certificate is not None:
        comp = distortion(compose(xy.certificate, yz.certificate))
    return TriangleReport(xy.value, yz.value, xz.value, comp, tol)


@dataclass
class GeodesicTable:
    diam: float
    rows: list[tuple[float, float, float, float]] = field(default_factory=list)
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return all(abs(value - expected) <= self.tol for _, _, value, expected in self.rows)

    def lookup(self, s: float, t: float) -> float:
        for a, b, value, _ in self.rows:
            if (a, b) == (s, t):
                return value
        raise KeyError((s, t))


def geodesic_probe(X: FiniteMetricSpace, grid: Sequence[float], family: FamilyFilter = ALL,
                   tol: float = 1e-9, budget: int | None = None) -> GeodesicTable:
    """Distances between rescalings ``t X`` for every pair ``s <= t`` in ``grid``.

    Along the curve ``t -> t X`` the distance between ``s X`` and ``t X`` is
    ``(t - s) * diam X / 2``; each row records ``(s, t, value, expected)``.
    """
    ts = sorted(set(float(t) for t in grid))
    if ts and (ts[0] < 0 or ts[-1] > 1):
        raise ValueError("grid values must lie in [0, 1]")
    diam = diameter(X)
    spaces = {t: scale(X, t) for t in ts}
    table = GeodesicTable(diam, tol=tol)
    for a, s in enumerate(ts):
        for t in ts[a:]:
            res = gh_exact(spaces[s], spaces[t], family, budget)
            table.rows.append((s, t, res.value, (t - s) * diam / 2))
    return table
