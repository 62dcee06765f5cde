"""Property suite: every invariant of every module as a seeded, self-checking run.

Each check returns ``(passed, detail)``. :func:`run_suite` executes them in a
fixed order and is what ``ghlab suite`` prints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable

import numpy as np

from . import gh, metric, relations as rel, sampling, topology as top

__all__ = ["PropertyResult", "CHECKS", "run_suite"]

CHECKS: list[tuple[str, str, Callable[[np.random.Generator], tuple[bool, str]]]] = []


def check(module: str, name: str):
    def register(fn):
        CHECKS.append((module, name, fn))
        return fn
    return register


@dataclass
class PropertyResult:
    module: str
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.module}.{self.name}: {self.detail}"


def _pool(rng, count: int, lo: int, hi: int) -> list[metric.FiniteMetricSpace]:
    out = []
    for k in range(count):
        gen = metric.random_space if k % 2 else metric.random_graph_space
        out.append(gen(int(rng.integers(lo, hi + 1)), rng))
    return out


def _subsets(n: int):
    for r in range(1, n + 1):
        yield from combinations(range(n), r)


# -- metric_core ---------------------------------------------------------------


@check("metric_core", "definition1_equivalence")
def _def1(rng):
    count = 0
    for X in _pool(rng, 10, 2, 6):
        radii = np.unique(X.dist)
        for a, b in combinations(list(_subsets(X.n))[:20], 2):
            A, B = X.subset(a), X.subset(b)
            h = metric.hausdorff(A, B)
            # open form: smallest candidate c such that radius just above c works
            opened = min(c for c in radii
                         if set(A) <= set(metric.open_neighborhood(B, np.nextafter(c, math.inf)))
                         and set(B) <= set(metric.open_neighborhood(A, np.nextafter(c, math.inf))))
            closed = min(c for c in radii
                         if set(A) <= set(metric.closed_neighborhood(B, c))
                         and set(B) <= set(metric.closed_neighborhood(A, c)))
            count += 1
            if not h == opened == closed:
                return False, f"{a} vs {b}: {h}, {opened}, {closed}"
    return True, f"{count} subset pairs"


@check("metric_core", "hausdorff_is_metric")
def _hmetric(rng):
    count = 0
    for X in _pool(rng, 4, 6, 6):
        subs = [X.subset(s) for s in _subsets(X.n)]
        pick = rng.choice(len(subs), size=14, replace=False)
        chosen = [subs[i] for i in pick]
        for A, B in product(chosen, repeat=2):
            if metric.hausdorff(A, B) != metric.hausdorff(B, A):
                return False, "asymmetric"
            if (metric.hausdorff(A, B) == 0) != (A == B):
                return False, "indiscernibles"
        for A, B, C in product(chosen, repeat=3):
            count += 1
            if metric.hausdorff(A, C) > metric.hausdorff(A, B) + metric.hausdorff(B, C) + metric.TOLERANCE:
                return False, f"triangle {A} {B} {C}"
    return True, f"{count} triples"


@check("metric_core", "neighborhood_monotone")
def _nbhd(rng):
    count = 0
    for X in _pool(rng, 6, 2, 6):
        for small in _subsets(X.n):
            big = sorted(set(small) | {int(rng.integers(X.n))})
            A, B = X.subset(small), X.subset(big)
            for r in np.unique(X.dist)[1:]:
                count += 1
                if not (set(metric.open_neighborhood(A, r)) <= set(metric.open_neighborhood(B, r))
                        and set(metric.closed_neighborhood(A, r)) <= set(metric.closed_neighborhood(B, r))):
                    return False, f"{small} in {big}, r={r}"
    return True, f"{count} cases"


@check("metric_core", "scale_composes")
def _scale(rng):
    X = metric.random_graph_space(6, rng)
    for lam, mu in [(0.5, 2.0), (2.0, 4.0), (0.25, 8.0)]:
        if not np.array_equal(metric.scale(metric.scale(X, lam), mu).dist, metric.scale(X, lam * mu).dist):
            return False, f"lambda={lam}, mu={mu}"
    return True, "power-of-two factors compose exactly"


# -- relations -----------------------------------------------------------------


def _all_relations(n: int, m: int) -> np.ndarray:
    codes = np.arange(1, 1 << (n * m))
    return ((codes[:, None] >> np.arange(n * m)) & 1).astype(bool).reshape(-1, n, m)


@check("relations", "distortion_monotone")
def _mono(rng):
    X, Y = metric.random_graph_space(3, rng), metric.random_space(3, rng)
    masks = _all_relations(3, 3)
    dis = np.array([rel.distortion(rel.Relation(X, Y, m)) for m in masks])
    flat = masks.reshape(len(masks), -1)
    pairs = 0
    for k in range(len(masks)):
        sub = np.all(~flat | flat[k], axis=1)
        pairs += int(sub.sum())
        if np.any(dis[sub] > dis[k]):
            return False, f"superset {masks[k].astype(int).tolist()}"
    return True, f"{pairs} nested pairs over all 3x3 relations"


@check("relations", "distortion_subadditive")
def _subadd(rng):
    count = 0
    for _ in range(200):
        X, Y, Z = (metric.random_graph_space(4, rng) for _ in range(3))
        s = _random_corr(X, Y, rng)
        t = _random_corr(Y, Z, rng)
        count += 1
        if rel.distortion(rel.compose(s, t)) > rel.distortion(s) + rel.distortion(t) + metric.TOLERANCE:
            return False, f"{s} then {t}"
    return True, f"{count} random triples"


def _random_corr(X, Y, rng, density: float = 0.3) -> rel.Correspondence:
    inc = rng.random((X.n, Y.n)) < density
    inc[np.arange(X.n), rng.integers(Y.n, size=X.n)] = True
    inc[rng.integers(X.n, size=Y.n), np.arange(Y.n)] = True
    return rel.Correspondence(X, Y, inc)


@check("relations", "inverse_invariance")
def _inv(rng):
    for _ in range(100):
        X, Y = metric.random_space(5, rng), metric.random_graph_space(5, rng)
        inc = rng.random((5, 5)) < 0.4
        inc[0, 0] = True
        s = rel.Relation(X, Y, inc)
        if rel.distortion(rel.inverse(s)) != rel.distortion(s):
            return False, str(s)
    return True, "100 random 5x5 relations"


@check("relations", "zero_distortion_iff_isometry")
def _iso(rng):
    pool = [metric.random_graph_space(3, rng, max_weight=2) for _ in range(8)]
    count = 0
    for X, Y in product(pool, repeat=2):
        for R in rel.enumerate_correspondences(X, Y):
            count += 1
            if (rel.distortion(R) == 0) != rel.is_isometry_graph(R):
                return False, str(R)
    return True, f"{count} correspondences"


@check("relations", "epsilon_limit")
def _eps(rng):
    for _ in range(50):
        X, Y = metric.random_space(5, rng), metric.random_space(5, rng)
        s = _random_corr(X, Y, rng)
        floor = min(X.dist[X.dist > 0].min(), Y.dist[Y.dist > 0].min())
        if rel.epsilon_thicken(s, floor / 2) != s:
            return False, f"thickening below {floor / 2} changed {s}"
        prev = math.inf
        for eps in sorted(np.unique(np.concatenate([X.dist.ravel(), Y.dist.ravel()]))[1:], reverse=True):
            d = rel.distortion(rel.epsilon_thicken(s, eps))
            if d > prev or d < rel.distortion(s):
                return False, "not monotone"
            prev = d
    return True, "50 random 5x5 correspondences"


# -- gh_solver -----------------------------------------------------------------


@check("gh_solver", "pseudometric_axioms")
def _pseudo(rng):
    pool = _pool(rng, 12, 1, 4)
    count = 0
    for X in pool:
        if gh.gh_exact(X, X).value != 0:
            return False, "d(X, X) != 0"
    for _ in range(60):
        X, Y, Z = (pool[i] for i in rng.integers(len(pool), size=3))
        if gh.gh_exact(X, Y).value != gh.gh_exact(Y, X).value:
            return False, "asymmetric"
        report = gh.triangle_audit(X, Y, Z)
        count += 1
        if not (report.holds and report.composite_bounds):
            return False, f"triangle {report}"
    return True, f"{count} triples"


@check("gh_solver", "scaling")
def _scaling(rng):
    for _ in range(20):
        X = metric.random_graph_space(int(rng.integers(2, 6)), rng)
        Y = metric.random_graph_space(int(rng.integers(2, 6)), rng)
        base = gh.gh_exact(X, Y).value
        for lam in (0.5, 2.0, 3.0):
            got = gh.gh_exact(metric.scale(X, lam), metric.scale(Y, lam)).value
            if got != lam * base:
                return False, f"lambda={lam}: {got} != {lam * base}"
    return True, "integer metrics, lambda in {0.5, 2, 3}"


@check("gh_solver", "bound_sandwich")
def _sandwich(rng):
    for X, Y in zip(_pool(rng, 40, 1, 7), _pool(rng, 40, 1, 7)):
        lo, hi = gh.gh_bounds(X, Y)
        v = gh.gh_exact(X, Y).value
        if not lo <= v <= hi:
            return False, f"{lo} <= {v} <= {hi}"
    return True, "40 random pairs"


@check("gh_solver", "discrete_collapse")
def _collapse(rng):
    for X, Y in zip(_pool(rng, 10, 1, 3), _pool(rng, 10, 1, 3)):
        values = {gh.gh_exact(X, Y, top.semicontinuity_filter(tag, shortcut=False)).value
                  for tag in top.FAMILY_TAGS}
        if len(values) != 1:
            return False, f"values {values}"
    return True, "four families agree on 10 pairs without shortcuts"


@check("gh_solver", "oracle_equivalence")
def _oracle(rng):
    for k in range(200):
        X, Y = _pool(rng, 2, 1, 4)
        a, b = gh.gh_exact(X, Y), gh.gh_oracle(X, Y)
        if a.value != b.value:
            return False, f"pair {k}: exact {a.value} vs oracle {b.value}"
    return True, "200 random pairs"


# -- topology_sv ---------------------------------------------------------------


def _topologies(max_n: int = 3):
    return [T for n in range(1, max_n + 1) for T in top.all_topologies(n)]


@check("topology_sv", "criterion_matches_definition")
def _criterion(rng):
    count = 0
    for A, B in product(_topologies(), repeat=2):
        for f in top.all_maps(A, B):
            count += 1
            if bool(top.is_lower_semicontinuous(f)) != bool(top.is_lsc_pointwise(f)):
                return False, f"lsc mismatch {f}"
            if bool(top.is_upper_semicontinuous(f)) != bool(top.is_usc_pointwise(f)):
                return False, f"usc mismatch {f}"
    return True, f"{count} maps"


@check("topology_sv", "inclusion_lattice")
def _lattice(rng):
    count = 0
    for A, B in product(_topologies(), repeat=2):
        for mask in rel.correspondence_masks(A.n, B.n):
            fam = top.classify_correspondence(mask, A, B)
            count += 1
            if ("rc" in fam) != ("us" in fam and "ls" in fam):
                return False, f"{mask.astype(int).tolist()}: {sorted(fam)}"
    return True, f"{count} correspondences"


@check("topology_sv", "composition_closure")
def _closure(rng):
    tops = _topologies(2)
    count = 0
    for A, B, C in product(tops, repeat=3):
        for m1 in rel.correspondence_masks(A.n, B.n):
            f1 = top.classify_correspondence(m1, A, B)
            for m2 in rel.correspondence_masks(B.n, C.n):
                f2 = top.classify_correspondence(m2, B, C)
                comp = (m1.astype(int) @ m2.astype(int)) > 0
                fc = top.classify_correspondence(comp, A, C)
                count += 1
                if not (f1 & f2) <= fc:
                    return False, f"{sorted(f1 & f2 - fc)} lost"
    return True, f"{count} composable pairs"


@check("topology_sv", "discrete_collapse")
def _tdiscrete(rng):
    count = 0
    for n, m in product(range(1, 4), repeat=2):
        A, B = top.discrete_topology(n), top.discrete_topology(m)
        for mask in rel.correspondence_masks(n, m):
            count += 1
            if top.classify_correspondence(mask, A, B) != frozenset(top.FAMILY_TAGS):
                return False, str(mask.astype(int).tolist())
    return True, f"{count} correspondences"


# -- sampling ------------------------------------------------------------------


_SPECS = [sampling.NetSpec("interval", 1.0, points=p) for p in (1, 2, 5, 9)] + \
         [sampling.NetSpec("circle", 2 * math.pi, points=p) for p in (1, 3, 4, 8)] + \
         [sampling.NetSpec("grid", (1.0, 2.0), points=3), sampling.NetSpec("grid", (1.0, 1.0), mesh=0.5,
                                                                           metric="chebyshev")]


@check("sampling", "net_validity")
def _nets(rng):
    for spec in _SPECS:
        X = sampling.generate_net(spec)
        if metric.check_metric(X.dist):
            return False, f"{spec} invalid"
    return True, f"{len(_SPECS)} nets"


@check("sampling", "subnet_sandwich")
def _subnet(rng):
    cases = [(sampling.NetSpec("interval", 1.0, points=5), [4, 2, 1]),
             (sampling.NetSpec("circle", 2 * math.pi, points=8), [8, 4, 2, 1]),
             (sampling.NetSpec("interval", 3.0, points=9), [8, 4, 2])]
    for spec, levels in cases:
        table = sampling.dense_subnet_experiment(spec, levels)
        if not table.passed:
            return False, f"{spec.model}: {table.checks}"
    return True, f"{len(cases)} experiments"


@check("sampling", "extension_contract")
def _extension(rng):
    count = 0
    for model, length, coarse_n, fine_n in [("interval", 1.0, 3, 5), ("interval", 2.0, 3, 9),
                                            ("circle", 2 * math.pi, 4, 8), ("circle", 1.0, 2, 8)]:
        coarse = sampling.generate_net(sampling.NetSpec(model, length, points=coarse_n))
        fine = sampling.generate_net(sampling.NetSpec(model, length, points=fine_n))
        target = metric.random_space(4, rng)
        delta = sampling.extension_gap(coarse, fine)
        for _ in range(10):
            R = _random_corr(coarse, target, rng)
            ext = sampling.extend_correspondence(R, fine)
            emb = [fine.labels.index(lab) for lab in coarse.labels]
            count += 1
            if rel.distortion(ext) > rel.distortion(R) + 2 * delta + metric.TOLERANCE:
                return False, f"{model}: bound broken"
            if not np.array_equal(ext.incidence[emb], R.incidence):
                return False, f"{model}: restriction differs"
    return True, f"{count} extensions"


# -- cli -----------------------------------------------------------------------


@check("cli", "determinism")
def _determinism(rng):
    from .cli import run

    a = run(["experiment", "dense-circle"])
    b = run(["experiment", "dense-circle"])
    return a == b, "two runs of dense-circle compared byte for byte"


def run_suite(seed: int = 0, only: str | None = None) -> list[PropertyResult]:
    """Run every registered check (optionally only those whose name contains ``only``)."""
    out = []
    for k, (module, name, fn) in enumerate(CHECKS):
        if only and only not in f"{module}.{name}":
            continue
        rng = np.random.default_rng([seed, k])
        try:
            passed, detail = fn(rng)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(PropertyResult(module, name, bool(passed), detail))
    return out
