"""Acceptance criteria, one test per criterion.

Each test appends a ``PASS``/``FAIL`` line to ``RESULTS``; the lines are
printed as they happen (visible with ``-s``) and again in the pytest terminal
summary. Run this file directly for just the acceptance report.
"""
import json
import math
import time
from itertools import combinations, product

import numpy as np
import pytest

from ghlab import cli
from ghlab.gh import geodesic_probe, gh_exact, gh_oracle, triangle_audit
from ghlab.metric import (FiniteMetricSpace, delta1, diameter, random_graph_space, random_space)
from ghlab.relations import (Correspondence, Relation, closure, compose, correspondence_masks,
                             distortion, epsilon_thicken, inverse, is_isometry_graph)
from ghlab.sampling import (NetSpec, delta1_convergence, dense_subnet_experiment,
                            extend_correspondence, extension_gap, generate_net, restrict_rows)
from ghlab.topology import (SetValuedMap, all_maps, all_topologies, classify_correspondence,
                            closed_graph_usc_audit, discrete_topology, is_lower_semicontinuous,
                            is_lsc_pointwise, is_open_relation, is_upper_semicontinuous,
                            is_usc_pointwise, projection_is_open_audit, semicontinuity_filter)

RESULTS: list[str] = []
TOPOLOGIES = [T for n in (1, 2, 3) for T in all_topologies(n)]


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def seeded_space(rng, n):
    gen = random_graph_space if rng.random() < 0.5 else random_space
    return gen(n, rng)


def all_relations(n, m):
    """Every nonempty n x m boolean matrix, shape (2**(n*m) - 1, n, m)."""
    codes = np.arange(1, 1 << (n * m))
    return ((codes[:, None] >> np.arange(n * m)) & 1).astype(bool).reshape(-1, n, m)


def batch_distortion(masks, dx, dy):
    """Distortion of every relation in ``masks`` straight from the definition."""
    mismatch = np.abs(dx[:, None, :, None] - dy[None, :, None, :])  # [i, j, k, l]
    n, m = dx.shape[0], dy.shape[0]
    flat = mismatch.reshape(n * m, n * m)
    cells = masks.reshape(len(masks), -1)
    pair = cells[:, :, None] & cells[:, None, :]
    return np.where(pair, flat[None], 0.0).max(axis=(1, 2))


# --------------------------------------------------------------------------------------


def test_01_one_point_distance():
    rng = np.random.default_rng(101)
    spaces = [seeded_space(rng, int(rng.integers(1, 9))) for _ in range(50)]
    start = time.perf_counter()
    bad = [X.n for X in spaces if gh_exact(delta1(), X).value != diameter(X) / 2]
    elapsed = time.perf_counter() - start
    record(1, "one-point distance equals half the diameter", not bad and elapsed < 1.0,
           f"50 spaces (<= 8 points), {len(bad)} mismatches, {elapsed:.3f}s (limit 1s)")


def test_02_scaling_geodesic():
    rng = np.random.default_rng(202)
    grid = [0, 0.25, 0.5, 0.75, 1]
    start = time.perf_counter()
    worst, failed = 0.0, 0
    for _ in range(20):
        X = seeded_space(rng, int(rng.integers(2, 7)))
        table = geodesic_probe(X, grid, tol=1e-9)
        failed += not table.passed
        worst = max(worst, max(abs(v - e) for _, _, v, e in table.rows))
    elapsed = time.perf_counter() - start
    record(2, "rescaling curve is a geodesic", failed == 0 and elapsed < 10.0,
           f"20 spaces x 15 grid pairs, max |error| {worst:.2e} (tol 1e-9), {elapsed:.2f}s (limit 10s)")


def test_03_oracle_equivalence():
    rng = np.random.default_rng(303)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        X = seeded_space(rng, int(rng.integers(1, 5)))
        Y = seeded_space(rng, int(rng.integers(1, 5)))
        mismatches += gh_exact(X, Y).value != gh_oracle(X, Y).value
    elapsed = time.perf_counter() - start
    record(3, "exact solver equals brute-force oracle", mismatches == 0 and elapsed < 60.0,
           f"200 pairs (<= 4 points), {mismatches} mismatches, {elapsed:.2f}s (limit 60s)")


def test_04_pseudometric_axioms():
    rng = np.random.default_rng(404)
    asym = tri = comp = 0
    for _ in range(100):
        X, Y, Z = (seeded_space(rng, int(rng.integers(1, 5))) for _ in range(3))
        rep = triangle_audit(X, Y, Z, tol=1e-9)
        tri += not rep.holds
        comp += not rep.composite_bounds
        asym += abs(gh_exact(Y, X).value - rep.d_xy) > 1e-9
        asym += abs(gh_exact(X, X).value) > 1e-9
    ok = asym == tri == comp == 0
    record(4, "symmetry and triangle inequality", ok,
           f"100 triples (<= 4 points), {asym} symmetry / {tri} triangle / "
           f"{comp} composite-certificate violations (tol 1e-9)")


def _algebra_instance(X, Y, Z, eps_schedule):
    """Counts (checked, failures) for the four distortion laws on one triple."""
    n, m, p = X.n, Y.n, Z.n
    checked, failures = 0, []
    rels_xy = all_relations(n, m)
    # monotonicity over every comparable pair, against the library distortion
    dis_xy = batch_distortion(rels_xy, X.dist, Y.dist)
    lib = np.array([distortion(Relation(X, Y, r)) for r in rels_xy])
    if not np.array_equal(dis_xy, lib):
        failures.append("library distortion differs from definition")
    codes = np.arange(1, len(rels_xy) + 1)
    sub = (codes[:, None] & ~codes[None, :]) == 0  # sub[a, b]: relation a inside relation b
    viol = sub & (dis_xy[:, None] > dis_xy[None, :])
    checked += int(sub.sum())
    if viol.any():
        failures.append("monotonicity")
    # subadditivity over every composable pair
    rels_yz = all_relations(m, p)
    dis_yz = batch_distortion(rels_yz, Y.dist, Z.dist)
    comp = np.einsum("aij,bjk->abik", rels_xy.astype(np.int64), rels_yz.astype(np.int64)) > 0
    comp = comp.reshape(-1, n, p)
    weights = 1 << np.arange(n * p)
    comp_codes = comp.reshape(len(comp), -1) @ weights
    dis_xz = np.concatenate([[-np.inf], batch_distortion(all_relations(n, p), X.dist, Z.dist)])
    bound = (dis_xy[:, None] + dis_yz[None, :]).ravel()
    nonempty = comp_codes > 0
    checked += int(nonempty.sum())
    if (dis_xz[comp_codes][nonempty] > bound[nonempty] + 1e-9).any():
        failures.append("subadditivity")
    # closure invariance and epsilon limit, relation by relation
    threshold = min(X.dist[X.dist > 0].min(initial=np.inf), Y.dist[Y.dist > 0].min(initial=np.inf))
    for r, d in zip(rels_xy, dis_xy):
        R = Relation(X, Y, r)
        # closure in a finite product is the intersection of all thickenings
        cl = r.copy()
        for eps in (threshold / 2, threshold):
            if np.isfinite(eps):
                cl &= epsilon_thicken(R, eps).incidence
        if not (np.array_equal(closure(R).incidence, cl) and distortion(closure(R)) == d):
            failures.append("closure invariance")
        seq = [distortion(epsilon_thicken(R, e)) for e in eps_schedule]
        if any(b > a for a, b in zip(seq, seq[1:])):
            failures.append("epsilon nonincreasing")
        if any(s != d for s, e in zip(seq, eps_schedule) if e <= threshold):
            failures.append("epsilon stabilization")
        checked += 2
    return checked, failures


def test_05_distortion_algebra():
    rng = np.random.default_rng(505)
    schedule = [8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.1, 0.01, 1e-4]
    checked, failures = 0, []
    # exhaustive: every relation pair on 3 x 3 (and the 3 x 3 x 3 compositions)
    for _ in range(4):
        X, Y, Z = (seeded_space(rng, 3) for _ in range(3))
        c, f = _algebra_instance(X, Y, Z, schedule)
        checked += c
        failures += f
    # random 5 x 5 instances
    for _ in range(100):
        X, Y, Z = (seeded_space(rng, 5) for _ in range(3))
        R = Relation(X, Y, rng.random((5, 5)) < 0.3 + np.eye(5, dtype=bool))
        S = Relation(X, Y, R.incidence | (rng.random((5, 5)) < 0.3))
        T = Relation(Y, Z, (rng.random((5, 5)) < 0.3) | np.eye(5, dtype=bool))
        ref = lambda rel: float(batch_distortion(rel.incidence[None], rel.source.dist, rel.target.dist)[0])  # noqa: E731
        if not (distortion(R) == ref(R) and distortion(R) <= distortion(S)):
            failures.append("monotonicity 5x5")
        if distortion(compose(R, T)) > distortion(R) + distortion(T) + 1e-9:
            failures.append("subadditivity 5x5")
        if distortion(closure(R)) != distortion(R) or distortion(inverse(R)) != distortion(R):
            failures.append("closure 5x5")
        threshold = min(X.dist[X.dist > 0].min(), Y.dist[Y.dist > 0].min())
        seq = [distortion(epsilon_thicken(R, e)) for e in schedule]
        if any(b > a for a, b in zip(seq, seq[1:])) or any(
                s != distortion(R) for s, e in zip(seq, schedule) if e <= threshold):
            failures.append("epsilon 5x5")
        checked += 5
    record(5, "distortion monotone, subadditive, closure-invariant, epsilon-stable",
           not failures, f"{checked} checks over all 3x3 relations + 100 random 5x5 instances, "
           f"failures: {sorted(set(failures)) or 'none'}")


def _is_isometric_bijection(X, Y, mask):
    rows, cols = np.nonzero(mask)
    if len(rows) != X.n or len(set(rows)) != X.n or len(set(cols)) != Y.n:
        return False
    f = dict(zip(rows.tolist(), cols.tolist()))
    return all(X.dist[a, b] == Y.dist[f[a], f[b]] for a in range(X.n) for b in range(X.n))


def test_06_zero_distortion_iff_isometry():
    rng = np.random.default_rng(606)
    spaces = [random_graph_space(3, rng, max_weight=2) if k % 2 else random_space(3, rng)
              for k in range(30)]
    masks = correspondence_masks(3, 3)
    instances = zero = bad = 0
    for X, Y in product(spaces, repeat=2):
        dis = batch_distortion(masks, X.dist, Y.dist)
        for mask, d in zip(masks, dis):
            iso = _is_isometric_bijection(X, Y, mask)
            instances += 1
            zero += iso
            if iso != (d == 0):
                bad += 1
            elif iso or d < 1e-6:
                R = Correspondence(X, Y, mask)
                bad += (distortion(R) == 0) != iso or is_isometry_graph(R) != iso
    record(6, "zero distortion iff isometry graph", bad == 0 and zero > 30,
           f"{instances} correspondences over 900 pairs, {zero} isometries, {bad} mismatches")


def test_07_semicontinuity_criteria():
    start = time.perf_counter()
    count = bad = 0
    for tx, ty in product(TOPOLOGIES, repeat=2):
        for f in all_maps(tx, ty):
            count += 1
            bad += bool(is_lower_semicontinuous(f)) != bool(is_lsc_pointwise(f))
            bad += bool(is_upper_semicontinuous(f)) != bool(is_usc_pointwise(f))
    elapsed = time.perf_counter() - start
    record(7, "preimage criteria agree with pointwise definitions", bad == 0 and elapsed < 60.0,
           f"{len(TOPOLOGIES)} topologies, {count} maps, {bad} disagreements, {elapsed:.1f}s (limit 60s)")


def test_08_open_lsc_closed_usc():
    open_checked = open_bad = proj_bad = 0
    for tx, ty in product(TOPOLOGIES, repeat=2):
        proj_bad += not projection_is_open_audit(tx, ty).passed
        for mask in correspondence_masks(tx.n, ty.n):
            if is_open_relation(mask, tx, ty):
                open_checked += 1
                open_bad += "ls" not in classify_correspondence(mask, tx, ty)
    closed_checked = closed_bad = 0
    refused = 0
    for tx, ty in product(TOPOLOGIES, repeat=2):
        if not tx.is_hausdorff:
            with pytest.raises(ValueError):
                closed_graph_usc_audit(tx, ty)
            refused += 1
            continue
        rep = closed_graph_usc_audit(tx, ty)
        closed_checked += rep.checked
        closed_bad += len(rep.counterexamples)
        # second route: pointwise definition on the same closed graphs
        prod_top = tx.product(ty)
        for f in all_maps(tx, ty):
            g = f.graph().ravel()
            if prod_top.is_closed(int(sum(1 << c for c in np.flatnonzero(g)))):
                closed_bad += not is_usc_pointwise(f)
    ok = open_bad == closed_bad == proj_bad == 0 and open_checked and closed_checked
    record(8, "open relations are lsc, closed graphs over Hausdorff sources are usc", bool(ok),
           f"{open_checked} open correspondences, {closed_checked} closed graphs, "
           f"{open_bad + closed_bad + proj_bad} counterexamples, {refused} non-Hausdorff sources refused")


def test_09_family_lattice_and_composition():
    classified = lattice_bad = 0
    members = {}
    small = [T for T in TOPOLOGIES if T.n <= 2]
    for tx, ty in product(TOPOLOGIES, repeat=2):
        for mask in correspondence_masks(tx.n, ty.n):
            fams = classify_correspondence(mask, tx, ty)
            classified += 1
            lattice_bad += ("rc" in fams) != ("us" in fams and "ls" in fams)
            if tx in small and ty in small:
                for tag in fams:
                    members.setdefault((tag, tx, ty), []).append(mask)
    composed = comp_bad = 0
    for tag in ("all", "us", "ls", "rc"):
        for tx, ty, tz in product(small, repeat=3):
            for a in members.get((tag, tx, ty), []):
                for b in members.get((tag, ty, tz), []):
                    c = (a.astype(int) @ b.astype(int)) > 0
                    composed += 1
                    comp_bad += tag not in classify_correspondence(c, tx, tz)
    ok = lattice_bad == comp_bad == 0
    record(9, "rc = us & ls, families closed under composition", ok,
           f"{classified} classified correspondences, {lattice_bad} lattice violations; "
           f"{composed} compositions on <= 2-point topologies, {comp_bad} escapes")


def test_10_discrete_collapse_cli(tmp_path):
    rng = np.random.default_rng(1010)
    mismatches = 0
    for k in range(50):
        X = seeded_space(rng, int(rng.integers(1, 5)))
        Y = seeded_space(rng, int(rng.integers(1, 5)))
        px, py = tmp_path / f"x{k}.json", tmp_path / f"y{k}.json"
        px.write_text(json.dumps(X.to_json()))
        py.write_text(json.dumps(Y.to_json()))
        values = set()
        for tag in ("us", "ls", "rc", "all"):
            code, out = cli.run(["gh", str(px), str(py), "--family", tag])
            assert code == 0
            values.add(json.loads(out)["value"])
        # second route: classify every correspondence instead of the discrete shortcut
        for tag in ("us", "rc"):
            values.add(gh_exact(X, Y, semicontinuity_filter(tag, shortcut=False)).value)
        mismatches += len(values) != 1
    record(10, "gh --family us/ls/rc/all agree on finite metric spaces", mismatches == 0,
           f"50 pairs via the CLI plus unshortcut filters, {mismatches} disagreements")


def test_11_dense_subnet_and_delta1():
    tables = [
        dense_subnet_experiment(NetSpec("interval", 1.0, points=9), [8, 4, 2, 1]),
        dense_subnet_experiment(NetSpec("interval", 3.0, points=13), [12, 6, 3, 1]),
        dense_subnet_experiment(NetSpec("circle", 2 * math.pi, points=8), [8, 4, 2, 1]),
        dense_subnet_experiment(NetSpec("circle", 5.0, points=12), [6, 3, 2, 1]),
    ]
    rows = [r for t in tables for r in t.rows]
    within = all(r["value"] <= r["mesh"] + 1e-9 for r in rows)
    worst = 0.0
    for c in (2 * math.pi, 5.0, 1.0):
        table = delta1_convergence(NetSpec("circle", c, points=2), [2, 4, 6, 8, 16, 32, 64])
        worst = max(worst, max(abs(v - c / 4) for v in table.column("value")))
    ok = within and all(t.passed for t in tables) and worst <= 1e-9
    record(11, "sub-nets within mesh, circle nets at c/4 from a point", ok,
           f"{len(rows)} sub-net levels all <= mesh: {within}; "
           f"circle one-point max |value - c/4| {worst:.1e} (tol 1e-9)")


def test_12_extension_contract():
    rng = np.random.default_rng(1212)
    pairs = checked = bad = 0
    nets = [("interval", 1.0, [3, 5, 9, 17]), ("interval", 2.5, [2, 4, 7]),
            ("circle", 2 * math.pi, [3, 6, 12, 24]), ("circle", 4.0, [4, 8, 16])]
    for model, length, sizes in nets:
        for lo, hi in combinations(sizes, 2):
            coarse = generate_net(NetSpec(model, length, points=lo))
            fine = generate_net(NetSpec(model, length, points=hi))
            if not set(coarse.labels) <= set(fine.labels):
                continue
            pairs += 1
            emb = [fine.labels.index(lab) for lab in coarse.labels]
            delta = extension_gap(coarse, fine)
            for _ in range(10):
                target = seeded_space(rng, int(rng.integers(1, 6)))
                inc = rng.random((coarse.n, target.n)) < 0.35
                inc[np.arange(coarse.n), rng.integers(target.n, size=coarse.n)] = True
                inc[rng.integers(coarse.n, size=target.n), np.arange(target.n)] = True
                R = Correspondence(coarse, target, inc)
                ext = extend_correspondence(R, fine)
                checked += 1
                bad += distortion(ext) > distortion(R) + 2 * delta + 1e-9
                bad += restrict_rows(ext, emb, coarse) != R
                bad += not ext.is_correspondence
    record(12, "extension keeps distortion within 2*gap and restricts back", bad == 0 and pairs >= 8,
           f"{pairs} coarse/fine net pairs, {checked} extensions, {bad} violations")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
