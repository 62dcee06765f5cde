from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghlab.metric import delta1, validate
from ghlab.relations import (ALL, Correspondence, EmptyCompositionError, EmptyRelationError,
                             FamilyFilter, Relation, check_family_axioms, closure, compose,
                             correspondence_masks, distortion, enumerate_correspondences,
                             epsilon_thicken, full_relation, functions_only, identity, inverse,
                             is_isometry_graph, relation_from_json, relation_to_json)

from conftest import graph_spaces, line


def brute_distortion(R):
    X, Y = R.source, R.target
    return max(abs(X.dist[i, k] - Y.dist[j, l]) for (i, j) in R.cells for (k, l) in R.cells)


def test_relation_requires_cells():
    X = line(0, 1)
    with pytest.raises(EmptyRelationError):
        Relation(X, X, np.zeros((2, 2), dtype=bool))
    with pytest.raises(ValueError):
        Relation(X, X, np.ones((3, 2), dtype=bool))


def test_correspondence_requires_both_projections():
    X = line(0, 1)
    with pytest.raises(ValueError):
        Correspondence(X, X, [[True, True], [False, False]])
    R = Relation.from_cells(X, X, [(0, 0), (1, 0)])
    assert not R.is_correspondence


def test_distortion_examples():
    X = line(0, 1, 3)
    assert distortion(identity(X)) == 0
    assert distortion(full_relation(X, X)) == 3
    P = line(0)
    assert distortion(full_relation(P, X)) == 3


def test_distortion_matches_definition(rng):
    from conftest import pool
    for X, Y in zip(pool(rng, 10, 2, 5), pool(rng, 10, 2, 5)):
        for _ in range(5):
            inc = rng.random((X.n, Y.n)) < 0.5
            inc[0, 0] = True
            R = Relation(X, Y, inc)
            assert distortion(R) == brute_distortion(R)


def test_inverse_and_compose_shapes():
    X, Y, Z = line(0, 1), line(0, 2, 3), line(0)
    R = Relation.from_cells(X, Y, [(0, 0), (1, 2)])
    inv = inverse(R)
    assert inv.shape == (3, 2) and inv.cells == [(0, 0), (2, 1)]
    assert inverse(inv) == R
    T = Relation.from_cells(Y, Z, [(2, 0)])
    assert compose(R, T).cells == [(1, 0)]
    with pytest.raises(EmptyCompositionError):
        compose(R, Relation.from_cells(Y, Z, [(1, 0)]))
    with pytest.raises(ValueError):
        compose(R, R)


def test_compose_of_correspondences_is_correspondence():
    X = line(0, 1, 3)
    C = compose(full_relation(X, X), identity(X))
    assert isinstance(C, Correspondence)


def test_closure_is_identity_on_finite_spaces():
    R = Relation.from_cells(line(0, 1), line(0, 1), [(0, 1)])
    assert closure(R) == R


def test_epsilon_thicken_strict_and_stable():
    X = line(0, 1, 3)
    R = identity(X)
    assert epsilon_thicken(R, 1.0) == R
    assert epsilon_thicken(R, 1.5).cells == [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]
    with pytest.raises(ValueError):
        epsilon_thicken(R, 0)


def test_isometry_graph_detection():
    X = line(0, 1, 3)
    Y = line(3, 2, 0)
    # x -> 3 - x
    assert is_isometry_graph(Relation.from_map(X, Y, [0, 1, 2]))
    assert not is_isometry_graph(Relation.from_map(X, Y, [2, 1, 0]))
    assert not is_isometry_graph(full_relation(X, Y))
    assert not is_isometry_graph(full_relation(line(0, 1), line(0, 1)))


def test_correspondence_count_two_by_two():
    assert len(correspondence_masks(2, 2)) == 7
    # n x m doubly-surjective counts: 1x1, 1x3, 2x3, 3x3
    assert [len(correspondence_masks(*s)) for s in [(1, 1), (1, 3), (2, 3), (3, 3)]] == [1, 1, 25, 265]
    assert len(list(enumerate_correspondences(line(0, 1), line(0)))) == 1


def test_json_roundtrip():
    X, Y = line(0, 1), line(0, 2, 3)
    R = Relation.from_cells(X, Y, [(0, 0), (1, 1), (1, 2)])
    back = relation_from_json(relation_to_json(R), X, Y)
    assert back == R and isinstance(back, Correspondence)
    with pytest.raises(ValueError):
        relation_from_json({"rows": 3, "cols": 3, "cells": [[0, 0]]}, X, Y)


def test_family_axioms_all_passes():
    samples = [delta1(), line(0, 1), line(0, 1, 3)]
    report = check_family_axioms(ALL, samples)
    assert report.passed
    assert all(count > 0 for count in report.checked.values())


def test_functions_only_fails_inverse():
    samples = [delta1(), line(0, 1), line(0, 1, 3)]
    report = check_family_axioms(functions_only(), samples)
    assert not report.passed
    assert "inverse" in {axiom for axiom, _ in report.counterexamples}


def test_full_relation_only_family_fails_identity():
    f = FamilyFilter("full", lambda R: bool(R.incidence.all()))
    report = check_family_axioms(f, [line(0, 1)])
    assert "identity" in {axiom for axiom, _ in report.counterexamples}


def relations_between(X, Y):
    cells = st.lists(st.tuples(st.integers(0, X.n - 1), st.integers(0, Y.n - 1)), min_size=1)
    return cells.map(lambda cs: Relation.from_cells(X, Y, cs))


@settings(max_examples=80, deadline=None)
@given(graph_spaces(), graph_spaces(), graph_spaces(), st.data())
def test_distortion_algebra(X, Y, Z, data):
    R = data.draw(relations_between(X, Y))
    S = data.draw(relations_between(X, Y))
    assert distortion(R) == brute_distortion(R)
    union = Relation(X, Y, R.incidence | S.incidence)
    assert distortion(union) >= max(distortion(R), distortion(S))
    assert distortion(inverse(R)) == distortion(R)
    T = data.draw(relations_between(Y, Z))
    try:
        C = compose(R, T)
    except EmptyCompositionError:
        return
    assert distortion(C) <= distortion(R) + distortion(T) + 1e-9


@settings(max_examples=40, deadline=None)
@given(graph_spaces(2, 3))
def test_zero_distortion_iff_isometry_self(X):
    for R in enumerate_correspondences(X, X):
        assert (distortion(R) == 0) == is_isometry_graph(R)
