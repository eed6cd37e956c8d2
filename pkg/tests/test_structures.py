"""Functor layer: pushforward laws, ambient distances, truncation, order."""

import math

import numpy as np
import pytest

from ghforge.errors import GridMismatch, KindMismatch, OutOfBall
from ghforge.measures import FiniteMeasure, prokhorov_distance
from ghforge.spaces import PointedSpace, closed_ball, identity_embedding, validate_metric
from ghforge.structures import (
    Curve,
    MarkedMeasure,
    MarkedSubset,
    MarkSpace,
    Measure,
    Point,
    StructuredSpace,
    Subset,
    TupleStructure,
    ambient_distance,
    find_structured_isomorphism,
    pushforward,
    signature,
    structure_leq,
    truncate,
)

from genspaces import (
    random_embedding_pair,
    random_mark_space,
    random_space,
    random_structure,
    random_structured_pair,
    relabeled_copy,
)

KINDS = ["point", "measure", "subset", "marked_measure", "marked_subset", "curve"]


def _times(rng):
    return tuple(float(t) for t in range(int(rng.integers(1, 4))))


def test_pushforward_identity_law():
    rng = np.random.default_rng(20)
    for trial in range(30):
        X = random_space(rng, int(rng.integers(1, 6)))
        marks = random_mark_space(rng)
        s = random_structure(rng, KINDS[trial % len(KINDS)], X.n, marks, _times(rng))
        assert pushforward(s, identity_embedding(X)) == s


def test_pushforward_composition_law():
    rng = np.random.default_rng(21)
    for trial in range(30):
        sub, host, f, _ = random_embedding_pair(rng)
        bigger = np.pad(host.dist, ((0, 0), (0, 0)))
        marks = random_mark_space(rng)
        s = random_structure(rng, KINDS[trial % len(KINDS)], sub.n, marks, _times(rng))
        ident = identity_embedding(host)
        g = f.compose(ident)
        assert pushforward(pushforward(s, f), ident) == pushforward(s, g)


def test_pushforward_point_and_dirac():
    X = validate_metric([[0, 1], [1, 0]])
    Z = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    from ghforge.spaces import IsometricEmbedding

    f = IsometricEmbedding(X, Z, (1, 2))
    assert pushforward(Point(0), f) == Point(1)
    assert pushforward(Measure({0: 1.0}), f) == Measure({1: 1.0})


def test_pushforward_preserves_ambient_distance_exactly():
    rng = np.random.default_rng(22)
    for trial in range(40):
        sub, host, f, g = random_embedding_pair(rng)
        marks = random_mark_space(rng)
        kind = KINDS[trial % len(KINDS)]
        times = _times(rng)
        s = random_structure(rng, kind, sub.n, marks, times)
        t = random_structure(rng, kind, sub.n, marks, times)
        before = ambient_distance(s, t, sub)
        emb = f if trial % 2 else g
        after = ambient_distance(pushforward(s, emb), pushforward(t, emb), host)
        assert before == after  # exact: same floats, same scan


def test_pointwise_one_lipschitz():
    # dsup(tau_f s, tau_g s) <= dsup(f, g) for points, subsets and measures
    rng = np.random.default_rng(23)
    for trial in range(40):
        sub, host, f, g = random_embedding_pair(rng)
        dsup = max(host.d(f(i), g(i)) for i in range(sub.n))
        marks = random_mark_space(rng)
        kind = ["point", "subset", "measure", "curve"][trial % 4]
        s = random_structure(rng, kind, sub.n, marks, _times(rng))
        moved = ambient_distance(pushforward(s, f), pushforward(s, g), host)
        assert moved <= dsup + 1e-9


def test_ambient_examples():
    line = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert ambient_distance(Point(0), Point(0), line) == 0.0
    assert ambient_distance(Subset(frozenset({0})), Subset(frozenset()), line) == math.inf
    t1 = TupleStructure((Point(0), Subset(frozenset({0, 1}))), "max")
    t2 = TupleStructure((Point(2), Subset(frozenset({1}))), "max")
    assert ambient_distance(t1, t2, line) == 2.0


def test_ambient_measure_matches_prokhorov():
    rng = np.random.default_rng(24)
    for _ in range(15):
        X = random_space(rng, 5)
        s = random_structure(rng, "measure", 5, None, ())
        t = random_structure(rng, "measure", 5, None, ())
        expected = prokhorov_distance(
            FiniteMeasure(X, s.as_dict()), FiniteMeasure(X, t.as_dict())
        )
        assert ambient_distance(s, t, X) == expected


def test_ambient_weighted_combinator():
    # max_i 2^-i (1 ^ d_i), 1-based
    line = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    s = TupleStructure((Point(0), Point(0)), "weighted")
    t = TupleStructure((Point(2), Point(1)), "weighted")
    d1, d2 = 2.0, 1.0
    assert ambient_distance(s, t, line) == max(0.5 * min(1, d1), 0.25 * min(1, d2))


def test_ambient_grid_mismatch():
    line = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    with pytest.raises(GridMismatch):
        ambient_distance(Curve((0.0,), (0,)), Curve((1.0,), (0,)), line)
    with pytest.raises(KindMismatch):
        ambient_distance(Point(0), Subset(frozenset({0})), line)


def test_truncate_examples():
    line = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    ball = closed_ball(PointedSpace(line, 0), 1.0)
    assert truncate(Measure({0: 1.0, 2: 2.0}), ball) == Measure({0: 1.0})
    assert truncate(Curve((0.0, 1.0, 2.0), (0, 1, 2)), ball) == Curve((0.0, 1.0), (0, 1))
    whole = closed_ball(PointedSpace(line, 0), 10.0)
    s = TupleStructure((Point(1), Subset(frozenset({0, 2}))), "max")
    assert truncate(s, whole) == s
    with pytest.raises(OutOfBall):
        truncate(Point(2), ball)
    assert truncate(Point(2), ball, grave_ok=True) == Point(None)


def test_truncation_laws():
    # truncate(pushforward(s)) == s and pushforward(truncate(t)) <= t
    rng = np.random.default_rng(25)
    for trial in range(60):
        X = random_space(rng, 6)
        P = PointedSpace(X, int(rng.integers(6)))
        ball = closed_ball(P, float(rng.uniform(0.3, 3.0)))
        sub, emb = ball
        marks = random_mark_space(rng)
        kind = KINDS[trial % len(KINDS)]
        times = _times(rng)
        s = random_structure(rng, kind, sub.n, marks, times)
        assert truncate(pushforward(s, emb), ball, grave_ok=True) == s
        t = random_structure(rng, kind, X.n, marks, times)
        back = pushforward(truncate(t, ball, grave_ok=True), emb)
        if isinstance(back, Point) and back.is_grave:
            continue  # the grave has no pushforward comparison on the host
        assert structure_leq(back, t)


def test_structure_leq_examples_and_partial_order():
    assert structure_leq(Measure({0: 1.0}), Measure({0: 1.0, 1: 2.0}))
    assert not structure_leq(Subset(frozenset({0, 1})), Subset(frozenset({0})))
    rng = np.random.default_rng(26)
    for trial in range(40):
        X = random_space(rng, 5)
        marks = random_mark_space(rng)
        kind = KINDS[trial % len(KINDS)]
        times = _times(rng)
        a = random_structure(rng, kind, 5, marks, times)
        b = random_structure(rng, kind, 5, marks, times)
        assert structure_leq(a, a)  # reflexive
        if structure_leq(a, b) and structure_leq(b, a):
            assert a == b  # antisymmetric
        c = random_structure(rng, kind, 5, marks, times)
        if structure_leq(a, b) and structure_leq(b, c):
            assert structure_leq(a, c)  # transitive


def test_down_sets_are_compact_surrogates():
    # discrete kinds have finite cones; measures have a bounded box of
    # possible minorants (support and atomwise weights dominated)
    s = Subset(frozenset({0, 1, 2}))
    down = [
        Subset(frozenset(c))
        for mask in range(8)
        for c in [tuple(i for i in range(3) if mask >> i & 1)]
    ]
    assert all(structure_leq(d, s) for d in down) and len(down) == 8
    crv = Curve((0.0, 1.0), (0, 1))
    prefixes = [Curve(crv.times[:k], crv.values[:k]) for k in range(3)]
    assert all(structure_leq(p, crv) for p in prefixes)
    m = Measure({0: 1.0, 1: 2.0})
    sub = Measure({0: 0.5, 1: 2.0})
    assert structure_leq(sub, m)
    assert not structure_leq(Measure({2: 0.1}), m)


def test_self_map_order_fixed_points():
    # if an automorphism maps a structure below itself, it fixes it
    rng = np.random.default_rng(27)
    for trial in range(30):
        X = random_space(rng, int(rng.integers(1, 6)))
        marks = random_mark_space(rng)
        s = random_structure(rng, KINDS[trial % len(KINDS)], X.n, marks, _times(rng))
        copy, f = relabeled_copy(
            rng, type("S", (), {"space": X, "origin": None, "structure": None})()
        )
        from ghforge.spaces import find_isomorphism

        back = find_isomorphism(copy.space, X)
        auto = f.compose(back)  # an automorphism of X
        mapped = pushforward(s, auto)
        if structure_leq(mapped, s):
            assert mapped == s


def test_structured_isomorphism():
    line = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    A = StructuredSpace(line, Measure({0: 1.0}))
    B = StructuredSpace(line, Measure({2: 1.0}))
    C = StructuredSpace(line, Measure({1: 1.0}))
    assert find_structured_isomorphism(A, B) is not None
    assert find_structured_isomorphism(A, C) is None
    rng = np.random.default_rng(28)
    for _ in range(20):
        S, _ = random_structured_pair(rng, max_points=4)
        copy, _ = relabeled_copy(rng, S)
        assert find_structured_isomorphism(S, copy) is not None


def test_signature_distinguishes_mark_spaces():
    m1 = MarkSpace(validate_metric([[0, 1], [1, 0]], labels=("a", "b")))
    m2 = MarkSpace(validate_metric([[0, 2], [2, 0]], labels=("a", "b")))
    s1 = MarkedSubset(1, m1, frozenset({((0,), 0)}))
    s2 = MarkedSubset(1, m2, frozenset({((0,), 0)}))
    assert signature(s1) != signature(s2)
