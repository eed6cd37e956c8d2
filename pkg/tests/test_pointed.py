"""Pointed boundedly-compact metric: balls, a_eps, the eps-scan, integrals."""

import math

import numpy as np
import pytest

from ghforge.compact import cgf_distance
from ghforge.errors import OutOfBall
from ghforge.pointed import (
    RadialProfile,
    a_eps,
    integral_distance,
    pcball,
    pointed_distance,
    radial_distance,
    sequence_report,
)
from ghforge.spaces import validate_metric
from ghforge.structures import (
    Curve,
    Measure,
    Point,
    StructuredSpace,
    Subset,
    pushforward,
    structure_leq,
)

from genspaces import random_space, random_structured_pair, relabeled_copy

ONE = validate_metric([[0.0]])
TWO04 = validate_metric([[0, 0.4], [0.4, 0]])
LINE = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])

P_ONE = StructuredSpace(ONE, None, origin=0)


_trap = getattr(np, "trapezoid", None) or np.trapz

def test_pcball_examples():
    M = StructuredSpace(LINE, Measure({0: 1.0, 2: 1.0}), origin=0)
    whole = pcball(M, 10.0)
    assert whole.space.labels == LINE.labels and whole.structure == M.structure
    tiny = pcball(M, 0.0)
    assert tiny.space.n == 1 and tiny.structure == Measure({0: 1.0})
    mid = pcball(M, 1.0)
    assert mid.space.n == 2 and mid.structure == Measure({0: 1.0})
    with pytest.raises(OutOfBall):
        pcball(StructuredSpace(LINE, Point(2), origin=0), 1.0)


def test_radial_profile_segments_constant():
    rng = np.random.default_rng(30)
    for _ in range(10):
        M, _ = random_structured_pair(rng, max_points=4, pointed=True)
        profile = RadialProfile.of(M)
        for k, r in enumerate(profile.breakpoints):
            hi = profile.breakpoints[k + 1] if k + 1 < len(profile.breakpoints) else r + 1.0
            for probe in (r, (r + hi) / 2):
                ball = pcball(M, probe, grave_ok=True)
                assert ball.space.labels == profile.segments[k].space.labels
                assert ball.structure == profile.segments[k].structure
                assert profile.at(probe).space.labels == ball.space.labels


def test_truncation_order_along_radii():
    rng = np.random.default_rng(31)
    for trial in range(15):
        kind = ["measure", "subset", "curve"][trial % 3]
        M, _ = random_structured_pair(rng, kind=kind, max_points=5, pointed=True)
        r1, r2 = sorted(rng.uniform(0, 3, size=2))
        small = pcball(M, r1, grave_ok=True)
        big = pcball(M, r2, grave_ok=True)
        small_pts = set(small.space.labels)
        big_pts = set(big.space.labels)
        assert small_pts <= big_pts
        emb_map = tuple(big.space.labels.index(lab) for lab in small.space.labels)
        from ghforge.spaces import IsometricEmbedding

        emb = IsometricEmbedding(small.space, big.space, emb_map)
        assert structure_leq(pushforward(small.structure, emb), big.structure)


def test_a_eps_examples():
    assert a_eps(P_ONE, P_ONE, 1.0) == 0.0
    M = StructuredSpace(LINE, None, origin=0)
    assert a_eps(M, M, 0.5) == 0.0
    N = StructuredSpace(TWO04, None, origin=0)
    # Y' = {o} is admissible at eps = 1 because the inner ball has radius 0
    assert a_eps(P_ONE, N, 1.0) == 0.0


def test_a_eps_below_full_ball_distance():
    rng = np.random.default_rng(32)
    for trial in range(12):
        kind = ["none", "measure", "subset"][trial % 3]
        M, N = random_structured_pair(rng, kind=kind, max_points=4, pointed=True)
        for eps in (0.4, 0.8, 1.0):
            r1 = 1.0 / eps
            lhs = a_eps(M, N, eps)
            ball_m = pcball(M, r1, grave_ok=True)
            ball_n = pcball(N, r1, grave_ok=True)
            # the full 1/eps-ball of N is one admissible candidate whenever
            # its structure dominates the inner truncation, which holds for
            # these kinds by monotonicity of truncation
            rhs = cgf_distance(ball_m, ball_n).value
            assert lhs <= rhs + 1e-12


def test_pointed_distance_basics():
    M = StructuredSpace(LINE, None, origin=0)
    assert pointed_distance(M, M) == 0.0
    copy, _ = relabeled_copy(np.random.default_rng(33), M)
    assert pointed_distance(M, copy) == 0.0
    d = pointed_distance(P_ONE, StructuredSpace(TWO04, None, origin=0))
    assert d == pytest.approx(0.4, abs=1e-12)


def test_pointed_distance_far_feature():
    # identical within a large radius, different beyond it: the distance is
    # at most (and here exactly) the inverse of that radius scale
    far = 40.0
    X = validate_metric([[0, far], [far, 0]])
    M = StructuredSpace(X, None, origin=0)
    d = pointed_distance(M, P_ONE)
    assert d <= 1.0 / far * 2 + 1e-9
    assert d > 0.0


def test_pointed_incomparable_convention():
    A = StructuredSpace(LINE, Subset(frozenset()), origin=0)
    B = StructuredSpace(LINE, Subset(frozenset({0})), origin=0)
    assert pointed_distance(A, B) == 1.0


def test_pointed_equals_twice_cgf_for_small_spaces():
    # spaces inside radius ~0.4 around the origin: every ball is the whole
    # space and every admissible substructure is forced, so the eps-scan
    # must land exactly at 2 * compact distance
    rng = np.random.default_rng(34)
    checked = 0
    for trial in range(40):
        kind = ["none", "point", "measure", "subset", "curve"][trial % 5]
        A, B = random_structured_pair(rng, kind=kind, max_points=3, scale=0.28, pointed=True)
        c = cgf_distance(A, B).value
        if math.isinf(c) or 2 * c > 0.8:
            continue
        checked += 1
        assert pointed_distance(A, B) == pytest.approx(min(1.0, 2 * c), abs=1e-12)
    assert checked >= 10


def test_pointed_metric_axioms_small():
    rng = np.random.default_rng(35)
    for trial in range(8):
        kind = ["none", "measure", "subset"][trial % 3]
        A, B = random_structured_pair(rng, kind=kind, max_points=3, pointed=True)
        C, _ = random_structured_pair(rng, kind=kind, max_points=3, pointed=True)
        dab = pointed_distance(A, B)
        assert dab == pointed_distance(B, A)
        assert 0.0 <= dab <= 1.0
        dac, dbc = pointed_distance(A, C), pointed_distance(B, C)
        assert dac <= dab + dbc + 1e-6


def test_drop_lower_flag_never_increases():
    rng = np.random.default_rng(36)
    for trial in range(10):
        kind = ["measure", "subset"][trial % 2]
        M, N = random_structured_pair(rng, kind=kind, max_points=3, pointed=True)
        for eps in (0.5, 1.0):
            with_lower = a_eps(M, N, eps)
            without = a_eps(M, N, eps, drop_lower=True)
            assert without <= with_lower + 1e-12


def test_integral_examples():
    M = StructuredSpace(LINE, None, origin=0)
    assert integral_distance(M, M) == 0.0
    # one point vs two points at distance 2: balls differ only beyond r = 2
    P2 = StructuredSpace(validate_metric([[0, 2], [2, 0]]), None, origin=0)
    assert integral_distance(P_ONE, P2) == pytest.approx(math.exp(-2), abs=1e-12)
    # far-apart structure marks: the integrand is 1 everywhere
    m1 = StructuredSpace(ONE, Subset(frozenset()), origin=0)
    m2 = StructuredSpace(ONE, Subset(frozenset({0})), origin=0)
    assert integral_distance(m1, m2) == pytest.approx(1.0, abs=1e-12)


def test_integral_bounded_and_zero_iff_segments_zero():
    rng = np.random.default_rng(37)
    for trial in range(10):
        kind = ["none", "measure", "subset"][trial % 3]
        M, N = random_structured_pair(rng, kind=kind, max_points=3, pointed=True)
        v = integral_distance(M, N)
        assert 0.0 <= v <= 1.0
        if v == 0.0:
            breaks = sorted(
                {0.0}
                | {M.space.d(M.origin, i) for i in range(M.space.n)}
                | {N.space.d(N.origin, i) for i in range(N.space.n)}
            )
            assert all(radial_distance(M, N, r) == 0.0 for r in breaks)


def test_integral_against_quadrature():
    rng = np.random.default_rng(38)
    for trial in range(6):
        kind = ["none", "measure", "subset"][trial % 3]
        M, N = random_structured_pair(rng, kind=kind, max_points=3, pointed=True)
        exact = integral_distance(M, N)
        quad = _quadrature_integral(M, N, nodes=20001)
        assert exact == pytest.approx(quad, abs=1e-9)


def _quadrature_integral(M, N, nodes):
    breaks = sorted(
        {0.0}
        | {M.space.d(M.origin, i) for i in range(M.space.n)}
        | {N.space.d(N.origin, i) for i in range(N.space.n)}
    )
    values = [min(1.0, radial_distance(M, N, r)) for r in breaks]
    rmax = breaks[-1] if breaks[-1] > 0 else 1.0
    grid = np.linspace(0.0, rmax, nodes)
    total = 0.0
    for k, lo in enumerate(breaks):
        hi = breaks[k + 1] if k + 1 < len(breaks) else rmax
        if hi <= lo:
            continue
        inner = grid[(grid > lo) & (grid < hi)]
        xs = np.concatenate(([lo], inner, [hi]))
        ys = np.exp(-xs) * values[k]
        total += float(_trap(ys, xs))
    total += math.exp(-rmax) * values[-1]
    return total


def test_pointed_marked_structures():
    rng = np.random.default_rng(39)
    for trial in range(8):
        kind = ["marked_measure", "marked_subset"][trial % 2]
        A, B = random_structured_pair(rng, kind=kind, max_points=3, pointed=True)
        d = pointed_distance(A, B)
        assert 0.0 <= d <= 1.0
        assert d == pointed_distance(B, A)
        assert pointed_distance(A, A) == 0.0
        assert 0.0 <= integral_distance(A, B) <= 1.0


def test_sequence_report_cases():
    M = StructuredSpace(LINE, None, origin=0)
    const = sequence_report([M, M, M])
    assert const["cauchy"] and all(v == 0.0 for v in const["consecutive_pointed"])
    assert all(all(v == 0.0 for v in row) for row in const["pointed_matrix"])

    # rescalings shrink towards the one-point space
    X = validate_metric([[0, 0.7, 0.35], [0.7, 0, 0.4], [0.35, 0.4, 0]])
    seq = [
        StructuredSpace(validate_metric(X.dist / n), None, origin=0) for n in range(1, 9)
    ]
    dists = [pointed_distance(S, P_ONE) for S in seq]
    assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
    assert dists[-1] < 0.1

    # alternating non-isomorphic spaces never settle
    A = StructuredSpace(LINE, None, origin=0)
    B = StructuredSpace(validate_metric([[0, 0.5], [0.5, 0]]), None, origin=0)
    alt = sequence_report([A, B, A, B, A, B], cauchy_threshold=0.5)
    assert not alt["cauchy"]
    assert len(alt["radius_traces"]) == 5
