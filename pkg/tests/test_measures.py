"""Base distances: Hausdorff, total variation, discrepancy, Prokhorov, couplings."""

import math
from itertools import combinations

import numpy as np
import pytest

from ghforge.measures import (
    Coupling,
    FiniteMeasure,
    discrepancy,
    hausdorff_distance,
    min_discrepancy_core,
    min_discrepancy_outside,
    min_discrepancy_outside_lp,
    prokhorov_distance,
    prokhorov_via_coupling,
    total_variation,
)
from ghforge.spaces import validate_metric

from genspaces import random_space


def random_measure(rng, host, max_support=None):
    n = host.n if max_support is None else min(host.n, max_support)
    size = int(rng.integers(1, n + 1))
    sup = rng.choice(host.n, size=size, replace=False)
    return FiniteMeasure(host, {int(i): round(float(rng.uniform(0.1, 2.0)), 3) for i in sup})


# -- Hausdorff ---------------------------------------------------------------


def test_hausdorff_examples():
    X = validate_metric([[0, 2], [2, 0]])
    assert hausdorff_distance({0, 1}, {0, 1}, X) == 0.0
    assert hausdorff_distance({0}, {0, 1}, X) == 2.0
    assert hausdorff_distance(set(), {0}, X) == math.inf
    assert hausdorff_distance(set(), set(), X) == 0.0


def test_hausdorff_is_metric_on_nonempty_subsets():
    rng = np.random.default_rng(10)
    for _ in range(10):
        X = random_space(rng, 8)
        subsets = []
        for _ in range(3):
            size = int(rng.integers(1, 9))
            subsets.append(frozenset(int(i) for i in rng.choice(8, size=size, replace=False)))
        A, B, C = subsets
        assert hausdorff_distance(A, B, X) == hausdorff_distance(B, A, X)
        assert (hausdorff_distance(A, B, X) == 0.0) == (A == B)
        assert (
            hausdorff_distance(A, C, X)
            <= hausdorff_distance(A, B, X) + hausdorff_distance(B, C, X) + 1e-12
        )


# -- total variation ---------------------------------------------------------


def test_total_variation_examples():
    X = validate_metric([[0, 1], [1, 0]])
    mu = FiniteMeasure(X, {0: 1.0})
    assert total_variation(mu, mu) == 0.0
    assert total_variation(mu, FiniteMeasure(X, {0: 0.4})) == pytest.approx(0.6, abs=1e-15)
    assert total_variation(
        FiniteMeasure(X, {0: 1.0}), FiniteMeasure(X, {1: 2.0})
    ) == 2.0


def test_total_variation_equals_subset_sup():
    rng = np.random.default_rng(11)
    for _ in range(25):
        X = random_space(rng, int(rng.integers(1, 7)))
        mu, nu = random_measure(rng, X), random_measure(rng, X)
        wm, wn = mu.as_dict(), nu.as_dict()
        atoms = sorted(set(wm) | set(wn))
        sup = 0.0
        for r in range(len(atoms) + 1):
            for combo in combinations(atoms, r):
                gap = abs(
                    math.fsum(wm.get(a, 0.0) for a in combo)
                    - math.fsum(wn.get(a, 0.0) for a in combo)
                )
                sup = max(sup, gap)
        assert total_variation(mu, nu) == pytest.approx(sup, abs=1e-12)


# -- discrepancy -------------------------------------------------------------


def test_discrepancy_exact_coupling_is_zero():
    X = validate_metric([[0, 1], [1, 0]])
    mu = FiniteMeasure(X, {0: 0.5, 1: 0.5})
    alpha = Coupling(X, X, {(0, 1): 0.5, (1, 0): 0.5})
    assert discrepancy(alpha, mu, mu) == 0.0


def test_discrepancy_empty_coupling():
    X = validate_metric([[0, 1], [1, 0]])
    mu = FiniteMeasure(X, {0: 1.0})
    nu = FiniteMeasure(X, {1: 2.0})
    alpha = Coupling(X, X, {})
    assert discrepancy(alpha, mu, nu) == 3.0


def test_discrepancy_product_dirac():
    X = validate_metric([[0, 1], [1, 0]])
    alpha = Coupling(X, X, {(0, 1): 1.0})
    assert discrepancy(alpha, FiniteMeasure(X, {0: 1.0}), FiniteMeasure(X, {1: 1.0})) == 0.0


# -- coupling subproblem -----------------------------------------------------


def test_min_discrepancy_examples():
    X = validate_metric([[0, 1], [1, 0]])
    mu = FiniteMeasure(X, {0: 1.0})
    nu = FiniteMeasure(X, {1: 1.0})
    # full transport allowed: exact coupling
    assert min_discrepancy_outside(mu, nu, {(0, 1)}) == 0.0
    # nothing allowed: a unit of mass may still be routed anywhere at cost
    # one while saving one from each marginal term, so the optimum is the
    # larger total mass, not the sum of both
    assert min_discrepancy_outside(mu, nu, set()) == 1.0
    # pushforward along an allowed bijection
    assert min_discrepancy_outside(FiniteMeasure(X, {0: 0.7}), FiniteMeasure(X, {1: 0.7}), {(0, 1)}) == 0.0


def test_min_discrepancy_monotone_in_allowed():
    rng = np.random.default_rng(12)
    for _ in range(20):
        X = random_space(rng, 4)
        mu, nu = random_measure(rng, X), random_measure(rng, X)
        pairs = [(a, b) for a in mu.support for b in nu.support]
        rng.shuffle(pairs)
        allowed = set()
        prev = min_discrepancy_outside(mu, nu, allowed)
        for p in pairs:
            allowed.add(p)
            cur = min_discrepancy_outside(mu, nu, allowed)
            assert cur <= prev + 1e-12
            prev = cur


def test_min_discrepancy_flow_vs_lp():
    rng = np.random.default_rng(13)
    for _ in range(40):
        X = random_space(rng, int(rng.integers(1, 6)))
        mu, nu = random_measure(rng, X), random_measure(rng, X)
        pairs = [(a, b) for a in mu.support for b in nu.support]
        size = int(rng.integers(0, len(pairs) + 1))
        chosen = set(map(tuple, rng.permutation(pairs)[:size])) if pairs else set()
        fast = min_discrepancy_outside(mu, nu, chosen)
        slow = min_discrepancy_outside_lp(mu.as_dict(), nu.as_dict(), chosen)
        assert fast == pytest.approx(slow, abs=1e-9)


def test_min_discrepancy_box_flow_vs_lp():
    # the boxed variant has two independent solvers: exact rational simplex
    # (fast path) and scipy on the raw formulation (oracle side)
    from ghforge.measures import min_discrepancy_box_exact

    rng = np.random.default_rng(18)
    for trial in range(60):
        nl, nr = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        left = [f"u{i}" for i in range(nl)]
        right = [f"v{j}" for j in range(nr)]
        mu = {u: round(float(rng.uniform(0.1, 2.0)), 3) for u in left}
        hi = {v: round(float(rng.uniform(0.1, 2.0)), 3) for v in right}
        lo = {v: round(float(rng.uniform(0.0, hi[v])), 3) for v in right}
        pairs = [(u, v) for u in left for v in right]
        size = int(rng.integers(0, len(pairs) + 1))
        allowed = set(map(tuple, rng.permutation(pairs)[:size])) if pairs else set()
        exact = min_discrepancy_box_exact(mu, lo, hi, allowed)
        lp = min_discrepancy_outside_lp(mu, None, allowed, box_lo=lo, box_hi=hi)
        assert exact == pytest.approx(lp, abs=1e-8)
        # the box only relaxes the fixed-target problem
        fixed = min_discrepancy_outside_lp(mu, hi, allowed)
        assert exact <= fixed + 1e-9


def test_min_discrepancy_witness_is_feasible():
    rng = np.random.default_rng(14)
    for _ in range(15):
        X = random_space(rng, 4)
        mu, nu = random_measure(rng, X), random_measure(rng, X)
        allowed = {(a, b) for a in mu.support for b in nu.support if X.d(a, b) <= 1.0}
        value, alpha = min_discrepancy_core(mu.as_dict(), nu.as_dict(), allowed, want_witness=True)
        coupling = Coupling(X, X, alpha)
        achieved = discrepancy(coupling, mu, nu) + coupling.mass_outside(allowed)
        assert achieved == pytest.approx(value, abs=1e-9)


# -- Prokhorov ---------------------------------------------------------------


def test_prokhorov_examples():
    X = validate_metric([[0, 0.3], [0.3, 0]])
    mu = FiniteMeasure(X, {0: 1.0})
    assert prokhorov_distance(mu, mu) == 0.0
    assert prokhorov_distance(mu, FiniteMeasure(X, {1: 1.0})) == pytest.approx(0.3)
    assert prokhorov_distance(mu, FiniteMeasure(X, {0: 2.0})) == pytest.approx(1.0)


def test_prokhorov_below_total_variation_and_diameter_scale():
    rng = np.random.default_rng(15)
    for _ in range(25):
        X = random_space(rng, int(rng.integers(1, 7)))
        mu, nu = random_measure(rng, X), random_measure(rng, X)
        p = prokhorov_distance(mu, nu)
        assert p <= total_variation(mu, nu) + 1e-12
        bound = max(X.diameter(), abs(mu.mass() - nu.mass()))
        assert p <= bound + 1e-12


def test_prokhorov_strassen_consistency():
    rng = np.random.default_rng(16)
    for _ in range(60):
        X = random_space(rng, int(rng.integers(1, 7)))
        mu, nu = random_measure(rng, X, 6), random_measure(rng, X, 6)
        direct = prokhorov_distance(mu, nu, method="scan")
        coupled = prokhorov_via_coupling(mu, nu)
        assert direct == pytest.approx(coupled, abs=1e-9)


def test_prokhorov_is_symmetric_exactly():
    rng = np.random.default_rng(17)
    for _ in range(20):
        X = random_space(rng, 5)
        mu, nu = random_measure(rng, X), random_measure(rng, X)
        assert prokhorov_distance(mu, nu) == prokhorov_distance(nu, mu)
