"""Distances between subsets and finite measures inside one host space.

The coupling subproblem behind the Strassen-type characterisation is

    minimise  D(alpha; mu, nu) + alpha(outside allowed pairs)

over all finitely supported measures alpha on the product, where
D(alpha; mu, nu) = tv(first marginal, mu) + tv(second marginal, nu).
LP duality gives the closed form

    value = max(mass(mu), mass(nu)) - (max mass transportable along allowed pairs),

because a unit of transport along an allowed pair saves one unit from each
total-variation term, while routing a unit anywhere else saves the same two
units at a cost of one.  The fast path computes the max-flow in exact
rational arithmetic; an independent scipy LP on the raw formulation backs
the brute-force oracle.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import HostMismatch, TooLarge
from .guards import subset_bits
from .spaces import FiniteMetricSpace


@dataclass(frozen=True)
class FiniteMeasure:
    """Finitely supported measure on a host space; absent indices carry 0."""

    host: FiniteMetricSpace
    weights: tuple  # sorted tuple of (index, positive weight)

    def __post_init__(self):
        if isinstance(self.weights, dict):
            items = self.weights.items()
        else:
            items = self.weights
        clean = tuple(sorted((int(i), float(w)) for i, w in items if w != 0.0))
        for i, w in clean:
            if w < 0:
                raise ValueError(f"weight at index {i} is negative: {w}")
            if not 0 <= i < self.host.n:
                raise ValueError(f"atom index {i} out of range")
        object.__setattr__(self, "weights", clean)

    def weight(self, i):
        for j, w in self.weights:
            if j == i:
                return w
        return 0.0

    @property
    def support(self):
        return tuple(i for i, _ in self.weights)

    def mass(self, indices=None):
        if indices is None:
            return math.fsum(w for _, w in self.weights)
        indices = set(indices)
        return math.fsum(w for i, w in self.weights if i in indices)

    def as_dict(self):
        return dict(self.weights)


@dataclass(frozen=True)
class Coupling:
    """Finitely supported measure on the product of two hosts."""

    left_host: FiniteMetricSpace
    right_host: FiniteMetricSpace
    mass: tuple  # sorted tuple of ((i, j), positive weight)

    def __post_init__(self):
        if isinstance(self.mass, dict):
            items = self.mass.items()
        else:
            items = self.mass
        clean = tuple(sorted(((int(i), int(j)), float(w)) for (i, j), w in items if w != 0.0))
        for (i, j), w in clean:
            if w < 0:
                raise ValueError(f"mass at {(i, j)} is negative: {w}")
        object.__setattr__(self, "mass", clean)

    def left_marginal(self):
        out = {}
        for (i, _), w in self.mass:
            out[i] = out.get(i, 0.0) + w
        return FiniteMeasure(self.left_host, out)

    def right_marginal(self):
        out = {}
        for (_, j), w in self.mass:
            out[j] = out.get(j, 0.0) + w
        return FiniteMeasure(self.right_host, out)

    def mass_outside(self, allowed):
        return math.fsum(w for pair, w in self.mass if pair not in allowed)


def hausdorff_core(A, B, dist_fn):
    """Hausdorff distance of two finite atom sets under an arbitrary metric.

    Empty vs nonempty is +inf; empty vs empty is 0.
    """
    A, B = set(A), set(B)
    if not A and not B:
        return 0.0
    if not A or not B:
        return math.inf
    d_ab = max(min(dist_fn(a, b) for b in B) for a in A)
    d_ba = max(min(dist_fn(a, b) for a in A) for b in B)
    return max(d_ab, d_ba)


def hausdorff_distance(A, B, host):
    """Smallest eps with A inside the closed eps-neighbourhood of B and vice versa."""
    return hausdorff_core(A, B, host.d)


def total_variation(mu, nu):
    """sup over subsets A of |mu(A) - nu(A)|, computed from the signed parts."""
    if mu.host != nu.host:
        raise HostMismatch("total_variation requires a common host")
    return _tv_core(mu.as_dict(), nu.as_dict())


def _tv_core(wl, wr):
    keys = set(wl) | set(wr)
    pos = math.fsum(max(wl.get(k, 0.0) - wr.get(k, 0.0), 0.0) for k in keys)
    neg = math.fsum(max(wr.get(k, 0.0) - wl.get(k, 0.0), 0.0) for k in keys)
    return max(pos, neg)


def discrepancy(alpha, mu, nu):
    """tv(first marginal of alpha, mu) + tv(second marginal of alpha, nu)."""
    if alpha.left_host != mu.host or alpha.right_host != nu.host:
        raise HostMismatch("coupling hosts do not match the measures")
    return total_variation(alpha.left_marginal(), mu) + total_variation(alpha.right_marginal(), nu)


# ---------------------------------------------------------------------------
# the coupling subproblem


def _max_transport(wl, wr, allowed):
    """Exact max mass transportable from wl to wr along allowed key pairs.

    Edmonds-Karp on the bipartite graph with rational capacities; returns the
    flow value and the per-pair flow.
    """
    left = [k for k in sorted(wl, key=repr) if wl[k] > 0]
    right = [q for q in sorted(wr, key=repr) if wr[q] > 0]
    cap_l = {k: Fraction(wl[k]) for k in left}
    cap_r = {q: Fraction(wr[q]) for q in right}
    adj = {k: [q for q in right if (k, q) in allowed] for k in left}
    radj = {q: [k for k in left if (k, q) in allowed] for q in right}
    flow = {}
    used_l = {k: Fraction(0) for k in left}
    used_r = {q: Fraction(0) for q in right}

    while True:
        # BFS for an augmenting path: source -> L (spare supply) ->
        # forward allowed edges -> R, backtracking over positive flow
        parent_l = {k: None for k in left if used_l[k] < cap_l[k]}
        parent_r = {}
        frontier = list(parent_l)
        goal = None
        while frontier and goal is None:
            nxt = []
            for k in frontier:
                for q in adj[k]:
                    if q in parent_r:
                        continue
                    parent_r[q] = k
                    if used_r[q] < cap_r[q]:
                        goal = q
                        break
                    for k2 in radj[q]:
                        if k2 not in parent_l and flow.get((k2, q), Fraction(0)) > 0:
                            parent_l[k2] = q
                            nxt.append(k2)
                if goal is not None:
                    break
            frontier = nxt
        if goal is None:
            break

        edges = []  # (k, q, +1) pushes, (k, q, -1) cancels
        q = goal
        bottleneck = cap_r[goal] - used_r[goal]
        while True:
            k = parent_r[q]
            edges.append((k, q, 1))
            prev = parent_l[k]
            if prev is None:
                bottleneck = min(bottleneck, cap_l[k] - used_l[k])
                source_end = k
                break
            edges.append((k, prev, -1))
            bottleneck = min(bottleneck, flow[(k, prev)])
            q = prev
        for k, q2, sign in edges:
            flow[(k, q2)] = flow.get((k, q2), Fraction(0)) + sign * bottleneck
        used_r[goal] += bottleneck
        used_l[source_end] += bottleneck

    value = sum(used_r.values(), Fraction(0))
    return value, {pair: f for pair, f in flow.items() if f > 0}


def min_discrepancy_core(wl, wr, allowed, want_witness=False):
    """Closed-form optimum of D(alpha) + alpha(allowed^c) over all couplings.

    ``wl``/``wr`` map atoms (any hashable) to positive weights; ``allowed``
    is a set of atom pairs.  Returns the value, plus an optimal coupling
    when requested.
    """
    total_l = sum((Fraction(w) for w in wl.values()), Fraction(0))
    total_r = sum((Fraction(w) for w in wr.values()), Fraction(0))
    transported, flow = _max_transport(wl, wr, allowed)
    value = max(total_l, total_r) - transported
    if not want_witness:
        return float(value), None
    # route the leftover min-side mass across disallowed pairs: each unit
    # saves one from each tv term at cost one, matching the closed form
    alpha = dict(flow)
    rem_l = {k: Fraction(wl[k]) for k in wl}
    rem_r = {q: Fraction(wr[q]) for q in wr}
    for (k, q), f in flow.items():
        rem_l[k] -= f
        rem_r[q] -= f
    left_queue = [(k, m) for k, m in sorted(rem_l.items(), key=repr) if m > 0]
    right_queue = [(q, m) for q, m in sorted(rem_r.items(), key=repr) if m > 0]
    li = ri = 0
    while li < len(left_queue) and ri < len(right_queue):
        k, ml = left_queue[li]
        q, mr = right_queue[ri]
        step = min(ml, mr)
        alpha[(k, q)] = alpha.get((k, q), Fraction(0)) + step
        left_queue[li] = (k, ml - step)
        right_queue[ri] = (q, mr - step)
        if left_queue[li][1] == 0:
            li += 1
        if right_queue[ri][1] == 0:
            ri += 1
    witness = {pair: float(f) for pair, f in alpha.items() if f > 0}
    return float(value), witness


def min_discrepancy_outside(mu, nu, allowed):
    """min over couplings alpha of D(alpha; mu, nu) + alpha(allowed^c)."""
    value, _ = min_discrepancy_core(mu.as_dict(), nu.as_dict(), set(allowed))
    return value


def min_discrepancy_outside_lp(mu_weights, nu_weights, allowed, box_lo=None, box_hi=None):
    """Independent scipy route: minimise the raw LP without the flow reduction.

    With ``box_lo``/``box_hi`` given, the right-hand measure becomes a free
    variable constrained atomwise to the box (used when optimising over
    substructures in the pointed metric).
    """
    from scipy.optimize import linprog

    left = sorted(mu_weights, key=repr)
    if box_lo is not None:
        right = sorted(set(box_hi) | set(box_lo), key=repr)
    else:
        right = sorted(nu_weights, key=repr)
    n, m = len(left), len(right)
    boxed = box_lo is not None
    # variables: alpha (n*m), e+ (n), e- (n), f+ (m), f- (m), t1, t2 [, nu' (m)]
    nvars = n * m + 2 * n + 2 * m + 2 + (m if boxed else 0)
    idx_alpha = lambda i, j: i * m + j
    off_ep = n * m
    off_em = off_ep + n
    off_fp = off_em + n
    off_fm = off_fp + m
    it1 = off_fm + m
    it2 = it1 + 1
    off_nu = it2 + 1

    c = np.zeros(nvars)
    for i in range(n):
        for j in range(m):
            if (left[i], right[j]) not in allowed:
                c[idx_alpha(i, j)] = 1.0
    c[it1] = 1.0
    c[it2] = 1.0

    a_eq = np.zeros((n + m, nvars))
    b_eq = np.zeros(n + m)
    for i in range(n):
        for j in range(m):
            a_eq[i, idx_alpha(i, j)] = 1.0
        a_eq[i, off_ep + i] = -1.0
        a_eq[i, off_em + i] = 1.0
        b_eq[i] = mu_weights[left[i]]
    for j in range(m):
        for i in range(n):
            a_eq[n + j, idx_alpha(i, j)] = 1.0
        a_eq[n + j, off_fp + j] = -1.0
        a_eq[n + j, off_fm + j] = 1.0
        if boxed:
            a_eq[n + j, off_nu + j] = -1.0
        else:
            b_eq[n + j] = nu_weights.get(right[j], 0.0)

    a_ub = np.zeros((4, nvars))
    a_ub[0, off_ep : off_ep + n] = 1.0
    a_ub[0, it1] = -1.0
    a_ub[1, off_em : off_em + n] = 1.0
    a_ub[1, it1] = -1.0
    a_ub[2, off_fp : off_fp + m] = 1.0
    a_ub[2, it2] = -1.0
    a_ub[3, off_fm : off_fm + m] = 1.0
    a_ub[3, it2] = -1.0
    b_ub = np.zeros(4)

    bounds = [(0, None)] * nvars
    if boxed:
        for j in range(m):
            bounds[off_nu + j] = (box_lo.get(right[j], 0.0), box_hi.get(right[j], 0.0))

    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"coupling LP failed: {res.message}")
    return float(res.fun)


_box_lp_cache = {}


def min_discrepancy_box_exact(mu_weights, box_lo, box_hi, allowed):
    """Exact-rational version of the boxed LP (pointed-metric fast path)."""
    key = (
        tuple(sorted(mu_weights.items(), key=repr)),
        tuple(sorted(box_lo.items(), key=repr)),
        tuple(sorted(box_hi.items(), key=repr)),
        frozenset(allowed),
    )
    got = _box_lp_cache.get(key)
    if got is not None:
        return got
    value = _min_discrepancy_box_exact(mu_weights, box_lo, box_hi, allowed)
    if len(_box_lp_cache) > 100000:
        _box_lp_cache.clear()
    _box_lp_cache[key] = value
    return value


def _min_discrepancy_box_exact(mu_weights, box_lo, box_hi, allowed):
    from . import exact_lp

    left = sorted(mu_weights, key=repr)
    right = sorted(set(box_hi) | set(box_lo), key=repr)
    n, m = len(left), len(right)
    # variables: alpha, e+, e-, f+, f-, t1, t2, s1..s4, nu'lo-shifted, box slacks
    # standard form: equalities only, x >= 0
    nm = n * m
    off_ep = nm
    off_em = off_ep + n
    off_fp = off_em + n
    off_fm = off_fp + m
    it1 = off_fm + m
    it2 = it1 + 1
    off_sl = it2 + 1  # 4 slack vars for the t constraints
    off_nu = off_sl + 4  # nu' shifted by its lower bound
    off_bx = off_nu + m  # slack for nu' upper bound
    nvars = off_bx + m

    rows = []
    rhs = []

    def new_row():
        rows.append([Fraction(0)] * nvars)
        rhs.append(Fraction(0))
        return rows[-1]

    for i in range(n):
        row = new_row()
        for j in range(m):
            row[i * m + j] = Fraction(1)
        row[off_ep + i] = Fraction(-1)
        row[off_em + i] = Fraction(1)
        rhs[-1] = Fraction(mu_weights[left[i]])
    for j in range(m):
        lo = Fraction(box_lo.get(right[j], 0.0))
        row = new_row()
        for i in range(n):
            row[i * m + j] = Fraction(1)
        row[off_fp + j] = Fraction(-1)
        row[off_fm + j] = Fraction(1)
        row[off_nu + j] = Fraction(-1)
        rhs[-1] = lo
    for j in range(m):
        lo = Fraction(box_lo.get(right[j], 0.0))
        hi = Fraction(box_hi.get(right[j], 0.0))
        row = new_row()
        row[off_nu + j] = Fraction(1)
        row[off_bx + j] = Fraction(1)
        rhs[-1] = hi - lo
    specs = [(off_ep, n, it1), (off_em, n, it1), (off_fp, m, it2), (off_fm, m, it2)]
    for k, (off, cnt, t) in enumerate(specs):
        row = new_row()
        for u in range(cnt):
            row[off + u] = Fraction(1)
        row[t] = Fraction(-1)
        row[off_sl + k] = Fraction(1)

    cost = [Fraction(0)] * nvars
    for i in range(n):
        for j in range(m):
            if (left[i], right[j]) not in allowed:
                cost[i * m + j] = Fraction(1)
    cost[it1] = Fraction(1)
    cost[it2] = Fraction(1)

    value, _ = exact_lp.solve(cost, rows, rhs)
    return float(value)


# ---------------------------------------------------------------------------
# Prokhorov


def _subset_masses(weights, members):
    return math.fsum(weights[k] for k in members)


def prokhorov_core(wa, wb, dist_fn, method="auto"):
    """inf of eps with a(A) <= b(A^eps) + eps and symmetrically, for all A.

    ``wa``/``wb`` map atoms to positive weights, ``dist_fn`` is the metric
    on atoms.  ``method`` is "scan" (candidate-eps plus exhaustive subsets),
    "coupling" (the Strassen characterisation through the coupling
    subproblem) or "auto".  Both routes are exact for finite measures.
    """
    wa = {k: w for k, w in wa.items() if w != 0.0}
    wb = {k: w for k, w in wb.items() if w != 0.0}
    if not wa and not wb:
        return 0.0
    if method == "auto":
        method = "scan" if max(len(wa), len(wb)) <= subset_bits() else "coupling"
    if method == "coupling":
        return _prokhorov_coupling_core(wa, wb, dist_fn)
    if max(len(wa), len(wb)) > subset_bits():
        raise TooLarge(
            f"subset scan over {max(len(wa), len(wb))} support points "
            f"exceeds 2^{subset_bits()} guard; use method='coupling'"
        )

    def neighbourhood(members, targets, eps):
        return [t for t in targets if any(dist_fn(s, t) <= eps for s in members)]

    def one_sided_ok(w1, w2, eps):
        atoms = list(w1)
        for r in range(1, len(atoms) + 1):
            for combo in combinations(atoms, r):
                lhs = _subset_masses(w1, combo)
                rhs = _subset_masses(w2, neighbourhood(combo, list(w2), eps)) + eps
                if lhs > rhs + 1e-15:
                    return False
        return True

    def feasible(eps):
        return one_sided_ok(wa, wb, eps) and one_sided_ok(wb, wa, eps)

    dists = sorted({0.0} | {dist_fn(a, b) for a in wa for b in wb})
    candidates = set(dists)
    for d in dists:
        for w1, w2 in ((wa, wb), (wb, wa)):
            atoms = list(w1)
            for r in range(1, len(atoms) + 1):
                for combo in combinations(atoms, r):
                    gap = _subset_masses(w1, combo) - _subset_masses(
                        w2, neighbourhood(combo, list(w2), d)
                    )
                    if gap > d:
                        candidates.add(gap)
    for c in sorted(candidates):
        if c >= 0 and feasible(c):
            return c
    raise AssertionError("no feasible candidate; breakpoint lattice incomplete")


def _prokhorov_coupling_core(wa, wb, dist_fn):
    dists = sorted({0.0} | {dist_fn(a, b) for a in wa for b in wb})
    for k, d in enumerate(dists):
        allowed = {(a, b) for a in wa for b in wb if dist_fn(a, b) <= d}
        value, _ = min_discrepancy_core(wa, wb, allowed)
        candidate = max(d, value)
        nxt = dists[k + 1] if k + 1 < len(dists) else math.inf
        if candidate < nxt or candidate == d:
            return candidate
    raise AssertionError("unreachable: last interval always yields a candidate")


def prokhorov_distance(mu, nu, method="auto"):
    """Prokhorov distance of two finite measures on a common host space."""
    if mu.host != nu.host:
        raise HostMismatch("prokhorov_distance requires a common host")
    return prokhorov_core(mu.as_dict(), nu.as_dict(), mu.host.d, method=method)


def prokhorov_via_coupling(mu, nu):
    """Strassen route: inf of eps with coupling value at eps-allowed pairs <= eps."""
    if mu.host != nu.host:
        raise HostMismatch("prokhorov_via_coupling requires a common host")
    return prokhorov_core(mu.as_dict(), nu.as_dict(), mu.host.d, method="coupling")
