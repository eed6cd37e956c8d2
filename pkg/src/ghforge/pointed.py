"""The pointed metric for boundedly-compact spaces, at finite desk scale.

Every input here is a finite structured space with a mandatory origin,
standing in for a boundedly-compact pointed space.  The metric compares
truncated balls around the origins:

    d(M, N) = inf { eps in (0,1] : a_eps(M,N) v a_eps(N,M) < eps/2 },

with inf of the empty set defined as 1, where a_eps(M,N) is the smallest
compact pointed distance from the ball of radius 1/eps in M to any
substructured subspace Y' of N squeezed between the ball of radius
1/eps - eps and N itself.

Both a_eps and the ball contents are piecewise constant in eps with
breakpoints where 1/eps or 1/eps - eps crosses an origin distance, so the
infimum is computed exactly on that lattice; no bisection is involved.
The integral variant integrates e^-r (1 ^ compact distance of the r-balls)
over r >= 0, again exactly, since the radial profiles are step functions.
"""

import math
from dataclasses import dataclass

from .compact import cgf_distance, cgf_with_spec, oracle_cgf
from .errors import TooLarge
from .guards import subset_bits
from .spaces import PointedSpace, closed_ball
from .structures import (
    Curve,
    MarkedMeasure,
    MarkedSubset,
    Measure,
    Point,
    StructuredSpace,
    Subset,
    TupleStructure,
    truncate,
)


class PointedStructuredSpace(StructuredSpace):
    """A structured space whose origin is mandatory."""

    def __post_init__(self):
        super().__post_init__()
        if self.origin is None:
            raise ValueError("PointedStructuredSpace requires an origin")


def _require_origin(M, who):
    if M.origin is None:
        raise ValueError(f"{who} requires a pointed space (origin set)")


def pcball(M, r, grave_ok=False):
    """The closed r-ball around the origin with the truncated structure.

    A distinguished-point component outside the ball raises OutOfBall
    unless ``grave_ok`` admits the grave value (internal callers do).
    """
    _require_origin(M, "pcball")
    ball = closed_ball(PointedSpace(M.space, M.origin), r)
    sub, emb = ball
    inverse = {h: s for s, h in enumerate(emb.map)}
    return StructuredSpace(sub, truncate(M.structure, ball, grave_ok=grave_ok), inverse[M.origin])


@dataclass(frozen=True)
class RadialProfile:
    """Ball contents as a step function of the radius.

    ``breakpoints`` are the distinct origin distances (always starting at
    0); ``segments[k]`` is pcball at every radius in
    [breakpoints[k], breakpoints[k+1]).
    """

    breakpoints: tuple
    segments: tuple

    @classmethod
    def of(cls, M, grave_ok=True):
        _require_origin(M, "RadialProfile")
        dists = sorted({0.0} | {M.space.d(M.origin, i) for i in range(M.space.n)})
        return cls(tuple(dists), tuple(pcball(M, r, grave_ok=grave_ok) for r in dists))

    def at(self, r):
        from bisect import bisect_right

        k = bisect_right(self.breakpoints, r) - 1
        return self.segments[max(k, 0)]


# ---------------------------------------------------------------------------
# substructure alternatives for the a_eps infimum


def _within(point_set, tup):
    return all(i in point_set for i in tup)


def _spec_alternatives(s, S, inner, idx_map, drop_lower):
    """All admissible Y'-side structure specs between the truncations to
    ``inner`` and to ``S``; continuous choices (measures) stay symbolic
    as box specs, discrete ones (points, curve prefixes) are enumerated."""
    if s is None:
        return [None]
    if isinstance(s, Point):
        if s.is_grave:
            return [Point(None)]
        alts = []
        if s.index in S:
            alts.append(Point(idx_map[s.index]))
        if drop_lower or s.index not in inner:
            alts.append(Point(None))
        return alts
    if isinstance(s, Measure):
        hi = {((idx_map[i],), None): w for i, w in s.weights if i in S}
        lo = (
            {}
            if drop_lower
            else {((idx_map[i],), None): w for i, w in s.weights if i in inner}
        )
        return [("box", lo, hi)]
    if isinstance(s, MarkedMeasure):
        hi, lo = {}, {}
        for tup, mk, w in s.atoms:
            if _within(S, tup):
                key = (tuple(idx_map[i] for i in tup), mk)
                hi[key] = hi.get(key, 0.0) + w
                if not drop_lower and _within(inner, tup):
                    lo[key] = lo.get(key, 0.0) + w
        return [("box", lo, hi)]
    if isinstance(s, Subset):
        forced = {((idx_map[i],), None) for i in s.members if not drop_lower and i in inner}
        optional = {((idx_map[i],), None) for i in s.members if i in S} - forced
        return [("subset_range", forced, optional)]
    if isinstance(s, MarkedSubset):
        forced = {
            (tuple(idx_map[i] for i in tup), mk)
            for tup, mk in s.members
            if not drop_lower and _within(inner, tup)
        }
        optional = {
            (tuple(idx_map[i] for i in tup), mk)
            for tup, mk in s.members
            if _within(S, tup)
        } - forced
        return [("subset_range", forced, optional)]
    if isinstance(s, Curve):
        full = len(s.values)
        for pos, v in enumerate(s.values):
            if v not in S:
                full = pos
                break
        low = 0
        if not drop_lower:
            for pos, v in enumerate(s.values[:full]):
                if v not in inner:
                    break
                low = pos + 1
        return [
            Curve(s.times[:k], tuple(idx_map[v] for v in s.values[:k]))
            for k in range(low, full + 1)
        ]
    if isinstance(s, TupleStructure):
        pools = [_spec_alternatives(c, S, inner, idx_map, drop_lower) for c in s.children]
        combos = [()]
        for pool in pools:
            combos = [prefix + (choice,) for prefix in combos for choice in pool]
        return [("tuple_spec", combo) for combo in combos]
    raise TypeError(f"unsupported structure {type(s).__name__}")


def _spec_is_concrete(spec):
    if spec is None or not isinstance(spec, tuple):
        return True
    if spec[0] == "tuple_spec":
        return all(_spec_is_concrete(c) for c in spec[1])
    return False


def _concrete_structure(spec, template):
    if spec is None or not isinstance(spec, tuple):
        return spec
    children = tuple(
        _concrete_structure(c, t) for c, t in zip(spec[1], template.children)
    )
    return TupleStructure(children, template.combinator)


def a_eps(M, N, eps, drop_lower=False, use_oracle=False, guard=None):
    """Smallest compact distance from M's 1/eps-ball to an admissible part of N.

    The infimum runs over pointed subspaces Y' = (S, o; a') with the
    1/eps - eps ball of N inside S and a' squeezed between the structure
    truncated to that inner ball and the one truncated to S
    (``drop_lower`` removes the inner constraint, see the variant
    discussion in the construction).
    """
    _require_origin(M, "a_eps")
    _require_origin(N, "a_eps")
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    r1 = 1.0 / eps
    r0 = r1 - eps
    ball_m = pcball(M, r1, grave_ok=True)

    host = N.space
    dists = [host.d(N.origin, i) for i in range(host.n)]
    if drop_lower:
        inner = {N.origin}
    else:
        inner = {i for i, d in enumerate(dists) if d <= r0}
    opts = sorted(set(range(host.n)) - inner, key=lambda i: dists[i])
    if len(opts) > subset_bits():
        raise TooLarge(f"{len(opts)} optional points exceed the 2^{subset_bits()} guard")

    candidates = []
    for mask in range(1 << len(opts)):
        S = set(inner)
        maxd = max((dists[i] for i in inner), default=0.0)
        for b, i in enumerate(opts):
            if mask >> b & 1:
                S.add(i)
                maxd = max(maxd, dists[i])
        candidates.append((maxd, S))
    candidates.sort(key=lambda c: (c[0], len(c[1])))

    best = math.inf
    for maxd, S in candidates:
        # origins are matched, so any y in S forces distortion at least
        # d(o,y) - r1 against points of the 1/eps-ball: prune far sets
        if best < math.inf and (maxd - r1) / 2.0 >= best:
            continue
        indices = sorted(S)
        idx_map = {h: k for k, h in enumerate(indices)}
        sub, _ = host.restrict(indices)
        o_sub = idx_map[N.origin]
        for spec in _spec_alternatives(N.structure, S, inner, idx_map, drop_lower):
            if use_oracle and _spec_is_concrete(spec):
                Yp = StructuredSpace(sub, _concrete_structure(spec, N.structure), o_sub)
                val = oracle_cgf(ball_m, Yp, guard=guard).value
            else:
                val = cgf_with_spec(ball_m, sub, o_sub, spec, guard=guard).value
            if val < best:
                best = val
    return best


# ---------------------------------------------------------------------------
# the pointed metric


def _eps_lattice(M, N):
    """Breakpoints of eps -> (balls at 1/eps, balls at 1/eps - eps) in (0, 1]."""
    radii = set()
    for sp, o in ((M.space, M.origin), (N.space, N.origin)):
        for i in range(sp.n):
            radii.add(sp.d(o, i))
    eps_values = {1.0}
    for r in radii:
        if r >= 1.0:
            eps_values.add(1.0 / r)
        # 1/eps - eps = r  <=>  eps^2 + r eps - 1 = 0
        root = (-r + math.sqrt(r * r + 4.0)) / 2.0
        if 0.0 < root <= 1.0:
            eps_values.add(root)
    return sorted(eps_values)


def pointed_distance(M, N, drop_lower=False, use_oracle=False, guard=None):
    """The boundedly-compact pointed distance, a value in [0, 1].

    Scans the eps breakpoint lattice; a_eps is constant between
    breakpoints, so the infimum is exact.  Returns 1 when no eps
    qualifies (the inf-of-empty-set convention).
    """
    _require_origin(M, "pointed_distance")
    _require_origin(N, "pointed_distance")
    lattice = _eps_lattice(M, N)
    best = 1.0
    prev = 0.0
    for e in lattice:
        if prev >= best:
            break
        a = a_eps(M, N, e, drop_lower=drop_lower, use_oracle=use_oracle, guard=guard)
        if a < math.inf:
            b = a_eps(N, M, e, drop_lower=drop_lower, use_oracle=use_oracle, guard=guard)
            worst = max(a, b)
            if worst < math.inf:
                cand = max(prev, 2.0 * worst)
                if cand < e and cand < best:
                    best = cand
        prev = e
    return min(best, 1.0)


def radial_distance(M, N, r, guard=None):
    """Compact distance of the two r-balls (origin included as a component)."""
    return cgf_distance(pcball(M, r, grave_ok=True), pcball(N, r, grave_ok=True), guard=guard).value


def integral_distance(M, N, guard=None):
    """Integral of e^-r (1 ^ distance of the r-balls): exact segment sums.

    Both radial profiles are step functions, so the integrand is constant
    between consecutive origin distances and the integral is a finite sum
    with an analytic tail.
    """
    _require_origin(M, "integral_distance")
    _require_origin(N, "integral_distance")
    breaks = sorted(
        {0.0}
        | {M.space.d(M.origin, i) for i in range(M.space.n)}
        | {N.space.d(N.origin, i) for i in range(N.space.n)}
    )
    total = 0.0
    for k, r in enumerate(breaks):
        d = min(1.0, radial_distance(M, N, r, guard=guard))
        if k + 1 < len(breaks):
            weight = math.exp(-r) - math.exp(-breaks[k + 1])
        else:
            weight = math.exp(-r)
        total += weight * d
    return total


def sequence_report(spaces, radius_grid=None, cauchy_threshold=1.0, guard=None):
    """Pairwise pointed and integral distances for a sequence of spaces.

    Includes the consecutive-distance series, a Cauchy heuristic (their
    sum stays below ``cauchy_threshold``), and compact-distance traces of
    consecutive pairs over a radius grid.
    """
    spaces = list(spaces)
    for S in spaces:
        _require_origin(S, "sequence_report")
    n = len(spaces)
    pm = [[0.0] * n for _ in range(n)]
    im = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            pm[i][j] = pm[j][i] = pointed_distance(spaces[i], spaces[j], guard=guard)
            im[i][j] = im[j][i] = integral_distance(spaces[i], spaces[j], guard=guard)
    consecutive_p = [pm[i][i + 1] for i in range(n - 1)]
    consecutive_i = [im[i][i + 1] for i in range(n - 1)]
    if radius_grid is None:
        radii = set()
        for S in spaces:
            radii |= {S.space.d(S.origin, i) for i in range(S.space.n)}
        radius_grid = sorted(radii | {0.0})
    traces = []
    for i in range(n - 1):
        traces.append(
            {
                "pair": [i, i + 1],
                "values": [
                    min(1.0, radial_distance(spaces[i], spaces[i + 1], r, guard=guard))
                    for r in radius_grid
                ],
            }
        )
    total = math.fsum(consecutive_p)
    return {
        "count": n,
        "pointed_matrix": pm,
        "integral_matrix": im,
        "consecutive_pointed": consecutive_p,
        "consecutive_integral": consecutive_i,
        "consecutive_sum": total,
        "cauchy": bool(total < cauchy_threshold),
        "cauchy_threshold": cauchy_threshold,
        "radius_grid": list(radius_grid),
        "radius_traces": traces,
    }
