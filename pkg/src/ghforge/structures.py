"""Additional structures on finite metric spaces and the functor operations.

A structure is one of: a distinguished point, a finite measure, a subset, a
k-marked measure or k-marked subset over a fixed finite mark space, a
time-sampled curve, or a tuple of these.  Structures store host indices
only; the host space travels separately (in a StructuredSpace).

Pushforward along isometric embeddings, in-ambient distance, truncation to
a ball and the truncation partial order are the four operations every kind
supports.  Marked kinds live on the product of k host copies and the mark
space under the max product metric.

Truncation of a distinguished point that leaves the ball raises OutOfBall
by default; internal callers pass ``grave_ok=True`` and receive the grave
value (``Point(None)`` / empty curve), whose distance to any live structure
is +inf.
"""

import math
from dataclasses import dataclass

from .errors import GridMismatch, HostMismatch, KindMismatch, OutOfBall
from .measures import hausdorff_core, prokhorov_core
from .spaces import FiniteMetricSpace


@dataclass(frozen=True)
class MarkSpace:
    """A finite metric space whose labels are mark names."""

    space: FiniteMetricSpace

    def d(self, a, b):
        return self.space.d(a, b)

    def fingerprint(self):
        return self.space.fingerprint()


class Structure:
    """Base class of the structure union; see module docstring."""

    __slots__ = ()


@dataclass(frozen=True)
class Point(Structure):
    """A distinguished point; index None is the grave (left the ball)."""

    index: int | None

    @property
    def is_grave(self):
        return self.index is None


@dataclass(frozen=True)
class Measure(Structure):
    """Finitely supported measure given as sorted (index, weight > 0) pairs."""

    weights: tuple

    def __post_init__(self):
        items = self.weights.items() if isinstance(self.weights, dict) else self.weights
        clean = tuple(sorted((int(i), float(w)) for i, w in items if w != 0.0))
        if any(w < 0 for _, w in clean):
            raise ValueError("measure weights must be positive")
        object.__setattr__(self, "weights", clean)

    def as_dict(self):
        return dict(self.weights)


@dataclass(frozen=True)
class Subset(Structure):
    """A subset of host indices; may be empty (extended-metric behaviour)."""

    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(i) for i in self.members))


@dataclass(frozen=True)
class MarkedMeasure(Structure):
    """Measure on host^k x mark space: atoms are (index tuple, mark, weight)."""

    k: int
    marks: MarkSpace
    atoms: tuple

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("marking order k must be >= 1")
        clean = []
        for tup, mark, w in self.atoms:
            tup = tuple(int(i) for i in tup)
            if len(tup) != self.k:
                raise ValueError(f"atom {tup} does not have k={self.k} coordinates")
            if float(w) < 0:
                raise ValueError("marked-measure weights must be positive")
            if float(w) != 0.0:
                clean.append((tup, int(mark), float(w)))
        object.__setattr__(self, "atoms", tuple(sorted(clean)))

    def as_dict(self):
        out = {}
        for tup, mark, w in self.atoms:
            key = (tup, mark)
            out[key] = out.get(key, 0.0) + w
        return out


@dataclass(frozen=True)
class MarkedSubset(Structure):
    """Subset of host^k x mark space: members are (index tuple, mark)."""

    k: int
    marks: MarkSpace
    members: frozenset

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("marking order k must be >= 1")
        clean = set()
        for tup, mark in self.members:
            tup = tuple(int(i) for i in tup)
            if len(tup) != self.k:
                raise ValueError(f"member {tup} does not have k={self.k} coordinates")
            clean.add((tup, int(mark)))
        object.__setattr__(self, "members", frozenset(clean))


@dataclass(frozen=True)
class Curve(Structure):
    """Finite time-sampled curve; an empty sample list is the grave."""

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(int(v) for v in self.values)
        if len(times) != len(values):
            raise ValueError("curve times and values must have equal length")
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("curve times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def is_grave(self):
        return not self.times


@dataclass(frozen=True)
class TupleStructure(Structure):
    """Tuple of structures under the max or weighted 2^-i (1 ^ d_i) combinator."""

    children: tuple
    combinator: str = "max"

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.combinator not in ("max", "weighted"):
            raise ValueError(f"unknown combinator {self.combinator!r}")
        if self.combinator == "weighted" and not self.children:
            raise ValueError("weighted combinator requires at least one child")


@dataclass(frozen=True)
class StructuredSpace:
    """A finite metric space, an optional origin, and an optional structure."""

    space: FiniteMetricSpace
    structure: Structure | None = None
    origin: int | None = None

    def __post_init__(self):
        if self.origin is not None and not 0 <= self.origin < self.space.n:
            raise IndexError("origin out of range")
        for i in structure_indices(self.structure):
            if not 0 <= i < self.space.n:
                raise HostMismatch(f"structure index {i} out of range for {self.space.n} points")

    def fingerprint(self):
        return (self.space.fingerprint(), self.origin, _fingerprint(self.structure))


def _fingerprint(s):
    if s is None:
        return None
    if isinstance(s, Point):
        return ("point", s.index)
    if isinstance(s, Measure):
        return ("measure", s.weights)
    if isinstance(s, Subset):
        return ("subset", tuple(sorted(s.members)))
    if isinstance(s, MarkedMeasure):
        return ("marked_measure", s.k, s.marks.fingerprint(), s.atoms)
    if isinstance(s, MarkedSubset):
        return ("marked_subset", s.k, s.marks.fingerprint(), tuple(sorted(s.members)))
    if isinstance(s, Curve):
        return ("curve", s.times, s.values)
    if isinstance(s, TupleStructure):
        return ("tuple", s.combinator) + tuple(_fingerprint(c) for c in s.children)
    raise KindMismatch(f"unknown structure {type(s).__name__}")


def structure_indices(s):
    """All host indices referenced by a structure."""
    if s is None:
        return set()
    if isinstance(s, Point):
        return set() if s.is_grave else {s.index}
    if isinstance(s, Measure):
        return {i for i, _ in s.weights}
    if isinstance(s, Subset):
        return set(s.members)
    if isinstance(s, MarkedMeasure):
        return {i for tup, _, _ in s.atoms for i in tup}
    if isinstance(s, MarkedSubset):
        return {i for tup, _ in s.members for i in tup}
    if isinstance(s, Curve):
        return set(s.values)
    if isinstance(s, TupleStructure):
        out = set()
        for child in s.children:
            out |= structure_indices(child)
        return out
    raise KindMismatch(f"unknown structure {type(s).__name__}")


def signature(s):
    """Comparability descriptor: kinds, orders and mark spaces must agree."""
    if s is None:
        return ("none",)
    if isinstance(s, Point):
        return ("point",)
    if isinstance(s, Measure):
        return ("measure",)
    if isinstance(s, Subset):
        return ("subset",)
    if isinstance(s, MarkedMeasure):
        return ("marked_measure", s.k, s.marks.fingerprint())
    if isinstance(s, MarkedSubset):
        return ("marked_subset", s.k, s.marks.fingerprint())
    if isinstance(s, Curve):
        return ("curve",)
    if isinstance(s, TupleStructure):
        return ("tuple", s.combinator) + tuple(signature(c) for c in s.children)
    raise KindMismatch(f"unknown structure {type(s).__name__}")


# ---------------------------------------------------------------------------
# pushforward


def pushforward(s, f):
    """Image of a structure under an isometric embedding; marks unchanged."""
    if s is None:
        return None
    n = f.source.n
    for i in structure_indices(s):
        if not 0 <= i < n:
            raise HostMismatch("structure does not live on the embedding source")
    if isinstance(s, Point):
        return s if s.is_grave else Point(f(s.index))
    if isinstance(s, Measure):
        return Measure(tuple((f(i), w) for i, w in s.weights))
    if isinstance(s, Subset):
        return Subset(frozenset(f(i) for i in s.members))
    if isinstance(s, MarkedMeasure):
        return MarkedMeasure(
            s.k, s.marks, tuple((tuple(f(i) for i in tup), m, w) for tup, m, w in s.atoms)
        )
    if isinstance(s, MarkedSubset):
        return MarkedSubset(
            s.k, s.marks, frozenset((tuple(f(i) for i in tup), m) for tup, m in s.members)
        )
    if isinstance(s, Curve):
        return Curve(s.times, tuple(f(v) for v in s.values))
    if isinstance(s, TupleStructure):
        return TupleStructure(tuple(pushforward(c, f) for c in s.children), s.combinator)
    raise KindMismatch(f"unknown structure {type(s).__name__}")


# ---------------------------------------------------------------------------
# ambient distance


def _product_dist(host, marks):
    def dist(a, b):
        (tup_a, mark_a), (tup_b, mark_b) = a, b
        d = max(host.d(i, j) for i, j in zip(tup_a, tup_b))
        if marks is not None:
            d = max(d, marks.d(mark_a, mark_b))
        return d

    return dist


def product_atoms(s):
    """Measure-like structures as atom dict keyed by (index tuple, mark or None)."""
    if isinstance(s, Measure):
        out = {}
        for i, w in s.weights:
            out[((i,), None)] = out.get(((i,), None), 0.0) + w
        return out
    if isinstance(s, MarkedMeasure):
        return s.as_dict()
    raise KindMismatch(f"{type(s).__name__} is not measure-like")


def product_members(s):
    """Subset-like structures as a set of (index tuple, mark or None)."""
    if isinstance(s, Subset):
        return {((i,), None) for i in s.members}
    if isinstance(s, MarkedSubset):
        return set(s.members)
    raise KindMismatch(f"{type(s).__name__} is not subset-like")


def ambient_distance(s, t, host):
    """Distance of two structures of the same kind living on one host.

    Point -> host distance; measures -> Prokhorov; subsets -> Hausdorff
    (both on the product host for marked kinds); curves -> sup over the
    shared grid (grids must match exactly); tuples -> declared combinator.
    Empty-vs-nonempty subsets and grave-vs-live points give +inf.
    """
    if signature(s) != signature(t):
        raise KindMismatch(f"cannot compare {signature(s)} with {signature(t)}")
    if s is None:
        return 0.0
    if isinstance(s, Point):
        if s.is_grave and t.is_grave:
            return 0.0
        if s.is_grave or t.is_grave:
            return math.inf
        return host.d(s.index, t.index)
    if isinstance(s, (Measure, MarkedMeasure)):
        marks = s.marks if isinstance(s, MarkedMeasure) else None
        return prokhorov_core(product_atoms(s), product_atoms(t), _product_dist(host, marks))
    if isinstance(s, (Subset, MarkedSubset)):
        marks = s.marks if isinstance(s, MarkedSubset) else None
        return hausdorff_core(product_members(s), product_members(t), _product_dist(host, marks))
    if isinstance(s, Curve):
        if s.times != t.times:
            raise GridMismatch("curves sampled on different time grids")
        if s.is_grave:
            return 0.0
        return max(host.d(a, b) for a, b in zip(s.values, t.values))
    if isinstance(s, TupleStructure):
        dists = [ambient_distance(a, b, host) for a, b in zip(s.children, t.children)]
        if s.combinator == "max":
            return max(dists, default=0.0)
        return max(2.0 ** -(i + 1) * min(1.0, d) for i, d in enumerate(dists))
    raise KindMismatch(f"unknown structure {type(s).__name__}")


# ---------------------------------------------------------------------------
# truncation and the partial order


def truncate(s, ball, grave_ok=False):
    """Restrict a structure to a ball given as (subspace, inclusion embedding).

    Measures keep atoms whose coordinates all lie inside; subsets intersect;
    curves keep the longest prefix of samples inside; a distinguished point
    outside raises OutOfBall (or becomes the grave with ``grave_ok``).
    Returned structures are indexed in the subspace.
    """
    sub, emb = ball
    inverse = {host_i: sub_i for sub_i, host_i in enumerate(emb.map)}
    return _truncate(s, inverse, grave_ok)


def _truncate(s, inverse, grave_ok):
    if s is None:
        return None
    if isinstance(s, Point):
        if s.is_grave:
            return s
        if s.index in inverse:
            return Point(inverse[s.index])
        if grave_ok:
            return Point(None)
        raise OutOfBall(f"distinguished point {s.index} left the ball")
    if isinstance(s, Measure):
        return Measure(tuple((inverse[i], w) for i, w in s.weights if i in inverse))
    if isinstance(s, Subset):
        return Subset(frozenset(inverse[i] for i in s.members if i in inverse))
    if isinstance(s, MarkedMeasure):
        kept = [
            (tuple(inverse[i] for i in tup), m, w)
            for tup, m, w in s.atoms
            if all(i in inverse for i in tup)
        ]
        return MarkedMeasure(s.k, s.marks, tuple(kept))
    if isinstance(s, MarkedSubset):
        kept = {
            (tuple(inverse[i] for i in tup), m)
            for tup, m in s.members
            if all(i in inverse for i in tup)
        }
        return MarkedSubset(s.k, s.marks, frozenset(kept))
    if isinstance(s, Curve):
        cut = len(s.values)
        for pos, v in enumerate(s.values):
            if v not in inverse:
                cut = pos
                break
        return Curve(s.times[:cut], tuple(inverse[v] for v in s.values[:cut]))
    if isinstance(s, TupleStructure):
        return TupleStructure(tuple(_truncate(c, inverse, grave_ok) for c in s.children), s.combinator)
    raise KindMismatch(f"unknown structure {type(s).__name__}")


def structure_leq(s, t):
    """Truncation partial order: weights <=, inclusion, curve prefix, equality."""
    if signature(s) != signature(t):
        raise KindMismatch(f"cannot order {signature(s)} against {signature(t)}")
    if s is None:
        return True
    if isinstance(s, Point):
        return s.is_grave or s == t
    if isinstance(s, Measure):
        tw = t.as_dict()
        return all(w <= tw.get(i, 0.0) for i, w in s.weights)
    if isinstance(s, Subset):
        return s.members <= t.members
    if isinstance(s, MarkedMeasure):
        tw = t.as_dict()
        return all(w <= tw.get(key, 0.0) for key, w in s.as_dict().items())
    if isinstance(s, MarkedSubset):
        return s.members <= t.members
    if isinstance(s, Curve):
        k = len(s.times)
        return s.times == t.times[:k] and s.values == t.values[:k]
    if isinstance(s, TupleStructure):
        return all(structure_leq(a, b) for a, b in zip(s.children, t.children))
    raise KindMismatch(f"unknown structure {type(s).__name__}")


# ---------------------------------------------------------------------------
# structured isomorphism


def find_structured_isomorphism(A, B, guard=None):
    """Isometry of underlying spaces carrying structure (and origin) exactly.

    Backtracks over distance-preserving bijections and checks pushforward
    equality; returns the embedding or None.
    """
    from .guards import correspondence_guard

    if guard is None:
        guard = correspondence_guard()
    if A.space.n + B.space.n > guard:
        from .errors import TooLarge

        raise TooLarge("isomorphism search guard exceeded")
    if A.space.n != B.space.n or signature(A.structure) != signature(B.structure):
        return None
    X, Y = A.space, B.space
    n = X.n
    assignment = [-1] * n
    used = [False] * n
    found = []

    if (A.origin is None) != (B.origin is None):
        return None

    def extend(i):
        if i == n:
            from .spaces import IsometricEmbedding

            f = IsometricEmbedding(X, Y, tuple(assignment))
            if A.origin is not None and f(A.origin) != B.origin:
                return False
            if pushforward(A.structure, f) == B.structure:
                found.append(f)
                return True
            return False
        for j in range(n):
            if used[j]:
                continue
            if any(Y.d(j, assignment[k]) != X.d(i, k) for k in range(i)):
                continue
            assignment[i] = j
            used[j] = True
            if extend(i + 1):
                return True
            used[j] = False
            assignment[i] = -1
        return False

    extend(0)
    return found[0] if found else None
