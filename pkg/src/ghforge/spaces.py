"""Finite metric spaces, balls, embeddings and correspondences.

A finite metric space is a list of opaque labels plus a symmetric distance
matrix.  Labels only matter for I/O; every algorithm works on indices, so
isometric copies of a space are indistinguishable except through embeddings.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import AsymmetricMatrix, MetricError, NonzeroDiagonal, TooLarge, TriangleViolation
from .guards import correspondence_guard

TRIANGLE_TOL = 1e-9


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Point labels plus a symmetric distance matrix with zero diagonal."""

    labels: tuple
    dist: np.ndarray = field(compare=False)

    def __post_init__(self):
        mat = np.asarray(self.dist, dtype=float)
        mat.setflags(write=False)
        object.__setattr__(self, "dist", mat)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self):
        return len(self.labels)

    def d(self, i, j):
        return float(self.dist[i, j])

    def diameter(self):
        return float(self.dist.max()) if self.n else 0.0

    def index_of(self, label):
        return self.labels.index(label)

    def restrict(self, indices):
        """Subspace on ``indices`` plus the inclusion embedding back into self."""
        indices = tuple(indices)
        sub = FiniteMetricSpace(
            tuple(self.labels[i] for i in indices),
            self.dist[np.ix_(indices, indices)],
        )
        return sub, IsometricEmbedding(sub, self, indices)

    def fingerprint(self):
        """Hashable identity used as a memoisation key."""
        return (self.labels, self.dist.tobytes())

    def __hash__(self):
        return hash(self.fingerprint())

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)


@dataclass(frozen=True)
class PointedSpace:
    """A finite metric space with a distinguished origin index."""

    space: FiniteMetricSpace
    origin: int

    def __post_init__(self):
        if not 0 <= self.origin < self.space.n:
            raise IndexError(f"origin {self.origin} out of range for {self.space.n} points")


@dataclass(frozen=True)
class IsometricEmbedding:
    """An injective, distance-preserving index map between two spaces."""

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    map: tuple

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(self.map))
        if len(set(self.map)) != len(self.map):
            raise ValueError("embedding map is not injective")
        for i in range(self.source.n):
            for j in range(self.source.n):
                if self.target.d(self.map[i], self.map[j]) != self.source.d(i, j):
                    raise ValueError(
                        f"map does not preserve distances at ({i},{j}): "
                        f"{self.target.d(self.map[i], self.map[j])} != {self.source.d(i, j)}"
                    )

    def __call__(self, i):
        return self.map[i]

    def compose(self, outer):
        """Composition outer(self(.)), defined when self.target is outer.source."""
        if outer.source is not self.target and outer.source != self.target:
            raise ValueError("embeddings do not compose")
        return IsometricEmbedding(self.source, outer.target, tuple(outer.map[i] for i in self.map))


def identity_embedding(space):
    return IsometricEmbedding(space, space, tuple(range(space.n)))


@dataclass(frozen=True)
class Correspondence:
    """A relation between two spaces whose projections cover both."""

    left: FiniteMetricSpace
    right: FiniteMetricSpace
    pairs: frozenset

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))
        left_cover = {i for i, _ in self.pairs}
        right_cover = {j for _, j in self.pairs}
        if left_cover != set(range(self.left.n)) or right_cover != set(range(self.right.n)):
            raise ValueError("correspondence does not have full projections")


def validate_metric(matrix, labels=None, triangle_tol=TRIANGLE_TOL):
    """Check the metric axioms and return the validated space.

    Symmetry and the zero diagonal are checked exactly; the triangle
    inequality with tolerance ``triangle_tol`` since inputs may be computed
    coordinates.
    """
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise MetricError("matrix is not square")
    n = mat.shape[0]
    if n == 0:
        raise MetricError("a metric space needs at least one point")
    for i in range(n):
        if mat[i, i] != 0.0:
            raise NonzeroDiagonal(i, float(mat[i, i]))
        for j in range(i + 1, n):
            if mat[i, j] != mat[j, i]:
                raise AsymmetricMatrix(i, j, float(mat[i, j]), float(mat[j, i]))
            if mat[i, j] <= 0.0:
                raise MetricError(f"d[{i}][{j}]={mat[i, j]} must be positive for distinct points")
    for i, j, k in product(range(n), repeat=3):
        if mat[i, k] > mat[i, j] + mat[j, k] + triangle_tol:
            raise TriangleViolation(i, j, k, float(mat[i, k]), float(mat[i, j] + mat[j, k]))
    if labels is None:
        labels = tuple(f"p{i}" for i in range(n))
    return FiniteMetricSpace(tuple(labels), mat)


def distortion(R):
    """sup over related pairs of |d(x,x') - d(y,y')|."""
    pairs = sorted(R.pairs)
    worst = 0.0
    for a in range(len(pairs)):
        i, j = pairs[a]
        for b in range(a, len(pairs)):
            k, l = pairs[b]
            gap = abs(R.left.d(i, k) - R.right.d(j, l))
            if gap > worst:
                worst = gap
    return worst


def closed_ball(P, r):
    """Restriction of ``P.space`` to the closed ``r``-ball around the origin.

    Membership is the closed comparison d <= r with no tolerance; the origin
    is always included.  Returns the subspace and its inclusion embedding.
    """
    space = P.space
    inside = [i for i in range(space.n) if space.d(P.origin, i) <= r]
    if P.origin not in inside:  # r < 0 guard; the origin is always kept
        inside = [P.origin]
    return space.restrict(sorted(inside))


def enumerate_correspondences(X, Y, guard=None):
    """Yield every subset of X x Y with full projections, exactly once.

    Enumerates by choosing a nonempty partner set for each left point and
    filtering on right coverage, so the stream is finite and duplicate-free.
    """
    if guard is None:
        guard = correspondence_guard()
    if X.n + Y.n > guard:
        raise TooLarge(f"|X|+|Y| = {X.n + Y.n} exceeds enumeration guard {guard}")
    m, n = X.n, Y.n
    full = (1 << n) - 1
    row_choices = range(1, 1 << n)

    def bits(mask):
        return [j for j in range(n) if mask >> j & 1]

    for rows in product(row_choices, repeat=m):
        covered = 0
        for mask in rows:
            covered |= mask
        if covered != full:
            continue
        pairs = frozenset((i, j) for i, mask in enumerate(rows) for j in bits(mask))
        yield Correspondence(X, Y, pairs)


def count_correspondences(m, n):
    """Inclusion-exclusion count of subsets of an m x n grid with full projections."""
    from math import comb

    return sum((-1) ** j * comb(n, j) * (2 ** (n - j) - 1) ** m for j in range(n + 1))


def find_isomorphism(A, B, guard=None):
    """Distance-preserving bijection between A and B, or None.

    Distances must match exactly; backtracking over index assignments.
    """
    if guard is None:
        guard = correspondence_guard()
    if A.n + B.n > guard:
        raise TooLarge(f"|A|+|B| = {A.n + B.n} exceeds enumeration guard {guard}")
    if A.n != B.n:
        return None

    n = A.n
    assignment = [-1] * n
    used = [False] * n

    def extend(i):
        if i == n:
            return True
        for j in range(n):
            if used[j]:
                continue
            ok = all(B.d(j, assignment[k]) == A.d(i, k) for k in range(i))
            if ok:
                assignment[i] = j
                used[j] = True
                if extend(i + 1):
                    return True
                used[j] = False
                assignment[i] = -1
        return False

    if extend(0):
        return IsometricEmbedding(A, B, tuple(assignment))
    return None
