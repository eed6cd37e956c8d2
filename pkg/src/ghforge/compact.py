"""The generalized Gromov-Hausdorff metric on finite structured spaces.

The metric is computed through its correspondence characterisation: the
distance is at most eps iff some correspondence R between the two spaces
has distortion at most 2*eps and, per structure component,

  (i)  every marked-subset member on one side has a partner on the other
       side whose coordinates are R-related and whose mark is within eps,
  (ii) the measure coupling subproblem over the R-related, eps-mark-close
       pairs has value at most eps,
  (iii) curves agree along R at every shared sample time, and the origins
       of pointed spaces are R-related.

For a fixed R the least feasible eps is computed exactly: every condition
is piecewise-constant in eps with breakpoints on a finite lattice (half
absolute distance differences, mark distances, coupling values), so no
bisection is ever needed.  The minimum over R is taken over the maximal
cliques of the pair-compatibility graphs: all non-distortion conditions
only improve when R grows, so some optimal R is a maximal clique of the
compatibility graph at the optimum; a binary search over lattice cells
finds the cell containing the optimum.

``oracle_cgf`` recomputes the same value by exhaustive branch-and-bound
over all correspondences with an independent LP solver for the measure
subproblem; the two routes must agree to 1e-9.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import SignatureMismatch, TooLarge
from .guards import correspondence_guard, oracle_guard
from .measures import (
    min_discrepancy_box_exact,
    min_discrepancy_core,
    min_discrepancy_outside_lp,
)
from .spaces import Correspondence, FiniteMetricSpace
from .structures import (
    Curve,
    MarkedMeasure,
    MarkedSubset,
    Measure,
    Point,
    StructuredSpace,
    Subset,
    TupleStructure,
    product_atoms,
    product_members,
    signature,
)


@dataclass
class DistanceResult:
    """Distance value plus an optional certificate.

    ``witness`` is (Correspondence, certificate dict) for finite values;
    +inf with ``witness=None`` means no correspondence is feasible at any
    eps (extended-metric behaviour), as opposed to a TooLarge error when a
    guard was exceeded.
    """

    value: float
    witness: tuple | None = None
    method: str = "cliques"

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# per-component threshold nodes


class _PointNode:
    def __init__(self, px, py):
        self.px, self.py = px, py

    def required(self):
        if self.px is None or self.py is None:
            return set()
        return {(self.px, self.py)}

    def threshold(self, pairs):
        if self.px is None and self.py is None:
            return 0.0
        if self.px is None or self.py is None:
            return math.inf
        return 0.0 if (self.px, self.py) in pairs else math.inf

    def certificate(self, pairs, eps):
        return {"kind": "point", "pair": [self.px, self.py]}


class _CurveNode:
    def __init__(self, cx, cy):
        self.empty_x, self.empty_y = cx.is_grave, cy.is_grave
        by_time = {t: v for t, v in zip(cy.times, cy.values)}
        self.shared = tuple(
            (v, by_time[t]) for t, v in zip(cx.times, cx.values) if t in by_time
        )

    def required(self):
        if self.empty_x or self.empty_y:
            return set()
        return set(self.shared)

    def threshold(self, pairs):
        if self.empty_x and self.empty_y:
            return 0.0
        if self.empty_x or self.empty_y:
            return math.inf
        return 0.0 if all(p in pairs for p in self.shared) else math.inf

    def certificate(self, pairs, eps):
        return {"kind": "curve", "shared_pairs": [list(p) for p in self.shared]}


class _SubsetNode:
    """Marked or plain subsets; the Y side may carry optional members.

    Optional members (pointed-metric substructure search) are included
    exactly when they have an R-related partner within the mark budget on
    the X side, which is always optimal: inclusion costs nothing then and
    can only help the X-side matching.
    """

    def __init__(self, members_x, forced_y, optional_y, marks):
        self.members_x = sorted(members_x)
        self.forced_y = sorted(forced_y)
        self.optional_y = sorted(optional_y)
        self.marks = marks
        # flat relation table: one bit per (x member, pool member) pair
        self.pool = self.forced_y + self.optional_y
        self.rel_grid = []
        self.rel_markd = []
        for a in self.members_x:
            for t in self.pool:
                self.rel_grid.append(tuple(zip(a[0], t[0])))
                self.rel_markd.append(self._mark_d(a, t))
        self._th_cache = {}

    def required(self):
        return set()

    def _mark_d(self, a, b):
        if self.marks is None:
            return 0.0
        return self.marks.d(a[1], b[1])

    def _relmask(self, pairs):
        mask = 0
        for idx, grid in enumerate(self.rel_grid):
            for g in grid:
                if g not in pairs:
                    break
            else:
                mask |= 1 << idx
        return mask

    def _best(self, atom, targets, pairs, forward):
        best = math.inf
        for t in targets:
            zipped = zip(atom[0], t[0]) if forward else zip(t[0], atom[0])
            if all((i, j) in pairs for i, j in zipped):
                m = self._mark_d(atom, t)
                if m < best:
                    best = m
        return best

    def threshold(self, pairs):
        mask = self._relmask(pairs)
        got = self._th_cache.get(mask)
        if got is not None:
            return got
        npool = len(self.pool)
        nforced = len(self.forced_y)
        worst = 0.0
        for ai in range(len(self.members_x)):
            base = ai * npool
            best = math.inf
            for ti in range(npool):
                if mask >> (base + ti) & 1:
                    m = self.rel_markd[base + ti]
                    if m < best:
                        best = m
            worst = max(worst, best)
        for ti in range(nforced):
            best = math.inf
            for ai in range(len(self.members_x)):
                if mask >> (ai * npool + ti) & 1:
                    m = self.rel_markd[ai * npool + ti]
                    if m < best:
                        best = m
            worst = max(worst, best)
        self._th_cache[mask] = worst
        return worst

    def certificate(self, pairs, eps):
        pool = self.forced_y + self.optional_y
        fwd = {}
        for a in self.members_x:
            cands = [
                t
                for t in pool
                if all((i, j) in pairs for i, j in zip(a[0], t[0]))
                and self._mark_d(a, t) <= eps
            ]
            fwd[repr(a)] = repr(cands[0]) if cands else None
        chosen = [
            b
            for b in self.optional_y
            if self._best(b, self.members_x, pairs, forward=False) <= eps
        ]
        return {
            "kind": "subset",
            "forward_matching": fwd,
            "chosen_optional": [repr(b) for b in chosen],
        }


class _MeasureNode:
    """Marked or plain measures; the Y side is fixed or an atomwise box.

    The least feasible eps solves value(allowed(eps)) <= eps, where the
    allowed set only changes at mark distances; each interval is tested
    once with its exact coupling value.
    """

    def __init__(self, wx, wy, box_lo, marks, solver):
        self.wx = wx
        self.wy = wy  # box upper bound when box_lo is given
        self.box_lo = box_lo
        self.marks = marks
        self.solver = solver
        self.atoms_x = sorted(wx)
        self.atoms_y = sorted(set(wy) | set(box_lo or {}))
        self._cache = {}
        self._th_cache = {}
        self.uv = []
        self.uv_grid = []
        self.uv_markd = []
        for u in self.atoms_x:
            for v in self.atoms_y:
                self.uv.append((u, v))
                self.uv_grid.append(tuple(zip(u[0], v[0])))
                self.uv_markd.append(0.0 if marks is None else marks.d(u[1], v[1]))
        if marks is None:
            self.breaks = [0.0]
        else:
            self.breaks = sorted({0.0} | set(self.uv_markd))

    def required(self):
        return set()

    def _relmask(self, pairs):
        mask = 0
        for idx, grid in enumerate(self.uv_grid):
            for g in grid:
                if g not in pairs:
                    break
            else:
                mask |= 1 << idx
        return mask

    def _allowed(self, pairs, mark_eps):
        mask = self._relmask(pairs)
        return {
            self.uv[idx]
            for idx in range(len(self.uv))
            if mask >> idx & 1 and self.uv_markd[idx] <= mark_eps
        }

    def _value(self, allowed):
        key = frozenset(allowed)
        if key not in self._cache:
            if self.box_lo is None:
                if self.solver == "lp":
                    val = min_discrepancy_outside_lp(self.wx, self.wy, allowed)
                else:
                    val, _ = min_discrepancy_core(self.wx, self.wy, allowed)
            elif self.solver == "lp":
                val = min_discrepancy_outside_lp(
                    self.wx, None, allowed, box_lo=self.box_lo, box_hi=self.wy
                )
            else:
                val = min_discrepancy_box_exact(self.wx, self.box_lo, self.wy, allowed)
            self._cache[key] = val
        return self._cache[key]

    def threshold(self, pairs):
        mask = self._relmask(pairs)
        got = self._th_cache.get(mask)
        if got is not None:
            return got
        cand = math.inf
        for idx, m in enumerate(self.breaks):
            allowed = {
                self.uv[k]
                for k in range(len(self.uv))
                if mask >> k & 1 and self.uv_markd[k] <= m
            }
            cand = max(m, self._value(allowed))
            nxt = self.breaks[idx + 1] if idx + 1 < len(self.breaks) else math.inf
            if cand < nxt:
                break
        self._th_cache[mask] = cand
        return cand

    def certificate(self, pairs, eps):
        allowed = self._allowed(pairs, eps)
        if self.box_lo is None:
            value, coupling = min_discrepancy_core(
                self.wx, self.wy, allowed, want_witness=True
            )
            coupling = {f"{u!r} -> {v!r}": w for (u, v), w in coupling.items()}
        else:
            value = self._value(allowed)
            coupling = None
        return {"kind": "measure", "value": value, "coupling": coupling}


class _MaxNode:
    def __init__(self, children):
        self.children = children

    def required(self):
        out = set()
        for c in self.children:
            out |= c.required()
        return out

    def threshold(self, pairs):
        return max((c.threshold(pairs) for c in self.children), default=0.0)

    def certificate(self, pairs, eps):
        return {
            "kind": "tuple-max",
            "children": [c.certificate(pairs, eps) for c in self.children],
        }


class _WeightedNode:
    """Capped geometric combinator: component i enters as 2^-i (1 ^ d_i).

    Children are soft constraints: at outer eps the i-th child must be
    feasible at 2^i eps unless 2^-i <= eps already exempts it, so a child
    that is infeasible for every eps still only contributes 2^-i.
    """

    def __init__(self, children):
        self.children = children

    def required(self):
        return set()

    def threshold(self, pairs):
        worst = 0.0
        for i, c in enumerate(self.children):
            t = c.threshold(pairs)
            worst = max(worst, 2.0 ** -(i + 1) * min(t, 1.0))
        return worst

    def certificate(self, pairs, eps):
        out = []
        for i, c in enumerate(self.children):
            out.append(c.certificate(pairs, 2.0 ** (i + 1) * eps))
        return {"kind": "tuple-weighted", "children": out}


def _build_node(sx, sy, solver):
    """Node tree for an (X structure, Y structure-or-range-spec) pair."""
    if sx is None and sy is None:
        return None
    if isinstance(sy, tuple) and sy and sy[0] == "box":
        _, lo, hi = sy
        marks = sx.marks if isinstance(sx, MarkedMeasure) else None
        return _MeasureNode(product_atoms(sx), hi, lo, marks, solver)
    if isinstance(sy, tuple) and sy and sy[0] == "subset_range":
        _, forced, optional = sy
        marks = sx.marks if isinstance(sx, MarkedSubset) else None
        return _SubsetNode(product_members(sx), forced, optional, marks)
    if isinstance(sx, Point):
        return _PointNode(sx.index, sy.index)
    if isinstance(sx, Curve):
        return _CurveNode(sx, sy)
    if isinstance(sx, (Subset, MarkedSubset)):
        marks = sx.marks if isinstance(sx, MarkedSubset) else None
        return _SubsetNode(product_members(sx), product_members(sy), set(), marks)
    if isinstance(sx, (Measure, MarkedMeasure)):
        marks = sx.marks if isinstance(sx, MarkedMeasure) else None
        return _MeasureNode(product_atoms(sx), product_atoms(sy), None, marks, solver)
    if isinstance(sx, TupleStructure):
        kids = [
            _build_node(a, b, solver) for a, b in zip(sx.children, _tuple_children(sy))
        ]
        kids = [k for k in kids if k is not None]
        if sx.combinator == "max":
            return _MaxNode(kids)
        return _WeightedNode(kids)
    raise SignatureMismatch(f"unsupported structure {type(sx).__name__}")


def _tuple_children(sy):
    if isinstance(sy, TupleStructure):
        return sy.children
    if isinstance(sy, tuple) and sy and sy[0] == "tuple_spec":
        return sy[1]
    raise SignatureMismatch("tuple structure compared against non-tuple")


def _spec_signature(spec, template):
    """Signature of a Y-side range spec, matched against the X template."""
    if spec is None or isinstance(
        spec, (Point, Measure, Subset, MarkedMeasure, MarkedSubset, Curve, TupleStructure)
    ):
        return signature(spec)
    if spec[0] in ("box", "subset_range"):
        return signature(template)
    if spec[0] == "tuple_spec":
        return ("tuple", template.combinator) + tuple(
            _spec_signature(c, t) for c, t in zip(spec[1], template.children)
        )
    raise SignatureMismatch(f"unknown spec {spec!r}")


# ---------------------------------------------------------------------------
# engine


class _Engine:
    def __init__(self, X, Y, solver="flow", y_spec=None):
        self.X, self.Y = X, Y
        sy = y_spec if y_spec is not None else Y.structure
        if _spec_signature(sy, X.structure) != signature(X.structure):
            raise SignatureMismatch(
                f"structure signatures differ: X has {signature(X.structure)}"
            )
        if (X.origin is None) != (Y.origin is None):
            raise SignatureMismatch("one side is pointed, the other is not")
        self.m, self.n = X.space.n, Y.space.n
        dX, dY = X.space.dist, Y.space.dist
        comp = np.abs(dX[:, None, :, None] - dY[None, :, None, :])
        self.comp = comp.reshape(self.m * self.n, self.m * self.n)
        self.nodes = []
        if X.origin is not None:
            self.nodes.append(_PointNode(X.origin, Y.origin))
        root = _build_node(X.structure, sy, solver)
        if root is not None:
            self.nodes.append(root)
        self._threshold_cache = {}

    def pair_index(self, i, j):
        return i * self.n + j

    def pairs_of_mask(self, mask):
        out = []
        p = 0
        while mask:
            if mask & 1:
                out.append((p // self.n, p % self.n))
            mask >>= 1
            p += 1
        return frozenset(out)

    def required_pairs(self):
        req = set()
        for node in self.nodes:
            req |= node.required()
        return req

    def distortion_of(self, pairs):
        idx = [self.pair_index(i, j) for i, j in pairs]
        return float(self.comp[np.ix_(idx, idx)].max()) if idx else 0.0

    def threshold(self, pairs):
        pairs = frozenset(pairs)
        if pairs not in self._threshold_cache:
            t = self.distortion_of(pairs) / 2.0
            for node in self.nodes:
                if t == math.inf:
                    break
                t = max(t, node.threshold(pairs))
            self._threshold_cache[pairs] = t
        return self._threshold_cache[pairs]

    def threshold_bounded(self, pairs, known_dis, bound):
        """Leaf threshold with early abort once it can no longer beat bound."""
        t = known_dis / 2.0
        for node in self.nodes:
            if t >= bound:
                return math.inf
            t = max(t, node.threshold(pairs))
        return t if t < bound else math.inf

    def feasible(self, pairs, eps):
        pairs = frozenset(pairs)
        if self.distortion_of(pairs) > 2 * eps:
            return False
        return all(node.threshold(pairs) <= eps for node in self.nodes)

    def certificate(self, pairs, eps):
        pairs = frozenset(pairs)
        return {
            "distortion": self.distortion_of(pairs),
            "components": [node.certificate(pairs, eps) for node in self.nodes],
        }

    # -- clique search ------------------------------------------------------

    def _cell_adjacency(self, cap):
        ok = self.comp <= cap
        nv = self.m * self.n
        adj = []
        for p in range(nv):
            bits = int.from_bytes(
                np.packbits(ok[p], bitorder="little").tobytes(), "little"
            )
            adj.append(bits & ~(1 << p))
        return adj

    def _cell_cliques(self, cap, req_idx, req_mask, row_bits, col_bits):
        """Covering maximal cliques containing the required pairs, as masks."""
        nv = self.m * self.n
        adj = self._cell_adjacency(cap)
        cand = (1 << nv) - 1
        for p in req_idx:
            cand &= adj[p]
        cand &= ~req_mask
        for clique in _max_cliques(adj, cand):
            mask = clique | req_mask
            if any(not mask & rb for rb in row_bits):
                continue
            if any(not mask & cb for cb in col_bits):
                continue
            yield mask

    def search(self):
        """Exact minimum threshold over all correspondences, with witness."""
        nv = self.m * self.n
        full_mask = (1 << nv) - 1
        ub = self.threshold(self.pairs_of_mask(full_mask))
        if ub == math.inf:
            return math.inf, None
        req = self.required_pairs()
        req_idx = [self.pair_index(i, j) for i, j in req]
        req_mask = 0
        for p in req_idx:
            req_mask |= 1 << p
        row_bits = [0] * self.m
        col_bits = [0] * self.n
        for p in range(nv):
            row_bits[p // self.n] |= 1 << p
            col_bits[p % self.n] |= 1 << p

        lattice = [v / 2.0 for v in np.unique(self.comp).tolist()]
        lb = 0.0
        for a in req_idx:
            for b in req_idx:
                lb = max(lb, float(self.comp[a, b]) / 2.0)
        from bisect import bisect_left

        start = bisect_left(lattice, lb)

        def cell_min(t, stop_at=None):
            best, best_mask = math.inf, None
            for mask in self._cell_cliques(
                2.0 * lattice[t], req_idx, req_mask, row_bits, col_bits
            ):
                th = self.threshold(self.pairs_of_mask(mask))
                if th < best:
                    best, best_mask = th, mask
                    if stop_at is not None and best <= stop_at:
                        break
            return best, best_mask

        # F(t): some correspondence is feasible at eps = lattice[t]; monotone
        # in t, so binary search locates the cell containing the optimum.
        last = len(lattice) - 1
        lo, hi = start, last
        tfirst = None
        feas_cache = {}

        def F(t):
            if t not in feas_cache:
                val, _ = cell_min(t, stop_at=lattice[t])
                feas_cache[t] = val <= lattice[t]
            return feas_cache[t]

        while lo <= hi:
            mid = (lo + hi) // 2
            if F(mid):
                tfirst = mid
                hi = mid - 1
            else:
                lo = mid + 1

        candidates = []
        if tfirst is None:
            candidates.append(cell_min(last))
        else:
            candidates.append(cell_min(tfirst))
            if tfirst > start:
                candidates.append(cell_min(tfirst - 1))
        best, best_mask = min(candidates, key=lambda c: c[0])
        if best_mask is None:
            return math.inf, None
        return best, self.pairs_of_mask(best_mask)


def _max_cliques(adj, cand):
    """Bron-Kerbosch with pivoting over bitmask adjacency."""

    def bk(r, p, x):
        if not p and not x:
            yield r
            return
        px = p | x
        best_u, best_cnt = -1, -1
        probe = px
        while probe:
            u = (probe & -probe).bit_length() - 1
            cnt = bin(p & adj[u]).count("1")
            if cnt > best_cnt:
                best_cnt, best_u = cnt, u
            probe &= probe - 1
        ext = p & ~adj[best_u]
        while ext:
            v = (ext & -ext).bit_length() - 1
            vb = 1 << v
            yield from bk(r | vb, p & adj[v], x & adj[v])
            p &= ~vb
            x |= vb
            ext &= ~vb

    yield from bk(0, cand, 0)


# ---------------------------------------------------------------------------
# public operations


def _spec_fingerprint(spec):
    from .structures import _fingerprint

    if spec is None or not isinstance(spec, tuple):
        return _fingerprint(spec)
    if spec[0] == "box":
        return ("box", tuple(sorted(spec[1].items())), tuple(sorted(spec[2].items())))
    if spec[0] == "subset_range":
        return ("subset_range", tuple(sorted(spec[1])), tuple(sorted(spec[2])))
    if spec[0] == "tuple_spec":
        return ("tuple_spec",) + tuple(_spec_fingerprint(c) for c in spec[1])
    raise SignatureMismatch(f"unknown spec {spec!r}")


_search_cache = {}


def _cached_search(X, Y, y_spec, solver="flow"):
    """Minimum threshold with memoisation across calls (value and witness pairs)."""
    key = (
        X.fingerprint(),
        Y.space.fingerprint(),
        Y.origin,
        _spec_fingerprint(y_spec if y_spec is not None else Y.structure),
        solver,
    )
    if key not in _search_cache:
        engine = _Engine(X, Y, solver=solver, y_spec=y_spec)
        _search_cache[key] = engine.search()
        if len(_search_cache) > 200000:
            _search_cache.clear()
    return _search_cache[key]


def cgf_with_spec(X, y_space, y_origin, y_spec, guard=None):
    """Distance from X to the best substructure described by a Y-side spec.

    Range specs ("box" measures, "subset_range" subsets) fold the choice of
    an admissible smaller structure into the per-correspondence solvers;
    used by the pointed metric's substructure infimum.
    """
    if guard is None:
        guard = correspondence_guard()
    if X.space.n + y_space.n > guard:
        raise TooLarge(f"|X|+|Y| = {X.space.n + y_space.n} exceeds guard {guard}")
    Y = StructuredSpace(y_space, None, y_origin)
    value, pairs = _cached_search(X, Y, y_spec)
    return DistanceResult(value, None if pairs is None else (Correspondence(X.space, y_space, pairs), None))


def feasible_at(X, Y, R, eps):
    """Strassen-type feasibility of a correspondence at eps, with certificate."""
    X, Y = _as_structured(X), _as_structured(Y)
    engine = _Engine(X, Y)
    ok = engine.feasible(R.pairs, eps)
    cert = engine.certificate(R.pairs, eps) if ok else None
    return ok, cert


def per_correspondence_threshold(X, Y, R):
    """Least eps at which ``R`` is feasible; +inf when no eps works."""
    X, Y = _as_structured(X), _as_structured(Y)
    engine = _Engine(X, Y)
    return engine.threshold(R.pairs)


def _as_structured(X):
    if isinstance(X, FiniteMetricSpace):
        return StructuredSpace(X)
    return X


def cgf_distance(X, Y, guard=None):
    """The Gromov-Hausdorff-functor distance of two finite structured spaces."""
    X, Y = _as_structured(X), _as_structured(Y)
    if guard is None:
        guard = correspondence_guard()
    if X.space.n + Y.space.n > guard:
        raise TooLarge(f"|X|+|Y| = {X.space.n + Y.space.n} exceeds guard {guard}")
    if X.fingerprint() == Y.fingerprint():
        pairs = frozenset((i, i) for i in range(X.space.n))
        engine = _Engine(X, Y)
        return DistanceResult(
            0.0, (Correspondence(X.space, Y.space, pairs), engine.certificate(pairs, 0.0))
        )
    value, pairs = _cached_search(X, Y, None)
    if pairs is None:
        return DistanceResult(math.inf, None)
    engine = _Engine(X, Y)
    R = Correspondence(X.space, Y.space, pairs)
    return DistanceResult(value, (R, engine.certificate(pairs, value)))


def gh_distance(X, Y, guard=None):
    """Plain Gromov-Hausdorff distance (no structure)."""
    X, Y = _as_structured(X), _as_structured(Y)
    if X.structure is not None or Y.structure is not None:
        raise SignatureMismatch("gh_distance compares bare spaces; use cgf_distance")
    return cgf_distance(X, Y, guard=guard)


def ghp_distance(X, Y, guard=None):
    """Gromov-Hausdorff-Prokhorov distance (single measure structure)."""
    X, Y = _as_structured(X), _as_structured(Y)
    if signature(X.structure) != ("measure",) or signature(Y.structure) != ("measure",):
        raise SignatureMismatch("ghp_distance requires a single measure structure")
    return cgf_distance(X, Y, guard=guard)


def _hard_partner_cols(sx_root, sy_root, m):
    """Per-row lists of column masks a correspondence must intersect.

    Only order-1 subset-like members in hard (non-weighted) positions
    contribute: the member's row must relate to some member column of the
    other side, or the subset condition is infeasible outright.  Pruning
    with these masks is sound because it only discards correspondences
    whose threshold is +inf.
    """
    need = [[] for _ in range(m)]

    def visit(sx, sy, hard):
        if sx is None or not hard or isinstance(sy, tuple):
            return
        if isinstance(sx, (Subset, MarkedSubset)):
            mx = product_members(sx)
            my = product_members(sy)
            if all(len(t) == 1 for t, _ in mx):
                cols = 0
                for t, _ in my:
                    cols |= 1 << t[0]
                for t, _ in mx:
                    need[t[0]].append(cols)
        if isinstance(sx, TupleStructure):
            for a, b in zip(sx.children, _tuple_children(sy)):
                visit(a, b, hard and sx.combinator == "max")

    visit(sx_root, sy_root, True)
    return need


def oracle_cgf(X, Y, guard=None):
    """Independent brute-force route: exhaustive correspondence search.

    Branch-and-bound over every subset of the pair grid with full
    projections.  Pruning is sound: partial distortion / 2, row-local
    subset feasibility, and early-abort leaf evaluation never discard a
    correspondence that could beat the incumbent.  Measure subproblems go
    through the direct LP formulation rather than the max-flow closed
    form.
    """
    X, Y = _as_structured(X), _as_structured(Y)
    if guard is None:
        guard = oracle_guard()
    m, n = X.space.n, Y.space.n
    if m + n > guard:
        raise TooLarge(f"|X|+|Y| = {m + n} exceeds oracle guard {guard}")
    engine = _Engine(X, Y, solver="lp")
    full = frozenset((i, j) for i in range(m) for j in range(n))
    incumbent = engine.threshold(full)
    if incumbent == math.inf:
        return DistanceResult(math.inf, None, method="exhaustive")
    best_pairs = full

    req_cols = [0] * m
    for i, j in engine.required_pairs():
        req_cols[i] |= 1 << j
    partner_cols = _hard_partner_cols(X.structure, Y.structure, m)
    comp = engine.comp.tolist()

    # profile-matching greedy bootstrap for a tighter (still independent) start
    greedy = {(i, min(range(n), key=lambda j: _row_fit(X.space, Y.space, i, j))) for i in range(m)}
    greedy |= {(min(range(m), key=lambda i: _row_fit(X.space, Y.space, i, j)), j) for j in range(n)}
    greedy |= engine.required_pairs()
    th = engine.threshold(frozenset(greedy))
    if th < incumbent:
        incumbent = th
        best_pairs = frozenset(greedy)

    masks_for_row = []
    for i in range(m):
        opts = []
        for mask in range(1, 1 << n):
            if mask & req_cols[i] != req_cols[i]:
                continue
            if any(not mask & cols for cols in partner_cols[i]):
                continue
            opts.append(mask)
        masks_for_row.append(opts)

    chosen = []
    chosen_set = set()
    full_cover = (1 << n) - 1
    # suffix grids for the optimistic-completion bound: conditions only
    # improve when R grows, so evaluating them on chosen + all-future pairs
    # lower-bounds every completion of the current branch
    future = [frozenset((r, c) for r in range(i, m) for c in range(n)) for i in range(m + 1)]

    def dfs(i, cur_dis, col_cover):
        nonlocal incumbent, best_pairs
        if cur_dis / 2.0 >= incumbent:
            return
        if i == m:
            if col_cover != full_cover:
                return
            pairs = frozenset((p // n, p % n) for p in chosen)
            th = engine.threshold_bounded(pairs, cur_dis, incumbent)
            if th < incumbent:
                incumbent = th
                best_pairs = pairs
            return
        if engine.nodes:
            optimistic = chosen_set | future[i]
            for node in engine.nodes:
                if node.threshold(optimistic) >= incumbent:
                    return
        for mask in masks_for_row[i]:
            new_ps = [i * n + j for j in range(n) if mask >> j & 1]
            nd = cur_dis
            for p in new_ps:
                row = comp[p]
                for q in chosen:
                    v = row[q]
                    if v > nd:
                        nd = v
                for q in new_ps:
                    v = row[q]
                    if v > nd:
                        nd = v
            if nd / 2.0 >= incumbent:
                continue
            chosen.extend(new_ps)
            added = [(p // n, p % n) for p in new_ps]
            chosen_set.update(added)
            dfs(i + 1, nd, col_cover | mask)
            del chosen[len(chosen) - len(new_ps) :]
            chosen_set.difference_update(added)

    dfs(0, 0.0, 0)
    R = Correspondence(X.space, Y.space, best_pairs)
    return DistanceResult(
        incumbent, (R, engine.certificate(best_pairs, incumbent)), method="exhaustive"
    )


def _row_fit(XS, YS, i, j):
    """Greedy pairing score: how well row i's distance profile matches col j's."""
    xs = sorted(XS.d(i, k) for k in range(XS.n))
    ys = sorted(YS.d(j, k) for k in range(YS.n))
    length = max(len(xs), len(ys))
    xs += [xs[-1]] * (length - len(xs))
    ys += [ys[-1]] * (length - len(ys))
    return max(abs(a - b) for a, b in zip(xs, ys))


# ---------------------------------------------------------------------------
# covering numbers


@dataclass(frozen=True)
class CoveringNumber:
    value: int
    exact: bool

    def __int__(self):
        return self.value


def covering_number(X, eps, exact=None):
    """Minimal number of closed eps-balls centered at points covering X.

    Exact by branch-and-bound set cover up to the guard; greedy upper bound
    (flagged ``exact=False``) beyond it unless ``exact=True`` forces the
    search.
    """
    from .guards import COVER_EXACT_POINTS

    n = X.n
    if n == 0:
        return CoveringNumber(0, True)
    balls = []
    for c in range(n):
        mask = 0
        for p in range(n):
            if X.d(c, p) <= eps:
                mask |= 1 << p
        balls.append(mask)
    full = (1 << n) - 1

    covered, greedy = 0, 0
    while covered != full:
        best = max(balls, key=lambda b: bin(b & ~covered).count("1"))
        covered |= best
        greedy += 1

    if exact is False or (exact is None and n > COVER_EXACT_POINTS):
        return CoveringNumber(greedy, False)

    best_known = greedy
    maximal = [b for b in set(balls) if not any(b != o and b & o == b for o in balls)]

    def dfs(covered, used):
        nonlocal best_known
        if covered == full:
            best_known = min(best_known, used)
            return
        if used + 1 >= best_known:
            return
        uncovered = [p for p in range(n) if not covered >> p & 1]
        point = min(uncovered, key=lambda p: sum(1 for b in maximal if b >> p & 1))
        for b in maximal:
            if b >> point & 1:
                dfs(covered | b, used + 1)

    dfs(0, 0)
    return CoveringNumber(best_known, True)


def precompact_profile(family, eps_grid):
    """Covering-number and structure-size table across a family of spaces.

    Returns per-eps max covering numbers, the largest total mass among
    measure-like components, and the marks in use per mark space (the
    mark-range hull of the pre-compactness condition).
    """
    family = [_as_structured(S) for S in family]
    sigs = {signature(S.structure) for S in family}
    if len(sigs) > 1:
        raise SignatureMismatch(f"family is not signature-homogeneous: {sigs}")

    rows = []
    for eps in eps_grid:
        covers = [covering_number(S.space, eps) for S in family]
        rows.append(
            {
                "eps": float(eps),
                "max_covering_number": max(c.value for c in covers),
                "exact": all(c.exact for c in covers),
            }
        )

    mass_bound = 0.0
    mark_hull = {}

    def visit(s):
        nonlocal mass_bound
        if s is None:
            return
        if isinstance(s, (Measure, MarkedMeasure)):
            total = math.fsum(product_atoms(s).values())
            mass_bound = max(mass_bound, total)
        if isinstance(s, (MarkedMeasure, MarkedSubset)):
            used = (
                {mk for _, mk, _ in s.atoms}
                if isinstance(s, MarkedMeasure)
                else {mk for _, mk in s.members}
            )
            hull = mark_hull.setdefault(s.marks.space.labels, set())
            hull.update(s.marks.space.labels[mk] for mk in used)
        if isinstance(s, TupleStructure):
            for c in s.children:
                visit(c)

    for S in family:
        visit(S.structure)

    return {
        "covering": rows,
        "mass_bound": mass_bound,
        "mark_hull": {" ".join(k): sorted(v) for k, v in mark_hull.items()},
    }
