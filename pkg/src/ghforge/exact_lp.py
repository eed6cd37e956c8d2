"""Tiny dense two-phase simplex over exact rationals.

Solves  min c.x  subject to  A x = b, x >= 0  with Fraction arithmetic, so
optima that are exactly zero come out as exact zeros.  Problem sizes in this
package are a few dozen variables, where exactness is worth far more than
speed.  Bland's rule guarantees termination.
"""

from fractions import Fraction


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


def _pivot(rows, basis, r, c):
    piv = rows[r][c]
    rows[r] = [v / piv for v in rows[r]]
    for i, row in enumerate(rows):
        if i != r and row[c] != 0:
            coef = row[c]
            rows[i] = [v - coef * w for v, w in zip(row, rows[r])]
    basis[r] = c


def _run(rows, basis, cost, ncols):
    while True:
        # reduced costs relative to the current basis (basic columns are unit)
        lam = [cost[basis[i]] for i in range(len(rows))]
        entering = -1
        for j in range(ncols):
            if j in basis:
                continue
            red = cost[j] - sum(lam[i] * rows[i][j] for i in range(len(rows)))
            if red < 0:
                entering = j
                break  # Bland: first improving column
        if entering < 0:
            return
        ratio = None
        leave = -1
        for i, row in enumerate(rows):
            if row[entering] > 0:
                r = row[-1] / row[entering]
                if ratio is None or r < ratio or (r == ratio and basis[i] < basis[leave]):
                    ratio = r
                    leave = i
        if leave < 0:
            raise Unbounded
        _pivot(rows, basis, leave, entering)


def solve(c, A, b):
    """Return (optimal value, solution list) for min c.x, Ax = b, x >= 0."""
    m = len(A)
    n = len(c)
    c = [Fraction(v) for v in c]
    rows = []
    rhs = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]]
        bi = Fraction(b[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        rows.append(row)
        rhs.append(bi)

    total = n + m
    tab = []
    for i in range(m):
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        tab.append(rows[i] + art + [rhs[i]])
    basis = [n + i for i in range(m)]

    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    _run(tab, basis, phase1, total)
    resid = sum(tab[i][-1] for i in range(m) if basis[i] >= n)
    if resid > 0:
        raise Infeasible

    # drive leftover artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(m):
        if basis[i] < n:
            keep.append(i)
            continue
        picked = next((j for j in range(n) if tab[i][j] != 0), None)
        if picked is None:
            continue  # redundant constraint
        _pivot(tab, basis, i, picked)
        keep.append(i)
    tab = [tab[i][:n] + [tab[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]

    phase2 = c[:]
    _run(tab, basis, phase2, n)

    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        x[bi] = tab[i][-1]
    value = sum(ci * xi for ci, xi in zip(c, x))
    return value, x
