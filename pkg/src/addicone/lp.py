"""Exact rational phase-1 simplex for cone membership.

Solves ``sum_j lam_j g_j = t, lam >= 0`` with a revised simplex (dense
basis inverse, sparse columns) under Bland's rule.  When infeasible, the
final phase-1 multipliers give a Farkas vector ``w`` with ``w.g_j >= 0`` for
every column and ``w.t < 0``.

Arithmetic runs on ``gmpy2.mpq`` when available (several times faster than
``fractions.Fraction``), otherwise on Fractions; results are always returned
as Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

try:  # pragma: no cover - exercised implicitly
    import gmpy2

    def _q(x):
        x = Fraction(x)
        return gmpy2.mpq(x.numerator, x.denominator)

    def _frac(x):
        return Fraction(int(x.numerator), int(x.denominator))

    _ZERO = gmpy2.mpq(0)
    _ONE = gmpy2.mpq(1)
    ARITHMETIC = "gmpy2"
except ImportError:  # pragma: no cover
    def _q(x):
        return Fraction(x)

    def _frac(x):
        return Fraction(x)

    _ZERO = Fraction(0)
    _ONE = Fraction(1)
    ARITHMETIC = "fractions"


class LPError(ArithmeticError):
    pass


def _sparse(col):
    if isinstance(col, dict):
        return {int(i): _q(v) for i, v in col.items() if v}
    return {i: _q(v) for i, v in enumerate(col) if v}


def nonneg_combination(target: Sequence, generators: Sequence, max_iter: int = 200_000):
    """Decide whether ``target`` lies in the cone spanned by ``generators``.

    Generators may be dense sequences or sparse ``{row: value}`` dicts.

    Returns:
        ``(True, {j: lam_j})`` with only nonzero multipliers, or
        ``(False, w)`` with ``w`` a Farkas refutation (list of Fractions).
    """
    m = len(target)
    t = [_q(v) for v in target]
    sign = [1 if v >= 0 else -1 for v in t]
    b = [v if s > 0 else -v for v, s in zip(t, sign)]
    cols = []
    for g in generators:
        col = _sparse(g)
        if any(i >= m for i in col):
            raise LPError("generator longer than target")
        cols.append({i: (v if sign[i] > 0 else -v) for i, v in col.items()})
    n = len(cols)

    basis = [n + i for i in range(m)]
    binv = [[_ONE if i == j else _ZERO for j in range(m)] for i in range(m)]
    x = list(b)
    in_basis = set(basis)

    for _ in range(max_iter):
        cb = [_ONE if k >= n else _ZERO for k in basis]
        y = [_ZERO] * m
        for k in range(m):
            if cb[k]:
                row = binv[k]
                for j in range(m):
                    if row[j]:
                        y[j] += row[j]
        enter = -1
        for j in range(n):
            if j in in_basis:
                continue
            s = _ZERO
            for i, v in cols[j].items():
                if y[i]:
                    s += y[i] * v
            if s > 0:
                enter = j
                break
        if enter < 0:
            break
        col = cols[enter]
        u = [_ZERO] * m
        for i in range(m):
            row = binv[i]
            s = _ZERO
            for k, v in col.items():
                if row[k]:
                    s += row[k] * v
            u[i] = s
        leave = -1
        best = None
        for i in range(m):
            if u[i] > 0:
                r = x[i] / u[i]
                if best is None or r < best or (r == best and basis[i] < basis[leave]):
                    best, leave = r, i
        if leave < 0:
            raise LPError("phase-1 problem unbounded; this cannot happen")
        piv = u[leave]
        prow = [v / piv for v in binv[leave]]
        binv[leave] = prow
        xr = x[leave] / piv
        x[leave] = xr
        for i in range(m):
            if i != leave and u[i]:
                f = u[i]
                row = binv[i]
                binv[i] = [a - f * p for a, p in zip(row, prow)]
                x[i] -= f * xr
        in_basis.discard(basis[leave])
        basis[leave] = enter
        in_basis.add(enter)
    else:
        raise LPError("iteration limit reached")

    objective = sum((x[k] for k in range(m) if basis[k] >= n), _ZERO)
    if objective == 0:
        lam = {basis[k]: _frac(x[k]) for k in range(m) if basis[k] < n and x[k]}
        return True, lam
    w = [_frac(-y[i]) if sign[i] > 0 else _frac(y[i]) for i in range(m)]
    return False, w


def feasible_free(a_eq: Sequence[Sequence], b_eq: Sequence, nonneg: Sequence[bool]):
    """Feasibility of ``A x = b`` with the flagged variables nonnegative.

    Free variables are split into a difference of two nonnegative ones.
    Returns ``(True, x)`` or ``(False, farkas)`` as in :func:`nonneg_combination`.
    """
    m = len(b_eq)
    ncol = len(nonneg)
    gens = []
    origin = []
    for j in range(ncol):
        col = [row[j] for row in a_eq]
        gens.append(col)
        origin.append((j, 1))
        if not nonneg[j]:
            gens.append([-v for v in col])
            origin.append((j, -1))
    ok, res = nonneg_combination(b_eq, gens)
    if not ok:
        return False, res
    x = [Fraction(0)] * ncol
    for k, v in res.items():
        j, s = origin[k]
        x[j] += s * v
    if m and any(sum((Fraction(a_eq[i][j]) * x[j] for j in range(ncol)), Fraction(0)) != Fraction(b_eq[i])
                 for i in range(m)):
        raise LPError("reconstructed solution violates equalities")
    return True, x
