"""Exact rational polyhedral cones (apex at the origin).

A cone is held either as ``ConeH`` (``a.x >= 0`` rows plus ``b.x = 0`` rows)
or as ``ConeV`` (rays plus a lineality basis).  Conversion is by the double
description method with an algebraic adjacency test; all arithmetic is on
``fractions.Fraction``.  Outputs are canonical: integer-primitive rows,
lineality/equality bases in right-pivoted reduced echelon form, rays and
facets reduced modulo those bases and sorted lexicographically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .lp import nonneg_combination

Vector = tuple  # tuple[Fraction, ...]

MAX_DIM = 64


class ConeDomainError(ValueError):
    pass


# --------------------------------------------------------------------------
# rational linear algebra


def Q(x) -> Fraction:
    """Parse ints, Fractions and rational strings like ``"-3/4"``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def qvec(v: Iterable) -> Vector:
    return tuple(Q(x) for x in v)


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b) if x and y), Fraction(0))


def primitive(v: Sequence) -> Vector:
    """Positive rescaling of ``v`` to coprime integers (zero vector unchanged)."""
    v = qvec(v)
    if not any(v):
        return v
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    return tuple(Fraction(x // g) for x in ints)


def sign_normalized(v: Sequence) -> Vector:
    """Primitive with first nonzero coordinate positive."""
    p = primitive(v)
    for x in p:
        if x:
            return p if x > 0 else tuple(-y for y in p)
    return p


def rref(rows: Sequence[Sequence], ncols: Optional[int] = None, from_right: bool = False):
    """Reduced row echelon form.

    With ``from_right`` the pivot of each row is its last nonzero column.
    Returns ``(rows, pivots)``.
    """
    m = [list(qvec(r)) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    order = list(range(ncols - 1, -1, -1)) if from_right else list(range(ncols))
    pivots = []
    r = 0
    for c in order:
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]], pivots


def rank(rows: Sequence[Sequence], ncols: Optional[int] = None) -> int:
    if not rows:
        return 0
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Basis of ``{x : r.x = 0 for r in rows}``."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    red, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def inverse(mat: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(mat)
    aug = [list(qvec(r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(mat)]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ConeDomainError("singular matrix")
    return [list(r[n:]) for r in red[:n]]


def matvec(mat: Sequence[Sequence], v: Sequence) -> Vector:
    return tuple(dot(row, v) for row in mat)


def canonical_basis(rows: Sequence[Sequence], dim: int):
    """Right-pivoted RREF basis of the span of ``rows``, integer-primitive."""
    rows = [r for r in rows if any(r)]
    if not rows:
        return [], []
    red, piv = rref(rows, dim, from_right=True)
    return [sign_normalized(r) for r in red], piv


def reduce_mod(v: Sequence, basis: Sequence[Sequence], pivots: Sequence[int]) -> Vector:
    """Zero the pivot coordinates of ``v`` using a right-pivoted basis."""
    v = list(qvec(v))
    for row, p in zip(basis, pivots):
        if v[p]:
            f = v[p] / row[p]
            v = [x - f * y for x, y in zip(v, row)]
    return tuple(v)


# --------------------------------------------------------------------------
# cone types


def _rows(rows, dim, what):
    out = []
    for r in rows:
        r = qvec(r)
        if len(r) != dim:
            raise ConeDomainError(f"{what} row of length {len(r)} in dimension {dim}")
        out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class ConeH:
    """``{x : a.x >= 0 for a in inequalities, b.x = 0 for b in equalities}``."""

    dim: int
    inequalities: tuple = ()
    equalities: tuple = ()
    coords: Optional[tuple] = None

    def __post_init__(self):
        ineq = tuple(r for r in _rows(self.inequalities, self.dim, "inequality") if any(r))
        eq = tuple(r for r in _rows(self.equalities, self.dim, "equality") if any(r))
        object.__setattr__(self, "inequalities", ineq)
        object.__setattr__(self, "equalities", eq)
        if self.coords is not None:
            object.__setattr__(self, "coords", tuple(self.coords))

    def contains(self, x: Sequence) -> bool:
        x = qvec(x)
        return all(dot(a, x) >= 0 for a in self.inequalities) and all(
            dot(b, x) == 0 for b in self.equalities
        )

    def to_json(self) -> dict:
        return cone_to_json(self)


@dataclass(frozen=True)
class ConeV:
    """``cone(rays) + span(lineality)``."""

    dim: int
    rays: tuple = ()
    lineality: tuple = ()
    coords: Optional[tuple] = None

    def __post_init__(self):
        rays = []
        seen = set()
        for r in _rows(self.rays, self.dim, "ray"):
            if not any(r):
                continue
            key = primitive(r)
            if key not in seen:
                seen.add(key)
                rays.append(r)
        lin = tuple(r for r in _rows(self.lineality, self.dim, "lineality") if any(r))
        if rank(lin, self.dim) != len(lin):
            raise ConeDomainError("lineality vectors must be linearly independent")
        object.__setattr__(self, "rays", tuple(rays))
        object.__setattr__(self, "lineality", lin)
        if self.coords is not None:
            object.__setattr__(self, "coords", tuple(self.coords))

    def generators(self) -> list[Vector]:
        """Rays plus both signs of each lineality vector."""
        return list(self.rays) + [v for l in self.lineality for v in (l, tuple(-x for x in l))]

    def contains(self, x: Sequence) -> bool:
        return nonneg_combination(qvec(x), self.generators())[0]

    def to_json(self) -> dict:
        return cone_to_json(self)


@dataclass(frozen=True)
class Certificate:
    """Nonnegative multipliers with ``target = sum lam_i g_i + residual``."""

    multipliers: Mapping[int, Fraction]
    residual: Vector

    @property
    def valid(self) -> bool:
        return all(v >= 0 for v in self.multipliers.values()) and not any(self.residual)

    def verify(self, target: Sequence, generators: Sequence[Sequence]) -> bool:
        acc = list(qvec(target))
        for i, lam in self.multipliers.items():
            if lam < 0:
                return False
            g = generators[i]
            acc = [a - lam * Q(x) for a, x in zip(acc, g)]
        return not any(acc)

    def to_json(self) -> dict:
        return {
            "multipliers": {str(k): str(v) for k, v in sorted(self.multipliers.items())},
            "residual": [str(x) for x in self.residual],
        }


@dataclass(frozen=True)
class Refutation:
    """Farkas vector ``w`` with ``w.g >= 0`` for every generator and ``w.target < 0``."""

    vector: Vector

    def verify(self, target: Sequence, generators: Sequence[Sequence]) -> bool:
        return dot(self.vector, qvec(target)) < 0 and all(dot(self.vector, qvec(g)) >= 0 for g in generators)

    def to_json(self) -> dict:
        return {"refutation": [str(x) for x in self.vector]}


def dual_membership(target: Sequence, generators: Sequence[Sequence]) -> Union[Certificate, Refutation]:
    """Farkas alternative for ``target`` against ``cone(generators)``.

    Generators may be dense sequences or sparse ``{index: value}`` dicts.
    """
    target = qvec(target)
    d = len(target)
    for g in generators:
        if isinstance(g, Mapping):
            if any(not 0 <= int(i) < d for i in g):
                raise ConeDomainError("generator index out of range")
        elif len(g) != d:
            raise ConeDomainError(f"generator of length {len(g)} against target of length {d}")
    ok, res = nonneg_combination(target, generators)
    if ok:
        acc = list(target)
        for i, lam in res.items():
            g = generators[i]
            items = g.items() if isinstance(g, Mapping) else enumerate(g)
            for k, x in items:
                if x:
                    acc[int(k)] -= lam * Q(x)
        cert = Certificate(dict(sorted(res.items())), tuple(acc))
        if not cert.valid:
            raise ArithmeticError("certificate failed exact verification")
        return cert
    ref = Refutation(tuple(res))
    dense = [_dense(g, d) for g in generators]
    if not ref.verify(target, dense):
        raise ArithmeticError("refutation failed exact verification")
    return ref


def _dense(g, d):
    if isinstance(g, Mapping):
        v = [Fraction(0)] * d
        for k, x in g.items():
            v[int(k)] = Q(x)
        return v
    return g


# --------------------------------------------------------------------------
# double description


def _dd_pointed(rows: list[Vector], r: int) -> list[Vector]:
    """Extreme rays of ``{z : A z >= 0}`` where ``A`` has full column rank ``r``."""
    chosen: list[int] = []
    for i, row in enumerate(rows):
        if rank([rows[j] for j in chosen] + [row], r) > len(chosen):
            chosen.append(i)
            if len(chosen) == r:
                break
    inv = inverse([rows[i] for i in chosen])
    rays = [primitive(tuple(inv[k][j] for k in range(r))) for j in range(r)]
    tight = [frozenset(chosen[k] for k in range(r) if k != j) for j in range(r)]
    done = set(chosen)
    for i, a in enumerate(rows):
        if i in done:
            continue
        done.add(i)
        vals = [dot(a, ray) for ray in rays]
        pos = [j for j, v in enumerate(vals) if v > 0]
        neg = [j for j, v in enumerate(vals) if v < 0]
        zero = [j for j, v in enumerate(vals) if v == 0]
        new_rays = [rays[j] for j in pos] + [rays[j] for j in zero]
        new_tight = [tight[j] for j in pos] + [tight[j] | {i} for j in zero]
        for p in pos:
            for q in neg:
                common = tight[p] & tight[q]
                if len(common) < r - 2:
                    continue
                if rank([rows[k] for k in common], r) != r - 2:
                    continue
                ray = primitive(tuple(vals[p] * y - vals[q] * x for x, y in zip(rays[p], rays[q])))
                if any(ray):
                    new_rays.append(ray)
                    new_tight.append(common | {i})
        rays, tight = new_rays, new_tight
    return rays


def canonicalize_v(dim, rays, lineality, coords=None) -> ConeV:
    lin, piv = canonical_basis(lineality, dim)
    out = set()
    for ray in rays:
        red = primitive(reduce_mod(ray, lin, piv))
        if any(red):
            out.add(red)
    return ConeV(dim, tuple(sorted(out)), tuple(lin), coords)


def canonicalize_h(dim, ineqs, eqs, coords=None) -> ConeH:
    eq, piv = canonical_basis(eqs, dim)
    out = set()
    for a in ineqs:
        red = primitive(reduce_mod(a, eq, piv))
        if any(red):
            out.add(red)
    return ConeH(dim, tuple(sorted(out)), tuple(eq), coords)


def double_description(h: ConeH) -> ConeV:
    """Rays and lineality of an H-cone, canonically ordered."""
    dim = h.dim
    if dim > MAX_DIM:
        raise ConeDomainError(f"dimension {dim} exceeds {MAX_DIM}")
    basis = nullspace(list(h.equalities), dim)  # x = N y
    k = len(basis)
    if k == 0:
        return ConeV(dim, (), (), h.coords)
    ncols = [tuple(basis[j][i] for j in range(k)) for i in range(dim)]  # N as dim x k
    a1 = [tuple(dot(a, basis[j]) for j in range(k)) for a in h.inequalities]
    lin_y = nullspace(a1, k) if a1 else nullspace([], k)

    def lift(y):
        return tuple(dot(row, y) for row in ncols)

    lineality = [lift(y) for y in lin_y]
    if not a1 or rank(a1, k) == 0:
        return canonicalize_v(dim, [], lineality, h.coords)
    w_rows, _ = rref(a1, k)  # row-space basis; W = transpose
    r = len(w_rows)
    a2 = [tuple(dot(a, w) for w in w_rows) for a in a1]
    z_rays = _dd_pointed(a2, r)
    rays = [lift(tuple(sum((z[t] * w_rows[t][j] for t in range(r)), Fraction(0)) for j in range(k))) for z in z_rays]
    return canonicalize_v(dim, rays, lineality, h.coords)


def facet_enumeration(v: ConeV) -> ConeH:
    """Minimal H-representation of a V-cone (polar duality)."""
    polar = double_description(ConeH(v.dim, v.rays, v.lineality))
    return canonicalize_h(v.dim, polar.rays, polar.lineality, v.coords)


def canonical_h(c: Union[ConeH, ConeV]) -> ConeH:
    """Minimal canonical H-representation (implicit equalities made explicit)."""
    if isinstance(c, ConeH):
        c = double_description(c)
    return facet_enumeration(c)


def canonical_v(c: Union[ConeH, ConeV]) -> ConeV:
    if isinstance(c, ConeV):
        c = canonical_h(c)
    return double_description(c)


# --------------------------------------------------------------------------
# projection


def _implied(row: Vector, others: Sequence[Vector], eqs: Sequence[Vector]) -> bool:
    gens = list(others) + list(eqs) + [tuple(-x for x in e) for e in eqs]
    if not gens:
        return False
    return nonneg_combination(row, gens)[0]


def _prune(ineqs: list[Vector], eqs: list[Vector]) -> list[Vector]:
    eq, piv = canonical_basis(eqs, len(ineqs[0])) if ineqs else ([], [])
    uniq = []
    seen = set()
    for a in ineqs:
        red = primitive(reduce_mod(a, eq, piv))
        if any(red) and red not in seen:
            seen.add(red)
            uniq.append(red)
    kept = list(uniq)
    i = 0
    while i < len(kept):
        others = kept[:i] + kept[i + 1:]
        if _implied(kept[i], others, eq):
            kept = others
        else:
            i += 1
    return kept


def project_cone(c: ConeH, keep: Iterable[int]) -> ConeH:
    """Shadow of ``c`` on the coordinates ``keep`` by Fourier-Motzkin elimination."""
    keep = sorted(set(int(k) for k in keep))
    if not keep or any(not 0 <= k < c.dim for k in keep):
        raise ConeDomainError("keep must be a nonempty subset of coordinates")
    ineqs = [list(a) for a in c.inequalities]
    eqs = [list(b) for b in c.equalities]
    for j in range(c.dim):
        if j in keep:
            continue
        piv = next((e for e in eqs if e[j]), None)
        if piv is not None:
            eqs.remove(piv)

            def sub(row, piv=piv):
                if not row[j]:
                    return row
                f = row[j] / piv[j]
                return [x - f * y for x, y in zip(row, piv)]

            eqs = [sub(e) for e in eqs]
            ineqs = [sub(a) for a in ineqs]
        else:
            pos = [a for a in ineqs if a[j] > 0]
            neg = [a for a in ineqs if a[j] < 0]
            new = [a for a in ineqs if not a[j]]
            for p in pos:
                for q in neg:
                    new.append([-q[j] * x + p[j] * y for x, y in zip(p, q)])
            ineqs = new
        eqs = [e for e in eqs if any(e)]
        ineqs = [tuple(a) for a in ineqs if any(a)]
        ineqs = [list(a) for a in _prune(ineqs, [tuple(e) for e in eqs])] if ineqs else []
    coords = tuple(c.coords[k] for k in keep) if c.coords else None
    return ConeH(
        len(keep),
        tuple(tuple(a[k] for k in keep) for a in ineqs),
        tuple(tuple(e[k] for k in keep) for e in eqs),
        coords,
    )


# --------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class ConeComparison:
    equal: bool
    counterexample: Optional[Vector] = None
    direction: str = ""

    def __bool__(self):
        return self.equal


def cones_equal(a: Union[ConeH, ConeV], b: Union[ConeH, ConeV]) -> ConeComparison:
    """Mutual inclusion test; on failure returns a generator of one cone outside the other."""
    if a.dim != b.dim:
        raise ConeDomainError("cones live in different dimensions")
    va = a if isinstance(a, ConeV) else double_description(a)
    vb = b if isinstance(b, ConeV) else double_description(b)
    ha = a if isinstance(a, ConeH) else facet_enumeration(a)
    hb = b if isinstance(b, ConeH) else facet_enumeration(b)
    for g in va.generators():
        if not hb.contains(g):
            return ConeComparison(False, g, "first not in second")
    for g in vb.generators():
        if not ha.contains(g):
            return ConeComparison(False, g, "second not in first")
    return ConeComparison(True)


# --------------------------------------------------------------------------
# JSON


def _strs(rows):
    return [[str(x) for x in r] for r in rows]


def cone_to_json(c: Union[ConeH, ConeV], both: bool = True) -> dict:
    """Cone JSON with both representations (canonical) when ``both``."""
    h = canonical_h(c) if both or isinstance(c, ConeH) else None
    v = canonical_v(c) if both or isinstance(c, ConeV) else None
    out: dict = {"dim": c.dim}
    if c.coords:
        out["coords"] = list(c.coords)
    if h is not None:
        out["inequalities"] = _strs(h.inequalities)
        out["equalities"] = _strs(h.equalities)
    if v is not None:
        out["rays"] = _strs(v.rays)
        out["lineality"] = _strs(v.lineality)
    return out


def cone_from_json(data: Union[str, Mapping]):
    """Returns ``(ConeH or None, ConeV or None)``."""
    if isinstance(data, str):
        data = json.loads(data)
    dim = int(data["dim"])
    coords = tuple(data["coords"]) if data.get("coords") else None
    h = v = None
    if "inequalities" in data or "equalities" in data:
        h = ConeH(dim, data.get("inequalities", []), data.get("equalities", []), coords)
    if "rays" in data or "lineality" in data:
        v = ConeV(dim, data.get("rays", []), data.get("lineality", []), coords)
    return h, v
