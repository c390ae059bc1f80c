"""Uniform additivity cones.

Outer bound: every witness distribution ``p`` gives a linear constraint
``Delta(alpha, p) >= 0``; double description turns the resulting H-cone into
rays.  Inner bound: each ray (and each lineality direction, both signs) is
certified by an exact nonnegative combination of basic entropy inequalities
on the two-channel context.  When every generator is certified the two
bounds coincide and the cone is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import product
from typing import Optional, Sequence, Union

from .decouplings import (
    BE_SWAP,
    CHANNEL_SWAP,
    DecouplingCode,
    DecouplingError,
    SymmetryMap,
    _orbit,
    delta_functional,
    delta_v_rows,
    delta_zero_rows,
)
from .entropic import (
    ClassicalDistribution,
    EntropyDomainError,
    EntropyVector,
    LinearEntropyFunctional,
    entropy_vector,
    evaluate_functional,
    exact_entropy_vector,
)
from .formulas import (
    ONE_VAR_SPACE,
    V_SPACE,
    ZERO_SPACE,
    AlphaSpace,
    aux_names,
    composite_context,
    solve_combination,
    describe_lineality,
    describe_ray,
    format_inequality,
    formula_context,
)
from .inequalities import as_generators, classical_elemental_set, quantum_basic_set
from .polyhedra import (
    Certificate,
    ConeH,
    ConeV,
    Refutation,
    canonical_basis,
    cones_equal,
    double_description,
    dual_membership,
    facet_enumeration,
    primitive,
    qvec,
    reduce_mod,
    canonicalize_h,
    canonicalize_v,
)

BASES = ("quantum", "classical")


class AdditivityError(ValueError):
    pass


# --------------------------------------------------------------------------
# boundedness


def boundedness_constraints(n_aux: int) -> list[tuple]:
    """Rows ``sum_s alpha_{s,t} = 0`` over the full alpha space, one per nonempty ``t``."""
    return AlphaSpace.full(n_aux).boundedness_rows()


# --------------------------------------------------------------------------
# witnesses


def _eval_bits(expr: str, bits: dict) -> int:
    out = 0
    for tok in expr.replace(" ", "").split("^"):
        if tok in ("0", "1"):
            out ^= int(tok)
        elif tok in bits:
            out ^= bits[tok]
        else:
            raise AdditivityError(f"unknown witness term {tok!r}")
    return out


@dataclass(frozen=True)
class WitnessSpec:
    """A classical construction on independent uniform bits ``R1, R2, R3``."""

    name: str
    block: str  # "zero" or "V"
    code: Optional[tuple]
    assign: tuple  # ((system, expression), ...)
    expected: tuple  # ((coordinate label, coefficient), ...)

    @classmethod
    def from_json(cls, d: dict) -> "WitnessSpec":
        return cls(
            d["name"],
            d["block"],
            tuple(d["code"]) if d.get("code") is not None else None,
            tuple(d["assign"].items()),
            tuple((k, Fraction(v)) for k, v in d["expected"].items()),
        )

    @property
    def space(self) -> AlphaSpace:
        return ZERO_SPACE if self.block == "zero" else V_SPACE

    @property
    def decoupling(self) -> Optional[DecouplingCode]:
        return DecouplingCode.single(*self.code) if self.code is not None else None

    def distribution(self) -> ClassicalDistribution:
        names = composite_context(0 if self.block == "zero" else 1).names
        assign = dict(self.assign)
        pmf: dict[tuple, Fraction] = {}
        for r in product((0, 1), repeat=3):
            bits = {"R1": r[0], "R2": r[1], "R3": r[2]}
            o = tuple(_eval_bits(assign.get(n, "0"), bits) for n in names)
            pmf[o] = pmf.get(o, Fraction(0)) + Fraction(1, 8)
        return ClassicalDistribution(names, (2,) * len(names), tuple(pmf.items()))

    def expected_vector(self) -> tuple:
        return self.space.vector(dict(self.expected))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "block": self.block,
            "code": list(self.code) if self.code is not None else None,
            "assign": dict(self.assign),
            "expected": {k: str(v) for k, v in self.expected},
        }


@lru_cache(maxsize=1)
def load_witness_library() -> tuple:
    """Curated witnesses shipped with the package, with the library version."""
    text = resources.files("addicone").joinpath("data/witnesses.json").read_text()
    data = json.loads(text)
    return data["version"], tuple(WitnessSpec.from_json(w) for w in data["witnesses"])


def witness_library() -> tuple:
    return load_witness_library()[1]


def witness_row(p: ClassicalDistribution, code: Optional[DecouplingCode], exact: bool = True) -> tuple:
    """``Delta`` on ``p`` as a linear form in the block's alpha coordinates.

    Zero block: ``(I(B1;B2), I(E1;E2), I(B1E1;B2E2))``; V block: ``(E_V, E_BV, E_EV, E_BEV)``.
    """
    v = exact_entropy_vector(p) if exact else entropy_vector(p)
    rows = delta_zero_rows() if code is None or code.n_aux == 0 else delta_v_rows(code)
    ctx = rows[0].context
    if v.context != ctx:
        v = EntropyVector(ctx, _reindex(v, ctx))
    return tuple(evaluate_functional(r, v) for r in rows)


def _reindex(v: EntropyVector, ctx) -> tuple:
    """Entropy values of ``v`` re-indexed into ``ctx`` (same names, any order)."""
    src = v.context
    out = [v.values[0]]
    for m in ctx.masks():
        out.append(v.values[src.mask(ctx.names_of(m))])
    return tuple(out)


@dataclass(frozen=True)
class AppliedWitness:
    """A library witness transported to a particular decoupling code."""

    spec: WitnessSpec
    word: tuple  # symmetry kinds applied to the library code
    distribution: ClassicalDistribution
    row: tuple

    @property
    def name(self) -> str:
        return self.spec.name if not self.word else f"{self.spec.name}@{'+'.join(self.word)}"


def _transport(p: ClassicalDistribution, word: Sequence[str], n_aux: int) -> ClassicalDistribution:
    for kind in word:
        mapping = SymmetryMap(kind).state_mapping(n_aux)
        p = p.relabel({k: v[0] for k, v in mapping.items()})
        p = p.reorder(composite_context(n_aux).names)
    return p


def witnesses_for(code: Optional[DecouplingCode]) -> list[AppliedWitness]:
    """Library witnesses for ``code``, moved along BE and channel exchanges when needed."""
    lib = witness_library()
    if code is None or code.n_aux == 0:
        return [AppliedWitness(w, (), w.distribution(), witness_row(w.distribution(), None))
                for w in lib if w.block == "zero"]
    if code.n_aux != 1:
        raise DecouplingError("library witnesses are single-variable")
    out = []
    for w in lib:
        if w.block != "V":
            continue
        words = _orbit(w.decoupling, (BE_SWAP, CHANNEL_SWAP))
        if code not in words:
            continue
        p = _transport(w.distribution(), words[code], 1)
        out.append(AppliedWitness(w, words[code], p, witness_row(p, code)))
    if not out:
        raise AdditivityError(f"no witnesses for {code}")
    return out


def witness_outer_cone(code: Optional[DecouplingCode]) -> ConeH:
    """``{alpha : Delta(alpha, p) >= 0 for every witness p}`` plus boundedness."""
    ws = witnesses_for(code)
    if code is None or code.n_aux == 0:
        return ConeH(3, [w.row for w in ws], (), ZERO_SPACE.labels)
    return ConeH(4, [w.row for w in ws], V_SPACE.boundedness_rows(), V_SPACE.labels)


# --------------------------------------------------------------------------
# certification


@lru_cache(maxsize=8)
def _basis(n_aux: int, basis: str) -> tuple:
    ctx = composite_context(n_aux)
    if basis == "quantum":
        inst = quantum_basic_set(ctx)
    elif basis == "classical":
        inst = classical_elemental_set(ctx)
    else:
        raise AdditivityError(f"unknown inequality basis {basis!r}")
    return tuple(inst), tuple(as_generators(inst))


def _space_for(vec, code) -> tuple[AlphaSpace, Optional[DecouplingCode]]:
    n = len(vec)
    if n == 3:
        return ZERO_SPACE, DecouplingCode(())
    if n == 4:
        return V_SPACE, code
    if n == 7:
        return ONE_VAR_SPACE, code
    raise AdditivityError(f"cannot infer the alpha space of a {n}-vector")


def ray_delta(alpha_ray: Sequence, code: Optional[DecouplingCode], space: Optional[AlphaSpace] = None) -> LinearEntropyFunctional:
    vec = qvec(alpha_ray)
    if space is None:
        space, code = _space_for(vec, code)
    if space.n_aux == 0:
        code = DecouplingCode(())
    full = AlphaSpace.full(space.n_aux)
    return delta_functional(full.to_functional(space.embed(vec, full)), code)


@dataclass(frozen=True)
class RayCertificate:
    """Certificate (or refutation) of ``Delta(alpha) >= 0`` for one generator."""

    vector: tuple
    result: Union[Certificate, Refutation]
    basis: str
    instances: tuple  # InequalityInstance, aligned with multiplier indices
    n_aux: int
    relabel: Optional[dict] = None  # block-to-composite system map for lifted certificates

    @property
    def ok(self) -> bool:
        return isinstance(self.result, Certificate)

    def to_json(self) -> dict:
        if not self.ok:
            return {"status": "refuted", "refutation": [str(x) for x in self.result.vector]}
        mult = []
        for i, lam in sorted(self.result.multipliers.items()):
            inst = self.instances[i]
            mult.append({"kind": inst.kind, "inequality": inst.describe(), "lambda": str(lam)})
        return {"status": "certified", "basis": self.basis, "multipliers": mult}


def certify_ray(alpha_ray: Sequence, code: Optional[DecouplingCode], basis: str = "quantum",
                space: Optional[AlphaSpace] = None) -> RayCertificate:
    """Express ``Delta(alpha_ray)`` as a nonnegative combination of basic inequalities.

    The refutation branch is returned as a value, not raised.
    """
    vec = qvec(alpha_ray)
    if space is None:
        space, code = _space_for(vec, code)
    for row in space.boundedness_rows():
        if sum((a * b for a, b in zip(row, vec)), Fraction(0)):
            raise AdditivityError("ray violates the boundedness equalities")
    delta = ray_delta(vec, code, space)
    instances, gens = _basis(space.n_aux, basis)
    result = dual_membership(delta.vector(), list(gens))
    return RayCertificate(vec, result, basis, instances, space.n_aux)


def verify_certificate(rc: RayCertificate, code: Optional[DecouplingCode], space: AlphaSpace,
                       composite=None) -> bool:
    """Recompute ``sum lam_i g_i`` exactly and compare with ``Delta`` (after any relabeling)."""
    if not rc.ok:
        return False
    if rc.relabel is None:
        target = ray_delta(rc.vector, code, space)
        acc = LinearEntropyFunctional.zero(target.context)
        for i, lam in rc.result.multipliers.items():
            acc = acc + rc.instances[i].functional * lam
        return acc == target
    ctx = composite
    acc = LinearEntropyFunctional.zero(ctx)
    for i, lam in rc.result.multipliers.items():
        acc = acc + rc.instances[i].functional.relabel(ctx, rc.relabel) * lam
    return acc == ray_delta(rc.vector, code, space)


# --------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class AdditivityCone:
    code: Optional[DecouplingCode]
    space: AlphaSpace
    h: ConeH
    v: ConeV
    certificates: tuple  # RayCertificate per generator: rays, then +l and -l per lineality
    witnesses: tuple = ()  # AppliedWitness
    basis: str = "quantum"
    outer: Optional[ConeH] = None

    @property
    def generators(self) -> list:
        return self.v.generators()

    @property
    def certified(self) -> bool:
        return all(c.ok for c in self.certificates)

    @property
    def inner(self) -> ConeV:
        """Cone generated by the certified generators only."""
        good = [c.vector for c in self.certificates if c.ok]
        return ConeV(self.space.dim, good, (), self.space.labels)

    def contains(self, alpha: Sequence) -> bool:
        return self.h.contains(alpha)

    def exact(self) -> bool:
        """Outer and inner descriptions coincide."""
        return self.certified and bool(cones_equal(self.h, self.inner))

    # display --------------------------------------------------------------

    def extra_equalities(self) -> list:
        """Implicit equalities of the cone beyond boundedness."""
        bnd, piv = canonical_basis(self.space.boundedness_rows(), self.space.dim)
        red = [reduce_mod(e, bnd, piv) for e in self.h.equalities]
        return [primitive(e) for e in canonical_basis(red, self.space.dim)[0]]

    def tight_witnesses(self) -> list:
        """Per canonical facet, the witnesses whose row equals it up to scale modulo equalities."""
        eqs = list(self.h.equalities)
        out = []
        for f in self.h.inequalities:
            names = []
            for w in self.witnesses:
                sol = solve_combination(w.row, [f] + eqs)
                if sol is not None and sol[0] > 0:
                    names.append(w.name)
            out.append(names)
        return out

    def facet_rows_display(self) -> list:
        """Facets as the first tight witness row, reduced by the extra equalities."""
        extra = self.extra_equalities()
        basis, piv = canonical_basis(extra, self.space.dim)
        tight = self.tight_witnesses()
        rows = []
        by_name = {w.name: w.row for w in self.witnesses}
        for f, names in zip(self.h.inequalities, tight):
            row = by_name[names[0]] if names else f
            red = reduce_mod(row, basis, piv)
            rows.append(red if any(red) else f)
        return rows

    def facets_display(self) -> list[str]:
        labels = self.space.labels
        out = [format_inequality(e, labels, "=") for e in self.extra_equalities()]
        out += [format_inequality(r, labels) for r in self.facet_rows_display()]
        return out

    def rays_display(self) -> list[str]:
        lin = self.v.lineality
        out = [describe_lineality(l, self.space) for l in lin]
        out += [describe_ray(r, self.space, lin) for r in self.v.rays]
        return out

    def to_json(self) -> dict:
        labels = self.space.labels
        rays = []
        gens = self.generators
        nrays = len(self.v.rays)
        for k, (g, c) in enumerate(zip(gens, self.certificates)):
            if k < nrays:
                formula = describe_ray(g, self.space, self.v.lineality)
                kind = "ray"
            else:
                j = (k - nrays) // 2
                formula = describe_lineality(self.v.lineality[j], self.space)
                kind = "lineality+" if (k - nrays) % 2 == 0 else "lineality-"
            rays.append({"kind": kind, "vector": [str(x) for x in g], "formula": formula, "certificate": c.to_json()})
        tight = self.tight_witnesses()
        wit = []
        for w in self.witnesses:
            on = [format_inequality(f, labels) for f, names in zip(self.h.inequalities, tight) if w.name in names]
            wit.append({"name": w.name, "row": [str(x) for x in w.row], "tight_on": on})
        return {
            "class": list(self.code.pair) if self.code is not None and self.code.n_aux == 1 else (
                self.code.to_json() if self.code is not None else []),
            "coords": list(labels),
            "basis": self.basis,
            "equalities": [[str(x) for x in e] for e in self.h.equalities],
            "facets": [[str(x) for x in f] for f in self.h.inequalities],
            "facets_display": self.facets_display(),
            "rays": rays,
            "lineality": [[str(x) for x in l] for l in self.v.lineality],
            "witnesses": wit,
            "certified": self.certified,
        }


def _build(code, space, outer, witnesses, basis) -> AdditivityCone:
    v = double_description(outer)
    h = facet_enumeration(v)
    certs = []
    for g in v.generators():
        certs.append(certify_ray(g, code, basis, space))
    return AdditivityCone(code, space, h, v, tuple(certs), tuple(witnesses), basis, outer)


@lru_cache(maxsize=None)
def zero_var_cone(basis: str = "quantum") -> AdditivityCone:
    ws = witnesses_for(None)
    return _build(DecouplingCode(()), ZERO_SPACE, witness_outer_cone(None), ws, basis)


@lru_cache(maxsize=None)
def one_var_cone(code: DecouplingCode, basis: str = "quantum") -> AdditivityCone:
    """Exact cone of ``alpha^V`` for a single-variable code (any of the 16)."""
    if code.n_aux != 1:
        raise DecouplingError("one_var_cone needs a single-variable code")
    ws = witnesses_for(code)
    outer = witness_outer_cone(code)
    return _build(code, V_SPACE, outer, ws, basis)


def _subsets(n: int):
    return range(1 << n)


def multi_var_cone(n_aux: int, code: DecouplingCode, basis: str = "quantum") -> AdditivityCone:
    """Composed cone: ``alpha^{V_J}`` in the induced one-variable cone for every ``J``."""
    if code.n_aux != n_aux:
        raise DecouplingError(f"code has {code.n_aux} variables, expected {n_aux}")
    if not code.consistent:
        raise DecouplingError("inconsistent decoupling")
    if n_aux > 3:
        raise DecouplingError("multi_var_cone supports at most 3 variables")
    full = AlphaSpace.full(n_aux)
    ineqs, eqs, rays, lins, certs = [], [], [], [], []
    auxes = aux_names(n_aux)
    for t in _subsets(n_aux):
        blk = AlphaSpace.block(n_aux, t)
        if t == 0:
            cone = zero_var_cone(basis)
            mapping = {n: (n,) for n in composite_context(0).names}
        else:
            members = [i for i in range(n_aux) if (t >> i) & 1]
            cone = one_var_cone(code.induced(members), basis)
            mapping = {n: (n,) for n in composite_context(0).names}
            mapping["V"] = tuple(auxes[i] for i in members)
        lift = lambda x, blk=blk: blk.embed(x, full)
        ineqs += [lift(a) for a in cone.h.inequalities]
        eqs += [lift(e) for e in cone.h.equalities]
        rays += [lift(r) for r in cone.v.rays]
        lins += [lift(l) for l in cone.v.lineality]
        for rc in cone.certificates:
            certs.append(RayCertificate(lift(rc.vector), rc.result, rc.basis, rc.instances, n_aux, mapping))
    h = canonicalize_h(full.dim, ineqs, eqs, full.labels)
    v = canonicalize_v(full.dim, rays, lins, full.labels)
    # block canonical forms survive lifting, so each generator has a lifted certificate
    by_vec = {primitive(c.vector): c for c in certs}
    ordered = []
    for g in v.generators():
        c = by_vec.get(primitive(g))
        if c is None:
            if n_aux != 1:
                raise AdditivityError(f"no lifted certificate for generator {g}")
            c = certify_ray(g, code, basis, full)
        ordered.append(c)
    return AdditivityCone(code, full, h, v, tuple(ordered), (), basis, None)


def full_cone(code: DecouplingCode, basis: str = "quantum") -> AdditivityCone:
    """Full seven-coordinate cone of a single-variable code (separation of variables)."""
    return multi_var_cone(1, code, basis)


# --------------------------------------------------------------------------
# direct seven-coordinate computation (no separation assumed)


def _full_rows(p: ClassicalDistribution, code: DecouplingCode) -> tuple:
    space = ONE_VAR_SPACE
    v = exact_entropy_vector(p)
    out = []
    for k in range(space.dim):
        e = [0] * space.dim
        e[k] = 1
        out.append(evaluate_functional(delta_functional(space.to_functional(e), code), v))
    return tuple(out)


def _with_aux(p: ClassicalDistribution, n_aux: int, placement: dict) -> ClassicalDistribution:
    """Extend a witness to ``[V1..Vn, B1, E1, B2, E2]``; ``placement`` maps target aux to source aux."""
    names = composite_context(n_aux).names
    src = p.names
    alph = []
    for n in names:
        if n in placement:
            alph.append(p.alphabets[src.index(placement[n])])
        elif n in src and not n.startswith("V"):
            alph.append(p.alphabets[src.index(n)])
        else:
            alph.append(1)
    atoms = []
    for o, q in p.atoms:
        out = []
        for n in names:
            if n in placement:
                out.append(o[src.index(placement[n])])
            elif n in src and not n.startswith("V"):
                out.append(o[src.index(n)])
            else:
                out.append(0)
        atoms.append((tuple(out), q))
    return ClassicalDistribution(names, tuple(alph), tuple(atoms))


def direct_one_var_cone(code: DecouplingCode, basis: str = "quantum") -> AdditivityCone:
    """Seven-coordinate cone from transformed witnesses and full-Delta certificates."""
    rows = []
    applied = []
    for w in witnesses_for(None):
        p = _with_aux(w.distribution, 1, {})
        q = distribution_transform(p, code, ())
        rows.append(_full_rows(q, code))
        applied.append(AppliedWitness(w.spec, w.word + ("T=()",), q, rows[-1]))
    for w in witnesses_for(code):
        q = distribution_transform(w.distribution, code, (0,))
        rows.append(_full_rows(q, code))
        applied.append(AppliedWitness(w.spec, w.word + ("T=(1)",), q, rows[-1]))
    outer = ConeH(7, rows, ONE_VAR_SPACE.boundedness_rows(), ONE_VAR_SPACE.labels)
    return _build(code, ONE_VAR_SPACE, outer, applied, basis)


# --------------------------------------------------------------------------
# classical versus quantum


@dataclass(frozen=True)
class CoincidenceReport:
    code: Optional[DecouplingCode]
    quantum: AdditivityCone
    classical: AdditivityCone
    equal: bool
    counterexample: Optional[tuple] = None

    def to_json(self) -> dict:
        return {
            "class": list(self.code.pair) if self.code is not None and self.code.n_aux == 1 else [],
            "equal": self.equal,
            "quantum_certified": self.quantum.certified,
            "classical_certified": self.classical.certified,
            "counterexample": [str(x) for x in self.counterexample] if self.counterexample else None,
        }


def coincidence_check(code: Optional[DecouplingCode]) -> CoincidenceReport:
    """Compare cones certified against the quantum basic set and the classical elemental set."""
    if code is None or code.n_aux == 0:
        q, c = zero_var_cone("quantum"), zero_var_cone("classical")
    else:
        q, c = one_var_cone(code, "quantum"), one_var_cone(code, "classical")
    cmp_inner = cones_equal(q.inner, c.inner)
    cmp_outer = cones_equal(q.h, c.inner)
    equal = bool(cmp_inner) and bool(cmp_outer) and q.certified and c.certified
    ce = cmp_inner.counterexample or cmp_outer.counterexample
    return CoincidenceReport(code, q, c, equal, ce)


# --------------------------------------------------------------------------
# distribution transform


def distribution_transform(p: ClassicalDistribution, code: DecouplingCode, T: Sequence[int]) -> ClassicalDistribution:
    """One-time-pad construction isolating the ``V_T`` block of Delta.

    ``p`` lives on ``[V1..Vn, B1, E1, B2, E2]``; ``T`` holds 0-based indices.
    Outputs are padded by sums of fresh uniform registers ``R_i^f`` which
    are handed to ``V_{t_i}``; auxiliaries outside ``T`` receive a copy of
    ``B1E1B2E2``.
    """
    n = code.n_aux
    names = composite_context(n).names
    if tuple(p.names) != names:
        raise EntropyDomainError(f"expected variables {names}, got {p.names}")
    T = sorted(set(int(t) for t in T))
    if any(not 0 <= t < n for t in T):
        raise EntropyDomainError("T must index auxiliary variables")
    outs = ("B1", "E1", "B2", "E2")
    oidx = [names.index(x) for x in outs]
    d = max(p.alphabets[i] for i in oidx)
    k = len(T)
    copy_size = d ** 4
    alph = []
    for i in range(n):
        alph.append(p.alphabets[i] * d ** 4 if i in T else copy_size)
    alph += [d] * 4
    exact = p.is_exact
    unit = Fraction(1, d ** (4 * k)) if exact else 1.0 / d ** (4 * k)
    acc: dict = {}
    for o, q in p.atoms:
        outputs = [o[i] for i in oidx]
        copy = 0
        for x in outputs:
            copy = copy * d + x
        for pads in product(range(d), repeat=4 * k):
            # pads[4*j + f] is R_{t_j}^f
            r = [sum(pads[4 * j + f] for j in range(k)) % d for f in range(4)]
            new = []
            for i in range(n):
                if i in T:
                    j = T.index(i)
                    reg = 0
                    for f in range(4):
                        reg = reg * d + pads[4 * j + f]
                    new.append(o[i] * d ** 4 + reg)
                else:
                    new.append(copy)
            new += [(outputs[f] + r[f]) % d for f in range(4)]
            key = tuple(new)
            acc[key] = acc.get(key, 0) + q * unit
    return ClassicalDistribution(names, tuple(alph), tuple(acc.items()))


def block_delta(alpha: Sequence, code: DecouplingCode, t: int, v: EntropyVector, space: Optional[AlphaSpace] = None):
    """``Delta^{V_J}`` of the ``t`` block of ``alpha`` on an entropy vector of the composite context."""
    full = space or AlphaSpace.full(code.n_aux)
    blk = AlphaSpace.block(code.n_aux, t)
    part = blk.embed(blk.restrict(alpha, full), full)
    return evaluate_functional(delta_functional(full.to_functional(part), code), v)


def refuting_witness(alpha: Sequence, code: DecouplingCode):
    """Exact witness ``(distribution, value)`` with ``Delta(alpha) < 0``, or None.

    A violated block ``J`` is located through the library rows of its induced
    cone; the row's witness is placed on ``V_J`` and pushed through
    ``distribution_transform`` so the full Delta equals the block value.
    """
    n = code.n_aux
    full = AlphaSpace.full(n)
    alpha = qvec(alpha)
    auxes = aux_names(n)
    for t in _subsets(n):
        blk = AlphaSpace.block(n, t)
        part = blk.restrict(alpha, full)
        members = [i for i in range(n) if (t >> i) & 1]
        if t == 0:
            ws = witnesses_for(None)
        else:
            ws = witnesses_for(code.induced(members))
        for w in ws:
            val = sum((r * a for r, a in zip(w.row, part)), Fraction(0))
            if val >= 0:
                continue
            placement = {auxes[members[0]]: "V"} if members else {}
            p = _with_aux(w.distribution, n, placement)
            q = distribution_transform(p, code, members)
            got = evaluate_functional(delta_functional(full.to_functional(alpha), code), exact_entropy_vector(q))
            if got != val:
                raise AdditivityError("transformed witness does not reproduce the block value")
            return q, got
    return None


# --------------------------------------------------------------------------
# known quantities


KNOWN_QUANTITIES = (
    ("max output entropy", "H(B)"),
    ("reverse coherent information", "-H(B|V)"),
    ("entanglement-assisted form", "H(B)-H(B|V)"),
    ("completely coherent information", "H(BV)-H(EV)"),
)


def known_quantity_memberships() -> list[dict]:
    """Which single-variable codes make each known quantity uniformly additive."""
    from .decouplings import enumerate_standard

    ctx = formula_context(1)
    from .formulas import parse_functional

    out = []
    for name, text in KNOWN_QUANTITIES:
        alpha = ONE_VAR_SPACE.from_functional(parse_functional(text, ctx))
        members = [list(c.pair) for c in enumerate_standard(1) if full_cone(c).contains(alpha)]
        out.append({"name": name, "formula": text, "vector": [str(x) for x in alpha], "codes": members})
    return out
