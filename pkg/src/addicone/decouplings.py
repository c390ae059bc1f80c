"""Standard decouplings, their symmetries, and the compiled Delta functional."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .entropic import EntropyDomainError, LinearEntropyFunctional
from .formulas import (
    AlphaSpace,
    aux_names,
    composite_context,
    display_label,
    formula_context,
    split_mask,
)

MAX_AUX = 4
# bit 1 = B, bit 2 = E; 0..3 <-> {}, B, E, BE
SUBSET_NAMES = ("∅", "B", "E", "BE")

# classes of single-variable decouplings under BE and channel exchange, in display order
CLASS_ORDER = ((3, 3), (3, 1), (3, 0), (1, 1), (1, 2), (1, 0), (0, 0))
# cases after purification duality: representative, and the classes each absorbs
MERGED_CASES = (
    (1, (3, 3), ((3, 3), (0, 0))),
    (2, (3, 2), ((3, 1), (1, 0))),
    (3, (3, 0), ((3, 0),)),
    (4, (1, 1), ((1, 1),)),
    (5, (1, 2), ((1, 2),)),
)


class DecouplingError(EntropyDomainError):
    pass


def _outputs(bits: int, channel: int) -> tuple[str, ...]:
    out = []
    if bits & 1:
        out.append(f"B{channel}")
    if bits & 2:
        out.append(f"E{channel}")
    return tuple(out)


@dataclass(frozen=True, order=True)
class DecouplingCode:
    """Per auxiliary variable ``i``: ``a_i`` picks M^_1 from channel 1, ``b_i`` picks M~_2 from channel 2."""

    pairs: tuple = ()

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if len(pairs) > MAX_AUX:
            raise DecouplingError(f"at most {MAX_AUX} auxiliary variables")
        for a, b in pairs:
            if not (0 <= a <= 3 and 0 <= b <= 3):
                raise DecouplingError(f"code entries must lie in 0..3, got {(a, b)}")
        if not self.consistent:
            raise DecouplingError(f"inconsistent decoupling {pairs}: outputs assigned twice")

    @classmethod
    def single(cls, a: int, b: int) -> "DecouplingCode":
        return cls(((a, b),))

    @classmethod
    def parse(cls, text: str) -> "DecouplingCode":
        """``"3,1"`` (one variable), ``"33,00"`` (one pair per variable) or ``""`` (none)."""
        text = text.strip().strip("()[]").replace(" ", "")
        if not text:
            return cls(())
        parts = text.split(",")
        if len(parts) == 2 and all(len(p) == 1 for p in parts):
            return cls.single(int(parts[0]), int(parts[1]))
        if all(len(p) == 2 and p.isdigit() for p in parts):
            return cls(tuple((int(p[0]), int(p[1])) for p in parts))
        raise DecouplingError(f"cannot parse decoupling code {text!r}")

    @property
    def consistent(self) -> bool:
        seen_a = seen_b = 0
        for a, b in self.pairs:
            if a & seen_a or b & seen_b:
                return False
            seen_a |= a
            seen_b |= b
        return True

    @property
    def n_aux(self) -> int:
        return len(self.pairs)

    @property
    def pair(self) -> tuple[int, int]:
        if self.n_aux != 1:
            raise DecouplingError("not a single-variable code")
        return self.pairs[0]

    def m_hat(self, i: int = 0) -> tuple[str, ...]:
        """Channel-1 outputs absorbed into the auxiliary of the second piece."""
        return _outputs(self.pairs[i][0], 1)

    def m_tilde(self, i: int = 0) -> tuple[str, ...]:
        """Channel-2 outputs absorbed into the auxiliary of the first piece."""
        return _outputs(self.pairs[i][1], 2)

    def induced(self, members: Iterable[int]) -> "DecouplingCode":
        """Single-variable code for the merged auxiliary ``V_J`` (0-based indices)."""
        a = b = 0
        for i in members:
            a |= self.pairs[i][0]
            b |= self.pairs[i][1]
        return DecouplingCode.single(a, b)

    def label(self) -> str:
        return ",".join(f"{a}{b}" for a, b in self.pairs) if self.n_aux != 1 else f"({self.pair[0]},{self.pair[1]})"

    def to_json(self) -> list:
        return [list(p) for p in self.pairs]


def enumerate_standard(n_aux: int) -> list[DecouplingCode]:
    """All consistent standard decouplings for ``n_aux`` variables, sorted."""
    if not 0 <= n_aux <= MAX_AUX:
        raise DecouplingError(f"n_aux must lie in 0..{MAX_AUX}")
    out = []
    for pairs in itertools.product(itertools.product(range(4), repeat=2), repeat=n_aux):
        seen_a = seen_b = 0
        ok = True
        for a, b in pairs:
            if a & seen_a or b & seen_b:
                ok = False
                break
            seen_a |= a
            seen_b |= b
        if ok:
            out.append(DecouplingCode(pairs))
    return sorted(out)


# --------------------------------------------------------------------------
# symmetries


def _swap_bits(x: int) -> int:
    return ((x & 1) << 1) | ((x & 2) >> 1)


@dataclass(frozen=True)
class SymmetryMap:
    """Involutions of the classification problem.

    ``BESwap`` exchanges B and E everywhere, ``ChannelSwap`` exchanges the
    two channels (alpha unchanged), ``PurificationDual`` complements each
    absorbed set and reverses every auxiliary block of alpha.
    """

    kind: str

    KINDS = ("BESwap", "ChannelSwap", "PurificationDual")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DecouplingError(f"unknown symmetry {self.kind!r}")

    def code(self, code: DecouplingCode) -> DecouplingCode:
        if self.kind == "BESwap":
            return DecouplingCode(tuple((_swap_bits(a), _swap_bits(b)) for a, b in code.pairs))
        if self.kind == "ChannelSwap":
            return DecouplingCode(tuple((b, a) for a, b in code.pairs))
        if code.n_aux != 1:
            raise DecouplingError("purification duality is defined for one auxiliary variable")
        a, b = code.pair
        return DecouplingCode.single(3 - a, 3 - b)

    def functional(self, f: LinearEntropyFunctional) -> LinearEntropyFunctional:
        """Action on a formula functional over ``[V.., B, E]``."""
        ctx = f.context
        n_aux = ctx.n - 2
        if self.kind == "ChannelSwap":
            return f
        if self.kind == "BESwap":
            mapping = {n: (n,) for n in ctx.names}
            mapping["B"], mapping["E"] = ("E",), ("B",)
            return f.relabel(ctx, mapping)
        out = {}
        for m, c in f.coeffs.items():
            s, t = split_mask(n_aux, m)
            if t:
                m = ((3 - s) << n_aux) | t
            out[m] = out.get(m, Fraction(0)) + c
        return LinearEntropyFunctional(ctx, out)

    def alpha(self, vec: Sequence, space: AlphaSpace) -> tuple:
        return space.from_functional(self.functional(space.to_functional(vec)))

    def state_mapping(self, n_aux: int) -> dict[str, tuple[str, ...]]:
        """System relabeling of the composite context realizing this symmetry on states."""
        names = aux_names(n_aux) if n_aux else ()
        mapping = {n: (n,) for n in names}
        if self.kind == "BESwap":
            mapping.update({"B1": ("E1",), "E1": ("B1",), "B2": ("E2",), "E2": ("B2",)})
        elif self.kind == "ChannelSwap":
            mapping.update({"B1": ("B2",), "B2": ("B1",), "E1": ("E2",), "E2": ("E1",)})
        else:
            raise DecouplingError("purification duality is not a relabeling")
        return mapping


BE_SWAP = SymmetryMap("BESwap")
CHANNEL_SWAP = SymmetryMap("ChannelSwap")
PURIFICATION_DUAL = SymmetryMap("PurificationDual")


@dataclass(frozen=True)
class EquivalenceClass:
    representative: DecouplingCode
    members: tuple  # DecouplingCode, sorted
    # group elements (tuple of symmetry kinds applied in order) taking the representative to each member
    words: tuple = ()

    @property
    def equivalents(self) -> tuple:
        return tuple(m for m in self.members if m != self.representative)

    def to_json(self) -> dict:
        return {
            "aux": self.representative.n_aux,
            "code": [list(self.representative.pair)],
            "class_rep": list(self.representative.pair),
            "equivalents": [list(m.pair) for m in self.equivalents],
        }


def _orbit(code: DecouplingCode, gens: Sequence[SymmetryMap]) -> dict:
    words = {code: ()}
    frontier = [code]
    while frontier:
        nxt = []
        for c in frontier:
            for g in gens:
                d = g.code(c)
                if d not in words:
                    words[d] = words[c] + (g.kind,)
                    nxt.append(d)
        frontier = nxt
    return words


def _class_rank(pair):
    return CLASS_ORDER.index(pair) if pair in CLASS_ORDER else len(CLASS_ORDER)


def reduce_by_symmetry(codes: Sequence[DecouplingCode], include_dual: bool = False) -> list[EquivalenceClass]:
    """Orbits under BE and channel exchange (plus purification duality if asked).

    Representatives follow ``CLASS_ORDER``; each class also records, per
    member, the word of symmetries taking the representative there.
    """
    gens = [BE_SWAP, CHANNEL_SWAP] + ([PURIFICATION_DUAL] if include_dual else [])
    for c in codes:
        if c.n_aux != 1:
            raise DecouplingError("symmetry reduction is implemented for one auxiliary variable")
    remaining = sorted(set(codes), key=lambda c: (_class_rank(c.pair), c))
    classes = []
    done = set()
    for c in remaining:
        if c in done:
            continue
        orbit = _orbit(c, gens)
        rep = min(orbit, key=lambda d: (_class_rank(d.pair), d))
        words = _orbit(rep, gens)
        members = tuple(sorted((m for m in words if m in set(codes)), key=lambda d: (_class_rank(d.pair), d)))
        done.update(orbit)
        classes.append(EquivalenceClass(rep, members, tuple(words[m] for m in members)))
    classes.sort(key=lambda k: _class_rank(k.representative.pair))
    return classes


def class_of(code: DecouplingCode, include_dual: bool = False) -> EquivalenceClass:
    for k in reduce_by_symmetry(enumerate_standard(1), include_dual):
        if code in k.members:
            return k
    raise DecouplingError(f"no class for {code}")


def cross_reference() -> list[dict]:
    """Merged cases versus symmetry classes, derived from the purification merge."""
    sm = reduce_by_symmetry(enumerate_standard(1))
    merged = reduce_by_symmetry(enumerate_standard(1), include_dual=True)
    out = []
    for number, rep, _ in MERGED_CASES:
        rep_code = DecouplingCode.single(*rep)
        big = next(k for k in merged if rep_code in k.members)
        absorbed = [k.representative.pair for k in sm if set(k.members) <= set(big.members)]
        out.append({
            "case": number,
            "representative": list(rep),
            "classes": [list(p) for p in absorbed],
            "equivalents": [list(m.pair) for m in big.members if m != rep_code],
        })
    return out


# --------------------------------------------------------------------------
# Delta


def _check_alpha(alpha: LinearEntropyFunctional, code: DecouplingCode) -> int:
    ctx = alpha.context
    n_aux = code.n_aux
    if ctx != formula_context(n_aux):
        raise DecouplingError(
            f"alpha context {ctx.names} does not match {n_aux} auxiliary variable(s)"
        )
    if not code.consistent:
        raise DecouplingError("inconsistent decoupling")
    return n_aux


def delta_functional(alpha: LinearEntropyFunctional, code: DecouplingCode) -> LinearEntropyFunctional:
    """Delta = f(first piece) + f(second piece) - f(joint) as an exact functional.

    First piece: ``(B,E) -> (B1,E1)``, ``V_i -> V_i M~_2^i``; second:
    ``(B,E) -> (B2,E2)``, ``V_i -> V_i M^_1^i``; joint: ``B -> B1B2``,
    ``E -> E1E2``.
    """
    n_aux = _check_alpha(alpha, code)
    target = composite_context(n_aux)
    auxes = aux_names(n_aux) if n_aux else ()
    first = {"B": ("B1",), "E": ("E1",)}
    second = {"B": ("B2",), "E": ("E2",)}
    joint = {"B": ("B1", "B2"), "E": ("E1", "E2")}
    for i, v in enumerate(auxes):
        first[v] = (v,) + code.m_tilde(i)
        second[v] = (v,) + code.m_hat(i)
        joint[v] = (v,)
    return alpha.relabel(target, first) + alpha.relabel(target, second) - alpha.relabel(target, joint)


def _subset_mask(s: Union[int, str]) -> int:
    if isinstance(s, int):
        if not 0 <= s <= 3:
            raise DecouplingError("s must be a subset of {B, E}")
        return s
    s = s.replace("∅", "")
    m = 0
    for ch in s:
        if ch == "B":
            m |= 1
        elif ch == "E":
            m |= 2
        else:
            raise DecouplingError(f"s must be a subset of BE, got {s!r}")
    return m


def esv_term(s: Union[int, str], code: DecouplingCode) -> LinearEntropyFunctional:
    """``H(s1 M~2 V) + H(M^1 s2 V) - H(s1 s2 V) - H(M^1 M~2 V)`` on ``[V, B1, E1, B2, E2]``."""
    if code.n_aux != 1:
        raise DecouplingError("esv_term needs a single-variable code")
    s = _subset_mask(s)
    ctx = composite_context(1)
    s1, s2 = _outputs(s, 1), _outputs(s, 2)
    mh, mt = code.m_hat(), code.m_tilde()
    terms: dict[int, int] = {}
    for systems, c in (
        (s1 + mt, 1),
        (mh + s2, 1),
        (s1 + s2, -1),
        (mh + mt, -1),
    ):
        m = ctx.mask(("V",) + systems)
        terms[m] = terms.get(m, 0) + c
    return LinearEntropyFunctional(ctx, terms)


def delta_v_rows(code: DecouplingCode) -> list[LinearEntropyFunctional]:
    """``[E_V, E_BV, E_EV, E_BEV]``: Delta^V as a linear form in alpha^V."""
    return [esv_term(s, code) for s in range(4)]


def delta_zero_rows() -> list[LinearEntropyFunctional]:
    """``[I(B1;B2), I(E1;E2), I(B1E1;B2E2)]`` on ``[B1, E1, B2, E2]``."""
    ctx = composite_context(0)
    mi = LinearEntropyFunctional.mutual_information
    return [mi(ctx, "B1", "B2"), mi(ctx, "E1", "E2"), mi(ctx, "B1E1", "B2E2")]


def code_systems_table(code: DecouplingCode) -> tuple[str, str]:
    """Display strings for M^_1 and M~_2 of a single-variable code."""
    mh = "".join(code.m_hat()) or "∅"
    mt = "".join(code.m_tilde()) or "∅"
    return mh, mt


__all__ = [
    "BE_SWAP",
    "CHANNEL_SWAP",
    "DecouplingCode",
    "DecouplingError",
    "EquivalenceClass",
    "MERGED_CASES",
    "PURIFICATION_DUAL",
    "CLASS_ORDER",
    "SymmetryMap",
    "class_of",
    "code_systems_table",
    "cross_reference",
    "delta_functional",
    "delta_v_rows",
    "delta_zero_rows",
    "display_label",
    "enumerate_standard",
    "esv_term",
    "reduce_by_symmetry",
]
