"""Coefficient spaces, expression parsing and pretty printing.

A formula over ``n_aux`` auxiliary variables lives on the context
``[V1..Vn, B, E]`` (``[V, B, E]`` when ``n_aux == 1``).  Its coefficient
vector ``alpha`` is indexed by the nonempty subsets of that context, ordered
by the auxiliary part ``t`` first and the output part ``s`` second, so that a
single auxiliary variable gives ``(a_B, a_E, a_BE, a_V, a_BV, a_EV, a_BEV)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .entropic import EntropyDomainError, LinearEntropyFunctional, SystemContext
from .polyhedra import primitive, qvec, rref

OUTPUTS = ("B", "E")
CHANNEL_OUTPUTS = ("B1", "E1", "B2", "E2")


def aux_names(n_aux: int) -> tuple[str, ...]:
    if n_aux == 1:
        return ("V",)
    return tuple(f"V{i}" for i in range(1, n_aux + 1))


@lru_cache(maxsize=None)
def formula_context(n_aux: int) -> SystemContext:
    return SystemContext(aux_names(n_aux) + OUTPUTS)


@lru_cache(maxsize=None)
def composite_context(n_aux: int) -> SystemContext:
    return SystemContext(aux_names(n_aux) + CHANNEL_OUTPUTS)


def is_aux(name: str) -> bool:
    return name.startswith("V")


def display_label(ctx: SystemContext, mask: int) -> str:
    """Outputs first, auxiliaries last (``BEV``, ``B1B2V``)."""
    names = ctx.names_of(mask)
    return "".join([n for n in names if not is_aux(n)] + [n for n in names if is_aux(n)])


# --------------------------------------------------------------------------
# coefficient spaces


def split_mask(n_aux: int, mask: int) -> tuple[int, int]:
    """Formula-context mask -> (output part s over {B=1, E=2}, aux part t)."""
    return mask >> n_aux, mask & ((1 << n_aux) - 1)


def join_mask(n_aux: int, s: int, t: int) -> int:
    return (s << n_aux) | t


@dataclass(frozen=True)
class AlphaSpace:
    """Coordinates of ``alpha`` restricted to a set of auxiliary blocks ``t``."""

    n_aux: int
    blocks: tuple  # aux masks t included, ascending

    @classmethod
    def full(cls, n_aux: int) -> "AlphaSpace":
        return cls(n_aux, tuple(range(1 << n_aux)))

    @classmethod
    def block(cls, n_aux: int, t: int) -> "AlphaSpace":
        return cls(n_aux, (t,))

    @property
    def context(self) -> SystemContext:
        return formula_context(self.n_aux)

    @property
    def masks(self) -> tuple[int, ...]:
        out = []
        for t in self.blocks:
            for s in range(4):
                if s or t:
                    out.append(join_mask(self.n_aux, s, t))
        return tuple(out)

    @property
    def dim(self) -> int:
        return len(self.masks)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple("a_" + display_label(self.context, m) for m in self.masks)

    def index(self, label: str) -> int:
        for prefix in ("a_", "α_"):
            if label.startswith(prefix):
                label = label[len(prefix):]
        mask = self.context.mask(label)
        try:
            return self.masks.index(mask)
        except ValueError:
            raise EntropyDomainError(f"{label} not a coordinate of this space") from None

    def vector(self, terms: dict) -> tuple:
        """Vector from ``{"a_V": 1, "a_BV": -1}``-style maps."""
        v = [Fraction(0)] * self.dim
        for k, c in terms.items():
            v[self.index(k)] += Fraction(c)
        return tuple(v)

    def to_functional(self, vec: Sequence) -> LinearEntropyFunctional:
        vec = qvec(vec)
        if len(vec) != self.dim:
            raise EntropyDomainError(f"expected {self.dim} coefficients, got {len(vec)}")
        return LinearEntropyFunctional(self.context, dict(zip(self.masks, vec)))

    def from_functional(self, f: LinearEntropyFunctional) -> tuple:
        if f.context != self.context:
            raise EntropyDomainError("functional lives on another context")
        pos = {m: i for i, m in enumerate(self.masks)}
        v = [Fraction(0)] * self.dim
        for m, c in f.coeffs.items():
            if m not in pos:
                raise EntropyDomainError(f"term H({self.context.label(m)}) outside this space")
            v[pos[m]] = c
        return tuple(v)

    def supports(self, f: LinearEntropyFunctional) -> bool:
        return f.context == self.context and set(f.coeffs) <= set(self.masks)

    def boundedness_rows(self) -> list[tuple]:
        """``sum_s alpha_{s,t} = 0`` for every nonempty block ``t``."""
        rows = []
        for t in self.blocks:
            if t:
                rows.append(tuple(Fraction(int(split_mask(self.n_aux, m)[1] == t)) for m in self.masks))
        return rows

    def embed(self, vec: Sequence, into: "AlphaSpace") -> tuple:
        """Zero-extend a vector to a larger space with the same ``n_aux``."""
        pos = {m: i for i, m in enumerate(into.masks)}
        out = [Fraction(0)] * into.dim
        for m, c in zip(self.masks, qvec(vec)):
            out[pos[m]] = c
        return tuple(out)

    def restrict(self, vec: Sequence, frm: "AlphaSpace") -> tuple:
        pos = {m: i for i, m in enumerate(frm.masks)}
        vec = qvec(vec)
        return tuple(vec[pos[m]] for m in self.masks)


ZERO_SPACE = AlphaSpace.block(0, 0)
V_SPACE = AlphaSpace.block(1, 1)
ONE_VAR_SPACE = AlphaSpace.full(1)


# --------------------------------------------------------------------------
# parsing


def _norm(text: str) -> str:
    return (
        text.replace("−", "-").replace("_", "").replace("{", "").replace("}", "")
        .replace("\\varnothing", "").replace("∅", "").replace(" ", "")
    )


def parse_functional(text: str, ctx: SystemContext) -> LinearEntropyFunctional:
    """Parse ``"-H(B|V)"``, ``"I(E1;E2|B1B2V) - I(E1;B2|B1V)"``, ``"2*H(B) + [H(E)-H(BE)]"``."""
    s = _norm(text)
    pos = 0

    def peek():
        return s[pos] if pos < len(s) else ""

    def systems(stop: str) -> str:
        nonlocal pos
        j = pos
        while j < len(s) and s[j] not in stop:
            j += 1
        label = s[pos:j]
        pos = j
        return label

    def mask_of(label):
        return ctx.mask(label) if label else 0

    def atom() -> LinearEntropyFunctional:
        nonlocal pos
        if s.startswith("H(", pos):
            pos += 2
            a = systems("|)")
            b = ""
            if peek() == "|":
                pos += 1
                b = systems(")")
            expect(")")
            am, bm = mask_of(a), mask_of(b)
            f = LinearEntropyFunctional(ctx, {am | bm: 1})
            if bm:
                f = f - LinearEntropyFunctional(ctx, {bm: 1})
            return f
        if s.startswith("I(", pos):
            pos += 2
            a = systems(";")
            expect(";")
            b = systems("|)")
            c = ""
            if peek() == "|":
                pos += 1
                c = systems(")")
            expect(")")
            am, bm, cm = mask_of(a), mask_of(b), mask_of(c)
            terms = {}
            for m, k in ((am | cm, 1), (bm | cm, 1), (am | bm | cm, -1), (cm, -1)):
                if m:
                    terms[m] = terms.get(m, 0) + k
            return LinearEntropyFunctional(ctx, terms)
        if peek() in "[(":
            close = "]" if peek() == "[" else ")"
            pos += 1
            f = expr()
            expect(close)
            return f
        raise EntropyDomainError(f"unexpected input at {s[pos:]!r} in {text!r}")

    def expect(ch):
        nonlocal pos
        if peek() != ch:
            raise EntropyDomainError(f"expected {ch!r} at {s[pos:]!r} in {text!r}")
        pos += 1

    def term() -> LinearEntropyFunctional:
        nonlocal pos
        m = re.match(r"\d+(?:/\d+)?", s[pos:])
        coef = Fraction(1)
        if m:
            coef = Fraction(m.group(0))
            pos += m.end()
            if peek() == "*":
                pos += 1
            if peek() not in ("H", "I", "[", "("):
                raise EntropyDomainError(f"bare constants are not entropy terms: {text!r}")
        return atom() * coef

    def expr() -> LinearEntropyFunctional:
        nonlocal pos
        sign = 1
        if peek() in "+-":
            sign = -1 if peek() == "-" else 1
            pos += 1
        f = term() * sign
        while peek() in ("+", "-") and peek():
            sign = -1 if peek() == "-" else 1
            pos += 1
            f = f + term() * sign
        return f

    if s in ("0", ""):
        return LinearEntropyFunctional.zero(ctx)
    out = expr()
    if pos != len(s):
        raise EntropyDomainError(f"trailing input {s[pos:]!r} in {text!r}")
    return out


# --------------------------------------------------------------------------
# printing


def format_functional(f: LinearEntropyFunctional) -> str:
    """Raw ``H(..)`` expansion with display labels."""
    if not f.coeffs:
        return "0"
    parts = []
    for m, c in f.coeffs.items():
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag}*"
        parts.append(("-" if c < 0 else "+") + f"{coef}H({display_label(f.context, m)})")
    s = "".join(parts)
    return s[1:] if s.startswith("+") else s


@lru_cache(maxsize=8)
def _cmi_index(ctx: SystemContext) -> tuple[dict, list]:
    """Every ``I(A;B|C)`` on ``ctx`` with ``A < B`` nonempty, ranked small-first."""
    items = []
    for assign in range(4 ** ctx.n):
        a = b = c = 0
        for i in range(ctx.n):
            k = (assign >> (2 * i)) & 3
            if k == 1:
                a |= 1 << i
            elif k == 2:
                b |= 1 << i
            elif k == 3:
                c |= 1 << i
        if a and b and a < b:
            items.append(((bin(a | b | c).count("1"), -bin(c).count("1"), a, b, c), (a, b, c)))
    items.sort()
    table, ranked = {}, []
    for rank_key, (a, b, c) in items:
        f = LinearEntropyFunctional.mutual_information(
            ctx, ctx.names_of(a), ctx.names_of(b), ctx.names_of(c))
        if f not in table:
            table[f] = len(ranked)
            ranked.append(((a, b, c), f))
    return table, ranked


def _cmi_text(ctx, abc) -> str:
    a, b, c = abc
    body = f"{display_label(ctx, a)};{display_label(ctx, b)}"
    return f"I({body}|{display_label(ctx, c)})" if c else f"I({body})"


def simplify_functional(f: LinearEntropyFunctional) -> str:
    """``0``, ``±I(..)`` or ``I(..) - I(..)`` when possible, else the raw expansion."""
    if not f.coeffs:
        return "0"
    table, ranked = _cmi_index(f.context)
    if f in table:
        return _cmi_text(f.context, ranked[table[f]][0])
    if -f in table:
        return "-" + _cmi_text(f.context, ranked[table[-f]][0])
    best = None
    for j, (abc, g) in enumerate(ranked):
        i = table.get(f + g)
        if i is not None and i != j:
            key = (i + j, i)
            if best is None or key < best[0]:
                best = (key, ranked[i][0], abc)
    if best is not None:
        return f"{_cmi_text(f.context, best[1])} - {_cmi_text(f.context, best[2])}"
    return format_functional(f)


def format_linear(vec: Sequence, labels: Sequence[str]) -> str:
    """``a_V + a_BV - 2*a_EV``."""
    parts = []
    for c, lab in zip(qvec(vec), labels):
        if not c:
            continue
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag}*"
        parts.append((" - " if c < 0 else " + ") + coef + lab)
    if not parts:
        return "0"
    s = "".join(parts)
    return s[3:] if s.startswith(" + ") else "-" + s[3:]


def format_inequality(vec: Sequence, labels: Sequence[str], relation: str = ">=") -> str:
    """Render ``vec . alpha >= 0`` (flipped to ``<=`` when every coefficient is negative)."""
    vec = qvec(vec)
    nz = [c for c in vec if c]
    if relation == ">=" and nz and all(c < 0 for c in nz):
        return f"{format_linear([-c for c in vec], labels)} <= 0"
    if relation == "=" and nz and nz[0] < 0:
        vec = tuple(-c for c in vec)
    return f"{format_linear(vec, labels)} {relation} 0"


PRIORITY_TEMPLATES = (
    "H(B)", "H(E)", "H(B|E)", "H(E|B)",
    "H(E|BV)", "-H(BE|V)", "-H(E|V)", "-H(B|V)", "H(B|EV)", "H(BE|V)",
    "H(EV)-H(BV)", "-H(E|BV)", "-H(B|EV)",
)


def _template_text(ctx, x, y, sign):
    body = f"H({display_label(ctx, x)}|{display_label(ctx, y)})" if y else f"H({display_label(ctx, x)})"
    return ("-" if sign < 0 else "") + body


@lru_cache(maxsize=None)
def templates(n_aux: int) -> tuple:
    """(text, functional) pairs in preference order."""
    ctx = formula_context(n_aux)
    out = []
    seen = set()

    def add(text, f):
        if f and f not in seen:
            seen.add(f)
            out.append((text, f))

    for text in PRIORITY_TEMPLATES:
        try:
            add(text, parse_functional(text, ctx))
        except EntropyDomainError:
            pass
    pairs = []
    full = ctx.full_mask
    for x in ctx.masks():
        y = 0
        rest = full & ~x
        sub = rest
        while True:
            pairs.append((x, sub))
            if sub == 0:
                break
            sub = (sub - 1) & rest
    pairs.sort(key=lambda p: (bin(p[0] | p[1]).count("1"), bin(p[1]).count("1"), p[0], p[1]))
    for sign in (1, -1):
        for x, y in pairs:
            f = LinearEntropyFunctional(ctx, {x | y: sign})
            if y:
                f = f - LinearEntropyFunctional(ctx, {y: sign})
            add(_template_text(ctx, x, y, sign), f)
    for x in ctx.masks():
        for y in ctx.masks():
            if x != y:
                add(f"H({display_label(ctx, x)})-H({display_label(ctx, y)})",
                    LinearEntropyFunctional(ctx, {x: 1, y: -1}))
    return tuple(out)


def solve_combination(target, cols):
    """Solve ``target = sum_i c_i cols[i]`` exactly; None if impossible."""
    if not cols:
        return [] if not any(target) else None
    n = len(cols)
    rows = [[col[i] for col in cols] + [target[i]] for i in range(len(target))]
    red, piv = rref(rows, n + 1)
    if n in piv:
        return None
    sol = [Fraction(0)] * n
    for row, p in zip(red, piv):
        sol[p] = row[n]
    for i in range(len(target)):
        if sum((col[i] * c for col, c in zip(cols, sol)), Fraction(0)) != target[i]:
            return None
    return sol


def describe_ray(vec: Sequence, space: AlphaSpace, lineality: Sequence[Sequence] = ()) -> str:
    """Template name for a ray, modulo the lineality space; raw expansion as fallback."""
    vec = qvec(vec)
    lin = [qvec(l) for l in lineality]
    for text, f in templates(space.n_aux):
        if not space.supports(f):
            continue
        t = space.from_functional(f)
        sol = solve_combination(t, [vec] + lin)
        if sol is not None and sol[0] > 0:
            return text
    return format_functional(space.to_functional(primitive(vec)))


def describe_lineality(vec: Sequence, space: AlphaSpace) -> str:
    vec = qvec(vec)
    for text, f in templates(space.n_aux):
        if not space.supports(f):
            continue
        t = space.from_functional(f)
        sol = solve_combination(t, [vec])
        if sol is not None and sol[0] != 0:
            break
    else:
        text = format_functional(space.to_functional(primitive(vec)))
    if text.startswith("-"):
        text = text[1:] if text.count("H(") == 1 else text
    return f"±[{text}]" if text.count("H(") > 1 else f"±{text}"


def ray_from_text(text: str, space: AlphaSpace) -> tuple:
    """Parse a ray description like ``"-H(B|V)"`` into ``space`` coordinates."""
    return space.from_functional(parse_functional(text, space.context))
