"""Basic quantum and elemental classical entropy inequalities."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .entropic import EntropyDomainError, LinearEntropyFunctional, SystemContext

MAX_ARITY = 8

KINDS = (
    "NonNegativity",
    "SSA",
    "WeakMonotonicity",
    "Subadditivity",
    "ArakiLieb",
    "ClassicalConditional",
    "ClassicalCMI",
)


def _lhs(ctx: SystemContext, kind: str, parts: tuple[int, ...]) -> LinearEntropyFunctional:
    terms: dict[int, int] = {}

    def add(mask, c):
        if mask:
            terms[mask] = terms.get(mask, 0) + c

    if kind == "NonNegativity":
        (a,) = parts
        add(a, 1)
    elif kind in ("SSA", "ClassicalCMI"):
        a, b, c = parts
        add(a | c, 1)
        add(b | c, 1)
        add(a | b | c, -1)
        add(c, -1)
    elif kind == "WeakMonotonicity":
        a, b, c = parts  # H(C|A) + H(C|B)
        add(a | c, 1)
        add(a, -1)
        add(b | c, 1)
        add(b, -1)
    elif kind == "Subadditivity":
        a, b = parts
        add(a, 1)
        add(b, 1)
        add(a | b, -1)
    elif kind == "ArakiLieb":
        a, b = parts  # H(AB) + H(A) - H(B)
        add(a | b, 1)
        add(a, 1)
        add(b, -1)
    elif kind == "ClassicalConditional":
        a, rest = parts  # H(A | rest)
        add(a | rest, 1)
        add(rest, -1)
    else:
        raise EntropyDomainError(f"unknown inequality kind {kind!r}")
    return LinearEntropyFunctional(ctx, terms)


@dataclass(frozen=True)
class InequalityInstance:
    """``functional >= 0`` valid for the stated kind of entropy vectors."""

    functional: LinearEntropyFunctional
    kind: str
    parts: tuple

    def __post_init__(self):
        masks = [p for p in self.parts if p]
        for i, x in enumerate(masks):
            for y in masks[i + 1:]:
                if x & y:
                    raise EntropyDomainError(f"parts {self.parts} are not disjoint")
        if _lhs(self.functional.context, self.kind, self.parts) != self.functional:
            raise EntropyDomainError("functional does not match kind and parts")

    @classmethod
    def build(cls, ctx: SystemContext, kind: str, parts: Sequence[int]):
        parts = tuple(int(p) for p in parts)
        return cls(_lhs(ctx, kind, parts), kind, parts)

    def describe(self) -> str:
        ctx = self.functional.context
        lab = [ctx.label(p) if p else "" for p in self.parts]
        if self.kind == "NonNegativity":
            return f"H({lab[0]})"
        if self.kind in ("SSA", "ClassicalCMI"):
            return f"I({lab[0]};{lab[1]}|{lab[2]})" if lab[2] else f"I({lab[0]};{lab[1]})"
        if self.kind == "WeakMonotonicity":
            return f"H({lab[2]}|{lab[0]})+H({lab[2]}|{lab[1]})"
        if self.kind == "Subadditivity":
            return f"I({lab[0]};{lab[1]})"
        if self.kind == "ArakiLieb":
            return f"H({lab[0]}{lab[1]})+H({lab[0]})-H({lab[1]})"
        return f"H({lab[0]}|{lab[1]})" if lab[1] else f"H({lab[0]})"


def _submasks(mask: int):
    """All submasks of ``mask`` in increasing order, including 0."""
    out = []
    s = mask
    while True:
        out.append(s)
        if s == 0:
            break
        s = (s - 1) & mask
    return sorted(out)


def _check_arity(ctx: SystemContext):
    if ctx.n > MAX_ARITY:
        raise EntropyDomainError(f"inequality generation capped at arity {MAX_ARITY}")


@lru_cache(maxsize=64)
def _quantum(ctx: SystemContext) -> tuple:
    full = ctx.full_mask
    out = []
    for a in ctx.masks():
        out.append(InequalityInstance.build(ctx, "NonNegativity", (a,)))
    for a in ctx.masks():
        for b in _submasks(full & ~a):
            if b <= a:
                continue
            for c in _submasks(full & ~(a | b)):
                out.append(InequalityInstance.build(ctx, "SSA", (a, b, c)))
    for a in ctx.masks():
        for b in _submasks(full & ~a):
            if b <= a:
                continue
            for c in _submasks(full & ~(a | b)):
                if c:
                    out.append(InequalityInstance.build(ctx, "WeakMonotonicity", (a, b, c)))
    for a in ctx.masks():
        for b in _submasks(full & ~a):
            if b > a:
                out.append(InequalityInstance.build(ctx, "Subadditivity", (a, b)))
    for a in ctx.masks():
        for b in _submasks(full & ~a):
            if b:
                out.append(InequalityInstance.build(ctx, "ArakiLieb", (a, b)))
    return tuple(out)


def quantum_basic_set(ctx: SystemContext) -> list[InequalityInstance]:
    """Nonnegativity, SSA, weak monotonicity, subadditivity and Araki-Lieb instances.

    Pairs are deduplicated under the A<->B symmetry; SSA includes C = empty,
    which repeats subadditivity (redundancy is harmless for the LP).
    """
    _check_arity(ctx)
    return list(_quantum(ctx))


@lru_cache(maxsize=64)
def _classical(ctx: SystemContext) -> tuple:
    full = ctx.full_mask
    out = []
    for i in range(ctx.n):
        out.append(InequalityInstance.build(ctx, "ClassicalConditional", (1 << i, full & ~(1 << i))))
    for i in range(ctx.n):
        for j in range(i + 1, ctx.n):
            rest = full & ~((1 << i) | (1 << j))
            for k in _submasks(rest):
                out.append(InequalityInstance.build(ctx, "ClassicalCMI", (1 << i, 1 << j, k)))
    return tuple(out)


def classical_elemental_set(ctx: SystemContext) -> list[InequalityInstance]:
    """Elemental Shannon inequalities: ``H(X_i|rest)`` and ``I(X_i;X_j|K)``."""
    _check_arity(ctx)
    return list(_classical(ctx))


def as_generators(instances: Sequence[InequalityInstance]) -> list[dict]:
    """Sparse LP columns over the ``mask - 1`` coordinates of the context."""
    return [{m - 1: c for m, c in inst.functional.coeffs.items()} for inst in instances]
