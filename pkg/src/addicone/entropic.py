"""Subset-indexed entropy bookkeeping.

Every collection of systems is a bitmask over an ordered
:class:`SystemContext` (bit ``i`` set means ``names[i]`` is included).
Entropies are in bits throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from ._kernels import subset_entropies

MAX_SYSTEMS = 16
EIG_ZERO = 1e-12
STATE_TOL = 1e-10
PROB_TOL = 1e-12

Number = Union[int, float, Fraction]


class EntropyDomainError(ValueError):
    """Raised for unknown masks, mismatched contexts or invalid inputs."""


class CapacityError(EntropyDomainError):
    """Raised when a context exceeds the supported number of systems."""


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


# --------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class SystemContext:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise EntropyDomainError(f"duplicate system names in {names}")
        if len(names) > MAX_SYSTEMS:
            raise CapacityError(f"at most {MAX_SYSTEMS} systems, got {len(names)}")
        if any(not n for n in names):
            raise EntropyDomainError("system names must be non-empty")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def masks(self) -> range:
        """All nonempty subset masks in increasing order."""
        return range(1, 1 << self.n)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise EntropyDomainError(f"unknown system {name!r}") from None

    def split(self, label: str) -> list[str]:
        """Tokenize a concatenated label like ``"B1E1V"`` into system names."""
        out = []
        pos = 0
        ordered = sorted(self.names, key=len, reverse=True)
        label = label.replace(" ", "")
        while pos < len(label):
            for name in ordered:
                if label.startswith(name, pos):
                    out.append(name)
                    pos += len(name)
                    break
            else:
                raise EntropyDomainError(f"cannot parse {label!r} over {self.names}")
        return out

    def mask(self, systems: Union[str, Iterable[str]]) -> int:
        if isinstance(systems, str):
            systems = self.split(systems)
        m = 0
        for s in systems:
            m |= 1 << self.index(s)
        return m

    def check_mask(self, mask: int) -> int:
        if not isinstance(mask, (int, np.integer)) or not 0 < mask <= self.full_mask:
            raise EntropyDomainError(f"mask {mask!r} outside context {self.names}")
        return int(mask)

    def names_of(self, mask: int) -> tuple[str, ...]:
        return tuple(n for i, n in enumerate(self.names) if (mask >> i) & 1)

    def label(self, mask: int) -> str:
        return "".join(self.names_of(mask)) if mask else "∅"

    def relabel_mask(self, mask: int, target: "SystemContext", mapping: Mapping[str, Sequence[str]]) -> int:
        """Image of ``mask`` under a map sending each system to a set of target systems."""
        out = 0
        for name in self.names_of(mask):
            for t in mapping[name]:
                out |= 1 << target.index(t)
        return out


# --------------------------------------------------------------------------
# entropy vectors and functionals


@dataclass(frozen=True)
class EntropyVector:
    """Joint entropies of all nonempty subsets, indexed by mask.

    ``values[0]`` is the (zero) entropy of the empty set.  Values are floats,
    or Fractions for exactly computed vectors.
    """

    context: SystemContext
    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        if len(vals) != 1 << self.context.n:
            raise EntropyDomainError("entropy vector length does not match context")
        if vals[0] != 0:
            raise EntropyDomainError("entropy of the empty set must be 0")
        if not all(math.isfinite(float(v)) for v in vals):
            raise EntropyDomainError("entropy values must be finite")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, mask: int):
        if mask == 0:
            return self.values[0]
        return self.values[self.context.check_mask(mask)]

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.values)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def get(self, systems: Union[str, Iterable[str]]):
        return self[self.context.mask(systems)]


@dataclass(frozen=True)
class LinearEntropyFunctional:
    """Exact rational combination ``sum_s coeffs[s] * H(s)``."""

    context: SystemContext
    coeffs: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for mask, c in dict(self.coeffs).items():
            mask = self.context.check_mask(mask)
            c = to_fraction(c)
            if c:
                clean[mask] = clean.get(mask, Fraction(0)) + c
        object.__setattr__(self, "coeffs", {m: c for m, c in sorted(clean.items()) if c})

    # construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, context):
        return cls(context, {})

    @classmethod
    def from_terms(cls, context, terms: Mapping[str, Number]):
        """Build from ``{"B1E1": 1, "E1": -1}``-style label mappings."""
        acc: dict[int, Fraction] = {}
        for label, c in terms.items():
            m = context.mask(label)
            acc[m] = acc.get(m, Fraction(0)) + to_fraction(c)
        return cls(context, acc)

    @classmethod
    def from_vector(cls, context, vec: Sequence):
        """Inverse of :meth:`vector` (entry ``i`` is the coefficient of mask ``i+1``)."""
        if len(vec) != context.full_mask:
            raise EntropyDomainError("vector length does not match context")
        return cls(context, {i + 1: c for i, c in enumerate(vec)})

    @classmethod
    def entropy(cls, context, a):
        return cls(context, {context.mask(a): 1})

    @classmethod
    def conditional_entropy(cls, context, a, b=""):
        """H(a|b)."""
        f = cls.entropy(context, _join(context, a, b))
        if _mask_or_zero(context, b):
            f = f - cls.entropy(context, b)
        return f

    @classmethod
    def mutual_information(cls, context, a, b, c=""):
        """I(a;b|c) = H(ac) + H(bc) - H(abc) - H(c)."""
        cm = _mask_or_zero(context, c)
        am, bm = context.mask(a), context.mask(b)
        terms = {am | cm: 1}
        terms[bm | cm] = terms.get(bm | cm, 0) + 1
        terms[am | bm | cm] = terms.get(am | bm | cm, 0) - 1
        if cm:
            terms[cm] = terms.get(cm, 0) - 1
        return cls(context, terms)

    # algebra --------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, LinearEntropyFunctional):
            return NotImplemented
        if other.context != self.context:
            raise EntropyDomainError("functional contexts differ")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        acc = dict(self.coeffs)
        for m, c in other.coeffs.items():
            acc[m] = acc.get(m, Fraction(0)) + c
        return LinearEntropyFunctional(self.context, acc)

    def __neg__(self):
        return LinearEntropyFunctional(self.context, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, k):
        k = to_fraction(k)
        return LinearEntropyFunctional(self.context, {m: k * c for m, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LinearEntropyFunctional):
            return NotImplemented
        return self.context == other.context and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.context, tuple(self.coeffs.items())))

    def __bool__(self):
        return bool(self.coeffs)

    def vector(self) -> list[Fraction]:
        v = [Fraction(0)] * self.context.full_mask
        for m, c in self.coeffs.items():
            v[m - 1] = c
        return v

    def float_vector(self) -> np.ndarray:
        v = np.zeros(1 << self.context.n)
        for m, c in self.coeffs.items():
            v[m] = float(c)
        return v

    def relabel(self, target: SystemContext, mapping: Mapping[str, Sequence[str]]):
        """Push forward along a system map (coefficients of colliding masks add)."""
        acc: dict[int, Fraction] = {}
        for m, c in self.coeffs.items():
            tm = self.context.relabel_mask(m, target, mapping)
            if tm:
                acc[tm] = acc.get(tm, Fraction(0)) + c
        return LinearEntropyFunctional(target, acc)

    def __repr__(self):
        return f"LinearEntropyFunctional({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for m, c in self.coeffs.items():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag}*"
            parts.append(f"{sign} {coef}H({self.context.label(m)})")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


def _mask_or_zero(context, systems):
    if systems in ("", None) or systems == ():
        return 0
    return context.mask(systems)


def _join(context, a, b):
    return context.names_of(context.mask(a) | _mask_or_zero(context, b))


def evaluate_functional(f: LinearEntropyFunctional, v: EntropyVector):
    """``sum_s f.coeffs[s] * v[s]``; exact when ``v`` is exact."""
    if f.context != v.context:
        raise EntropyDomainError("functional and entropy vector contexts differ")
    if v.exact:
        return sum((c * v.values[m] for m, c in f.coeffs.items()), Fraction(0))
    return float(sum(float(c) * float(v.values[m]) for m, c in f.coeffs.items()))


# --------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class ClassicalDistribution:
    """Finite joint distribution with named variables.

    ``atoms`` is a sorted tuple of ``(outcome, probability)`` pairs with
    strictly positive probabilities; probabilities may be Fractions.
    """

    names: tuple[str, ...]
    alphabets: tuple[int, ...]
    atoms: tuple

    def __post_init__(self):
        names = tuple(self.names)
        alphabets = tuple(int(a) for a in self.alphabets)
        if len(names) != len(alphabets):
            raise EntropyDomainError("one alphabet size per variable required")
        if any(a < 1 for a in alphabets):
            raise EntropyDomainError("alphabet sizes must be positive")
        acc: dict[tuple, object] = {}
        for outcome, p in self.atoms:
            outcome = tuple(int(x) for x in outcome)
            if len(outcome) != len(names):
                raise EntropyDomainError(f"outcome {outcome} has wrong arity")
            if any(not 0 <= x < a for x, a in zip(outcome, alphabets)):
                raise EntropyDomainError(f"outcome {outcome} outside alphabets {alphabets}")
            if isinstance(p, str):
                p = Fraction(p)
            if p < 0:
                raise EntropyDomainError("negative probability")
            if p:
                acc[outcome] = acc.get(outcome, 0) + p
        total = sum(acc.values())
        exact = all(isinstance(p, (int, Fraction)) for p in acc.values())
        if exact and total != 1:
            raise EntropyDomainError(f"probabilities sum to {total}, not 1")
        if not exact and abs(float(total) - 1.0) > PROB_TOL:
            raise EntropyDomainError(f"probabilities sum to {float(total)}, not 1")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "alphabets", alphabets)
        object.__setattr__(self, "atoms", tuple(sorted(acc.items())))
        SystemContext(names)

    @classmethod
    def from_pmf(cls, variables: Mapping[str, int], pmf: Mapping[tuple, Number]):
        return cls(tuple(variables), tuple(variables.values()), tuple(pmf.items()))

    @classmethod
    def from_array(cls, names, probs: np.ndarray):
        """Dense float array with one axis per variable."""
        probs = np.asarray(probs, dtype=float)
        atoms = tuple((idx, float(p)) for idx, p in np.ndenumerate(probs) if p > 0)
        return cls(tuple(names), probs.shape, atoms)

    @property
    def context(self) -> SystemContext:
        return SystemContext(self.names)

    @property
    def pmf(self) -> dict:
        return dict(self.atoms)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, (int, Fraction)) for _, p in self.atoms)

    @cached_property
    def _arrays(self):
        outcomes = np.array([o for o, _ in self.atoms], dtype=np.int64).reshape(-1, len(self.names))
        probs = np.array([float(p) for _, p in self.atoms])
        return outcomes, probs

    def marginal(self, names: Sequence[str]) -> "ClassicalDistribution":
        idx = [self.names.index(n) for n in names]
        acc: dict[tuple, object] = {}
        for o, p in self.atoms:
            key = tuple(o[i] for i in idx)
            acc[key] = acc.get(key, 0) + p
        return ClassicalDistribution(tuple(names), tuple(self.alphabets[i] for i in idx), tuple(acc.items()))

    def relabel(self, mapping: Mapping[str, str]) -> "ClassicalDistribution":
        return ClassicalDistribution(tuple(mapping.get(n, n) for n in self.names), self.alphabets, self.atoms)

    def reorder(self, names: Sequence[str]) -> "ClassicalDistribution":
        if sorted(names) != sorted(self.names):
            raise EntropyDomainError("reorder needs a permutation of the variables")
        return self.marginal(names)

    def to_json(self) -> dict:
        return {
            "variables": [{"name": n, "alphabet": a} for n, a in zip(self.names, self.alphabets)],
            "pmf": [{"outcome": list(o), "p": str(p) if isinstance(p, (int, Fraction)) else repr(float(p))}
                    for o, p in self.atoms],
        }

    @classmethod
    def from_json(cls, data: Union[str, Mapping]):
        if isinstance(data, str):
            data = json.loads(data)
        names = tuple(v["name"] for v in data["variables"])
        alphabets = tuple(int(v["alphabet"]) for v in data["variables"])
        atoms = []
        for atom in data["pmf"]:
            p = atom["p"]
            p = Fraction(p) if isinstance(p, str) and "." not in p and "e" not in p.lower() else float(p)
            atoms.append((tuple(atom["outcome"]), p))
        return cls(names, alphabets, tuple(atoms))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        m = np.array(self.matrix, dtype=complex)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)
        D = int(np.prod(dims)) if dims else 1
        if m.shape != (D, D):
            raise EntropyDomainError(f"matrix shape {m.shape} does not match dims {dims}")
        if np.linalg.norm(m - m.conj().T) > STATE_TOL:
            raise EntropyDomainError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > STATE_TOL:
            raise EntropyDomainError("density matrix does not have unit trace")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -STATE_TOL:
            raise EntropyDomainError("density matrix is not positive semidefinite")

    @classmethod
    def from_pure(cls, dims, psi):
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(tuple(dims), np.outer(psi, psi.conj()))

    def reduced(self, keep: Sequence[int]) -> np.ndarray:
        """Partial trace onto the systems listed in ``keep`` (in context order)."""
        return partial_trace(self.matrix, self.dims, keep)

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}

    @classmethod
    def from_json(cls, data: Union[str, Mapping]):
        if isinstance(data, str):
            data = json.loads(data)
        m = np.array(data["re"], dtype=float) + 1j * np.array(data.get("im", np.zeros_like(data["re"])), dtype=float)
        return cls(tuple(data["dims"]), m)


def partial_trace(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    keep = sorted(keep)
    n = len(dims)
    drop = [i for i in range(n) if i not in keep]
    t = matrix.reshape(tuple(dims) * 2)
    perm = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    dd = int(np.prod([dims[i] for i in drop])) if drop else 1
    t = t.transpose(perm).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def _spectral_entropy(m: np.ndarray) -> float:
    lam = np.linalg.eigvalsh((m + m.conj().T) / 2)
    lam = lam[lam > EIG_ZERO]
    return float(-np.dot(lam, np.log2(lam)))


# --------------------------------------------------------------------------
# entropies


def shannon_entropy(dist: ClassicalDistribution, subset: int) -> float:
    mask = dist.context.check_mask(subset)
    keep = [n for i, n in enumerate(dist.names) if (mask >> i) & 1]
    marg = dist.marginal(keep)
    p = np.array([float(q) for _, q in marg.atoms])
    return float(-np.dot(p, np.log2(p)))


def von_neumann_entropy(rho: DensityMatrix, subset: int) -> float:
    mask = SystemContext(tuple(f"S{i}" for i in range(len(rho.dims)))).check_mask(subset)
    keep = [i for i in range(len(rho.dims)) if (mask >> i) & 1]
    return _spectral_entropy(rho.reduced(keep))


def entropy_vector(source, names: Sequence[str] = None) -> EntropyVector:
    """All 2^n - 1 marginal entropies of a distribution or density matrix.

    Density matrices carry no system names; pass ``names`` (defaults to
    ``S0, S1, ...``).
    """
    if isinstance(source, ClassicalDistribution):
        ctx = SystemContext(tuple(names) if names else source.names)
        if ctx.n != len(source.names):
            raise EntropyDomainError("names do not match the distribution")
        outcomes, probs = source._arrays
        vals = subset_entropies(outcomes, probs, np.array(source.alphabets, dtype=np.int64))
        return EntropyVector(ctx, tuple(float(v) for v in vals))
    if isinstance(source, DensityMatrix):
        n = len(source.dims)
        if n > MAX_SYSTEMS:
            raise CapacityError(f"at most {MAX_SYSTEMS} systems")
        ctx = SystemContext(tuple(names) if names else tuple(f"S{i}" for i in range(n)))
        if ctx.n != n:
            raise EntropyDomainError("names do not match the state")
        vals = [0.0]
        for mask in range(1, 1 << n):
            keep = [i for i in range(n) if (mask >> i) & 1]
            vals.append(_spectral_entropy(source.reduced(keep)))
        return EntropyVector(ctx, tuple(vals))
    raise EntropyDomainError(f"unsupported entropy source {type(source).__name__}")


def _exact_log2(support: int, probs) -> Fraction:
    if len(set(probs)) != 1 or support & (support - 1):
        raise EntropyDomainError("marginal is not uniform on a power-of-two support")
    return Fraction(support.bit_length() - 1)


def exact_entropy_vector(dist: ClassicalDistribution) -> EntropyVector:
    """Entropy vector with exact rational values.

    Only defined when every marginal is uniform on a support whose size is a
    power of two (true for all XOR constructions on uniform bits).
    """
    if not dist.is_exact:
        raise EntropyDomainError("exact entropies need rational probabilities")
    n = len(dist.names)
    vals = [Fraction(0)]
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if (mask >> i) & 1]
        acc: dict[tuple, Fraction] = {}
        for o, p in dist.atoms:
            key = tuple(o[i] for i in idx)
            acc[key] = acc.get(key, 0) + p
        vals.append(_exact_log2(len(acc), acc.values()))
    return EntropyVector(dist.context, tuple(vals))


def embed_classical(dist: ClassicalDistribution) -> DensityMatrix:
    """Diagonal density matrix with the distribution on its diagonal."""
    dims = dist.alphabets
    diag = np.zeros(int(np.prod(dims)))
    for o, p in dist.atoms:
        diag[np.ravel_multi_index(o, dims)] += float(p)
    return DensityMatrix(dims, np.diag(diag).astype(complex))
