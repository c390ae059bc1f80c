"""Numeric laboratory: channels, sampled states and entropic maximization.

Everything here is floating point.  Maximizations are multi-restart
projected ascent with central-difference gradients, so values are lower
bounds on the true optimum; degradability checks report "no violation
found" rather than a proof.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .entropic import (
    EIG_ZERO,
    ClassicalDistribution,
    DensityMatrix,
    LinearEntropyFunctional,
    SystemContext,
    entropy_vector,
    evaluate_functional,
)
from .formulas import ONE_VAR_SPACE, ZERO_SPACE, AlphaSpace, composite_context, formula_context, parse_functional

ISOMETRY_TOL = 1e-10
MAX_STATE_DIM = 64
MAX_AUX_DIM = 8
MAX_JOINT_DIM = 36
DEGRADABILITY_TOL = 1e-6
CQ_COND_TOL = 1e-7
CQ_DIST_TOL = 1e-6


class NumlabError(ValueError):
    pass


def thread_count() -> int:
    """Worker cap from ``ADDICONE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("ADDICONE_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# channels


@dataclass(frozen=True)
class IsometryChannel:
    """Stinespring isometry ``U: A -> B (x) E`` (row index ``b * d_E + e``)."""

    d_in: int
    d_B: int
    d_E: int
    U: np.ndarray = field(repr=False)
    name: str = "channel"

    def __post_init__(self):
        U = np.asarray(self.U, dtype=complex)
        object.__setattr__(self, "U", U)
        if U.shape != (self.d_B * self.d_E, self.d_in):
            raise NumlabError(f"isometry shape {U.shape} does not match dims")
        if np.linalg.norm(U.conj().T @ U - np.eye(self.d_in)) > ISOMETRY_TOL:
            raise NumlabError("U is not an isometry")

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray], name: str = "channel") -> "IsometryChannel":
        """Dilation ``U = sum_k K_k (x) |k>_E``."""
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        d_B, d_in = ks[0].shape
        d_E = len(ks)
        U = np.zeros((d_B * d_E, d_in), dtype=complex)
        for k, K in enumerate(ks):
            U[k::d_E, :] = K
        return cls(d_in, d_B, d_E, U, name)

    def kraus(self) -> list[np.ndarray]:
        return [self.U[k::self.d_E, :] for k in range(self.d_E)]

    def complementary(self) -> "IsometryChannel":
        """Same isometry with the roles of B and E exchanged."""
        V = self.U.reshape(self.d_B, self.d_E, self.d_in).transpose(1, 0, 2).reshape(-1, self.d_in)
        return IsometryChannel(self.d_in, self.d_E, self.d_B, V, f"{self.name}^c")

    def tensor(self, other: "IsometryChannel") -> "IsometryChannel":
        """Product channel with ``B = B1B2`` and ``E = E1E2``."""
        t = np.einsum(
            "xya,uvb->xuyvab",
            self.U.reshape(self.d_B, self.d_E, self.d_in),
            other.U.reshape(other.d_B, other.d_E, other.d_in),
        )
        U = t.reshape(self.d_B * other.d_B * self.d_E * other.d_E, self.d_in * other.d_in)
        return IsometryChannel(self.d_in * other.d_in, self.d_B * other.d_B, self.d_E * other.d_E, U,
                               f"{self.name}x{other.name}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "d_in": self.d_in,
            "d_B": self.d_B,
            "d_E": self.d_E,
            "isometry_re": self.U.real.tolist(),
            "isometry_im": self.U.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: Union[str, Mapping]) -> "IsometryChannel":
        if isinstance(data, str):
            data = json.loads(data)
        name = data.get("name", "channel")
        if "kraus" in data:
            ks = []
            for k in data["kraus"]:
                if isinstance(k, Mapping):
                    re = np.array(k["re"], dtype=float)
                    ks.append(re + 1j * np.array(k.get("im", np.zeros_like(re)), dtype=float))
                else:
                    ks.append(np.array(k, dtype=complex))
            return cls.from_kraus(ks, name)
        re = np.array(data["isometry_re"], dtype=float)
        im = np.array(data.get("isometry_im", np.zeros_like(re)), dtype=float)
        return cls(int(data["d_in"]), int(data["d_B"]), int(data["d_E"]), re + 1j * im, name)


def identity_channel(d: int = 2) -> IsometryChannel:
    return IsometryChannel(d, d, 1, np.eye(d), "identity")


def swap_to_environment(d: int = 2) -> IsometryChannel:
    """Everything goes to E; B is trivial."""
    return IsometryChannel(d, 1, d, np.eye(d), "swap")


def dephasing_copy(d: int = 2) -> IsometryChannel:
    """``|x> -> |x>_B |x>_E`` (completely dephasing, symmetric in B and E)."""
    U = np.zeros((d * d, d))
    for x in range(d):
        U[x * d + x, x] = 1
    return IsometryChannel(d, d, d, U, "dephasing")


def erasure_channel(p: float, d: int = 2) -> IsometryChannel:
    """Erasure with probability ``p``; the flag state is the extra level ``d``."""
    D = d + 1
    U = np.zeros((D * D, d))
    for x in range(d):
        U[x * D + d, x] = np.sqrt(1 - p)  # B gets x, E gets the flag
        U[d * D + x, x] = np.sqrt(p)  # B gets the flag, E gets x
    return IsometryChannel(d, D, D, U, f"erasure({p:g})")


def amplitude_damping(gamma: float) -> IsometryChannel:
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return IsometryChannel.from_kraus([k0, k1], f"amplitude_damping({gamma:g})")


LIBRARY = {
    "identity": identity_channel,
    "swap": swap_to_environment,
    "dephasing": dephasing_copy,
    "erasure": lambda: erasure_channel(0.5),
}


def random_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# --------------------------------------------------------------------------
# states


def sample_state(dims: Sequence[int], seed: int, pure: bool = False) -> DensityMatrix:
    """Random density matrix (Ginibre) or Haar pure state on ``dims``."""
    dims = tuple(int(d) for d in dims)
    D = int(np.prod(dims))
    if D > MAX_STATE_DIM:
        raise NumlabError(f"total dimension {D} exceeds {MAX_STATE_DIM}")
    rng = np.random.default_rng(seed)
    if pure:
        psi = rng.normal(size=D) + 1j * rng.normal(size=D)
        return DensityMatrix.from_pure(dims, psi)
    g = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    rho = g @ g.conj().T
    return DensityMatrix(dims, rho / np.trace(rho).real)


def _entropy_of_cut(psi: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> float:
    """Entropy of the marginal on ``keep`` of the pure state ``psi`` (Schmidt values)."""
    n = len(dims)
    drop = [i for i in range(n) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    t = psi.reshape(dims).transpose(list(keep) + drop).reshape(dk, -1)
    s = np.linalg.svd(t, compute_uv=False) ** 2
    s = s[s > EIG_ZERO]
    return float(-np.dot(s, np.log2(s)))


def _evaluate_pure(f: LinearEntropyFunctional, psi: np.ndarray, dims: Sequence[int]) -> float:
    """``f`` on the first ``f.context.n`` systems of the pure state ``psi`` (rest traced)."""
    n = f.context.n
    total = 0.0
    for m, c in f.coeffs.items():
        keep = [i for i in range(n) if (m >> i) & 1]
        total += float(c) * _entropy_of_cut(psi, dims, keep)
    return total


# --------------------------------------------------------------------------
# formulas


def as_formula(alpha, n_aux: Optional[int] = None) -> LinearEntropyFunctional:
    """Accept a functional, a formula string or a 3/7-coordinate alpha vector."""
    if isinstance(alpha, LinearEntropyFunctional):
        return alpha
    if isinstance(alpha, str):
        if n_aux is None:
            n_aux = 1 if "V" in alpha else 0
        return parse_functional(alpha, formula_context(n_aux))
    vec = list(alpha)
    if len(vec) == ZERO_SPACE.dim:
        return ZERO_SPACE.to_functional(vec)
    if len(vec) == ONE_VAR_SPACE.dim:
        return ONE_VAR_SPACE.to_functional(vec)
    raise NumlabError(f"cannot interpret alpha of length {len(vec)}")


def _uses_aux(f: LinearEntropyFunctional) -> bool:
    n_aux = f.context.n - 2
    return any(m & ((1 << n_aux) - 1) for m in f.coeffs)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 4
    iterations: int = 150
    step: float = 0.3
    decay: float = 0.5
    seed: int = 0
    tolerance: float = 1e-10
    fd_step: float = 1e-4
    aux_dim: Optional[int] = None  # default d_A^2 when the formula uses V
    purification_dim: Optional[int] = None  # default |V| d_A (full rank inputs)

    def __post_init__(self):
        for name in ("restarts", "iterations", "step", "tolerance", "fd_step"):
            if getattr(self, name) <= 0:
                raise NumlabError(f"{name} must be positive")
        if not 0 < self.decay < 1:
            raise NumlabError("decay must lie in (0, 1)")


@dataclass
class MaximizeResult:
    value: float
    psi: np.ndarray  # input purification on V_1..V_n A R
    input_dims: tuple
    converged: bool
    evaluations: int
    restart_values: list

    def input_state(self) -> DensityMatrix:
        """The optimal ``phi_{V A}`` (purifying register traced out)."""
        n = len(self.input_dims) - 1
        rho = DensityMatrix.from_pure(self.input_dims, self.psi)
        return DensityMatrix(self.input_dims[:n], rho.reduced(list(range(n))))


def _output(psi: np.ndarray, channel: IsometryChannel, in_dims: Sequence[int]) -> tuple[np.ndarray, tuple]:
    """Apply ``U`` to the A register; returns the state on ``V.. B E R`` and its dims."""
    *vdims, dA, dR = in_dims
    dv = int(np.prod(vdims)) if vdims else 1
    t = psi.reshape(dv, dA, dR)
    out = np.einsum("ka,var->vkr", channel.U, t)
    dims = tuple(vdims) + (channel.d_B, channel.d_E, dR)
    return out.reshape(-1), dims


def evaluate_formula(alpha, channel: IsometryChannel, psi: np.ndarray, in_dims: Sequence[int]) -> float:
    """``f_alpha`` on the channel output of the purified input ``psi``."""
    f = as_formula(alpha)
    out, dims = _output(np.asarray(psi, dtype=complex), channel, in_dims)
    return _evaluate_pure(f, out, dims)


def _ascent(objective, dim: int, rng: np.random.Generator, cfg: OptimizerConfig):
    """Projected gradient ascent on the unit sphere of ``C^dim`` (as ``R^{2 dim}``)."""

    def to_psi(theta):
        z = theta[:dim] + 1j * theta[dim:]
        return z / np.linalg.norm(z)

    theta = rng.normal(size=2 * dim)
    theta /= np.linalg.norm(theta)
    val = objective(to_psi(theta))
    evals = 1
    step = cfg.step
    converged = False
    h = cfg.fd_step
    for _ in range(cfg.iterations):
        grad = np.empty_like(theta)
        for i in range(theta.size):
            e = theta.copy()
            e[i] += h
            fp = objective(to_psi(e))
            e[i] -= 2 * h
            fm = objective(to_psi(e))
            grad[i] = (fp - fm) / (2 * h)
        evals += 2 * theta.size
        grad -= np.dot(grad, theta) * theta  # tangent to the sphere
        gnorm = np.linalg.norm(grad)
        if gnorm < 1e-7:
            converged = True
            break
        improved = False
        while step > 1e-9:
            cand = theta + step * grad / gnorm
            cand /= np.linalg.norm(cand)
            cv = objective(to_psi(cand))
            evals += 1
            if cv > val:
                improved = cv - val
                theta, val = cand, cv
                step = min(step * 1.5, cfg.step)
                break
            step *= cfg.decay
        if not improved or improved < cfg.tolerance:
            converged = True
            break
    return val, to_psi(theta), converged, evals


def maximize_formula(alpha, channel: IsometryChannel, aux_dims: Optional[Sequence[int]] = None,
                     cfg: OptimizerConfig = OptimizerConfig()) -> MaximizeResult:
    """Lower bound on ``max_phi f_alpha(U phi U^dag)`` over mixed inputs ``phi_{V A}``.

    Inputs are parametrized by a purification on ``V_1..V_n A R``.
    """
    f = as_formula(alpha)
    n_aux = f.context.n - 2
    if aux_dims is None:
        if _uses_aux(f):
            dv = cfg.aux_dim or channel.d_in ** 2
        else:
            dv = 1
        aux_dims = (dv,) * n_aux
    aux_dims = tuple(int(d) for d in aux_dims)
    if len(aux_dims) != n_aux:
        raise NumlabError(f"formula has {n_aux} auxiliary systems, got dims {aux_dims}")
    if int(np.prod(aux_dims)) > MAX_AUX_DIM:
        raise NumlabError(f"auxiliary dimension exceeds {MAX_AUX_DIM}")
    dv = int(np.prod(aux_dims)) if aux_dims else 1
    dR = cfg.purification_dim or dv * channel.d_in
    in_dims = aux_dims + (channel.d_in, dR)
    dim = int(np.prod(in_dims))

    def objective(psi):
        out, dims = _output(psi, channel, in_dims)
        return _evaluate_pure(f, out, dims)

    def run(k):
        rng = np.random.default_rng([cfg.seed, k])
        return _ascent(objective, dim, rng, cfg)

    workers = min(thread_count(), cfg.restarts)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            runs = list(ex.map(run, range(cfg.restarts)))
    else:
        runs = [run(k) for k in range(cfg.restarts)]
    best = max(range(len(runs)), key=lambda k: runs[k][0])
    val, psi, conv, _ = runs[best]
    return MaximizeResult(float(val), psi, in_dims, bool(conv), sum(r[3] for r in runs), [float(r[0]) for r in runs])


def coherent_information(channel: IsometryChannel, cfg: OptimizerConfig = OptimizerConfig()) -> MaximizeResult:
    return maximize_formula("H(B)-H(E)", channel, cfg=cfg)


def completely_coherent_information(channel: IsometryChannel, cfg: OptimizerConfig = OptimizerConfig()) -> MaximizeResult:
    return maximize_formula("H(VB)-H(VE)", channel, cfg=cfg)


# --------------------------------------------------------------------------
# Delta on sampled states


@dataclass(frozen=True)
class DeltaCheck:
    minimum: float
    argmin: int
    evaluated: int
    mode: str

    def __float__(self):
        return self.minimum

    def passed(self, tol: float = 1e-8) -> bool:
        return self.minimum >= -tol


def _random_pmf(alphabets: Sequence[int], rng: np.random.Generator, sparse: bool) -> np.ndarray:
    p = rng.dirichlet(np.full(int(np.prod(alphabets)), 0.3 if sparse else 1.0))
    return p.reshape(alphabets)


def _quantum_sample(n_aux: int, dims: dict, rng: np.random.Generator) -> tuple[np.ndarray, tuple]:
    """Pure state on ``V.. B1 E1 B2 E2 R`` from a random ``phi_{V A1 A2 R}`` and two random isometries."""
    dv, da, db, de, dr = dims["V"], dims["A"], dims["B"], dims["E"], dims["R"]
    vd = (dv,) * n_aux
    D = int(np.prod(vd)) * da * da * dr
    psi = rng.normal(size=D) + 1j * rng.normal(size=D)
    psi /= np.linalg.norm(psi)
    U1 = random_isometry(da, db * de, rng).reshape(db, de, da)
    U2 = random_isometry(da, db * de, rng).reshape(db, de, da)
    t = psi.reshape(int(np.prod(vd)), da, da, dr)
    out = np.einsum("xya,uvb,kabr->kxyuvr", U1, U2, t)
    return out.reshape(-1), vd + (db, de, db, de, dr)


def numeric_delta_check(alpha, code, samples: int = 50, dims: Optional[dict] = None, seed: int = 0,
                        mode: str = "classical") -> DeltaCheck:
    """Minimum of ``Delta(alpha)`` over sampled joint distributions or channel outputs.

    ``alpha`` is a vector over the full alpha space of ``code.n_aux``
    variables or a formula over ``[V.., B, E]``.
    """
    from .decouplings import delta_functional

    n = code.n_aux
    space = AlphaSpace.full(n)
    if isinstance(alpha, LinearEntropyFunctional):
        f = alpha
    elif isinstance(alpha, str):
        f = parse_functional(alpha, formula_context(n))
    else:
        f = space.to_functional(list(alpha))
    delta = delta_functional(f, code)
    names = composite_context(n).names
    d = {"V": 2, "A": 2, "B": 2, "E": 2, "R": 2}
    d.update(dims or {})
    if d["V"] ** n > 4 and mode == "quantum":
        raise NumlabError("|V| is capped at 4 for quantum sampling")
    rng = np.random.default_rng(seed)
    if not delta.coeffs:
        return DeltaCheck(0.0, 0, samples, mode)
    vals = []
    for k in range(samples):
        if mode == "classical":
            alph = tuple(d["V"] if i < n else d["B"] if nm[0] == "B" else d["E"] for i, nm in enumerate(names))
            p = ClassicalDistribution.from_array(names, _random_pmf(alph, rng, sparse=k % 2 == 1))
            vals.append(evaluate_functional(delta, entropy_vector(p)))
        elif mode == "quantum":
            psi, sd = _quantum_sample(n, d, rng)
            vals.append(_evaluate_pure(delta, psi, sd))
        else:
            raise NumlabError(f"unknown mode {mode!r}")
    i = int(np.argmin(vals))
    return DeltaCheck(float(vals[i]), i, samples, mode)


# --------------------------------------------------------------------------
# channel predicates


@dataclass
class DegradabilityReport:
    verdict: str  # "violated" or "no violation found"
    margin: float  # min over searched inputs of I(V;B) - I(V;E)
    witness: Optional[DensityMatrix]
    channel: str

    def to_json(self) -> dict:
        return {
            "channel": self.channel,
            "verdict": self.verdict,
            "margin": self.margin,
            "witness": self.witness.to_json() if self.witness is not None else None,
        }


def informational_degradability_check(channel: IsometryChannel, samples: int = 20,
                                      cfg: OptimizerConfig = OptimizerConfig()) -> DegradabilityReport:
    """Search for ``phi_{VA}`` with ``I(V;B) < I(V;E)``.

    Random inputs are screened first, then the objective is minimized by
    the same ascent used for formula maximization.
    """
    if max(channel.d_in, channel.d_B, channel.d_E) > 8:
        raise NumlabError("dimensions above 8 are not supported")
    gap = "-H(B)+H(VB)+H(E)-H(VE)"  # -(I(V;B) - I(V;E))
    f = parse_functional(gap, formula_context(1))
    dv = cfg.aux_dim or channel.d_in ** 2
    dv = min(dv, MAX_AUX_DIM)
    dR = cfg.purification_dim or dv * channel.d_in
    in_dims = (dv, channel.d_in, dR)
    rng = np.random.default_rng([cfg.seed, 7919])
    best_val, best_psi = -np.inf, None
    D = int(np.prod(in_dims))
    for _ in range(samples):
        psi = rng.normal(size=D) + 1j * rng.normal(size=D)
        psi /= np.linalg.norm(psi)
        v = evaluate_formula(f, channel, psi, in_dims)
        if v > best_val:
            best_val, best_psi = v, psi
    res = maximize_formula(f, channel, (dv,), replace(cfg, aux_dim=dv, purification_dim=dR))
    if res.value > best_val:
        best_val, best_psi = res.value, res.psi
    margin = -float(best_val)
    witness = None
    verdict = "no violation found"
    if margin < -DEGRADABILITY_TOL:
        verdict = "violated"
        rho = DensityMatrix.from_pure(in_dims, best_psi)
        witness = DensityMatrix(in_dims[:2], rho.reduced([0, 1]))
    return DegradabilityReport(verdict, margin, witness, channel.name)


def mutual_information_gap(channel: IsometryChannel, phi: DensityMatrix) -> float:
    """``I(V;B) - I(V;E)`` for an explicit input ``phi_{VA}``."""
    rho = _apply_to_density(channel, phi)
    v = entropy_vector(rho, ("V", "B", "E"))
    f = parse_functional("I(V;B)-I(V;E)", SystemContext(("V", "B", "E")))
    return float(evaluate_functional(f, v))


def _apply_to_density(channel: IsometryChannel, phi: DensityMatrix) -> DensityMatrix:
    dv, da = phi.dims
    W = np.kron(np.eye(dv), channel.U)
    out = W @ phi.matrix @ W.conj().T
    return DensityMatrix((dv, channel.d_B, channel.d_E), out)


@dataclass
class SpotCheck:
    formula: str
    joint: float
    singles: tuple
    gap: float
    telescoping: Optional[list] = None

    def to_json(self) -> dict:
        return {"formula": self.formula, "joint": self.joint, "singles": list(self.singles), "gap": self.gap,
                "telescoping": self.telescoping}


def additivity_spot_check(first: IsometryChannel, second: IsometryChannel, formula="H(B)-H(E)",
                          cfg: OptimizerConfig = OptimizerConfig()) -> SpotCheck:
    """Estimate ``f(N (x) M) - f(N) - f(M)`` from maximizations.

    For coherent information the two-step telescoping at the joint optimum
    is also reported: each step ``H(B_i V) - H(E_i V)`` against ``H(B_i) - H(E_i)``.
    """
    f = as_formula(formula)
    joint = first.tensor(second)
    if joint.d_in > MAX_JOINT_DIM:
        raise NumlabError(f"joint input dimension exceeds {MAX_JOINT_DIM}")
    rj = maximize_formula(f, joint, cfg=cfg)
    r1 = maximize_formula(f, first, cfg=cfg)
    r2 = maximize_formula(f, second, cfg=cfg)
    gap = rj.value - r1.value - r2.value
    tele = None
    if str(formula).replace(" ", "") == "H(B)-H(E)":
        tele = _telescoping(rj, first, second, joint)
    return SpotCheck(str(formula), rj.value, (r1.value, r2.value), gap, tele)


def _telescoping(res: MaximizeResult, first, second, joint) -> list:
    """Terms of ``H(B1B2) - H(E1E2) = [H(B1 B2) - H(E1 B2)] + [H(E1 B2) - H(E1 E2)]``."""
    out, dims = _output(res.psi, joint, res.input_dims)
    *_, dr = dims
    split = (first.d_B, second.d_B, first.d_E, second.d_E, dr)
    names = ("B1", "B2", "E1", "E2")
    psi = out.reshape(split)

    def H(*sys):
        return _entropy_of_cut(psi, split, [names.index(s) for s in sys])

    steps = [
        {"step": 1, "aux": "B2", "conditioned": H("B1", "B2") - H("E1", "B2"), "unconditioned": H("B1") - H("E1")},
        {"step": 2, "aux": "E1", "conditioned": H("B2", "E1") - H("E2", "E1"), "unconditioned": H("B2") - H("E2")},
    ]
    for s in steps:
        s["holds"] = s["conditioned"] <= s["unconditioned"] + 1e-6
    return steps


@dataclass
class CQReport:
    conditions: dict
    conditions_hold: bool
    cq: Optional[bool]
    distance: Optional[float]

    def to_json(self) -> dict:
        return {"conditions": self.conditions, "conditions_hold": self.conditions_hold, "cq": self.cq,
                "distance": self.distance}


def cq_criterion_check(rho: DensityMatrix, seed: int = 0) -> CQReport:
    """Check ``H(R_i|R_j) = 0`` and ``H(R_i|R_j R_k) = 0`` on ``R1 R2 R3 A`` and test c-q structure of ``R1 A``.

    The dephasing basis diagonalizes ``rho_{R1}`` together with a random
    conditioned operator ``Tr_A[rho_{R1A} (1 (x) X)]``, which separates
    degenerate eigenspaces of ``rho_{R1}``.
    """
    if len(rho.dims) != 4:
        raise NumlabError("expected systems R1 R2 R3 A")
    if int(np.prod(rho.dims)) > 16 ** 2:
        raise NumlabError("state too large")
    v = entropy_vector(rho, ("R1", "R2", "R3", "A"))
    ctx = v.context
    conds = {}
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            ri, rj = f"R{i + 1}", f"R{j + 1}"
            conds[f"H({ri}|{rj})"] = v[ctx.mask([ri, rj])] - v[ctx.mask([rj])]
            k = 3 - i - j
            if j < k:
                rk = f"R{k + 1}"
                conds[f"H({ri}|{rj}{rk})"] = v[ctx.mask([ri, rj, rk])] - v[ctx.mask([rj, rk])]
    hold = all(abs(x) <= CQ_COND_TOL for x in conds.values())
    if not hold:
        return CQReport(conds, False, None, None)
    d1, da = rho.dims[0], rho.dims[3]
    r1a = rho.reduced([0, 3])
    r1 = partial_trace_2(r1a, d1, da)
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(da, da)) + 1j * rng.normal(size=(da, da))
    x = x + x.conj().T
    cond = np.einsum("iajb,ba->ij", r1a.reshape(d1, da, d1, da), x)
    w, _ = np.linalg.eigh(r1)
    scale = 1e-3 / (1 + np.abs(w).max())
    _, basis = np.linalg.eigh(r1 + scale * (cond + cond.conj().T) / 2)
    P = np.kron(basis, np.eye(da))
    rot = P.conj().T @ r1a @ P
    deph = np.zeros_like(rot)
    for k in range(d1):
        sl = slice(k * da, (k + 1) * da)
        deph[sl, sl] = rot[sl, sl]
    dist = float(np.linalg.norm(rot - deph, ord="nuc") / 2)
    return CQReport(conds, True, dist <= CQ_DIST_TOL, dist)


def partial_trace_2(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Trace out the second factor of a ``d1 x d2`` bipartite operator."""
    return np.einsum("iaja->ij", m.reshape(d1, d2, d1, d2))


def channel_from_file(path: str) -> IsometryChannel:
    with open(path) as fh:
        return IsometryChannel.from_json(fh.read())
