from fractions import Fraction

import numpy as np
import pytest

from addicone.additivity import (
    AdditivityError,
    _basis,
    block_delta,
    certify_ray,
    coincidence_check,
    direct_one_var_cone,
    distribution_transform,
    full_cone,
    known_quantity_memberships,
    multi_var_cone,
    one_var_cone,
    ray_delta,
    refuting_witness,
    verify_certificate,
    witness_library,
    witness_row,
    witnesses_for,
    zero_var_cone,
)
from addicone.decouplings import DecouplingCode, DecouplingError, delta_functional, enumerate_standard
from addicone.entropic import ClassicalDistribution, entropy_vector, evaluate_functional
from addicone.formulas import (
    ONE_VAR_SPACE,
    V_SPACE,
    ZERO_SPACE,
    AlphaSpace,
    composite_context,
    formula_context,
    parse_functional,
)
from addicone.polyhedra import ConeH, cones_equal

CODES = enumerate_standard(1)


def random_bounded_alpha(space, rng):
    """Random integer alpha with every nonempty block summing to zero."""
    alpha = [Fraction(int(x)) for x in rng.integers(-3, 4, size=space.dim)]
    for row in space.boundedness_rows():
        idx = [i for i, c in enumerate(row) if c]
        alpha[idx[0]] -= sum(alpha[i] for i in idx)
    return tuple(alpha)


def random_p(n_aux, rng, v_size=2, concentration=0.5):
    names = composite_context(n_aux).names
    shape = (v_size,) * n_aux + (2, 2, 2, 2)
    p = rng.dirichlet(np.ones(int(np.prod(shape))) * concentration).reshape(shape)
    return ClassicalDistribution.from_array(names, p)


def test_zero_var_cone_is_exact():
    cone = zero_var_cone()
    assert cone.exact()
    assert cones_equal(cone.h, ConeH(3, [(1, 0, 1), (0, 1, 1), (1, 1, 1), (0, 0, 1)]))
    assert len(cone.v.rays) == 4 and not cone.v.lineality


def test_library_rows_match_declared_values():
    for spec in witness_library():
        assert witness_row(spec.distribution(), spec.decoupling) == spec.expected_vector(), spec.name


@pytest.mark.parametrize("code", CODES, ids=lambda c: c.label())
def test_one_var_cone_exact_and_certified(code):
    cone = one_var_cone(code)
    assert cone.exact()
    for rc in cone.certificates:
        assert verify_certificate(rc, code, V_SPACE)
        assert all(lam >= 0 for lam in rc.result.multipliers.values())
    # every facet is pinned by a witness on which Delta vanishes
    assert all(cone.tight_witnesses())


@pytest.mark.parametrize("code", CODES, ids=lambda c: c.label())
def test_witness_rows_are_valid_outer_constraints(code):
    cone = one_var_cone(code)
    for w in witnesses_for(code):
        for g in cone.generators:
            assert sum(a * b for a, b in zip(w.row, g)) >= 0


def test_case_1_cone():
    cone = one_var_cone(DecouplingCode.single(3, 3))
    assert sorted(cone.rays_display()) == sorted(["-H(B|EV)", "-H(E|BV)", "-H(B|V)", "-H(E|V)"])
    assert cone.facets_display() == ["a_V >= 0", "a_V + a_EV >= 0", "a_V + a_BV >= 0", "a_V + a_BV + a_EV >= 0"]
    assert cone.contains(V_SPACE.from_functional(parse_functional("-H(B|V)", formula_context(1))))
    assert not cone.contains(V_SPACE.from_functional(parse_functional("H(BE|V)", formula_context(1))))


def test_case_5_lineality():
    cone = one_var_cone(DecouplingCode.single(1, 2))
    assert cone.rays_display()[0] == "±[H(EV)-H(BV)]"


def test_extra_equality_for_1_1():
    cone = one_var_cone(DecouplingCode.single(1, 1))
    assert "a_EV = 0" in cone.facets_display()


@pytest.mark.parametrize("code", CODES[::3], ids=lambda c: c.label())
def test_membership_soundness(code):
    """Nonnegative combinations of generators never give negative Delta numerically."""
    cone = one_var_cone(code)
    gens = cone.generators
    rng = np.random.default_rng(11)
    ctx = composite_context(1)
    full = AlphaSpace.full(1)
    for _ in range(5):
        w = rng.integers(0, 4, size=len(gens))
        alpha = [sum(Fraction(int(c)) * g[i] for c, g in zip(w, gens)) for i in range(4)]
        delta = delta_functional(full.to_functional(V_SPACE.embed(alpha, full)), code)
        for _ in range(5):
            v = entropy_vector(random_p(1, rng, v_size=3))
            assert v.context == ctx
            assert evaluate_functional(delta, v) > -1e-9


def test_certify_ray_rejects_unbounded():
    with pytest.raises(AdditivityError):
        certify_ray((1, 0, 0, 0), DecouplingCode.single(3, 3))


def test_certify_ray_refutes_negative_entropy():
    rc = certify_ray((-1, 0, 0), None)
    assert not rc.ok and rc.to_json()["status"] == "refuted"


@pytest.mark.parametrize("code", [DecouplingCode.single(3, 3), DecouplingCode.single(1, 2),
                                  DecouplingCode.single(3, 1)], ids=lambda c: c.label())
def test_full_cone_matches_direct_computation(code):
    a, b = full_cone(code), direct_one_var_cone(code)
    assert a.exact() and b.exact()
    assert cones_equal(a.h, b.h)


@pytest.mark.parametrize("code", [None, DecouplingCode.single(3, 3), DecouplingCode.single(1, 2)])
def test_classical_and_quantum_cones_coincide(code):
    rep = coincidence_check(code)
    assert rep.equal and rep.counterexample is None


def test_multi_var_cones_certified():
    for code in enumerate_standard(2)[::10]:
        cone = multi_var_cone(2, code)
        assert cone.certified
        comp = composite_context(2)
        for rc in cone.certificates:
            assert verify_certificate(rc, code, cone.space, comp)


def test_multi_var_rejects_bad_input():
    with pytest.raises(DecouplingError):
        multi_var_cone(2, DecouplingCode.single(3, 3))
    with pytest.raises(DecouplingError):
        multi_var_cone(4, DecouplingCode(((0, 0),) * 4))


@pytest.mark.parametrize("code,T", [
    (DecouplingCode.single(3, 3), ()),
    (DecouplingCode.single(3, 3), (0,)),
    (DecouplingCode.single(1, 2), (0,)),
    (DecouplingCode.single(3, 0), ()),
])
def test_transform_isolates_block_n1(code, T):
    rng = np.random.default_rng(5)
    t = sum(1 << i for i in T)
    full = AlphaSpace.full(1)
    for _ in range(50):
        p = random_p(1, rng)
        alpha = random_bounded_alpha(full, rng)
        q = distribution_transform(p, code, T)
        got = evaluate_functional(delta_functional(full.to_functional(alpha), code), entropy_vector(q))
        want = block_delta(alpha, code, t, entropy_vector(p))
        assert abs(got - want) < 1e-9


@pytest.mark.parametrize("T", [(), (0,), (1,), (0, 1)])
def test_transform_isolates_block_n2(T):
    code = DecouplingCode(((1, 0), (2, 1)))
    rng = np.random.default_rng(9)
    t = sum(1 << i for i in T)
    full = AlphaSpace.full(2)
    for _ in range(5):
        p = random_p(2, rng)
        alpha = random_bounded_alpha(full, rng)
        q = distribution_transform(p, code, T)
        got = evaluate_functional(delta_functional(full.to_functional(alpha), code), entropy_vector(q))
        assert abs(got - block_delta(alpha, code, t, entropy_vector(p))) < 1e-9


def test_refuting_witness_exact():
    code = DecouplingCode(((3, 3), (0, 0)))
    full = AlphaSpace.full(2)
    # H(BE|V1) is outside the induced (3,3) cone on the V1 block
    alpha = full.from_functional(parse_functional("H(BE|V1)", formula_context(2)))
    res = refuting_witness(alpha, code)
    assert res is not None and res[1] < 0
    inside = full.from_functional(parse_functional("H(B)", formula_context(2)))
    assert refuting_witness(inside, code) is None


def test_known_quantities():
    rows = {r["formula"]: r["codes"] for r in known_quantity_memberships()}
    assert len(rows["H(B)"]) == 16
    assert [3, 3] in rows["-H(B|V)"] and len(rows["-H(B|V)"]) == 12
    assert sorted(rows["H(BV)-H(EV)"]) == [[1, 2], [2, 1]]


def test_cone_json_shape():
    d = one_var_cone(DecouplingCode.single(1, 2)).to_json()
    assert d["class"] == [1, 2] and d["certified"]
    assert {r["kind"] for r in d["rays"]} <= {"ray", "lineality+", "lineality-"}
    assert ONE_VAR_SPACE.dim == 7 and ZERO_SPACE.dim == 3


def test_h_b_given_v_refuted_under_3_3():
    c = DecouplingCode.single(3, 3)
    alpha = V_SPACE.from_functional(parse_functional("H(B|V)", formula_context(1)))
    rc = certify_ray(alpha, c)
    gens = list(_basis(1, "quantum")[1])
    assert not rc.ok and rc.result.verify(ray_delta(alpha, c).vector(), gens)
    # cross-check: a case-1 witness makes Delta negative
    assert min(sum(r * a for r, a in zip(w.row, alpha)) for w in witnesses_for(c)) < 0

