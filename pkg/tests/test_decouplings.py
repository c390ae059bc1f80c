import itertools

import numpy as np
import pytest
from scipy.stats import entropy as scipy_entropy

from addicone.entropic import ClassicalDistribution, entropy_vector, evaluate_functional
from addicone.decouplings import (
    BE_SWAP,
    CHANNEL_SWAP,
    PURIFICATION_DUAL,
    DecouplingCode,
    DecouplingError,
    class_of,
    cross_reference,
    delta_functional,
    delta_v_rows,
    delta_zero_rows,
    enumerate_standard,
    esv_term,
    reduce_by_symmetry,
)
from addicone.formulas import V_SPACE, composite_context, formula_context, parse_functional

NAMES = ("V", "B1", "E1", "B2", "E2")


def h(p, names):
    """Oracle: scipy entropy of the marginal on ``names`` of a 5-axis array."""
    keep = [NAMES.index(n) for n in names]
    drop = tuple(i for i in range(5) if i not in keep)
    m = p.sum(axis=drop) if drop else p
    return scipy_entropy(m.ravel(), base=2)


def brute_force_codes(n_aux):
    out = []
    for pairs in itertools.product(itertools.product(range(4), repeat=2), repeat=n_aux):
        a = [x for x, _ in pairs]
        b = [y for _, y in pairs]
        if all(a[i] & a[j] == 0 and b[i] & b[j] == 0 for i in range(n_aux) for j in range(i)):
            out.append(pairs)
    return out


@pytest.mark.parametrize("n_aux,count", [(0, 1), (1, 16), (2, 81)])
def test_enumeration_counts(n_aux, count):
    codes = enumerate_standard(n_aux)
    assert len(codes) == count
    assert sorted(c.pairs for c in codes) == sorted(brute_force_codes(n_aux))


def test_code_parsing_and_validation():
    assert DecouplingCode.parse("3,1") == DecouplingCode.single(3, 1)
    assert DecouplingCode.parse("33,00").pairs == ((3, 3), (0, 0))
    assert DecouplingCode.parse("").n_aux == 0
    with pytest.raises(DecouplingError):
        DecouplingCode.parse("31,20")  # B1 and E1 absorbed by V1, E1 again by V2
    with pytest.raises(DecouplingError):
        DecouplingCode.single(4, 0)
    with pytest.raises(DecouplingError):
        DecouplingCode.parse("x")


def test_induced_code_is_union():
    c = DecouplingCode(((1, 0), (2, 1)))
    assert c.induced([0, 1]) == DecouplingCode.single(3, 1)
    assert c.induced([1]) == DecouplingCode.single(2, 1)


def test_symmetry_classes():
    classes = reduce_by_symmetry(enumerate_standard(1))
    assert [(k.representative.pair, len(k.members)) for k in classes] == [
        ((3, 3), 1), ((3, 1), 4), ((3, 0), 2), ((1, 1), 2), ((1, 2), 2), ((1, 0), 4), ((0, 0), 1)]
    assert sum(len(k.members) for k in classes) == 16


def test_class_words_reach_members():
    for k in reduce_by_symmetry(enumerate_standard(1)):
        for member, word in zip(k.members, k.words):
            c = k.representative
            for g in word:
                c = {"BESwap": BE_SWAP, "ChannelSwap": CHANNEL_SWAP}[g].code(c)
            assert c == member


def test_cross_reference_merges_cases():
    rows = {r["case"]: r for r in cross_reference()}
    assert rows[1]["classes"] == [[3, 3], [0, 0]]
    assert rows[2]["classes"] == [[3, 1], [1, 0]]
    assert len(rows[2]["equivalents"]) == 7
    assert rows[5]["equivalents"] == [[2, 1]]
    assert class_of(DecouplingCode.single(0, 0), include_dual=True).representative.pair == (3, 3)


def test_symmetry_involutions():
    for c in enumerate_standard(1):
        for g in (BE_SWAP, CHANNEL_SWAP, PURIFICATION_DUAL):
            assert g.code(g.code(c)) == c
    f = parse_functional("H(B|V)", formula_context(1))
    assert BE_SWAP.functional(f) == parse_functional("H(E|V)", formula_context(1))
    # the dual complements s inside BE on every auxiliary block
    assert PURIFICATION_DUAL.functional(f) == parse_functional("-H(B|EV)", formula_context(1))


@pytest.mark.parametrize("code", enumerate_standard(1), ids=lambda c: c.label())
def test_esv_against_numpy(code):
    rng = np.random.default_rng(hash(code.pairs) % 2**32)
    mh, mt = code.m_hat(), code.m_tilde()
    for _ in range(5):
        p = rng.dirichlet(np.ones(32) * 0.5).reshape((2,) * 5)
        v = entropy_vector(ClassicalDistribution.from_array(NAMES, p))
        for s in range(4):
            s1 = tuple(n for bit, n in ((1, "B1"), (2, "E1")) if s & bit)
            s2 = tuple(n for bit, n in ((1, "B2"), (2, "E2")) if s & bit)
            oracle = (h(p, ("V",) + s1 + mt) + h(p, ("V",) + mh + s2)
                      - h(p, ("V",) + s1 + s2) - h(p, ("V",) + mh + mt))
            assert abs(evaluate_functional(esv_term(s, code), v) - oracle) < 1e-10


@pytest.mark.parametrize("code", enumerate_standard(1), ids=lambda c: c.label())
def test_delta_v_is_esv_combination(code):
    # for bounded alpha on the V block, Delta(alpha) = sum_s alpha_{sV} E_sV
    rows = delta_v_rows(code)
    rng = np.random.default_rng(7)
    for _ in range(3):
        head = [int(x) for x in rng.integers(-3, 4, size=3)]
        vec = tuple(head + [-sum(head)])
        alpha = V_SPACE.to_functional(vec)
        combo = sum((r * c for r, c in zip(rows, vec)), rows[0] * 0)
        assert delta_functional(alpha, code) == combo


def test_delta_zero_rows():
    ctx = formula_context(0)
    code = DecouplingCode(())
    rows = delta_zero_rows()
    for i, text in enumerate(("H(B)", "H(E)", "H(BE)")):
        assert delta_functional(parse_functional(text, ctx), code) == rows[i]


def test_esv_zero_for_trivial_term():
    assert not esv_term("BE", DecouplingCode.single(3, 3))
    assert not esv_term("∅", DecouplingCode.single(0, 0))
    assert esv_term(0, DecouplingCode.single(0, 0)).context == composite_context(1)


def test_delta_context_mismatch():
    with pytest.raises(DecouplingError):
        delta_functional(parse_functional("H(B)", formula_context(0)), DecouplingCode.single(1, 1))


def test_pure_a_v_example_needs_boundedness():
    ctx = formula_context(1)
    comp = composite_context(1)
    c = DecouplingCode.single(3, 3)
    target = parse_functional("I(B1E1;B2E2|V)", comp)
    bounded = delta_functional(parse_functional("H(V) - H(BEV)", ctx), c)
    assert bounded == target
    # unbounded alpha_V = 1 picks up sum(alpha) * H(M^_1 M~_2 V)
    raw = delta_functional(parse_functional("H(V)", ctx), c)
    assert raw == target + parse_functional("H(VB1E1B2E2)", comp)


@pytest.mark.parametrize("code", enumerate_standard(1), ids=lambda c: c.label())
def test_be_swap_covariance(code):
    ctx = formula_context(1)
    comp = composite_context(1)
    swap = BE_SWAP.state_mapping(1)
    for text in ("H(B|V)", "-H(BE|V) + H(E)", "I(B;E|V)"):
        alpha = parse_functional(text, ctx)
        lhs = delta_functional(BE_SWAP.functional(alpha), BE_SWAP.code(code))
        assert lhs == delta_functional(alpha, code).relabel(comp, swap)
