import itertools

import pytest

from segal_cobar.barratt_eccles import be_basis
from segal_cobar.einf_algebra import (
    MU, Comparison, TruncationOverflow, coproduct_free, format_word, free_ealgebra, parse_word,
    verify_comparison,
)
from segal_cobar.ring_linear import F2, QQ, FormalSum, square_zero_check

ID2, TAU = (1, 2), (2, 1)


def test_one_generator_degree_zero_basis():
    E = free_ealgebra(QQ, {"g": 0}, max_degree=0, max_arity=3)
    words = E.basis_words()
    # one orbit per arity: Σ_r acts freely and transitively on degree-0 simplices
    assert [len(w[1]) for w in words] == [0, 1, 2, 3]


def test_evaluate_mu_and_differential():
    E = free_ealgebra(QQ, {"g": 0}, max_degree=2, max_arity=2)
    g = E.generator("g")
    prod = E.product(g, g)
    assert prod == E.word(MU, ("g", "g"))
    assert E.complex.d(prod).is_zero()
    assert square_zero_check(E.complex).ok


def test_symmetric_relation_with_signs():
    E = free_ealgebra(QQ, {"a": 1, "b": 1}, max_degree=1, max_arity=2)
    # (τ·μ)(a, b) = -μ(b, a) for odd a, b
    assert E.word((TAU,), ("a", "b")) == E.word((ID2,), ("b", "a")).scale(-1)
    assert E.word((ID2,), ("a", "b")) == E.word((TAU,), ("b", "a")).scale(-1)
    E0 = free_ealgebra(QQ, {"a": 0, "b": 0}, max_degree=1, max_arity=2)
    assert E0.word((TAU,), ("a", "b")) == E0.word((ID2,), ("b", "a"))


def test_truncation_overflow():
    E = free_ealgebra(QQ, {"g": 0}, max_degree=0, max_arity=2)
    g = E.generator("g")
    with pytest.raises(TruncationOverflow):
        E.product(E.product(g, g), g)


def test_coproduct_examples():
    A = free_ealgebra(QQ, {"x": 0}, 0, 2, name="A")
    B = free_ealgebra(QQ, {"y": 0}, 0, 2, name="B")
    C = coproduct_free(A, B, 0, 2)
    assert C.generator("x") == C.word(((1,),), ("x",))
    assert ((ID2,), ("x", "y")) in C.basis_words()
    # arity <= 2, degree 0, one generator per side: 1 + 2 + (x x, x y (two orbits), y y)
    assert len(C.basis_words()) == 1 + 2 + 4


def test_word_syntax():
    w = ((ID2, TAU), ("g1", "g2"))
    assert format_word(w) == "([1 2],[2 1])(g1,g2)"
    assert parse_word("([1 2],[2 1])(g1,g2)") == w


def test_em_aw_examples():
    A = free_ealgebra(QQ, {"x": 0}, 2, 3, name="A")
    B = free_ealgebra(QQ, {"y": 0}, 2, 3, name="B")
    cmp = Comparison(A, B, coproduct_free(A, B, 2, 3))
    a = ((ID2,), ("x", "x"))
    b = (((1,),), ("y",))
    em = cmp.em((a, b))
    assert em == cmp.C.evaluate(MU, [FormalSum.basis(QQ, a), FormalSum.basis(QQ, b)])
    back = FormalSum(QQ)
    for wd, c in em.terms.items():
        back.add_scaled(cmp.aw(wd), c)
    assert back == FormalSum.basis(QQ, (a, b))


def test_aw_degree_zero_projection():
    A = free_ealgebra(QQ, {"x": 0}, 1, 3, name="A")
    B = free_ealgebra(QQ, {"y": 0}, 1, 3, name="B")
    cmp = Comparison(A, B, coproduct_free(A, B, 1, 3))
    for wd in cmp.C.basis_words():
        if len(wd[0]) == 1:
            img = cmp.aw(wd)
            assert len(img) == 1
            (a, b), c = img.items()[0]
            assert c == 1 and len(a[1]) + len(b[1]) == len(wd[1])


@pytest.mark.parametrize("ring", [QQ, F2])
def test_comparison_suite(ring):
    A = free_ealgebra(ring, {"x0": 0, "x1": 1}, 2, 3, gen_diff={"x1": {"x0": 1}}, name="A")
    B = free_ealgebra(ring, {"y0": 0, "y1": 1}, 2, 3, name="B")
    rep = verify_comparison(A, B, max_degree=2, max_arity=3)
    assert rep.ok, rep.summary()
    assert rep.data["words"] > 0 and rep.data["tensors"] > 0


def test_homotopy_natural_under_substitution():
    # φ: x -> μ(x, x) and ψ = id; H commutes with φ ∨ ψ
    A = free_ealgebra(QQ, {"x": 0}, 1, 2, name="A")
    B = free_ealgebra(QQ, {"y": 0}, 1, 2, name="B")
    big = coproduct_free(A, B, 2, 4)
    cmp_big = Comparison(free_ealgebra(QQ, {"x": 0}, 2, 4), free_ealgebra(QQ, {"y": 0}, 2, 4), big)
    subst = {"x": big.word(MU, ("x", "x")), "y": big.generator("y")}

    def phi(wd):
        w, gens = wd
        return big.evaluate(w, [subst[g] for g in gens])

    small = coproduct_free(A, B, 1, 2)
    for wd in small.basis_words():
        if len(wd[0]) - 1 > 1 or len(wd[1]) > 2:
            continue
        lhs = FormalSum(QQ)
        for z, c in phi(wd).terms.items():
            lhs.add_scaled(cmp_big.homotopy(z), c)
        rhs = FormalSum(QQ)
        for z, c in cmp_big.homotopy(wd).terms.items():
            rhs.add_scaled(phi(z), c)
        assert lhs == rhs, format_word(wd)
