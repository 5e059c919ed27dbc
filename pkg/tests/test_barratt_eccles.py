import itertools

import pytest

from segal_cobar.barratt_eccles import (
    all_perms, be_basis, be_compose, be_compose_sums, be_degree, be_diagonal, be_differential,
    be_sym, caesura_positions, coalgebra_act, coalgebra_act_sum, dual_cochain_act, extend,
    format_perm_simplex, format_surjection, identity_perm, interval_cut, parse_perm_simplex,
    parse_surjection, perm_compose, perm_inverse, perm_mul, table_reduction, verify_barratt_eccles,
)
from segal_cobar.ring_linear import F2, QQ, FormalSum
from segal_cobar.simplicial_chains import aw_iterate, boundary, cochains

ID2, TAU = (1, 2), (2, 1)


def fs(d):
    return FormalSum(QQ, d)


def basis_upto(r_max=3, d_max=2):
    return [x for r in range(1, r_max + 1) for n in range(d_max + 1) for x in be_basis(r, n)]


def test_differential_examples():
    assert be_differential((ID2,)).is_zero()
    assert be_differential((ID2, TAU)) == fs({(TAU,): 1, (ID2,): -1})
    assert be_differential((ID2, TAU, ID2)) == fs({(TAU, ID2): 1, (ID2, TAU): 1})


def test_compose_examples():
    assert be_compose(((2, 1),), 1, ((1, 2),)) == fs({((3, 1, 2),): 1})
    u0, u1, v0 = (1, 2), (2, 1), (1, 2)
    assert be_compose((u0, u1), 2, (v0,)) == fs({(perm_compose(u0, 2, v0), perm_compose(u1, 2, v0)): 1})
    two = be_compose((u0, u1), 1, (ID2, TAU))
    assert sorted(two.terms.values()) == [-1, 1]
    with pytest.raises(ValueError):
        be_compose((ID2,), 3, (ID2,))


def test_sym_and_diagonal_examples():
    x = (ID2, TAU)
    assert be_sym(ID2, x) == x
    assert be_sym(TAU, (ID2,)) == (TAU,)
    assert be_sym(TAU, x) == (TAU, ID2)
    assert be_diagonal((ID2,)) == fs({((ID2,), (ID2,)): 1})
    assert be_diagonal(x) == fs({((ID2,), x): 1, (x, (TAU,)): 1})


def test_label_syntax():
    assert format_perm_simplex((ID2, TAU)) == "([1 2],[2 1])"
    assert parse_perm_simplex("([1 2],[2 1])") == (ID2, TAU)
    assert format_surjection((1, 2, 1)) == "<1 2 1>"
    assert parse_surjection("<1 2 1>") == (1, 2, 1)
    with pytest.raises(ValueError):
        parse_perm_simplex("([1 1])")


def test_table_reduction_examples():
    assert table_reduction(((2, 3, 1),)) == [(2, 3, 1)]
    assert (1, 2, 1) in table_reduction((ID2, TAU))
    for x in be_basis(3, 2):
        for s in table_reduction(x):
            assert len(s) == 3 + 2


def test_interval_cut_examples():
    cup1 = interval_cut((1, 2, 1), (0, 1))
    assert len(cup1) == 1 and abs(cup1.coefficient(((0, 1), (0, 1)))) == 1
    assert interval_cut((1, 2), (0, 1)) == fs({((0,), (0, 1)): 1, ((0, 1), (1,)): 1})
    for s in [(1, 2), (2, 1), (1, 2, 1), (1, 2, 3)]:
        for lab in interval_cut(s, (5,)).terms:
            assert all(len(f) == 1 for f in lab)


def test_caesuras():
    assert caesura_positions((1, 2, 1, 3, 2)) == [0, 1]


def test_coalgebra_act_examples():
    for r in (2, 3):
        for q in range(4):
            sig = tuple(range(q + 1))
            assert coalgebra_act((identity_perm(r),), sig) == aw_iterate(sig, r)
    act = coalgebra_act((ID2, TAU), (0, 1))
    assert abs(act.coefficient(((0, 1), (0, 1)))) == 1
    # augmentation: counit keeps only the vertex-only tensors, i.e. degree 0 operations on vertices
    assert coalgebra_act((ID2, TAU), (3,)).is_zero()


# exhaustive operad identities, arity <= 3, degree <= 2

def d_tensor2(x: FormalSum, deg) -> FormalSum:
    out = FormalSum(x.ring)
    for (a, b), c in x.terms.items():
        for y, cy in be_differential(a).terms.items():
            out.add_term((y, b), c * cy)
        for y, cy in be_differential(b).terms.items():
            out.add_term((a, y), c * cy * (-1) ** deg(a))
    return out


def test_differential_squares_to_zero():
    for x in basis_upto(3, 3):
        assert extend(be_differential, be_differential(x)).is_zero()


def test_compose_is_chain_map():
    for x in basis_upto(3, 2):
        for y in basis_upto(3, 2):
            if len(x[0]) + len(y[0]) - 1 > 4:
                continue
            for i in range(1, len(x[0]) + 1):
                lhs = extend(be_differential, be_compose(x, i, y))
                rhs = be_compose_sums(be_differential(x), i, fs({y: 1}))
                rhs.add_scaled(be_compose_sums(fs({x: 1}), i, be_differential(y)), (-1) ** be_degree(x))
                assert lhs == rhs, (x, i, y)


def test_diagonal_is_chain_map():
    for x in basis_upto(3, 3):
        lhs = d_tensor2(be_diagonal(x), be_degree)
        rhs = extend(be_diagonal, be_differential(x))
        assert lhs == rhs


def small_pairs(r_total=3, d_total=2):
    for x in basis_upto(3, 2):
        for y in basis_upto(3, 2):
            if len(x[0]) + len(y[0]) - 1 <= r_total + 1 and be_degree(x) + be_degree(y) <= d_total:
                yield x, y


def test_operad_sequential_associativity_and_unit():
    elems = [x for x in basis_upto(3, 2)]
    for x, y in small_pairs():
        for z in elems:
            if be_degree(x) + be_degree(y) + be_degree(z) > 2 or len(x[0]) + len(y[0]) + len(z[0]) > 6:
                continue
            for i in range(1, len(x[0]) + 1):
                for j in range(1, len(y[0]) + 1):
                    lhs = be_compose_sums(be_compose(x, i, y), i + j - 1, fs({z: 1}))
                    rhs = be_compose_sums(fs({x: 1}), i, be_compose(y, j, z))
                    assert lhs == rhs
    for x in elems:
        for i in range(1, len(x[0]) + 1):
            assert be_compose(x, i, ((1,),)) == fs({x: 1})
        assert be_compose(((1,),), 1, x) == fs({x: 1})


def test_operad_parallel_associativity():
    elems = basis_upto(3, 2)
    for x in [e for e in elems if len(e[0]) >= 2]:
        for y in elems:
            for z in elems:
                if be_degree(x) + be_degree(y) + be_degree(z) > 2 or len(x[0]) + len(y[0]) + len(z[0]) > 6:
                    continue
                k, l, m = len(x[0]), len(y[0]), len(z[0])
                for i, j in itertools.combinations(range(1, k + 1), 2):
                    lhs = be_compose_sums(be_compose(x, i, y), j + l - 1, fs({z: 1}))
                    rhs = be_compose_sums(be_compose(x, j, z), i, fs({y: 1}))
                    assert lhs == rhs.scale((-1) ** (be_degree(y) * be_degree(z)))


def test_equivariance():
    for x, y in small_pairs():
        k, l = len(x[0]), len(y[0])
        for s in all_perms(k):
            for t in all_perms(l):
                for i in range(1, k + 1):
                    lhs = be_compose(be_sym(s, x), i, be_sym(t, y))
                    st = perm_compose(s, i, t)
                    rhs = be_compose(x, perm_inverse(s)[i - 1], y).map_labels(lambda z: be_sym(st, z))
                    assert lhs == rhs


def diag_compose(a: FormalSum, i: int, b: FormalSum) -> FormalSum:
    out = FormalSum(QQ)
    for (a1, a2), ca in a.terms.items():
        for (b1, b2), cb in b.terms.items():
            sign = (-1) ** (be_degree(a2) * be_degree(b1))
            for z1, c1 in be_compose(a1, i, b1).terms.items():
                for z2, c2 in be_compose(a2, i, b2).terms.items():
                    out.add_term((z1, z2), ca * cb * c1 * c2 * sign)
    return out


def test_diagonal_is_operad_morphism():
    for x, y in small_pairs():
        for i in range(1, len(x[0]) + 1):
            lhs = extend(be_diagonal, be_compose(x, i, y))
            assert lhs == diag_compose(be_diagonal(x), i, be_diagonal(y))


# coaction on simplices

def d_tensor(t: FormalSum) -> FormalSum:
    out = FormalSum(t.ring)
    for lab, c in t.terms.items():
        e = 0
        for i, f in enumerate(lab):
            for y, cy in boundary(f).terms.items():
                out.add_term(lab[:i] + (y,) + lab[i + 1:], c * cy * (-1) ** e)
            e += len(f) - 1
    return out


def test_coaction_is_chain_map():
    for r in (1, 2, 3):
        for n in range(3):
            for x in be_basis(r, n):
                for q in range(4):
                    sig = tuple(range(q + 1))
                    lhs = d_tensor(coalgebra_act(x, sig))
                    rhs = coalgebra_act_sum(be_differential(x), sig)
                    for f, c in boundary(sig).terms.items():
                        rhs.add_scaled(coalgebra_act(x, f), c * (-1) ** n)
                    assert lhs == rhs, (x, q)


def act_in_slot(y, i, t: FormalSum) -> FormalSum:
    # y passes the first i-1 tensor factors
    out = FormalSum(t.ring)
    for lab, c in t.terms.items():
        sign = (-1) ** (be_degree(y) * sum(len(f) - 1 for f in lab[:i - 1]))
        for img, ci in coalgebra_act(y, lab[i - 1]).terms.items():
            out.add_term(lab[:i - 1] + img + lab[i:], c * ci * sign)
    return out


def test_coaction_is_coassociative():
    for x, y in small_pairs():
        if len(x[0]) == 1 and len(y[0]) == 1:
            continue
        for i in range(1, len(x[0]) + 1):
            for q in range(3):
                sig = tuple(range(q + 1))
                lhs = coalgebra_act_sum(be_compose(x, i, y), sig)
                # y also passes x, hence the extra (-1)^{|x||y|}
                rhs = act_in_slot(y, i, coalgebra_act(x, sig)).scale((-1) ** (be_degree(x) * be_degree(y)))
                assert lhs == rhs, (x, i, y, q)


def test_dual_cochain_action_is_chain_map():
    for q in (1, 2):
        N = cochains(q)
        labs = N.all_labels()
        for r in (1, 2):
            for n in range(3):
                for x in be_basis(r, n):
                    for args in itertools.product(labs, repeat=r):
                        a = [fs({lab: 1}) for lab in args]
                        lhs = N.d(dual_cochain_act(x, a, q))
                        rhs = FormalSum(QQ)
                        for y, c in be_differential(x).terms.items():
                            rhs.add_scaled(dual_cochain_act(y, a, q), c)
                        e = n
                        for i in range(r):
                            b = list(a)
                            b[i] = N.d(a[i])
                            rhs.add_scaled(dual_cochain_act(x, b, q), (-1) ** e)
                            e += N.degree_of(args[i])
                        assert lhs == rhs, (x, args)


def test_identity_acts_as_cup_product():
    # μ = (id_2) acts on N*(Δ^1) as the cup product: 0# ∪ 0# = 0#, 0# ∪ 01# = 01#
    z, one, e = ("#", (0,)), ("#", (1,)), ("#", (0, 1))
    mu = (ID2,)
    assert dual_cochain_act(mu, [fs({z: 1}), fs({z: 1})], 1) == fs({z: 1})
    assert dual_cochain_act(mu, [fs({z: 1}), fs({e: 1})], 1) == fs({e: 1})
    assert dual_cochain_act(mu, [fs({e: 1}), fs({one: 1})], 1) == fs({e: 1})
    assert dual_cochain_act(mu, [fs({one: 1}), fs({e: 1})], 1).is_zero()


def test_dual_cochain_action_is_operadic():
    q = 1
    labs = cochains(q).all_labels()
    elems = basis_upto(2, 2)
    for x in elems:
        for y in elems:
            if be_degree(x) + be_degree(y) > 2:
                continue
            k, l = len(x[0]), len(y[0])
            for i in range(1, k + 1):
                for args in itertools.product(labs, repeat=k + l - 1):
                    a = [fs({lab: 1}) for lab in args]
                    lhs = FormalSum(QQ)
                    for z, c in be_compose(x, i, y).terms.items():
                        lhs.add_scaled(dual_cochain_act(z, a, q), c)
                    inner = dual_cochain_act(y, a[i - 1:i - 1 + l], q)
                    pre = sum(-(len(lab[1]) - 1) for lab in args[:i - 1])
                    rhs = dual_cochain_act(x, a[:i - 1] + [inner] + a[i - 1 + l:], q)
                    assert lhs == rhs.scale((-1) ** (be_degree(y) * pre)), (x, i, y, args)


@pytest.mark.parametrize("ring", [QQ, F2])
def test_library_verifier(ring):
    rep = verify_barratt_eccles(2, 2, ring)
    assert rep.ok, rep.summary()
    assert len(rep.checks) == 7 and all(c.count > 0 for c in rep.checks)
