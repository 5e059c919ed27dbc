import itertools

import pytest

from segal_cobar.barratt_eccles import be_basis
from segal_cobar.cubical import (
    chain_codegeneracy, chain_coface, chain_connection, cochain_connection, connection_morphism_on_chains,
    connection_vanishing, cube_chains, cube_cochains, cube_e_act, cube_e_act_sums, cube_product, cube_unit,
    cube_words, degeneracy, extend_word_map, face, pair, be_complex, min_max_distribution, verify_cubical,
)
from segal_cobar.ring_linear import F2, QQ, FormalSum, GradedHom, check_chain_map, homology_ranks, square_zero_check, tensor_many

MU = ((1, 2),)


def fs(d, ring=QQ):
    return FormalSum(ring, d)


def test_interval_face_values():
    assert face("1", 1, 0) == fs({"": 1})
    assert face("0", 1, 0).is_zero() and face("e", 1, 0).is_zero()
    assert face("0", 1, 1) == fs({"": 1})
    assert face("1", 1, 1).is_zero()
    # slot 1 of "e0" holds 0#, which d_0 kills
    assert face("e0", 1, 0).is_zero()
    assert face("e1", 1, 0) == fs({"e": 1})
    with pytest.raises(ValueError):
        face("e1", 3, 0)


def test_connection_values():
    assert cochain_connection("1") == (("11", 1),)
    assert dict(cochain_connection("e")) == {"e1": 1, "1e": 1}
    assert dict(cochain_connection("0")) == {"00": 1, "10": 1, "01": 1}
    assert degeneracy("", 0) == fs({"0": 1, "1": 1})
    assert degeneracy("e", 0) == fs({"e0": 1, "e1": 1})
    assert degeneracy("e", 1) == fs({"e1": 1, "1e": 1})
    assert degeneracy("e", 2) == fs({"0e": 1, "1e": 1})
    assert degeneracy("e0", 1) == fs({"e00": 1, "e10": 1, "e01": 1})


def test_chain_connection_tables():
    # ∇_*(0⊗0) = ∇_*(1⊗0) = ∇_*(0⊗1) = 0, ∇_*(1⊗1) = 1, ∇_*(1⊗01) = ∇_*(01⊗1) = 01
    for a, b in [("0", "0"), ("1", "0"), ("0", "1")]:
        assert chain_connection(a, b) == (("0", 1),)
    assert chain_connection("1", "1") == (("1", 1),)
    assert chain_connection("1", "e") == chain_connection("e", "1") == (("e", 1),)
    for a, b in [("0", "e"), ("e", "0"), ("e", "e")]:
        assert chain_connection(a, b) == ()
    assert chain_connection("1", "e", "max") == ()
    for t in "01":
        assert chain_connection("1", t, "max") == (("1", 1),)


def _sum(items):
    out = FormalSum(QQ)
    for lab, c in items:
        out.add_term(lab, c)
    return out


def test_min_max_distribution():
    # ∇max(∇min(s2 ⊗ s1) ⊗ t) = Σ ∇min(∇max(s2 ⊗ t') ⊗ ∇max(s1 ⊗ t'')), AW(t) = Σ t' ⊗ t''
    aw = {"0": [("0", "0")], "1": [("1", "1")], "e": [("0", "e"), ("e", "1")]}
    deg = {"0": 0, "1": 0, "e": 1}
    checked = 0
    for s2, s1, t in itertools.product("01e", repeat=3):
        lhs = FormalSum(QQ)
        for y, cy in chain_connection(s2, s1):
            for z, cz in chain_connection(y, t, "max"):
                lhs.add_term(z, cy * cz)
        rhs = FormalSum(QQ)
        for t1, t2 in aw[t]:
            sign = (-1) ** (deg[s1] * deg[t1])
            for u, cu in chain_connection(s2, t1, "max"):
                for v, cv in chain_connection(s1, t2, "max"):
                    for z, cz in chain_connection(u, v):
                        rhs.add_term(z, sign * cu * cv * cz)
        assert lhs == rhs, (s2, s1, t)
        checked += 1
    assert checked == 27


def test_complexes_square_zero_and_acyclic_up_to_unit():
    for k in range(4):
        assert square_zero_check(cube_cochains(k)).ok
        assert square_zero_check(cube_chains(k)).ok
        assert homology_ranks(cube_cochains(k)) == {0: 1}
        assert homology_ranks(cube_chains(k)) == {0: 1}


def _apply(f, x):
    return extend_word_map(f, x)


def test_cubical_identities_exhaustive():
    checked = 0
    for k in range(1, 5):
        for w in cube_words(k):
            # d^j_ε d^i_η = d^i_η d^{j-1}_ε for i < j (diagrammatic order: left map first)
            for i, j in itertools.combinations(range(1, k + 1), 2):
                for e1, e2 in itertools.product((0, 1), repeat=2):
                    lhs = _apply(lambda u: face(u, i, e2), face(w, j, e1))
                    rhs = _apply(lambda u: face(u, j - 1, e1), face(w, i, e2))
                    assert lhs == rhs
                    checked += 1
        # degeneracies start from I^{k-1}
        for w in cube_words(k - 1):
            for j in range(0, k + 1):
                sw = degeneracy(w, j)
                for i in range(1, k + 1):
                    for eps in (0, 1):
                        lhs = _apply(lambda u: face(u, i, eps), sw)
                        if i < j:
                            rhs = _apply(lambda u: degeneracy(u, j - 1), face(w, i, eps))
                        elif i > j + 1:
                            rhs = _apply(lambda u: degeneracy(u, j), face(w, i - 1, eps))
                        elif eps == 0:
                            rhs = fs({w: 1})
                        elif 1 <= j <= k - 1:
                            # ε = 1, i in {j, j+1}: evaluate slot j at 0 then reinsert 0# + 1# there
                            rhs = _apply(lambda u: _insert_unit(u, j), face(w, j, 1))
                        else:
                            continue
                        assert lhs == rhs, (w, j, i, eps)
                        checked += 1
                # s^j s^i = s^i s^{j+1} for i <= j
                for i in range(0, j + 1):
                    lhs = _apply(lambda u: degeneracy(u, i), sw)
                    rhs = _apply(lambda u: degeneracy(u, j + 1), degeneracy(w, i))
                    assert lhs == rhs, (w, j, i)
                    checked += 1
    assert checked > 1000


def _insert_unit(u, j):
    p = len(u) - (j - 1)
    return fs({u[:p] + "0" + u[p:]: 1, u[:p] + "1" + u[p:]: 1})


def test_faces_and_degeneracies_are_chain_maps():
    for k in range(1, 4):
        src = cube_cochains(k)
        tgt = cube_cochains(k - 1)
        for i in range(1, k + 1):
            for eps in (0, 1):
                f = GradedHom(QQ, 0, lambda w, i=i, eps=eps: face(w, i, eps))
                assert check_chain_map(f, src, tgt).ok
        for j in range(0, k + 1):
            f = GradedHom(QQ, 0, lambda w, j=j: degeneracy(w, j))
            assert check_chain_map(f, tgt, src).ok


def test_chain_operators_dual_to_cochain_operators():
    for k in range(1, 4):
        for a in cube_words(k):
            for v in cube_words(k - 1):
                for i in range(1, k + 1):
                    for eps in (0, 1):
                        lhs = sum(c * pair(b, v) for b, c in face(a, i, eps).items())
                        rhs = sum(c * pair(a, u) for u, c in chain_coface(v, i, eps).items())
                        assert lhs == rhs
        for a in cube_words(k - 1):
            for v in cube_words(k):
                for j in range(0, k + 1):
                    lhs = sum(c * pair(b, v) for b, c in degeneracy(a, j).items())
                    rhs = sum(c * pair(a, u) for u, c in chain_codegeneracy(v, j).items())
                    assert lhs == rhs, (a, v, j)


def test_max_codegeneracy_homotopy_endpoints():
    # h_k(σ ⊗ 1) = 1^{⊗k}, h_k(σ ⊗ 0) = σ, letterwise
    for s in "01":
        assert chain_connection(s, "1", "max") == (("1", 1),)
    for s in "01e":
        assert chain_connection(s, "0", "max") == ((s, 1),)


def test_cube_product_examples():
    assert cube_product("0", "0") == fs({"0": 1})
    assert cube_product("e", "e").is_zero()
    for k in range(3):
        for a in cube_words(k):
            u = FormalSum(QQ)
            for w, c in cube_unit(k).items():
                u.add_scaled(cube_product(w, a), c)
            assert u == fs({a: 1})


def test_mu_action_is_cube_product():
    for k in range(3):
        for a, b in itertools.product(cube_words(k), repeat=2):
            assert cube_e_act(MU, [a, b]) == cube_product(a, b), (a, b)


def test_cup_one_on_interval():
    # (id, τ) has table reduction <1 2 1>; its interval cut of 01 contains 01 ⊗ 01
    # with sign +1 (no caesura shift, a degree-0 interval moves).  Dualizing gives
    # (-1)^{|x|(|a|+1)} = -1 times the pairing sign (-1)^{1*1} = -1, so +01#.
    x = ((1, 2), (2, 1))
    assert cube_e_act(x, ["e", "e"]) == fs({"e": 1})


def test_positive_degree_operations_vanish_on_vertex_cochains():
    for x in be_basis(2, 1) + be_basis(2, 2):
        for a, b in itertools.product("01", repeat=2):
            assert cube_e_act(x, [a, b]).is_zero()


@pytest.mark.parametrize("ring", [QQ, F2])
def test_e_action_is_chain_map(ring):
    for r, n, k in [(2, 2, 1), (2, 2, 2), (3, 2, 1), (3, 1, 2)]:
        src = tensor_many([be_complex(r, n, ring)] + [cube_cochains(k, ring)] * r)
        tgt = cube_cochains(k, ring)
        f = GradedHom(ring, 0, lambda lab: cube_e_act(lab[0], list(lab[1:]), ring))
        labels = [lab for lab in src.all_labels() if len(lab[0]) - 1 < n]
        assert check_chain_map(f, src, tgt, labels=labels).ok, (r, n, k)


def test_connection_is_e_algebra_morphism_on_cochains():
    # s^1 = ∇*: I^1 -> I^2 commutes with every x in E(r), r <= 3, degree <= 3
    checked = 0
    for r in (1, 2, 3):
        for n in range(4):
            for x in be_basis(r, n):
                for args in itertools.product("01e", repeat=r):
                    out_deg = n - sum(a == "e" for a in args)
                    if out_deg > 0 or out_deg < -1:
                        continue
                    lhs = _apply(lambda u: degeneracy(u, 1), cube_e_act(x, list(args)))
                    rhs = cube_e_act_sums(x, [degeneracy(a, 1) for a in args])
                    assert lhs == rhs, (x, args)
                    checked += 1
    assert checked > 100


def test_connection_is_coalgebra_morphism_on_chains():
    for r in (1, 2, 3):
        for n in range(4):
            for x in be_basis(r, n):
                assert connection_vanishing(x).is_zero(), x
                for a, b in itertools.product("01e", repeat=2):
                    lhs, rhs = connection_morphism_on_chains(x, a, b)
                    assert lhs == rhs, (x, a, b)


def test_faces_are_e_algebra_morphisms():
    x = ((1, 2), (2, 1))
    for a, b in itertools.product(cube_words(2), repeat=2):
        for i in (1, 2):
            for eps in (0, 1):
                lhs = _apply(lambda u: face(u, i, eps), cube_e_act(x, [a, b]))
                rhs = cube_e_act_sums(x, [face(a, i, eps), face(b, i, eps)])
                assert lhs == rhs


def test_library_verifier():
    rep = verify_cubical(3, QQ, r_max=2, d_max=2)
    assert rep.ok, rep.summary()
    assert [c.count for c in rep.checks if c.name == "min-max distribution"] == [27]
    assert min_max_distribution(F2) == (27, [])
