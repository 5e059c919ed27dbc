import itertools

import pytest
from hypothesis import given, settings, strategies as st

from segal_cobar.ring_linear import F2, QQ, FormalSum, Ring, homology_ranks, mapping_cone
from segal_cobar.segal_cooperads import (
    EHopfSegal, associative_operad, aw_segal_map, cochains_of_simplicial_operad, example_com, forget_to_dg,
    from_json, morphisms_from, solve_homotopy_instance, solver_instance, stored_chains, strict_as_homotopy,
    to_json, top_relation, verify_ehopf, verify_homotopy, verify_segal, verify_strict, with_scaled_rho,
    with_scaled_segal,
)
from segal_cobar.trees import Tree, hom, morphism_chains


def T(s):
    return Tree.parse(s)


C3 = Tree.corolla([1, 2, 3])
C4 = Tree.corolla([1, 2, 3, 4])


def test_com_is_strict_and_segal():
    S = example_com(4)
    assert verify_strict(S).ok
    assert verify_segal(S).ok
    m = hom(T("((1 2) 3)"), T("((1 2) 3)"))
    assert S.segal(m).on_basis(("1", "1")) == FormalSum.basis(QQ, "1")


def test_connected_flag_gives_zero_on_non_reduced_trees():
    S = example_com(3)
    assert S.A(T("((1 2))")).dim() == 0
    assert S.A(C3).dim() == 1


def test_corrupted_coproduct_is_pinpointed():
    S = with_scaled_rho(example_com(4), T("((1 2) 3)"), C3, 2)
    rep = verify_strict(S)
    assert not rep.ok
    assert [c.name for c in rep.failed()] == ["compatibility of coproducts and Segal maps"]
    assert "((1 2) 3)" in rep.failed()[0].witnesses[0]
    # on four leaves the same fault also breaks functoriality
    t = T("(((1 2) 3) 4)")
    rep = verify_strict(with_scaled_rho(example_com(4), t, C4, 2))
    failed = {c.name: c for c in rep.failed()}
    assert "functoriality rho rho = rho" in failed
    assert all(str(t) in w for w in failed["functoriality rho rho = rho"].witnesses)


def test_strict_embedding_generation():
    H = strict_as_homotopy(example_com(4))
    assert verify_homotopy(H).ok
    t, u = T("(((1 2) 3) 4)"), T("((1 2 3) 4)")
    full = H.generate((t, u, C4))
    # the two unit cube corners, no top cell
    assert full.on_basis("1") == FormalSum(QQ, {("1", "0"): 1, ("1", "1"): 1})


def test_top_relation_k1_in_solver_instance():
    # δ(ρ^□_{t->u->s}) = ρ_{t->u} ρ_{u->s} - ρ_{t->s}
    H = solver_instance(QQ)
    t = T("(((1 2) 3) 4)")
    for c in morphism_chains(t, C4, 1):
        lhs, rhs = top_relation(H, c, "1")
        assert lhs == rhs
        comp = H.rho(c[0], c[1])(H.rho(c[1], c[2]).on_basis("1"))
        direct = H.rho(c[0], c[2]).on_basis("1")
        assert rhs == comp - direct
        assert not rhs.is_zero()


@pytest.mark.parametrize("ring", [F2, QQ])
def test_solver_finds_nonstrict_instance(ring):
    sols = solve_homotopy_instance(ring)
    assert len(sols) == 15
    nonzero = [a for found in sols.values() for a in found if any(v for (c, _, _), v in a.items() if len(c) > 2)]
    assert nonzero
    H = solver_instance(ring)
    assert any(not H.top(c).on_basis("1").is_zero() for c in stored_chains(H) if len(c) == 3)
    assert verify_homotopy(H).ok
    assert verify_segal(H).ok


def test_solver_instance_has_no_length_two_chains_on_three_leaves():
    # 3-leaf trees have at most one inner edge, so every top component there has k = 0
    for t in [T("((1 2) 3)"), T("((1 3) 2)"), T("(1 (2 3))")]:
        assert morphism_chains(t, C3, 1) == []


def test_segal_mutant_has_nonzero_cone_homology():
    S = example_com(3, F2)
    t = T("((1 2) 3)")
    bad = with_scaled_segal(S, t, t, 2)  # 2 = 0 in F_2
    rep = verify_segal(bad)
    assert not rep.ok
    ranks = homology_ranks(mapping_cone(bad.segal(hom(t, t)), bad.segal_source(hom(t, t)), bad.A(t)))
    assert ranks == {0: 1, 1: 1}


def _as_oracle_gamma(t_root, t_inner):
    # substitute the word on {1,2} for the letter 1 in the word on {1,3}
    out = []
    for x in t_root:
        out.extend(t_inner if x == 1 else (x,))
    return tuple(out)


def test_as_operad_counts_and_coproduct_table():
    E = cochains_of_simplicial_operad(associative_operad(), 3)
    assert E.A(Tree.corolla([1, 2])).dim() == 2
    assert E.A(C3).dim() == 6
    t = T("((1 2) 3)")
    assert E.A(t).dim() == 4
    rho = E.rho(t, C3)
    images = {}
    for p in E.A(C3).all_labels():
        images[p] = rho.on_basis(p)
    # oracle: tabulate the composition map Σ_2 × Σ_2 -> Σ_3
    expected = {"".join(map(str, w)): FormalSum(QQ) for w in itertools.permutations((1, 2, 3))}
    for root in itertools.permutations((1, 3)):
        for inner in itertools.permutations((1, 2)):
            q = "".join(map(str, root)) + "|" + "".join(map(str, inner))
            expected["".join(map(str, _as_oracle_gamma(root, inner)))].add_term(q, 1)
    assert images == expected
    assert sum(len(v) for v in images.values()) == 4
    assert sum(1 for v in images.values() if v.is_zero()) == 2


def test_as_operad_ehopf_structure():
    E = cochains_of_simplicial_operad(associative_operad(), 3)
    rep = verify_ehopf(E)
    assert rep.ok, rep.summary()
    assert any(c.name.startswith("permutations") for c in rep.checks)


def test_forgetful_segal_maps_match_aw():
    E = cochains_of_simplicial_operad(associative_operad(), 3)
    D = forget_to_dg(E)
    assert verify_strict(D).ok
    assert verify_segal(D).ok
    checked = 0
    for t in D.trees():
        for m in morphisms_from(t):
            src = D.segal_source(m)
            aw = aw_segal_map(E, m)
            for lab in src.all_labels():
                assert D.segal(m).on_basis(lab) == aw.on_basis(lab)
                checked += 1
            if m.target.is_corolla():
                # single-vertex shape: the forgetful Segal map is the identity
                for lab in src.all_labels():
                    assert D.segal(m).on_basis(lab) == FormalSum.basis(QQ, lab[0])
    assert checked > 0


def test_forget_needs_the_e_structure():
    E = cochains_of_simplicial_operad(associative_operad(), 2)
    bare = EHopfSegal(QQ, E.A, E.rho, E.facet, None, 2, "bare")
    with pytest.raises(ValueError):
        forget_to_dg(bare)


def test_json_round_trip():
    for S in (example_com(3), solver_instance(F2), forget_to_dg(cochains_of_simplicial_operad(associative_operad(), 3))):
        text = to_json(S)
        back = from_json(text)
        assert to_json(back) == text
    H = from_json(to_json(solver_instance(F2)))
    assert verify_homotopy(H).ok


_H = solver_instance(QQ)
_CHAINS = stored_chains(_H)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(_CHAINS))
def test_generation_round_trip_property(chain):
    k = len(chain) - 2
    full = _H.generate(chain)
    src = _H.A(chain[-1])
    for lab in src.all_labels():
        top_cell = FormalSum(QQ, {y: c for (y, w), c in full.on_basis(lab).items() if w == "e" * k})
        assert top_cell == _H.top(chain).on_basis(lab).scale((-1) ** (k * src.degree_of(lab)))
