import itertools

import pytest
from hypothesis import given, settings, strategies as st

from segal_cobar.trees import (
    Tree, all_chains, decompose, enumerate_reduced, graft, graft_along, hom, identity, morphism_chains,
    preimage, vertex_order,
)


def T(s):
    return Tree.parse(s)


def _brute_force_trees(leaves):
    # oracle: every laminar family of subsets (size >= 2) containing the full set,
    # with each member split into >= 2 pieces by its maximal sub-members and leaves
    full = frozenset(leaves)
    cands = [frozenset(c) for n in range(2, len(leaves)) for c in itertools.combinations(leaves, n)]
    out = set()
    for k in range(len(cands) + 1):
        for fam in itertools.combinations(cands, k):
            if all(a <= b or b <= a or not (a & b) for a, b in itertools.combinations(fam, 2)):
                out.add(Tree.from_vertices((full,) + fam))
    return out


def test_enumeration_counts():
    assert enumerate_reduced(1) == []
    three = enumerate_reduced(3)
    assert len(three) == 4
    assert sum(t.is_corolla() for t in three) == 1
    four = enumerate_reduced(4)
    assert len(four) == 26
    by_vertices = [len(t.vertices()) for t in four]
    assert (by_vertices.count(1), by_vertices.count(2), by_vertices.count(3)) == (1, 10, 15)
    for r in (2, 3, 4):
        assert set(enumerate_reduced(r)) == _brute_force_trees(tuple(range(1, r + 1)))
    with pytest.raises(ValueError):
        enumerate_reduced(0)


def test_syntax_and_canonical_form():
    t = T("(3 (2 1))")
    assert str(t) == "((1 2) 3)"
    assert T(str(t)) == t
    assert T("((1 3) 2)") != T("((1 2) 3)")
    with pytest.raises(ValueError):
        T("((1 2) 3")
    with pytest.raises(ValueError):
        T("(1 1)")
    with pytest.raises(ValueError):
        T("1")


def test_non_reduced_trees_are_flagged():
    t = T("((1 2))")
    assert not t.is_reduced()
    with pytest.raises(ValueError):
        t.vertices()


def test_contract():
    t = T("((1 2) 3)")
    chain = t.contract([frozenset({1, 2})])
    assert chain == [t, Tree.corolla([1, 2, 3])]
    assert t.contract([]) == [t]
    with pytest.raises(ValueError):
        t.contract([frozenset({1, 2, 3})])
    u = T("((1 2) (3 4))")
    with pytest.raises(ValueError):
        u.contract([frozenset({1, 2}), frozenset({1, 2})])
    for v in enumerate_reduced(4):
        assert v.contract(v.inner_edges())[-1] == Tree.corolla([1, 2, 3, 4])


def test_hom_examples():
    b = T("((1 2) 3)")
    c = Tree.corolla([1, 2, 3])
    assert hom(b, b) == identity(b)
    assert hom(c, b) is None
    m = hom(b, c)
    assert m is not None and m.contracted == {frozenset({1, 2})}
    d = decompose(m)
    assert d.subtrees() == [b]
    assert hom(T("((1 3) 2)"), b) is None


def test_hom_matches_contraction_subsets():
    for r in (3, 4):
        trees = enumerate_reduced(r)
        for t in trees:
            reachable = {}
            edges = t.inner_edges()
            for k in range(len(edges) + 1):
                for sub in itertools.combinations(edges, k):
                    reachable.setdefault(t.contract(list(sub))[-1], []).append(sub)
            for s in trees:
                m = hom(t, s)
                assert (m is not None) == (s in reachable)
                if m is not None:
                    assert len(reachable[s]) == 1
                    assert m.contracted == frozenset(reachable[s][0])


def test_graft_examples():
    g = graft(Tree.corolla([1, 3]), 1, Tree.corolla([1, 2]))
    assert g == T("((1 2) 3)")
    assert g.contract(g.inner_edges())[-1] == Tree.corolla([1, 2, 3])
    with pytest.raises(ValueError):
        graft(Tree.corolla([1, 3]), 1, Tree.corolla([2, 4]))
    with pytest.raises(ValueError):
        graft(Tree.corolla([1, 3]), 1, Tree.corolla([1, 3]))


def test_vertex_order():
    assert vertex_order(Tree.corolla([1, 2])) == [frozenset({1, 2})]
    assert vertex_order(T("((1 2) 3)")) == [frozenset({1, 2, 3}), frozenset({1, 2})]
    assert vertex_order(T("((1 3) (2 4))")) == [frozenset({1, 2, 3, 4}), frozenset({1, 3}), frozenset({2, 4})]
    t = T("(4 (2 3) 1)")
    assert vertex_order(t) == vertex_order(T(str(t)))


def test_decompositions_regraft():
    for r in (3, 4, 5):
        for t in enumerate_reduced(r):
            for s in enumerate_reduced(r):
                m = hom(t, s)
                if m is None:
                    continue
                d = decompose(m)
                assert graft_along(s, d.subtrees()) == t
                # σ_v is the preimage of the corolla at v
                for v, part in zip(s.vertices(), d.parts):
                    assert preimage(m, [v]) == part


def test_decomposition_associative():
    for t in enumerate_reduced(4):
        for s in enumerate_reduced(4):
            m1 = hom(t, s)
            if m1 is None:
                continue
            for u in enumerate_reduced(4):
                m2 = hom(s, u)
                if m2 is None:
                    continue
                d1, d2, d = decompose(m1), decompose(m2), decompose(m1.then(m2))
                parts1 = dict(zip(s.vertices(), d1.parts))
                for w, part in zip(u.vertices(), d2.parts):
                    combined = frozenset().union(*(parts1[v] for v in part))
                    assert combined == d.parts[u.vertices().index(w)]


def _subset_chains(t, s, k):
    # brute force: strictly increasing chains of contracted-edge subsets
    m = hom(t, s)
    extra = list(m.contracted)
    subsets = [frozenset(c) for n in range(1, len(extra)) for c in itertools.combinations(extra, n)]
    count = 0
    for chain in itertools.permutations(subsets, k):
        if all(a < b for a, b in zip(chain, chain[1:])):
            count += 1
    return count


def test_chain_counts_match_brute_force():
    for r in (3, 4):
        for t in enumerate_reduced(r):
            for s in enumerate_reduced(r):
                m = hom(t, s)
                if m is None or m.is_identity():
                    continue
                for k in range(len(m.contracted)):
                    assert len(morphism_chains(t, s, k)) == _subset_chains(t, s, k)
                assert len(all_chains(t, s)) == sum(_subset_chains(t, s, k) for k in range(len(m.contracted)))


def _pairs_into(s):
    # composable pairs θ -> τ -> s (identities allowed)
    trees = enumerate_reduced(s.leaves)
    out = []
    for tau in trees:
        if hom(tau, s) is None:
            continue
        for theta in trees:
            if hom(theta, tau) is not None:
                out.append((theta, tau))
    return out


def test_tree_decomposition_chain_bijection():
    # composable pairs into s correspond to families of pairs into the σ_u of a decomposition
    for r in (3, 4):
        for s in enumerate_reduced(r):
            if len(s.vertices()) != 2:
                continue
            whole = _pairs_into(s)
            for u in enumerate_reduced(r):
                m = hom(s, u)
                if m is None:
                    continue
                d = decompose(m)
                fams = list(itertools.product(*(_pairs_into(sig) for sig in d.subtrees())))
                images = set()
                for fam in fams:
                    theta = graft_along(u, [p[0] for p in fam])
                    tau = graft_along(u, [p[1] for p in fam])
                    images.add((theta, tau))
                assert len(images) == len(fams)
                assert images == set(whole)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=5), st.data())
def test_random_relabel_and_reparse(r, data):
    t = data.draw(st.sampled_from(enumerate_reduced(r)))
    assert Tree.parse(str(t)) == t
    assert Tree.from_vertices(t.vertices()) == t
    perm = data.draw(st.permutations(list(range(1, r + 1))))

    def relabel(node):
        return perm[node - 1] if isinstance(node, int) else tuple(relabel(c) for c in node)

    u = Tree(relabel(t.root))
    assert u.is_reduced() and len(u.vertices()) == len(t.vertices())


def test_morphism_record():
    t = T("((1 2) (3 4))")
    m = hom(t, Tree.corolla([1, 2, 3, 4]))
    assert m.to_record() == {"source": "((1 2) (3 4))", "target": "(1 2 3 4)", "contracted": [1, 2]}
