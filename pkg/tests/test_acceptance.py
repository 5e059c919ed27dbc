"""Acceptance gate: one check per criterion, each printing a single PASS/FAIL line."""

import time

import pytest

from segal_cobar.barratt_eccles import verify_barratt_eccles
from segal_cobar.cobar import (
    cobar_homotopy, cobar_strict, differential_table, identity_morphism, induced_morphism, operad_verify,
    per_m_relation, solver_morphism,
)
from segal_cobar.cubical import verify_cubical
from segal_cobar.einf_algebra import free_ealgebra, verify_comparison
from segal_cobar.ring_linear import F2, QQ, FormalSum, homology_ranks, rank_of, square_zero_check
from segal_cobar.segal_cooperads import (
    associative_operad, aw_segal_map, cochains_of_simplicial_operad, example_com, forget_to_dg, morphisms_from,
    solver_instance, stored_chains, verify_homotopy, verify_segal, verify_strict,
)
from segal_cobar.w_construction import treesq_verify, zigzag_verify


def _failures(rep):
    return [c.name for c in rep.failed()]


def criterion_1():
    rep = verify_barratt_eccles(3, 2, QQ)
    return _failures(rep), f"{sum(c.count for c in rep.checks)} instances"


def criterion_2():
    bad, n = [], 0
    for ring in (QQ, F2):
        A = free_ealgebra(ring, {"x0": 0, "x1": 1}, 2, 3, gen_diff={"x1": {"x0": 1}}, name="A")
        B = free_ealgebra(ring, {"y0": 0, "y1": 1}, 2, 3, name="B")
        rep = verify_comparison(A, B, max_degree=2, max_arity=3)
        bad += [f"{ring.name}: {c}" for c in _failures(rep)]
        n += rep.data["words"] + rep.data["tensors"]
    return bad, f"{n} elements over q and f2"


def criterion_3():
    rep = verify_cubical(4, QQ, r_max=3, d_max=3)
    bad = _failures(rep)
    dist = next(c for c in rep.checks if c.name == "min-max distribution")
    if dist.count != 27:
        bad.append(f"min-max distribution covered {dist.count} triples")
    return bad, f"{len(rep.checks)} families"


def criterion_4():
    O = cobar_strict(example_com(4))
    bad = []
    for r, expected in ((2, {-1: 1}), (3, {-2: 2}), (4, {-3: 6})):
        c = O(tuple(range(1, r + 1)))
        if not square_zero_check(c).ok:
            bad.append(f"d^2 != 0 in arity {r}")
        if homology_ranks(c) != expected:
            bad.append(f"arity {r}: {homology_ranks(c)}")
    bad += _failures(operad_verify(O))
    return bad, "ranks 1, 2, 6"


def criterion_5():
    bad = []
    com = example_com(4)
    aas = forget_to_dg(cochains_of_simplicial_operad(associative_operad(), 4))
    for A in (com, aas):
        rep = zigzag_verify(A, 4)
        bad += [f"{A.name}: {c}" for c in _failures(rep)]
    return bad, "Com and A_As, 4 leaves"


def criterion_6():
    rep = treesq_verify(4, QQ)
    return _failures(rep), f"{rep.checks[0].count} pairs"


def criterion_7():
    bad = []
    for S in (example_com(4), forget_to_dg(cochains_of_simplicial_operad(associative_operad(), 3))):
        Os, Oh = cobar_strict(S), cobar_homotopy(S)
        for r in range(2, S.r_max + 1):
            L = tuple(range(1, r + 1))
            if differential_table(Os, L) != differential_table(Oh, L):
                bad.append(f"{S.name}: strict and homotopy cobar differ in arity {r}")
    H = solver_instance(F2)
    nonzero = [c for c in stored_chains(H) if len(c) > 2 and not H.top(c).on_basis("1").is_zero()]
    if not nonzero:
        bad.append("solver instance has no higher homotopy")
    bad += _failures(verify_homotopy(H)) + _failures(verify_segal(H))
    O = cobar_homotopy(H)
    bad += _failures(operad_verify(O))
    for m in (1, 2, 3):
        count, wrong = per_m_relation(O, (1, 2, 3, 4), m)
        if wrong or not count:
            bad.append(f"per-m relation m={m}")
    return bad, f"{len(nonzero)} higher homotopies over f2"


def criterion_8():
    bad = []
    S = example_com(4)
    F = induced_morphism(identity_morphism(S))
    bad += _failures(F.verify())
    O = cobar_strict(S)
    for r in (2, 3, 4):
        for lab in O(tuple(range(1, r + 1))).all_labels():
            if F.part().on_basis(lab) != FormalSum.basis(QQ, lab):
                bad.append(f"identity moves {lab}")
    phi = solver_morphism(F2)
    if not any(phi.top(c) is not None and not phi.top(c).on_basis("1").is_zero() for c in stored_chains(phi.source)):
        bad.append("solver morphism has no higher component")
    Fs = induced_morphism(phi)
    bad += _failures(Fs.verify(3))
    for m in (1, 2):
        if Fs.per_m_relation((1, 2, 3), m)[1]:
            bad.append(f"morphism per-m relation m={m}")
    return bad, "identity and a solver morphism"


def criterion_9():
    bad, n = [], 0
    E = cochains_of_simplicial_operad(associative_operad(), 3)
    D = forget_to_dg(E)
    bad += _failures(verify_strict(D)) + _failures(verify_segal(D))
    for t in D.trees():
        for m in morphisms_from(t):
            src, tgt = D.segal_source(m), D.A(t)
            f, aw = D.segal(m), aw_segal_map(E, m)
            labs = src.all_labels()
            images = [dict(f.on_basis(lab).items()) for lab in labs]
            if len(labs) != len(tgt.all_labels()) or rank_of(images, QQ) != len(labs):
                bad.append(f"Segal map of {m} is not an isomorphism")
            for lab in labs:
                n += 1
                if f.on_basis(lab) != aw.on_basis(lab):
                    bad.append(f"EM and AW disagree on {lab}")
    return bad, f"{n} basis elements"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    start = time.perf_counter()
    bad, detail = CRITERIA[n - 1]()
    line = f"criterion {n}: {'PASS' if not bad else 'FAIL'} ({detail}, {time.perf_counter() - start:.1f}s)"
    if bad:
        line += " " + "; ".join(bad[:5])
    with capsys.disabled():
        print("\n" + line)
    assert not bad, line
