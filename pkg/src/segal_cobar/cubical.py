"""Cubical cochain algebras I^k = N^*(Δ^1)^{⊗k} and their chain duals.

A cochain word is a string over {0, 1, e} where 0, 1, e stand for 0#, 1#
and 01#.  Factors are numbered from right to left: the last character is
slot 1.  In lower grading e has degree -1 in a cochain word and +1 in a
chain word (where it stands for the fundamental simplex 01).

Faces d^i_ε: I^k -> I^{k-1}, degeneracies s^j: I^{k-1} -> I^k and the
E-algebra structure are defined here; the connection ∇* is computed as the
dual of ∇_* = N_*(min) ∘ EM rather than typed in.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from .barratt_eccles import (
    PermSimplex, be_arity, be_basis, be_degree, be_diagonal, coalgebra_act, dual_cochain_act,
)
from .ring_linear import (
    QQ, Complex, FormalSum, GradedHom, Report, Ring, check_chain_map, homology_ranks, square_zero_check,
)
from .simplicial_chains import connection_max, connection_min, interval_basis

LETTERS = "01e"
_SIMPLEX = {"0": (0,), "1": (1,), "e": (0, 1)}
_LETTER = {v: k for k, v in _SIMPLEX.items()}

UNIT_LETTER_SUM = ("0", "1")  # s_0(1) = 0# + 1#


def cube_words(k: int) -> List[str]:
    return ["".join(t) for t in itertools.product(LETTERS, repeat=k)]


def check_word(w: str) -> str:
    if any(c not in LETTERS for c in w):
        raise ValueError(f"bad cube word {w!r}; letters must be 0, 1 or e")
    return w


def _odd(w: str) -> int:
    return w.count("e")


def cochain_degree(w: str) -> int:
    return -w.count("e")


def chain_degree(w: str) -> int:
    return w.count("e")


def _pos(k: int, i: int) -> int:
    # string index of slot i in a word of length k
    return k - i


# complexes

def _letter_coboundary(c: str) -> Tuple[Tuple[str, int], ...]:
    # δ(0#) = -01#, δ(1#) = +01#
    return {"0": (("e", -1),), "1": (("e", 1),), "e": ()}[c]


def _letter_boundary(c: str) -> Tuple[Tuple[str, int], ...]:
    # ∂(01) = 1 - 0
    return {"e": (("1", 1), ("0", -1)), "0": (), "1": ()}[c]


def _koszul_letterwise(w: str, table, ring: Ring) -> FormalSum:
    out = FormalSum(ring)
    odd = 0
    for p, c in enumerate(w):
        for y, cy in table(c):
            out.add_term(w[:p] + y + w[p + 1:], cy * (-1) ** odd)
        odd += c == "e"
    return out


def cube_coboundary(w: str, ring: Ring = QQ) -> FormalSum:
    return _koszul_letterwise(w, _letter_coboundary, ring)


def cube_boundary(w: str, ring: Ring = QQ) -> FormalSum:
    return _koszul_letterwise(w, _letter_boundary, ring)


def cube_cochains(k: int, ring: Ring = QQ) -> Complex:
    basis: Dict[int, List[str]] = {}
    for w in cube_words(k):
        basis.setdefault(cochain_degree(w), []).append(w)
    return Complex(ring, basis, lambda w: cube_coboundary(w, ring), f"I^{k}", label_format=lambda w: w or "1")


def cube_chains(k: int, ring: Ring = QQ) -> Complex:
    basis: Dict[int, List[str]] = {}
    for w in cube_words(k):
        basis.setdefault(chain_degree(w), []).append(w)
    return Complex(ring, basis, lambda w: cube_boundary(w, ring), f"N(D1)^{k}", label_format=lambda w: w or "1")


# the connection, from N_*(min) ∘ EM by duality

@lru_cache(maxsize=None)
def chain_connection(a: str, b: str, kind: str = "min") -> Tuple[Tuple[str, int], ...]:
    """∇_*(a ⊗ b) for letters a, b, as (letter, coefficient) pairs."""
    fn = {"min": connection_min, "max": connection_max}[kind]
    img = fn(_SIMPLEX[a], _SIMPLEX[b])
    return tuple((_LETTER[s], c) for s, c in img.items())


@lru_cache(maxsize=None)
def cochain_connection(a: str) -> Tuple[Tuple[str, int], ...]:
    """∇*(a#) = Σ <a#, ∇_*(b ⊗ c)> (b# ⊗ c#), with the Koszul pairing sign."""
    out = []
    for b, c in itertools.product(LETTERS, repeat=2):
        for y, cy in chain_connection(b, c):
            if y == a:
                out.append((b + c, cy * (-1) ** (_odd(b) * _odd(c))))
    return tuple(sorted(out))


# cochain faces and degeneracies

def face(w: str, i: int, eps: int, ring: Ring = QQ) -> FormalSum:
    """d^i_ε: I^k -> I^{k-1}; d_0 evaluates at vertex 1, d_1 at vertex 0."""
    k = len(check_word(w))
    if not 1 <= i <= k:
        raise ValueError(f"face index {i} out of range 1..{k}")
    if eps not in (0, 1):
        raise ValueError("ε must be 0 or 1")
    p = _pos(k, i)
    out = FormalSum(ring)
    if w[p] == ("1" if eps == 0 else "0"):
        out.add_term(w[:p] + w[p + 1:], 1)
    return out


def degeneracy(w: str, j: int, ring: Ring = QQ) -> FormalSum:
    """s^j: I^{k-1} -> I^k; s^0 and s^k insert 0# + 1#, interior s^j applies ∇* at slot j."""
    n = len(check_word(w))
    k = n + 1
    if not 0 <= j <= k:
        raise ValueError(f"degeneracy index {j} out of range 0..{k}")
    out = FormalSum(ring)
    if j == 0:
        for c in UNIT_LETTER_SUM:
            out.add_term(w + c, 1)
    elif j == k:
        for c in UNIT_LETTER_SUM:
            out.add_term(c + w, 1)
    else:
        p = _pos(n, j)
        for y, cy in cochain_connection(w[p]):
            out.add_term(w[:p] + y + w[p + 1:], cy)
    return out


def extend_word_map(f, x: FormalSum) -> FormalSum:
    out = FormalSum(x.ring)
    for w, c in x.terms.items():
        out.add_scaled(f(w), c)
    return out


# chain cofaces and codegeneracies

def chain_coface(w: str, i: int, eps: int, ring: Ring = QQ) -> FormalSum:
    """d_i^ε: N^{⊗k-1} -> N^{⊗k}, inserting the vertex d^ε(1) at slot i (d^0 -> 1, d^1 -> 0)."""
    n = len(check_word(w))
    if not 1 <= i <= n + 1:
        raise ValueError(f"coface index {i} out of range 1..{n + 1}")
    if eps not in (0, 1):
        raise ValueError("ε must be 0 or 1")
    p = n - i + 1
    return FormalSum.basis(ring, w[:p] + ("1" if eps == 0 else "0") + w[p:])


def chain_codegeneracy(w: str, j: int, ring: Ring = QQ, kind: str = "min") -> FormalSum:
    """s_j: N^{⊗k} -> N^{⊗k-1}; s_0, s_k apply s^0 at the end slot, interior s_j merges slots j+1, j by ∇_*."""
    k = len(check_word(w))
    if not 0 <= j <= k:
        raise ValueError(f"codegeneracy index {j} out of range 0..{k}")
    out = FormalSum(ring)
    if j == 0 or j == k:
        p = _pos(k, 1) if j == 0 else 0
        if w[p] != "e":
            out.add_term(w[:p] + w[p + 1:], 1)
        return out
    p = _pos(k, j + 1)
    for y, cy in chain_connection(w[p], w[p + 1], kind):
        out.add_term(w[:p] + y + w[p + 2:], cy)
    return out


def pair(a: str, v: str) -> int:
    """<a, v> for a cochain word a and a chain word v, with the Koszul sign."""
    if a != v:
        return 0
    m = _odd(a)
    return -1 if (m * (m - 1) // 2) % 2 else 1


# products

@lru_cache(maxsize=None)
def _letter_cup(a: str, b: str) -> Tuple[Tuple[str, int], ...]:
    # (a ∪ b)(σ) = Σ (-1)^{|b||σ'|} a(σ') b(σ'') over AW(σ) = Σ σ' ⊗ σ''
    out = []
    for s in interval_basis():
        q = len(s) - 1
        val = 0
        for k in range(q + 1):
            front, back = s[:k + 1], s[k:]
            if _SIMPLEX[a] == front and _SIMPLEX[b] == back:
                val += (-1) ** (_odd(b) * (len(front) - 1))
        if val:
            out.append((_LETTER[s], val))
    return tuple(out)


def cube_product(a: str, b: str, ring: Ring = QQ) -> FormalSum:
    """Factorwise cup product with the Koszul interchange sign."""
    if len(check_word(a)) != len(check_word(b)):
        raise ValueError("cube_product needs words of equal length")
    e = sum(_odd(b[p]) * _odd(a[q]) for p in range(len(a)) for q in range(p + 1, len(a)))
    terms = [FormalSum.basis(ring, "", (-1) ** e)]
    for x, y in zip(a, b):
        nxt = FormalSum(ring)
        for t, c in terms[0].terms.items():
            for z, cz in _letter_cup(x, y):
                nxt.add_term(t + z, c * cz)
        terms[0] = nxt
    return terms[0]


def cube_unit(k: int, ring: Ring = QQ) -> FormalSum:
    """The unit (0# + 1#)^{⊗k}."""
    return FormalSum.from_pairs(ring, (("".join(t), 1) for t in itertools.product(UNIT_LETTER_SUM, repeat=k)))


@lru_cache(maxsize=None)
def _letter_act(x: PermSimplex, letters: Tuple[str, ...], ring: Ring) -> Tuple[Tuple[str, int], ...]:
    args = [FormalSum.basis(ring, ("#", _SIMPLEX[c])) for c in letters]
    img = dual_cochain_act(x, args, 1, ring)
    return tuple((_LETTER[s], c) for (_, s), c in img.items())


def iterated_diagonal(x: PermSimplex, k: int) -> List[Tuple[PermSimplex, ...]]:
    """Left-normed (k-1)-fold diagonal: all splittings into k consecutive faces."""
    n = len(x) - 1
    out = []
    for cuts in itertools.combinations_with_replacement(range(n + 1), k - 1):
        bounds = (0,) + cuts + (n,)
        out.append(tuple(x[bounds[f]:bounds[f + 1] + 1] for f in range(k)))
    return out


def cube_e_act(x: PermSimplex, words: Sequence[str], ring: Ring = QQ) -> FormalSum:
    """x(a_1, ..., a_r) in I^k through the diagonal and the action on each factor."""
    r = be_arity(x)
    if len(words) != r:
        raise ValueError(f"expected {r} arguments, got {len(words)}")
    k = len(check_word(words[0])) if words else 0
    if any(len(check_word(w)) != k for w in words):
        raise ValueError("cube_e_act needs words of equal length")
    out = FormalSum(ring)
    if k == 0:
        if be_degree(x) == 0:
            out.add_term("", 1)
        return out
    for pieces in iterated_diagonal(x, k):
        # Koszul sign of (x1..xk)(a_1..a_r) -> (x1 a_{1,1}..a_{r,1}) ... (xk a_{1,k}..a_{r,k})
        src = [(("x", f), be_degree(pieces[f])) for f in range(k)]
        src += [(("a", f, i), _odd(words[i][f])) for i in range(r) for f in range(k)]
        rank = {key: n for n, key in enumerate(
            key for f in range(k) for key in [("x", f)] + [("a", f, i) for i in range(r)])}
        e = 0
        for (p, dp), (q, dq) in itertools.combinations(src, 2):
            if rank[p] > rank[q]:
                e += dp * dq
        acc = {"": (-1) ** e}
        for f in range(k):
            vals = _letter_act(pieces[f], tuple(w[f] for w in words), ring)
            if not vals:
                acc = {}
                break
            acc = {t + z: c * cz for t, c in acc.items() for z, cz in vals}
        for t, c in acc.items():
            out.add_term(t, c)
    return out


def cube_e_act_sums(x: PermSimplex, args: Sequence[FormalSum]) -> FormalSum:
    ring = args[0].ring
    out = FormalSum(ring)
    for combo in itertools.product(*(a.terms.items() for a in args)):
        coef = 1
        for _, c in combo:
            coef *= c
        out.add_scaled(cube_e_act(x, [w for w, _ in combo], ring), coef)
    return out


def connection_vanishing(x: PermSimplex, ring: Ring = QQ) -> FormalSum:
    """Σ_{(x)} ∇_*^{⊗r} sh(x'_*(01) ⊗ x''_*(01)), which vanishes for ∇* to be an E-morphism."""
    return connection_morphism_on_chains(x, "e", "e", ring)[1]


def connection_morphism_on_chains(x: PermSimplex, a: str, b: str, ring: Ring = QQ) -> Tuple[FormalSum, FormalSum]:
    """Both sides of x_*(∇_*(a ⊗ b)) = Σ ∇_*^{⊗r} sh(x'_*(a) ⊗ x''_*(b)) for letters a, b."""
    r = be_arity(x)
    lhs = FormalSum(ring)
    for y, cy in chain_connection(a, b):
        for t, ct in coalgebra_act(x, _SIMPLEX[y], ring).items():
            lhs.add_term("".join(_LETTER[s] for s in t), cy * ct)
    rhs = FormalSum(ring)
    for (x1, x2), c in be_diagonal(x, ring).items():
        c = c * (-1) ** (be_degree(x2) * _odd(a))
        for u, cu in coalgebra_act(x1, _SIMPLEX[a], ring).items():
            for v, cv in coalgebra_act(x2, _SIMPLEX[b], ring).items():
                e = sum((len(v[p]) - 1) * (len(u[q]) - 1) for p in range(r) for q in range(p + 1, r))
                acc = {"": c * cu * cv * (-1) ** e}
                for s, t in zip(u, v):
                    vals = chain_connection(_LETTER[s], _LETTER[t])
                    acc = {w + z: cc * cz for w, cc in acc.items() for z, cz in vals}
                for w, cc in acc.items():
                    rhs.add_term(w, cc)
    return lhs, rhs


def be_complex(r: int, max_degree: int, ring: Ring = QQ) -> Complex:
    """E(r) truncated to degrees <= max_degree (a subcomplex)."""
    from .barratt_eccles import be_differential, format_perm_simplex
    basis = {n: be_basis(r, n) for n in range(max_degree + 1)}
    return Complex(ring, basis, lambda x: be_differential(x, ring), f"E({r})", label_format=format_perm_simplex)


# exhaustive verification

def _insert_unit(u: str, j: int, ring: Ring) -> FormalSum:
    p = len(u) - (j - 1)
    return FormalSum(ring, {u[:p] + "0" + u[p:]: 1, u[:p] + "1" + u[p:]: 1})


def _face_degeneracy_identities(k_max: int, ring: Ring) -> Tuple[int, List[str]]:
    # identities read in diagrammatic order: the left map is applied first
    n, bad = 0, []
    for k in range(1, k_max + 1):
        for w in cube_words(k):
            for i, j in itertools.combinations(range(1, k + 1), 2):
                for e1, e2 in itertools.product((0, 1), repeat=2):
                    n += 1
                    lhs = extend_word_map(lambda u: face(u, i, e2, ring), face(w, j, e1, ring))
                    rhs = extend_word_map(lambda u: face(u, j - 1, e1, ring), face(w, i, e2, ring))
                    if lhs != rhs:
                        bad.append(f"d^{j}_{e1} d^{i}_{e2} on {w}")
        for w in cube_words(k - 1):
            for j in range(0, k + 1):
                sw = degeneracy(w, j, ring)
                for i in range(1, k + 1):
                    for eps in (0, 1):
                        lhs = extend_word_map(lambda u: face(u, i, eps, ring), sw)
                        if i < j:
                            rhs = extend_word_map(lambda u: degeneracy(u, j - 1, ring), face(w, i, eps, ring))
                        elif i > j + 1:
                            rhs = extend_word_map(lambda u: degeneracy(u, j, ring), face(w, i - 1, eps, ring))
                        elif eps == 0:
                            rhs = FormalSum.basis(ring, w)
                        elif 1 <= j <= k - 1:
                            rhs = extend_word_map(lambda u: _insert_unit(u, j, ring), face(w, j, 1, ring))
                        else:
                            continue
                        n += 1
                        if lhs != rhs:
                            bad.append(f"s^{j} d^{i}_{eps} on {w or '1'}")
                for i in range(0, j + 1):
                    n += 1
                    lhs = extend_word_map(lambda u: degeneracy(u, i, ring), sw)
                    rhs = extend_word_map(lambda u: degeneracy(u, j + 1, ring), degeneracy(w, i, ring))
                    if lhs != rhs:
                        bad.append(f"s^{j} s^{i} on {w or '1'}")
    return n, bad


def min_max_distribution(ring: Ring = QQ) -> Tuple[int, List[str]]:
    """∇max(∇min(s2 ⊗ s1) ⊗ t) = Σ ∇min(∇max(s2 ⊗ t') ⊗ ∇max(s1 ⊗ t'')) on all 27 letter triples."""
    aw = {"0": [("0", "0")], "1": [("1", "1")], "e": [("0", "e"), ("e", "1")]}
    bad = []
    triples = list(itertools.product(LETTERS, repeat=3))
    for s2, s1, t in triples:
        lhs = FormalSum(ring)
        for y, cy in chain_connection(s2, s1):
            for z, cz in chain_connection(y, t, "max"):
                lhs.add_term(z, cy * cz)
        rhs = FormalSum(ring)
        for t1, t2 in aw[t]:
            sign = (-1) ** (_odd(s1) * _odd(t1))
            for u, cu in chain_connection(s2, t1, "max"):
                for v, cv in chain_connection(s1, t2, "max"):
                    for z, cz in chain_connection(u, v):
                        rhs.add_term(z, sign * cu * cv * cz)
        if lhs != rhs:
            bad.append(s2 + s1 + t)
    return len(triples), bad


def verify_cubical(k_max: int = 4, ring: Ring = QQ, r_max: int = 3, d_max: int = 3) -> Report:
    """Face/degeneracy identities, chain-map and duality checks, and the ∇* E-morphism identities."""
    rep = Report(f"cubical cochains, k <= {k_max}")
    n, bad = _face_degeneracy_identities(k_max, ring)
    rep.add("face and degeneracy identities", n, bad)

    bad = []
    for k in range(k_max + 1):
        for c in (cube_cochains(k, ring), cube_chains(k, ring)):
            if not square_zero_check(c).ok or homology_ranks(c) != {0: 1}:
                bad.append(c.name)
    rep.add("I^k and N^k are contractible complexes", 2 * (k_max + 1), bad)

    bad, n = [], 0
    for k in range(1, k_max + 1):
        src, tgt = cube_cochains(k, ring), cube_cochains(k - 1, ring)
        for i in range(1, k + 1):
            for eps in (0, 1):
                n += 1
                f = GradedHom(ring, 0, lambda w, i=i, eps=eps: face(w, i, eps, ring))
                if not check_chain_map(f, src, tgt).ok:
                    bad.append(f"d^{i}_{eps} on I^{k}")
        for j in range(0, k + 1):
            n += 1
            f = GradedHom(ring, 0, lambda w, j=j: degeneracy(w, j, ring))
            if not check_chain_map(f, tgt, src).ok:
                bad.append(f"s^{j} into I^{k}")
    rep.add("faces and degeneracies are chain maps", n, bad)

    bad, n = [], 0
    for k in range(1, k_max + 1):
        for a in cube_words(k):
            for v in cube_words(k - 1):
                for i in range(1, k + 1):
                    for eps in (0, 1):
                        n += 1
                        lhs = sum(c * pair(b, v) for b, c in face(a, i, eps, ring).items())
                        rhs = sum(c * pair(a, u) for u, c in chain_coface(v, i, eps, ring).items())
                        if ring(lhs) != ring(rhs):
                            bad.append(f"<d^{i}_{eps} {a}, {v}>")
        for a in cube_words(k - 1):
            for v in cube_words(k):
                for j in range(0, k + 1):
                    n += 1
                    lhs = sum(c * pair(b, v) for b, c in degeneracy(a, j, ring).items())
                    rhs = sum(c * pair(a, u) for u, c in chain_codegeneracy(v, j, ring).items())
                    if ring(lhs) != ring(rhs):
                        bad.append(f"<s^{j} {a or '1'}, {v}>")
    rep.add("chain operators are dual to cochain operators", n, bad)

    bad, n = [], 0
    for r in range(1, r_max + 1):
        for d in range(d_max + 1):
            for x in be_basis(r, d):
                n += 1
                if not connection_vanishing(x, ring).is_zero():
                    bad.append(f"vanishing fails for {x}")
                for a, b in itertools.product(LETTERS, repeat=2):
                    lhs, rhs = connection_morphism_on_chains(x, a, b, ring)
                    if lhs != rhs:
                        bad.append(f"{x} on {a}{b}")
    rep.add("connection is a morphism of E-coalgebras", n, bad)

    n, bad = min_max_distribution(ring)
    rep.add("min-max distribution", n, bad)
    return rep
