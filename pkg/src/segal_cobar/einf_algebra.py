"""Truncated free algebras over the Barratt-Eccles operad.

An element of the free algebra E(X) is a combination of words w(g_1, ..., g_r)
with w a simplex of E(r) and g_i generator names.  Words are taken modulo
the symmetric group relation (s·w)(g_1, ..., g_r) = ± w(g_{s(1)}, ..., g_{s(r)})
and stored through a canonical representative: generators sorted by the
alphabet order, then the least simplex over the stabilizer of that sequence.

Free algebras are truncated in two directions, the simplicial degree of the
operation and the arity of the word.  Evaluation that would leave the
truncation raises TruncationOverflow instead of dropping terms.
"""

from __future__ import annotations

import itertools
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .barratt_eccles import (
    PermSimplex, be_basis, be_compose, be_differential, be_sym, direct_sum, format_perm_simplex,
    is_nondegenerate, parse_perm_simplex, perm_inverse,
)
from .ring_linear import QQ, Complex, FormalSum, GradedHom, Report, Ring, format_sum, sort_key, tensor
from .simplicial_chains import lattice_paths

Word = Tuple[PermSimplex, Tuple[str, ...]]

UNIT_OP: PermSimplex = ((),)
MU: PermSimplex = ((1, 2),)


class TruncationOverflow(ArithmeticError):
    """An operation produced a word outside the stored truncation."""


def restrict(w: Sequence[int], lo: int, hi: int) -> Tuple[int, ...]:
    """Subsequence of the values in (lo, hi], shifted down by lo."""
    return tuple(v - lo for v in w if lo < v <= hi)


def format_word(word: Word) -> str:
    w, gens = word
    return format_perm_simplex(w) + "(" + ",".join(gens) + ")"


def parse_word(text: str) -> Word:
    text = text.strip()
    cut = text.rfind(")(")
    if cut < 0 or not text.endswith(")"):
        raise ValueError(f"bad word {text!r}; expected e.g. ([1 2],[2 1])(g1,g2)")
    w = parse_perm_simplex(text[:cut + 1])
    inner = text[cut + 2:-1].strip()
    gens = tuple(g.strip() for g in inner.split(",")) if inner else ()
    if len(gens) != len(w[0]):
        raise ValueError(f"arity mismatch in {text!r}")
    return w, gens


class FreeEAlgebra:
    """E(X) on a finite graded alphabet, truncated in degree and arity.

    ``generators`` maps names to degrees, in alphabet order.  ``gen_diff``
    optionally maps a name to a dict name -> coefficient, a differential on
    the span of generators.
    """

    def __init__(self, ring: Ring, generators: Mapping[str, int], max_degree: int, max_arity: int,
                 gen_diff: Optional[Mapping[str, Mapping[str, object]]] = None, name: str = "E(X)"):
        self.ring = ring
        self.gen_degree: Dict[str, int] = dict(generators)
        self.order = {g: i for i, g in enumerate(generators)}
        self.max_degree = max_degree
        self.max_arity = max_arity
        self.gen_diff = {g: dict(gen_diff.get(g, {})) for g in generators} if gen_diff else {g: {} for g in generators}
        self.name = name
        self._complex: Optional[Complex] = None

    # canonical forms

    def word_degree(self, word: Word) -> int:
        w, gens = word
        return len(w) - 1 + sum(self.gen_degree[g] for g in gens)

    def canonical(self, w: PermSimplex, gens: Sequence[str]) -> Optional[Tuple[Word, int]]:
        """Canonical (word, sign) with w(gens) = sign * word, or None when w is degenerate.

        Left translation is free on nondegenerate simplices, so the
        stabilizer orbit never identifies a word with its own negative.
        """
        if not is_nondegenerate(w):
            return None
        r = len(gens)
        if r == 0:
            return (w, ()), 1
        pos = sorted(range(r), key=lambda i: self.order[gens[i]])
        s = tuple(p + 1 for p in pos)
        new_gens = tuple(gens[p] for p in pos)
        sign = _koszul_perm_sign([self.gen_degree[g] for g in gens], pos)
        base = be_sym(perm_inverse(s), w)
        # stabilizer of new_gens: permutations within blocks of equal generators
        blocks = [list(grp) for _, grp in itertools.groupby(range(r), key=lambda i: new_gens[i])]
        best = None
        for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
            t = [0] * r
            for b, c in zip(blocks, choice):
                for src, dst in zip(b, c):
                    t[src] = dst + 1
            t = tuple(t)
            cand = be_sym(perm_inverse(t), base)
            st = _koszul_perm_sign([self.gen_degree[g] for g in new_gens], [v - 1 for v in t])
            key = sort_key(cand)
            if best is None or key < best[0]:
                best = (key, cand, st)
        return (best[1], new_gens), sign * best[2]

    def word(self, w: PermSimplex, gens: Sequence[str], coef=1) -> FormalSum:
        """The element w(gens), canonicalized and checked against the truncation."""
        out = FormalSum(self.ring)
        if len(gens) > self.max_arity or len(w) - 1 > self.max_degree:
            raise TruncationOverflow(f"word {format_perm_simplex(w)} of arity {len(gens)} "
                                     f"exceeds truncation (degree {self.max_degree}, arity {self.max_arity})")
        can = self.canonical(w, gens)
        if can is not None:
            out.add_term(can[0], coef * can[1])
        return out

    def generator(self, g: str) -> FormalSum:
        return self.word(((1,),), (g,))

    def unit(self) -> FormalSum:
        return self.word(UNIT_OP, ())

    # the underlying complex

    def basis_words(self) -> List[Word]:
        seen = set()
        names = list(self.gen_degree)
        for r in range(self.max_arity + 1):
            for gens in itertools.combinations_with_replacement(names, r):
                for n in range(self.max_degree + 1):
                    ops = be_basis(r, n) if r > 0 else ([UNIT_OP] if n == 0 else [])
                    for w in ops:
                        can = self.canonical(w, gens)
                        if can is not None:
                            seen.add(can[0])
        return sorted(seen, key=sort_key)

    def differential(self, word: Word) -> FormalSum:
        w, gens = word
        out = FormalSum(self.ring)
        for z, c in be_differential(w, self.ring).terms.items():
            out.add_scaled(self.word(z, gens), c)
        e = len(w) - 1
        for i, g in enumerate(gens):
            for h, c in self.gen_diff.get(g, {}).items():
                out.add_scaled(self.word(w, gens[:i] + (h,) + gens[i + 1:]), c * (-1) ** e)
            e += self.gen_degree[g]
        return out

    @property
    def complex(self) -> Complex:
        if self._complex is None:
            basis: Dict[int, List[Word]] = {}
            for word in self.basis_words():
                basis.setdefault(self.word_degree(word), []).append(word)
            self._complex = Complex(self.ring, basis, self.differential, self.name, label_format=format_word)
        return self._complex

    # evaluation

    def evaluate(self, x: PermSimplex, args: Sequence[FormalSum]) -> FormalSum:
        """x(a_1, ..., a_r), multilinear in the arguments."""
        if len(args) != len(x[0]):
            raise ValueError("wrong number of arguments")
        out = FormalSum(self.ring)
        for combo in itertools.product(*(a.terms.items() for a in args)):
            coef = 1
            for _, c in combo:
                coef *= c
            words = [lab for lab, _ in combo]
            out.add_scaled(self._evaluate_words(x, words), coef)
        return out

    def _evaluate_words(self, x: PermSimplex, words: Sequence[Word]) -> FormalSum:
        # x(u_1(g^1), ..., u_r(g^r)) = ± Γ(x; u_1, ..., u_r)(g^1, ..., g^r)
        sign = 0
        for i, (u, _) in enumerate(words):
            for _, gens in words[:i]:
                sign += (len(u) - 1) * sum(self.gen_degree[g] for g in gens)
        ops = FormalSum.basis(self.ring, x, (-1) ** sign)
        pos = 1
        for u, _ in words:
            nxt = FormalSum(self.ring)
            for z, c in ops.terms.items():
                nxt.add_scaled(be_compose(z, pos, u, self.ring), c)
            ops = nxt
            pos += len(u[0])
        all_gens = tuple(g for _, gens in words for g in gens)
        out = FormalSum(self.ring)
        for z, c in ops.terms.items():
            out.add_scaled(self.word(z, all_gens), c)
        return out

    def product(self, a: FormalSum, b: FormalSum) -> FormalSum:
        return self.evaluate(MU, [a, b])


def _koszul_perm_sign(degrees: Sequence[int], pos: Sequence[int]) -> int:
    """Sign of reordering graded items into the order given by pos."""
    e = 0
    for a in range(len(pos)):
        for b in range(a + 1, len(pos)):
            if pos[a] > pos[b]:
                e += degrees[pos[a]] * degrees[pos[b]]
    return -1 if e % 2 else 1


def free_ealgebra(ring: Ring, generators: Mapping[str, int], max_degree: int, max_arity: int,
                  gen_diff=None, name: str = "E(X)") -> FreeEAlgebra:
    return FreeEAlgebra(ring, generators, max_degree, max_arity, gen_diff, name)


def coproduct_free(A: FreeEAlgebra, B: FreeEAlgebra, max_degree: Optional[int] = None,
                   max_arity: Optional[int] = None) -> FreeEAlgebra:
    """A ∨ B = E(X ⊕ Y): the free algebra on the disjoint alphabet, X first."""
    clash = set(A.gen_degree) & set(B.gen_degree)
    if clash:
        raise ValueError(f"generator names must be disjoint, shared: {sorted(clash)}")
    gens = dict(A.gen_degree)
    gens.update(B.gen_degree)
    diff = dict(A.gen_diff)
    diff.update(B.gen_diff)
    C = FreeEAlgebra(A.ring, gens,
                     max_degree if max_degree is not None else max(A.max_degree, B.max_degree),
                     max_arity if max_arity is not None else A.max_arity + B.max_arity,
                     diff, f"{A.name}v{B.name}")
    C.left_names = frozenset(A.gen_degree)
    return C


class Comparison:
    """AW, EM and the homotopy H between A ∨ B and A ⊗ B for free A and B."""

    def __init__(self, A: FreeEAlgebra, B: FreeEAlgebra, C: Optional[FreeEAlgebra] = None):
        self.A, self.B = A, B
        self.C = C or coproduct_free(A, B)
        self.ring = A.ring
        self.left = frozenset(A.gen_degree)

    def split(self, word: Word) -> int:
        """Number of A-generators; canonical words list them first."""
        gens = word[1]
        p = sum(1 for g in gens if g in self.left)
        if any(g not in self.left for g in gens[:p]):
            raise ValueError("canonical word does not list left generators first")
        return p

    def aw(self, word: Word) -> FormalSum:
        """AW(w(x, y)) = Σ_k ± (w_0|I..w_k|I)(x) ⊗ (w_k|J..w_n|J)(y)."""
        w, gens = word
        p = self.split(word)
        r = len(gens)
        xs, ys = gens[:p], gens[p:]
        deg_x = sum(self.C.gen_degree[g] for g in xs)
        out = FormalSum(self.ring)
        wi = [restrict(v, 0, p) for v in w]
        wj = [restrict(v, p, r) for v in w]
        for k in range(len(w)):
            front, back = tuple(wi[:k + 1]), tuple(wj[k:])
            if not (is_nondegenerate(front) and is_nondegenerate(back)):
                continue
            sign = (-1) ** ((len(back) - 1) * deg_x)
            for a, ca in self.A.word(front, xs).terms.items():
                for b, cb in self.B.word(back, ys).terms.items():
                    out.add_term((a, b), sign * ca * cb)
        return out

    def em(self, pair) -> FormalSum:
        """EM(a ⊗ b) = μ(a, b)."""
        a, b = pair
        return self.C.evaluate(MU, [FormalSum.basis(self.ring, a), FormalSum.basis(self.ring, b)])

    def homotopy(self, word: Word) -> FormalSum:
        """H(w(x, y)) = Σ (-1)^k (w_0, ..., w_k) ⋆ (path through w_i|I ⊕ w_j|J)(x, y).

        The join runs over 0 <= k <= l <= n and over the lattice paths from
        (k, l) to (l, n), each signed by its shuffle sign.  The sign (-1)^k
        is the one making δH + Hδ = EM∘AW - id.
        """
        w, gens = word
        p = self.split(word)
        r = len(gens)
        n = len(w) - 1
        wi = [restrict(v, 0, p) for v in w]
        wj = [restrict(v, p, r) for v in w]
        out = FormalSum(self.ring)
        for k in range(n + 1):
            for l in range(k, n + 1):
                for path, s in lattice_paths(l - k, n - l):
                    tail = tuple(direct_sum(wi[k + a], wj[l + b]) for a, b in path)
                    z = w[:k + 1] + tail
                    if is_nondegenerate(z):
                        out.add_scaled(self.C.word(z, gens), s * (-1) ** k)
        return out

    def tensor_differential(self, x: FormalSum) -> FormalSum:
        """Koszul differential on A ⊗ B, computed termwise."""
        out = FormalSum(self.ring)
        for (a, b), c in x.terms.items():
            for z, cz in self.A.differential(a).terms.items():
                out.add_term((z, b), c * cz)
            s = (-1) ** self.A.word_degree(a)
            for z, cz in self.B.differential(b).terms.items():
                out.add_term((a, z), c * cz * s)
        return out

    def tensor_complex(self) -> Complex:
        return tensor(self.A.complex, self.B.complex, f"{self.A.name}(x){self.B.name}")

    def aw_hom(self) -> GradedHom:
        return GradedHom(self.ring, 0, self.aw, "AW")

    def em_hom(self) -> GradedHom:
        return GradedHom(self.ring, 0, self.em, "EM")

    def h_hom(self) -> GradedHom:
        return GradedHom(self.ring, 1, self.homotopy, "H")


def verify_comparison(A: FreeEAlgebra, B: FreeEAlgebra, max_degree: int, max_arity: int) -> Report:
    """AW∘EM = id, δH + Hδ = EM∘AW - id and chain-map checks on the words of
    A ∨ B (resp. A ⊗ B) with operation degree <= max_degree and arity <= max_arity."""
    C = coproduct_free(A, B, max_degree + 1, max_arity)
    cmp = Comparison(A, B, C)
    rep = Report(f"AW/EM/H on {C.name}")
    ring = A.ring
    words = [wd for wd in C.basis_words() if len(wd[0]) - 1 <= max_degree]
    a_words = [wd for wd in A.basis_words() if len(wd[0]) - 1 <= max_degree]
    b_words = [wd for wd in B.basis_words() if len(wd[0]) - 1 <= max_degree]
    pairs = [(a, b) for a in a_words for b in b_words
             if len(a[0]) + len(b[0]) - 2 <= max_degree and len(a[1]) + len(b[1]) <= max_arity]

    bad = []
    for pr in pairs:
        back = FormalSum(ring)
        for wd, c in cmp.em(pr).terms.items():
            back.add_scaled(cmp.aw(wd), c)
        if back != FormalSum.basis(ring, pr):
            bad.append(f"{pr}: AW EM = {format_sum(back)}")
    rep.add("AW o EM = id", len(pairs), bad)

    bad = []
    for wd in words:
        lhs = FormalSum(ring)
        for z, c in cmp.homotopy(wd).terms.items():
            lhs.add_scaled(C.differential(z), c)
        for z, c in C.differential(wd).terms.items():
            lhs.add_scaled(cmp.homotopy(z), c)
        rhs = FormalSum(ring)
        for pr, c in cmp.aw(wd).terms.items():
            rhs.add_scaled(cmp.em(pr), c)
        rhs.add_term(wd, -1)
        if lhs != rhs:
            bad.append(f"{format_word(wd)}: dH+Hd = {format_sum(lhs, format_word)}; EM AW - id = {format_sum(rhs, format_word)}")
    rep.add("dH + Hd = EM o AW - id", len(words), bad)

    bad = []
    for wd in words:
        lhs = cmp.tensor_differential(cmp.aw(wd))
        rhs = FormalSum(ring)
        for z, c in C.differential(wd).terms.items():
            rhs.add_scaled(cmp.aw(z), c)
        if lhs != rhs:
            bad.append(format_word(wd))
    rep.add("AW chain map", len(words), bad)

    bad = []
    for pr in pairs:
        lhs = FormalSum(ring)
        for z, c in cmp.em(pr).terms.items():
            lhs.add_scaled(C.differential(z), c)
        rhs = FormalSum(ring)
        for z, c in cmp.tensor_differential(FormalSum.basis(ring, pr)).terms.items():
            rhs.add_scaled(cmp.em(z), c)
        if lhs != rhs:
            bad.append(str(pr))
    rep.add("EM chain map", len(pairs), bad)
    rep.data["words"] = len(words)
    rep.data["tensors"] = len(pairs)
    return rep
