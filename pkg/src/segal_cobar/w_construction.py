"""The W-construction of a connected Segal shuffle dg cooperad and the tree category Tree^□.

W(A)(s) is built in reduced form: a basis element is (t, w, a) where t -> s,
w is a word over "0e" with one letter per edge of t contracted in s (0 = 0#,
e = 01#, the 1# factors are dropped) and a is a basis element of A(t).  The
letters are listed in the vertex order of t.  The decomposed variant W_dec
replaces A(t) by A(t/s) = ⊗_v A(σ_v).

Tree^□(t, s) has basis (chain, word) with chain = (t, t_k, ..., t_1, s) a
chain of non-identity arrows and word a string over "0e" of length k; the
letter at position p sits at chain[p + 1].  Tree^□(s, s) is spanned by the
unit ((s, s), "").
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .barratt_eccles import PermSimplex, be_arity, be_augmentation, be_degree, be_differential, coalgebra_act
from .cubical import (
    _LETTER, _SIMPLEX, chain_codegeneracy, chain_connection, cube_boundary, cube_chains, iterated_diagonal, pair,
)
from .ring_linear import (
    QQ, Complex, FormalSum, GradedHom, Report, Ring, check_chain_map, check_homotopy, format_label,
    homology_ranks, identity_hom, is_quasi_isomorphism, rank_of, square_zero_check, tensor, tensor_many, to_json,
)
from .segal_cooperads import (
    HomotopySegalDg, StrictSegalDg, _subtree_chain, koszul_reorder_sign, morphisms_from, relabel, tensor_apply,
    verify_segal, verify_strict,
)
from .simplicial_chains import aw_iterate
from .trees import Tree, all_chains, decompose, enumerate_reduced, graft_along, hom, preimage

Vertex = frozenset


def collapsed_edges(t: Tree, s: Tree) -> List[Vertex]:
    """Edges of t contracted by t -> s, in the vertex order of t."""
    m = hom(t, s)
    if m is None:
        raise ValueError(f"no morphism {t} -> {s}")
    return [v for v in t.vertices() if v in m.contracted]


def trees_over(s: Tree) -> List[Tree]:
    """Reduced trees t with a morphism t -> s, in canonical order."""
    return [t for t in enumerate_reduced(s.leaves) if hom(t, s) is not None]


@lru_cache(maxsize=None)
def _expansions(t: Tree) -> Tuple[Tuple[Tree, Vertex], ...]:
    # trees t' -> t contracting exactly one edge f, with f
    out = []
    for tp in enumerate_reduced(t.leaves):
        m = hom(tp, t)
        if m is not None and len(m.contracted) == 1:
            out.append((tp, next(iter(m.contracted))))
    return tuple(out)


def _lift_map(u: Tree, v: Vertex) -> Dict[int, Vertex]:
    # label x of a subtree σ_v -> the ingoing edge of v with min leaf x
    return {min(e): e for e in u.in_edges(v)}


def _lift(vertex, edges: Dict[int, Vertex]) -> Vertex:
    return frozenset().union(*(edges[x] for x in vertex))


def _format_w(s: Tree, fmt):
    def f(lab):
        t, w, a = lab
        return f"({t}->{s} | {w or '-'} | {fmt(a)})"
    return f


class WConstruction:
    """W(A) (``decomposed=False``) or W_dec(A) (``decomposed=True``) in reduced form."""

    def __init__(self, A: StrictSegalDg, decomposed: bool = False):
        if not A.connected:
            raise ValueError("the W-construction needs a connected cooperad")
        self.A = A
        self.ring = A.ring
        self.decomposed = decomposed
        self.name = ("W_dec" if decomposed else "W") + f"({A.name})"
        self._cx: Dict[Tree, Complex] = {}

    # pieces

    def coefficients(self, t: Tree, s: Tree) -> Complex:
        """A(t), or A(t/s) in the decomposed variant."""
        if self.decomposed:
            return self.A.segal_source(hom(t, s))
        return self.A.A(t)

    def _rho_coeff(self, tp: Tree, t: Tree, s: Tree, a) -> FormalSum:
        # ρ_{t'->t}, or its decomposed version: ρ on the single affected factor
        if not self.decomposed:
            return self.A.rho(tp, t).on_basis(a)
        src = decompose(hom(t, s)).subtrees()
        tgt = decompose(hom(tp, s)).subtrees()
        maps = [self.A.rho(y, x) for x, y in zip(src, tgt)]
        return tensor_apply(self.ring, maps, a, [0] * len(a))

    def letter_part(self, s: Tree, lab) -> FormalSum:
        """The δ(0#) = -01# part."""
        t, w, a = lab
        out = FormalSum(self.ring)
        odd = 0
        for p, c in enumerate(w):
            if c == "0":
                out.add_term((t, w[:p] + "e" + w[p + 1:], a), -(-1) ** odd)
            else:
                odd += 1
        return out

    def internal_part(self, s: Tree, lab) -> FormalSum:
        t, w, a = lab
        sign = (-1) ** w.count("e")
        img = self.coefficients(t, s).d.on_basis(a)
        return FormalSum(self.ring, {(t, w, y): sign * c for y, c in img.items()})

    def elimination_part(self, s: Tree, lab) -> FormalSum:
        """The δ(1#) = 01# part, rewritten through the coproducts ρ_{t'->t}."""
        t, w, a = lab
        letters = dict(zip(collapsed_edges(t, s), w))
        out = FormalSum(self.ring)
        for tp, f in _expansions(t):
            edges = collapsed_edges(tp, s)
            wp = "".join("e" if e == f else letters[e] for e in edges)
            sign = (-1) ** wp[:edges.index(f)].count("e")
            for y, c in self._rho_coeff(tp, t, s, a).items():
                out.add_term((tp, wp, y), sign * c)
        return out

    def differential(self, s: Tree, lab) -> FormalSum:
        out = self.letter_part(s, lab)
        out.add_scaled(self.internal_part(s, lab))
        out.add_scaled(self.elimination_part(s, lab))
        return out

    def __call__(self, s: Tree) -> Complex:
        if s not in self._cx:
            basis: Dict[int, list] = {}
            if s.is_reduced():
                for t in trees_over(s):
                    coeff = self.coefficients(t, s)
                    n = len(collapsed_edges(t, s))
                    for w in map("".join, itertools.product("0e", repeat=n)):
                        for a in coeff.all_labels():
                            basis.setdefault(coeff.degree_of(a) - w.count("e"), []).append((t, w, a))
            fmt = self.A.A(s).label_format
            self._cx[s] = Complex(self.ring, basis, lambda lab: self.differential(s, lab), f"{self.name}({s})",
                                  label_format=_format_w(s, format_label if self.decomposed else fmt))
        return self._cx[s]

    # structure maps

    def rho(self, u: Tree, s: Tree) -> GradedHom:
        """ρ^W_{u->s}: W(s) -> W(u); keeps the terms whose letters on the edges of u are all 0."""
        if self.decomposed:
            raise NotImplementedError("W_dec is only assembled through its Segal maps")
        if hom(u, s) is None:
            raise ValueError(f"no morphism {u} -> {s}")

        def on(lab):
            t, w, a = lab
            if hom(t, u) is None:
                return FormalSum(self.ring)
            kept = collapsed_edges(t, u)
            letters = dict(zip(collapsed_edges(t, s), w))
            if any(c != "0" for e, c in letters.items() if e not in kept):
                return FormalSum(self.ring)
            return FormalSum.basis(self.ring, (t, "".join(letters[e] for e in kept), a))

        return GradedHom(self.ring, 0, on, f"rhoW[{u}->{s}]")

    def segal(self, m) -> GradedHom:
        """i^W_λ: ⊗_v W(σ_v) -> W(s) for m: s -> u, by grafting the trees and merging the letters."""
        s, u = m.source, m.target
        verts = u.vertices()
        edges = [_lift_map(u, v) for v in verts]
        sigmas = decompose(m).subtrees()
        s_order = {y: i for i, y in enumerate(s.vertices())}

        def on(lab):
            theta = graft_along(u, [x[0] for x in lab])
            theta_edges = collapsed_edges(theta, s)
            pos = {e: i for i, e in enumerate(theta_edges)}
            n = len(theta_edges)
            # every source factor: (degree, target slot, payload)
            items = []
            for v, (t, w, a) in enumerate(lab):
                for e, c in zip(collapsed_edges(t, sigmas[v]), w):
                    items.append((1 if c == "e" else 0, pos[_lift(e, edges[v])], c))
                if self.decomposed:
                    subs = decompose(hom(t, sigmas[v])).subtrees()
                    for x, sub, ax in zip(sigmas[v].vertices(), subs, a):
                        items.append((self.A.A(sub).degree_of(ax), n + s_order[_lift(x, edges[v])], ax))
                else:
                    items.append((self.A.A(t).degree_of(a), n + v, a))
            order = sorted(range(len(items)), key=lambda i: items[i][1])
            sign = koszul_reorder_sign([d for d, _, _ in items], order)
            placed = [items[i][2] for i in order]
            w_out = "".join(placed[:n])
            if self.decomposed:
                return FormalSum.basis(self.ring, (theta, w_out, tuple(placed[n:])), sign)
            img = self.A.segal(hom(theta, u)).on_basis(tuple(placed[n:]))
            return FormalSum(self.ring, {(theta, w_out, y): sign * c for y, c in img.items()})

        return GradedHom(self.ring, 0, on, f"iW[{s}->{u}]")

    def as_cooperad(self) -> StrictSegalDg:
        """W(A) packaged with ρ^W and i^W, for the generic strict verifiers."""
        if self.decomposed:
            raise NotImplementedError("W_dec carries no coproducts here")
        return StrictSegalDg(self.ring, self, self.rho, self.segal, self.A.r_max, self.name, True)



def beta(W: WConstruction, s: Tree) -> GradedHom:
    """β: A(s) -> W(A)(s), a |-> Σ_{t->s} (t, 0...0, ρ_{t->s}(a))."""
    A = W.A
    targets = [(t, "0" * len(collapsed_edges(t, s))) for t in trees_over(s)]

    def on(a):
        out = FormalSum(W.ring)
        for t, w in targets:
            for y, c in A.rho(t, s).on_basis(a).items():
                out.add_term((t, w, y), c)
        return out

    return GradedHom(W.ring, 0, on, f"beta[{s}]")


def alpha(Wd: WConstruction, W: WConstruction, s: Tree) -> GradedHom:
    """α: W_dec(A)(s) -> W(A)(s), the Segal map i_{t/s} on the coefficients."""
    def on(lab):
        t, w, a = lab
        img = W.A.segal(hom(t, s)).on_basis(a)
        return FormalSum(W.ring, {(t, w, y): c for y, c in img.items()})

    return GradedHom(W.ring, 0, on, f"alpha[{s}]")


def _tensor_of(ring: Ring, maps: Sequence[GradedHom], lab) -> FormalSum:
    # degree-0 maps, so no Koszul signs
    return tensor_apply(ring, maps, lab, [0] * len(lab))


def w_dec_bijection_check(Wd: WConstruction, s: Tree) -> List[str]:
    """Each Segal map of W_dec into W_dec(s) sends basis elements to ± distinct basis elements, onto."""
    bad = []
    for m in morphisms_from(s):
        if m.target.is_corolla():
            continue
        src = tensor_many([Wd(x) for x in decompose(m).subtrees()])
        f = Wd.segal(m)
        seen = set()
        for lab in src.all_labels():
            img = f.on_basis(lab)
            if len(img) != 1 or abs(img.items()[0][1]) != 1:
                bad.append(f"{s} over {m.target}: {lab} -> {img}")
                continue
            seen.add(img.labels()[0])
        if seen != set(Wd(s).all_labels()) or len(seen) != src.dim():
            bad.append(f"{s} over {m.target}: not onto ({len(seen)} of {Wd(s).dim()})")
    return bad


def filtration_check(W: WConstruction, s: Tree) -> List[str]:
    """The 1#-elimination part raises #V by one; the other two parts preserve the tree."""
    bad = []
    for lab in W(s).all_labels():
        n = len(lab[0].vertices())
        if any(len(y[0].vertices()) != n + 1 for y in W.elimination_part(s, lab).labels()):
            bad.append(f"elimination part of {W(s).label_format(lab)}")
        if any(y[0] != lab[0] for y in (W.letter_part(s, lab) + W.internal_part(s, lab)).labels()):
            bad.append(f"tree-preserving part of {W(s).label_format(lab)}")
    return bad


def zigzag_verify(A: StrictSegalDg, r_max: Optional[int] = None) -> Report:
    """A -> W(A) <- W_dec(A): chain maps, naturality, quasi-isomorphisms and W_dec Segal bijections."""
    if not A.ring.is_field:
        raise ValueError("quasi-isomorphisms are tested over a field")
    r_max = r_max or A.r_max
    W, Wd = WConstruction(A), WConstruction(A, True)
    rep = Report(f"zigzag A -> W(A) <- W_dec(A) for {A.name}")
    trees = [t for r in range(2, r_max + 1) for t in enumerate_reduced(r)]
    sq, chain_b, chain_a, qi_b, qi_a, nat_rho, nat_seg_b, nat_seg_a, bij, filt = ([] for _ in range(10))
    n_nat = n_seg = 0
    for s in trees:
        Ws, Wds = W(s), Wd(s)
        for c in (Ws, Wds):
            if not square_zero_check(c).ok:
                sq.append(c.name)
        b, a = beta(W, s), alpha(Wd, W, s)
        chain_b += check_chain_map(b, A.A(s), Ws).failed()
        chain_a += check_chain_map(a, Wds, Ws).failed()
        for f, src, bad in ((b, A.A(s), qi_b), (a, Wds, qi_a)):
            ok, ranks = is_quasi_isomorphism(f, src, Ws)
            if not ok:
                bad.append(f"{s}: cone homology {ranks}")
        # β commutes with the coproducts
        for u in trees_over(s):
            if u == s:
                continue
            n_nat += 1
            for x in A.A(s).all_labels():
                left = W.rho(u, s)(b.on_basis(x))
                right = beta(W, u)(A.rho(u, s).on_basis(x))
                if left != right:
                    nat_rho.append(f"{u} -> {s} on {x}")
        # β and α commute with the Segal maps
        for m in morphisms_from(s):
            if m.target.is_corolla():
                continue
            n_seg += 1
            subs = decompose(m).subtrees()
            for lab in A.segal_source(m).all_labels():
                left = W.segal(m)(_tensor_of(A.ring, [beta(W, x) for x in subs], lab))
                right = b(A.segal(m).on_basis(lab))
                if left != right:
                    nat_seg_b.append(f"{s} over {m.target} on {lab}")
            src = tensor_many([Wd(x) for x in subs])
            for lab in src.all_labels():
                left = W.segal(m)(_tensor_of(A.ring, [alpha(Wd, W, x) for x in subs], lab))
                right = a(Wd.segal(m).on_basis(lab))
                if left != right:
                    nat_seg_a.append(f"{s} over {m.target} on {lab}")
        bij += w_dec_bijection_check(Wd, s)
        filt += filtration_check(W, s)
    rep.add("W and W_dec square to zero", 2 * len(trees), sq)
    rep.add("beta is a chain map", len(trees), [c.witnesses[0] for c in chain_b])
    rep.add("alpha is a chain map", len(trees), [c.witnesses[0] for c in chain_a])
    rep.add("beta is a quasi-isomorphism", len(trees), qi_b)
    rep.add("alpha is a quasi-isomorphism", len(trees), qi_a)
    rep.add("beta commutes with coproducts", n_nat, nat_rho)
    rep.add("beta commutes with Segal maps", n_seg, nat_seg_b)
    rep.add("alpha commutes with Segal maps", n_seg, nat_seg_a)
    rep.add("W_dec Segal maps are basis bijections", n_seg, bij)
    rep.add("elimination part raises the vertex count", len(trees), filt)
    WA = W.as_cooperad()
    WA.r_max = r_max
    rep.extend(verify_strict(WA), "W: ")
    rep.extend(verify_segal(WA), "W: ")
    return rep


# the equalizer description, built in full for a cross-check

class FullW:
    """⊕_{t->s} □*(t/s) ⊗ A(t) with words over "01e" and the equalizer constraints."""

    def __init__(self, A: StrictSegalDg, s: Tree):
        self.A, self.s, self.ring = A, s, A.ring
        basis: Dict[int, list] = {}
        for t in trees_over(s):
            n = len(collapsed_edges(t, s))
            for w in map("".join, itertools.product("01e", repeat=n)):
                for a in A.A(t).all_labels():
                    basis.setdefault(A.A(t).degree_of(a) - w.count("e"), []).append((t, w, a))
        self.space = Complex(self.ring, basis, self._d, f"full W({s})")

    def _d(self, lab) -> FormalSum:
        t, w, a = lab
        out = FormalSum(self.ring)
        odd = 0
        for p, c in enumerate(w):
            if c == "e":
                odd += 1
                continue
            # δ(0#) = -01#, δ(1#) = +01#
            out.add_term((t, w[:p] + "e" + w[p + 1:], a), (-1 if c == "0" else 1) * (-1) ** odd)
        sign = (-1) ** odd
        for y, c in self.A.A(t).d.on_basis(a).items():
            out.add_term((t, w, y), sign * c)
        return out

    def constraints(self, lab) -> FormalSum:
        """x |-> (d_0 on E(t/u) of x_t - ρ_{t->u} x_u) over all non-identity t -> u -> s."""
        t, w, a = lab
        s = self.s
        letters = dict(zip(collapsed_edges(t, s), w))
        out = FormalSum(self.ring)
        # x as the t-term of a pair t -> u: evaluate the letters on E(t/u) at 1#
        for u in trees_over(s):
            if u == t or hom(t, u) is None:
                continue
            drop = set(collapsed_edges(t, u))
            if all(letters[e] == "1" for e in drop):
                rest = "".join(letters[e] for e in collapsed_edges(u, s))
                out.add_term(((t, u), rest, a), 1)
        # x as the u-term of a pair t' -> t
        for tp in trees_over(s):
            if tp == t or hom(tp, t) is None:
                continue
            for y, c in self.A.rho(tp, t).on_basis(a).items():
                out.add_term(((tp, t), w, y), -c)
        return out

    def lift(self, lab) -> FormalSum:
        """Reduced (t, w, a) |-> Σ_{t'->t} (w with 1# on E(t'/t)) ⊗ ρ_{t'->t}(a)."""
        t, w, a = lab
        letters = dict(zip(collapsed_edges(t, self.s), w))
        out = FormalSum(self.ring)
        for tp in trees_over(t):
            wp = "".join(letters.get(e, "1") for e in collapsed_edges(tp, self.s))
            for y, c in self.A.rho(tp, t).on_basis(a).items():
                out.add_term((tp, wp, y), c)
        return out


def equalizer_cross_check(A: StrictSegalDg, s: Tree) -> Report:
    """The reduced W(A)(s) against the equalizer inside the full sum."""
    F = FullW(A, s)
    W = WConstruction(A)(s)
    rep = Report(f"equalizer cross-check for {s}")
    bad = []
    for lab in W.all_labels():
        x = F.lift(lab)
        res = FormalSum(A.ring)
        for y, c in x.items():
            res.add_scaled(F.constraints(y), c)
        if not res.is_zero():
            bad.append(W.label_format(lab))
    rep.add("lifts satisfy the equalizer constraints", W.dim(), bad)
    dims = []
    for d in sorted(set(F.space.degrees()) | set(W.degrees())):
        labs = F.space.in_degree(d) if d in F.space.basis else ()
        rank = rank_of([F.constraints(lab).terms for lab in labs], A.ring)
        kernel = len(labs) - rank
        if kernel != len(W.basis.get(d, ())):
            dims.append(f"degree {d}: kernel {kernel}, reduced {len(W.basis.get(d, ()))}")
    rep.add("kernel dimension equals the reduced basis count", len(F.space.degrees()), dims)
    bad = []
    for lab in W.all_labels():
        lhs = F.space.d(F.lift(lab))
        rhs = FormalSum(A.ring)
        for y, c in W.d.on_basis(lab).items():
            rhs.add_scaled(F.lift(y), c)
        if lhs != rhs:
            bad.append(W.label_format(lab))
    rep.add("lift commutes with the differentials", W.dim(), bad)
    return rep


def bar_cobar_count(A: StrictSegalDg, r: int) -> int:
    """Σ_T Π_{v in T} Σ_{σ on in(v)} dim A(σ): the basis size of B B^c(A)(r)."""
    total = 0
    for T in enumerate_reduced(r):
        prod = 1
        for v in T.vertices():
            labels = sorted(min(e) for e in T.in_edges(v))
            prod *= sum(A.A(sig).dim() for sig in enumerate_reduced(labels))
        total += prod
    return total


def w_to_json(W: WConstruction, s: Tree) -> str:
    """W(A)(s) in the ring_linear JSON format with labels (t->s | letters | a)."""
    return to_json(W(s))


# the enriched category Tree^□

def treesq_unit(s: Tree) -> Tuple[Tuple[Tree, Tree], str]:
    return ((s, s), "")


def format_treesq(lab) -> str:
    chain, w = lab
    return " -> ".join(str(t) for t in chain) + " | " + (w or "-")


def treesq_basis(t: Tree, s: Tree) -> List[Tuple[Tuple[Tree, ...], str]]:
    if t == s:
        return [treesq_unit(s)]
    out = []
    for chain in all_chains(t, s):
        k = len(chain) - 2
        out.extend((chain, "".join(w)) for w in itertools.product("0e", repeat=k))
    return out


def treesq_normalize(chain: Sequence[Tree], word: str, ring: Ring = QQ) -> FormalSum:
    """Reduce a cell over any chain to the nondegenerate basis.

    A 1 letter composes the two arrows through its tree; a repeated tree is an
    identity arrow and is removed by the matching codegeneracy.
    """
    chain = tuple(chain)
    out = FormalSum(ring)
    if "1" in word:
        p = word.index("1")
        out.add_scaled(treesq_normalize(chain[:p + 1] + chain[p + 2:], word[:p] + word[p + 1:], ring))
        return out
    k = len(word)
    for idx in range(len(chain) - 1):
        if chain[idx] == chain[idx + 1] and len(chain) > 2:
            for y, c in chain_codegeneracy(word, k - idx, ring).items():
                out.add_scaled(treesq_normalize(chain[:idx] + chain[idx + 1:], y, ring), c)
            return out
    return FormalSum.basis(ring, (chain, word))


def treesq(t: Tree, s: Tree, ring: Ring = QQ) -> Complex:
    """Tree^□(t, s) with d = normalization of the cubical boundary."""
    basis: Dict[int, list] = {}
    if hom(t, s) is not None:
        for lab in treesq_basis(t, s):
            basis.setdefault(lab[1].count("e"), []).append(lab)

    def diff(lab):
        chain, w = lab
        out = FormalSum(ring)
        for y, c in cube_boundary(w, ring).items():
            out.add_scaled(treesq_normalize(chain, y, ring), c)
        return out

    return Complex(ring, basis, diff, f"Tree^□({t}, {s})", label_format=format_treesq)


def treesq_compose(sigma, tau, ring: Ring = QQ) -> FormalSum:
    """σ ∘ τ for σ in Tree^□(u, s), τ in Tree^□(t, u): the cell τ ⊗ 0 ⊗ σ, with the Koszul swap sign."""
    (cs, ws), (ct, wt) = sigma, tau
    if ct[-1] != cs[0]:
        raise ValueError(f"cannot compose along {ct[-1]} and {cs[0]}")
    if cs[0] == cs[-1]:
        return FormalSum.basis(ring, tau)
    if ct[0] == ct[-1]:
        return FormalSum.basis(ring, sigma)
    sign = (-1) ** (ws.count("e") * wt.count("e"))
    return FormalSum.basis(ring, (ct + cs[1:], wt + "0" + ws), sign)


def treesq_augment(lab) -> int:
    """ε: Tree^□(t, s) -> k, 1 on every degree-0 cell."""
    return 0 if "e" in lab[1] else 1


def treesq_contract_homotopy(lab, letter: str, ring: Ring = QQ) -> FormalSum:
    """h(x ⊗ λ) for λ in N_*(Δ^1): every coordinate of the cube is pushed by max(-, λ)."""
    chain, w = lab
    k = len(w)
    if k == 0:
        # a single cell: both ends of λ give it back and the interval itself is degenerate
        return FormalSum(ring) if letter == "e" else FormalSum.basis(ring, lab)
    out = FormalSum(ring)
    for pieces, c in aw_iterate(_SIMPLEX[letter], k, ring).items():
        lam = [_LETTER[p] for p in pieces]
        # (x_1 ... x_k)(λ_1 ... λ_k) -> (x_1 λ_1) ... (x_k λ_k)
        e = sum((lam[i] == "e") * (w[j] == "e") for i in range(k) for j in range(i + 1, k))
        acc = {"": c * (-1) ** e}
        for x, y in zip(w, lam):
            acc = {z + v: cz * cv for z, cz in acc.items() for v, cv in chain_connection(x, y, "max")}
        for z, cz in acc.items():
            out.add_scaled(treesq_normalize(chain, z, ring), cz)
    return out


def treesq_facet(lab, sub, ring: Ring = QQ) -> FormalSum:
    """Restriction to the subtree of s spanned by the vertex set sub."""
    chain, w = lab
    sub_chain = _subtree_chain(chain, sub)
    return treesq_normalize(sub_chain, w, ring)


def _word_diagonal(w: str, n: int, ring: Ring) -> FormalSum:
    # n-fold AW on every letter, regrouped into n words with the Koszul sign
    k = len(w)
    out = FormalSum(ring)
    per_letter = [aw_iterate(_SIMPLEX[c], n, ring).items() for c in w]
    for combo in itertools.product(*per_letter):
        coef = 1
        pieces = []
        for split, c in combo:
            coef *= c
            pieces.append([_LETTER[x] for x in split])
        degrees = [int(pieces[p][j] == "e") for p in range(k) for j in range(n)]
        order = [p * n + j for j in range(n) for p in range(k)]
        coef *= koszul_reorder_sign(degrees, order)
        out.add_term(tuple("".join(pieces[p][j] for p in range(k)) for j in range(n)), coef)
    return out


def treesq_segal(m, t: Tree, ring: Ring = QQ) -> GradedHom:
    """Tree^□(t, s) -> ⊗_v Tree^□(t_v, σ_v) for m: s -> u."""
    s = m.source
    parts = decompose(m).parts

    def on(lab):
        chain, w = lab
        if chain[0] == chain[-1]:
            return FormalSum.basis(ring, tuple(treesq_unit(s.subtree(p)) for p in parts))
        chains = [_subtree_chain(chain, p) for p in parts]
        out = FormalSum(ring)
        for words, c in _word_diagonal(w, len(parts), ring).items():
            acc = {(): c}
            for ch, wv in zip(chains, words):
                img = treesq_normalize(ch, wv, ring)
                acc = {z + (y,): cz * cy for z, cz in acc.items() for y, cy in img.items()}
            for z, cz in acc.items():
                out.add_term(z, cz)
        return out

    return GradedHom(ring, 0, on, f"treesq segal [{s}->{m.target}]")


def treesq_segal_source(m, t: Tree, ring: Ring = QQ) -> Complex:
    s = m.source
    subs_t = [t.subtree(preimage(hom(t, s), p)) for p in decompose(m).parts]
    return tensor_many([treesq(x, y, ring) for x, y in zip(subs_t, decompose(m).subtrees())])


def treesq_sym(perm, lab):
    """Relabel the leaves of every tree of the chain."""
    chain, w = lab
    return (tuple(relabel(x, perm) for x in chain), w)


def treesq_e_coalgebra(x: PermSimplex, lab, ring: Ring = QQ) -> FormalSum:
    """x_*: Tree^□(t, s) -> Tree^□(t, s)^{⊗r} from the cubical coalgebra structure, cellwise."""
    r = be_arity(x)
    chain, w = lab
    k = len(w)
    out = FormalSum(ring)
    if k == 0:
        if be_augmentation(x):
            out.add_term((lab,) * r, 1)
        return out
    for pieces in iterated_diagonal(x, k):
        # (x_1 .. x_k)(c_1 .. c_k) -> (x_1 c_1) .. (x_k c_k), then regroup the r outputs
        e = sum(be_degree(pieces[i]) * (w[j] == "e") for i in range(k) for j in range(i))
        acc = {(): (-1) ** e}
        for f in range(k):
            img = coalgebra_act(pieces[f], _SIMPLEX[w[f]], ring)
            acc = {z + (tuple(_LETTER[y] for y in ys),): cz * cy for z, cz in acc.items() for ys, cy in img.items()}
        for outs, c in acc.items():
            degrees = [int(outs[f][i] == "e") for f in range(k) for i in range(r)]
            order = [f * r + i for i in range(r) for f in range(k)]
            c *= koszul_reorder_sign(degrees, order)
            words = ["".join(outs[f][i] for f in range(k)) for i in range(r)]
            terms = {(): c}
            for wi in words:
                img = treesq_normalize(chain, wi, ring)
                terms = {z + (y,): cz * cy for z, cz in terms.items() for y, cy in img.items()}
            for z, cz in terms.items():
                out.add_term(z, cz)
    return out


def treesq_action(H: HomotopySegalDg, t: Tree, s: Tree) -> GradedHom:
    """ρ: A(s) ⊗ Tree^□(t, s) -> A(t), the adjoint of the generated operators ρ_chain."""
    ring = H.ring

    def on(lab):
        a, (chain, v) = lab
        if chain[0] == chain[-1]:
            return FormalSum.basis(ring, a)
        if not v:
            return H.rho(chain[0], chain[-1]).on_basis(a)
        # with δf = (-1)^{|f|} f∘∂ the plain pairing anticommutes with d in odd degree;
        # the twist (-1)^{#e} makes evaluation a chain map
        twist = (-1) ** v.count("e")
        out = FormalSum(ring)
        for (y, w), c in H.generate(chain).on_basis(a).items():
            p = pair(w, v)
            if p:
                out.add_term(y, c * p * twist)
        return out

    return GradedHom(ring, 0, on, f"action[{t}->{s}]")


def treesq_pairs(r_max: int) -> List[Tuple[Tree, Tree]]:
    return [(t, s) for r in range(2, r_max + 1) for s in enumerate_reduced(r)
            for t in enumerate_reduced(r) if hom(t, s) is not None]


def treesq_action_verify(H: HomotopySegalDg, r_max: Optional[int] = None) -> Report:
    """The action is a chain map, unital, and associative against treesq_compose."""
    ring = H.ring
    r_max = r_max or H.r_max
    rep = Report(f"Tree^□ action of {H.name}")
    pairs = treesq_pairs(r_max)
    chain_bad, unit_bad, assoc_bad = [], [], []
    n_assoc = 0
    for t, s in pairs:
        T = treesq(t, s, ring)
        src = tensor(H.A(s), T)
        act = treesq_action(H, t, s)
        chain_bad += [c.witnesses[0] for c in check_chain_map(act, src, H.A(t)).failed()]
        if t != s:
            rho = H.rho(t, s)
            for a in H.A(s).all_labels():
                if act.on_basis((a, ((t, s), ""))) != rho.on_basis(a):
                    unit_bad.append(f"{t} -> {s} on {a}")
        for u, s2 in pairs:
            if s2 != s or hom(t, u) is None:
                continue
            act_u, act_t = treesq_action(H, u, s), treesq_action(H, t, u)
            for sigma in treesq_basis(u, s):
                for tau in treesq_basis(t, u):
                    n_assoc += 1
                    comp = treesq_compose(sigma, tau, ring)
                    for a in H.A(s).all_labels():
                        left = FormalSum(ring)
                        for y, c in act_u.on_basis((a, sigma)).items():
                            left.add_scaled(act_t.on_basis((y, tau)), c)
                        right = FormalSum(ring)
                        for cell, c in comp.items():
                            right.add_scaled(act.on_basis((a, cell)), c)
                        if left != right:
                            assoc_bad.append(f"{format_treesq(sigma)} then {format_treesq(tau)} on {a}")
    rep.add("action is a chain map", len(pairs), chain_bad)
    rep.add("unit chains act as the coproducts", len(pairs), unit_bad)
    rep.add("action is associative against composition", n_assoc, assoc_bad)
    return rep


def _h_hom(ring: Ring) -> GradedHom:
    return GradedHom(ring, 0, lambda lab: treesq_contract_homotopy(lab[0], lab[1], ring), "h")


def treesq_verify(r_max: int = 4, ring: Ring = QQ, e_ops: Sequence[PermSimplex] = ()) -> Report:
    """Contractibility, composition, Segal maps, facets and symmetries of Tree^□ on ≤ r_max leaves."""
    if not ring.is_field:
        raise ValueError("homology is computed over a field")
    rep = Report(f"Tree^□ on <= {r_max} leaves")
    pairs = treesq_pairs(r_max)
    by_source: Dict[Tree, List[Tree]] = {}
    for t, s in pairs:
        by_source.setdefault(t, []).append(s)
    sq, hom_bad, h_bad, comp_chain, assoc, seg, facet, sym = ([] for _ in range(8))
    n_comp = n_assoc = n_seg = n_facet = 0
    for t, s in pairs:
        T = treesq(t, s, ring)
        if not square_zero_check(T).ok:
            sq.append(T.name)
        ranks = homology_ranks(T)
        if ranks != {0: 1}:
            hom_bad.append(f"{t} -> {s}: {ranks}")
        unit = ((t, s) if t != s else (s, s), "")
        eps = GradedHom(ring, 0, lambda lab: FormalSum.basis(ring, unit, treesq_augment(lab)), "eta eps")
        if check_chain_map(_h_hom(ring), tensor(T, cube_chains(1, ring)), T).failed():
            h_bad.append(f"{t} -> {s}: h is not a chain map")
        H = GradedHom(ring, 1, lambda lab: treesq_contract_homotopy(lab, "e", ring).scale((-1) ** T.degree_of(lab)))
        if not check_homotopy(H, identity_hom(ring), eps, T, T).ok:
            h_bad.append(f"{t} -> {s}: dh + hd != eta eps - id")
        for lab in T.all_labels():
            if treesq_contract_homotopy(lab, "0", ring) != FormalSum.basis(ring, lab):
                h_bad.append(f"{format_treesq(lab)}: h(- ⊗ 0) != id")
            if treesq_contract_homotopy(lab, "1", ring) != eps.on_basis(lab):
                h_bad.append(f"{format_treesq(lab)}: h(- ⊗ 1) != eta eps")
        # composition t -> s -> v
        for v in by_source.get(s, []):
            n_comp += 1
            comp = GradedHom(ring, 0, lambda lab: treesq_compose(lab[0], lab[1], ring))
            if check_chain_map(comp, tensor(treesq(s, v, ring), T), treesq(t, v, ring)).failed():
                comp_chain.append(f"{t} -> {s} -> {v}")
            for x in by_source.get(v, []):
                for a in treesq_basis(v, x):
                    for b in treesq_basis(s, v):
                        ab = treesq_compose(a, b, ring)
                        for c in treesq_basis(t, s):
                            n_assoc += 1
                            left = FormalSum(ring)
                            for y, cy in ab.items():
                                left.add_scaled(treesq_compose(y, c, ring), cy)
                            right = FormalSum(ring)
                            for y, cy in treesq_compose(b, c, ring).items():
                                right.add_scaled(treesq_compose(a, y, ring), cy)
                            if left != right:
                                assoc.append(f"{format_treesq(a)} ∘ {format_treesq(b)} ∘ {format_treesq(c)}")
        for m in morphisms_from(s):
            if m.target.is_corolla():
                continue
            n_seg += 1
            g, src = treesq_segal(m, t, ring), treesq_segal_source(m, t, ring)
            if check_chain_map(g, T, src).failed() or not is_quasi_isomorphism(g, T, src)[0]:
                seg.append(f"{t} -> {s} over {m.target}")
        for v in s.vertices():
            for sub in _connected_vertex_sets(s, v):
                n_facet += 1
                sigma = s.subtree(sub)
                tau = t.subtree(preimage(hom(t, s), sub))
                f = GradedHom(ring, 0, lambda lab: treesq_facet(lab, sub, ring))
                if check_chain_map(f, T, treesq(tau, sigma, ring)).failed():
                    facet.append(f"{t} -> {s} at {sorted(map(sorted, sub))}")
        perm = dict(zip(t.leaves, reversed(t.leaves)))
        Tp = treesq(relabel(t, perm), relabel(s, perm), ring)
        f = GradedHom(ring, 0, lambda lab: FormalSum.basis(ring, treesq_sym(perm, lab)))
        if check_chain_map(f, T, Tp).failed() or Tp.dim() != T.dim():
            sym.append(f"{t} -> {s}")
    rep.add("d^2 = 0", len(pairs), sq)
    rep.add("homology is k in degree 0", len(pairs), hom_bad)
    rep.add("h contracts onto the unit", len(pairs), h_bad)
    rep.add("composition is a chain map", n_comp, comp_chain)
    rep.add("composition is associative", n_assoc, assoc)
    rep.add("Segal maps are quasi-isomorphisms", n_seg, seg)
    rep.add("facets are chain maps", n_facet, facet)
    rep.add("relabelling commutes with d", len(pairs), sym)
    if e_ops:
        bad = []
        n = 0
        for t, s in pairs:
            T = treesq(t, s, ring)
            for x in e_ops:
                n += 1
                if not e_coaction_chain_map(x, T, ring):
                    bad.append(f"{x} on {t} -> {s}")
        rep.add("E-coaction is a chain map", n, bad)
    return rep


def _connected_vertex_sets(s: Tree, v: Vertex) -> List[frozenset]:
    # v alone and v with its parent, enough to exercise facets
    out = [frozenset([v])]
    p = s.parent(v)
    if p is not None:
        out.append(frozenset([v, p]))
    return out


def e_coaction_chain_map(x: PermSimplex, T: Complex, ring: Ring = QQ) -> bool:
    """d x_*(c) = (dx)_*(c) + (-1)^{|x|} x_*(dc) on every basis cell."""
    Tr = tensor_many([T] * be_arity(x))
    n = be_degree(x)
    for lab in T.all_labels():
        lhs = Tr.d(treesq_e_coalgebra(x, lab, ring))
        rhs = FormalSum(ring)
        for y, c in be_differential(x, ring).items():
            rhs.add_scaled(treesq_e_coalgebra(y, lab, ring), c)
        for y, c in T.d.on_basis(lab).items():
            rhs.add_scaled(treesq_e_coalgebra(x, y, ring), c * (-1) ** n)
        if lhs != rhs:
            return False
    return True
