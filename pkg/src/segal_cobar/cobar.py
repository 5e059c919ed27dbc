"""Cobar construction of connected Segal shuffle dg cooperads.

An element of B^c(A)(L) is a pair (t, a) with t a reduced tree on the leaf
labels L and a a basis element of A(t).  Its degree is deg(a) - #V(t): the
pair stands for the tensor 01#_{v_1} ... 01#_{v_n} ⊗ a with one factor of
lower degree -1 per vertex, taken in the planar vertex order of t.

The twisting differential ∂ reads a pair (t, a) off every edge sequence
(t', e_1, ..., e_m) with t'/{e_1..e_m} = t.  The suspension word is blown up
one edge at a time, last edge first: the factor of the merged vertex is
moved to the front and replaced by 01#_u 01#_v, u the upper vertex of the
edge and v the lower one.  The operator ρ^□ (degree m - 1) is then applied
to a with the Koszul sign of passing the word.
"""

from __future__ import annotations

import itertools
import json
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .cubical import cube_words
from .ring_linear import (
    Complex, FormalSum, GradedHom, Report, Ring, check_chain_map, format_label, format_sum, identity_hom,
    tensor, zero_hom,
)
from .segal_cooperads import (
    Chain, HomotopySegalDg, StrictSegalDg, _compatibility, _pos, _SegalBase, format_chain, is_degenerate,
    morphisms_from, stored_chains, strict_as_homotopy,
)
from .trees import Tree, enumerate_reduced, graft, hom, morphism_chains

Label = Tuple[Tree, object]


def label_sets(r_max: int) -> List[Tuple[int, ...]]:
    """Every subset of {1..r_max} with at least two elements, as a sorted tuple."""
    return [c for n in range(2, r_max + 1) for c in itertools.combinations(range(1, r_max + 1), n)]


def permutation_sign(seq: Sequence, order: Sequence) -> int:
    """Sign of the permutation sorting ``seq`` into ``order`` (all factors odd)."""
    pos = [order.index(x) for x in seq]
    inv = sum(1 for i in range(len(pos)) for j in range(i + 1, len(pos)) if pos[i] > pos[j])
    return -1 if inv % 2 else 1


def edge_steps(chain: Chain) -> List[Tuple[frozenset, frozenset]]:
    """(upper vertex u, lower vertex v) of the edge contracted at each step of a one-edge-per-step chain."""
    out = []
    for big, small in zip(chain, chain[1:]):
        gone = set(big.vertices()) - set(small.vertices())
        if len(gone) != 1:
            raise ValueError(f"{big} -> {small} does not contract a single edge")
        u = gone.pop()
        out.append((u, big.parent(u)))
    return out


def blowup_sign(chain: Chain, mode: str = "front") -> int:
    """Sign of blowing the suspension word of chain[-1] up to that of chain[0].

    ``front`` moves the merged factor to the front before splitting it;
    ``transport`` carries the degree-one splitting map over the factors in
    front of it and splits in place.
    """
    word = list(chain[-1].vertices())
    sign = 1
    for u, v in reversed(edge_steps(chain)):
        idx = word.index(v)
        if idx % 2:
            sign = -sign
        if mode == "front":
            word = [u, v] + word[:idx] + word[idx + 1:]
        elif mode == "transport":
            word = word[:idx] + [u, v] + word[idx + 1:]
        else:
            raise ValueError(f"unknown blow-up mode {mode!r}")
    return sign * permutation_sign(word, chain[0].vertices())


def edge_chains_into(t: Tree) -> List[Chain]:
    """All chains t' -> t'/e_1 -> ... -> t'/{e_1..e_m} = t with m >= 1, one edge per step."""
    out = []
    for tp in enumerate_reduced(t.leaves):
        m = hom(tp, t)
        if m is None or m.is_identity():
            continue
        for perm in itertools.permutations(sorted(m.contracted, key=sorted)):
            out.append(tuple(tp.contract(list(perm))))
    return out


# shuffle dg operads

class ShuffleDgOperad:
    """A shuffle dg operad stored on the label sets of {1..r_max}.

    ``complexes(L)`` gives the component on the sorted label tuple L and
    ``composition(I, J)`` the product ∘_p: O(I) ⊗ O(J) -> O(I ∪ J), p = min J,
    as a degree-0 GradedHom on label pairs (x, y).
    """

    def __init__(self, ring: Ring, complexes: Callable[[Tuple[int, ...]], Complex],
                 composition: Callable[[Tuple[int, ...], Tuple[int, ...]], GradedHom], r_max: int, name: str = ""):
        self.ring = ring
        self.r_max = r_max
        self.name = name
        self._complexes = complexes
        self._composition = composition
        self._C: Dict = {}
        self._P: Dict = {}

    def __call__(self, labels: Iterable[int]) -> Complex:
        key = tuple(sorted(labels))
        if key not in self._C:
            self._C[key] = self._complexes(key)
        return self._C[key]

    def compose(self, I: Iterable[int], J: Iterable[int]) -> GradedHom:
        I, J = tuple(sorted(I)), tuple(sorted(J))
        if J[0] not in I or set(I) & set(J) != {J[0]}:
            raise ValueError(f"{I} and {J} do not form a pointed shuffle")
        key = (I, J)
        if key not in self._P:
            self._P[key] = self._composition(I, J)
        return self._P[key]

    def pointed_shuffles(self, r: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        """Pairs (I, J) with I ∪ J = {1..r}, I ∩ J = {min J}, both of size >= 2."""
        full = tuple(range(1, r + 1))
        out = []
        for n in range(2, r):
            for J in itertools.combinations(full, n):
                I = tuple(sorted(set(full) - set(J) | {J[0]}))
                if len(I) >= 2:
                    out.append((I, J))
        return out

    def source_complex(self, I, J) -> Complex:
        return tensor(self(I), self(J))


def operad_verify(O: ShuffleDgOperad, r_max: Optional[int] = None) -> Report:
    """d² = 0, compositions are chain maps, sequential and parallel associativity."""
    r_max = r_max or O.r_max
    rep = Report(f"shuffle dg operad {O.name}")
    n_sq, bad_sq = 0, []
    for L in (tuple(range(1, r + 1)) for r in range(2, r_max + 1)):
        c = O(L)
        for lab in c.all_labels():
            n_sq += 1
            dd = c.d(c.d.on_basis(lab))
            if not dd.is_zero():
                bad_sq.append(f"arity {len(L)}, {c.label_format(lab)}: d^2 = {format_sum(dd, c.label_format)}")
    rep.add("total differential squares to zero", n_sq, bad_sq)
    n_cm, bad_cm = 0, []
    for r in range(3, r_max + 1):
        for I, J in O.pointed_shuffles(r):
            sub = check_chain_map(O.compose(I, J), O.source_complex(I, J), O(set(I) | set(J)))
            n_cm += sub.checks[0].count
            bad_cm.extend(f"∘_{J[0]} {I} {J}: {w}" for w in sub.checks[0].witnesses)
    rep.add("compositions are chain maps", n_cm, bad_cm)
    n_as, bad_as = _associativity(O, r_max)
    rep.add("associativity of compositions", n_as, bad_as)
    return rep


def _compose_sum(O: ShuffleDgOperad, I, J, x: FormalSum, y: FormalSum) -> FormalSum:
    out = FormalSum(O.ring)
    f = O.compose(I, J)
    for a, ca in x.items():
        for b, cb in y.items():
            out.add_scaled(f.on_basis((a, b)), ca * cb)
    return out


def _associativity(O: ShuffleDgOperad, r_max: int) -> Tuple[int, List[str]]:
    # one check per three-vertex tree: nested vertices give the sequential
    # relation, disjoint ones the parallel relation
    count, bad = 0, []
    for r in range(4, r_max + 1):
        full = frozenset(range(1, r + 1))
        for theta in enumerate_reduced(r):
            vs = theta.vertices()
            if len(vs) != 3:
                continue
            X, Y = vs[1], vs[2]
            if Y < X or X < Y:
                X, Y = (X, Y) if Y < X else (Y, X)
                I = tuple(sorted(full - X | {min(X)}))
                J = tuple(sorted(X - Y | {min(Y)}))
                K = tuple(sorted(Y))
                kind = "sequential"
            else:
                I = tuple(sorted(full - X - Y | {min(X), min(Y)}))
                J, K = tuple(sorted(X)), tuple(sorted(Y))
                kind = "parallel"
            IJ = tuple(sorted(set(I) | set(J)))
            for x in O(I).all_labels():
                for y in O(J).all_labels():
                    for z in O(K).all_labels():
                        count += 1
                        X_, Y_, Z_ = (FormalSum.basis(O.ring, v) for v in (x, y, z))
                        lhs = _compose_sum(O, IJ, K, _compose_sum(O, I, J, X_, Y_), Z_)
                        if kind == "sequential":
                            JK = tuple(sorted(set(J) | set(K)))
                            rhs = _compose_sum(O, I, JK, X_, _compose_sum(O, J, K, Y_, Z_))
                        else:
                            IK = tuple(sorted(set(I) | set(K)))
                            sign = (-1) ** (O(J).degree_of(y) * O(K).degree_of(z))
                            rhs = _compose_sum(O, IK, J, _compose_sum(O, I, K, X_, Z_), Y_).scale(sign)
                        if lhs != rhs:
                            bad.append(f"{kind} {I} {J} {K} on {format_label(x)}, {format_label(y)}, "
                                       f"{format_label(z)}")
    return count, bad


# cobar complexes

def _cobar_format(lab: Label) -> str:
    return f"{lab[0]}|{format_label(lab[1])}"


class CobarOperad(ShuffleDgOperad):
    """B^c(A) of a connected strict or homotopy Segal shuffle dg cooperad.

    ``corrupt`` names one pair (t', chain) whose ∂ term gets the wrong sign;
    it exists for fault-injection tests only.
    """

    def __init__(self, A: _SegalBase, homotopy: bool, corrupt: Optional[Chain] = None):
        if not A.connected:
            raise ValueError("the cobar construction needs a connected cooperad")
        self.A = A
        self.homotopy = homotopy
        self.corrupt = tuple(corrupt) if corrupt else None
        self._terms: Dict[Tree, List[Tuple[Chain, int]]] = {}
        super().__init__(A.ring, self._build, self._build_composition, A.r_max,
                         f"B^c({A.name})")

    def degree(self, t: Tree, a) -> int:
        return self.A.A(t).degree_of(a) - len(t.vertices())

    def terms_into(self, t: Tree) -> List[Tuple[Chain, int]]:
        """(chain, blow-up sign) for every edge sequence contracting onto t that contributes to ∂."""
        if t not in self._terms:
            out = []
            for chain in edge_chains_into(t):
                if not self.homotopy and len(chain) > 2:
                    continue
                sign = blowup_sign(chain)
                if chain == self.corrupt:
                    sign = -sign
                out.append((chain, sign))
            self._terms[t] = out
        return self._terms[t]

    def operator(self, chain: Chain) -> GradedHom:
        if self.homotopy:
            return self.A.top(chain)
        return self.A.rho(chain[0], chain[1])

    def partial(self, m: Optional[int] = None) -> GradedHom:
        """∂ (or its summand ∂_m) as a map of degree -1 on pairs (t, a)."""
        ring = self.ring

        def on(lab):
            t, a = lab
            n = len(t.vertices())
            out = FormalSum(ring)
            for chain, sign in self.terms_into(t):
                k = len(chain) - 2
                if m is not None and k + 1 != m:
                    continue
                # (-1)^{(m+1)(n+1)} with m = k + 1 edges; this is what makes (δ + ∂)^2 vanish
                s = sign * (-1) ** (k * (n + 1))
                for y, c in self.operator(chain).on_basis(a).items():
                    out.add_term((chain[0], y), s * c)
            return out

        return GradedHom(ring, -1, on, "∂" if m is None else f"∂_{m}")

    def delta(self) -> GradedHom:
        ring = self.ring

        def on(lab):
            t, a = lab
            s = (-1) ** len(t.vertices())
            return self.A.A(t).d.on_basis(a).map_labels(lambda y: (t, y)).scale(s)

        return GradedHom(ring, -1, on, "δ")

    def _build(self, L: Tuple[int, ...]) -> Complex:
        basis: Dict[int, List] = {}
        for t in enumerate_reduced(L):
            for a in self.A.A(t).all_labels():
                basis.setdefault(self.degree(t, a), []).append((t, a))
        delta, partial = self.delta(), self.partial()

        def diff(lab):
            return delta.on_basis(lab) + partial.on_basis(lab)

        return Complex(self.ring, basis, diff, f"{self.name}{L}", label_format=_cobar_format)

    def _build_composition(self, I: Tuple[int, ...], J: Tuple[int, ...]) -> GradedHom:
        p = J[0]
        shape = Tree.from_vertices([frozenset(I) | frozenset(J), frozenset(J)])
        ring = self.ring

        def on(lab):
            (s, a), (t, b) = lab
            theta = graft(s, p, t)
            m = hom(theta, shape)
            word = [v | frozenset(J) if p in v else v for v in s.vertices()] + list(t.vertices())
            sign = permutation_sign(word, theta.vertices())
            sign *= (-1) ** (self.A.A(s).degree_of(a) * len(t.vertices()))
            return self.A.segal(m).on_basis((a, b)).map_labels(lambda y: (theta, y)).scale(sign)

        return GradedHom(ring, 0, on, f"∘_{p}")


def cobar_strict(A: StrictSegalDg, corrupt: Optional[Chain] = None) -> CobarOperad:
    if not isinstance(A, StrictSegalDg):
        raise TypeError("cobar_strict needs a StrictSegalDg")
    return CobarOperad(A, False, corrupt)


def cobar_homotopy(A, corrupt: Optional[Chain] = None) -> CobarOperad:
    if isinstance(A, StrictSegalDg):
        A = strict_as_homotopy(A)
    if not isinstance(A, HomotopySegalDg):
        raise TypeError("cobar_homotopy needs a HomotopySegalDg")
    return CobarOperad(A, True, corrupt)


def differential_table(O: ShuffleDgOperad, L: Tuple[int, ...]) -> Dict:
    """The differential of O(L) as {source label: {target label: coefficient}}, for exact comparisons."""
    c = O(L)
    return {lab: dict(c.d.on_basis(lab).items()) for lab in c.all_labels()}


def vertex_filtration_check(O: CobarOperad, r_max: Optional[int] = None) -> Report:
    """∂_m raises the vertex count by exactly m; δ preserves it."""
    rep = Report(f"vertex filtration of {O.name}")
    r_max = r_max or O.r_max
    count, bad = 0, []
    max_m = max(r_max - 2, 1)
    for r in range(2, r_max + 1):
        c = O(tuple(range(1, r + 1)))
        for lab in c.all_labels():
            n = len(lab[0].vertices())
            for y in O.delta().on_basis(lab).labels():
                count += 1
                if len(y[0].vertices()) != n:
                    bad.append(f"δ on {_cobar_format(lab)}")
            for m in range(1, max_m + 1):
                for y in O.partial(m).on_basis(lab).labels():
                    count += 1
                    if len(y[0].vertices()) != n + m:
                        bad.append(f"∂_{m} on {_cobar_format(lab)} hits {_cobar_format(y)}")
    rep.add("∂_m adds m vertices, δ adds none", count, bad)
    return rep


def per_m_relation(O: CobarOperad, L: Tuple[int, ...], m: int) -> Tuple[int, List[str]]:
    """δ∂_m + ∂_mδ + Σ_{0<i<m} ∂_i ∂_{m-i} = 0 on every basis element of O(L)."""
    c = O(L)
    delta = O.delta()
    parts = {i: O.partial(i) for i in range(1, m + 1)}
    bad = []
    for lab in c.all_labels():
        x = delta(parts[m].on_basis(lab)) + parts[m](delta.on_basis(lab))
        for i in range(1, m):
            x = x + parts[i](parts[m - i].on_basis(lab))
        if not x.is_zero():
            bad.append(f"m = {m} on {_cobar_format(lab)}: {format_sum(x, _cobar_format)}")
    return len(c.all_labels()), bad


def operad_to_json(O: ShuffleDgOperad, r_max: Optional[int] = None) -> str:
    """Per-arity complexes and composition tables as sparse triples."""
    r_max = r_max or O.r_max
    ring = O.ring
    fmt = lambda lab: _cobar_format(lab) if isinstance(lab, tuple) and isinstance(lab[0], Tree) else format_label(lab)
    arities = {}
    comps = []
    for r in range(2, r_max + 1):
        L = tuple(range(1, r + 1))
        c = O(L)
        diff = []
        for lab in c.all_labels():
            for y, cy in c.d.on_basis(lab).items():
                diff.append([fmt(lab), fmt(y), *ring.encode(cy)])
        arities[",".join(map(str, L))] = {"degrees": {str(d): [fmt(x) for x in labs] for d, labs in c.basis.items()},
                                         "diff": diff}
        for I, J in O.pointed_shuffles(r):
            f = O.compose(I, J)
            rows = []
            for x in O(I).all_labels():
                for y in O(J).all_labels():
                    for z, cz in f.on_basis((x, y)).items():
                        rows.append([fmt(x), fmt(y), fmt(z), *ring.encode(cz)])
            comps.append({"I": list(I), "J": list(J), "table": rows})
    payload = {"name": O.name, "ring": ring.name, "arities": arities, "compositions": comps}
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# homotopy morphisms

class HomotopyMorphismData:
    """A homotopy morphism A -> B into a strict B, stored through its top components.

    ``phi(t)`` is the underlying map A(t) -> B(t).  ``top(chain)`` gives
    φ^□ for a nondegenerate chain (t, t_k, ..., t_1, s), a map A(s) -> B(t) of
    degree k + 1, or None for zero.  The full operators A(s) -> B(t) ⊗ I^{k+1}
    are generated from the face rules: a letter 1# at the outermost slot
    applies ρ^B_{t->t_k} after the shorter chain, a letter 0# there applies φ_t
    after ρ^A of the whole chain; an inner letter 1# drops t_i and an inner
    letter 0# splits into φ_{t..t_i} after ρ^A_{t_i..s}.
    """

    def __init__(self, source, target: StrictSegalDg, phi: Callable[[Tree], GradedHom],
                 top: Callable[[Chain], Optional[GradedHom]], name: str = ""):
        if isinstance(source, StrictSegalDg):
            source = strict_as_homotopy(source)
        self.source: HomotopySegalDg = source
        self.target = target
        self.ring = target.ring
        self.name = name
        self._phi_fn = phi
        self._top_fn = top
        self._F: Dict[Tree, GradedHom] = {}
        self._T: Dict[Chain, GradedHom] = {}
        self._C: Dict = {}

    def phi(self, t: Tree) -> GradedHom:
        if t not in self._F:
            self._F[t] = self._phi_fn(t)
        return self._F[t]

    def top(self, chain: Chain) -> GradedHom:
        chain = tuple(chain)
        if chain not in self._T:
            k = len(chain) - 2
            if is_degenerate(chain):
                f = zero_hom(self.ring, k + 1)
            else:
                f = self._top_fn(chain) or zero_hom(self.ring, k + 1)
            self._T[chain] = f
        return self._T[chain]

    def component(self, chain: Chain, w: str, order: str = "high") -> GradedHom:
        """Coefficient of the cube word w (length k + 1) in φ_chain."""
        chain = tuple(chain)
        n = len(chain) - 1
        if len(w) != n:
            raise ValueError(f"word {w!r} does not have length {n}")
        if n == 0:
            return self.phi(chain[0])
        key = (chain, w, order)
        if key in self._C:
            return self._C[key]
        A = self.source
        slots = [i for i in range(1, n + 1) if w[n - i] != "e"]
        if not slots:
            top = self.top(chain)
            src = A.A(chain[-1])
            f = top if n % 2 == 0 else GradedHom(
                self.ring, n, lambda lab: top.on_basis(lab).scale((-1) ** src.degree_of(lab)))
        else:
            i = max(slots) if order == "high" else min(slots)
            rest = w[:n - i] + w[n - i + 1:]
            if i == n:
                if w[0] == "1":
                    rho_b = self.target.rho(chain[0], chain[1])
                    f = self.component(chain[1:], rest, order).then(rho_b)
                else:
                    f = A.component(chain, rest, order).then(self.phi(chain[0]))
            else:
                p = _pos(chain, i)
                if w[n - i] == "1":
                    f = self.component(chain[:p] + chain[p + 1:], rest, order)
                else:
                    outer = self.component(chain[:p + 1], w[:n - i], order)
                    inner = A.component(chain[p:], w[n - i + 1:], order)
                    f = inner.then(outer)
        self._C[key] = f
        return f

    def generate(self, chain: Chain, order: str = "high") -> GradedHom:
        """The full operator φ_chain: A(s) -> B(t) ⊗ I^{k+1}, labels (y, word)."""
        chain = tuple(chain)
        comps = [(w, self.component(chain, w, order)) for w in cube_words(len(chain) - 1)]

        def on(lab):
            out = FormalSum(self.ring)
            for w, f in comps:
                for y, c in f.on_basis(lab).items():
                    out.add_term((y, w), c)
            return out

        return GradedHom(self.ring, 0, on, f"phi[{format_chain(chain)}]")

    def target_complex(self, chain: Chain) -> Complex:
        from .cubical import cube_cochains
        return tensor(self.target.A(chain[0]), cube_cochains(len(chain) - 1, self.ring))


def identity_morphism(S) -> HomotopyMorphismData:
    """φ_t = id and φ^□ = 0, from S (strict) to itself."""
    return HomotopyMorphismData(S, S, lambda t: identity_hom(S.ring), lambda chain: None, "id")


def morphism_top_relation(phi: HomotopyMorphismData, chain: Chain, lab) -> Tuple[FormalSum, FormalSum]:
    """Both sides of the top-component relation for φ^□ on a basis element of A(s).

    δ(φ^□) = (-1)^{k+1} ρ^B_{t->t_k} φ^□_{t_k..s} + Σ (-1)^i φ^□_{drop t_i}
             + (-1)^k φ_t ρ^{A□}_{chain} - Σ (-1)^{i + (k-i+1)(i-1)} φ^□_{t..t_i} ρ^{A□}_{t_i..s}
    """
    A, B = phi.source, phi.target
    k = len(chain) - 2
    s, t = chain[-1], chain[0]
    f = phi.top(chain)
    lhs = B.A(t).d(f.on_basis(lab)) - f(A.A(s).d.on_basis(lab)).scale((-1) ** f.degree)
    rhs = FormalSum(phi.ring)
    inner = phi.top(chain[1:]).on_basis(lab) if k >= 1 else phi.phi(s).on_basis(lab)
    rhs.add_scaled(B.rho(t, chain[1])(inner), (-1) ** (k + 1))
    for i in range(1, k + 1):
        p = _pos(chain, i)
        rhs.add_scaled(phi.top(chain[:p] + chain[p + 1:]).on_basis(lab), (-1) ** i)
        twist = (-1) ** ((k - i + 1) * (i - 1))
        rhs.add_scaled(phi.top(chain[:p + 1])(A.top(chain[p:]).on_basis(lab)), -(-1) ** i * twist)
    rhs.add_scaled(phi.phi(t)(A.top(chain).on_basis(lab)), (-1) ** k)
    return lhs, rhs


def _morphism_chains(phi: HomotopyMorphismData, trees: Optional[Iterable[Tree]] = None) -> List[Chain]:
    chains = stored_chains(phi.source)
    if trees is not None:
        keep = set(trees)
        chains = [c for c in chains if c[0] in keep]
    return chains


def verify_morphism(phi: HomotopyMorphismData, trees: Optional[Iterable[Tree]] = None) -> Report:
    """Underlying chain maps, relations (*) and (**), generated operators and the Segal diagrams."""
    A, B = phi.source, phi.target
    rep = Report(f"homotopy morphism {phi.name}")
    tree_list = list(trees) if trees is not None else A.trees()
    n_u = 0
    bad_u = []
    for t in tree_list:
        sub = check_chain_map(phi.phi(t), A.A(t), B.A(t))
        n_u += 1
        if not sub.ok:
            bad_u.append(f"{t}: {sub.checks[0].witnesses[0]}")
    rep.add("underlying maps are chain maps", n_u, bad_u)
    chains = _morphism_chains(phi, tree_list)
    n_top, bad_top, n_gen, bad_gen, n_coh, bad_coh = 0, [], 0, [], 0, []
    for c in chains:
        for lab in A.A(c[-1]).all_labels():
            n_top += 1
            lhs, rhs = morphism_top_relation(phi, c, lab)
            if lhs != rhs:
                bad_top.append(f"{format_chain(c)} on {format_label(lab)}: {format_sum(lhs)} vs {format_sum(rhs)}")
        n_gen += 1
        sub = check_chain_map(phi.generate(c), A.A(c[-1]), phi.target_complex(c))
        if not sub.ok:
            bad_gen.append(f"{format_chain(c)}: {sub.checks[0].witnesses[0]}")
        n_coh += 1
        hi, lo = phi.generate(c, "high"), phi.generate(c, "low")
        for lab in A.A(c[-1]).all_labels():
            if hi.on_basis(lab) != lo.on_basis(lab):
                bad_coh.append(f"{format_chain(c)} on {format_label(lab)}")
                break
    rep.add("top-component relation (*)", n_top, bad_top)
    rep.add("generated operators are chain maps", n_gen, bad_gen)
    rep.add("reduction order does not matter", n_coh, bad_coh)
    # degeneracy relations: φ_{..t_j = t_j..} = s^j φ_chain
    from .cubical import degeneracy
    n_deg, bad_deg = 0, []
    for c in chains:
        n = len(c) - 1
        for j in range(0, n + 1):
            p = len(c) - 1 - j
            rep_chain = c[:p] + (c[p],) + c[p:]
            n_deg += 1
            lhs = phi.generate(rep_chain)
            rhs_op = phi.generate(c)
            for lab in A.A(c[-1]).all_labels():
                rhs = FormalSum(phi.ring)
                for (y, w), cy in rhs_op.on_basis(lab).items():
                    for w2, cw in degeneracy(w, j, phi.ring).items():
                        rhs.add_term((y, w2), cy * cw)
                if lhs.on_basis(lab) != rhs:
                    bad_deg.append(f"s^{j} on {format_chain(c)}")
                    break
    rep.add("degeneracy relations", n_deg, bad_deg)
    # Segal maps
    n_seg, bad_seg = 0, []
    for t in tree_list:
        for m in morphisms_from(t):
            if m.target.is_corolla():
                continue
            n_seg += 1
            err = _compatibility(B, (t, t), m, lambda ch: _underlying_as_chain(phi, ch), 0, source=A)
            if err:
                bad_seg.append(err)
    for c in chains:
        for m in morphisms_from(c[-1]):
            if m.target.is_corolla():
                continue
            n_seg += 1
            err = _compatibility(B, c, m, phi.generate, len(c) - 1, source=A)
            if err:
                bad_seg.append(err)
    rep.add("compatibility with Segal maps", n_seg, bad_seg)
    return rep


def _underlying_as_chain(phi: HomotopyMorphismData, chain: Chain) -> GradedHom:
    f = phi.phi(chain[0])
    return GradedHom(phi.ring, 0, lambda lab: f.on_basis(lab).map_labels(lambda y: (y, "")))


class InducedMorphism:
    """φ_* = Σ_m φ_m: B^c(A) -> B^c(B) for a homotopy morphism into a strict cooperad."""

    def __init__(self, phi: HomotopyMorphismData, check: bool = True):
        if check:
            rep = verify_morphism(phi)
            if not rep.ok:
                raise ValueError("not a homotopy morphism: " + "; ".join(
                    f"{c.name}: {c.witnesses[0]}" for c in rep.failed()))
        self.phi = phi
        self.source = cobar_homotopy(phi.source)
        self.target = cobar_strict(phi.target)
        self.ring = phi.ring

    def part(self, m: Optional[int] = None) -> GradedHom:
        """φ_m (or the whole of φ_*) on pairs (t, a)."""
        phi = self.phi

        def on(lab):
            t, a = lab
            n = len(t.vertices())
            out = FormalSum(self.ring)
            if m is None or m == 0:
                out.add_scaled(phi.phi(t).on_basis(a).map_labels(lambda y: (t, y)))
            if m == 0:
                return out
            for chain, sign in self.source.terms_into(t):
                mm = len(chain) - 1
                if m is not None and mm != m:
                    continue
                s = sign * (-1) ** (mm * n)
                for y, c in phi.top(chain).on_basis(a).items():
                    out.add_term((chain[0], y), s * c)
            return out

        return GradedHom(self.ring, 0, on, "φ_*" if m is None else f"φ_{m}")

    def verify(self, r_max: Optional[int] = None) -> Report:
        """Commutation with total differentials, the per-m identity and compatibility with every ∘_p."""
        r_max = r_max or self.phi.source.r_max
        rep = Report(f"induced morphism {self.phi.name}")
        f = self.part()
        n_d, bad_d = 0, []
        n_m, bad_m = 0, []
        for r in range(2, r_max + 1):
            L = tuple(range(1, r + 1))
            sub = check_chain_map(f, self.source(L), self.target(L))
            n_d += sub.checks[0].count
            bad_d.extend(sub.checks[0].witnesses)
            for m in range(0, max(r - 1, 1)):
                cnt, bad = self.per_m_relation(L, m)
                n_m += cnt
                bad_m.extend(bad)
        rep.add("φ_* commutes with the total differentials", n_d, bad_d)
        rep.add("δφ_m + ∂φ_{m-1} = φ_m δ + Σ φ_i ∂_{m-i}", n_m, bad_m)
        n_c, bad_c = 0, []
        for r in range(3, r_max + 1):
            for I, J in self.source.pointed_shuffles(r):
                src_c = self.source.source_complex(I, J)
                comp_a = self.source.compose(I, J)
                comp_b = self.target.compose(I, J)
                for lab in src_c.all_labels():
                    n_c += 1
                    lhs = f(comp_a.on_basis(lab))
                    x, y = lab
                    rhs = _compose_sum(self.target, I, J, f.on_basis(x), f.on_basis(y))
                    if lhs != rhs:
                        bad_c.append(f"∘_{J[0]} {I} {J} on {_cobar_format(x)}, {_cobar_format(y)}")
                    for mm in range(0, r - 1):
                        lhs_m = self.part(mm)(comp_a.on_basis(lab))
                        rhs_m = FormalSum(self.ring)
                        for i in range(0, mm + 1):
                            rhs_m.add_scaled(_compose_sum(self.target, I, J, self.part(i).on_basis(x),
                                                          self.part(mm - i).on_basis(y)))
                        if lhs_m != rhs_m:
                            bad_c.append(f"φ_{mm} ∘_{J[0]} {I} {J} on {_cobar_format(x)}, {_cobar_format(y)}")
        rep.add("φ_* preserves compositions, degree by degree", n_c, bad_c)
        return rep

    def per_m_relation(self, L: Tuple[int, ...], m: int) -> Tuple[int, List[str]]:
        src = self.source(L)
        dA, dB = self.source.delta(), self.target.delta()
        pB = self.target.partial(1)
        bad = []
        for lab in src.all_labels():
            lhs = dB(self.part(m).on_basis(lab))
            if m >= 1:
                lhs = lhs + pB(self.part(m - 1).on_basis(lab))
            rhs = self.part(m)(dA.on_basis(lab))
            for i in range(0, m):
                rhs = rhs + self.part(i)(self.source.partial(m - i).on_basis(lab))
            if lhs != rhs:
                bad.append(f"m = {m} on {_cobar_format(lab)}")
        return len(src.all_labels()), bad


def induced_morphism(phi: HomotopyMorphismData) -> InducedMorphism:
    return InducedMorphism(phi)


# a nontrivial homotopy morphism found by search

def solver_strict_target(ring: Ring, r_max: int = 4) -> StrictSegalDg:
    """The strict cooperad on the solver complexes whose coproducts all send 1 to 1."""
    from .segal_cooperads import _solver_base
    big, complexes, segal = _solver_base(ring)

    def rho(t, s):
        return GradedHom(ring, 0, lambda lab: FormalSum.basis(ring, "1") if lab == "1" else FormalSum(ring))

    return StrictSegalDg(ring, complexes, rho, segal, r_max, f"solver-strict-{ring.name}")


def morphism_slots(A: HomotopySegalDg, B: StrictSegalDg) -> Dict[Tree, List[Tuple[Chain, object, object]]]:
    """Matrix entries of φ^□ allowed by degrees, grouped by the source tree of the chain."""
    slots: Dict[Tree, List] = {}
    for c in stored_chains(A):
        n = len(c) - 1
        src, tgt = A.A(c[-1]), B.A(c[0])
        for x in src.all_labels():
            for y in tgt.in_degree(src.degree_of(x) + n):
                slots.setdefault(c[0], []).append((c, x, y))
    return slots


def solve_morphism(A: HomotopySegalDg, B: StrictSegalDg, phi: Callable[[Tree], GradedHom],
                   coefficients: Optional[Sequence] = None, name: str = "solver") -> Tuple[HomotopyMorphismData, Dict]:
    """Search φ^□ block by block (source trees by increasing vertex count).

    Each block keeps its first solution with a nonzero entry, or its first
    solution if all are zero; a block without solutions raises ValueError.
    Returns the morphism and the per-block solution counts.
    """
    ring = B.ring
    if coefficients is None:
        coefficients = list(range(ring.characteristic)) if ring.characteristic else [-1, 0, 1]
    slots = morphism_slots(A, B)
    chosen: Dict[Tuple[Chain, object, object], object] = {}

    def make():
        table: Dict[Chain, Dict] = {}
        for (c, x, y), v in chosen.items():
            if v:
                table.setdefault(c, {}).setdefault(x, FormalSum(ring)).add_term(y, v)

        def top(chain):
            tab = table.get(chain)
            if tab is None:
                return None
            return GradedHom(ring, len(chain) - 1, lambda lab, tab=tab: tab.get(lab, FormalSum(ring)))

        return HomotopyMorphismData(A, B, phi, top, name)

    counts = {}
    for t in sorted(slots, key=lambda t: (len(t.vertices()), t.sort_key())):
        row = slots[t]
        found = []
        for values in itertools.product(coefficients, repeat=len(row)):
            chosen.update(zip(row, values))
            if verify_morphism(make(), [t]).ok:
                found.append(values)
        counts[t] = len(found)
        if not found:
            raise ValueError(f"no homotopy morphism data in the block of {t}")
        pick = next((v for v in found if any(v)), found[0])
        chosen.update(zip(row, pick))
    return make(), counts


def solver_morphism(ring: Ring) -> HomotopyMorphismData:
    """φ: solver instance -> strict solver cooperad with identity underlying maps."""
    from .segal_cooperads import solver_instance
    A = solver_instance(ring)
    B = solver_strict_target(ring)
    phi, _ = solve_morphism(A, B, lambda t: identity_hom(ring), name=f"solver-{ring.name}")
    return phi
