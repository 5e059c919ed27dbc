"""The chain Barratt-Eccles operad E(r) = N_*(W Σ_r).

A permutation is the tuple of its values (s(1), ..., s(r)).  A basis simplex
of E(r) is a tuple of permutations (w0, ..., wn) with w_i != w_{i+1}; the
degree is n.  Surjections are tuples of values in {1..r}.

The operad acts on normalized chains of standard simplices through table
reduction followed by interval cuts, and hence on normalized cochains by
duality.
"""

from __future__ import annotations

import itertools
import math
import re
from typing import List, Sequence, Tuple

from .ring_linear import QQ, FormalSum, Report, Ring
from .simplicial_chains import is_degenerate, lattice_paths

Perm = Tuple[int, ...]
PermSimplex = Tuple[Perm, ...]
Surjection = Tuple[int, ...]


# permutations

def perm_compose(u: Perm, i: int, v: Perm) -> Perm:
    """u ∘_i v: insert the values of v, shifted by i-1, in place of the value i of u."""
    k, l = len(u), len(v)
    if not 1 <= i <= k:
        raise ValueError(f"composition position {i} out of range for arity {k}")
    out: List[int] = []
    for x in u:
        if x == i:
            out.extend(y + i - 1 for y in v)
        elif x > i:
            out.append(x + l - 1)
        else:
            out.append(x)
    return tuple(out)


def perm_mul(s: Perm, w: Perm) -> Perm:
    """Product s w as maps: (s w)(j) = s(w(j))."""
    return tuple(s[x - 1] for x in w)


def perm_inverse(s: Perm) -> Perm:
    out = [0] * len(s)
    for pos, val in enumerate(s, 1):
        out[val - 1] = pos
    return tuple(out)


def perm_sign(s: Sequence[int]) -> int:
    inv = sum(1 for a, b in itertools.combinations(s, 2) if a > b)
    return -1 if inv % 2 else 1


def identity_perm(r: int) -> Perm:
    return tuple(range(1, r + 1))


def all_perms(r: int) -> List[Perm]:
    return list(itertools.permutations(range(1, r + 1)))


def direct_sum(u: Perm, v: Perm) -> Perm:
    p = len(u)
    return u + tuple(p + y for y in v)


# basis of E(r)

def is_nondegenerate(x: PermSimplex) -> bool:
    return all(a != b for a, b in zip(x, x[1:]))


def be_basis(r: int, n: int) -> List[PermSimplex]:
    """Nondegenerate simplices of E(r) in degree n."""
    perms = all_perms(r)
    out = [(p,) for p in perms]
    for _ in range(n):
        out = [x + (p,) for x in out for p in perms if p != x[-1]]
    return out


def be_element(ring: Ring, x: PermSimplex, coef=1) -> FormalSum:
    if not is_nondegenerate(x):
        return FormalSum(ring)
    return FormalSum.basis(ring, x, coef)


def format_perm_simplex(x: PermSimplex) -> str:
    return "(" + ",".join("[" + " ".join(str(v) for v in w) + "]" for w in x) + ")"


_PS_RE = re.compile(r"\[([\d\s]+)\]")


def parse_perm_simplex(text: str) -> PermSimplex:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError(f"bad permutation simplex {text!r}; expected e.g. ([1 2],[2 1])")
    perms = tuple(tuple(int(v) for v in m.split()) for m in _PS_RE.findall(text))
    if not perms:
        raise ValueError(f"empty permutation simplex {text!r}")
    r = len(perms[0])
    for p in perms:
        if sorted(p) != list(range(1, r + 1)):
            raise ValueError(f"{p} is not a permutation of 1..{r}")
    return perms


def format_surjection(s: Surjection) -> str:
    return "<" + " ".join(str(v) for v in s) + ">"


def parse_surjection(text: str) -> Surjection:
    text = text.strip()
    if not (text.startswith("<") and text.endswith(">")):
        raise ValueError(f"bad surjection {text!r}; expected e.g. <1 2 1>")
    s = tuple(int(v) for v in text[1:-1].split())
    if not s or set(s) != set(range(1, max(s) + 1)):
        raise ValueError(f"{text!r} is not a surjection")
    return s


def be_degree(x: PermSimplex) -> int:
    return len(x) - 1


def be_arity(x: PermSimplex) -> int:
    return len(x[0])


# structure maps on basis elements

def be_differential(x: PermSimplex, ring: Ring = QQ) -> FormalSum:
    out = FormalSum(ring)
    if len(x) <= 1:
        return out
    for i in range(len(x)):
        face = x[:i] + x[i + 1:]
        if is_nondegenerate(face):
            out.add_term(face, -1 if i % 2 else 1)
    return out


def be_sym(s: Perm, x: PermSimplex) -> PermSimplex:
    """Left translation s·(w0, ..., wn) = (s w0, ..., s wn)."""
    if len(s) != be_arity(x):
        raise ValueError("arity mismatch in symmetric action")
    return tuple(perm_mul(s, w) for w in x)


def be_compose(x: PermSimplex, i: int, y: PermSimplex, ring: Ring = QQ) -> FormalSum:
    """x ∘_i y: sum over lattice paths of termwise composites, shuffle-signed."""
    k = be_arity(x)
    if not 1 <= i <= k:
        raise ValueError(f"composition position {i} out of range for arity {k}")
    m, n = len(x) - 1, len(y) - 1
    out = FormalSum(ring)
    for path, sign in lattice_paths(m, n):
        z = tuple(perm_compose(x[a], i, y[b]) for a, b in path)
        if is_nondegenerate(z):
            out.add_term(z, sign)
    return out


def be_diagonal(x: PermSimplex, ring: Ring = QQ) -> FormalSum:
    """Alexander-Whitney diagonal E(r) -> E(r) ⊗ E(r), labels (front, back)."""
    return FormalSum.from_pairs(ring, (((x[:k + 1], x[k:]), 1) for k in range(len(x))))


def be_augmentation(x: PermSimplex) -> int:
    return 1 if len(x) == 1 else 0


def extend(f, x: FormalSum) -> FormalSum:
    """Extend a basis-level function returning FormalSums linearly."""
    out = FormalSum(x.ring)
    for lab, c in x.terms.items():
        out.add_scaled(f(lab), c)
    return out


def be_compose_sums(a: FormalSum, i: int, b: FormalSum) -> FormalSum:
    out = FormalSum(a.ring)
    for x, cx in a.terms.items():
        for y, cy in b.terms.items():
            out.add_scaled(be_compose(x, i, y, a.ring), cx * cy)
    return out


# table reduction and interval cuts

def table_reduction(x: PermSimplex) -> List[Surjection]:
    """Surjections of the table reduction of (s_0, ..., s_l), with
    degenerate ones dropped.  Every term has coefficient +1."""
    l = len(x) - 1
    out: List[Surjection] = []

    def rows(i: int, used: frozenset, acc: Tuple[int, ...]):
        retained = [v for v in x[i] if v not in used]
        if i == l:
            s = acc + tuple(retained)
            if not is_degenerate(s):
                out.append(s)
            return
        for cut in range(len(retained)):
            row = tuple(retained[:cut + 1])
            rows(i + 1, used | frozenset(row[:-1]), acc + row)

    rows(0, frozenset(), ())
    return out


def caesura_positions(s: Surjection) -> List[int]:
    """Indices (0-based) of the terms of s that are not the last occurrence of their value."""
    return [x for x, v in enumerate(s) if v in s[x + 1:]]


def interval_cut(s: Surjection, simplex: Sequence[int], ring: Ring = QQ) -> FormalSum:
    """s_*(simplex) as a sum of r-fold tensors of simplices.

    The fundamental simplex is cut into intervals labelled by the terms of
    s; the i-th factor concatenates the intervals labelled i.  The sign is
    the Koszul sign for moving the intervals into label order, where an
    interval of length d has degree d + 1 when it ends at a caesura and d
    otherwise, times the position sign (-1)^{sum of rho over the right
    ends of the caesura intervals}.  This is the convention under which the
    coaction is a chain map; the tests pin it.
    """
    q = len(simplex) - 1
    n = len(s)
    r = max(s)
    caes = set(caesura_positions(s))
    out = FormalSum(ring)
    for inner in itertools.combinations_with_replacement(range(q + 1), n - 1):
        rho = (0,) + inner + (q,)
        factors: List[List[int]] = [[] for _ in range(r)]
        degs = []
        for x in range(n):
            a, b = rho[x], rho[x + 1]
            factors[s[x] - 1].extend(simplex[a:b + 1])
            degs.append(b - a + (1 if x in caes else 0))
        tensor = tuple(tuple(f) for f in factors)
        if any(is_degenerate(f) for f in tensor):
            continue
        out.add_term(tensor, _cut_sign(s, rho, degs, caes))
    return out


def _cut_sign(s, rho, degs, caes) -> int:
    # Koszul sign of sorting the intervals by label (stable)
    e = 0
    n = len(s)
    for x in range(n):
        for y in range(x + 1, n):
            if s[x] > s[y]:
                e += degs[x] * degs[y]
    # position sign from the right ends of caesura intervals
    for x in caes:
        e += rho[x + 1]
    return -1 if e % 2 else 1


def coalgebra_act(x: PermSimplex, simplex: Sequence[int], ring: Ring = QQ) -> FormalSum:
    """x_*(simplex) in N_*(Δ^q)^{⊗r}: table reduction then interval cuts."""
    out = FormalSum(ring)
    for s in table_reduction(x):
        out.add_scaled(interval_cut(s, simplex, ring), 1)
    return out


def coalgebra_act_sum(x: FormalSum, simplex: Sequence[int]) -> FormalSum:
    out = FormalSum(x.ring)
    for lab, c in x.terms.items():
        out.add_scaled(coalgebra_act(lab, simplex, x.ring), c)
    return out


def dual_cochain_act(x: PermSimplex, cochains: Sequence[FormalSum], q: int, ring: Ring = QQ) -> FormalSum:
    """x(a_1, ..., a_r) on N^*(Δ^q), cochains given as sums of ('#', simplex).

    x(a)(σ) = (-1)^{|x|(|a|+1)} <a_1 ⊗ ... ⊗ a_r, x_*(σ)>, with the Koszul
    sign of the tensor pairing; |a| is the total (lower) degree of the a_i.
    This sign makes the action a chain map for the dual differential of
    ring_linear.dual_complex.
    """
    from .simplicial_chains import nondegenerate_simplices

    r = be_arity(x)
    if len(cochains) != r:
        raise ValueError("wrong number of arguments")
    out = FormalSum(ring)
    deg_x = be_degree(x)
    # expand multilinearly over basis cochains
    for combo in itertools.product(*(c.items() for c in cochains)):
        labs = [lab[1] for lab, _ in combo]
        coef = math.prod(c for _, c in combo)
        dims = [len(t) - 1 for t in labs]
        total = sum(dims)
        p = total - deg_x
        if p < 0 or p > q:
            continue
        sign_a = deg_x * (total + 1)
        for sigma in nondegenerate_simplices(q, p):
            img = coalgebra_act(x, sigma, ring)
            val = img.coefficient(tuple(labs))
            if val == 0:
                continue
            # <a_1...a_r, b_1...b_r> with |a_i| = -dims[i], |b_i| = dims[i]
            e = sign_a + sum(dims[j] * dims[i] for i in range(r) for j in range(i + 1, r))
            out.add_term(("#", sigma), coef * val * (-1) ** e)
    return out


# exhaustive verification

def _basis_upto(r_max: int, d_max: int) -> List[PermSimplex]:
    return [x for r in range(1, r_max + 1) for n in range(d_max + 1) for x in be_basis(r, n)]


def _diag_compose(a: FormalSum, i: int, b: FormalSum, ring: Ring) -> FormalSum:
    # (Δ ∘_i Δ) on E ⊗ E with the middle interchange sign
    out = FormalSum(ring)
    for (a1, a2), ca in a.terms.items():
        for (b1, b2), cb in b.terms.items():
            sign = (-1) ** (be_degree(a2) * be_degree(b1))
            for z1, c1 in be_compose(a1, i, b1, ring).terms.items():
                for z2, c2 in be_compose(a2, i, b2, ring).terms.items():
                    out.add_term((z1, z2), ca * cb * c1 * c2 * sign)
    return out


def _d_pair(x: FormalSum, ring: Ring) -> FormalSum:
    out = FormalSum(ring)
    for (a, b), c in x.terms.items():
        for y, cy in be_differential(a, ring).terms.items():
            out.add_term((y, b), c * cy)
        for y, cy in be_differential(b, ring).terms.items():
            out.add_term((a, y), c * cy * (-1) ** be_degree(a))
    return out


def verify_barratt_eccles(r_max: int = 3, d_max: int = 2, ring: Ring = QQ) -> Report:
    """d² = 0, ∘_i and Δ chain maps, associativity, unit, equivariance and Δ an operad morphism.

    Compositions are checked for pairs and triples whose total arity stays
    within r_max + 1 and whose total degree stays within d_max.
    """
    rep = Report(f"Barratt-Eccles operad, arity <= {r_max}, degree <= {d_max}")
    elems = _basis_upto(r_max, d_max)

    def one(x):
        return FormalSum.basis(ring, x)

    bad = [format_perm_simplex(x) for x in elems
           if not extend(lambda y: be_differential(y, ring), be_differential(x, ring)).is_zero()]
    rep.add("d^2 = 0", len(elems), bad)

    pairs = [(x, y) for x in elems for y in elems
             if be_arity(x) + be_arity(y) - 1 <= r_max + 1 and be_degree(x) + be_degree(y) <= d_max]
    bad, n = [], 0
    for x, y in pairs:
        for i in range(1, be_arity(x) + 1):
            n += 1
            lhs = extend(lambda z: be_differential(z, ring), be_compose(x, i, y, ring))
            rhs = be_compose_sums(be_differential(x, ring), i, one(y))
            rhs.add_scaled(be_compose_sums(one(x), i, be_differential(y, ring)), (-1) ** be_degree(x))
            if lhs != rhs:
                bad.append(f"{format_perm_simplex(x)} o_{i} {format_perm_simplex(y)}")
    rep.add("o_i is a chain map", n, bad)

    bad = [format_perm_simplex(x) for x in elems
           if _d_pair(be_diagonal(x, ring), ring) != extend(lambda y: be_diagonal(y, ring), be_differential(x, ring))]
    rep.add("diagonal is a chain map", len(elems), bad)

    bad, n = [], 0
    for x, y in pairs:
        for z in elems:
            if be_degree(x) + be_degree(y) + be_degree(z) > d_max or be_arity(x) + be_arity(y) + be_arity(z) > 6:
                continue
            k, l = be_arity(x), be_arity(y)
            for i in range(1, k + 1):
                for j in range(1, l + 1):
                    n += 1
                    lhs = be_compose_sums(be_compose(x, i, y, ring), i + j - 1, one(z))
                    rhs = be_compose_sums(one(x), i, be_compose(y, j, z, ring))
                    if lhs != rhs:
                        bad.append(f"sequential {x} {i} {y} {j} {z}")
            for i, j in itertools.combinations(range(1, k + 1), 2):
                n += 1
                lhs = be_compose_sums(be_compose(x, i, y, ring), j + l - 1, one(z))
                rhs = be_compose_sums(be_compose(x, j, z, ring), i, one(y))
                if lhs != rhs.scale((-1) ** (be_degree(y) * be_degree(z))):
                    bad.append(f"parallel {x} {i} {y} {j} {z}")
    rep.add("associativity", n, bad)

    bad, n = [], 0
    for x in elems:
        for i in range(1, be_arity(x) + 1):
            n += 1
            if be_compose(x, i, ((1,),), ring) != one(x):
                bad.append(f"{x} o_{i} 1")
        n += 1
        if be_compose(((1,),), 1, x, ring) != one(x):
            bad.append(f"1 o_1 {x}")
    rep.add("unit", n, bad)

    bad, n = [], 0
    for x, y in pairs:
        k, l = be_arity(x), be_arity(y)
        for s in all_perms(k):
            for t in all_perms(l):
                st_cache = {}
                for i in range(1, k + 1):
                    n += 1
                    lhs = be_compose(be_sym(s, x), i, be_sym(t, y), ring)
                    st = st_cache.setdefault(i, perm_compose(s, i, t))
                    rhs = be_compose(x, perm_inverse(s)[i - 1], y, ring).map_labels(lambda z: be_sym(st, z))
                    if lhs != rhs:
                        bad.append(f"{s} {t} {x} {i} {y}")
    rep.add("equivariance", n, bad)

    bad, n = [], 0
    for x, y in pairs:
        for i in range(1, be_arity(x) + 1):
            n += 1
            lhs = extend(lambda z: be_diagonal(z, ring), be_compose(x, i, y, ring))
            if lhs != _diag_compose(be_diagonal(x, ring), i, be_diagonal(y, ring), ring):
                bad.append(f"{format_perm_simplex(x)} o_{i} {format_perm_simplex(y)}")
    rep.add("diagonal is an operad morphism", n, bad)
    return rep
