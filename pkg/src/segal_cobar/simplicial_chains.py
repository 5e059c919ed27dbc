"""Normalized chains on standard simplices and their products.

A simplex of Δ^q is a tuple of vertices (v0 <= ... <= vp); it is degenerate
when two consecutive vertices agree, and degenerate simplices are zero in
normalized chains.  A simplex of a product Δ^{q1} x ... x Δ^{qn} is a tuple of
equally long vertex tuples, degenerate when two consecutive columns agree.
"""

from __future__ import annotations

import itertools
import re
from typing import Iterator, List, Sequence, Tuple

from .ring_linear import QQ, Complex, FormalSum, Ring, dual_complex

Simplex = Tuple[int, ...]
ProductSimplex = Tuple[Simplex, ...]


def is_degenerate(s: Simplex) -> bool:
    return any(a == b for a, b in zip(s, s[1:]))


def is_degenerate_product(x: ProductSimplex) -> bool:
    cols = list(zip(*x))
    return any(a == b for a, b in zip(cols, cols[1:]))


def format_simplex(s: Simplex) -> str:
    return "d[" + ",".join(str(v) for v in s) + "]"


_SIMPLEX_RE = re.compile(r"^\s*d\[\s*(\d+(?:\s*,\s*\d+)*)\s*\]\s*$")


def parse_simplex(text: str) -> Simplex:
    m = _SIMPLEX_RE.match(text)
    if not m:
        raise ValueError(f"bad simplex label {text!r}; expected e.g. d[0,1,1]")
    s = tuple(int(v) for v in m.group(1).split(","))
    if any(a > b for a, b in zip(s, s[1:])):
        raise ValueError(f"vertices must be weakly increasing: {text!r}")
    return s


def nondegenerate_simplices(q: int, dim: int = None) -> List[Simplex]:
    dims = range(q + 1) if dim is None else [dim]
    return [c for p in dims for c in itertools.combinations(range(q + 1), p + 1)]


def boundary(s: Simplex, ring: Ring = QQ) -> FormalSum:
    out = FormalSum(ring)
    if len(s) <= 1:
        return out
    for i in range(len(s)):
        face = s[:i] + s[i + 1:]
        if not is_degenerate(face):
            out.add_term(face, -1 if i % 2 else 1)
    return out


def chains(q: int, ring: Ring = QQ) -> Complex:
    """N_*(Δ^q)."""
    basis = {p: nondegenerate_simplices(q, p) for p in range(q + 1)}
    return Complex(ring, basis, lambda s: boundary(s, ring), f"N(D{q})", label_format=format_simplex)


def cochains(q: int, ring: Ring = QQ) -> Complex:
    """N^*(Δ^q) in lower grading, basis ('#', simplex)."""
    return dual_complex(chains(q, ring), f"N*(D{q})")


def aw_diagonal(s: Simplex, ring: Ring = QQ) -> FormalSum:
    """Alexander-Whitney diagonal: sum of front face ⊗ back face."""
    return FormalSum.from_pairs(ring, (((s[:k + 1], s[k:]), 1) for k in range(len(s))))


def aw_iterate(s: Simplex, r: int, ring: Ring = QQ) -> FormalSum:
    """r-fold iterated AW diagonal with flat r-tuples as labels."""
    n = len(s) - 1
    out = FormalSum(ring)
    for cuts in itertools.combinations_with_replacement(range(n + 1), r - 1):
        pts = (0,) + cuts + (n,)
        out.add_term(tuple(s[pts[i]:pts[i + 1] + 1] for i in range(r)), 1)
    return out


def aw_product(x: ProductSimplex, ring: Ring = QQ) -> FormalSum:
    """AW map N(X x Y) -> N(X) ⊗ N(Y): front face of the first coordinate
    tensored with the back face of the second; degenerate factors vanish."""
    a, b = x
    out = FormalSum(ring)
    for k in range(len(a)):
        front, back = a[:k + 1], b[k:]
        if not is_degenerate(front) and not is_degenerate(back):
            out.add_term((front, back), 1)
    return out


def lattice_paths(m: int, n: int) -> Iterator[Tuple[Tuple[Tuple[int, int], ...], int]]:
    """Monotone lattice paths (0,0) -> (m,n) with their shuffle signs.

    The sign counts pairs (horizontal step, vertical step) where the vertical
    step comes first, i.e. the sign of the (m,n)-shuffle permutation.
    """
    for horiz in itertools.combinations(range(m + n), m):
        hs = set(horiz)
        pts = [(0, 0)]
        inversions = 0
        verticals = 0
        for step in range(m + n):
            a, b = pts[-1]
            if step in hs:
                pts.append((a + 1, b))
                inversions += verticals
            else:
                pts.append((a, b + 1))
                verticals += 1
        yield tuple(pts), (-1) ** inversions


def em_shuffle(s: Simplex, t: Simplex, ring: Ring = QQ) -> FormalSum:
    """Eilenberg-MacLane shuffle map N(Δ^p) ⊗ N(Δ^q) -> N(Δ^p x Δ^q)."""
    m, n = len(s) - 1, len(t) - 1
    out = FormalSum(ring)
    for path, sign in lattice_paths(m, n):
        x = (tuple(s[a] for a, _ in path), tuple(t[b] for _, b in path))
        if not is_degenerate_product(x):
            out.add_term(x, sign)
    return out


def push_vertexwise(x: FormalSum, f) -> FormalSum:
    """Image of product-simplex chains under a vertexwise map (a, b) -> f(a, b)."""
    out = FormalSum(x.ring)
    for (a, b), c in x.terms.items():
        img = tuple(f(u, v) for u, v in zip(a, b))
        if not is_degenerate(img):
            out.add_term(img, c)
    return out


def push_min(x: FormalSum) -> FormalSum:
    return push_vertexwise(x, min)


def push_max(x: FormalSum) -> FormalSum:
    return push_vertexwise(x, max)


def connection_min(a: Simplex, b: Simplex, ring: Ring = QQ) -> FormalSum:
    """∇_* = N_*(min) ∘ EM on N_*(Δ^1) ⊗ N_*(Δ^1)."""
    return push_min(em_shuffle(a, b, ring))


def connection_max(a: Simplex, b: Simplex, ring: Ring = QQ) -> FormalSum:
    """∇^max_* = N_*(max) ∘ EM."""
    return push_max(em_shuffle(a, b, ring))


def interval_basis() -> List[Simplex]:
    return [(0,), (1,), (0, 1)]
