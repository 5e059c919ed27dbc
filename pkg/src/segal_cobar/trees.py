"""Leaf-labeled rooted trees with their natural planar embedding.

A tree is stored as a nested tuple: a vertex is the tuple of what sits on
its ingoing edges, a leaf is its integer label.  The canonical form orders
the ingoing edges of every vertex by the minimal leaf above them, so two
trees are isomorphic iff their canonical forms are equal.

In a reduced tree (every vertex has at least two ingoing edges) a vertex is
determined by the set of leaves above it, and so is the edge below it.  We
use these leaf sets as vertex and edge identifiers throughout; a tree
morphism t -> s exists iff V(s) is contained in V(t), and it contracts the
edges below the vertices of V(t) - V(s).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

Node = Union[int, Tuple["Node", ...]]
Vertex = FrozenSet[int]


def _leaves(node: Node) -> Tuple[int, ...]:
    if isinstance(node, int):
        return (node,)
    return tuple(sorted(x for c in node for x in _leaves(c)))


def _min_leaf(node: Node) -> int:
    return node if isinstance(node, int) else min(_min_leaf(c) for c in node)


def _canon(node: Node) -> Node:
    if isinstance(node, int):
        return node
    return tuple(sorted((_canon(c) for c in node), key=_min_leaf))


def _fmt(node: Node) -> str:
    if isinstance(node, int):
        return str(node)
    return "(" + " ".join(_fmt(c) for c in node) + ")"


_TOKEN = re.compile(r"\(|\)|\d+|\S")


class Tree:
    """A tree with at least one vertex, in canonical planar form."""

    __slots__ = ("root", "_leaves", "_hash", "_vs", "_nodes")

    def __init__(self, root: Node):
        if isinstance(root, int):
            raise ValueError("the unit tree (a single edge) is not considered")
        root = _canon(root)
        leaves = _leaves(root)
        if len(set(leaves)) != len(leaves):
            raise ValueError(f"repeated leaf label in {_fmt(root)}")
        self.root = root
        self._leaves = leaves
        self._hash = hash(root)
        self._vs = None
        self._nodes = None

    # construction and syntax

    @classmethod
    def parse(cls, text: str) -> "Tree":
        tokens = _TOKEN.findall(text)
        pos = 0

        def node():
            nonlocal pos
            if pos >= len(tokens):
                raise ValueError(f"unexpected end of tree {text!r}")
            tok = tokens[pos]
            pos += 1
            if tok == "(":
                kids = []
                while pos < len(tokens) and tokens[pos] != ")":
                    kids.append(node())
                if pos >= len(tokens):
                    raise ValueError(f"unbalanced parentheses in {text!r}")
                pos += 1
                if not kids:
                    raise ValueError(f"vertex without ingoing edges in {text!r}")
                return tuple(kids)
            if tok.isdigit():
                return int(tok)
            raise ValueError(f"bad token {tok!r} in tree {text!r}")

        root = node()
        if pos != len(tokens):
            raise ValueError(f"trailing input in tree {text!r}")
        return cls(root)

    @classmethod
    def corolla(cls, leaves: Iterable[int]) -> "Tree":
        return cls(tuple(sorted(leaves)))

    @classmethod
    def from_vertices(cls, vertices: Iterable[Iterable[int]]) -> "Tree":
        """Rebuild a reduced tree from its laminar family of vertex leaf sets."""
        vs = sorted({frozenset(v) for v in vertices}, key=len, reverse=True)
        if not vs:
            raise ValueError("no vertices")
        top = vs[0]
        if any(not v <= top for v in vs):
            raise ValueError("vertex sets do not form a rooted tree")

        def build(v: Vertex) -> Node:
            below = [w for w in vs if w < v]
            maximal = [w for w in below if not any(w < u for u in below)]
            covered = frozenset().union(*maximal) if maximal else frozenset()
            if sum(len(w) for w in maximal) != len(covered):
                raise ValueError("vertex sets are not laminar")
            return tuple([build(w) for w in maximal] + sorted(v - covered))

        return cls(build(top))

    def __str__(self) -> str:
        return _fmt(self.root)

    def __repr__(self) -> str:
        return f"Tree({_fmt(self.root)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Tree) and self.root == other.root

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self):
        return (len(self.vertices()), str(self))

    # shape

    @property
    def leaves(self) -> Tuple[int, ...]:
        return self._leaves

    @property
    def arity(self) -> int:
        return len(self._leaves)

    def is_reduced(self) -> bool:
        def ok(node):
            return isinstance(node, int) or (len(node) >= 2 and all(ok(c) for c in node))
        return ok(self.root)

    def is_corolla(self) -> bool:
        return all(isinstance(c, int) for c in self.root)

    def _require_reduced(self):
        if not self.is_reduced():
            raise ValueError(f"{self} has a vertex with a single ingoing edge; a reduced tree is required")

    def vertices(self) -> List[Vertex]:
        """Vertex order: planar depth-first, root first."""
        if self._vs is None:
            self._require_reduced()
            out: List[Vertex] = []
            nodes: Dict[Vertex, Node] = {}

            def walk(node):
                if isinstance(node, int):
                    return
                v = frozenset(_leaves(node))
                out.append(v)
                nodes[v] = node
                for c in node:
                    walk(c)

            walk(self.root)
            self._vs, self._nodes = tuple(out), nodes
        return list(self._vs)

    def vertex_set(self) -> FrozenSet[Vertex]:
        return frozenset(self.vertices())

    def root_vertex(self) -> Vertex:
        return frozenset(self._leaves)

    def inner_edges(self) -> List[Vertex]:
        """Inner edges, named by the leaf set above them, in the order of their source vertex."""
        return self.vertices()[1:]

    def edge_name(self, e: Vertex) -> int:
        """Position of the source vertex of an inner edge in the vertex order."""
        return self.vertices().index(e)

    def node_of(self, v: Vertex) -> Node:
        self.vertices()
        try:
            return self._nodes[v]
        except KeyError:
            raise KeyError(f"no vertex {sorted(v)} in {self}") from None

    def in_edges(self, v: Vertex) -> List[Vertex]:
        """Ingoing edges of v in planar order, each named by the leaves above it."""
        return [frozenset(_leaves(c)) for c in self.node_of(v)]

    def vertex_arity(self, v: Vertex) -> int:
        return len(self.node_of(v))

    def parent(self, v: Vertex) -> Optional[Vertex]:
        cands = [w for w in self.vertices() if v < w]
        return min(cands, key=len) if cands else None

    # contractions

    def contract(self, edges: Sequence[Vertex]) -> List["Tree"]:
        """The chain t -> t/e1 -> ... -> t/{e1..em}; returns all m+1 trees."""
        inner = set(self.inner_edges())
        seen = set()
        for e in edges:
            e = frozenset(e)
            if e not in inner:
                raise ValueError(f"{sorted(e)} is not an inner edge of {self}")
            if e in seen:
                raise ValueError(f"edge {sorted(e)} contracted twice")
            seen.add(e)
        out = [self]
        vs = set(self.vertices())
        for e in edges:
            vs.discard(frozenset(e))
            out.append(Tree.from_vertices(vs))
        return out

    def subtree(self, vertices: Iterable[Vertex]) -> "Tree":
        """The subtree spanned by a connected set of vertices, leaves labeled by the min leaf above each input edge."""
        vs = set(frozenset(v) for v in vertices)
        if not vs:
            raise ValueError("empty subtree")
        top = max(vs, key=len)
        if any(not v <= top for v in vs):
            raise ValueError("vertex set is not a subtree")

        def build(v):
            kids = []
            for e in self.in_edges(v):
                kids.append(build(e) if e in vs else min(e))
            return tuple(kids)

        t = Tree(build(top))
        if len(t.vertices()) != len(vs):
            raise ValueError("vertex set is not connected")
        return t

    def input_edges(self, vertices: Iterable[Vertex]) -> List[Vertex]:
        """Edges entering a subtree from above, ordered by their min leaf."""
        vs = set(frozenset(v) for v in vertices)
        out = [e for v in vs for e in self.in_edges(v) if e not in vs]
        return sorted(out, key=min)


def parse_tree(text: str) -> Tree:
    return Tree.parse(text)


# enumeration

def _set_partitions(items: Tuple[int, ...]) -> Iterator[List[Tuple[int, ...]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [(first,) + part[i]] + part[i + 1:]
        yield [(first,)] + part


@lru_cache(maxsize=None)
def _reduced_nodes(leaves: Tuple[int, ...]) -> Tuple[Node, ...]:
    if len(leaves) == 1:
        return (leaves[0],)
    out = []
    for part in _set_partitions(leaves):
        if len(part) < 2:
            continue
        for kids in itertools.product(*(_reduced_nodes(tuple(sorted(b))) for b in part)):
            out.append(_canon(tuple(kids)))
    return tuple(out)


def enumerate_reduced(r: Union[int, Sequence[int]]) -> List[Tree]:
    """All reduced trees on the leaves 1..r (or on a given label set), canonically ordered."""
    leaves = tuple(range(1, r + 1)) if isinstance(r, int) else tuple(sorted(r))
    if len(leaves) == 0:
        raise ValueError("trees need at least one leaf")
    if len(leaves) == 1:
        return []
    trees = {Tree(n) for n in _reduced_nodes(leaves)}
    return sorted(trees, key=Tree.sort_key)


# morphisms

@dataclass(frozen=True)
class TreeMorphism:
    source: Tree
    target: Tree
    contracted: FrozenSet[Vertex]

    def is_identity(self) -> bool:
        return not self.contracted

    def then(self, other: "TreeMorphism") -> "TreeMorphism":
        """Composite 'other after self'."""
        if self.target != other.source:
            raise ValueError("morphisms are not composable")
        return TreeMorphism(self.source, other.target, self.contracted | other.contracted)

    def vertex_map(self, u: Vertex) -> Vertex:
        """The vertex of the target into which u is merged."""
        tv = self.target.vertex_set()
        best = None
        for v in tv:
            if u <= v and (best is None or len(v) < len(best)):
                best = v
        return best

    def edge_names(self) -> List[int]:
        return sorted(self.source.edge_name(e) for e in self.contracted)

    def to_record(self) -> Dict:
        return {"source": str(self.source), "target": str(self.target), "contracted": self.edge_names()}


def hom(t: Tree, s: Tree) -> Optional[TreeMorphism]:
    """The unique morphism t -> s, or None."""
    if t.leaves != s.leaves:
        return None
    vt, vs = t.vertex_set(), s.vertex_set()
    if not vs <= vt:
        return None
    return TreeMorphism(t, s, frozenset(vt - vs))


def identity(t: Tree) -> TreeMorphism:
    return TreeMorphism(t, t, frozenset())


def morphism_chains(t: Tree, s: Tree, k: int) -> List[Tuple[Tree, ...]]:
    """Chains t -> t_k -> ... -> t_1 -> s of non-identity arrows, as (t, t_k, ..., t_1, s)."""
    m = hom(t, s)
    if m is None or m.is_identity() or k < 0:
        return []
    extra = sorted(m.contracted, key=lambda v: (len(v), sorted(v)))
    base = s.vertex_set()
    out = []
    # V(s) = V_0 < V_1 < ... < V_k < V_{k+1} = V(t): a chain of k proper intermediate subsets
    for labels in itertools.product(range(k + 1), repeat=len(extra)):
        if set(labels) != set(range(k + 1)):
            continue
        levels = []
        for j in range(1, k + 1):
            levels.append(base | {e for e, l in zip(extra, labels) if l < j})
        out.append((t,) + tuple(Tree.from_vertices(v) for v in reversed(levels)) + (s,))
    return sorted(out, key=lambda c: [str(x) for x in c])


def all_chains(t: Tree, s: Tree) -> List[Tuple[Tree, ...]]:
    """Chains of non-identity arrows from t to s of every length."""
    m = hom(t, s)
    if m is None or m.is_identity():
        return []
    out = []
    for k in range(len(m.contracted)):
        out.extend(morphism_chains(t, s, k))
    return out


# decompositions and grafting

@dataclass(frozen=True)
class Decomposition:
    """t = λ_s(σ_v, v ∈ V(s)), with σ_v given as vertex sets of t in the vertex order of s."""
    tree: Tree
    shape: Tree
    parts: Tuple[FrozenSet[Vertex], ...]

    def subtrees(self) -> List[Tree]:
        return [self.tree.subtree(p) for p in self.parts]


def decompose(m: TreeMorphism) -> Decomposition:
    parts: Dict[Vertex, set] = {v: set() for v in m.target.vertices()}
    for u in m.source.vertices():
        parts[m.vertex_map(u)].add(u)
    return Decomposition(m.source, m.target, tuple(frozenset(parts[v]) for v in m.target.vertices()))


def preimage(m: TreeMorphism, sub: Iterable[Vertex]) -> FrozenSet[Vertex]:
    """f^{-1}(σ) for a subtree σ of the target, as a vertex set of the source."""
    sub = set(frozenset(v) for v in sub)
    return frozenset(u for u in m.source.vertices() if m.vertex_map(u) in sub)


def graft_along(shape: Tree, subtrees: Sequence[Tree]) -> Tree:
    """λ_s(σ_v): substitute each σ_v (on the min labels of the ingoing edges of v) for the corolla at v."""
    vs = shape.vertices()
    if len(subtrees) != len(vs):
        raise ValueError("one subtree per vertex of the shape is needed")
    by_vertex = dict(zip(vs, subtrees))

    def build(v: Vertex) -> Node:
        sigma = by_vertex[v]
        edges = {min(e): e for e in shape.in_edges(v)}
        if sorted(edges) != list(sigma.leaves):
            raise ValueError(f"subtree {sigma} does not match the ingoing edges of vertex {sorted(v)}")

        def subst(node):
            if isinstance(node, int):
                e = edges[node]
                return build(e) if len(e) > 1 else node
            return tuple(subst(c) for c in node)

        return subst(sigma.root)

    return Tree(build(shape.root_vertex()))


def graft(s: Tree, ip: int, t: Tree) -> Tree:
    """s ∘_{ip} t for a pointed shuffle: ip is a leaf of s, min(leaves of t) = ip, other labels disjoint."""
    if ip not in s.leaves:
        raise ValueError(f"{ip} is not a leaf of {s}")
    if min(t.leaves) != ip:
        raise ValueError(f"pointed shuffle needs min leaf of {t} to equal {ip}")
    if set(s.leaves) & set(t.leaves) != {ip}:
        raise ValueError("leaf labels of the two trees overlap")

    def subst(node):
        if isinstance(node, int):
            return t.root if node == ip else node
        return tuple(subst(c) for c in node)

    return Tree(subst(s.root))


def vertex_order(t: Tree) -> List[Vertex]:
    return t.vertices()


def format_vertex(v: Vertex) -> str:
    return "{" + ",".join(str(x) for x in sorted(v)) + "}"
