"""Exact coefficient rings, sparse formal sums, graded maps and chain complexes.

Everything in the package is built on top of :class:`FormalSum`, a sparse
linear combination of hashable basis labels.  Labels are plain Python values
(ints, strings and nested tuples of those); :func:`sort_key` puts a total
order on them so that every printed or serialized object is byte-stable.

Grading is homological throughout.  Cochain-type data (for instance the
cochains of the interval) are stored in lower grading, so that a cochain of
cohomological degree n sits in degree -n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple


class RingError(ValueError):
    """Raised for ring mismatches and for operations the ring does not support."""


class Ring:
    """One of Z, Q or F_p, with canonical representatives.

    Elements are plain Python numbers: ints for Z and F_p (residues in
    [0, p)), and ints or Fractions for Q (a Fraction is only used when the
    value is not integral).
    """

    def __init__(self, kind: str, p: Optional[int] = None):
        if kind not in ("z", "q", "f"):
            raise RingError(f"unknown ring kind {kind!r}")
        if kind == "f":
            if p is None or p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
                raise RingError(f"F_p needs a prime p, got {p!r}")
        self.kind = kind
        self.p = p if kind == "f" else None

    @classmethod
    def parse(cls, spec: str) -> "Ring":
        s = spec.strip().lower()
        if s in ("q", "z"):
            return cls(s)
        if s.startswith("f") and s[1:].isdigit():
            return cls("f", int(s[1:]))
        raise RingError(f"cannot parse ring selector {spec!r} (use q, z or f<p>)")

    @property
    def name(self) -> str:
        return f"f{self.p}" if self.kind == "f" else self.kind

    @property
    def is_field(self) -> bool:
        return self.kind != "z"

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == "f" else 0

    def __eq__(self, other) -> bool:
        return isinstance(other, Ring) and self.kind == other.kind and self.p == other.p

    def __hash__(self) -> int:
        return hash((self.kind, self.p))

    def __repr__(self) -> str:
        return f"Ring({self.name})"

    def __call__(self, x) -> int | Fraction:
        return self.normalize(x)

    def normalize(self, x):
        if self.kind == "f":
            if isinstance(x, Fraction):
                return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
            return int(x) % self.p
        if self.kind == "z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise RingError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        if isinstance(x, Fraction):
            return x.numerator if x.denominator == 1 else x
        return int(x)

    def add(self, a, b):
        return self.normalize(a + b)

    def mul(self, a, b):
        return self.normalize(a * b)

    def neg(self, a):
        return self.normalize(-a)

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.kind == "f":
            return pow(int(a), -1, self.p)
        if self.kind == "q":
            return self.normalize(Fraction(1) / Fraction(a))
        if a in (1, -1):
            return a
        raise RingError(f"{a} is not invertible over Z")

    def sign(self, e: int):
        """(-1)^e as a ring element."""
        return self.normalize(-1 if e % 2 else 1)

    def encode(self, c) -> Tuple[int, int]:
        """Pair (num, den-or-mod) used by the text format."""
        if self.kind == "f":
            return int(c), self.p
        c = Fraction(c)
        return c.numerator, c.denominator

    def decode(self, num: int, den: int):
        if self.kind == "f":
            if den != self.p:
                raise RingError(f"coefficient modulus {den} does not match {self.name}")
            return self.normalize(num)
        return self.normalize(Fraction(num, den))


QQ = Ring("q")
ZZ = Ring("z")
F2 = Ring("f", 2)


def sort_key(label):
    """Total order on labels: ints < strings < tuples < sets < objects with a sort_key."""
    if isinstance(label, bool):
        return (0, int(label))
    if isinstance(label, int):
        return (0, label)
    if isinstance(label, str):
        return (1, label)
    if isinstance(label, tuple):
        return (2, tuple(sort_key(x) for x in label))
    if isinstance(label, frozenset):
        return (3, tuple(sorted(sort_key(x) for x in label)))
    if label is None:
        return (-1,)
    if hasattr(label, "sort_key"):
        return (4, label.sort_key())
    raise TypeError(f"unsupported label type {type(label).__name__}")


class FormalSum:
    """A finite linear combination of basis labels with no zero coefficients."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Optional[Mapping] = None):
        self.ring = ring
        self.terms: Dict = {}
        if terms:
            for lab, c in terms.items():
                c = ring.normalize(c)
                if c != 0:
                    self.terms[lab] = c

    @classmethod
    def basis(cls, ring: Ring, label, coef=1) -> "FormalSum":
        out = cls(ring)
        c = ring.normalize(coef)
        if c != 0:
            out.terms[label] = c
        return out

    @classmethod
    def zero(cls, ring: Ring) -> "FormalSum":
        return cls(ring)

    @classmethod
    def from_pairs(cls, ring: Ring, pairs: Iterable[Tuple[object, object]]) -> "FormalSum":
        acc = cls(ring)
        for lab, c in pairs:
            acc.add_term(lab, c)
        return acc

    # in-place accumulation, only used while a sum is being built
    def add_term(self, label, c) -> None:
        if c == 0:
            return
        ring = self.ring
        v = ring.normalize(self.terms.get(label, 0) + c)
        if v == 0:
            self.terms.pop(label, None)
        else:
            self.terms[label] = v

    def add_scaled(self, other: "FormalSum", c=1) -> None:
        if other.ring != self.ring:
            raise RingError("ring mismatch")
        if c == 0:
            return
        for lab, v in other.terms.items():
            self.add_term(lab, v * c)

    def copy(self) -> "FormalSum":
        out = FormalSum(self.ring)
        out.terms = dict(self.terms)
        return out

    def __iter__(self) -> Iterator[Tuple[object, object]]:
        return iter(self.items())

    def items(self) -> List[Tuple[object, object]]:
        return sorted(self.terms.items(), key=lambda kv: sort_key(kv[0]))

    def labels(self) -> List:
        return [lab for lab, _ in self.items()]

    def coefficient(self, label):
        return self.terms.get(label, 0)

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, FormalSum):
            return self.ring == other.ring and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.items()))

    def __add__(self, other: "FormalSum") -> "FormalSum":
        out = self.copy()
        out.add_scaled(other, 1)
        return out

    def __sub__(self, other: "FormalSum") -> "FormalSum":
        out = self.copy()
        out.add_scaled(other, -1)
        return out

    def __neg__(self) -> "FormalSum":
        return self.scale(-1)

    def scale(self, c) -> "FormalSum":
        out = FormalSum(self.ring)
        c = self.ring.normalize(c)
        if c == 0:
            return out
        for lab, v in self.terms.items():
            w = self.ring.normalize(v * c)
            if w != 0:
                out.terms[lab] = w
        return out

    def __rmul__(self, c) -> "FormalSum":
        return self.scale(c)

    def map_labels(self, f: Callable) -> "FormalSum":
        """Relabel termwise; f may return None to drop a term."""
        out = FormalSum(self.ring)
        for lab, c in self.terms.items():
            new = f(lab)
            if new is not None:
                out.add_term(new, c)
        return out

    def __repr__(self) -> str:
        return format_sum(self)


def format_sum(x: FormalSum, fmt: Callable = None) -> str:
    fmt = fmt or format_label
    if not x.terms:
        return "0"
    parts = []
    for lab, c in x.items():
        parts.append(f"{c}*{fmt(lab)}")
    return " + ".join(parts)


def format_label(label) -> str:
    if isinstance(label, tuple):
        return "(" + " ".join(format_label(x) for x in label) + ")"
    return str(label)


def combine(a: FormalSum, c, b: FormalSum) -> FormalSum:
    """Return a + c*b."""
    if a.ring != b.ring:
        raise RingError("ring mismatch")
    out = a.copy()
    out.add_scaled(b, c)
    return out


def linear_extend(f: Callable[[object], FormalSum], x: FormalSum) -> FormalSum:
    out = FormalSum(x.ring)
    for lab, c in x.terms.items():
        out.add_scaled(f(lab), c)
    return out


class GradedHom:
    """A linear map of fixed homological degree, given on basis labels.

    ``table`` is either a mapping label -> FormalSum or a callable; images are
    memoized, which is safe because every value in the package is immutable.
    """

    def __init__(self, ring: Ring, degree: int, table, name: str = ""):
        self.ring = ring
        self.degree = degree
        self.name = name
        self._fn = table if callable(table) else (lambda lab, t=table: t.get(lab, FormalSum(ring)))
        self._cache: Dict = {}

    def on_basis(self, label) -> FormalSum:
        try:
            return self._cache[label]
        except KeyError:
            val = self._fn(label)
            self._cache[label] = val
            return val

    def __call__(self, x: FormalSum) -> FormalSum:
        if x.ring != self.ring:
            raise RingError("ring mismatch")
        return linear_extend(self.on_basis, x)

    def then(self, other: "GradedHom") -> "GradedHom":
        """Composite 'other after self'."""
        return GradedHom(self.ring, self.degree + other.degree,
                         lambda lab: other(self.on_basis(lab)), f"{other.name}.{self.name}")

    def __add__(self, other: "GradedHom") -> "GradedHom":
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return GradedHom(self.ring, self.degree,
                         lambda lab: self.on_basis(lab) + other.on_basis(lab))

    def scale(self, c) -> "GradedHom":
        return GradedHom(self.ring, self.degree, lambda lab: self.on_basis(lab).scale(c))


def identity_hom(ring: Ring) -> GradedHom:
    return GradedHom(ring, 0, lambda lab: FormalSum.basis(ring, lab), "id")


def zero_hom(ring: Ring, degree: int = 0) -> GradedHom:
    return GradedHom(ring, degree, lambda lab: FormalSum(ring), "0")


class Complex:
    """A chain complex with finite ordered bases in finitely many degrees.

    ``diff`` maps a basis label to a FormalSum one degree lower.  Labels must
    be unique across degrees so that ``degree_of`` is well defined.
    """

    def __init__(self, ring: Ring, basis: Mapping[int, Sequence], diff, name: str = "",
                 label_format: Callable = None):
        self.ring = ring
        self.basis: Dict[int, Tuple] = {}
        for d in sorted(basis):
            labs = tuple(sorted(set(basis[d]), key=sort_key))
            if labs:
                self.basis[d] = labs
        self.name = name
        self.label_format = label_format or format_label
        self._deg: Dict = {}
        for d, labs in self.basis.items():
            for lab in labs:
                if lab in self._deg:
                    raise ValueError(f"label {lab!r} appears in two degrees")
                self._deg[lab] = d
        self.d = diff if isinstance(diff, GradedHom) else GradedHom(ring, -1, diff, "d")

    def degrees(self) -> List[int]:
        return sorted(self.basis)

    def in_degree(self, d: int) -> Tuple:
        return self.basis.get(d, ())

    def degree_of(self, label) -> int:
        return self._deg[label]

    def __contains__(self, label) -> bool:
        return label in self._deg

    def all_labels(self) -> List:
        return [lab for d in self.degrees() for lab in self.basis[d]]

    def dim(self) -> int:
        return len(self._deg)

    def dims(self) -> Dict[int, int]:
        return {d: len(v) for d, v in self.basis.items()}

    def differential(self, x: FormalSum) -> FormalSum:
        return self.d(x)

    def element_degree(self, x: FormalSum) -> Optional[int]:
        degs = {self._deg[lab] for lab in x.terms}
        if len(degs) > 1:
            raise ValueError("inhomogeneous element")
        return degs.pop() if degs else None


@dataclass
class Check:
    name: str
    passed: bool
    count: int
    witnesses: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "count": self.count,
                "witnesses": list(self.witnesses)}


@dataclass
class Report:
    """Outcome of a verification sweep: one entry per named identity."""

    title: str = ""
    checks: List[Check] = field(default_factory=list)
    data: Dict = field(default_factory=dict)

    MAX_WITNESSES = 5

    def add(self, name: str, count: int, failures: Sequence[str] = ()) -> Check:
        chk = Check(name, not failures, count, [str(w) for w in list(failures)[: self.MAX_WITNESSES]])
        self.checks.append(chk)
        return chk

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.count, list(c.witnesses)))
        self.data.update(other.data)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"title": self.title, "ok": self.ok,
                "checks": [c.to_dict() for c in self.checks], "data": self.data}

    def summary(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.ok else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name} ({c.count})")
            for w in c.witnesses:
                lines.append(f"      {w}")
        return "\n".join(lines)


def square_zero_check(c: Complex, name: str = "d^2 = 0") -> Report:
    rep = Report(f"square zero: {c.name}")
    bad = []
    labs = c.all_labels()
    for lab in labs:
        dd = c.d(c.d.on_basis(lab))
        if dd:
            bad.append(f"{c.label_format(lab)} -> {format_sum(dd, c.label_format)}")
    rep.add(name, len(labs), bad)
    return rep


# sparse exact linear algebra

def rank_of(vectors: Iterable[Mapping], ring: Ring) -> int:
    """Rank of a family of sparse vectors (dicts key -> coefficient) over a field."""
    if not ring.is_field:
        raise RingError("rank computations need a field; use q or f<p>")
    pivots: Dict = {}
    rank = 0
    for vec in vectors:
        v = {k: c for k, c in vec.items() if c != 0}
        while v:
            key = min(v, key=sort_key)
            if key not in pivots:
                inv = ring.inv(v[key])
                pivots[key] = {k: ring.mul(c, inv) for k, c in v.items()}
                rank += 1
                break
            c = v[key]
            for k, pc in pivots[key].items():
                w = ring.normalize(v.get(k, 0) - c * pc)
                if w == 0:
                    v.pop(k, None)
                else:
                    v[k] = w
    return rank


def boundary_rank(c: Complex, d: int) -> int:
    """Rank of the differential leaving degree d."""
    return rank_of((c.d.on_basis(lab).terms for lab in c.in_degree(d)), c.ring)


def homology_ranks(c: Complex, degrees: Optional[Iterable[int]] = None) -> Dict[int, int]:
    """Ranks of H_d over the coefficient field, for each requested degree.

    Only nonzero ranks are returned.
    """
    if not c.ring.is_field:
        raise RingError("homology ranks need a field coefficient ring; use q or f<p>")
    degs = sorted(set(degrees)) if degrees is not None else c.degrees()
    cache: Dict[int, int] = {}

    def brank(d):
        if d not in cache:
            cache[d] = boundary_rank(c, d)
        return cache[d]

    out = {}
    for d in degs:
        n = len(c.in_degree(d))
        h = n - brank(d) - brank(d + 1)
        if h:
            out[d] = h
    return out


def is_acyclic(c: Complex) -> bool:
    return not homology_ranks(c)


def tensor(c1: Complex, c2: Complex, name: str = "") -> Complex:
    """Tensor product with the Koszul sign d(a b) = da b + (-1)^|a| a db."""
    if c1.ring != c2.ring:
        raise RingError("ring mismatch")
    ring = c1.ring
    basis: Dict[int, List] = {}
    for d1, l1 in c1.basis.items():
        for d2, l2 in c2.basis.items():
            basis.setdefault(d1 + d2, []).extend((a, b) for a in l1 for b in l2)

    def diff(lab):
        a, b = lab
        out = FormalSum(ring)
        for x, cx in c1.d.on_basis(a).terms.items():
            out.add_term((x, b), cx)
        s = ring.sign(c1.degree_of(a))
        for y, cy in c2.d.on_basis(b).terms.items():
            out.add_term((a, y), s * cy)
        return out

    fmt1, fmt2 = c1.label_format, c2.label_format
    return Complex(ring, basis, diff, name or f"{c1.name}(x){c2.name}",
                   label_format=lambda lab: f"{fmt1(lab[0])}|{fmt2(lab[1])}")


def tensor_many(cs: Sequence[Complex], name: str = "") -> Complex:
    """Iterated tensor product with flat tuple labels (a1, ..., an)."""
    if not cs:
        raise ValueError("empty tensor product")
    ring = cs[0].ring
    basis: Dict[int, List] = {0: [()]}
    for c in cs:
        if c.ring != ring:
            raise RingError("ring mismatch")
        nb: Dict[int, List] = {}
        for d, labs in basis.items():
            for d2, l2 in c.basis.items():
                nb.setdefault(d + d2, []).extend(lab + (x,) for lab in labs for x in l2)
        basis = nb

    def diff(lab):
        out = FormalSum(ring)
        sgn = 0
        for i, (c, a) in enumerate(zip(cs, lab)):
            s = ring.sign(sgn)
            for x, cx in c.d.on_basis(a).terms.items():
                out.add_term(lab[:i] + (x,) + lab[i + 1:], s * cx)
            sgn += c.degree_of(a)
        return out

    return Complex(ring, basis, diff, name or "tensor")


def koszul_tensor_map(maps: Sequence[GradedHom], degree_fns: Sequence[Callable[[object], int]]):
    """Tensor product of maps f1 x ... x fn acting on flat tuple labels.

    (f1 x ... x fn)(a1 ... an) = (-1)^{sum_{i<j} |f_j||a_i|} f1(a1) ... fn(an).
    """
    ring = maps[0].ring

    def on(lab):
        sign = 0
        for j, f in enumerate(maps):
            for i in range(j):
                sign += f.degree * degree_fns[i](lab[i])
        out = FormalSum.basis(ring, (), ring.sign(sign))
        for f, a in zip(maps, lab):
            img = f.on_basis(a)
            nxt = FormalSum(ring)
            for t, c in out.terms.items():
                for x, cx in img.terms.items():
                    nxt.add_term(t + (x,), c * cx)
            out = nxt
        return out

    return GradedHom(ring, sum(f.degree for f in maps), on)


def check_chain_map(f: GradedHom, src: Complex, tgt: Complex, name: str = "chain map",
                    labels: Optional[Iterable] = None) -> Report:
    """Check d f = (-1)^{|f|} f d on every basis element of src."""
    rep = Report(f"chain map: {f.name or name}")
    ring = src.ring
    s = ring.sign(f.degree)
    bad = []
    labs = list(labels) if labels is not None else src.all_labels()
    for lab in labs:
        lhs = tgt.d(f.on_basis(lab))
        rhs = f(src.d.on_basis(lab)).scale(s)
        if lhs != rhs:
            bad.append(f"{src.label_format(lab)}: d f = {format_sum(lhs, tgt.label_format)}; "
                       f"f d = {format_sum(rhs, tgt.label_format)}")
    rep.add(name, len(labs), bad)
    return rep


def check_homotopy(H: GradedHom, f: GradedHom, g: GradedHom, src: Complex, tgt: Complex,
                   name: str = "homotopy", labels: Optional[Iterable] = None) -> Report:
    """Check d H + H d = g - f on every basis element of src."""
    rep = Report(f"homotopy: {name}")
    bad = []
    labs = list(labels) if labels is not None else src.all_labels()
    for lab in labs:
        lhs = tgt.d(H.on_basis(lab)) + H(src.d.on_basis(lab))
        rhs = g.on_basis(lab) - f.on_basis(lab)
        if lhs != rhs:
            bad.append(f"{src.label_format(lab)}: dH+Hd = {format_sum(lhs, tgt.label_format)}; "
                       f"g-f = {format_sum(rhs, tgt.label_format)}")
    rep.add(name, len(labs), bad)
    return rep


def mapping_cone(f: GradedHom, src: Complex, tgt: Complex, name: str = "") -> Complex:
    """Cone(f)_n = src_{n-1} + tgt_n with d(a, b) = (-da, f(a) + db).

    f must be a degree-0 chain map; it is a quasi-isomorphism iff the cone
    is acyclic.
    """
    if f.degree != 0:
        raise ValueError("mapping cone needs a degree-0 map")
    ring = src.ring
    basis: Dict[int, List] = {}
    for d, labs in src.basis.items():
        basis.setdefault(d + 1, []).extend(("s", a) for a in labs)
    for d, labs in tgt.basis.items():
        basis.setdefault(d, []).extend(("t", b) for b in labs)

    def diff(lab):
        tag, x = lab
        if tag == "t":
            return tgt.d.on_basis(x).map_labels(lambda y: ("t", y))
        out = src.d.on_basis(x).map_labels(lambda y: ("s", y)).scale(-1)
        out.add_scaled(f.on_basis(x).map_labels(lambda y: ("t", y)), 1)
        return out

    fs, ft = src.label_format, tgt.label_format
    return Complex(ring, basis, diff, name or f"cone({f.name})",
                   label_format=lambda lab: ("s:" + fs(lab[1])) if lab[0] == "s" else ("t:" + ft(lab[1])))


def is_quasi_isomorphism(f: GradedHom, src: Complex, tgt: Complex) -> Tuple[bool, Dict[int, int]]:
    ranks = homology_ranks(mapping_cone(f, src, tgt))
    return (not ranks), ranks


def dual_complex(c: Complex, name: str = "") -> Complex:
    """Linear dual in lower grading: basis ('#', x) in degree -|x|.

    The dual differential is delta(f) = (-1)^{|f|} f o d, which gives the
    interval cochains delta(0#) = -01#, delta(1#) = +01#.
    """
    ring = c.ring
    basis = {-d: [("#", x) for x in labs] for d, labs in c.basis.items()}
    # transpose of d
    transpose: Dict = {}
    for lab in c.all_labels():
        for y, cy in c.d.on_basis(lab).terms.items():
            transpose.setdefault(y, []).append((lab, cy))

    def diff(lab):
        _, y = lab
        deg_f = -c.degree_of(y)
        s = ring.sign(deg_f)
        out = FormalSum(ring)
        for x, cy in transpose.get(y, ()):
            out.add_term(("#", x), s * cy)
        return out

    fmt = c.label_format
    return Complex(ring, basis, diff, name or f"{c.name}#", label_format=lambda lab: fmt(lab[1]) + "#")


# text format

def to_json(c: Complex, label_format: Callable = None) -> str:
    fmt = label_format or c.label_format
    degrees = {str(d): [fmt(lab) for lab in labs] for d, labs in c.basis.items()}
    diff = []
    for lab in c.all_labels():
        for y, cy in c.d.on_basis(lab).items():
            num, den = c.ring.encode(cy)
            diff.append([fmt(lab), fmt(y), num, den])
    payload = {"ring": c.ring.name, "degrees": degrees, "diff": diff}
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def from_json(text: str, ring: Optional[Ring] = None) -> Complex:
    """Read the text format back; labels become their printed strings."""
    payload = json.loads(text)
    if ring is None:
        ring = Ring.parse(payload.get("ring", "q"))
    basis = {int(d): list(labs) for d, labs in payload["degrees"].items()}
    table: Dict[str, FormalSum] = {}
    for src, tgt, num, den in payload["diff"]:
        table.setdefault(src, FormalSum(ring)).add_term(tgt, ring.decode(num, den))
    return Complex(ring, basis, lambda lab: table.get(lab, FormalSum(ring)), payload.get("name", ""),
                   label_format=str)
