"""Group specifications and exact Cayley balls.

Four kinds of group are supported: finite groups given by a multiplication
table, free groups, finite-by-cyclic groups F x|_phi Z, and subgroups of
GL+(2, Q) given by generators.  Elements are hashable keys; balls are
enumerated breadth first so the enumeration order is deterministic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from .exact import IDENTITY, Mat, det, mat, mat_inv, mat_mul

__all__ = ["GroupError", "Group", "FiniteTable", "Free", "VirtuallyCyclicSplit", "MatrixGens",
           "CayleyBall", "cayley_ball", "load_group", "group_from_json", "preset", "PRESETS",
           "format_matrix"]


class GroupError(ValueError):
    pass


def format_matrix(m: Mat) -> str:
    return "[[{},{}],[{},{}]]".format(*(str(x) for x in m))


class Group:
    """Interface: elements are hashable keys."""

    def identity(self) -> Hashable:
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def generators(self) -> List[Hashable]:
        """Positive generating labels; the Cayley graph also uses their inverses."""
        raise NotImplementedError

    def name(self, a) -> str:
        return str(a)

    def matrix(self, a) -> Optional[Mat]:
        return None

    @property
    def is_finite(self) -> bool:
        return False

    def elements(self) -> List[Hashable]:
        raise GroupError("group is infinite")


@dataclass
class FiniteTable(Group):
    """table[i][j] is the index of g_i g_j."""

    names: List[str]
    table: List[List[int]]
    matrices: Optional[List[Mat]] = None
    _e: int = field(init=False, default=0)
    _inv: List[int] = field(init=False, default_factory=list)

    def __post_init__(self):
        n = len(self.table)
        if n == 0:
            raise GroupError("multiplication table is empty")
        if len(self.names) != n or len(set(self.names)) != n:
            raise GroupError("element names must be distinct, one per table row")
        for i, row in enumerate(self.table):
            if len(row) != n or any(not isinstance(x, int) or not 0 <= x < n for x in row):
                raise GroupError(f"table row {i} is not a list of {n} element indices")
        ids = [i for i in range(n) if all(self.table[i][j] == j and self.table[j][i] == j for j in range(n))]
        if not ids:
            raise GroupError("table has no identity element")
        self._e = ids[0]
        T = self.table
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if T[T[a][b]][c] != T[a][T[b][c]]:
                        raise GroupError(f"table is not associative at ({self.names[a]}, {self.names[b]}, {self.names[c]})")
        self._inv = []
        for a in range(n):
            inv = [b for b in range(n) if T[a][b] == self._e and T[b][a] == self._e]
            if not inv:
                raise GroupError(f"element {self.names[a]} has no inverse")
            self._inv.append(inv[0])
        if self.matrices is not None:
            if len(self.matrices) != n:
                raise GroupError("need one matrix per element")
            self.matrices = [mat(m) for m in self.matrices]
            for i, m in enumerate(self.matrices):
                if det(m) <= 0:
                    raise GroupError(f"matrix of {self.names[i]} has det <= 0")
            for a in range(n):
                for b in range(n):
                    if mat_mul(self.matrices[a], self.matrices[b]) != self.matrices[T[a][b]]:
                        raise GroupError("matrices do not represent the table")
            if len(set(self.matrices)) != n:
                raise GroupError("matrix assignment is not faithful")

    @classmethod
    def from_matrices(cls, gens: Sequence, names: Optional[Sequence[str]] = None, limit: int = 1000) -> "FiniteTable":
        """Close a set of rational matrices under multiplication."""
        gens = [mat(g) for g in gens]
        elems = [IDENTITY]
        frontier = [IDENTITY]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = mat_mul(a, g)
                    if b not in elems:
                        elems.append(b)
                        nxt.append(b)
                        if len(elems) > limit:
                            raise GroupError(f"matrix group has more than {limit} elements")
            frontier = nxt
        idx = {m: i for i, m in enumerate(elems)}
        table = [[idx[mat_mul(a, b)] for b in elems] for a in elems]
        nm = list(names) if names else ["e"] + [format_matrix(m) for m in elems[1:]]
        return cls(nm, table, elems)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteTable":
        if n < 1:
            raise GroupError("cyclic order must be >= 1")
        names = ["e"] + [f"a^{k}" if k > 1 else "a" for k in range(1, n)]
        return cls(names, [[(i + j) % n for j in range(n)] for i in range(n)])

    def identity(self):
        return self._e

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def generators(self):
        return [i for i in range(len(self.table)) if i != self._e]

    def name(self, a):
        return self.names[a]

    def matrix(self, a):
        return None if self.matrices is None else self.matrices[a]

    @property
    def is_finite(self):
        return True

    @property
    def order(self) -> int:
        return len(self.table)

    def elements(self):
        """Identity first, then table order."""
        return [self._e] + [i for i in range(len(self.table)) if i != self._e]


@dataclass
class Free(Group):
    """Reduced words as tuples of (generator index, +-1)."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError("free group rank must be >= 1")

    def identity(self):
        return ()

    def mul(self, a, b):
        out = list(a)
        for x in b:
            if out and out[-1][0] == x[0] and out[-1][1] == -x[1]:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def inv(self, a):
        return tuple((i, -s) for i, s in reversed(a))

    def generators(self):
        return [((i, 1),) for i in range(1, self.rank + 1)]

    def name(self, a):
        if not a:
            return "e"
        return "*".join(f"a{i}" if s > 0 else f"a{i}^-1" for i, s in a)


@dataclass
class VirtuallyCyclicSplit(Group):
    """F x|_phi Z with (f, n)(f', n') = (f phi^n(f'), n + n').

    ``automorphism`` lists phi(i) for each element index of F.
    """

    finite: FiniteTable
    automorphism: Optional[List[int]] = None

    def __post_init__(self):
        n = self.finite.order
        if self.automorphism is None:
            self.automorphism = list(range(n))
        phi = self.automorphism
        if sorted(phi) != list(range(n)):
            raise GroupError("automorphism must be a permutation of the element indices")
        T = self.finite.table
        for a in range(n):
            for b in range(n):
                if phi[T[a][b]] != T[phi[a]][phi[b]]:
                    raise GroupError("permutation is not a group automorphism")
        inv = [0] * n
        for i, x in enumerate(phi):
            inv[x] = i
        self._phi_inv = inv

    def _phi(self, f: int, n: int) -> int:
        table = self.automorphism if n >= 0 else self._phi_inv
        for _ in range(abs(n)):
            f = table[f]
        return f

    def identity(self):
        return (self.finite.identity(), 0)

    def mul(self, a, b):
        return (self.finite.mul(a[0], self._phi(b[0], a[1])), a[1] + b[1])

    def inv(self, a):
        f, n = a
        return (self._phi(self.finite.inv(f), -n), -n)

    def generators(self):
        e = self.finite.identity()
        return [(f, 0) for f in self.finite.generators()] + [(e, 1)]

    def name(self, a):
        f, n = a
        fn = self.finite.name(f)
        if n == 0:
            return fn
        t = "t" if n == 1 else f"t^{n}"
        return t if f == self.finite.identity() else f"{fn}*{t}"


@dataclass
class MatrixGens(Group):
    gens: List[Mat]

    def __post_init__(self):
        if not self.gens:
            raise GroupError("need at least one generator")
        self.gens = [mat(g) for g in self.gens]
        for i, g in enumerate(self.gens):
            if det(g) <= 0:
                raise GroupError(f"generator {i} has det <= 0")

    def identity(self):
        return IDENTITY

    def mul(self, a, b):
        return mat_mul(a, b)

    def inv(self, a):
        return mat_inv(a)

    def generators(self):
        return list(self.gens)

    def name(self, a):
        return "e" if a == IDENTITY else format_matrix(a)

    def matrix(self, a):
        return a


@dataclass(frozen=True)
class CayleyBall:
    group: Group
    radius: int
    elements: Tuple[Hashable, ...]  # breadth-first order, identity first
    labels: Tuple[Hashable, ...]  # generators followed by inverses not already present
    edges: Tuple[Tuple[int, int, int], ...]  # (source index, label index, target index)

    @property
    def index(self) -> Dict[Hashable, int]:
        return {g: i for i, g in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def names(self) -> List[str]:
        return [self.group.name(g) for g in self.elements]


def _labels(g: Group) -> List[Hashable]:
    gens = g.generators()
    out = list(dict.fromkeys(gens))
    for s in gens:
        i = g.inv(s)
        if i not in out:
            out.append(i)
    return out


def cayley_ball(g: Group, R: int) -> CayleyBall:
    """Elements of word length <= R over the symmetric generating set, with all edges."""
    if R < 0:
        raise GroupError("radius must be >= 0")
    labels = _labels(g)
    elems = [g.identity()]
    seen = {elems[0]}
    frontier = list(elems)
    for _ in range(R):
        nxt = []
        for a in frontier:
            for s in labels:
                b = g.mul(a, s)
                if b not in seen:
                    seen.add(b)
                    elems.append(b)
                    nxt.append(b)
        frontier = nxt
    idx = {x: i for i, x in enumerate(elems)}
    edges = []
    for i, a in enumerate(elems):
        for k, s in enumerate(labels):
            j = idx.get(g.mul(a, s))
            if j is not None:
                edges.append((i, k, j))
    return CayleyBall(g, R, tuple(elems), tuple(labels), tuple(edges))


# -- text formats -----------------------------------------------------------------

def _table_from(doc) -> FiniteTable:
    if isinstance(doc, list):
        table, names, mats = doc, None, None
    else:
        table, names, mats = doc.get("table"), doc.get("elements"), doc.get("matrices")
    if not isinstance(table, list):
        raise GroupError("finite group needs a 'table' array of arrays")
    n = len(table)
    if names is None:
        names = ["e"] + [f"g{i}" for i in range(1, n)]
    rows = []
    for row in table:
        if not isinstance(row, list):
            raise GroupError("table rows must be arrays")
        conv = []
        for x in row:
            if isinstance(x, str):
                if x not in names:
                    raise GroupError(f"unknown element name {x!r} in table")
                conv.append(names.index(x))
            else:
                conv.append(x)
        rows.append(conv)
    if mats is not None:
        mats = [_parse_matrix(m) for m in mats]
    return FiniteTable(list(names), rows, mats)


def _parse_matrix(m) -> Mat:
    try:
        return mat([[Fraction(str(x)) for x in row] for row in m])
    except (ValueError, TypeError, ZeroDivisionError):
        raise GroupError(f"not a 2x2 rational matrix: {m!r}") from None


def group_from_json(doc) -> Group:
    if isinstance(doc, list):
        return _table_from(doc)
    if not isinstance(doc, dict):
        raise GroupError("group spec must be a JSON object or array")
    kind = doc.get("kind", "table")
    if kind == "table":
        return _table_from(doc)
    if kind == "free":
        return Free(int(doc.get("rank", 0)))
    if kind == "vc":
        return VirtuallyCyclicSplit(_table_from(doc["finite"]), doc.get("automorphism"))
    if kind == "matrices":
        return MatrixGens([_parse_matrix(m) for m in doc.get("generators", [])])
    if kind == "matrix-table":
        return FiniteTable.from_matrices([_parse_matrix(m) for m in doc.get("generators", [])])
    raise GroupError(f"unknown group kind {kind!r}")


def _s3() -> FiniteTable:
    import itertools
    perms = list(itertools.permutations(range(3)))
    # order: identity, then by lexicographic permutation
    comp = lambda p, r: tuple(p[r[i]] for i in range(3))
    names = ["e", "(23)", "(12)", "(123)", "(132)", "(13)"]
    idx = {p: i for i, p in enumerate(perms)}
    return FiniteTable(names, [[idx[comp(p, r)] for r in perms] for p in perms])


PRESETS = {
    "trivial": lambda: FiniteTable.cyclic(1),
    "z2": lambda: FiniteTable.cyclic(2),
    "z3": lambda: FiniteTable.cyclic(3),
    "z4": lambda: FiniteTable.cyclic(4),
    "klein": lambda: FiniteTable(["e", "a", "b", "ab"], [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]),
    "s3": _s3,
    "pm-identity": lambda: FiniteTable.from_matrices([[[-1, 0], [0, -1]]], ["e", "-I"]),
    "z": lambda: VirtuallyCyclicSplit(FiniteTable.cyclic(1)),
    "z2xz": lambda: VirtuallyCyclicSplit(FiniteTable.cyclic(2)),
    "free1": lambda: Free(1),
    "free2": lambda: Free(2),
    "shear": lambda: MatrixGens([mat(1, 1, 0, 1)]),
    "diag-shear": lambda: MatrixGens([mat(2, 0, 0, 1), mat(1, 0, 1, 1)]),
}


def preset(name: str) -> Group:
    try:
        return PRESETS[name]()
    except KeyError:
        raise GroupError(f"unknown group preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None


def load_group(spec: str) -> Group:
    """A preset name or a path to a JSON group file."""
    if spec in PRESETS:
        return preset(spec)
    try:
        with open(spec, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise GroupError(f"no such group file or preset: {spec}") from None
    except json.JSONDecodeError as e:
        raise GroupError(f"group file {spec}: invalid JSON ({e.msg} at line {e.lineno})") from None
    return group_from_json(doc)
