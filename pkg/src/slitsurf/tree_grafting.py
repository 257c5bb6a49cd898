"""Rooted trees with prescribed end space, their greedy ray decomposition, and
the end-grafting slit surface built from them.

Each ray gamma_n of the decomposition becomes a plane P_n.  Slot k of P_n
carries three unit horizontal slits

    s(n,k) on [6k, 6k+1],  t(n,k) on [6k+2, 6k+3],  t'(n,k) on [6k+4, 6k+5]

on the line y = 0.  s(n,0) is glued to s(n',l) when gamma_n starts at the
l-th vertex of gamma_n', and t(n,k) is glued to t'(n,k) when the k-th edge of
gamma_n carries genus.  Slits that end up unglued are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .end_space import (CANTOR_PRESETS, EndSpaceDescriptor, Ordinal, char_system,
                        format_descriptor)
from .surface_complex import ComplexBuilder, SurfaceComplex

__all__ = ["RootedTree", "RayDecomposition", "build_tree", "ray_decomposition", "genus_edges",
           "graft", "GraftError", "slit_x"]


class GraftError(ValueError):
    pass


@dataclass(frozen=True)
class RootedTree:
    """Vertices are numbered in breadth-first order; children lists put the spine first."""

    parent: Tuple[int, ...]  # parent[0] == -1
    depth: Tuple[int, ...]
    children: Tuple[Tuple[int, ...], ...]
    depth_limit: int

    @property
    def size(self) -> int:
        return len(self.parent)

    def edges(self) -> List[Tuple[int, int]]:
        return [(self.parent[v], v) for v in range(1, self.size)]

    def leaves(self) -> List[int]:
        return [v for v in range(self.size) if not self.children[v]]

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (v != 0)


def _root_state(alpha: Ordinal):
    return ("ray",) if alpha.is_zero else ("spine", alpha, 0)


def _initial_state(d: EndSpaceDescriptor):
    if d.atom == "cantor":
        return ("cantor",)
    if d.atom == "cantor+seq":
        return ("cseq_s",)
    if d.atom == "cantor+dense":
        return ("cdense_v",)
    if d.atom == "empty":
        raise GraftError("empty end space has no tree")
    cs = char_system(d)
    if cs.degree == 1:
        return _root_state(cs.alpha)
    return ("chain", cs.alpha, cs.degree)


def _child_states(st) -> list:
    kind = st[0]
    if kind == "ray":
        return [("ray",)]
    if kind == "spine":
        alpha, i = st[1], st[2]
        hung = alpha.predecessor() if alpha.is_successor else alpha.fundamental(i)
        return [("spine", alpha, i + 1), _root_state(hung)]
    if kind == "chain":
        alpha, n = st[1], st[2]
        nxt = ("chain", alpha, n - 1) if n > 2 else _root_state(alpha)
        return [nxt, _root_state(alpha)]
    if kind == "cantor":
        return [("cantor",), ("cantor",)]
    if kind == "cseq_s":
        return [("cseq_m",), ("cantor",)]
    if kind == "cseq_m":
        return [("cseq_s",), ("ray",)]
    if kind == "cdense_v":
        return [("cdense_m",), ("cdense_m",)]
    if kind == "cdense_m":
        return [("cdense_v",), ("ray",)]
    raise AssertionError(kind)


def build_tree(d: EndSpaceDescriptor, depth: int) -> RootedTree:
    """Truncation to vertices at distance <= depth from the root of the scheme tree of d."""
    if depth < 1:
        raise GraftError("tree depth must be >= 1")
    parent, dep, children = [-1], [0], [[]]
    states = [_initial_state(d)]
    head = 0
    while head < len(parent):
        v = head
        head += 1
        if dep[v] >= depth:
            continue
        for cst in _child_states(states[v]):
            w = len(parent)
            parent.append(v)
            dep.append(dep[v] + 1)
            children.append([])
            states.append(cst)
            children[v].append(w)
    return RootedTree(tuple(parent), tuple(dep), tuple(tuple(c) for c in children), depth)


@dataclass(frozen=True)
class RayDecomposition:
    rays: Tuple[Tuple[int, ...], ...]
    origin: Tuple[Optional[Tuple[int, int]], ...]  # origin[0] is None
    edge_ray: Dict[int, Tuple[int, int]]  # child vertex -> (ray index, position of child on ray)

    def start_depth(self, tree: RootedTree, n: int) -> int:
        return tree.depth[self.rays[n][0]]


def ray_decomposition(t: RootedTree) -> RayDecomposition:
    """gamma_0 follows first children from the root; then repeatedly the uncovered
    edge closest to the root (lowest vertex index on ties) starts a new ray that
    follows first children."""
    edge_ray: Dict[int, Tuple[int, int]] = {}
    rays: List[Tuple[int, ...]] = []
    origin: List[Optional[Tuple[int, int]]] = []

    def run(start: int, first: int, idx: int) -> Tuple[int, ...]:
        path = [start, first]
        edge_ray[first] = (idx, 1)
        v = first
        while t.children[v]:
            v = t.children[v][0]
            edge_ray[v] = (idx, len(path))
            path.append(v)
        return tuple(path)

    if t.children[0]:
        rays.append(run(0, t.children[0][0], 0))
    else:
        rays.append((0,))
    origin.append(None)
    for v in range(1, t.size):
        if v in edge_ray:
            continue
        p = t.parent[v]
        n = len(rays)
        if p == 0:
            src = (0, 0)
        else:
            src = edge_ray[p]
        rays.append(run(p, v, n))
        origin.append(src)
    return RayDecomposition(tuple(rays), tuple(origin), edge_ray)


def genus_edges(t: RootedTree, rd: RayDecomposition, d: EndSpaceDescriptor) -> Set[int]:
    """Child vertices of the edges lying on the selected genus rays gamma_e."""
    g = d.genus
    if g.kind == "all":
        return set(range(1, t.size))
    if g.kind == "none":
        return set()
    chosen = [0] if g.kind == "spine" else list(g.rays)
    out: Set[int] = set()
    for n in chosen:
        if n >= len(rd.rays):
            raise GraftError(f"genus marking selects ray {n} but only {len(rd.rays)} rays exist")
        ray = rd.rays[n]
        out.update(ray[1:])
        v = ray[0]
        while v != 0:
            out.add(v)
            v = t.parent[v]
    return out


def slit_x(family: str, k: int) -> int:
    return 6 * k + {"s": 0, "t": 2, "t'": 4}[family]


def _sid(n: int, fam: str, k: int) -> str:
    return f"P{n}:{fam}{k}"


def graft(d: EndSpaceDescriptor, planes_limit: int = 4, slit_index_limit: int = 4,
          prefix: str = "") -> SurfaceComplex:
    if planes_limit < 1 or slit_index_limit < 1:
        raise GraftError("planes_limit and slit_index_limit must be >= 1")
    K = slit_index_limit
    depth = K + 1
    while True:
        tree = build_tree(d, depth)
        rd = ray_decomposition(tree)
        use = min(planes_limit, len(rd.rays))
        need = max(rd.start_depth(tree, n) for n in range(use)) + K + 1
        if need <= depth:
            break
        depth = need
    gedges = genus_edges(tree, rd, d)
    planes = list(range(use))
    for n in planes[1:]:
        n2, l = rd.origin[n]
        if l > K:
            raise GraftError(f"slit_index_limit {K} too small: ray {n} starts at slot {l} of ray {n2}")

    # partner map for s slots: (n, k) -> list of partner (m, l)
    s_partner: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for m in range(1, len(rd.rays)):
        n2, l = rd.origin[m]
        s_partner[(n2, l)] = (m, 0)
        s_partner[(m, 0)] = (n2, l)

    b = ComplexBuilder()
    P = lambda n: f"{prefix}P{n}"
    S = lambda n, fam, k: f"{prefix}{_sid(n, fam, k)}"
    for n in planes:
        b.add_plane(P(n))
    for n in planes:
        ray = rd.rays[n]
        for k in range(K + 1):
            if (n, k) in s_partner:
                b.slit(S(n, "s", k), P(n), (slit_x("s", k), 0), (1, 0), label=f"s({n},{k})")
            if k + 1 < len(ray) and ray[k + 1] in gedges:
                b.slit(S(n, "t", k), P(n), (slit_x("t", k), 0), (1, 0), label=f"t({n},{k})")
                b.slit(S(n, "t'", k), P(n), (slit_x("t'", k), 0), (1, 0), label=f"t'({n},{k})")
                b.glue(S(n, "t", k), S(n, "t'", k))
        b.add_frontier(P(n), (6 * (K + 1), 0), (1, 0))
    for n in planes:
        for k in range(K + 1):
            if (n, k) not in s_partner:
                continue
            m, l = s_partner[(n, k)]
            if m < use and l <= K:
                if (m, l) > (n, k):
                    b.glue(S(n, "s", k), S(m, "s", l))
            else:
                b.open_stub(S(n, "s", k), f"s({m},{l})")
    b.meta.update({
        "builder": "graft",
        "descriptor": format_descriptor(d),
        "genus": str(d.genus),
        "planes_limit": planes_limit,
        "slit_index_limit": K,
        "tree_depth": depth,
        "rays": len(rd.rays),
    })
    return b.freeze()
