"""Cayley-graph assemblies: vertex surface copies glued along a blueprint.

Every builder returns a ``BuildResult`` holding the truncated complex, the
canonical automorphism family and the blueprint data.  Copy ``i`` of the
vertex surface is the i-th element of the breadth-first Cayley ball and its
ids carry the prefix ``g{i}/``.

The lower half-plane ``{y <= -1}`` of the first graft plane P0 is free of
slits; it serves as the half-plane H0 with its own coordinates (x, y),
y >= 0, attached by the rotation (x, y) -> (-x, -1 - y).

Automorphisms act on copies by left multiplication: T_k sends copy g to
copy kg, which respects gluings along edges g -> gh.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from .end_space import (ALL, SELF_SIMILAR, TRANSLATABLE, EndSpaceDescriptor, classify_trichotomy,
                        format_descriptor)
from .exact import (IDENTITY, Mat, Vec, add, dist2_features_lower, mat, mat_inv, mat_vec, q, scale,
                    sub, vec)
from .flatgeom import (AutomorphismCandidate, Geometry, audit_cone_angles, candidate_to_json,
                       saddle_connections)
from .groups import (CayleyBall, FiniteTable, Free, Group, GroupError, cayley_ball)
from .surface_complex import (ComplexBuilder, ComplexError, PolygonSurgery, SurfaceComplex, apply_matrix,
                              canonical_polygon, disjoint_union)
from .tree_grafting import graft

__all__ = ["BuildError", "BuildConfig", "BuildResult", "ComponentPattern", "h0_point", "h0_vector",
           "build_selfsimilar_isometry", "build_free_genus_zero", "build_finite_isometry",
           "build_translatable", "build_veech_selfsimilar", "build_veech_finite", "build_parabolic_full",
           "separation_audit", "distinguished_cone_points", "case2_angle", "copy_planes"]


class BuildError(ValueError):
    pass


def h0_point(x, y) -> Vec:
    """H0 coordinates to P0 coordinates."""
    return vec(-q(x), -1 - q(y))


def h0_vector(x, y) -> Vec:
    return vec(-q(x), -q(y))


@dataclass(frozen=True)
class BuildConfig:
    planes_limit: int = 3
    slit_index_limit: int = 3
    ball_radius: int = 2
    separation: Fraction = Fraction(100)
    small_diameter: Fraction = Fraction(1, 100)
    grid_rows: int = 2
    chain_radius: int = 1
    case: int = 1
    sc_bound: Fraction = Fraction(3)

    def __post_init__(self):
        for name in ("planes_limit", "slit_index_limit", "grid_rows"):
            if getattr(self, name) < 1:
                raise BuildError(f"{name} must be >= 1")
        if self.ball_radius < 0 or self.chain_radius < 0:
            raise BuildError("radii must be >= 0")
        object.__setattr__(self, "separation", q(self.separation))
        object.__setattr__(self, "small_diameter", q(self.small_diameter))
        object.__setattr__(self, "sc_bound", q(self.sc_bound))
        if self.separation <= 0:
            raise BuildError("separation must be positive")
        if not 0 < self.small_diameter < 1:
            raise BuildError("small_diameter must lie in (0, 1)")
        if self.case not in (1, 2):
            raise BuildError("case must be 1 or 2")

    def to_json(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Fraction):
                d[k] = str(v)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "BuildConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise BuildError(f"unknown config keys: {', '.join(sorted(extra))}")
        kw = {}
        for k, v in d.items():
            kw[k] = Fraction(str(v)) if k in ("separation", "small_diameter", "sc_bound") else int(v)
        return cls(**kw)


@dataclass
class BuildResult:
    complex: SurfaceComplex
    family: List[AutomorphismCandidate]
    copies: List[Tuple[str, str]]  # (prefix, element name)
    schedule: List[Tuple[str, ...]] = field(default_factory=list)  # inter-copy gluings
    derivatives: Dict[str, Mat] = field(default_factory=dict)  # candidate name -> expected derivative

    def family_json(self) -> dict:
        return {"copies": [[p, n] for p, n in self.copies],
                "candidates": [candidate_to_json(c) for c in self.family]}


# -- shared pieces -----------------------------------------------------------------

def _ball(group: Group, R: int) -> CayleyBall:
    if group.is_finite:
        return cayley_ball(group, max(R, len(group.elements())))
    return cayley_ball(group, R)


def _finite_elements(group: Group) -> Tuple[Hashable, ...]:
    """Identity first, then the group's own order (the enumeration g_1..g_N)."""
    return tuple(group.elements())


def _prefix(i: int) -> str:
    return f"g{i}"


def copy_planes(c: SurfaceComplex, prefix: str) -> List[str]:
    return [p.id for p in c.planes if p.id.startswith(prefix + "/")]


def _assemble(vertex: SurfaceComplex, n: int, charts: Optional[Sequence[Mat]] = None,
              prefix=_prefix) -> ComplexBuilder:
    parts = []
    for i in range(n):
        v = vertex if charts is None or charts[i] == IDENTITY else apply_matrix(vertex, charts[i])
        parts.append((prefix(i), v))
    b = disjoint_union(parts)
    b.meta = dict(vertex.meta)
    return b


def _stub_rest(b: ComplexBuilder, partner_of) -> None:
    """Unglued attachment slits become open stubs."""
    for sid, s in list(b.slits.items()):
        if sid not in b.glued and sid not in b.open_stubs:
            b.open_stub(sid, partner_of(sid))


def _family(ball_elems: Sequence[Hashable], group: Group, vertex: SurfaceComplex, prefix=_prefix,
            derivative=lambda k: IDENTITY, keys: Optional[Sequence[Hashable]] = None) -> List[AutomorphismCandidate]:
    idx = {g: i for i, g in enumerate(ball_elems)}
    out = []
    for k in (keys if keys is not None else ball_elems):
        pm = {}
        for i, g in enumerate(ball_elems):
            j = idx.get(group.mul(k, g))
            if j is None:
                continue
            for p in vertex.planes:
                pm[f"{prefix(i)}/{p.id}"] = f"{prefix(j)}/{p.id}"
        out.append(AutomorphismCandidate.make(pm, derivative(k), {}, f"T[{group.name(k)}]"))
    return out


def _graft_vertex(d: EndSpaceDescriptor, cfg: BuildConfig) -> ComplexBuilder:
    return ComplexBuilder(graft(d, cfg.planes_limit, cfg.slit_index_limit))


def _require_selfsimilar(d: EndSpaceDescriptor) -> None:
    try:
        cls = classify_trichotomy(d)
    except ValueError as e:
        raise BuildError(str(e)) from None
    if cls != SELF_SIMILAR:
        raise BuildError(f"descriptor {format_descriptor(d)} is {cls}, not self-similar")


def _icosagon(b: ComplexBuilder, plane: str, center: Vec, bound: Fraction, sid: str = "ico") -> None:
    b.polygon(sid, plane, canonical_polygon(10, center, bound))


# -- self-similar: complete Cayley graph, infinite rays -------------------------------

def _complete_labels(group: Group, ball: CayleyBall, R: int) -> List[Hashable]:
    """Non-identity labels h with g, gh both in the ball, in breadth-first order."""
    if group.is_finite:
        return [h for h in _finite_elements(group) if h != group.identity()]
    big = cayley_ball(group, 2 * R).elements
    members = set(ball.elements)
    used = set()
    for g in ball.elements:
        gi = group.inv(g)
        for g2 in ball.elements:
            if g2 != g:
                used.add(group.mul(gi, g2))
    return [h for h in big if h in used and h != group.identity()]


def build_selfsimilar_isometry(group: Group, d: EndSpaceDescriptor, cfg: BuildConfig = BuildConfig()) -> BuildResult:
    _require_selfsimilar(d)
    ball = _ball(group, cfg.ball_radius)
    elems = ball.elements
    labels = _complete_labels(group, ball, cfg.ball_radius)
    v = _graft_vertex(d, cfg)
    for n, h in enumerate(labels, 1):
        nm = group.name(h)
        v.slit(f"P0:in{n}", "P0", h0_point(4 * n, 0), h0_vector(0, 1), "ray", f"s_in({nm})")
        v.slit(f"P0:out{n}", "P0", h0_point(4 * n + 1, 0), h0_vector(0, 1), "ray", f"s_out({nm})")
    _icosagon(v, "P0", h0_point(-cfg.separation, cfg.separation), cfg.small_diameter)
    v.meta.update({"builder": "selfsimilar-isometry", "separation": str(cfg.separation)})
    vertex = v.freeze()
    b = _assemble(vertex, len(elems))
    idx = {g: i for i, g in enumerate(elems)}
    schedule = []
    for i, g in enumerate(elems):
        for n, h in enumerate(labels, 1):
            j = idx.get(group.mul(g, h))
            if j is not None:
                pair = (f"{_prefix(i)}/P0:out{n}", f"{_prefix(j)}/P0:in{n}")
                b.glue(*pair)
                schedule.append(pair)
    _stub_rest(b, lambda sid: "outside the Cayley ball")
    b.meta["copies"] = [group.name(g) for g in elems]
    b.meta["group_labels"] = [group.name(h) for h in labels]
    return BuildResult(b.freeze(), _family(elems, group, vertex),
                       [(_prefix(i), group.name(g)) for i, g in enumerate(elems)], schedule)


def build_free_genus_zero(m: int, d: EndSpaceDescriptor, cfg: BuildConfig = BuildConfig()) -> BuildResult:
    if m < 1:
        raise BuildError("free group rank must be >= 1")
    if d.genus.kind != "none":
        raise BuildError(f"free-group builder needs a genus-zero descriptor (genus marking none, got {d.genus})")
    _require_selfsimilar(d.with_genus(ALL))
    group = Free(m)
    ball = cayley_ball(group, cfg.ball_radius)
    elems = ball.elements
    gens = group.generators()
    v = _graft_vertex(d, cfg)
    for n, s in enumerate(gens, 1):
        nm = group.name(s)
        v.slit(f"P0:in{n}", "P0", h0_point(4 * n, 0), h0_vector(0, 1), "ray", f"s_in({nm})")
        v.slit(f"P0:out{n}", "P0", h0_point(4 * n + 1, 0), h0_vector(0, 1), "ray", f"s_out({nm})")
    v.branched_cover("branch", "P0", h0_point(0, 0), h0_vector(0, 1), 3)
    v.meta.update({"builder": "free-genus-zero", "separation": str(cfg.separation)})
    vertex = v.freeze()
    b = _assemble(vertex, len(elems))
    idx = {g: i for i, g in enumerate(elems)}
    schedule = []
    for i, g in enumerate(elems):
        for n, s in enumerate(gens, 1):
            j = idx.get(group.mul(g, s))
            if j is not None:
                pair = (f"{_prefix(i)}/P0:out{n}", f"{_prefix(j)}/P0:in{n}")
                b.glue(*pair)
                schedule.append(pair)
    _stub_rest(b, lambda sid: "outside the Cayley ball")
    b.meta["copies"] = [group.name(g) for g in elems]
    return BuildResult(b.freeze(), _family(elems, group, vertex),
                       [(_prefix(i), group.name(g)) for i, g in enumerate(elems)], schedule)


# -- finite groups: component pattern and slit grid -------------------------------------

@dataclass(frozen=True)
class ComponentPattern:
    """Planar pieces S_j with boundary counts alpha_j and the annuli pairing their boundaries.

    ``pairings`` holds ((j, m), (j', m')) with 1 <= m <= alpha_j.
    """

    components: Tuple[str, ...]
    boundary: Tuple[int, ...]
    pairings: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]

    def __post_init__(self):
        J = len(self.components)
        if J == 0:
            raise BuildError("pattern needs at least one component")
        if len(self.boundary) != J:
            raise BuildError("need one boundary count per component")
        if len(set(self.components)) != J or any("/" in c or ":" in c or not c for c in self.components):
            raise BuildError("component names must be distinct, non-empty and free of '/' and ':'")
        used = set()
        parent = list(range(J))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for pr in self.pairings:
            for j, mm in pr:
                if not 0 <= j < J:
                    raise BuildError(f"pairing refers to unknown component {j}")
                if not 1 <= mm <= self.boundary[j]:
                    raise BuildError(f"boundary index {mm} exceeds alpha={self.boundary[j]} of {self.components[j]}")
                if (j, mm) in used:
                    raise BuildError(f"boundary {mm} of {self.components[j]} is paired twice")
                used.add((j, mm))
            (a, _), (c, _) = pr
            parent[find(a)] = find(c)
        for j in range(J):
            for mm in range(1, self.boundary[j] + 1):
                if (j, mm) not in used:
                    raise BuildError(f"boundary {mm} of {self.components[j]} is not paired")
        if len({find(j) for j in range(J)}) != 1:
            raise BuildError("pairing graph is disconnected")

    @classmethod
    def default(cls) -> "ComponentPattern":
        return cls(("S0", "S1"), (1, 1), (((0, 1), (1, 1)),))

    @classmethod
    def from_json(cls, d: dict) -> "ComponentPattern":
        try:
            return cls(tuple(d["components"]), tuple(int(x) for x in d["boundary"]),
                       tuple((tuple(a), tuple(b)) for a, b in d["pairings"]))
        except (KeyError, TypeError, ValueError) as e:
            raise BuildError(f"bad component pattern: {e}") from None

    def to_json(self) -> dict:
        return {"components": list(self.components), "boundary": list(self.boundary),
                "pairings": [[list(a), list(b)] for a, b in self.pairings]}


def _pattern_vertex(pattern: ComponentPattern, cfg: BuildConfig) -> ComplexBuilder:
    v = ComplexBuilder()
    half = Fraction(1, 2)
    for cj in pattern.components:
        v.add_plane(cj)
    for j, cj in enumerate(pattern.components):
        for mm in range(1, pattern.boundary[j] + 1):
            v.slit(f"{cj}:b{mm}", cj, (mm, 0), (half, 0), label=f"s_{cj}({mm},0)")
    for (j, mm), (j2, m2) in pattern.pairings:
        v.glue(f"{pattern.components[j]}:b{mm}", f"{pattern.components[j2]}:b{m2}")
    return v


def _grid_frontiers(v: ComplexBuilder, pattern: ComponentPattern, top) -> None:
    for cj in pattern.components:
        v.add_frontier(cj, (0, top), (1, 0))


def build_finite_isometry(group: FiniteTable, pattern: Optional[ComponentPattern] = None,
                          cfg: BuildConfig = BuildConfig()) -> BuildResult:
    if not group.is_finite:
        raise BuildError("finite-group builder needs a multiplication table")
    pattern = pattern or ComponentPattern.default()
    elems = _finite_elements(group)
    K = cfg.grid_rows
    half = Fraction(1, 2)
    v = _pattern_vertex(pattern, cfg)
    for cj in pattern.components:
        for l, g in enumerate(elems, 1):
            for k in range(1, 2 * K + 1):
                v.slit(f"{cj}:r{l}_{k}", cj, (l, k), (half, 0), label=f"s_{cj}({l},{k})")
    _grid_frontiers(v, pattern, 2 * K + 1)
    _icosagon(v, pattern.components[0], vec(-cfg.separation, -cfg.separation), cfg.small_diameter)
    v.meta.update({"builder": "finite-isometry", "separation": str(cfg.separation),
                   "pattern": pattern.to_json(), "grid_rows": K})
    vertex = v.freeze()
    b = _assemble(vertex, len(elems))
    idx = {g: i for i, g in enumerate(elems)}
    schedule = []
    for i, g in enumerate(elems):
        for l, h in enumerate(elems, 1):
            j = idx[group.mul(g, h)]
            for cj in pattern.components:
                for mm in range(1, K + 1):
                    pair = (f"{_prefix(i)}/{cj}:r{l}_{2 * mm}", f"{_prefix(j)}/{cj}:r{l}_{2 * mm - 1}")
                    b.glue(*pair)
                    if i != j:
                        schedule.append(pair)
    _stub_rest(b, lambda sid: "beyond the grid truncation")
    b.meta["copies"] = [group.name(g) for g in elems]
    return BuildResult(b.freeze(), _family(elems, group, vertex),
                       [(_prefix(i), group.name(g)) for i, g in enumerate(elems)], schedule)


def build_veech_finite(group: FiniteTable, pattern: Optional[ComponentPattern] = None,
                       cfg: BuildConfig = BuildConfig(), max_doublings: int = 12) -> BuildResult:
    if not group.is_finite or group.matrices is None:
        raise BuildError("finite Veech builder needs a table with one rational matrix per element")
    pattern = pattern or ComponentPattern.default()
    elems = _finite_elements(group)
    K = cfg.grid_rows
    half = (Fraction(1, 2), Fraction(0))
    x0 = y0 = Fraction(1)
    for _ in range(max_doublings + 1):
        try:
            v = _pattern_vertex(pattern, cfg)
            for cj in pattern.components:
                for l, g in enumerate(elems, 1):
                    w_in = mat_vec(mat_inv(group.matrix(g)), half)
                    for k in range(1, K + 1):
                        v.slit(f"{cj}:out{l}_{k}", cj, (l * x0, 2 * k * y0), half,
                               label=f"s_{cj}({l}x0,{2 * k}y0)")
                        v.slit(f"{cj}:in{l}_{k}", cj, (l * x0, (2 * k - 1) * y0), w_in,
                               label=f"s_{cj}({group.name(g)}^-1,{l}x0,{2 * k - 1}y0)")
            break
        except ComplexError:
            x0, y0 = 2 * x0, 2 * y0
    else:
        raise BuildError(f"could not separate the twisted slit families after {max_doublings} doublings")
    _grid_frontiers(v, pattern, (2 * K + 1) * y0)
    _icosagon(v, pattern.components[0], vec(-cfg.separation, -cfg.separation), cfg.small_diameter)
    v.meta.update({"builder": "veech-finite", "separation": str(cfg.separation), "pattern": pattern.to_json(),
                   "grid_rows": K, "x0": str(x0), "y0": str(y0)})
    vertex = v.freeze()
    charts = [group.matrix(g) for g in elems]
    b = _assemble(vertex, len(elems), charts)
    idx = {g: i for i, g in enumerate(elems)}
    schedule = []
    for i, g in enumerate(elems):
        for l, h in enumerate(elems, 1):
            j = idx[group.mul(g, h)]
            for cj in pattern.components:
                for k in range(1, K + 1):
                    pair = (f"{_prefix(i)}/{cj}:out{l}_{k}", f"{_prefix(j)}/{cj}:in{l}_{k}")
                    b.glue(*pair)
                    if i != j:
                        schedule.append(pair)
    _stub_rest(b, lambda sid: "beyond the grid truncation")
    b.meta["copies"] = [group.name(g) for g in elems]
    fam = _family(elems, group, vertex, derivative=group.matrix)
    return BuildResult(b.freeze(), fam, [(_prefix(i), group.name(g)) for i, g in enumerate(elems)], schedule,
                       {c.name: group.matrix(g) for c, g in zip(fam, elems)})


# -- translatable -------------------------------------------------------------------------

def case2_angle(n: int) -> int:
    """Distinguished cone angle of block n, in units of 2*pi."""
    return 4 * abs(n) + 3 if n >= 0 else 4 * abs(n) + 5


def _k0_slits(v: ComplexBuilder, gens: Sequence[Hashable], group: Group, cfg: BuildConfig) -> None:
    """Two short horizontal slits per generator inside a small disk K0."""
    k = len(gens)
    L = cfg.small_diameter / 4
    dy = cfg.small_diameter / (8 * k)
    c = h0_point(0, cfg.separation)
    for i, s in enumerate(gens, 1):
        for sign, row in (("-", 2 * i - 2), ("+", 2 * i - 1)):
            base = add(c, vec(L / 2, row * dy))
            v.slit(f"P0:K0{sign}{i}", "P0", base, h0_vector(L, 0), label=f"K0:s({group.name(s)}{sign})")


def build_translatable(group: Group, base: EndSpaceDescriptor, cfg: BuildConfig = BuildConfig()) -> BuildResult:
    if not base.is_countable:
        raise BuildError("translatable builder needs a countable base end space")
    if base.atom == "empty":
        raise BuildError("base end space is empty")
    if cfg.case == 1:
        return _translatable_case1(group, base, cfg)
    return _translatable_case2(group, base, cfg)


def _translatable_case1(group: Group, base, cfg) -> BuildResult:
    if group.is_finite:
        raise BuildError("case 1 needs an infinite virtually cyclic group; use case 2 for finite groups")
    ball = cayley_ball(group, cfg.ball_radius)
    elems = ball.elements
    gens = group.generators()
    v = _graft_vertex(base, cfg)
    _k0_slits(v, gens, group, cfg)
    _icosagon(v, "P0", h0_point(-2 * cfg.separation, cfg.separation), cfg.small_diameter / 8)
    v.meta.update({"builder": "translatable", "case": 1, "separation": str(cfg.separation)})
    vertex = v.freeze()
    b = _assemble(vertex, len(elems))
    idx = {g: i for i, g in enumerate(elems)}
    schedule = []
    for i, g in enumerate(elems):
        for n, s in enumerate(gens, 1):
            j = idx.get(group.mul(g, s))
            if j is not None:
                pair = (f"{_prefix(i)}/P0:K0-{n}", f"{_prefix(j)}/P0:K0+{n}")
                b.glue(*pair)
                schedule.append(pair)
    _stub_rest(b, lambda sid: "outside the Cayley ball")
    b.meta["copies"] = [group.name(g) for g in elems]
    return BuildResult(b.freeze(), _family(elems, group, vertex),
                       [(_prefix(i), group.name(g)) for i, g in enumerate(elems)], schedule)


def _translatable_case2(group: Group, base, cfg) -> BuildResult:
    if not group.is_finite:
        raise BuildError("case 2 needs a finite group")
    elems = _finite_elements(group)
    gens = [g for g in elems if g != group.identity()] or []
    N = cfg.chain_radius
    blocks = list(range(-N, N + 1))
    pre = lambda n, i: f"b{n}.g{i}"
    parts = []
    vertices = {}
    for n in blocks:
        v = _graft_vertex(base, cfg)
        if gens:
            _k0_slits(v, gens, group, cfg)
        cn = case2_angle(n)
        bound = cfg.small_diameter / (8 * 10 ** abs(n))
        v.polygon("poly", "P0", canonical_polygon(cn - 1, h0_point(-2 * cfg.separation, cfg.separation), bound))
        chain = h0_point(2 * cfg.separation, cfg.separation)
        v.slit("P0:chain+", "P0", chain, h0_vector(1, 0), label="s+")
        v.slit("P0:chain-", "P0", add(chain, vec(0, -2)), h0_vector(1, 0), label="s-")
        v.meta.update({"builder": "translatable", "case": 2, "separation": str(cfg.separation)})
        vertices[n] = v.freeze()
        for i in range(len(elems)):
            parts.append((pre(n, i), vertices[n]))
    b = disjoint_union(parts)
    b.meta = dict(vertices[0].meta)
    idx = {g: i for i, g in enumerate(elems)}
    schedule = []
    for n in blocks:
        for i, g in enumerate(elems):
            for t, s in enumerate(gens, 1):
                j = idx[group.mul(g, s)]
                pair = (f"{pre(n, i)}/P0:K0-{t}", f"{pre(n, j)}/P0:K0+{t}")
                b.glue(*pair)
                schedule.append(pair)
            if n < N:
                pair = (f"{pre(n, i)}/P0:chain-", f"{pre(n + 1, i)}/P0:chain+")
                b.glue(*pair)
                schedule.append(pair)
    _stub_rest(b, lambda sid: "beyond the chain truncation")
    b.meta["copies"] = [f"{group.name(g)}@{n}" for n in blocks for g in elems]
    b.meta["block_angles"] = {str(n): case2_angle(n) for n in blocks}
    fam = []
    for k in elems:
        pm = {}
        for n in blocks:
            for i, g in enumerate(elems):
                j = idx[group.mul(k, g)]
                for p in vertices[n].planes:
                    pm[f"{pre(n, i)}/{p.id}"] = f"{pre(n, j)}/{p.id}"
        fam.append(AutomorphismCandidate.make(pm, IDENTITY, {}, f"T[{group.name(k)}]"))
    copies = [(pre(n, i), f"{group.name(g)}@{n}") for n in blocks for i, g in enumerate(elems)]
    return BuildResult(b.freeze(), fam, copies, schedule)


# -- Veech, self-similar ---------------------------------------------------------------

def build_veech_selfsimilar(group: Group, d: EndSpaceDescriptor, cfg: BuildConfig = BuildConfig()) -> BuildResult:
    _require_selfsimilar(d)
    if group.matrix(group.identity()) is None:
        raise BuildError("Veech builder needs a matrix group")
    ball = _ball(group, cfg.ball_radius)
    elems = ball.elements
    gens = group.generators()
    K = cfg.slit_index_limit
    one = (Fraction(1), Fraction(0))
    v = _graft_vertex(d, cfg)
    for i, g in enumerate(gens, 1):
        nm = group.name(g)
        w = mat_vec(mat_inv(group.matrix(g)), one)
        wx, wy = abs(w[0]), abs(w[1])
        if wy > 5:
            raise BuildError(f"strip overflow: generator {nm} tilts the unit slit by {wy} > 5")
        for n in range(1, K + 1):
            v.slit(f"P0:out{i}_{n}", "P0", h0_point(2 * i, 2 * (i + n)), h0_vector(1, 0), label=f"s({nm},{n})")
            X = 10 * i + 15 + (n - 1) * (10 + wx)
            bx = X if w[0] >= 0 else X + wx
            by = 10 * i + (-w[1] if w[1] < 0 else 0)
            v.slit(f"P0:in{i}_{n}", "P0", h0_point(bx, by), h0_vector(*w), label=f"s({nm}^-1,{n})")
    _icosagon(v, "P0", h0_point(-cfg.separation, cfg.separation), cfg.small_diameter)
    v.meta.update({"builder": "veech-selfsimilar", "separation": str(cfg.separation)})
    vertex = v.freeze()
    b = _assemble(vertex, len(elems), [group.matrix(g) for g in elems])
    idx = {g: i for i, g in enumerate(elems)}
    schedule = []
    for a, h in enumerate(elems):
        for i, g in enumerate(gens, 1):
            j = idx.get(group.mul(h, g))
            if j is None:
                continue
            for n in range(1, K + 1):
                pair = (f"{_prefix(a)}/P0:out{i}_{n}", f"{_prefix(j)}/P0:in{i}_{n}")
                b.glue(*pair)
                schedule.append(pair)
    _stub_rest(b, lambda sid: "outside the Cayley ball")
    b.meta["copies"] = [group.name(g) for g in elems]
    fam = _family(elems, group, vertex, derivative=group.matrix)
    return BuildResult(b.freeze(), fam, [(_prefix(i), group.name(g)) for i, g in enumerate(elems)], schedule,
                       {c.name: group.matrix(g) for c, g in zip(fam, elems)})


def build_parabolic_full(d: EndSpaceDescriptor, cfg: BuildConfig = BuildConfig()) -> SurfaceComplex:
    return graft(d, cfg.planes_limit, cfg.slit_index_limit)


# -- certificates -----------------------------------------------------------------------

def distinguished_cone_points(c: SurfaceComplex, prefix: str, geom: Optional[Geometry] = None):
    """Interior cone points of a copy whose angle is not 4*pi, as (angle in units of pi, copies)."""
    planes = set(copy_planes(c, prefix))
    out = []
    for cp in audit_cone_angles(c, geom):
        if not any(p in planes for p, _ in cp.copies):
            continue
        if cp.angle is not None and cp.angle != 2:
            out.append((cp.angle_pi, cp.copies))
    return out


def _isolated(c: SurfaceComplex):
    """Features that must sit far from the rest: K0 slits and polygons, grouped per plane."""
    groups: Dict[Tuple[str, str], List[Tuple[Vec, Vec, bool]]] = {}
    for s in c.slits:
        if (s.label or "").startswith("K0:"):
            groups.setdefault((s.plane, "K0"), []).append((c.image_point(s.plane, s.base), c.image_holonomy(s), False))
    ch = {p.id: p.chart for p in c.planes}
    for poly in c.polygons():
        V = [mat_vec(ch[poly.plane], x) for x in poly.vertices]
        groups[(poly.plane, poly.id)] = [(V[i], sub(V[(i + 1) % len(V)], V[i]), False) for i in range(len(V))]
    return groups


def separation_audit(c: SurfaceComplex, separation=None, sc_bound=None, geom: Optional[Geometry] = None) -> dict:
    """Distances from isolated features (K0 slits, polygons) to everything else.

    Checks every slit, frontier and saddle connection of length <= sc_bound
    that does not touch an isolated feature, plus isolated groups against
    each other.  Squared distances are compared exactly.
    """
    meta = dict(c.meta)
    sep = q(separation if separation is not None else Fraction(str(meta.get("separation", 100))))
    bound = q(sc_bound if sc_bound is not None else 3)
    sep2 = sep * sep
    g = geom or Geometry(c)
    groups = _isolated(c)
    planes = sorted({p for p, _ in groups})
    viol = []
    iso_points = set()
    iso_ids = set()
    for (p, gid), feats in groups.items():
        for A, w, _ in feats:
            iso_points.add((p, A))
            iso_points.add((p, add(A, w)))
    for s in c.slits:
        if (s.label or "").startswith("K0:"):
            iso_ids.add(s.id)
    others: Dict[str, List[Tuple[str, Vec, Vec, bool]]] = {p: [] for p in planes}
    for f_list in (g.features.get(p, []) for p in planes):
        for f in f_list:
            if f.kind == "pside" or (f.kind in ("slit", "stub") and f.ref in iso_ids):
                continue
            others[f.plane].append((f"{f.kind} {f.ref}", f.A, f.w, f.is_ray))
    if planes:
        rep = saddle_connections(c, bound, planes, g, skip_starts=iso_points)
        for sc in rep.connections:
            if (sc.start in iso_points) or (sc.end in iso_points):
                continue
            for pl, a, bpt in sc.trajectory.segments:
                if pl in others:
                    others[pl].append(("saddle connection", a, sub(bpt, a), False))
    checked = 0
    for (p, gid), feats in sorted(groups.items()):
        for what, B, v, vr in others[p]:
            for A, w, ar in feats:
                checked += 1
                if dist2_features_lower(A, w, ar, B, v, vr) < sep2:
                    viol.append(f"{gid} on {p} is closer than {sep} to {what}")
                    break
        for (p2, gid2), feats2 in sorted(groups.items()):
            if p2 != p or gid2 <= gid:
                continue
            if min(dist2_features_lower(A, w, False, B, v, False) for A, w, _ in feats for B, v, _ in feats2) < sep2:
                viol.append(f"{gid} and {gid2} on {p} are closer than {sep}")
    return {"pass": not viol, "separation": str(sep), "checked_pairs": checked, "violations": viol}
