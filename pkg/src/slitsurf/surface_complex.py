"""Exact-coordinate model of a (truncated) translation surface.

A complex is a set of planes, each carrying a chart matrix, with marked
slits, cyclic slit gluings, polygon surgeries and branched covers.  Slits are
stored in plane coordinates; the chart matrix maps them to image
coordinates, where all gluing tests happen.

Gluings are cyclic tuples (s_0, ..., s_{k-1}).  With u the common image
direction of the cycle and "left" the side towards rot90(u), the left side
of s_i is identified with the right side of s_{i+1} by a translation.  A
2-cycle is the usual cross gluing of a slit pair; longer cycles arise from
branched covers.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .exact import (IDENTITY, Mat, Vec, add, cross, det, dot, feature_meets_polygon, features_meet,
                    is_zero, mat, mat_mul, mat_vec, neg, norm2, point_in_convex, polygons_meet, q,
                    same_direction, scale, sub, vec)

__all__ = [
    "Plane", "Slit", "Gluing", "PolygonSurgery", "BranchedCover", "OpenStub", "Frontier",
    "SurfaceComplex", "ComplexBuilder", "ComplexError", "empty_complex",
    "add_plane", "add_slit", "glue", "icosagon_surgery", "polygon_surgery", "branched_cover_surgery",
    "apply_matrix", "canonical_polygon", "disjoint_union", "check_gluing",
]


class ComplexError(ValueError):
    """Invalid construction step; ``path`` locates the offending record when known."""

    def __init__(self, msg: str, path: Optional[str] = None):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path
        self.detail = msg


@dataclass(frozen=True)
class Plane:
    id: str
    chart: Mat = IDENTITY
    half_plane: bool = False

    def __post_init__(self):
        if det(self.chart) <= 0:
            raise ComplexError(f"chart matrix of plane {self.id!r} must have positive determinant")


@dataclass(frozen=True)
class Slit:
    id: str
    plane: str
    base: Vec
    holonomy: Vec
    kind: str = "finite"  # or "ray"
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("finite", "ray"):
            raise ComplexError(f"slit {self.id!r}: kind must be 'finite' or 'ray'")
        if is_zero(self.holonomy):
            raise ComplexError(f"slit {self.id!r}: holonomy must be nonzero")

    @property
    def is_ray(self) -> bool:
        return self.kind == "ray"

    @property
    def end(self) -> Vec:
        return add(self.base, self.holonomy)


@dataclass(frozen=True)
class Gluing:
    slits: Tuple[str, ...]


@dataclass(frozen=True)
class PolygonSurgery:
    """Interior of a centrally symmetric convex 2m-gon removed, opposite sides identified.

    ``vertices`` are ccw in plane coordinates; side j runs v_j -> v_{j+1} and is
    identified with side j+m by the translation v_j -> v_{j+m+1}.
    """

    id: str
    plane: str
    vertices: Tuple[Vec, ...]

    @property
    def m(self) -> int:
        return len(self.vertices) // 2

    def side(self, j: int) -> Tuple[Vec, Vec]:
        n = len(self.vertices)
        return self.vertices[j % n], self.vertices[(j + 1) % n]

    def side_vectors(self) -> List[Vec]:
        return [sub(b, a) for a, b in (self.side(j) for j in range(len(self.vertices)))]

    def closed_surface_angle(self) -> int:
        """Cone angle, in units of pi, of the closed surface P/~ (the polygon itself glued up)."""
        n = len(self.vertices)
        return n - 2  # interior angle sum (n-2)pi; one vertex class when m is even


@dataclass(frozen=True)
class BranchedCover:
    id: str
    plane: str
    point: Vec
    direction: Vec
    degree: int
    sheets: Tuple[str, ...]
    slits: Tuple[str, ...]


@dataclass(frozen=True)
class OpenStub:
    slit: str
    partner: str


@dataclass(frozen=True)
class Frontier:
    """Truncation boundary: everything on this ray is unknown."""

    plane: str
    base: Vec
    direction: Vec


Surgery = object  # PolygonSurgery | BranchedCover


@dataclass(frozen=True)
class SurfaceComplex:
    planes: Tuple[Plane, ...] = ()
    slits: Tuple[Slit, ...] = ()
    gluings: Tuple[Gluing, ...] = ()
    surgeries: Tuple[object, ...] = ()
    open_stubs: Tuple[OpenStub, ...] = ()
    frontiers: Tuple[Frontier, ...] = ()
    meta: Tuple[Tuple[str, object], ...] = ()

    @cached_property
    def plane_index(self) -> Dict[str, Plane]:
        return {p.id: p for p in self.planes}

    @cached_property
    def slit_index(self) -> Dict[str, Slit]:
        return {s.id: s for s in self.slits}

    @cached_property
    def gluing_of(self) -> Dict[str, Gluing]:
        return {sid: g for g in self.gluings for sid in g.slits}

    @cached_property
    def stub_of(self) -> Dict[str, OpenStub]:
        return {o.slit: o for o in self.open_stubs}

    @property
    def metadata(self) -> Dict[str, object]:
        return dict(self.meta)

    def plane(self, pid: str) -> Plane:
        try:
            return self.plane_index[pid]
        except KeyError:
            raise ComplexError(f"unknown plane {pid!r}") from None

    def slit(self, sid: str) -> Slit:
        try:
            return self.slit_index[sid]
        except KeyError:
            raise ComplexError(f"unknown slit {sid!r}") from None

    def image_point(self, pid: str, p: Vec) -> Vec:
        return mat_vec(self.plane(pid).chart, p)

    def image_holonomy(self, s: Slit) -> Vec:
        return mat_vec(self.plane(s.plane).chart, s.holonomy)

    def active_slits(self, pid: Optional[str] = None) -> List[Slit]:
        """Slits that are geometric features: glued or open stubs."""
        g, o = self.gluing_of, self.stub_of
        return [s for s in self.slits if (s.id in g or s.id in o) and (pid is None or s.plane == pid)]

    def polygons(self) -> List[PolygonSurgery]:
        return [s for s in self.surgeries if isinstance(s, PolygonSurgery)]

    def branched(self) -> List[BranchedCover]:
        return [s for s in self.surgeries if isinstance(s, BranchedCover)]

    def counts(self) -> Dict[str, int]:
        return {"planes": len(self.planes), "slits": len(self.slits), "gluings": len(self.gluings),
                "surgeries": len(self.surgeries), "open_stubs": len(self.open_stubs)}

    def with_meta(self, **kw) -> "SurfaceComplex":
        d = dict(self.meta)
        d.update(kw)
        return replace(self, meta=tuple(sorted(d.items())))


def empty_complex() -> SurfaceComplex:
    return SurfaceComplex()


# -- builder ------------------------------------------------------------------

def check_gluing(images: Sequence[Tuple[Vec, bool]], names: Sequence[str]) -> None:
    """Gate for a cycle given (image holonomy, is_ray) per slit; raises on mismatch."""
    if len(images) < 2:
        raise ComplexError("a gluing needs at least two slits")
    kinds = {r for _, r in images}
    if len(kinds) != 1:
        raise ComplexError(f"cannot glue a ray to a finite slit ({', '.join(names)})")
    h0, is_ray = images[0]
    for (h, _), n in zip(images[1:], names[1:]):
        if is_ray:
            ok = same_direction(h, h0)
        elif len(images) == 2:
            ok = h == h0 or h == neg(h0)
        else:
            ok = h == h0
        if not ok:
            shown = "; ".join(f"{nm}: ({hh[0]}, {hh[1]})" for (hh, _), nm in zip(images, names))
            what = "directions are not parallel" if is_ray else "holonomies differ"
            raise ComplexError(f"gluing gate failed, image {what}: {shown}")


class ComplexBuilder:
    """Mutable staging area; ``freeze`` returns the immutable complex."""

    def __init__(self, base: Optional[SurfaceComplex] = None, check: bool = True):
        base = base or SurfaceComplex()
        self.check = check
        self.planes: Dict[str, Plane] = {p.id: p for p in base.planes}
        self.slits: Dict[str, Slit] = {s.id: s for s in base.slits}
        self.gluings: List[Gluing] = list(base.gluings)
        self.glued: Dict[str, int] = {sid: i for i, g in enumerate(self.gluings) for sid in g.slits}
        self.surgeries: List[object] = list(base.surgeries)
        self.open_stubs: Dict[str, OpenStub] = {o.slit: o for o in base.open_stubs}
        self.frontiers: List[Frontier] = list(base.frontiers)
        self.meta: Dict[str, object] = dict(base.meta)
        self._by_plane: Dict[str, List[str]] = {}
        for s in self.slits.values():
            self._by_plane.setdefault(s.plane, []).append(s.id)

    # planes
    def add_plane(self, pid: str, chart: Mat = IDENTITY, half_plane: bool = False) -> "ComplexBuilder":
        if pid in self.planes:
            raise ComplexError(f"duplicate plane id {pid!r}")
        self.planes[pid] = Plane(pid, chart, half_plane)
        return self

    def _plane(self, pid: str) -> Plane:
        if pid not in self.planes:
            raise ComplexError(f"unknown plane {pid!r}")
        return self.planes[pid]

    # collision tests in stored coordinates (linear charts preserve incidence)
    def _collisions(self, pid: str, a: Vec, w: Vec, is_ray: bool, skip: Iterable[str] = ()) -> List[str]:
        hits = []
        skip = set(skip)
        for sid in self._by_plane.get(pid, ()):
            if sid in skip:
                continue
            s = self.slits[sid]
            if features_meet(a, w, is_ray, s.base, s.holonomy, s.is_ray):
                hits.append(s.label or s.id)
        for sg in self.surgeries:
            if isinstance(sg, PolygonSurgery) and sg.plane == pid and \
                    feature_meets_polygon(a, w, is_ray, sg.vertices):
                hits.append(sg.id)
        for fr in self.frontiers:
            if fr.plane == pid and features_meet(a, w, is_ray, fr.base, fr.direction, True):
                hits.append(f"frontier of {pid}")
        return hits

    def add_slit(self, s: Slit) -> "ComplexBuilder":
        self._plane(s.plane)
        if s.id in self.slits:
            raise ComplexError(f"duplicate slit id {s.id!r}")
        if self.check:
            hits = self._collisions(s.plane, s.base, s.holonomy, s.is_ray)
            if hits:
                raise ComplexError(f"slit {s.label or s.id} overlaps {hits[0]}")
        self.slits[s.id] = s
        self._by_plane.setdefault(s.plane, []).append(s.id)
        return self

    def slit(self, sid: str, plane: str, base, holonomy, kind: str = "finite", label: str = "") -> str:
        self.add_slit(Slit(sid, plane, vec(*base), vec(*holonomy), kind, label or sid))
        return sid

    def glue(self, *sids: str) -> "ComplexBuilder":
        for sid in sids:
            if sid not in self.slits:
                raise ComplexError(f"unknown slit {sid!r}")
            if sid in self.glued:
                raise ComplexError(f"slit {self.slits[sid].label or sid} is already glued")
            if sid in self.open_stubs:
                raise ComplexError(f"slit {sid} is an open stub")
        if len(set(sids)) != len(sids):
            raise ComplexError("a slit cannot be glued to itself")
        ss = [self.slits[x] for x in sids]
        if self.check:
            check_gluing([(mat_vec(self.planes[s.plane].chart, s.holonomy), s.is_ray) for s in ss],
                         [s.label or s.id for s in ss])
        self.gluings.append(Gluing(tuple(sids)))
        for sid in sids:
            self.glued[sid] = len(self.gluings) - 1
        return self

    def open_stub(self, sid: str, partner: str) -> "ComplexBuilder":
        if sid not in self.slits:
            raise ComplexError(f"unknown slit {sid!r}")
        if sid in self.glued or sid in self.open_stubs:
            raise ComplexError(f"slit {sid} already glued or stubbed")
        self.open_stubs[sid] = OpenStub(sid, partner)
        return self

    def add_frontier(self, pid: str, base, direction) -> "ComplexBuilder":
        self._plane(pid)
        self.frontiers.append(Frontier(pid, vec(*base), vec(*direction)))
        return self

    def polygon(self, sid: str, pid: str, vertices: Sequence[Vec]) -> "ComplexBuilder":
        self._plane(pid)
        verts = tuple(vec(*v) for v in vertices)
        _check_polygon(verts, sid)
        if self.check:
            for x in self._by_plane.get(pid, ()):
                s = self.slits[x]
                if feature_meets_polygon(s.base, s.holonomy, s.is_ray, verts):
                    raise ComplexError(f"polygon {sid} meets slit {s.label or s.id}")
            for sg in self.surgeries:
                if sg.plane != pid:
                    continue
                if isinstance(sg, PolygonSurgery) and polygons_meet(sg.vertices, verts):
                    raise ComplexError(f"polygon {sid} meets surgery {sg.id}")
            for fr in self.frontiers:
                if fr.plane == pid and feature_meets_polygon(fr.base, fr.direction, True, verts):
                    raise ComplexError(f"polygon {sid} meets the frontier of {pid}")
        self.surgeries.append(PolygonSurgery(sid, pid, verts))
        return self

    def branched_cover(self, sid: str, pid: str, point, direction, degree: int) -> "ComplexBuilder":
        if degree < 2:
            raise ComplexError(f"branched cover degree must be >= 2, got {degree}")
        base = self._plane(pid)
        point, direction = vec(*point), vec(*direction)
        if is_zero(direction):
            raise ComplexError("branch ray direction must be nonzero")
        if self.check:
            hits = self._collisions(pid, point, direction, True)
            if hits:
                raise ComplexError(f"branch ray of {sid} meets {hits[0]}")
        sheets = tuple(f"{sid}~{i}" for i in range(1, degree))
        ray_ids = [f"{sid}/ray0"]
        self.add_slit(Slit(ray_ids[0], pid, point, direction, "ray", f"{sid}:ray"))
        for i, sh in enumerate(sheets, 1):
            self.add_plane(sh, base.chart, False)
            ray_ids.append(f"{sid}/ray{i}")
            self.add_slit(Slit(ray_ids[-1], sh, point, direction, "ray", f"{sid}:ray"))
        self.glue(*ray_ids)
        self.surgeries.append(BranchedCover(sid, pid, point, direction, degree, sheets, tuple(ray_ids)))
        return self

    def freeze(self) -> SurfaceComplex:
        return SurfaceComplex(
            planes=tuple(self.planes.values()),
            slits=tuple(self.slits.values()),
            gluings=tuple(self.gluings),
            surgeries=tuple(self.surgeries),
            open_stubs=tuple(self.open_stubs.values()),
            frontiers=tuple(self.frontiers),
            meta=tuple(sorted(self.meta.items())),
        )


def _check_polygon(verts: Tuple[Vec, ...], name: str) -> None:
    n = len(verts)
    if n < 4 or n % 2:
        raise ComplexError(f"polygon {name} needs an even number >= 4 of vertices")
    m = n // 2
    sides = [sub(verts[(j + 1) % n], verts[j]) for j in range(n)]
    for j in range(n):
        if cross(sides[j], sides[(j + 1) % n]) <= 0:
            raise ComplexError(f"polygon {name} is not strictly convex and counter-clockwise")
    for j in range(m):
        if sides[j + m] != neg(sides[j]):
            raise ComplexError(f"polygon {name} is not centrally symmetric (side {j})")
    # total turning must be one revolution: directions of sides wind once
    turns = sum(1 for j in range(n) if sides[j][1] < 0 <= sides[(j + 1) % n][1])
    if turns != 1:
        raise ComplexError(f"polygon {name} winds more than once")


# -- functional API ---------------------------------------------------------------

def add_plane(c: SurfaceComplex, pid: str, chart=IDENTITY, half_plane: bool = False) -> SurfaceComplex:
    return ComplexBuilder(c).add_plane(pid, mat(chart), half_plane).freeze()


def add_slit(c: SurfaceComplex, s: Slit) -> SurfaceComplex:
    return ComplexBuilder(c).add_slit(s).freeze()


def glue(c: SurfaceComplex, a: str, b: str, *more: str) -> SurfaceComplex:
    return ComplexBuilder(c).glue(a, b, *more).freeze()


def canonical_polygon(m: int, center: Vec, diameter_bound) -> Tuple[Vec, ...]:
    """Centrally symmetric convex 2m-gon with pairwise distinct rational side lengths.

    Side k (k < m) has direction ((1-t^2)/(1+t^2), 2t/(1+t^2)) with t = k/(m-k), a
    rational unit vector with angle increasing in [0, pi), and length (m+1+k)*s.
    s is chosen so that the diameter, at most half the perimeter, stays below
    ``diameter_bound``.
    """
    if m < 2:
        raise ComplexError("polygon needs m >= 2")
    bound = q(diameter_bound)
    units = []
    for k in range(m):
        t = Fraction(k, m - k)
        units.append(((1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)))
    lengths = [m + 1 + k for k in range(m)]
    s = bound / (2 * sum(lengths))
    half = [scale(s * L, u) for L, u in zip(lengths, units)]
    sides = half + [neg(e) for e in half]
    total = (sum(e[0] for e in half), sum(e[1] for e in half))
    v = sub(vec(*center), scale(Fraction(1, 2), total))
    verts = []
    for e in sides:
        verts.append(v)
        v = add(v, e)
    verts = tuple(verts)
    diam2 = max(norm2(sub(a, b)) for a in verts for b in verts)
    assert diam2 < bound * bound
    return verts


def polygon_surgery(c: SurfaceComplex, plane: str, vertices: Sequence[Vec],
                    sid: Optional[str] = None) -> SurfaceComplex:
    b = ComplexBuilder(c)
    b.polygon(sid or f"poly{len(c.surgeries)}", plane, vertices)
    out = b.freeze()
    _check_distinct_lengths(out, out.surgeries[-1])
    return out


def _check_distinct_lengths(c: SurfaceComplex, poly: PolygonSurgery) -> None:
    ch = c.plane(poly.plane).chart
    lens = [norm2(mat_vec(ch, e)) for e in poly.side_vectors()[:poly.m]]
    if len(set(lens)) != len(lens):
        raise ComplexError(f"polygon {poly.id}: non-parallel sides must have distinct lengths")


def icosagon_surgery(c: SurfaceComplex, plane: str, base, scale_bound=1,
                     sid: Optional[str] = None) -> SurfaceComplex:
    """Canonical icosagon centred at ``base`` with diameter below min(1, scale_bound)."""
    bound = min(Fraction(1), q(scale_bound))
    return polygon_surgery(c, plane, canonical_polygon(10, vec(*base), bound), sid)


def branched_cover_surgery(c: SurfaceComplex, plane: str, point, ray_dir, degree: int,
                           sid: Optional[str] = None) -> SurfaceComplex:
    return ComplexBuilder(c).branched_cover(sid or f"branch{len(c.surgeries)}", plane, point,
                                            ray_dir, degree).freeze()


def apply_matrix(c: SurfaceComplex, A) -> SurfaceComplex:
    """Post-compose every chart with A; stored coordinates are untouched."""
    A = mat(A)
    if det(A) <= 0:
        raise ComplexError(f"apply_matrix needs det > 0, got {det(A)}")
    planes = tuple(replace(p, chart=mat_mul(A, p.chart)) for p in c.planes)
    return replace(c, planes=planes)


def disjoint_union(parts: Sequence[Tuple[str, SurfaceComplex]]) -> ComplexBuilder:
    """Merge complexes, prefixing every plane/slit/surgery id with ``prefix/``."""
    b = ComplexBuilder(check=False)
    for prefix, c in parts:
        pre = f"{prefix}/"
        for p in c.planes:
            b.add_plane(pre + p.id, p.chart, p.half_plane)
        for s in c.slits:
            b.add_slit(replace(s, id=pre + s.id, plane=pre + s.plane))
        for g in c.gluings:
            b.gluings.append(Gluing(tuple(pre + x for x in g.slits)))
            for x in g.slits:
                b.glued[pre + x] = len(b.gluings) - 1
        for sg in c.surgeries:
            if isinstance(sg, PolygonSurgery):
                b.surgeries.append(replace(sg, id=pre + sg.id, plane=pre + sg.plane))
            else:
                b.surgeries.append(replace(sg, id=pre + sg.id, plane=pre + sg.plane,
                                           sheets=tuple(pre + x for x in sg.sheets),
                                           slits=tuple(pre + x for x in sg.slits)))
        for o in c.open_stubs:
            b.open_stubs[pre + o.slit] = OpenStub(pre + o.slit, o.partner)
        for fr in c.frontiers:
            b.frontiers.append(replace(fr, plane=pre + fr.plane))
    b.check = True
    return b


def validate(c: SurfaceComplex) -> List[Tuple[str, str]]:
    """Semantic audit; returns (path, message) violations, empty when valid."""
    out: List[Tuple[str, str]] = []
    pidx = {}
    for i, p in enumerate(c.planes):
        if p.id in pidx:
            out.append((f"planes[{i}].id", f"duplicate plane id {p.id!r}"))
        pidx[p.id] = i
        if det(p.chart) <= 0:
            out.append((f"planes[{i}].chart", "determinant must be positive"))
    sidx = {}
    by_plane: Dict[str, List[int]] = {}
    for i, s in enumerate(c.slits):
        if s.id in sidx:
            out.append((f"slits[{i}].id", f"duplicate slit id {s.id!r}"))
        sidx[s.id] = i
        if s.plane not in pidx:
            out.append((f"slits[{i}].plane", f"unknown plane {s.plane!r}"))
            continue
        by_plane.setdefault(s.plane, []).append(i)
    for pid, idxs in by_plane.items():
        for a in range(len(idxs)):
            sa = c.slits[idxs[a]]
            for b in range(a + 1, len(idxs)):
                sb = c.slits[idxs[b]]
                if features_meet(sa.base, sa.holonomy, sa.is_ray, sb.base, sb.holonomy, sb.is_ray):
                    out.append((f"slits[{idxs[b]}]", f"slit {sb.label or sb.id} overlaps {sa.label or sa.id}"))
    seen: Dict[str, int] = {}
    for i, g in enumerate(c.gluings):
        bad = False
        for j, sid in enumerate(g.slits):
            if sid not in sidx:
                out.append((f"gluings[{i}].slits[{j}]", f"unknown slit {sid!r}"))
                bad = True
            elif sid in seen:
                out.append((f"gluings[{i}].slits[{j}]", f"slit {sid} glued twice"))
                bad = True
            seen[sid] = i
        if bad:
            continue
        ss = [c.slits[sidx[x]] for x in g.slits]
        if any(s.plane not in pidx for s in ss):
            continue
        try:
            check_gluing([(c.image_holonomy(s), s.is_ray) for s in ss], [s.label or s.id for s in ss])
        except ComplexError as e:
            first = sidx[g.slits[0]]
            out.append((f"gluings[{i}] (slits[{first}].holonomy)", e.detail))
    for i, o in enumerate(c.open_stubs):
        if o.slit not in sidx:
            out.append((f"open_stubs[{i}].slit", f"unknown slit {o.slit!r}"))
        elif o.slit in seen:
            out.append((f"open_stubs[{i}].slit", f"slit {o.slit} is both glued and an open stub"))
    for i, sg in enumerate(c.surgeries):
        if sg.plane not in pidx:
            out.append((f"surgeries[{i}].plane", f"unknown plane {sg.plane!r}"))
            continue
        if isinstance(sg, PolygonSurgery):
            try:
                _check_polygon(sg.vertices, sg.id)
            except ComplexError as e:
                out.append((f"surgeries[{i}].vertices", e.detail))
                continue
            for k in by_plane.get(sg.plane, ()):
                s = c.slits[k]
                if feature_meets_polygon(s.base, s.holonomy, s.is_ray, sg.vertices):
                    out.append((f"surgeries[{i}]", f"polygon {sg.id} meets slit {s.label or s.id}"))
        else:
            if sg.degree < 2 or len(sg.sheets) != sg.degree - 1 or len(sg.slits) != sg.degree:
                out.append((f"surgeries[{i}].degree", "inconsistent branched cover data"))
            for x in sg.sheets:
                if x not in pidx:
                    out.append((f"surgeries[{i}].sheets", f"unknown sheet {x!r}"))
            if tuple(sg.slits) not in {g.slits for g in c.gluings}:
                out.append((f"surgeries[{i}].slits", "branch rays are not glued as one cycle"))
    for i, fr in enumerate(c.frontiers):
        if fr.plane not in pidx:
            out.append((f"truncation.frontiers[{i}].plane", f"unknown plane {fr.plane!r}"))
    return out
