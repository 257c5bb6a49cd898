"""Flat-geometry verification on surface complexes.

Everything runs in chart-image coordinates with exact rationals.  The
search for saddle connections walks windows: a window is a plane together
with a developed source point S, an open cone of directions and the slit
through which the cone entered.  Candidate targets are cone-point copies
inside the cone; each one is confirmed by an exact trace, so the output is
sound, and the window recursion covers every straight path, so it is
complete up to the length bound.

Directions along a seam follow a half-open rule so that each oriented
saddle connection is produced exactly once: at a slit endpoint the seam is
followed on the left of the direction of travel, and at a polygon vertex
only the outgoing side is followed.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .exact import (IDENTITY, Mat, Vec, add, cross, det, dist2_point_feature, dot, is_orthogonal,
                    is_zero, mat, mat_inv, mat_vec, neg, norm2, point_in_convex, q, rational_sqrt,
                    same_direction, scale, sub, vec)
from .surface_complex import BranchedCover, ComplexError, PolygonSurgery, SurfaceComplex

__all__ = [
    "Geometry", "Trajectory", "SaddleConnection", "ConePoint", "AutomorphismCandidate",
    "develop_ray", "saddle_connections", "audit_cone_angles", "expected_excess",
    "verify_automorphism", "induced_parabolic_map", "holonomy_spectrum", "spectrum_in_integer_horizontal",
    "candidate_to_json", "candidate_from_json", "compose_candidates", "conjugate_candidate",
]

CONE, CROSS, FRONTIER, STUB = "cone", "cross", "frontier", "stub"


# -- angular helpers -------------------------------------------------------------

def akey(d: Vec):
    """Sort key increasing with the angle of d in [0, 2pi)."""
    x, y = d
    half = 0 if (y > 0 or (y == 0 and x > 0)) else 1
    return (half, (0, Fraction(0)) if y == 0 else (1, -x / y))


def in_open_wedge(d: Vec, w: Tuple[Vec, Vec]) -> bool:
    kl, kh, kd = akey(w[0]), akey(w[1]), akey(d)
    if kl == kh:
        return kd != kl
    if kl < kh:
        return kl < kd < kh
    return kd > kl or kd < kh


def in_half_open_wedge(d: Vec, w: Tuple[Vec, Vec]) -> bool:
    """d in (lo, hi] going counter-clockwise."""
    return in_open_wedge(d, w) or (akey(d) == akey(w[1]) and akey(w[0]) != akey(w[1]))


def _cone_pieces(wedges: Sequence[Tuple[Vec, Vec]], a: Vec, b: Vec) -> List[Tuple[Vec, Vec]]:
    """Intersect open wedges with the open cone (a, b) of sweep < pi."""
    out = []
    for w in wedges:
        inside = [x for x in w if cross(a, x) > 0 and cross(x, b) > 0]
        inside.sort(key=lambda x: (Fraction(cross(a, x), 1) / (dot(a, x) if dot(a, x) else 1), ))
        pts = [a]
        # order by angle from a inside a cone of sweep < pi
        for x in inside:
            pos = len(pts)
            while pos > 1 and cross(pts[pos - 1], x) < 0:
                pos -= 1
            pts.insert(pos, x)
        pts.append(b)
        for p, r in zip(pts, pts[1:]):
            if cross(p, r) <= 0:
                continue
            if in_open_wedge(add(p, r), w):
                out.append((p, r))
    return out


def _primitive(d: Vec) -> Vec:
    m = max(abs(d[0]), abs(d[1]))
    return (d[0] / m, d[1] / m)


def sign(x) -> int:
    return (x > 0) - (x < 0)


# -- precomputed geometry ---------------------------------------------------------

@dataclass
class Feature:
    kind: str  # slit | stub | frontier | pside
    plane: str
    A: Vec
    w: Vec
    is_ray: bool
    ref: object  # slit id, (poly id, j) or frontier index
    u: Vec = (Fraction(0), Fraction(0))  # common cycle direction for slits
    to_left: Optional[Tuple[str, Vec, "Feature"]] = None  # crossing from the left of u
    to_right: Optional[Tuple[str, Vec, "Feature"]] = None

    @property
    def B(self) -> Vec:
        return add(self.A, self.w)


@dataclass
class Copy:
    plane: str
    point: Vec
    node: int
    exclude: List[Vec] = field(default_factory=list)  # along-feature directions
    wedge: Optional[Tuple[Vec, Vec]] = None  # exterior wedge of a polygon vertex
    seams: List[Tuple[Vec, object]] = field(default_factory=list)  # (holonomy, seam id)


class Geometry:
    """Image-coordinate features and cone-point copies of a complex."""

    def __init__(self, c: SurfaceComplex):
        self.c = c
        self.features: Dict[str, List[Feature]] = {p.id: [] for p in c.planes}
        self.copies: Dict[str, Dict[Vec, Copy]] = {p.id: {} for p in c.planes}
        self._parent: List[int] = []
        self.node_boundary: Set[int] = set()
        self.node_units: Dict[int, Fraction] = {}
        self.slit_feature: Dict[str, Feature] = {}
        self._build()

    # union-find over copies
    def _node(self, pid: str, p: Vec) -> Copy:
        cp = self.copies[pid].get(p)
        if cp is None:
            cp = Copy(pid, p, len(self._parent))
            self._parent.append(cp.node)
            self.copies[pid][p] = cp
        return cp

    def find(self, x: int) -> int:
        while self._parent[x] != x:
            self._parent[x] = self._parent[self._parent[x]]
            x = self._parent[x]
        return x

    def _union(self, a: Copy, b: Copy) -> None:
        ra, rb = self.find(a.node), self.find(b.node)
        if ra != rb:
            self._parent[max(ra, rb)] = min(ra, rb)

    def _build(self) -> None:
        c = self.c
        img = lambda pid, p: mat_vec(c.plane(pid).chart, p)
        for s in c.active_slits():
            A, w = img(s.plane, s.base), mat_vec(c.plane(s.plane).chart, s.holonomy)
            kind = "stub" if s.id in c.stub_of else "slit"
            f = Feature(kind, s.plane, A, w, s.is_ray, s.id)
            self.features[s.plane].append(f)
            self.slit_feature[s.id] = f
            first = self._node(s.plane, A)
            first.exclude.append(w)
            if not s.is_ray:
                last = self._node(s.plane, f.B)
                last.exclude.append(neg(w))
            if kind == "stub":
                self.node_boundary.add(first.node)
                if not s.is_ray:
                    self.node_boundary.add(last.node)
        for g in c.gluings:
            fs = [self.slit_feature[x] for x in g.slits]
            u = fs[0].w
            k = len(fs)
            starts = []
            for f in fs:
                f.u = u
                fwd = same_direction(f.w, u)
                starts.append(f.A if fwd else f.B)
            for i, f in enumerate(fs):
                nxt, prv = fs[(i + 1) % k], fs[(i - 1) % k]
                f.to_left = (nxt.plane, sub(starts[(i + 1) % k], starts[i]), nxt)
                f.to_right = (prv.plane, sub(starts[(i - 1) % k], starts[i]), prv)
                self._union(self._node(f.plane, f.A), self._node(nxt.plane, add(f.A, f.to_left[1])))
                if not f.is_ray:
                    self._union(self._node(f.plane, f.B), self._node(nxt.plane, add(f.B, f.to_left[1])))
            # seams: oriented along the slit, travelling on the left of the direction of travel
            if not fs[0].is_ray:
                for i, f in enumerate(fs):
                    fwd = same_direction(f.w, u)
                    start, end = (f.A, f.B) if fwd else (f.B, f.A)
                    hol = sub(end, start)  # equals u
                    left_id = frozenset({("L", f.ref), ("R", fs[(i + 1) % k].ref)})
                    right_id = frozenset({("R", f.ref), ("L", fs[(i - 1) % k].ref)})
                    self.copies[f.plane][start].seams.append((hol, left_id))
                    self.copies[f.plane][end].seams.append((neg(hol), right_id))
        for s in c.active_slits():
            if s.id in c.stub_of and not s.is_ray:
                f = self.slit_feature[s.id]
                self.copies[s.plane][f.A].seams.append((f.w, frozenset({("L", s.id)})))
                self.copies[s.plane][f.B].seams.append((neg(f.w), frozenset({("R", s.id)})))
        for poly in c.polygons():
            V = [img(poly.plane, v) for v in poly.vertices]
            n, m = len(V), len(V) // 2
            sides = [sub(V[(j + 1) % n], V[j]) for j in range(n)]
            feats = []
            for j in range(n):
                f = Feature("pside", poly.plane, V[j], sides[j], False, (poly.id, j))
                feats.append(f)
                self.features[poly.plane].append(f)
            for j in range(n):
                o = (j + m) % n
                tau = sub(V[(o + 1) % n], V[j])
                feats[j].to_right = (poly.plane, tau, feats[o])  # exterior is to the right of ccw sides
                cp = self._node(poly.plane, V[j])
                cp.wedge = (neg(sides[(j - 1) % n]), sides[j])
                cp.seams.append((sides[j], ("P", poly.id, j % m)))
            for j in range(n):
                o = (j + m) % n
                self._union(self._node(poly.plane, V[j]), self._node(poly.plane, V[(o + 1) % n]))
        for i, fr in enumerate(c.frontiers):
            A = img(fr.plane, fr.base)
            self.features[fr.plane].append(
                Feature("frontier", fr.plane, A, mat_vec(c.plane(fr.plane).chart, fr.direction), True, i))

    # cone classes -----------------------------------------------------------
    def classes(self) -> Dict[int, List[Copy]]:
        out: Dict[int, List[Copy]] = {}
        for pid in sorted(self.copies, key=self._plane_order):
            for p in sorted(self.copies[pid], key=lambda v: (v[0], v[1])):
                cp = self.copies[pid][p]
                out.setdefault(self.find(cp.node), []).append(cp)
        return out

    def _plane_order(self, pid: str) -> int:
        return [p.id for p in self.c.planes].index(pid)

    def is_boundary_class(self, copies: Sequence[Copy]) -> bool:
        return any(cp.node in self.node_boundary for cp in copies)


# -- cone angles -------------------------------------------------------------

@dataclass(frozen=True)
class ConePoint:
    copies: Tuple[Tuple[str, Vec], ...]
    angle: Optional[int]  # total angle / 2pi, None when the class touches an open stub
    interior: bool

    @property
    def angle_pi(self) -> Optional[int]:
        return None if self.angle is None else 2 * self.angle


_REF = (Fraction(1), Fraction(0))


def _copy_turns(cp: Copy) -> int:
    if cp.wedge is None:
        return 1
    return 1 if in_half_open_wedge(_REF, cp.wedge) else 0


def audit_cone_angles(c: SurfaceComplex, geom: Optional[Geometry] = None) -> List[ConePoint]:
    """One entry per cone point; angle counted as occurrences of a fixed direction
    among the half-open angular sectors of its copies."""
    g = geom or Geometry(c)
    out = []
    for root, copies in g.classes().items():
        boundary = g.is_boundary_class(copies)
        turns = sum(_copy_turns(cp) for cp in copies)
        out.append(ConePoint(tuple((cp.plane, cp.point) for cp in copies),
                             None if boundary else turns, not boundary))
    return out


def expected_excess(c: SurfaceComplex) -> int:
    """Sum of (angle - 2pi) / 2pi predicted from gluing and surgery counts."""
    total = 0
    for gl in c.gluings:
        k = len(gl.slits)
        ray = c.slit(gl.slits[0]).is_ray
        total += (k - 1) * (1 if ray else 2)
    for poly in c.polygons():
        total += poly.m if poly.m % 2 == 0 else poly.m - 1
    return total


# -- tracing -------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    segments: Tuple[Tuple[str, Vec, Vec], ...]
    direction: Vec
    termination: str  # cone_point | length_bound | truncation_boundary | open_stub | left_region
    end_plane: str
    end_point: Vec

    @property
    def crossings(self) -> int:
        return len(self.segments) - 1


@dataclass
class _Event:
    t: Fraction
    kind: str
    feature: Optional[Feature]
    point: Vec


def _first_event(feats: Sequence[Feature], p: Vec, v: Vec, skip: Optional[Feature] = None) -> Optional[_Event]:
    best: Optional[_Event] = None

    def offer(t, kind, f, pt):
        nonlocal best
        if best is None or t < best.t or (t == best.t and kind == CONE and best.kind != CONE):
            best = _Event(t, kind, f, pt)

    for f in feats:
        if f is skip:
            continue
        A, w = f.A, f.w
        ap = sub(A, p)
        dn = cross(v, w)
        if dn != 0:
            t = cross(ap, w) / dn
            if t <= 0 or (best is not None and t > best.t):
                continue
            s = cross(ap, v) / dn
            if s < 0 or (not f.is_ray and s > 1):
                continue
            pt = add(p, scale(t, v))
            if s == 0 or (not f.is_ray and s == 1):
                offer(t, FRONTIER if f.kind == "frontier" else CONE, f, pt)
            else:
                offer(t, {"frontier": FRONTIER, "stub": STUB}.get(f.kind, CROSS), f, pt)
        elif cross(ap, v) == 0:
            vv = norm2(v)
            t0 = dot(ap, v) / vv
            t1 = dot(add(ap, w), v) / vv
            if f.is_ray:
                lo, hi = (t0, None) if t1 > t0 else (None, t0)
            else:
                lo, hi = min(t0, t1), max(t0, t1)
            if lo is not None and lo > 0:
                t = lo
            elif hi is None or hi > 0:
                t = hi if (lo is not None and lo <= 0 and hi is not None) else None
                if t is None:
                    # running along a ray from its base or from behind: treat base as the hit
                    t = lo if lo is not None and lo > 0 else None
                if t is None:
                    continue
            else:
                continue
            pt = add(p, scale(t, v))
            offer(t, FRONTIER if f.kind == "frontier" else CONE, f, pt)
    return best


def _trace(g: Geometry, plane: str, p: Vec, v: Vec, t_max: Optional[Fraction], len2_max: Optional[Fraction],
           region: Optional[Set[str]] = None, max_steps: int = 100000) -> Trajectory:
    """Straight-line flow; stops within parameter t_max (or squared length len2_max)."""
    segs = []
    used = Fraction(0)
    vv = norm2(v)
    skip = None
    for _ in range(max_steps):
        ev = _first_event(g.features[plane], p, v, skip)
        limit_hit = False
        if ev is not None:
            tot = used + ev.t
            if t_max is not None and tot > t_max:
                limit_hit = True
            if len2_max is not None and tot * tot * vv > len2_max:
                limit_hit = True
        if ev is None or limit_hit:
            if t_max is not None:
                T = t_max
            elif len2_max is not None:
                T = _param_for_length(len2_max, vv)
            else:
                raise ComplexError("unbounded trace escapes to infinity")
            end = add(p, scale(T - used, v))
            segs.append((plane, p, end))
            return Trajectory(tuple(segs), v, "length_bound", plane, end)
        segs.append((plane, p, ev.point))
        used += ev.t
        if ev.kind == CONE:
            return Trajectory(tuple(segs), v, "cone_point", plane, ev.point)
        if ev.kind == FRONTIER:
            return Trajectory(tuple(segs), v, "truncation_boundary", plane, ev.point)
        if ev.kind == STUB:
            return Trajectory(tuple(segs), v, "open_stub", plane, ev.point)
        f = ev.feature
        if f.kind == "pside":
            nxt = f.to_right
        else:
            nxt = f.to_left if cross(f.u, sub(p, f.A)) > 0 else f.to_right
        plane2, tau, f2 = nxt
        if region is not None and plane2 not in region:
            return Trajectory(tuple(segs), v, "left_region", plane, ev.point)
        plane, p, skip = plane2, add(ev.point, tau), f2
    raise ComplexError("trace did not terminate")


def _param_for_length(len2: Fraction, vv: Fraction) -> Fraction:
    r = rational_sqrt(len2 / vv)
    if r is not None:
        return r
    # irrational: largest dyadic parameter not exceeding the bound (terminal sample only)
    x = len2 / vv
    k = 2 ** 32
    return Fraction(math.isqrt(x.numerator * k * k // x.denominator), k)


def _locate(g: Geometry, plane: str, p: Vec) -> Optional[str]:
    if p in g.copies[plane]:
        return "cone point"
    for f in g.features[plane]:
        if dist2_point_feature(p, f.A, f.w, f.is_ray) == 0:
            return "frontier" if f.kind == "frontier" else "slit"
    for poly in g.c.polygons():
        if poly.plane == plane:
            V = [g.c.image_point(plane, x) for x in poly.vertices]
            if point_in_convex(p, V, strict=True):
                return "removed polygon interior"
    return None


def develop_ray(c: SurfaceComplex, plane: str, start, direction, max_length,
                geom: Optional[Geometry] = None) -> Trajectory:
    """Trace the straight ray from ``start`` (image coordinates of ``plane``).

    Stops at a cone point, after ``max_length``, on the truncation frontier or
    inside an open stub.  When |direction| is irrational a length-bound end
    point is the largest dyadic sample (denominator 2^32) not exceeding it.
    """
    g = geom or Geometry(c)
    c.plane(plane)
    p, v = vec(*start), vec(*direction)
    L = q(max_length)
    if is_zero(v):
        raise ComplexError("direction must be nonzero")
    if L <= 0:
        raise ComplexError("max_length must be positive")
    where = _locate(g, plane, p)
    if where is not None:
        raise ComplexError(f"start point ({p[0]}, {p[1]}) lies on a {where}")
    return _trace(g, plane, p, v, None, L * L)


# -- saddle connections ------------------------------------------------------------

@dataclass(frozen=True)
class SaddleConnection:
    holonomy: Vec  # canonical orientation: x > 0, or x == 0 and y > 0
    length2: Fraction
    start: Tuple[str, Vec]
    end: Tuple[str, Vec]
    trajectory: Trajectory
    seam: bool

    @property
    def length(self) -> float:
        return math.sqrt(self.length2)


@dataclass
class SaddleReport:
    connections: List[SaddleConnection]
    indeterminate: List[dict]

    def __iter__(self):
        return iter(self.connections)

    def __len__(self):
        return len(self.connections)


def _canonical(h: Vec) -> bool:
    return h[0] > 0 or (h[0] == 0 and h[1] > 0)


def saddle_connections(c: SurfaceComplex, length_bound, region: Optional[Iterable[str]] = None,
                       geom: Optional[Geometry] = None, max_depth: int = 500,
                       skip_starts: Optional[Set[Tuple[str, Vec]]] = None) -> SaddleReport:
    """All saddle connections of length <= bound starting and staying in ``region``.

    Connections are reported once each (unoriented) with canonical holonomy.
    Windows that reach the truncation frontier or an open stub are listed in
    ``indeterminate``.  Cone-point copies in ``skip_starts`` are not used as
    starting points (connections ending there are still found from the
    other end).
    """
    g = geom or Geometry(c)
    B = q(length_bound)
    if B <= 0:
        raise ComplexError("length bound must be positive")
    B2 = B * B
    planes = [p.id for p in c.planes]
    reg = set(planes) if region is None else set(region)
    unknown = reg - set(planes)
    if unknown:
        raise ComplexError(f"unknown planes in region: {sorted(unknown)}")
    found: Dict[object, SaddleConnection] = {}
    indet: List[dict] = []
    for pid in planes:
        if pid not in reg:
            continue
        for pt in sorted(g.copies[pid], key=lambda v: (v[0], v[1])):
            if skip_starts and (pid, pt) in skip_starts:
                continue
            cp = g.copies[pid][pt]
            _seams_from(g, cp, B2, found)
            _generic_from(g, cp, B2, reg, found, indet, max_depth)
    conns = sorted(found.values(), key=lambda s: (s.length2, s.holonomy, s.start[0], s.start[1]))
    return SaddleReport(conns, indet)


def _seams_from(g: Geometry, cp: Copy, B2: Fraction, found: Dict) -> None:
    for hol, sid in cp.seams:
        if norm2(hol) > B2:
            continue
        key = ("seam", sid)
        end = add(cp.point, hol)
        tr = Trajectory(((cp.plane, cp.point, end),), hol, "cone_point", cp.plane, end)
        _record(found, key, hol, cp.plane, cp.point, cp.plane, end, tr, True)


def _record(found, key, hol, p0, a, p1, b, tr, seam):
    if key in found:
        return
    if not _canonical(hol):
        hol = neg(hol)
    found[key] = SaddleConnection(hol, norm2(hol), (p0, a), (p1, b), tr, seam)


def _initial_wedges(cp: Copy) -> List[Tuple[Vec, Vec]]:
    if cp.wedge is not None:
        return [cp.wedge]
    ex = sorted({akey(d): d for d in cp.exclude}.items())
    dirs = [d for _, d in ex]
    if not dirs:
        r = _REF
        return [(r, r), ]  # open circle minus the reference; reference handled separately
    if len(dirs) == 1:
        return [(dirs[0], dirs[0])]
    return [(dirs[i], dirs[(i + 1) % len(dirs)]) for i in range(len(dirs))]


def _clip_beyond(f: Feature, S: Vec, entry: Optional[Feature]):
    """Portion of f strictly beyond the entry line, as (A', w', is_ray) or None."""
    if entry is None:
        return f.A, f.w, f.is_ray
    sS = sign(cross(entry.w, sub(S, entry.A)))
    g0 = cross(entry.w, sub(f.A, entry.A))
    g1 = cross(entry.w, f.w)
    want = -sS
    if g1 == 0:
        return (f.A, f.w, f.is_ray) if sign(g0) == want else None
    root = -g0 / g1
    # sign(g0 + t g1) == want  <=>  t on one side of root
    if sign(g1) == want:
        lo, hi = max(root, Fraction(0)), (None if f.is_ray else Fraction(1))
    else:
        lo, hi = Fraction(0), (root if f.is_ray else min(root, Fraction(1)))
    if hi is not None and hi <= lo:
        return None
    A2 = add(f.A, scale(lo, f.w))
    if hi is None:
        return A2, f.w, True
    return A2, scale(hi - lo, f.w), False


def _generic_from(g: Geometry, cp: Copy, B2: Fraction, reg: Set[str], found: Dict, indet: List[dict],
                  max_depth: int) -> None:
    q0 = cp.point
    wedges0 = _initial_wedges(cp)
    free_ref = cp.wedge is None and not cp.exclude
    tried: Dict[Vec, bool] = {}
    stack = [(cp.plane, q0, wedges0, None, 0)]
    while stack:
        plane, S, wedges, entry, depth = stack.pop()
        if depth > max_depth:
            indet.append({"start": [cp.plane, list(q0)], "reason": "depth limit"})
            continue
        for pt, other in g.copies[plane].items():
            d = sub(pt, S)
            if is_zero(d) or norm2(d) > B2:
                continue
            if not any(in_open_wedge(d, w) for w in wedges) and not (free_ref and depth == 0 and same_direction(d, _REF)):
                continue
            if entry is not None:
                if sign(cross(entry.w, sub(pt, entry.A))) != -sign(cross(entry.w, sub(S, entry.A))):
                    continue
            key_d = _primitive(d)
            if (key_d, pt, plane) in tried:
                continue
            tried[(key_d, pt, plane)] = True
            tr = _trace(g, cp.plane, q0, d, Fraction(1), None, region=reg)
            if tr.termination == "cone_point" and tr.end_plane == plane and tr.end_point == pt \
                    and sum(_seg_param(s, d) for s in tr.segments) == 1:
                key = frozenset({(cp.plane, q0, d), (plane, pt, neg(d))})
                _record(found, key, d, cp.plane, q0, plane, pt, tr, False)
            elif tr.termination in ("truncation_boundary", "open_stub"):
                indet.append({"start": [cp.plane, [str(x) for x in q0]], "direction": [str(x) for x in d],
                              "reason": tr.termination})
        for f in g.features[plane]:
            if entry is not None and f is entry:
                continue
            clip = _clip_beyond(f, S, entry)
            if clip is None:
                continue
            A, w, is_ray = clip
            if cross(w, sub(A, S)) == 0:
                continue
            if dist2_point_feature(S, A, w, is_ray) > B2:
                continue
            a = sub(A, S)
            b = w if is_ray else sub(add(A, w), S)
            if cross(a, b) < 0:
                a, b = b, a
            pieces = _cone_pieces(wedges, a, b)
            if not pieces:
                continue
            if f.kind in ("frontier", "stub"):
                indet.append({"start": [cp.plane, [str(x) for x in q0]], "reason": f.kind,
                              "feature": str(f.ref), "plane": plane})
                continue
            if f.kind == "pside":
                if cross(f.w, sub(S, f.A)) >= 0:
                    continue
                nxt = f.to_right
            else:
                nxt = f.to_left if cross(f.u, sub(S, f.A)) > 0 else f.to_right
            plane2, tau, f2 = nxt
            if plane2 not in reg:
                continue
            stack.append((plane2, add(S, tau), pieces, f2, depth + 1))


def _seg_param(seg, d: Vec) -> Fraction:
    _, a, b = seg
    diff = sub(b, a)
    return dot(diff, d) / norm2(d)


def holonomy_spectrum(c: SurfaceComplex, bound, region: Optional[Iterable[str]] = None,
                      geom: Optional[Geometry] = None) -> Counter:
    rep = saddle_connections(c, bound, region, geom)
    return Counter(s.holonomy for s in rep.connections)


def spectrum_in_integer_horizontal(spec: Iterable[Vec]) -> bool:
    return all(h[1] == 0 and h[0].denominator == 1 for h in spec)


# -- automorphisms -------------------------------------------------------------

@dataclass(frozen=True)
class AutomorphismCandidate:
    """z -> A z + offsets[p] from plane p (image coordinates) to plane plane_map[p]."""

    plane_map: Tuple[Tuple[str, str], ...]
    A: Mat = IDENTITY
    offsets: Tuple[Tuple[str, Vec], ...] = ()
    name: str = ""

    @classmethod
    def make(cls, plane_map: Dict[str, str], A=IDENTITY, offsets: Optional[Dict[str, Vec]] = None,
             name: str = "") -> "AutomorphismCandidate":
        return cls(tuple(plane_map.items()), mat(A), tuple(sorted((offsets or {}).items())), name)

    @property
    def mapping(self) -> Dict[str, str]:
        return dict(self.plane_map)

    def offset(self, pid: str) -> Vec:
        return dict(self.offsets).get(pid, (Fraction(0), Fraction(0)))


def candidate_to_json(cand: AutomorphismCandidate) -> dict:
    a = cand.A
    return {"name": cand.name, "derivative": [[str(a[0]), str(a[1])], [str(a[2]), str(a[3])]],
            "plane_map": [[x, y] for x, y in cand.plane_map],
            "offsets": [[p, [str(v[0]), str(v[1])]] for p, v in cand.offsets]}


def candidate_from_json(d: dict) -> AutomorphismCandidate:
    return AutomorphismCandidate(tuple((x, y) for x, y in d["plane_map"]), mat(d["derivative"]),
                                 tuple((p, vec(*v)) for p, v in d.get("offsets", [])), d.get("name", ""))


def compose_candidates(f: AutomorphismCandidate, g: AutomorphismCandidate) -> AutomorphismCandidate:
    """f after g, where both are defined."""
    from .exact import mat_mul
    fm, gm = f.mapping, g.mapping
    pm, off = {}, {}
    for p, q2 in gm.items():
        if q2 in fm:
            pm[p] = fm[q2]
            off[p] = add(mat_vec(f.A, g.offset(p)), f.offset(q2))
    return AutomorphismCandidate.make(pm, mat_mul(f.A, g.A), {k: v for k, v in off.items() if not is_zero(v)},
                                      f"{f.name}*{g.name}")


def conjugate_candidate(cand: AutomorphismCandidate, M) -> AutomorphismCandidate:
    """The candidate acting on apply_matrix(c, M): derivative M A M^-1, offsets M b."""
    from .exact import mat_mul
    M = mat(M)
    return AutomorphismCandidate(cand.plane_map, mat_mul(mat_mul(M, cand.A), mat_inv(M)),
                                 tuple((p, mat_vec(M, v)) for p, v in cand.offsets), cand.name)


def _seg_key(A: Vec, w: Vec, is_ray: bool):
    if is_ray:
        return ("ray", A, _primitive(w))
    B = add(A, w)
    return ("seg", frozenset({A, B}))


def verify_automorphism(c: SurfaceComplex, cand: AutomorphismCandidate,
                        geom: Optional[Geometry] = None) -> dict:
    """Check that cand maps features onto features and gluings onto gluings.

    Returns {"valid": bool, "kind", "derivative", "violations", "indeterminate"}.
    ``valid`` means no violation on the truncation interior; items whose
    status depends on unknown territory are listed as indeterminate.
    """
    g = geom or Geometry(c)
    A = cand.A
    viol: List[str] = []
    indet: List[str] = []
    pm = cand.mapping
    if det(A) <= 0:
        viol.append("derivative must have positive determinant")
    targets = list(pm.values())
    if len(set(targets)) != len(targets):
        viol.append("plane map is not injective")
    for p, q2 in pm.items():
        if p not in c.plane_index:
            viol.append(f"plane map uses unknown plane {p}")
        if q2 not in c.plane_index:
            viol.append(f"plane map targets unknown plane {q2}")
    if viol:
        return _report(False, A, viol, indet)
    inv = {v: k for k, v in pm.items()}
    Ainv = mat_inv(A)

    def fmap(p, z):
        return add(mat_vec(A, z), cand.offset(p))

    def finv(q2, z):
        p = inv[q2]
        return p, mat_vec(Ainv, sub(z, cand.offset(p)))

    index: Dict[str, Dict[object, Feature]] = {}
    for pid, feats in g.features.items():
        index[pid] = {}
        for f in feats:
            if f.kind in ("slit", "stub", "frontier"):
                index[pid][_seg_key(f.A, f.w, f.is_ray)] = f
    frontiers = {pid: [f for f in g.features[pid] if f.kind == "frontier"] for pid in g.features}

    def near_frontier(pid, A2, w2, is_ray):
        from .exact import features_meet
        return any(features_meet(A2, w2, is_ray, fr.A, fr.w, True) for fr in frontiers[pid])

    image_of: Dict[str, str] = {}
    # (i) slits forward and backward
    for p, q2 in pm.items():
        for f in g.features[p]:
            if f.kind not in ("slit", "stub"):
                continue
            A2, w2 = fmap(p, f.A), mat_vec(A, f.w)
            hit = index[q2].get(_seg_key(A2, w2, f.is_ray))
            name = c.slit(f.ref).label or f.ref
            if hit is None or hit.kind == "frontier":
                if hit is not None or near_frontier(q2, A2, w2, f.is_ray):
                    indet.append(f"slit {name} on {p} maps into the truncation frontier of {q2}")
                else:
                    viol.append(f"slit {name} on {p} maps to empty space on {q2}")
                continue
            image_of[f.ref] = hit.ref
        for f in g.features[q2]:
            if f.kind not in ("slit", "stub"):
                continue
            _, A0 = finv(q2, f.A)
            w0 = mat_vec(Ainv, f.w)
            hit = index[p].get(_seg_key(A0, w0, f.is_ray))
            if hit is None:
                name = c.slit(f.ref).label or f.ref
                if near_frontier(p, A0, w0, f.is_ray):
                    indet.append(f"slit {name} on {q2} has preimage in the truncation frontier of {p}")
                else:
                    viol.append(f"slit {name} on {q2} has no preimage slit on {p}")
    # (ii) gluings
    for gl in c.gluings:
        ids = gl.slits
        inside = [x for x in ids if c.slit(x).plane in pm]
        if not inside:
            continue
        if len(inside) < len(ids):
            indet.append(f"gluing {'/'.join(ids)} leaves the candidate's domain")
            continue
        if any(x not in image_of for x in ids):
            continue
        imgs = [image_of[x] for x in ids]
        tgt = c.gluing_of.get(imgs[0])
        if tgt is None:
            if imgs[0] in c.stub_of:
                indet.append(f"gluing {'/'.join(ids)} maps onto open stub {imgs[0]}")
            else:
                viol.append(f"gluing {'/'.join(ids)} maps onto unglued slit {imgs[0]}")
            continue
        if not _same_cycle(tgt.slits, imgs):
            viol.append(f"gluing {'/'.join(ids)} is not sent to a gluing (image {'/'.join(imgs)})")
    for sid in c.stub_of:
        if c.slit(sid).plane in pm and sid in image_of and image_of[sid] in c.gluing_of:
            indet.append(f"open stub {sid} maps onto a glued slit")
    # (iii) surgeries
    polys: Dict[str, Set[frozenset]] = {}
    for poly in c.polygons():
        polys.setdefault(poly.plane, set()).add(
            frozenset(c.image_point(poly.plane, v) for v in poly.vertices))
    for poly in c.polygons():
        if poly.plane not in pm:
            continue
        q2 = pm[poly.plane]
        im = frozenset(fmap(poly.plane, c.image_point(poly.plane, v)) for v in poly.vertices)
        if im not in polys.get(q2, set()):
            viol.append(f"polygon {poly.id} is not sent to a polygon surgery of {q2}")
    for q2, sets in polys.items():
        if q2 in inv:
            p = inv[q2]
            for vs in sets:
                pre = frozenset(finv(q2, z)[1] for z in vs)
                if pre not in polys.get(p, set()):
                    viol.append(f"polygon surgery on {q2} has no preimage on {p}")
    br = {(b.plane, c.image_point(b.plane, b.point), _primitive(mat_vec(c.plane(b.plane).chart, b.direction)),
           b.degree) for b in c.branched()}
    for b in c.branched():
        if b.plane not in pm:
            continue
        pt = fmap(b.plane, c.image_point(b.plane, b.point))
        dr = _primitive(mat_vec(A, mat_vec(c.plane(b.plane).chart, b.direction)))
        if (pm[b.plane], pt, dr, b.degree) not in br:
            viol.append(f"branched cover {b.id} is not sent to a branched cover of the same degree")
    # (iv) frontiers
    for p, q2 in pm.items():
        for f in frontiers[p]:
            key = _seg_key(fmap(p, f.A), mat_vec(A, f.w), True)
            hit = index[q2].get(key)
            if hit is None or hit.kind != "frontier":
                indet.append(f"truncation frontier of {p} is not sent to the frontier of {q2}")
    return _report(not viol, A, viol, indet)


def _same_cycle(cyc: Sequence[str], imgs: Sequence[str]) -> bool:
    if len(cyc) != len(imgs) or set(cyc) != set(imgs):
        return False
    if len(cyc) <= 2:
        return True
    i = list(cyc).index(imgs[0])
    return all(cyc[(i + k) % len(cyc)] == imgs[k] for k in range(len(imgs)))


def _report(valid: bool, A: Mat, viol: List[str], indet: List[str]) -> dict:
    if A == IDENTITY:
        kind = "translation"
    elif is_orthogonal(A):
        kind = "isometry"
    else:
        kind = "affine"
    return {"valid": valid, "kind": kind,
            "derivative": [[str(A[0]), str(A[1])], [str(A[2]), str(A[3])]],
            "derivative_matrix": A,
            "violations": viol, "indeterminate": indet}


def induced_parabolic_map(c: SurfaceComplex, A) -> AutomorphismCandidate:
    """Per-plane linear map z -> A z for A = [[1, s], [0, t]], t > 0."""
    A = mat(A)
    if not (A[0] == 1 and A[2] == 0 and A[3] > 0):
        raise ComplexError(f"matrix {[[str(A[0]), str(A[1])], [str(A[2]), str(A[3])]]} is not of the form [[1,s],[0,t]] with t>0")
    return AutomorphismCandidate.make({p.id: p.id for p in c.planes}, A, {}, "f_A")
