"""Exact rational plane geometry: vectors, 2x2 matrices, closed-feature intersection."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

Vec = Tuple[Fraction, Fraction]
Mat = Tuple[Fraction, Fraction, Fraction, Fraction]  # row-major (a, b, c, d)

IDENTITY: Mat = (Fraction(1), Fraction(0), Fraction(0), Fraction(1))


def q(x) -> Fraction:
    """Coerce int / Fraction / 'p/q' text to Fraction; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"exact rational expected, got {type(x).__name__}")


def vec(x, y) -> Vec:
    return (q(x), q(y))


def mat(a, b=None, c=None, d=None) -> Mat:
    if b is None:
        rows = a
        if len(rows) == 4:
            return tuple(q(v) for v in rows)  # type: ignore[return-value]
        (a, b), (c, d) = rows
    return (q(a), q(b), q(c), q(d))


def add(u: Vec, v: Vec) -> Vec:
    return (u[0] + v[0], u[1] + v[1])


def sub(u: Vec, v: Vec) -> Vec:
    return (u[0] - v[0], u[1] - v[1])


def neg(u: Vec) -> Vec:
    return (-u[0], -u[1])


def scale(k, u: Vec) -> Vec:
    return (k * u[0], k * u[1])


def dot(u: Vec, v: Vec) -> Fraction:
    return u[0] * v[0] + u[1] * v[1]


def cross(u: Vec, v: Vec) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def norm2(u: Vec) -> Fraction:
    return u[0] * u[0] + u[1] * u[1]


def rot90(u: Vec) -> Vec:
    return (-u[1], u[0])


def is_zero(u: Vec) -> bool:
    return u[0] == 0 and u[1] == 0


def same_direction(u: Vec, v: Vec) -> bool:
    return cross(u, v) == 0 and dot(u, v) > 0


def mat_vec(m: Mat, u: Vec) -> Vec:
    return (m[0] * u[0] + m[1] * u[1], m[2] * u[0] + m[3] * u[1])


def mat_mul(m: Mat, n: Mat) -> Mat:
    return (m[0] * n[0] + m[1] * n[2], m[0] * n[1] + m[1] * n[3],
            m[2] * n[0] + m[3] * n[2], m[2] * n[1] + m[3] * n[3])


def det(m: Mat) -> Fraction:
    return m[0] * m[3] - m[1] * m[2]


def mat_inv(m: Mat) -> Mat:
    dt = det(m)
    if dt == 0:
        raise ZeroDivisionError("singular matrix")
    return (m[3] / dt, -m[1] / dt, -m[2] / dt, m[0] / dt)


def transpose(m: Mat) -> Mat:
    return (m[0], m[2], m[1], m[3])


def is_orthogonal(m: Mat) -> bool:
    return mat_mul(transpose(m), m) == IDENTITY


def mat_rows(m: Mat):
    return ((m[0], m[1]), (m[2], m[3]))


def rational_sqrt(x: Fraction) -> Optional[Fraction]:
    """Exact square root when x is the square of a rational, else None."""
    if x < 0:
        return None
    from math import isqrt
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


# -- closed features: segment (A, w, ray=False) is A + [0,1] w; ray is A + [0,inf) w

def _param_range(is_ray: bool):
    return (Fraction(0), None if is_ray else Fraction(1))


def _in_range(t: Fraction, is_ray: bool) -> bool:
    return t >= 0 and (is_ray or t <= 1)


def features_meet(a: Vec, w: Vec, a_ray: bool, b: Vec, v: Vec, b_ray: bool) -> bool:
    """Do the closed sets a + I w and b + J v intersect?"""
    d = cross(w, v)
    ba = sub(b, a)
    if d != 0:
        t = cross(ba, v) / d
        s = cross(ba, w) / d
        return _in_range(t, a_ray) and _in_range(s, b_ray)
    if cross(ba, w) != 0:
        return False
    # collinear: compare parameter intervals along w
    ww = norm2(w)
    t0 = dot(ba, w) / ww
    t1 = dot(add(ba, v), w) / ww
    if b_ray:
        lo, hi = (t0, None) if t1 > t0 else (None, t0)
    else:
        lo, hi = min(t0, t1), max(t0, t1)
    alo, ahi = _param_range(a_ray)
    if hi is not None and hi < alo:
        return False
    if ahi is not None and lo is not None and lo > ahi:
        return False
    return True


def point_in_convex(p: Vec, verts: Sequence[Vec], strict: bool = False) -> bool:
    """Point in a ccw convex polygon (closed unless strict)."""
    n = len(verts)
    for i in range(n):
        c = cross(sub(verts[(i + 1) % n], verts[i]), sub(p, verts[i]))
        if c < 0 or (strict and c == 0):
            return False
    return True


def feature_meets_polygon(a: Vec, w: Vec, is_ray: bool, verts: Sequence[Vec]) -> bool:
    if point_in_convex(a, verts):
        return True
    n = len(verts)
    return any(features_meet(a, w, is_ray, verts[i], sub(verts[(i + 1) % n], verts[i]), False)
               for i in range(n))


def polygons_meet(p: Sequence[Vec], r: Sequence[Vec]) -> bool:
    n = len(p)
    return any(feature_meets_polygon(p[i], sub(p[(i + 1) % n], p[i]), False, r) for i in range(n)) \
        or point_in_convex(r[0], p)


def dist2_point_feature(p: Vec, a: Vec, w: Vec, is_ray: bool) -> Fraction:
    t = dot(sub(p, a), w) / norm2(w)
    if t < 0:
        t = Fraction(0)
    elif not is_ray and t > 1:
        t = Fraction(1)
    return norm2(sub(p, add(a, scale(t, w))))


def dist2_features_lower(a: Vec, w: Vec, a_ray: bool, b: Vec, v: Vec, b_ray: bool) -> Fraction:
    """Exact squared distance between two closed features (segments or rays)."""
    if features_meet(a, w, a_ray, b, v, b_ray):
        return Fraction(0)
    cands = [dist2_point_feature(a, b, v, b_ray), dist2_point_feature(b, a, w, a_ray)]
    if not a_ray:
        cands.append(dist2_point_feature(add(a, w), b, v, b_ray))
    if not b_ray:
        cands.append(dist2_point_feature(add(b, v), a, w, a_ray))
    return min(cands)


def fmt_q(x: Fraction) -> str:
    return str(x)


def fmt_vec(u: Iterable[Fraction]) -> str:
    return "(" + ", ".join(str(x) for x in u) + ")"
