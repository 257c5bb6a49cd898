"""JSON round trip for surface complexes (schema ``slitsurf.complex/1``)."""
from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from typing import Any, List, Tuple

import jsonschema

from .exact import Mat, Vec, mat_rows
from .surface_complex import (BranchedCover, ComplexError, Frontier, Gluing, OpenStub, Plane,
                              PolygonSurgery, Slit, SurfaceComplex, validate)

SCHEMA_ID = "slitsurf.complex/1"

__all__ = ["serialize", "deserialize", "to_jsonable", "from_jsonable", "load_schema", "SchemaError",
           "dumps", "qstr", "vstr", "mstr", "parse_q"]


class SchemaError(ComplexError):
    """Structural problem with a complex document."""


def load_schema() -> dict:
    text = resources.files("slitsurf").joinpath("schema/complex-v1.schema.json").read_text("utf-8")
    return json.loads(text)


def qstr(x: Fraction) -> str:
    return str(x)


def vstr(v: Vec) -> List[str]:
    return [str(v[0]), str(v[1])]


def mstr(m: Mat) -> List[List[str]]:
    return [[str(x) for x in row] for row in mat_rows(m)]


def parse_q(text: str, path: str) -> Fraction:
    try:
        if not isinstance(text, str):
            raise ValueError
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"not an exact rational: {text!r}", path) from None


def _v(x: Any, path: str) -> Vec:
    return (parse_q(x[0], f"{path}[0]"), parse_q(x[1], f"{path}[1]"))


def _m(x: Any, path: str) -> Mat:
    return (parse_q(x[0][0], f"{path}[0][0]"), parse_q(x[0][1], f"{path}[0][1]"),
            parse_q(x[1][0], f"{path}[1][0]"), parse_q(x[1][1], f"{path}[1][1]"))


def to_jsonable(c: SurfaceComplex) -> dict:
    surgeries = []
    for sg in c.surgeries:
        if isinstance(sg, PolygonSurgery):
            surgeries.append({"kind": "polygon", "id": sg.id, "plane": sg.plane,
                              "vertices": [vstr(v) for v in sg.vertices]})
        else:
            surgeries.append({"kind": "branched_cover", "id": sg.id, "plane": sg.plane,
                              "point": vstr(sg.point), "direction": vstr(sg.direction),
                              "degree": sg.degree, "sheets": list(sg.sheets), "slits": list(sg.slits)})
    trunc = dict(c.meta)
    trunc["frontiers"] = [{"plane": f.plane, "base": vstr(f.base), "direction": vstr(f.direction)}
                          for f in c.frontiers]
    return {
        "schema": SCHEMA_ID,
        "planes": [{"id": p.id, "chart": mstr(p.chart), "half_plane": p.half_plane} for p in c.planes],
        "slits": [{"id": s.id, "plane": s.plane, "base": vstr(s.base), "holonomy": vstr(s.holonomy),
                   "kind": s.kind, "label": s.label} for s in c.slits],
        "gluings": [{"slits": list(g.slits)} for g in c.gluings],
        "surgeries": surgeries,
        "open_stubs": [{"slit": o.slit, "partner": o.partner} for o in c.open_stubs],
        "truncation": trunc,
    }


def dumps(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def serialize(c: SurfaceComplex) -> str:
    return dumps(to_jsonable(c))


def _schema_errors(doc: Any) -> List[Tuple[str, str]]:
    validator = jsonschema.Draft202012Validator(load_schema())
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
        out.append((path.lstrip(".") or "<root>", err.message))
    return out


def from_jsonable(doc: Any, check: bool = True) -> SurfaceComplex:
    """Build a complex from parsed JSON.

    Structural problems raise SchemaError with a path.  With ``check`` the
    semantic audit (gluing gates, disjointness) also runs and its first
    violation is raised; without it the caller can audit separately.
    """
    errs = _schema_errors(doc)
    if errs:
        path, msg = errs[0]
        raise SchemaError(msg, path)
    try:
        planes = tuple(Plane(p["id"], _m(p["chart"], f"planes[{i}].chart"), p["half_plane"])
                       for i, p in enumerate(doc["planes"]))
    except ComplexError as e:
        if isinstance(e, SchemaError):
            raise
        raise SchemaError(e.detail, "planes") from None
    slits = []
    for i, s in enumerate(doc["slits"]):
        base = _v(s["base"], f"slits[{i}].base")
        hol = _v(s["holonomy"], f"slits[{i}].holonomy")
        try:
            slits.append(Slit(s["id"], s["plane"], base, hol, s["kind"], s["label"]))
        except ComplexError as e:
            raise SchemaError(e.detail, f"slits[{i}].holonomy") from None
    surgeries = []
    for i, sg in enumerate(doc["surgeries"]):
        if sg["kind"] == "polygon":
            surgeries.append(PolygonSurgery(sg["id"], sg["plane"], tuple(
                _v(v, f"surgeries[{i}].vertices[{j}]") for j, v in enumerate(sg["vertices"]))))
        else:
            surgeries.append(BranchedCover(sg["id"], sg["plane"], _v(sg["point"], f"surgeries[{i}].point"),
                                           _v(sg["direction"], f"surgeries[{i}].direction"), sg["degree"],
                                           tuple(sg["sheets"]), tuple(sg["slits"])))
    trunc = dict(doc["truncation"])
    frontiers = tuple(Frontier(f["plane"], _v(f["base"], f"truncation.frontiers[{i}].base"),
                               _v(f["direction"], f"truncation.frontiers[{i}].direction"))
                      for i, f in enumerate(trunc.pop("frontiers")))
    c = SurfaceComplex(planes, tuple(slits), tuple(Gluing(tuple(g["slits"])) for g in doc["gluings"]),
                       tuple(surgeries), tuple(OpenStub(o["slit"], o["partner"]) for o in doc["open_stubs"]),
                       frontiers, tuple(sorted(trunc.items())))
    if check:
        bad = validate(c)
        if bad:
            raise ComplexError(bad[0][1], bad[0][0])
    return c


def deserialize(text: str, check: bool = True) -> SurfaceComplex:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})", "<root>") from None
    return from_jsonable(doc, check)
