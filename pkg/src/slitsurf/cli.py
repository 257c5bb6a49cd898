"""Command-line front end.

Verbs: classify, build, verify, trace, saddles, render.  Every command is
deterministic; ``--json`` switches the report to machine-readable JSON.
Exit codes: 0 pass, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .assembly import (BuildConfig, BuildError, BuildResult, ComponentPattern, build_finite_isometry,
                       build_free_genus_zero, build_parabolic_full, build_selfsimilar_isometry,
                       build_translatable, build_veech_finite, build_veech_selfsimilar, separation_audit)
from .end_space import (DescriptorError, GenusMarking, char_system, classify_trichotomy, format_descriptor,
                        parse_descriptor, realizable_isometry_groups)
from .exact import mat, vec
from .flatgeom import (Geometry, audit_cone_angles, candidate_from_json, candidate_to_json, develop_ray,
                       expected_excess, induced_parabolic_map, saddle_connections,
                       spectrum_in_integer_horizontal, verify_automorphism)
from .groups import GroupError, load_group
from .render import RenderError, parse_window, render_svg
from .serialize import SchemaError, deserialize, dumps, serialize
from .surface_complex import ComplexError, SurfaceComplex, validate
from .tree_grafting import GraftError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

BUILDERS = ("graft", "selfsimilar-isometry", "free-genus-zero", "finite-isometry", "translatable",
            "veech-selfsimilar", "veech-finite", "veech-parabolic")
SUITES = ("cone-angles", "holonomy-spectrum", "automorphisms", "separation")
DEFAULT_PARABOLICS = ("1,1,0,1", "1,-2,0,3", "1,3/2,0,1/2")


class InputError(Exception):
    pass


# -- small parsers ---------------------------------------------------------------

def _fractions(text: str, n: int, what: str) -> List[Fraction]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise InputError(f"{what} needs {n} comma-separated rationals, got {text!r}")
    try:
        return [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{what}: cannot parse {text!r} as rationals") from None


def family_path(complex_path: str) -> Path:
    p = Path(complex_path)
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    return p.with_name(stem + ".family.json")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _load_complex(path: str, check: bool = True) -> SurfaceComplex:
    return deserialize(_read_text(path), check)


def _emit(args, report: dict, lines: Sequence[str]) -> None:
    if args.json:
        sys.stdout.write(dumps(report))
    else:
        for ln in lines:
            print(ln)


def _vstr(v) -> str:
    return f"({v[0]}, {v[1]})"


# -- classify --------------------------------------------------------------------

def cmd_classify(args) -> int:
    d = parse_descriptor(args.descriptor, GenusMarking.parse(args.genus))
    cls = classify_trichotomy(d)
    groups = realizable_isometry_groups(d)
    cs = str(char_system(d)) if d.is_countable else None
    report = {"descriptor": format_descriptor(d), "char_system": cs, "class": cls, "isometry_groups": groups}
    _emit(args, report, [f"descriptor: {format_descriptor(d)}",
                         f"characteristic system: {cs if cs else 'none (uncountable)'}",
                         f"class: {cls}", f"realizable isometry groups: {groups}"])
    return EXIT_OK


# -- build -----------------------------------------------------------------------

def _config(args) -> BuildConfig:
    base: Dict[str, object] = {}
    if args.config:
        try:
            base = json.loads(_read_text(args.config))
        except json.JSONDecodeError as e:
            raise InputError(f"config {args.config}: invalid JSON ({e.msg})") from None
        if not isinstance(base, dict):
            raise InputError(f"config {args.config}: expected a JSON object")
    flags = {"planes_limit": args.planes, "slit_index_limit": args.slits, "ball_radius": args.radius,
             "separation": args.separation, "small_diameter": args.small, "grid_rows": args.rows,
             "chain_radius": args.chain_radius, "case": args.case, "sc_bound": args.sc_bound}
    base.update({k: v for k, v in flags.items() if v is not None})
    return BuildConfig.from_json(base)


def _need(args, attr: str, builder: str):
    val = getattr(args, attr)
    if val is None:
        raise InputError(f"builder {builder} needs --{attr.replace('_', '-')}")
    return val


def _pattern(args) -> Optional[ComponentPattern]:
    if not args.pattern:
        return None
    try:
        doc = json.loads(_read_text(args.pattern))
    except json.JSONDecodeError as e:
        raise InputError(f"pattern {args.pattern}: invalid JSON ({e.msg})") from None
    return ComponentPattern.from_json(doc)


def _descriptor(args, builder: str, default_genus: str = "all"):
    if args.descriptor is None:
        raise InputError(f"builder {builder} needs an end-space descriptor")
    return parse_descriptor(args.descriptor, GenusMarking.parse(args.genus or default_genus))


def run_builder(args) -> BuildResult:
    cfg = _config(args)
    b = args.builder
    if b == "graft":
        c = build_parabolic_full(_descriptor(args, b), cfg)
        return BuildResult(c, [], [])
    if b == "veech-parabolic":
        c = build_parabolic_full(_descriptor(args, b), cfg)
        fam = []
        for text in args.parabolic or DEFAULT_PARABOLICS:
            A = mat(*_fractions(text, 4, "--parabolic"))
            cand = induced_parabolic_map(c, A)
            fam.append(cand)
        return BuildResult(c, fam, [], derivatives={f.name: f.A for f in fam})
    if b == "free-genus-zero":
        return build_free_genus_zero(_need(args, "rank", b), _descriptor(args, b, "none"), cfg)
    if b == "finite-isometry":
        return build_finite_isometry(load_group(_need(args, "group", b)), _pattern(args), cfg)
    if b == "veech-finite":
        return build_veech_finite(load_group(_need(args, "group", b)), _pattern(args), cfg)
    group = load_group(_need(args, "group", b))
    d = _descriptor(args, b)
    if b == "selfsimilar-isometry":
        return build_selfsimilar_isometry(group, d, cfg)
    if b == "translatable":
        return build_translatable(group, d, cfg)
    return build_veech_selfsimilar(group, d, cfg)


def cmd_build(args) -> int:
    res = run_builder(args)
    c = res.complex
    text = serialize(c)
    cones = [cp for cp in audit_cone_angles(c) if cp.interior]
    report = {"builder": args.builder, "counts": c.counts(), "cone_points": len(cones),
              "copies": len(res.copies), "family": len(res.family), "output": args.out}
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if res.family:
            family_path(args.out).write_text(dumps(res.family_json()), encoding="utf-8")
            report["family_file"] = str(family_path(args.out))
    else:
        sys.stdout.write(text)
        return EXIT_OK
    counts = ", ".join(f"{k} {v}" for k, v in c.counts().items())
    lines = [f"built {args.builder}: {counts}, cone points {len(cones)}",
             f"wrote {args.out}"]
    if res.family:
        lines.append(f"wrote {report['family_file']} ({len(res.family)} candidates)")
    _emit(args, report, lines)
    return EXIT_OK


# -- verify ----------------------------------------------------------------------

def _region(args, c: SurfaceComplex) -> Optional[List[str]]:
    if not args.planes:
        return None
    pl = [p for p in args.planes.split(",") if p]
    for p in pl:
        c.plane(p)
    return pl


def suite_cone_angles(c: SurfaceComplex, args) -> dict:
    cps = audit_cone_angles(c)
    interior = [cp for cp in cps if cp.interior]
    hist = Counter(cp.angle_pi for cp in interior)
    viol = [f"cone point at {cp.copies[0][0]} {_vstr(cp.copies[0][1])} has angle {cp.angle_pi}pi"
            for cp in interior if cp.angle < 2]
    report = {"interior": len(interior), "boundary": len(cps) - len(interior),
              "angles_pi": {str(k): v for k, v in sorted(hist.items())}}
    if len(interior) == len(cps):
        found = sum(cp.angle - 1 for cp in cps)
        want = expected_excess(c)
        report["excess"] = {"found": found, "expected": want}
        if found != want:
            viol.append(f"angle excess {found} (units of 2pi) differs from bookkeeping value {want}")
    report["violations"] = viol
    return report


def suite_holonomy(c: SurfaceComplex, args) -> dict:
    rep = saddle_connections(c, Fraction(args.bound), _region(args, c))
    spec = Counter(s.holonomy for s in rep.connections)
    expect = args.expect or ("integer-horizontal" if c.metadata.get("builder") == "graft" else "any")
    viol = []
    if expect == "integer-horizontal" and not spectrum_in_integer_horizontal(spec):
        bad = sorted(h for h in spec if not spectrum_in_integer_horizontal([h]))
        viol = [f"holonomy {_vstr(h)} is not in Z x {{0}}" for h in bad]
    return {"bound": str(Fraction(args.bound)), "expect": expect, "connections": len(rep.connections),
            "spectrum": [[str(h[0]), str(h[1]), n] for h, n in sorted(spec.items())],
            "indeterminate": len(rep.indeterminate), "violations": viol}


def suite_automorphisms(c: SurfaceComplex, args) -> dict:
    fpath = args.family or str(family_path(args.complex))
    try:
        doc = json.loads(_read_text(fpath))
        cands = [candidate_from_json(d) for d in doc["candidates"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"family file {fpath}: {e}") from None
    g = Geometry(c)
    results, viol = [], []
    for cand in cands:
        r = verify_automorphism(c, cand, g)
        results.append({"name": cand.name, "valid": r["valid"], "kind": r["kind"],
                        "derivative": r["derivative"], "indeterminate": len(r["indeterminate"])})
        viol.extend(f"{cand.name}: {v}" for v in r["violations"])
    return {"family": fpath, "candidates": results, "violations": viol}


def suite_separation(c: SurfaceComplex, args) -> dict:
    sep = Fraction(args.separation) if args.separation is not None else None
    r = separation_audit(c, sep, Fraction(args.bound))
    return {"separation": r["separation"], "checked_pairs": r["checked_pairs"], "violations": r["violations"]}


SUITE_FUNCS = {"cone-angles": suite_cone_angles, "holonomy-spectrum": suite_holonomy,
               "automorphisms": suite_automorphisms, "separation": suite_separation}


def cmd_verify(args) -> int:
    c = _load_complex(args.complex, check=False)
    bad = validate(c)
    if bad:
        report = {"suite": args.suite, "pass": False, "violations": [f"{p}: {m}" for p, m in bad]}
    else:
        report = {"suite": args.suite}
        report.update(SUITE_FUNCS[args.suite](c, args))
        report["pass"] = not report["violations"]
    lines = [f"{args.suite}: {'PASS' if report['pass'] else 'FAIL'}"]
    for k, v in report.items():
        if k in ("suite", "pass", "violations", "candidates"):
            continue
        lines.append(f"  {k}: {v}")
    for cand in report.get("candidates", []):
        lines.append(f"  {cand['name']}: {'valid' if cand['valid'] else 'INVALID'} {cand['kind']}")
    lines.extend(f"  violation: {v}" for v in report["violations"])
    _emit(args, report, lines)
    return EXIT_OK if report["pass"] else EXIT_FAIL


# -- trace / saddles / render --------------------------------------------------------

def cmd_trace(args) -> int:
    c = _load_complex(args.complex)
    start = _fractions(args.start, 2, "--start")
    d = _fractions(args.direction, 2, "--dir")
    tr = develop_ray(c, args.plane, start, d, Fraction(args.max_length))
    report = {"termination": tr.termination, "end": [tr.end_plane, [str(x) for x in tr.end_point]],
              "segments": [[p, [str(x) for x in a], [str(x) for x in b]] for p, a, b in tr.segments]}
    lines = [f"{p}: {_vstr(a)} -> {_vstr(b)}" for p, a, b in tr.segments]
    lines.append(f"termination: {tr.termination} on {tr.end_plane} at {_vstr(tr.end_point)}")
    _emit(args, report, lines)
    return EXIT_OK


def cmd_saddles(args) -> int:
    c = _load_complex(args.complex)
    rep = saddle_connections(c, Fraction(args.bound), _region(args, c))
    conns = [{"holonomy": [str(s.holonomy[0]), str(s.holonomy[1])], "length2": str(s.length2),
              "start": [s.start[0], [str(x) for x in s.start[1]]],
              "end": [s.end[0], [str(x) for x in s.end[1]]]} for s in rep.connections]
    report = {"bound": str(Fraction(args.bound)), "connections": conns, "indeterminate": len(rep.indeterminate)}
    lines = [f"{s.start[0]} {_vstr(s.start[1])} -> {s.end[0]} {_vstr(s.end[1])}  holonomy {_vstr(s.holonomy)}"
             f"  length {s.length:.6f}" for s in rep.connections]
    lines.append(f"{len(conns)} saddle connections, {len(rep.indeterminate)} indeterminate windows")
    _emit(args, report, lines)
    return EXIT_OK


def cmd_render(args) -> int:
    c = _load_complex(args.complex)
    svg = render_svg(c, parse_window(args.planes, args.x, args.y))
    Path(args.out).write_text(svg, encoding="utf-8")
    _emit(args, {"output": args.out, "bytes": len(svg.encode("utf-8"))}, [f"wrote {args.out}"])
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slitsurf", description="Slit-gluing translation surfaces.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable report")

    sp = sub.add_parser("classify", help="classify an end-space descriptor")
    sp.add_argument("descriptor")
    sp.add_argument("--genus", default="all", help="all | none | spine | rays:i,j")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("build", help="run a builder and write the complex")
    sp.add_argument("builder", choices=BUILDERS)
    sp.add_argument("descriptor", nargs="?")
    sp.add_argument("--group", help="preset name or JSON group file")
    sp.add_argument("--pattern", help="JSON component pattern (finite builders)")
    sp.add_argument("--rank", type=int, help="free group rank (free-genus-zero)")
    sp.add_argument("--genus", help="genus marking of the descriptor")
    sp.add_argument("--parabolic", action="append", help="a,b,c,d matrix (veech-parabolic, repeatable)")
    sp.add_argument("--config", help="JSON file with build configuration keys")
    sp.add_argument("--planes", type=int, help="graft planes kept (planes_limit)")
    sp.add_argument("--slits", type=int, help="slit indices kept per plane (slit_index_limit)")
    sp.add_argument("--radius", type=int, help="Cayley ball radius for infinite groups")
    sp.add_argument("--separation", help="distance between gadgets, a rational")
    sp.add_argument("--small", help="polygon diameter bound, a rational in (0, 1)")
    sp.add_argument("--rows", type=int, help="grid rows of the finite builders")
    sp.add_argument("--chain-radius", type=int, help="blocks on each side (translatable)")
    sp.add_argument("--case", type=int, help="translatable construction, 1 or 2")
    sp.add_argument("--sc-bound", help="saddle-connection bound of the separation audit")
    sp.add_argument("-o", "--out", help="output path; the family goes next to it")
    common(sp)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("verify", help="run a verification suite on a complex")
    sp.add_argument("suite", choices=SUITES)
    sp.add_argument("complex")
    sp.add_argument("--family", help="family file (default: next to the complex)")
    sp.add_argument("--bound", default="3", help="saddle-connection length bound")
    sp.add_argument("--planes", help="comma-separated plane ids for the search region")
    sp.add_argument("--expect", choices=("integer-horizontal", "any"),
                    help="holonomy expectation (default: integer-horizontal for graft complexes)")
    sp.add_argument("--separation", help="required gap for the separation audit")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("trace", help="develop a straight ray")
    sp.add_argument("complex")
    sp.add_argument("--plane", required=True)
    sp.add_argument("--start", required=True, help="x,y (use --start=-1,2 for negatives)")
    sp.add_argument("--dir", dest="direction", required=True, help="dx,dy")
    sp.add_argument("--max-length", default="10")
    common(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("saddles", help="list saddle connections up to a length bound")
    sp.add_argument("complex")
    sp.add_argument("--bound", default="1")
    sp.add_argument("--planes")
    common(sp)
    sp.set_defaults(func=cmd_saddles)

    sp = sub.add_parser("render", help="draw the complex as SVG")
    sp.add_argument("complex")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--planes", help="comma-separated plane ids")
    sp.add_argument("--x", help="x range LO..HI")
    sp.add_argument("--y", help="y range LO..HI")
    common(sp)
    sp.set_defaults(func=cmd_render)
    return p


INPUT_ERRORS = (InputError, DescriptorError, GroupError, BuildError, GraftError, ComplexError, SchemaError,
                RenderError, ValueError, ZeroDivisionError)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    # argparse drops an optional positional that follows an option: pick it up here
    if args.command == "build" and args.descriptor is None and len(rest) == 1 and not rest[0].startswith("-"):
        args.descriptor, rest = rest[0], []
    if rest:
        parser.error("unrecognized arguments: " + " ".join(rest))
    try:
        return args.func(args)
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
