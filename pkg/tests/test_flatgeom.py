from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import HAND_RAYS
from slitsurf.end_space import parse_descriptor
from slitsurf.exact import mat, mat_vec, norm2, vec
from slitsurf.flatgeom import (AutomorphismCandidate, Geometry, audit_cone_angles, compose_candidates,
                               conjugate_candidate, develop_ray, expected_excess, holonomy_spectrum,
                               induced_parabolic_map, saddle_connections, spectrum_in_integer_horizontal,
                               verify_automorphism)
from slitsurf.surface_complex import (ComplexBuilder, ComplexError, add_plane, apply_matrix,
                                      branched_cover_surgery, empty_complex, icosagon_surgery)
from slitsurf.tree_grafting import graft

F = Fraction


def two_planes():
    b = ComplexBuilder()
    b.add_plane("A").add_plane("B")
    b.slit("a", "A", (0, 0), (1, 0))
    b.slit("b", "B", (0, 0), (1, 0))
    return b.glue("a", "b").freeze()


def icosagon_only():
    return icosagon_surgery(add_plane(empty_complex(), "P"), "P", (0, 0))


def closed_mixture():
    """Slit pairs, a 3-cycle branch and an icosagon, with no truncation boundary."""
    b = ComplexBuilder(two_planes())
    b.slit("c", "A", (0, 3), (2, 1))
    b.slit("d", "B", (5, 5), (2, 1))
    b.glue("c", "d")
    c = branched_cover_surgery(b.freeze(), "A", (-10, -10), (0, -1), 3, "br")
    return icosagon_surgery(c, "B", (20, 20), F(1, 2))


# -- cone angles -------------------------------------------------------------------

def test_single_pair_gives_two_4pi_points():
    cps = audit_cone_angles(two_planes())
    assert sorted(cp.angle_pi for cp in cps) == [4, 4]
    assert all(len(cp.copies) == 2 and cp.interior for cp in cps)


def test_branch_point_angle():
    c = branched_cover_surgery(add_plane(empty_complex(), "P"), "P", (0, 0), (1, 0), 3)
    [cp] = audit_cone_angles(c)
    assert cp.angle_pi == 6


def test_icosagon_in_plane_cone_angle():
    # the plane with the icosagon's interior removed and opposite sides glued:
    # all 20 vertices form one class, angle 20*2pi - (20-2)pi = 22pi
    [cp] = audit_cone_angles(icosagon_only())
    assert len(cp.copies) == 20
    assert cp.angle_pi == 22
    assert icosagon_only().polygons()[0].closed_surface_angle() == 18


def test_excess_bookkeeping_identity():
    c = closed_mixture()
    cps = audit_cone_angles(c)
    assert all(cp.interior for cp in cps)
    assert sum(cp.angle - 1 for cp in cps) == expected_excess(c) == 2 + 2 + 2 + 10


def test_graft_interior_angles_are_4pi():
    c = graft(parse_descriptor("w^2+1"), 4, 5)
    cps = audit_cone_angles(c)
    assert {cp.angle_pi for cp in cps if cp.interior} == {4}
    assert any(not cp.interior for cp in cps)


# -- develop_ray ---------------------------------------------------------------------

@pytest.mark.parametrize("case", HAND_RAYS, ids=[f"ray{i}" for i in range(len(HAND_RAYS))])
def test_develop_ray_matches_hand_development(case):
    plane, start, d, L, segs, term = case
    tr = develop_ray(two_planes(), plane, start, d, L)
    assert [(p, a, b) for p, a, b in tr.segments] == segs
    assert tr.termination == term


def test_develop_ray_reversible():
    c = two_planes()
    for plane, start, d, L, segs, term in HAND_RAYS:
        if term != "length_bound":
            continue
        tr = develop_ray(c, plane, start, d, L)
        back = develop_ray(c, tr.end_plane, tr.end_point, (-F(d[0]), -F(d[1])), L)
        assert [(p, b, a) for p, a, b in reversed(back.segments)] == list(tr.segments)
        assert back.end_plane == plane and back.end_point == start


def test_develop_ray_rejects_cone_point_and_zero_direction():
    c = two_planes()
    with pytest.raises(ComplexError):
        develop_ray(c, "A", (0, 0), (0, 1), 1)
    with pytest.raises(ComplexError):
        develop_ray(c, "A", (F(1, 2), 0), (0, 1), 1)
    with pytest.raises(ComplexError):
        develop_ray(c, "A", (5, 5), (0, 0), 1)


def test_develop_ray_reaches_frontier_and_stub():
    c = graft(parse_descriptor("w+1"), 2, 2)
    tr = develop_ray(c, "P0", (100, -1), (0, 1), 5)
    assert tr.termination == "truncation_boundary"
    stub = c.open_stubs[0]
    s = c.slit(stub.slit)
    tr = develop_ray(c, s.plane, (s.base[0] + F(1, 2), -1), (0, 1), 5)
    assert tr.termination == "open_stub"


def test_develop_ray_irrational_length_uses_dyadic_floor():
    tr = develop_ray(two_planes(), "A", (5, 5), (1, 1), 1)
    x = tr.end_point[0] - 5
    assert x.denominator <= 2 ** 32 and 2 * x * x <= 1 < 2 * (x + F(1, 2 ** 32)) ** 2


# -- saddle connections -----------------------------------------------------------------

def test_two_plane_saddle_connections():
    rep = saddle_connections(two_planes(), 1)
    assert len(rep) == 2
    assert {s.holonomy for s in rep} == {(1, 0)}
    assert rep.indeterminate == []


def test_two_plane_longer_bound():
    rep = saddle_connections(two_planes(), 3)
    assert Counter(s.holonomy for s in rep) == Counter({(1, 0): 2})


def test_icosagon_saddle_connections_are_its_edges():
    c = icosagon_only()
    poly = c.polygons()[0]
    sides = poly.side_vectors()[:10]
    longest = max(norm2(s) for s in sides)
    rep = saddle_connections(c, Fraction(1))
    short = [s for s in rep if s.length2 <= longest]
    assert len(short) == 10
    assert sorted(s.length2 for s in short) == sorted(norm2(s) for s in sides)


def test_graft_spectrum_horizontal():
    c = graft(parse_descriptor("w+1"), 4, 5)
    spec = holonomy_spectrum(c, 1, ["P0"])
    assert set(spec) == {(1, 0)}
    assert spectrum_in_integer_horizontal(holonomy_spectrum(c, 3))


def test_empty_spectrum():
    assert holonomy_spectrum(empty_complex(), 5) == Counter()


@settings(max_examples=12, deadline=None)
@given(st.integers(1, 3), st.fractions(F(-2), F(2), max_denominator=4))
def test_spectrum_equivariant_under_matrix(t, s):
    c = closed_mixture()
    A = mat(t, s * t, 0, 1)  # operator norm of A^-1 stays below 4
    img = apply_matrix(c, A)
    L = F(4)
    got = Counter(sc.holonomy for sc in saddle_connections(img, L))
    # every connection of c maps to one of img; bound large enough on the source side
    src = saddle_connections(c, L * 4)

    def canon(h):
        return h if (h[0] > 0 or (h[0] == 0 and h[1] > 0)) else (-h[0], -h[1])

    want = Counter(canon(mat_vec(A, sc.holonomy)) for sc in src if norm2(mat_vec(A, sc.holonomy)) <= L * L)
    assert got == want


# -- automorphisms -------------------------------------------------------------------------

def test_identity_candidate_is_valid_translation():
    c = two_planes()
    r = verify_automorphism(c, AutomorphismCandidate.make({"A": "A", "B": "B"}))
    assert r["valid"] and r["kind"] == "translation"


def test_swap_planes_is_valid():
    c = two_planes()
    r = verify_automorphism(c, AutomorphismCandidate.make({"A": "B", "B": "A"}))
    assert r["valid"]


def test_candidate_sending_slit_to_empty_space_is_invalid():
    c = two_planes()
    r = verify_automorphism(c, AutomorphismCandidate.make({"A": "A", "B": "B"}, offsets={"A": vec(3, 0)}))
    assert not r["valid"] and r["violations"]


def test_non_parabolic_rejected():
    c = graft(parse_descriptor("w+1"), 3, 3)
    with pytest.raises(ComplexError):
        induced_parabolic_map(c, mat(0, -1, 1, 0))
    rot = AutomorphismCandidate.make({p.id: p.id for p in c.planes}, mat(0, -1, 1, 0))
    assert not verify_automorphism(c, rot)["valid"]


def test_parabolic_identity_is_identity_candidate():
    c = graft(parse_descriptor("w+1"), 3, 3)
    cand = induced_parabolic_map(c, mat(1, 0, 0, 1))
    assert cand.A == mat(1, 0, 0, 1) and all(p == q for p, q in cand.plane_map)


def test_parabolic_valid_with_derivative():
    c = graft(parse_descriptor("w+1"), 3, 3)
    A = mat(1, F(3, 2), 0, 2)
    r = verify_automorphism(c, induced_parabolic_map(c, A))
    assert r["valid"] and r["kind"] == "affine" and r["derivative_matrix"] == A


def test_checker_equivariance():
    c = two_planes()
    M = mat(2, 1, 1, 1)
    for cand in (AutomorphismCandidate.make({"A": "B", "B": "A"}),
                 AutomorphismCandidate.make({"A": "A", "B": "B"}, offsets={"B": vec(1, 1)})):
        r1 = verify_automorphism(c, cand)
        r2 = verify_automorphism(apply_matrix(c, M), conjugate_candidate(cand, M))
        assert r1["valid"] == r2["valid"]


def test_composition_of_valid_candidates():
    c = two_planes()
    f = AutomorphismCandidate.make({"A": "B", "B": "A"}, name="f")
    g = compose_candidates(f, f)
    assert g.mapping == {"A": "A", "B": "B"}
    assert verify_automorphism(c, g)["valid"]


def test_geometry_reuse_matches_fresh():
    c = closed_mixture()
    g = Geometry(c)
    assert [cp.angle for cp in audit_cone_angles(c, g)] == [cp.angle for cp in audit_cone_angles(c)]
