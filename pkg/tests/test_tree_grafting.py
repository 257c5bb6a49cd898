from fractions import Fraction

import pytest

from slitsurf.end_space import GenusMarking, parse_descriptor
from slitsurf.surface_complex import validate
from slitsurf.tree_grafting import GraftError, build_tree, genus_edges, graft, ray_decomposition, slit_x


def tree(text, depth, genus="all"):
    return build_tree(parse_descriptor(text, GenusMarking.parse(genus)), depth)


def test_tree_is_connected_and_acyclic():
    t = tree("w^2+1", 5)
    assert t.parent[0] == -1
    for v in range(1, t.size):
        assert t.parent[v] < v
        assert t.depth[v] == t.depth[t.parent[v]] + 1
        assert v in t.children[t.parent[v]]
    assert len(t.edges()) == t.size - 1


def test_finite_end_space_has_n_rays():
    for n in (1, 2, 3, 5):
        t = tree(str(n), 4)
        assert len(ray_decomposition(t).rays) == n


def test_convergent_sequence_tree_hangs_a_ray_at_each_spine_vertex():
    t = tree("w+1", 4)
    spine = [0]
    while t.children[spine[-1]]:
        spine.append(t.children[spine[-1]][0])
    assert len(spine) == 5
    assert all(len(t.children[v]) == 2 for v in spine[:-1])


def test_cantor_tree_is_binary():
    t = tree("cantor", 4)
    assert all(len(t.children[v]) == 2 for v in range(t.size) if t.depth[v] < 4)
    assert len(t.leaves()) == 16


def test_ray_decomposition_partitions_edges():
    for text in ("w+1", "w^2*2+1", "cantor+seq", "3"):
        t = tree(text, 5)
        rd = ray_decomposition(t)
        seen = []
        for ray in rd.rays:
            seen.extend(ray[1:])
            for a, b in zip(ray, ray[1:]):
                assert t.parent[b] == a
        assert sorted(seen) == list(range(1, t.size))
        assert len(rd.rays) == len(t.leaves())


def test_ray_origins_point_into_earlier_rays():
    t = tree("w^2+1", 5)
    rd = ray_decomposition(t)
    for n in range(1, len(rd.rays)):
        m, l = rd.origin[n]
        assert m < n
        assert rd.rays[m][l] == rd.rays[n][0]


def test_genus_edges_by_marking():
    d_all = parse_descriptor("w+1")
    t = build_tree(d_all, 4)
    rd = ray_decomposition(t)
    assert genus_edges(t, rd, d_all) == set(range(1, t.size))
    assert genus_edges(t, rd, d_all.with_genus(GenusMarking("none"))) == set()
    spine = genus_edges(t, rd, d_all.with_genus(GenusMarking("spine")))
    assert spine == set(rd.rays[0][1:])


def test_slit_coordinates():
    assert [slit_x(f, 2) for f in ("s", "t", "t'")] == [12, 14, 16]


def test_graft_slits_are_horizontal_unit_and_on_the_ladder():
    c = graft(parse_descriptor("w+1"), 4, 5)
    assert validate(c) == []
    for s in c.slits:
        assert s.holonomy == (1, 0) and s.base[1] == 0
        assert s.base[0] % 6 in (0, 2, 4)
    assert len(c.planes) == 4


def test_graft_glues_t_pairs_on_the_same_slot():
    c = graft(parse_descriptor("w+1"), 3, 3)
    for g in c.gluings:
        a, b = (c.slit(x) for x in g.slits)
        if ":t" in a.id:
            assert a.plane == b.plane and b.base[0] - a.base[0] == 2


def test_graft_s_gluings_follow_ray_origins():
    d = parse_descriptor("w^2+1")
    c = graft(d, 5, 6)
    for g in c.gluings:
        ids = sorted(g.slits)
        if all(":s" in x for x in ids):
            a, b = (c.slit(x) for x in ids)
            assert 0 in (a.base[0], b.base[0])


def test_genus_zero_graft_has_no_t_slits():
    c = graft(parse_descriptor("w+1", GenusMarking("none")), 3, 3)
    assert not any(":t" in s.id for s in c.slits)


def test_graft_frontiers_and_stubs():
    K = 3
    c = graft(parse_descriptor("w+1"), 3, K)
    assert {f.base for f in c.frontiers} == {(Fraction(6 * (K + 1)), Fraction(0))}
    for o in c.open_stubs:
        assert o.slit in c.slit_index
        assert o.slit not in c.gluing_of


def test_graft_lower_half_plane_is_free():
    c = graft(parse_descriptor("cantor+dense"), 5, 5)
    for s in c.slits:
        if s.plane == "P0":
            assert s.base[1] > -1 and s.end[1] > -1


def test_graft_rejects_bad_limits():
    with pytest.raises(GraftError):
        graft(parse_descriptor("w+1"), 0, 3)


def test_graft_prefix():
    c = graft(parse_descriptor("2"), 2, 2, prefix="x/")
    assert all(p.id.startswith("x/") for p in c.planes)
