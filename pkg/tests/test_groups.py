import json

import pytest

from slitsurf.exact import mat, mat_mul
from slitsurf.groups import (FiniteTable, Free, GroupError, MatrixGens, VirtuallyCyclicSplit, cayley_ball,
                             group_from_json, load_group, preset)


def test_cyclic_table():
    g = FiniteTable.cyclic(4)
    assert g.order == 4 and g.elements()[0] == g.identity()
    assert g.mul(1, 3) == 0 and g.inv(1) == 3


def test_table_validation():
    with pytest.raises(GroupError, match="identity"):
        FiniteTable(["a", "b"], [[1, 1], [1, 1]])
    with pytest.raises(GroupError, match="associative"):
        FiniteTable(["e", "a", "b"], [[0, 1, 2], [1, 0, 0], [2, 0, 0]])
    with pytest.raises(GroupError):
        FiniteTable(["e", "e"], [[0, 1], [1, 0]])


def test_s3_is_nonabelian():
    g = preset("s3")
    assert g.order == 6
    assert any(g.mul(a, b) != g.mul(b, a) for a in range(6) for b in range(6))


def test_matrix_table_closure():
    g = FiniteTable.from_matrices([mat(0, -1, 1, 0)])
    assert g.order == 4
    for a in range(4):
        for b in range(4):
            assert mat_mul(g.matrix(a), g.matrix(b)) == g.matrix(g.mul(a, b))


def test_matrices_must_match_table():
    with pytest.raises(GroupError):
        FiniteTable(["e", "a"], [[0, 1], [1, 0]], [mat(1, 0, 0, 1), mat(2, 0, 0, 1)])


def test_free_group_reduction():
    f = Free(2)
    a, b = f.generators()
    ab = f.mul(a, b)
    assert f.mul(ab, f.inv(ab)) == f.identity()
    assert f.name(f.mul(f.inv(a), b)) == "a1^-1*a2"


def test_free_ball_sizes():
    # 1 + 2m * sum (2m-1)^k
    assert len(cayley_ball(Free(2), 2)) == 17
    assert len(cayley_ball(Free(2), 3)) == 53
    assert len(cayley_ball(Free(1), 3)) == 7


def test_virtually_cyclic_split():
    g = VirtuallyCyclicSplit(FiniteTable.cyclic(3), [0, 2, 1])
    t = (0, 1)
    x = (1, 0)
    # t x t^-1 = phi(x)
    assert g.mul(g.mul(t, x), g.inv(t)) == (2, 0)
    with pytest.raises(GroupError):
        VirtuallyCyclicSplit(FiniteTable.cyclic(3), [0, 0, 1])


def test_matrix_generators():
    g = MatrixGens([mat(1, 1, 0, 1)])
    ball = cayley_ball(g, 3)
    assert len(ball) == 7
    with pytest.raises(GroupError):
        MatrixGens([mat(0, 1, 1, 0)])


def test_ball_edges_are_right_multiplication():
    g = preset("z3")
    ball = cayley_ball(g, 3)
    for i, k, j in ball.edges:
        assert g.mul(ball.elements[i], ball.labels[k]) == ball.elements[j]


def test_ball_order_is_deterministic():
    a = cayley_ball(preset("diag-shear"), 2).names()
    b = cayley_ball(preset("diag-shear"), 2).names()
    assert a == b and a[0] == "e"


def test_json_formats(tmp_path):
    assert group_from_json([[0, 1], [1, 0]]).order == 2
    g = group_from_json({"elements": ["e", "s"], "table": [["e", "s"], ["s", "e"]]})
    assert g.name(1) == "s"
    assert isinstance(group_from_json({"kind": "free", "rank": 3}), Free)
    m = group_from_json({"kind": "matrices", "generators": [[["1", "1/2"], ["0", "1"]]]})
    assert m.gens[0] == mat(1, "1/2", 0, 1)
    assert group_from_json({"kind": "matrix-table", "generators": [[["-1", "0"], ["0", "-1"]]]}).order == 2
    p = tmp_path / "z2.json"
    p.write_text(json.dumps([[0, 1], [1, 0]]))
    assert load_group(str(p)).order == 2


def test_load_errors(tmp_path):
    with pytest.raises(GroupError, match="no such"):
        load_group(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(GroupError, match="invalid JSON"):
        load_group(str(bad))
    with pytest.raises(GroupError):
        group_from_json({"kind": "lie"})
