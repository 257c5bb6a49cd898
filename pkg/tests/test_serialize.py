import json

import pytest

from slitsurf.assembly import build_free_genus_zero, build_veech_finite
from slitsurf.end_space import GenusMarking, parse_descriptor
from slitsurf.groups import preset
from slitsurf.serialize import SCHEMA_ID, SchemaError, deserialize, load_schema, serialize, to_jsonable
from slitsurf.surface_complex import ComplexError
from slitsurf.tree_grafting import graft


def samples():
    yield graft(parse_descriptor("w^2+1"), 4, 4)
    yield build_free_genus_zero(2, parse_descriptor("cantor", GenusMarking("none"))).complex
    yield build_veech_finite(preset("pm-identity")).complex


def test_round_trip_is_identity():
    for c in samples():
        text = serialize(c)
        back = deserialize(text)
        assert back == c
        assert serialize(back) == text


def test_serialization_is_deterministic_text():
    c = graft(parse_descriptor("w+1"), 3, 3)
    a, b = serialize(c), serialize(graft(parse_descriptor("w+1"), 3, 3))
    assert a == b
    doc = json.loads(a)
    assert doc["schema"] == SCHEMA_ID
    assert list(doc) == sorted(doc)
    assert a.endswith("\n")


def test_rationals_are_strings():
    c = build_veech_finite(preset("pm-identity")).complex
    doc = to_jsonable(c)
    assert doc["planes"][0]["chart"] == [["1", "0"], ["0", "1"]]
    assert any(s["holonomy"] == ["1/2", "0"] for s in doc["slits"])


def test_schema_is_valid_json_schema():
    import jsonschema
    jsonschema.Draft202012Validator.check_schema(load_schema())


def test_schema_error_carries_path():
    doc = to_jsonable(graft(parse_descriptor("w+1"), 2, 2))
    doc["slits"][3]["base"] = ["1", "x"]
    with pytest.raises(SchemaError) as e:
        deserialize(json.dumps(doc))
    assert "slits[3]" in str(e.value)


def test_invalid_json_rejected():
    with pytest.raises(SchemaError, match="invalid JSON"):
        deserialize("{")


def test_tampered_holonomy_fails_gate_with_path():
    doc = to_jsonable(graft(parse_descriptor("w+1"), 2, 2))
    glued = doc["gluings"][0]["slits"][0]
    for s in doc["slits"]:
        if s["id"] == glued:
            s["holonomy"] = ["2", "0"]
    with pytest.raises(ComplexError) as e:
        deserialize(json.dumps(doc))
    assert e.value.path is not None
    c = deserialize(json.dumps(doc), check=False)
    assert c.slit(glued).holonomy == (2, 0)


def test_missing_key_rejected():
    doc = to_jsonable(graft(parse_descriptor("w+1"), 2, 2))
    del doc["gluings"]
    with pytest.raises(SchemaError):
        deserialize(json.dumps(doc))
