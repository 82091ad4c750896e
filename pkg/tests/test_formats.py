import json

import numpy as np
import pytest

from maltsev_kan import algebra as A
from maltsev_kan.errors import MaltsevAxiomError, ParseError, TableShapeError, ValidationError
from maltsev_kan.formats import (load_hom, load_simplicial, parse_algebra, parse_simplicial,
                                 serialize_algebra, serialize_hom, serialize_simplicial, write_text)
from maltsev_kan.simplicial import (circle_free_mod, constant, is_levelwise_surjective,
                                    nerve_abelian, reduction_hom)


@pytest.mark.parametrize("alg", [A.semilattice(), A.cyclic_group(4), A.heyting_chain(3),
                                 A.zmod_sub(3), A.trivial([])], ids=lambda a: a.name)
def test_algebra_roundtrip(alg):
    text = serialize_algebra(alg)
    back = parse_algebra(text)
    assert back == alg and serialize_algebra(back) == text


@pytest.mark.parametrize("X", [constant(A.semilattice(), 2), nerve_abelian(2, 3), circle_free_mod(3, 2)],
                         ids=["constant", "nerve", "circle"])
def test_simplicial_roundtrip(X):
    text = serialize_simplicial(X)
    assert serialize_simplicial(parse_simplicial(text)) == text
    assert parse_simplicial(text) == X


def test_minimal_document():
    a = parse_algebra('{"name": "pt", "carrier": 1, "signature": [], "tables": {}}')
    assert a.size == 1 and len(a.signature) == 0


def test_group_document_with_term():
    doc = {"name": "Z/4", "carrier": 4,
           "signature": [{"name": "+", "arity": 2}, {"name": "neg", "arity": 1}, {"name": "0", "arity": 0}],
           "tables": {"+": [(a + b) % 4 for a in range(4) for b in range(4)],
                      "neg": [(-a) % 4 for a in range(4)], "0": [0]},
           "maltsev_term": "(+ (+ v0 (neg v1)) v2)"}
    a = parse_algebra(json.dumps(doc))
    assert str(a.maltsev_term) == "(+ (+ v0 (neg v1)) v2)"
    doc["maltsev_term"] = "(+ v0 v2)"
    with pytest.raises(MaltsevAxiomError):
        parse_algebra(json.dumps(doc))


def test_table_entry_out_of_range():
    doc = {"name": "bad", "carrier": 2, "signature": [{"name": "meet", "arity": 2}],
           "tables": {"meet": [0, 0, 2, 1]}}
    with pytest.raises(TableShapeError, match=r"'meet'.*index 2"):
        parse_algebra(json.dumps(doc))


@pytest.mark.parametrize("text", ["{", '{"name": 3, "carrier": 1, "signature": [], "tables": {}}',
                                  '{"name": "x", "carrier": true, "signature": [], "tables": {}}',
                                  '{"name": "x", "carrier": 2, "signature": [], "tables": {}, "maltsev_term": "(v0"}'])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_algebra(text)


def _write_hom(tmp_path, f):
    write_text(tmp_path / "src.json", serialize_simplicial(f.source))
    write_text(tmp_path / "dst.json", serialize_simplicial(f.target))
    write_text(tmp_path / "hom.json", serialize_hom(f, "src.json", "dst.json"))
    return tmp_path / "hom.json"


def test_hom_file(tmp_path):
    f = reduction_hom(4, 2, 2)
    g = load_hom(_write_hom(tmp_path, f))
    assert is_levelwise_surjective(g)
    assert all(np.array_equal(a, b) for a, b in zip(f.maps, g.maps))


def test_hom_mutation_cites_location(tmp_path):
    path = _write_hom(tmp_path, reduction_hom(4, 2, 2))
    doc = json.loads(path.read_text())
    doc["maps"][2][5] ^= 1
    path.write_text(json.dumps(doc))
    with pytest.raises(ValidationError, match=r"hom\.json.*d_i f.*level 2, i=\d, element \d+"):
        load_hom(path)


def test_simplicial_mutation_cites_location(tmp_path):
    doc = json.loads(serialize_simplicial(nerve_abelian(2, 3)))
    doc["faces"][1][0][3] ^= 1
    p = tmp_path / "x.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ValidationError, match=r"x\.json.*level \d, i=\d, j=-?\d, element \d+"):
        load_simplicial(p)
    assert load_simplicial(p, check=False).N == 3
