"""JSON documents for algebras, simplicial algebras and homs.

Serialization is deterministic, so ``serialize(parse(s)) == s`` byte for
byte on anything this module wrote.  Parsing validates eagerly.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .algebra import FiniteAlgebra, Signature
from .errors import (MaltsevAxiomError, ParseError, TermError, ValidationError)
from .simplicial import (SimplicialHom, TruncatedSimplicialAlgebra, validate,
                         validate_hom)
from .terms import format_term, parse_term


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False) + "\n"


def _load(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})", e.pos) from None


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{what}: expected an integer, got {v!r}")
    return v


def _int_list(v, what: str) -> np.ndarray:
    if not isinstance(v, list):
        raise ParseError(f"{what}: expected a list of integers")
    for idx, e in enumerate(v):
        if isinstance(e, bool) or not isinstance(e, int):
            raise ParseError(f"{what}: entry {idx} is {e!r}, not an integer")
    return np.asarray(v, dtype=np.int64)


def _require(obj: dict, key: str, what: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{what}: expected a JSON object")
    if key not in obj:
        raise ParseError(f"{what}: missing field {key!r}")
    return obj[key]


# ---------------------------------------------------------------- algebras

def algebra_to_obj(alg: FiniteAlgebra) -> dict:
    obj = {
        "name": alg.name,
        "carrier": alg.size,
        "signature": [{"name": n, "arity": a} for n, a in alg.signature],
        "tables": {n: alg.tables[n].tolist() for n, _ in alg.signature},
    }
    if alg.maltsev_term is not None:
        obj["maltsev_term"] = format_term(alg.maltsev_term)
    return obj


def algebra_from_obj(obj, what: str = "algebra") -> FiniteAlgebra:
    name = _require(obj, "name", what)
    if not isinstance(name, str):
        raise ParseError(f"{what}: name must be a string")
    carrier = _int(_require(obj, "carrier", what), f"{what}.carrier")
    sig_raw = _require(obj, "signature", what)
    if not isinstance(sig_raw, list):
        raise ParseError(f"{what}.signature: expected a list")
    ops = []
    for idx, entry in enumerate(sig_raw):
        op = _require(entry, "name", f"{what}.signature[{idx}]")
        if not isinstance(op, str):
            raise ParseError(f"{what}.signature[{idx}].name must be a string")
        ops.append((op, _int(_require(entry, "arity", f"{what}.signature[{idx}]"),
                             f"{what}.signature[{idx}].arity")))
    try:
        sig = Signature(tuple(ops))
    except ValueError as e:
        raise ParseError(f"{what}.signature: {e}") from None
    tables_raw = _require(obj, "tables", what)
    if not isinstance(tables_raw, dict):
        raise ParseError(f"{what}.tables: expected an object")
    tables = {op: _int_list(v, f"{what}.tables[{op!r}]") for op, v in tables_raw.items()}
    term = None
    if obj.get("maltsev_term") is not None:
        if not isinstance(obj["maltsev_term"], str):
            raise ParseError(f"{what}.maltsev_term must be a string")
        term = parse_term(obj["maltsev_term"])
    try:
        return FiniteAlgebra(name, carrier, sig, tables, term)
    except TermError as e:
        raise MaltsevAxiomError(f"{what}: maltsev_term is not a term over the signature: {e}") from None


def serialize_algebra(alg: FiniteAlgebra) -> str:
    return _dump(algebra_to_obj(alg))


def parse_algebra(text: str) -> FiniteAlgebra:
    return algebra_from_obj(_load(text))


# ---------------------------------------------------------------- simplicial

def simplicial_to_obj(X: TruncatedSimplicialAlgebra) -> dict:
    return {
        "N": X.N,
        "levels": [algebra_to_obj(l) for l in X.levels],
        "faces": [[d.tolist() for d in group] for group in X.faces],
        "degeneracies": [[s.tolist() for s in group] for group in X.degeneracies],
    }


def serialize_simplicial(X: TruncatedSimplicialAlgebra) -> str:
    return _dump(simplicial_to_obj(X))


def _nested(v, what):
    if not isinstance(v, list):
        raise ParseError(f"{what}: expected a list")
    return [_int_list(a, f"{what}[{i}]") if isinstance(a, list) else _int(a, f"{what}[{i}]")
            for i, a in enumerate(v)]


def simplicial_from_obj(obj, check: bool = True) -> TruncatedSimplicialAlgebra:
    N = _int(_require(obj, "N", "simplicial"), "N")
    levels_raw = _require(obj, "levels", "simplicial")
    if not isinstance(levels_raw, list) or len(levels_raw) != N + 1:
        raise ParseError(f"simplicial: expected {N + 1} levels")
    levels = [algebra_from_obj(l, f"levels[{n}]") for n, l in enumerate(levels_raw)]
    faces_raw = _require(obj, "faces", "simplicial")
    degs_raw = _require(obj, "degeneracies", "simplicial")
    if not isinstance(faces_raw, list) or not isinstance(degs_raw, list):
        raise ParseError("simplicial: faces and degeneracies must be lists")
    faces = [_nested(g, f"faces[{n}]") for n, g in enumerate(faces_raw)]
    degs = [_nested(g, f"degeneracies[{n}]") for n, g in enumerate(degs_raw)]
    X = TruncatedSimplicialAlgebra(levels, faces, degs)
    if check:
        rep = validate(X)
        if not rep.ok:
            v = rep.violations[0]
            raise ValidationError(f"simplicial law {v.law!r} fails at level {v.n}, "
                                  f"i={v.i}, j={v.j}, element {v.element}")
    return X


def parse_simplicial(text: str, check: bool = True) -> TruncatedSimplicialAlgebra:
    return simplicial_from_obj(_load(text), check)


# ---------------------------------------------------------------- homs

def hom_to_obj(f: SimplicialHom, source: str, target: str) -> dict:
    return {"source": source, "target": target, "maps": [m.tolist() for m in f.maps]}


def serialize_hom(f: SimplicialHom, source: str, target: str) -> str:
    return _dump(hom_to_obj(f, source, target))


def parse_hom(text: str, base_dir: Optional[Path] = None, check: bool = True):
    """Returns ``(hom, source_path, target_path)``; the paths are kept as
    written in the document and resolved against ``base_dir``."""
    obj = _load(text)
    src = _require(obj, "source", "hom")
    dst = _require(obj, "target", "hom")
    if not isinstance(src, str) or not isinstance(dst, str):
        raise ParseError("hom: source and target must be path strings")
    maps = _nested(_require(obj, "maps", "hom"), "maps")
    base = Path(base_dir) if base_dir is not None else Path(".")
    X = load_simplicial(base / src, check)
    Y = load_simplicial(base / dst, check)
    f = SimplicialHom(X, Y, maps)
    if check:
        rep = validate_hom(f)
        if not rep.ok:
            v = rep.violations[0]
            raise ValidationError(f"hom law {v.law!r} fails at level {v.n}, i={v.i}, element {v.element}")
    return f, src, dst


# ---------------------------------------------------------------- files

def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _annotate(path, fn, *args, **kw):
    try:
        return fn(_read(path), *args, **kw)
    except (ParseError, ValidationError) as e:
        e.args = (f"{path}: {e.args[0] if e.args else e}",)
        raise


def load_algebra(path) -> FiniteAlgebra:
    return _annotate(path, parse_algebra)


def load_simplicial(path, check: bool = True) -> TruncatedSimplicialAlgebra:
    return _annotate(path, parse_simplicial, check)


def load_hom(path, check: bool = True) -> SimplicialHom:
    return _annotate(path, parse_hom, Path(path).parent, check)[0]


def write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8")
