"""Bundle files: JSON towers and connections, schema-checked and canonicalized.

Tower file::

    {"p": 2, "fiber_vars": ["x"], "base_vars": ["s"], "mode": "absolute",
     "rank": 2, "sigmas": [[["1", "x"], ["0", "1"]], ...]}

optionally with ``"split"`` (the base variables of a relative split) and
``"embedding"`` (generator columns written by the Gauss-Manin command, as
polynomials in ``"embedding_vars"``, the variables of the ambient family).  A
connection file replaces ``mode``/``sigmas`` by ``"connection"``, a list of
matrices, one per fiber variable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import jsonschema

from .arith import Poly, check_prime, parse_poly
from .connection import Connection
from .errors import ParseError, StratError, ValidationError
from .gaussmanin import RelativeSplit
from .linalg import PolyMatrix, mat_with_vars
from .tower import Tower

_NAME = {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"}
_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "string"}}}
_COMMON = {
    "p": {"type": "integer"},
    "fiber_vars": {"type": "array", "items": _NAME},
    "base_vars": {"type": "array", "items": _NAME},
    "rank": {"type": "integer", "minimum": 1},
}

TOWER_SCHEMA = {
    "type": "object",
    "required": ["p", "fiber_vars", "base_vars", "mode", "rank", "sigmas"],
    "properties": {
        **_COMMON,
        "mode": {"enum": ["absolute", "relative"]},
        "sigmas": {"type": "array", "minItems": 1, "items": _MATRIX},
        "split": {"type": "array", "items": _NAME},
        "embedding": _MATRIX,
        "embedding_vars": {"type": "array", "items": _NAME},
    },
    "additionalProperties": False,
}

CONNECTION_SCHEMA = {
    "type": "object",
    "required": ["p", "fiber_vars", "base_vars", "rank", "connection"],
    "properties": {**_COMMON, "connection": {"type": "array", "items": _MATRIX}},
    "additionalProperties": False,
}


@dataclass
class Bundle:
    """A parsed file: exactly one of ``tower`` / ``connection`` is set."""

    tower: Optional[Tower] = None
    connection: Optional[Connection] = None
    split: Optional[Tuple[str, ...]] = None
    embedding: Optional[List[Tuple[Poly, ...]]] = None
    embedding_vars: Optional[Tuple[str, ...]] = None
    digest: str = ""

    @property
    def kind(self) -> str:
        return "tower" if self.tower is not None else "connection"


def _pointer(path: Sequence) -> str:
    return "/" + "/".join(str(x) for x in path) if path else "/"


def _check_schema(obj, schema):
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ParseError(f"schema violation at {_pointer(list(e.absolute_path))}: {e.message}")


def _matrix(raw, p, variables, rank, where) -> PolyMatrix:
    if len(raw) != rank or any(len(row) != rank for row in raw):
        raise ValidationError(f"{where} is not {rank}x{rank}")
    rows = []
    for i, row in enumerate(raw):
        out = []
        for j, text in enumerate(row):
            try:
                out.append(parse_poly(text, variables, p))
            except StratError as exc:
                raise ParseError(f"at {where}/{i}/{j}: {exc}") from exc
        rows.append(tuple(out))
    return tuple(rows)


def bundle_from_obj(obj, digest: str = "") -> Bundle:
    if not isinstance(obj, dict):
        raise ParseError("schema violation at /: top level must be an object")
    is_conn = "connection" in obj
    _check_schema(obj, CONNECTION_SCHEMA if is_conn else TOWER_SCHEMA)
    p = check_prime(obj["p"])
    fiber, base = tuple(obj["fiber_vars"]), tuple(obj["base_vars"])
    variables = fiber + base
    if len(set(variables)) != len(variables):
        raise ValidationError("variable names must be distinct")
    r = obj["rank"]
    if is_conn:
        mats = obj["connection"]
        if len(mats) != len(fiber):
            raise ValidationError("/connection needs one matrix per fiber variable")
        conn = Connection(p, fiber, base, r,
                          tuple(_matrix(m, p, variables, r, f"/connection/{i}") for i, m in enumerate(mats)))
        return Bundle(connection=conn, digest=digest)
    sig = tuple(_matrix(m, p, variables, r, f"/sigmas/{i}") for i, m in enumerate(obj["sigmas"]))
    tower = Tower(p, fiber, base, obj["mode"], r, sig)
    split = tuple(obj["split"]) if "split" in obj else None
    embedding, embedding_vars = None, None
    if "embedding" in obj:
        embedding_vars = tuple(obj.get("embedding_vars", variables))
        embedding = []
        for j, col in enumerate(obj["embedding"]):
            if not col or (embedding and len(col) != len(embedding[0])):
                raise ValidationError(f"/embedding/{j} has the wrong number of entries")
            try:
                embedding.append(tuple(parse_poly(x, embedding_vars, p) for x in col))
            except StratError as exc:
                raise ParseError(f"at /embedding/{j}: {exc}") from exc
    return Bundle(tower=tower, split=split, embedding=embedding, embedding_vars=embedding_vars, digest=digest)


def parse_bundle(path: Union[str, Path]) -> Bundle:
    data = Path(path).read_bytes()
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid JSON at /: {exc}") from exc
    return bundle_from_obj(obj, hashlib.sha256(data).hexdigest())


def parse_tower(path) -> Tower:
    b = parse_bundle(path)
    if b.tower is None:
        raise ValidationError("expected a tower file")
    return b.tower


def _strings(M: PolyMatrix):
    return [[str(e) for e in row] for row in M]


def tower_to_obj(t: Tower, split=None, embedding=None) -> dict:
    obj = {
        "p": t.p,
        "fiber_vars": list(t.fiber_vars),
        "base_vars": list(t.base_vars),
        "mode": t.mode,
        "rank": t.rank,
        "sigmas": [_strings(S) for S in t.sigmas],
    }
    if split is not None:
        obj["split"] = list(split)
    if embedding is not None:
        obj["embedding"] = [[str(f) for f in col] for col in embedding]
        if embedding:
            obj["embedding_vars"] = list(embedding[0][0].vars)
    return obj


def connection_to_obj(c: Connection) -> dict:
    return {
        "p": c.p,
        "fiber_vars": list(c.fiber_vars),
        "base_vars": list(c.base_vars),
        "rank": c.rank,
        "connection": [_strings(A) for A in c.matrices],
    }


def _format(obj, indent: int) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(k)}: {_format(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if all(not isinstance(x, (list, dict)) for x in obj):
            return json.dumps(obj)
        items = [pad + "  " + _format(x, indent + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(obj)


def dumps(obj) -> str:
    """Canonical text: 2-space indent, innermost lists on one line, trailing newline."""
    return _format(obj, 0) + "\n"


def serialize_bundle(item: Union[Tower, Connection, Bundle], path=None) -> str:
    if isinstance(item, Bundle):
        obj = tower_to_obj(item.tower, item.split, item.embedding) if item.tower is not None \
            else connection_to_obj(item.connection)
    elif isinstance(item, Tower):
        obj = tower_to_obj(item)
    else:
        obj = connection_to_obj(item)
    text = dumps(obj)
    if path is not None:
        Path(path).write_text(text)
    return text


def resolve_split(b: Bundle) -> Tuple[Tower, RelativeSplit]:
    """Tower re-expressed as (fiber vars, base vars) according to the file's split.

    For absolute towers moving a variable between fiber and base changes
    nothing mathematically, so the variables are simply reordered.  A
    relative tower's split must be its own base.
    """
    t = b.tower
    if t is None:
        raise ValidationError("expected a tower file")
    if b.split is None or tuple(b.split) == t.base_vars:
        return t, RelativeSplit(t.fiber_vars, t.base_vars)
    base = tuple(b.split)
    unknown = [v for v in base if v not in t.variables]
    if unknown:
        raise ValidationError(f"split names unknown variables {unknown}")
    if t.mode != "absolute":
        raise ValidationError("the split of a relative tower must equal its base variables")
    fiber = tuple(v for v in t.variables if v not in base)
    variables = fiber + base
    sig = tuple(mat_with_vars(S, variables) for S in t.sigmas)
    return Tower(t.p, fiber, base, "absolute", t.rank, sig), RelativeSplit(fiber, base)
