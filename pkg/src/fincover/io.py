"""Instance and cell-map files (JSON, schemas shipped in ``fincover/schema``) and DOT export."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import List, Optional

import jsonschema

from .complex import CellMap, Dart, FinImage, GraphWithFins

FORMAT_VERSION = 1


class ParseError(ValueError):
    pass


@dataclass
class Instance:
    complexes: List[GraphWithFins]
    expected: Optional[dict] = None
    version: int = FORMAT_VERSION


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    text = resources.files("fincover").joinpath("schema").joinpath(name + ".schema.json").read_text()
    return json.loads(text)


def _load(text: str, kind: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("line %d column %d: %s" % (exc.lineno, exc.colno, exc.msg)) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    if data.get("version") != FORMAT_VERSION:
        raise ParseError("unsupported version %r (expected %d)" % (data.get("version"), FORMAT_VERSION))
    try:
        jsonschema.validate(data, schema(kind))
    except jsonschema.ValidationError as exc:
        where = "".join("[%d]" % p if isinstance(p, int) else ".%s" % p for p in exc.absolute_path)
        raise ParseError("%s: %s" % (where.lstrip(".") or "<root>", exc.message)) from None
    return data


def dumps(obj, indent: int = 0) -> str:
    """JSON with short scalar containers kept on one line."""
    flat = json.dumps(obj)
    if not isinstance(obj, (list, dict)) or (len(flat) + indent <= 96 and not _has_dict(obj)):
        return flat
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        items = ["%s%s: %s" % (inner, json.dumps(k), dumps(v, indent + 2)) for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}" if items else "{}"
    items = [inner + dumps(v, indent + 2) for v in obj]
    return "[\n" + ",\n".join(items) + "\n" + pad + "]" if items else "[]"


def _has_dict(obj) -> bool:
    if isinstance(obj, dict):
        return bool(obj)
    return any(_has_dict(x) for x in obj) if isinstance(obj, list) else False


def complex_from_dict(d: dict, where: str = "complex") -> GraphWithFins:
    vertices = list(d["vertices"])
    vset = set(vertices)
    edges = {}
    for e, t, h in d["edges"]:
        if e in edges:
            raise ParseError("%s.edges: duplicate edge id %s" % (where, e))
        for end in (t, h):
            if end not in vset:
                raise ParseError("%s.edges: edge %s references missing vertex %s" % (where, e, end))
        edges[e] = (t, h)
    fins = {}
    for f, tokens in d.get("fins", {}).items():
        path = []
        for tok in tokens:
            dart = Dart.parse(tok)
            if dart.edge not in edges:
                raise ParseError("%s.fins.%s: references missing edge id %s" % (where, f, dart.edge))
            path.append(dart)
        fins[f] = tuple(path)
    mids = d.get("midpoints", [])
    for m in mids:
        if m not in vset:
            raise ParseError("%s.midpoints: unknown vertex %s" % (where, m))
    return GraphWithFins(vertices, edges, fins, name=d.get("name", ""), midpoints=frozenset(mids))


def complex_to_dict(X: GraphWithFins) -> dict:
    out = {"name": X.name, "vertices": list(X.vertices),
           "edges": [[e, t, h] for e, (t, h) in X.edges.items()],
           "fins": {f: [str(d) for d in p] for f, p in X.fins.items()}}
    if X.midpoints:
        out["midpoints"] = [v for v in X.vertices if v in X.midpoints]
    return out


def parse(text: str) -> Instance:
    data = _load(text, "instance")
    complexes = [complex_from_dict(c, "complexes[%d]" % i) for i, c in enumerate(data["complexes"])]
    return Instance(complexes, data.get("expected"), data["version"])


def serialize(inst: Instance) -> str:
    data = {"format": "fincover-instance", "version": inst.version,
            "complexes": [complex_to_dict(X) for X in inst.complexes]}
    if inst.expected is not None:
        data["expected"] = inst.expected
    return dumps(data) + "\n"


def normalize(text: str) -> str:
    return serialize(parse(text))


def parse_cellmap(text: str) -> CellMap:
    data = _load(text, "cellmap")
    return CellMap(
        dict(data["vertices"]),
        {e: Dart.parse(tok) for e, tok in data["edges"].items()},
        {f: FinImage(v["fin"], v["offset"], v["reversed"]) for f, v in data["fins"].items()},
    )


def serialize_cellmap(phi: CellMap) -> str:
    data = {
        "format": "fincover-cellmap", "version": FORMAT_VERSION,
        "vertices": dict(phi.vertices),
        "edges": {e: str(d) for e, d in phi.edges.items()},
        "fins": {f: {"fin": img.fin, "offset": img.offset, "reversed": img.reversed}
                 for f, img in phi.fins.items()},
    }
    return dumps(data) + "\n"


def read_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def fixture_names() -> List[str]:
    root = resources.files("fincover").joinpath("fixtures")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def fixture_text(name: str) -> str:
    return resources.files("fincover").joinpath("fixtures").joinpath(name + ".json").read_text()


def load_fixture(name: str) -> GraphWithFins:
    return parse(fixture_text(name)).complexes[0]


def _q(s: str) -> str:
    return '"%s"' % s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(X: GraphWithFins) -> str:
    """Graphviz digraph; each fin circle becomes a labelled comment line
    listing its signed edge sequence."""
    lines = ["digraph %s {" % _q(X.name or "X")]
    for v in X.vertices:
        shape = "point" if v in X.midpoints else "circle"
        lines.append("  %s [shape=%s];" % (_q(v), shape))
    for e, (t, h) in X.edges.items():
        lines.append("  %s -> %s [label=%s];" % (_q(t), _q(h), _q(e)))
    for f, path in X.fins.items():
        lines.append("  // fin %s length=%d: %s" % (f, len(path), " ".join(map(str, path))))
    lines.append("}")
    return "\n".join(lines) + "\n"
