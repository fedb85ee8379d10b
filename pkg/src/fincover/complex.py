"""Graphs with fins: data model, validation, stars, faces and subdivision.

A graph with fins is stored combinatorially: a finite graph plus a family of
closed edge paths (fin circles).  Each fin circle of length ``l`` carries an
annulus of ``l`` squares glued along the circle.  Vertical edges of the
annulus are *corners* (one per visit of the circle to a vertex) and the
squares sit over the graph edges the circle traverses.

Cells derived from fins are addressed by ``(fin_id, position)``:

* corner ``(f, i)`` sits at ``tail(d_i)`` and joins the darts
  ``reverse(d_{i-1})`` and ``d_i``;
* square ``(f, i)`` sits over the edge of ``d_i``, between corners
  ``(f, i)`` and ``(f, i + 1)``.
"""
from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple


class ComplexError(ValueError):
    """Raised for structurally invalid complexes or maps."""


class Dart(NamedTuple):
    edge: str
    sign: int  # +1 forward, -1 backward

    def reverse(self) -> "Dart":
        return Dart(self.edge, -self.sign)

    def __str__(self):
        return self.edge if self.sign > 0 else "-" + self.edge

    @classmethod
    def parse(cls, token: str) -> "Dart":
        if token.startswith("-"):
            return cls(token[1:], -1)
        if token.startswith("+"):
            return cls(token[1:], 1)
        return cls(token, 1)


CellRef = Tuple[str, int]  # (fin id, position) for corners and squares


class Corner(NamedTuple):
    fin: str
    position: int
    vertex: str
    darts: Tuple[Dart, Dart]  # (reverse of incoming dart, outgoing dart)

    @property
    def ref(self) -> CellRef:
        return (self.fin, self.position)

    @property
    def dart_pair(self) -> FrozenSet[Dart]:
        return frozenset(self.darts)


class Square(NamedTuple):
    fin: str
    position: int
    edge: str
    origin_corner: CellRef
    terminus_corner: CellRef

    @property
    def ref(self) -> CellRef:
        return (self.fin, self.position)


@dataclass(frozen=True)
class Star:
    """Closed star of a vertex: its darts, its corners and the half squares
    hanging off each corner, keyed by ``(corner, dart)``."""

    center: str
    darts: Tuple[Dart, ...]
    corners: Tuple[CellRef, ...]
    corner_darts: Mapping[CellRef, Tuple[Dart, Dart]]
    half_squares: Mapping[Tuple[CellRef, Dart], CellRef]


@dataclass(frozen=True)
class Face:
    """Vertical hyperplane dual to an edge: a star-shaped tree with one leaf
    per square over the edge."""

    edge: str
    squares: Tuple[CellRef, ...]


@dataclass(frozen=True, eq=False)
class GraphWithFins:
    vertices: Tuple[str, ...]
    edges: Mapping[str, Tuple[str, str]]
    fins: Mapping[str, Tuple[Dart, ...]] = field(default_factory=dict)
    name: str = ""
    midpoints: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", {e: tuple(ends) for e, ends in self.edges.items()})
        object.__setattr__(self, "fins", {f: tuple(Dart(*d) for d in ds) for f, ds in self.fins.items()})
        object.__setattr__(self, "midpoints", frozenset(self.midpoints))

    def __eq__(self, other):
        if not isinstance(other, GraphWithFins):
            return NotImplemented
        return (
            set(self.vertices) == set(other.vertices)
            and dict(self.edges) == dict(other.edges)
            and dict(self.fins) == dict(other.fins)
            and self.midpoints == other.midpoints
        )

    __hash__ = None

    def __repr__(self):
        return "GraphWithFins(%r: %d vertices, %d edges, fin lengths %s)" % (
            self.name, len(self.vertices), len(self.edges), sorted(len(f) for f in self.fins.values()))

    # --- dart geometry -------------------------------------------------

    def tail(self, d: Dart) -> str:
        t, h = self.edges[d.edge]
        return t if d.sign > 0 else h

    def head(self, d: Dart) -> str:
        t, h = self.edges[d.edge]
        return h if d.sign > 0 else t

    @cached_property
    def darts_at(self) -> Dict[str, Tuple[Dart, ...]]:
        out = {v: [] for v in self.vertices}
        for e, (t, h) in self.edges.items():
            out.setdefault(t, []).append(Dart(e, 1))
            out.setdefault(h, []).append(Dart(e, -1))
        return {v: tuple(sorted(ds)) for v, ds in out.items()}

    # --- fin cells -----------------------------------------------------

    @cached_property
    def corners(self) -> Dict[CellRef, Corner]:
        out = {}
        for f, path in self.fins.items():
            n = len(path)
            for i, d in enumerate(path):
                prev = path[(i - 1) % n]
                out[(f, i)] = Corner(f, i, self.tail(d), (prev.reverse(), d))
        return out

    @cached_property
    def squares(self) -> Dict[CellRef, Square]:
        out = {}
        for f, path in self.fins.items():
            n = len(path)
            for i, d in enumerate(path):
                here, there = (f, i), (f, (i + 1) % n)
                if d.sign > 0:
                    out[(f, i)] = Square(f, i, d.edge, here, there)
                else:
                    out[(f, i)] = Square(f, i, d.edge, there, here)
        return out

    @cached_property
    def corners_at(self) -> Dict[str, Tuple[CellRef, ...]]:
        out = {v: [] for v in self.vertices}
        for ref, c in self.corners.items():
            out[c.vertex].append(ref)
        return {v: tuple(sorted(cs)) for v, cs in out.items()}

    @cached_property
    def squares_over(self) -> Dict[str, Tuple[CellRef, ...]]:
        out = {e: [] for e in self.edges}
        for ref, s in self.squares.items():
            out[s.edge].append(ref)
        return {e: tuple(sorted(ss)) for e, ss in out.items()}

    def half_square(self, corner: CellRef, dart: Dart) -> CellRef:
        """Square attached to ``corner`` on the side of ``dart``."""
        f, i = corner
        c = self.corners[corner]
        if dart == c.darts[1]:
            return (f, i)
        if dart == c.darts[0]:
            return (f, (i - 1) % len(self.fins[f]))
        raise ComplexError("dart %s is not incident to corner %s" % (dart, corner))

    def is_midpoint(self, v: str) -> bool:
        return v in self.midpoints

    def fin_length_total(self) -> int:
        return sum(len(p) for p in self.fins.values())


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else "\n".join(self.violations)


def validate(X: GraphWithFins, require_connected: bool = True) -> ValidationReport:
    """Check incidences, fin composability and cyclic reducedness.

    Fin circles must be closed and cyclically reduced: no dart may be
    followed by its own reverse, the wrap-around pair included.
    """
    report = ValidationReport()
    bad = report.violations
    vset = set(X.vertices)
    if len(vset) != len(X.vertices):
        bad.append("duplicate vertex ids")
    if not X.edges:
        bad.append("graph has no edges")
    for e, (t, h) in sorted(X.edges.items()):
        for end in (t, h):
            if end not in vset:
                bad.append("edge %s: dangling endpoint %s" % (e, end))
    if not X.midpoints <= vset:
        bad.append("midpoint flags reference unknown vertices")
    for f, path in sorted(X.fins.items()):
        if not path:
            bad.append("fin %s: empty circle" % f)
            continue
        if any(d.edge not in X.edges for d in path):
            missing = sorted({d.edge for d in path if d.edge not in X.edges})
            bad.append("fin %s: unknown edge %s" % (f, ", ".join(missing)))
            continue
        if any(d.sign not in (1, -1) for d in path):
            bad.append("fin %s: dart sign must be +1 or -1" % f)
            continue
        n = len(path)
        for i, d in enumerate(path):
            nxt = path[(i + 1) % n]
            if X.head(d) != X.tail(nxt):
                bad.append("fin %s: darts at positions %d and %d are not composable" % (f, i, (i + 1) % n))
            if nxt == d.reverse():
                bad.append("fin %s: backtracking at position %d (cyclically reduced rule)" % (f, (i + 1) % n))
    if require_connected and vset and not bad:
        if len(components(X)) != 1:
            bad.append("graph is disconnected")
    return report


def check_valid(X: GraphWithFins, require_connected: bool = True) -> None:
    report = validate(X, require_connected)
    if not report.ok:
        raise ComplexError("invalid complex %r:\n%s" % (X.name, report))


def components(X: GraphWithFins) -> List[List[str]]:
    """Vertex sets of connected components, each sorted, ordered by first vertex."""
    adj = defaultdict(set)
    for t, h in X.edges.values():
        adj[t].add(h)
        adj[h].add(t)
    seen = set()
    out = []
    for v in sorted(X.vertices):
        if v in seen:
            continue
        comp = []
        queue = deque([v])
        seen.add(v)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        out.append(sorted(comp))
    return out


# ---------------------------------------------------------------------------
# stars and faces


def star_at(X: GraphWithFins, v: str) -> Star:
    if v not in X.darts_at:
        raise KeyError("unknown vertex %r" % (v,))
    corners = X.corners_at[v]
    corner_darts = {c: X.corners[c].darts for c in corners}
    halves = {}
    for c in corners:
        for d in corner_darts[c]:
            halves[(c, d)] = X.half_square(c, d)
    return Star(v, X.darts_at[v], corners, corner_darts, halves)


def face_at(X: GraphWithFins, e: str) -> Face:
    if e not in X.edges:
        raise KeyError("unknown edge %r" % (e,))
    return Face(e, X.squares_over[e])


# ---------------------------------------------------------------------------
# cell maps


class FinImage(NamedTuple):
    """Where a fin circle of a cover goes.

    Forward: dart ``j`` maps to ``d_{offset + j}``.  Reversed: dart ``j`` maps
    to ``reverse(d_{offset - j})``.
    """

    fin: str
    offset: int
    reversed: bool = False

    def dart(self, base_path: Sequence[Dart], j: int) -> Dart:
        n = len(base_path)
        if self.reversed:
            return base_path[(self.offset - j) % n].reverse()
        return base_path[(self.offset + j) % n]

    def corner(self, base_len: int, j: int) -> CellRef:
        if self.reversed:
            return (self.fin, (self.offset - j + 1) % base_len)
        return (self.fin, (self.offset + j) % base_len)

    def square(self, base_len: int, j: int) -> CellRef:
        if self.reversed:
            return (self.fin, (self.offset - j) % base_len)
        return (self.fin, (self.offset + j) % base_len)


@dataclass(eq=True)
class CellMap:
    """Cellular map between graphs with fins, given on vertices, edges
    (edge -> image dart of its forward dart) and fin circles."""

    vertices: Dict[str, str]
    edges: Dict[str, Dart]
    fins: Dict[str, FinImage]

    def dart(self, d: Dart) -> Dart:
        img = self.edges[d.edge]
        return img if d.sign > 0 else img.reverse()

    def corner(self, source: GraphWithFins, target: GraphWithFins, ref: CellRef) -> CellRef:
        f, j = ref
        img = self.fins[f]
        return img.corner(len(target.fins[img.fin]), j)

    def square(self, source: GraphWithFins, target: GraphWithFins, ref: CellRef) -> CellRef:
        f, j = ref
        img = self.fins[f]
        return img.square(len(target.fins[img.fin]), j)

    def compose(self, other: "CellMap", middle: GraphWithFins, target: GraphWithFins) -> "CellMap":
        """``other ∘ self``: first self, then other (self lands in ``middle``)."""
        fins = {}
        for f, img in self.fins.items():
            outer = other.fins[img.fin]
            n_tgt = len(target.fins[outer.fin])
            if not img.reversed and not outer.reversed:
                fins[f] = FinImage(outer.fin, (outer.offset + img.offset) % n_tgt, False)
            elif not img.reversed and outer.reversed:
                fins[f] = FinImage(outer.fin, (outer.offset - img.offset) % n_tgt, True)
            elif img.reversed and not outer.reversed:
                fins[f] = FinImage(outer.fin, (outer.offset + img.offset) % n_tgt, True)
            else:
                fins[f] = FinImage(outer.fin, (outer.offset - img.offset) % n_tgt, False)
        return CellMap(
            {v: other.vertices[w] for v, w in self.vertices.items()},
            {e: other.dart(d) for e, d in self.edges.items()},
            fins,
        )


def identity_map(X: GraphWithFins) -> CellMap:
    return CellMap(
        {v: v for v in X.vertices},
        {e: Dart(e, 1) for e in X.edges},
        {f: FinImage(f, 0, False) for f in X.fins},
    )


# ---------------------------------------------------------------------------
# subdivision


@dataclass(frozen=True)
class SubdivisionRecord:
    base: GraphWithFins
    edges: Mapping[str, Tuple[str, str, str]]  # e -> (edge A, midpoint, edge B)
    squares: Mapping[CellRef, Tuple[CellRef, CellRef]]

    @cached_property
    def midpoint_edge(self) -> Dict[str, str]:
        return {mid: e for e, (_, mid, _) in self.edges.items()}

    @cached_property
    def side(self) -> Dict[str, Tuple[str, int]]:
        """New edge -> (original edge, 0 for the tail-side half, 1 for the head side)."""
        out = {}
        for e, (a, _, b) in self.edges.items():
            out[a] = (e, 0)
            out[b] = (e, 1)
        return out


def subdivide(X: GraphWithFins) -> Tuple[GraphWithFins, SubdivisionRecord]:
    """Insert a midpoint on every edge.

    Edge ``e: u -> v`` becomes ``e.a: u -> e.mid`` and ``e.b: v -> e.mid`` so
    every new edge runs from an original vertex to a midpoint.  Fin circles
    double in length and keep their starting vertex.
    """
    check_valid(X)
    taken = set(X.vertices) | set(X.edges)
    vertices = list(X.vertices)
    edges = {}
    record_edges = {}
    for e, (t, h) in X.edges.items():
        a, mid, b = e + ".a", e + ".mid", e + ".b"
        for new in (a, mid, b):
            if new in taken:
                raise ComplexError("subdivision id %r collides with an existing id" % new)
            taken.add(new)
        vertices.append(mid)
        edges[a] = (t, mid)
        edges[b] = (h, mid)
        record_edges[e] = (a, mid, b)
    fins = {}
    square_map = {}
    for f, path in X.fins.items():
        new_path = []
        for i, d in enumerate(path):
            a, _, b = record_edges[d.edge]
            if d.sign > 0:
                new_path += [Dart(a, 1), Dart(b, -1)]
            else:
                new_path += [Dart(b, 1), Dart(a, -1)]
            square_map[(f, i)] = ((f, 2 * i), (f, 2 * i + 1))
        fins[f] = tuple(new_path)
    Xs = GraphWithFins(
        vertices, edges, fins, name=X.name,
        midpoints=frozenset(mid for _, mid, _ in record_edges.values()),
    )
    return Xs, SubdivisionRecord(X, record_edges, square_map)


def unsubdivide(
    Xhat: GraphWithFins,
    records: Sequence[SubdivisionRecord],
    maps: Sequence[CellMap],
) -> Tuple[GraphWithFins, List[CellMap]]:
    """Undo subdivision on a cover of subdivided complexes.

    ``maps[k]`` must send ``Xhat`` to the subdivision described by
    ``records[k]``.  Vertices over midpoints are merged away with their two
    darts; the first map fixes the orientation of each merged edge.
    """
    if not maps or len(records) != len(maps):
        raise ComplexError("need one subdivision record per cell map")
    rec0, phi0 = records[0], maps[0]
    mids0 = rec0.midpoint_edge
    is_mid = {v: phi0.vertices[v] in mids0 for v in Xhat.vertices}
    darts_at = Xhat.darts_at

    new_edges = {}
    new_edge_images = [dict() for _ in maps]
    merged = {}  # midpoint-fibre vertex -> (edge on A side, edge on B side)
    for v in sorted(Xhat.vertices):
        if not is_mid[v]:
            continue
        ds = darts_at[v]
        if len(ds) != 2:
            raise ComplexError(
                "vertex %s lies over a midpoint but has %d darts (expected 2)" % (v, len(ds)))
        if any(d.sign > 0 for d in ds):
            raise ComplexError("vertex %s over a midpoint is the tail of an edge" % v)
        sides = {rec0.side[phi0.edges[d.edge].edge][1]: d.edge for d in ds}
        if set(sides) != {0, 1}:
            raise ComplexError("vertex %s: both darts map to the same half-edge" % v)
        ea, eb = sides[0], sides[1]
        merged[v] = (ea, eb)
        new_edges[v] = (Xhat.edges[ea][0], Xhat.edges[eb][0])
        for k, (rec, phi) in enumerate(zip(records, maps)):
            orig, side = rec.side[phi.edges[ea].edge]
            new_edge_images[k][v] = Dart(orig, 1 if side == 0 else -1)

    edge_of = {}
    for v, (ea, eb) in merged.items():
        edge_of[ea] = (v, 0)
        edge_of[eb] = (v, 1)

    new_fins = {}
    new_fin_images = [dict() for _ in maps]
    for f, path in Xhat.fins.items():
        n = len(path)
        if n % 2:
            raise ComplexError("fin %s has odd length over a subdivided base" % f)
        r = next((i for i, d in enumerate(path) if not is_mid[Xhat.tail(d)]), None)
        if r is None:
            raise ComplexError("fin %s never visits an original vertex" % f)
        rot = path[r:] + path[:r]
        merged_path = []
        for i in range(0, n, 2):
            d_in, d_out = rot[i], rot[i + 1]
            mid = Xhat.head(d_in)
            if d_in.sign < 0 or d_out.sign > 0 or edge_of[d_in.edge][0] != mid:
                raise ComplexError("fin %s does not alternate through midpoints" % f)
            merged_path.append(Dart(mid, 1 if edge_of[d_in.edge][1] == 0 else -1))
        new_fins[f] = tuple(merged_path)
        for k, phi in enumerate(maps):
            img = phi.fins[f]
            base_len = len(records[k].base.fins[img.fin])
            if img.reversed:
                o = img.offset - r
                if o % 2 != 1:
                    raise ComplexError("fin %s: misaligned reversed image" % f)
                new_fin_images[k][f] = FinImage(img.fin, ((o - 1) // 2) % base_len, True)
            else:
                o = img.offset + r
                if o % 2:
                    raise ComplexError("fin %s: misaligned image" % f)
                new_fin_images[k][f] = FinImage(img.fin, (o // 2) % base_len, False)

    vertices = [v for v in Xhat.vertices if not is_mid[v]]
    out = GraphWithFins(vertices, new_edges, new_fins, name=Xhat.name)
    new_maps = []
    for k, phi in enumerate(maps):
        new_maps.append(CellMap(
            {v: phi.vertices[v] for v in vertices},
            new_edge_images[k],
            new_fin_images[k],
        ))
    return out, new_maps


# ---------------------------------------------------------------------------
# relabelling


def _natural_key(s: str):
    return [(0, int(t), "") if t.isdigit() else (1, 0, t) for t in re.split(r"(\d+)", s) if t]


def relabel(
    X: GraphWithFins,
    maps: Iterable[CellMap] = (),
    prefix: Tuple[str, str, str] = ("v", "e", "f"),
    name: Optional[str] = None,
) -> Tuple[GraphWithFins, List[CellMap]]:
    """Rename all cells to compact ids ``v0, e0, f0, ...`` in natural sort order.

    Each cell map (with ``X`` as its source) is rewritten accordingly.
    """
    vp, ep, fp = prefix
    vmap = {v: "%s%d" % (vp, i) for i, v in enumerate(sorted(X.vertices, key=_natural_key))}
    emap = {e: "%s%d" % (ep, i) for i, e in enumerate(sorted(X.edges, key=_natural_key))}
    fmap = {f: "%s%d" % (fp, i) for i, f in enumerate(sorted(X.fins, key=_natural_key))}
    Y = GraphWithFins(
        [vmap[v] for v in sorted(X.vertices, key=_natural_key)],
        {emap[e]: (vmap[t], vmap[h]) for e, (t, h) in sorted(X.edges.items(), key=lambda kv: _natural_key(kv[0]))},
        {fmap[f]: tuple(Dart(emap[d.edge], d.sign) for d in p)
         for f, p in sorted(X.fins.items(), key=lambda kv: _natural_key(kv[0]))},
        name=X.name if name is None else name,
        midpoints=frozenset(vmap[v] for v in X.midpoints),
    )
    new_maps = [
        CellMap(
            {vmap[v]: w for v, w in phi.vertices.items()},
            {emap[e]: d for e, d in phi.edges.items()},
            {fmap[f]: img for f, img in phi.fins.items()},
        )
        for phi in maps
    ]
    return Y, new_maps


def restrict(X: GraphWithFins, keep: Iterable[str], maps: Iterable[CellMap] = ()) -> Tuple[GraphWithFins, List[CellMap]]:
    """Subcomplex spanned by a union of connected components."""
    keep = set(keep)
    edges = {e: (t, h) for e, (t, h) in X.edges.items() if t in keep}
    fins = {f: p for f, p in X.fins.items() if X.tail(p[0]) in keep}
    Y = GraphWithFins([v for v in X.vertices if v in keep], edges, fins,
                      name=X.name, midpoints=X.midpoints & keep)
    new_maps = [
        CellMap(
            {v: w for v, w in phi.vertices.items() if v in keep},
            {e: d for e, d in phi.edges.items() if e in edges},
            {f: img for f, img in phi.fins.items() if f in fins},
        )
        for phi in maps
    ]
    return Y, new_maps
