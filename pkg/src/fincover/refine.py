"""Joint colour refinement of two subdivided graphs with fins.

The stable colouring of ``X1 ⊔ X2`` plays the role of the quotient of the
common universal cover by its colour-preserving automorphism group: cells
of equal colour look alike from arbitrarily far away.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .complex import Dart, GraphWithFins, check_valid, subdivide

# cell keys: (side, kind, ident) with kind in V, D, C, S
Cell = Tuple[int, str, object]
KIND_ORDER = {"V": 0, "D": 1, "C": 2, "S": 3}


@dataclass
class RelationalStructure:
    cells: List[Cell]
    relations: Dict[Cell, List[Tuple[str, Tuple[Cell, ...]]]]
    initial: Dict[Cell, tuple]


def relational_structure(X1: GraphWithFins, X2: GraphWithFins) -> RelationalStructure:
    cells = []
    rel = {}
    initial = {}
    for side, X in ((1, X1), (2, X2)):
        def add(kind, ident, init):
            key = (side, kind, ident)
            cells.append(key)
            rel[key] = []
            initial[key] = init
            return key

        for v in X.vertices:
            add("V", v, ("V", X.is_midpoint(v)))
        for e in X.edges:
            add("D", Dart(e, 1), ("D",))
            add("D", Dart(e, -1), ("D",))
        for ref in X.corners:
            add("C", ref, ("C",))
        for ref in X.squares:
            add("S", ref, ("S",))

        V = lambda v: (side, "V", v)  # noqa: E731
        D = lambda d: (side, "D", d)  # noqa: E731
        C = lambda c: (side, "C", c)  # noqa: E731
        S = lambda s: (side, "S", s)  # noqa: E731
        for e in X.edges:
            for d in (Dart(e, 1), Dart(e, -1)):
                t, h = X.tail(d), X.head(d)
                rel[D(d)] += [("tail", (V(t),)), ("head", (V(h),)), ("reverse", (D(d.reverse()),))]
                rel[V(t)].append(("tail-of", (D(d),)))
                rel[V(h)].append(("head-of", (D(d),)))
        for ref, c in X.corners.items():
            rel[C(ref)].append(("vertex", (V(c.vertex),)))
            rel[V(c.vertex)].append(("corner", (C(ref),)))
            for d in c.darts:
                sq = X.half_square(ref, d)
                # dart and the square on its side travel together
                rel[C(ref)].append(("side", (D(d), S(sq))))
                rel[D(d)].append(("in-corner", (C(ref),)))
        for ref, s in X.squares.items():
            fwd = Dart(s.edge, 1)
            rel[S(ref)] += [
                ("base", (D(fwd),)),
                ("origin", (C(s.origin_corner),)),
                ("terminus", (C(s.terminus_corner),)),
            ]
            rel[D(fwd)].append(("base-of", (S(ref),)))
            rel[C(s.origin_corner)].append(("origin-of", (S(ref),)))
            rel[C(s.terminus_corner)].append(("terminus-of", (S(ref),)))
    return RelationalStructure(cells, rel, initial)


@dataclass
class Colouring:
    colour: Dict[Cell, int]
    rounds: int
    signatures: Dict[int, tuple]
    kinds: Dict[int, str] = field(default_factory=dict)

    def __call__(self, side: int, kind: str, ident) -> int:
        return self.colour[(side, kind, ident)]

    @property
    def n_colours(self) -> int:
        return len(self.signatures)

    def partition(self) -> List[frozenset]:
        classes = {}
        for cell, c in self.colour.items():
            classes.setdefault(c, set()).add(cell)
        return sorted((frozenset(s) for s in classes.values()), key=lambda s: min(map(repr, s)))


def _canonical_numbering(sigs: Dict[Cell, tuple]) -> Tuple[Dict[Cell, int], Dict[int, tuple]]:
    distinct = sorted(set(sigs.values()))
    index = {s: i for i, s in enumerate(distinct)}
    return {cell: index[s] for cell, s in sigs.items()}, dict(enumerate(distinct))


def refine_round(rs: RelationalStructure, colour: Dict[Cell, int]) -> Dict[Cell, tuple]:
    sigs = {}
    for cell in rs.cells:
        nbrs = sorted(
            (label, tuple(colour[x] for x in group)) for label, group in rs.relations[cell]
        )
        sigs[cell] = (colour[cell], tuple(nbrs))
    return sigs


def stable_colouring(X1: GraphWithFins, X2: GraphWithFins) -> Colouring:
    """Coarsest stable refinement of the cell-type partition of ``X1 ⊔ X2``.

    Colour ids are numbered by sorted signature, so they do not depend on
    cell names.
    """
    for X in (X1, X2):
        check_valid(X)
        _check_subdivided(X)
    rs = relational_structure(X1, X2)
    colour, table = _canonical_numbering({c: rs.initial[c] for c in rs.cells})
    rounds = 0
    while True:
        sigs = refine_round(rs, colour)
        new_colour, new_table = _canonical_numbering(sigs)
        rounds += 1
        if len(new_table) == len(table):
            break
        colour, table = new_colour, new_table
    # the last round did not split anything: record its signatures
    colour, table = new_colour, new_table
    kinds = {c: cell[1] for cell, c in colour.items()}
    return Colouring(colour, rounds, table, kinds)


def _check_subdivided(X: GraphWithFins) -> None:
    for e, (t, h) in X.edges.items():
        if X.is_midpoint(t) or not X.is_midpoint(h):
            raise ValueError("%r is not subdivided: edge %s must run original -> midpoint" % (X.name, e))


# ---------------------------------------------------------------------------
# colour graph


@dataclass
class ColourGraph:
    """Quotient of ``X1 ⊔ X2`` by a colouring.

    ``edge_colours`` maps the colour of each forward dart to the pair
    (tail colour, head colour).
    """

    vertex_colours: Dict[int, bool]  # colour -> is midpoint type
    edge_colours: Dict[int, Tuple[int, int]]
    corner_colours: Dict[int, Tuple[int, Tuple[int, int]]] = field(default_factory=dict)
    square_colours: Dict[int, Tuple[int, int, int]] = field(default_factory=dict)
    multiplicity: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    kinds: Dict[int, str] = field(default_factory=dict)

    def vertex_multiplicity(self, c: int) -> Tuple[int, int]:
        return self.multiplicity.get(c, (0, 0))

    def spanning_tree(self, root: Optional[int] = None):
        """BFS tree over vertex colours; returns (parent edge per colour, order)."""
        adj = {c: [] for c in self.vertex_colours}
        for ec, (a, b) in sorted(self.edge_colours.items()):
            adj[a].append((ec, b, +1))
            adj[b].append((ec, a, -1))
        root = min(self.vertex_colours) if root is None else root
        parent = {root: None}
        order = [root]
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for ec, y, direction in adj[x]:
                if y not in parent:
                    parent[y] = (ec, x, direction)
                    order.append(y)
                    queue.append(y)
        return parent, order


def colour_quotient(X1: GraphWithFins, X2: GraphWithFins, c: Colouring) -> ColourGraph:
    mult = Counter()
    for (side, kind, ident), col in c.colour.items():
        mult[(col, side)] += 1
    multiplicity = {col: (mult[(col, 1)], mult[(col, 2)]) for col in c.signatures}
    vertex_colours, edge_colours, corner_colours, square_colours = {}, {}, {}, {}
    for side, X in ((1, X1), (2, X2)):
        for v in X.vertices:
            vertex_colours[c(side, "V", v)] = X.is_midpoint(v)
        for e in X.edges:
            d = Dart(e, 1)
            edge_colours[c(side, "D", d)] = (c(side, "V", X.tail(d)), c(side, "V", X.head(d)))
        for ref, cn in X.corners.items():
            pair = tuple(sorted(c(side, "D", d) for d in cn.darts))
            corner_colours[c(side, "C", ref)] = (c(side, "V", cn.vertex), pair)
        for ref, sq in X.squares.items():
            square_colours[c(side, "S", ref)] = (
                c(side, "D", Dart(sq.edge, 1)),
                c(side, "C", sq.origin_corner),
                c(side, "C", sq.terminus_corner),
            )
    return ColourGraph(vertex_colours, edge_colours, corner_colours, square_colours, multiplicity, dict(c.kinds))


# ---------------------------------------------------------------------------
# equivalence check


@dataclass
class MismatchCertificate:
    """Colours present in one complex but absent from the other."""

    mismatches: List[dict]
    ok = False

    @property
    def primary(self) -> dict:
        return self.mismatches[0]

    def lines(self) -> List[str]:
        out = []
        for m in self.mismatches:
            desc = "colour %d (%s)" % (m["colour"], m["description"])
            out.append("%s: multiplicity %d in X1, %d in X2" % (desc, m["multiplicity"][0], m["multiplicity"][1]))
        return out

    def __str__(self):
        return "\n".join(self.lines())


@dataclass
class CommonBase:
    X1: GraphWithFins
    X2: GraphWithFins
    sub1: GraphWithFins
    sub2: GraphWithFins
    record1: object
    record2: object
    colouring: Colouring
    colour_graph: ColourGraph
    ok = True


def _describe(kind: str, col: int, X1: GraphWithFins, X2: GraphWithFins, c: Colouring) -> str:
    for side, X in ((1, X1), (2, X2)):
        if kind == "V":
            for v in X.vertices:
                if c(side, "V", v) == col:
                    t = "midpoint" if X.is_midpoint(v) else "original"
                    ncorner = len(X.corners_at[v])
                    return "%s vertex of degree %d with %d corners" % (t, len(X.darts_at[v]), ncorner)
        elif kind == "D":
            for e in X.edges:
                for d in (Dart(e, 1), Dart(e, -1)):
                    if c(side, "D", d) == col:
                        return "%s dart" % ("forward" if d.sign > 0 else "backward")
        elif kind == "C":
            return "corner"
        elif kind == "S":
            return "square"
    return kind


def check_equivalence(X1: GraphWithFins, X2: GraphWithFins):
    """Decide whether the stable colourings of X1 and X2 use the same colours.

    Inputs are taken unsubdivided.  Returns a :class:`CommonBase` on success,
    otherwise a :class:`MismatchCertificate` listing every colour with zero
    multiplicity on one side (vertex colours first).
    """
    check_valid(X1)
    check_valid(X2)
    s1, r1 = subdivide(X1)
    s2, r2 = subdivide(X2)
    col = stable_colouring(s1, s2)
    cg = colour_quotient(s1, s2, col)
    bad = []
    for c_id, (n1, n2) in cg.multiplicity.items():
        if n1 == 0 or n2 == 0:
            kind = col.kinds[c_id]
            bad.append({
                "colour": c_id,
                "kind": kind,
                "multiplicity": (n1, n2),
                "description": _describe(kind, c_id, s1, s2, col),
                "signature": col.signatures[c_id],
            })
    if bad:
        bad.sort(key=lambda m: (KIND_ORDER[m["kind"]], m["colour"]))
        return MismatchCertificate(bad)
    return CommonBase(X1, X2, s1, s2, r1, r2, col, cg)
