"""Independent certification of covering maps, and a universal-cover ball oracle.

Nothing here reuses the cached incidence structures of
:class:`~fincover.complex.GraphWithFins`; darts and corners of both
complexes are re-derived from the raw vertex, edge and fin data.
"""
from __future__ import annotations

from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import networkx as nx

from .complex import CellMap, Dart, FinImage, GraphWithFins, validate


@dataclass
class Violation:
    cell: str
    reason: str
    ok = False

    def __str__(self):
        return "%s: %s" % (self.cell, self.reason)


@dataclass
class CoverCertificate:
    degree: int
    windings: Dict[str, int]
    local: Dict[str, Tuple[Dict[Dart, Dart], Dict[tuple, tuple]]] = field(repr=False, default_factory=dict)
    ok = True

    def __str__(self):
        return "cover of degree %d (fin windings %s)" % (self.degree, sorted(Counter(self.windings.values()).items()))


def _raw_darts(X: GraphWithFins) -> Dict[str, List[Dart]]:
    out = {v: [] for v in X.vertices}
    for e, (t, h) in X.edges.items():
        out[t].append(Dart(e, 1))
        out[h].append(Dart(e, -1))
    return out


def _raw_corners(X: GraphWithFins) -> Dict[str, List[Tuple[tuple, frozenset]]]:
    """vertex -> [(corner ref, frozenset of its two darts)]"""
    out = {v: [] for v in X.vertices}
    for f, path in X.fins.items():
        for i, d in enumerate(path):
            prev = path[i - 1]
            t = X.edges[d.edge][0] if d.sign > 0 else X.edges[d.edge][1]
            out[t].append(((f, i), frozenset((Dart(prev.edge, -prev.sign), d))))
    return out


def _image_dart(phi: CellMap, d: Dart) -> Dart:
    img = phi.edges[d.edge]
    return img if d.sign > 0 else Dart(img.edge, -img.sign)


def _ends(X: GraphWithFins, d: Dart) -> Tuple[str, str]:
    t, h = X.edges[d.edge]
    return (t, h) if d.sign > 0 else (h, t)


def check_cover(Xhat: GraphWithFins, phi: CellMap, X: GraphWithFins):
    """Certify that ``phi: Xhat -> X`` is a covering map of graphs with fins.

    Returns a :class:`CoverCertificate`, or the first :class:`Violation`
    found (checks run in a fixed order; within a check, cells are visited
    in sorted id order).
    """
    rep = validate(Xhat, require_connected=False)
    if not rep.ok:
        return Violation("cover", "invalid complex: " + rep.violations[0])
    rep = validate(X)
    if not rep.ok:
        return Violation("base", "invalid complex: " + rep.violations[0])

    vset = set(X.vertices)
    for v in sorted(Xhat.vertices):
        if phi.vertices.get(v) not in vset:
            return Violation("vertex " + v, "not mapped to a base vertex")
    for e in sorted(Xhat.edges):
        img = phi.edges.get(e)
        if img is None or img.edge not in X.edges or img.sign not in (1, -1):
            return Violation("edge " + e, "not mapped to a base dart")
        t, h = Xhat.edges[e]
        bt, bh = _ends(X, img)
        if phi.vertices[t] != bt or phi.vertices[h] != bh:
            return Violation("edge " + e, "incidence not preserved (%s->%s over %s->%s)" % (
                phi.vertices[t], phi.vertices[h], bt, bh))

    windings = {}
    for f in sorted(Xhat.fins):
        img = phi.fins.get(f)
        if img is None or img.fin not in X.fins:
            return Violation("fin " + f, "not mapped to a base fin")
        path, base = Xhat.fins[f], X.fins[img.fin]
        if len(path) % len(base):
            return Violation("fin " + f, "length %d is not a multiple of base length %d" % (len(path), len(base)))
        for j, d in enumerate(path):
            if _image_dart(phi, d) != img.dart(base, j):
                return Violation("fin %s position %d" % (f, j), "dart image %s disagrees with fin image %s" % (
                    _image_dart(phi, d), img.dart(base, j)))
        windings[f] = len(path) // len(base)

    darts_hat, darts = _raw_darts(Xhat), _raw_darts(X)
    corners_hat, corners = _raw_corners(Xhat), _raw_corners(X)
    base_corner_darts = {ref: ds for v in corners for ref, ds in corners[v]}
    local = {}
    for v in sorted(Xhat.vertices):
        w = phi.vertices[v]
        dmap = {d: _image_dart(phi, d) for d in darts_hat[v]}
        if sorted(dmap.values()) != sorted(darts[w]):
            extra = Counter(dmap.values()) - Counter(darts[w])
            missing = Counter(darts[w]) - Counter(dmap.values())
            return Violation("vertex " + v, "darts do not map bijectively onto the star of %s (extra %s, missing %s)" % (
                w, sorted(map(str, extra)), sorted(map(str, missing))))
        cmap = {}
        for ref, ds in corners_hat[v]:
            img = phi.fins[ref[0]]
            target = img.corner(len(X.fins[img.fin]), ref[1])
            if frozenset(_image_dart(phi, d) for d in ds) != base_corner_darts.get(target):
                return Violation("vertex %s corner %s" % (v, ref), "corner does not map onto a corner with the image dart pair")
            cmap[ref] = target
        if sorted(cmap.values()) != sorted(ref for ref, _ in corners[w]):
            return Violation("vertex " + v, "corners do not map bijectively onto the corners of %s" % w)
        local[v] = (dmap, cmap)

    fibre = Counter(phi.vertices[v] for v in Xhat.vertices)
    sizes = {fibre.get(w, 0) for w in X.vertices}
    if len(sizes) != 1 or 0 in sizes:
        w = min(X.vertices, key=lambda x: (fibre.get(x, 0), x))
        return Violation("base vertex " + w, "fibre sizes differ across base vertices: %s" % sorted(sizes))
    degree = sizes.pop()
    per_fin = Counter()
    for f, k in windings.items():
        per_fin[phi.fins[f].fin] += k
    for f in sorted(X.fins):
        if per_fin[f] != degree:
            return Violation("base fin " + f, "preimage has total winding %d, expected %d" % (per_fin[f], degree))
    return CoverCertificate(degree, windings, local)


def _connected(X: GraphWithFins) -> bool:
    if not X.vertices:
        return False
    adj = defaultdict(set)
    for t, h in X.edges.values():
        adj[t].add(h)
        adj[h].add(t)
    start = X.vertices[0]
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x] - seen:
            seen.add(y)
            queue.append(y)
    return len(seen) == len(X.vertices)


def check_common(Xhat: GraphWithFins, phi1: CellMap, X1: GraphWithFins, phi2: CellMap, X2: GraphWithFins):
    """Both maps must be covers and ``Xhat`` must be connected.

    Returns ``(cert1, cert2)`` or a :class:`Violation`.
    """
    if not _connected(Xhat):
        return Violation("cover", "not connected")
    c1 = check_cover(Xhat, phi1, X1)
    if not c1.ok:
        return Violation("map 1: " + c1.cell, c1.reason)
    c2 = check_cover(Xhat, phi2, X2)
    if not c2.ok:
        return Violation("map 2: " + c2.cell, c2.reason)
    return c1, c2


# ---------------------------------------------------------------------------
# isomorphism


def _encode(X: GraphWithFins) -> nx.DiGraph:
    """Cells as a typed digraph that does not record edge or fin directions.

    Darts hang off their tail vertex, and every square is split into two
    halves, each pairing a corner with the dart leaving it along the square.
    """
    G = nx.DiGraph()
    for v in X.vertices:
        G.add_node(("v", v), kind="v")
    for e, (t, h) in X.edges.items():
        G.add_node(("e", e), kind="e")
        for sign, tail in ((1, t), (-1, h)):
            G.add_node(("d", e, sign), kind="d")
            G.add_edge(("e", e), ("d", e, sign), label="dart")
            G.add_edge(("d", e, sign), ("v", tail), label="tail")
    for f, path in X.fins.items():
        n = len(path)
        for i, d in enumerate(path):
            t = X.edges[d.edge][0] if d.sign > 0 else X.edges[d.edge][1]
            G.add_node(("c", f, i), kind="c")
            G.add_edge(("c", f, i), ("v", t), label="at")
        for i, d in enumerate(path):
            sq = ("s", f, i)
            G.add_node(sq, kind="s")
            for end, corner, dart in ((0, i, d), (1, (i + 1) % n, d.reverse())):
                half = ("h", f, i, end)
                G.add_node(half, kind="h")
                G.add_edge(sq, half, label="half")
                G.add_edge(half, ("c", f, corner), label="corner")
                G.add_edge(half, ("d", dart.edge, dart.sign), label="along")
    return G


def _adjacency(G: nx.DiGraph):
    adj = {x: [] for x in G}
    for a, b, lab in G.edges(data="label"):
        adj[a].append((lab, 1, b))
        adj[b].append((lab, -1, a))
    return adj


def _refine(col, adj):
    """Colour refinement to a stable colouring; colours are shared by both sides."""
    count = len(set(col.values()))
    while True:
        sig = {n: (col[n], tuple(sorted((lab, d, col[(n[0], m)]) for lab, d, m in adj[n])))
               for n in col}
        palette = {k: i for i, k in enumerate(sorted(set(sig.values())))}
        col = {n: palette[sig[n]] for n in col}
        if len(palette) == count:
            return col
        count = len(palette)


def _balanced(col) -> bool:
    side = defaultdict(lambda: [0, 0])
    for (k, _), c in col.items():
        side[c][k] += 1
    return all(a == b for a, b in side.values())


def _matchings(GX: nx.DiGraph, GY: nx.DiGraph):
    """Yield structure-preserving bijections ``GX -> GY`` (labels and directions kept).

    Individualization-refinement: pin one node of the smallest ambiguous
    colour class to each candidate in turn and refine again.
    """
    if len(GX) != len(GY):
        return
    ax, ay = _adjacency(GX), _adjacency(GY)
    adj = {(0, x): ax[x] for x in GX}
    adj.update({(1, y): ay[y] for y in GY})
    kinds = sorted({GX.nodes[x]["kind"] for x in GX} | {GY.nodes[y]["kind"] for y in GY})
    col = {(0, x): kinds.index(GX.nodes[x]["kind"]) for x in GX}
    col.update({(1, y): kinds.index(GY.nodes[y]["kind"]) for y in GY})
    ex = {(a, b): lab for a, b, lab in GX.edges(data="label")}
    ey = {(a, b): lab for a, b, lab in GY.edges(data="label")}

    def search(col):
        col = _refine(col, adj)
        if not _balanced(col):
            return
        classes = defaultdict(lambda: ([], []))
        for (k, x), c in col.items():
            classes[c][k].append(x)
        open_ = [c for c, (xs, _) in classes.items() if len(xs) > 1]
        if not open_:
            m = {xs[0]: ys[0] for xs, ys in classes.values()}
            if all(ey.get((m[a], m[b])) == lab for (a, b), lab in ex.items()):
                yield m
            return
        c = min(open_, key=lambda c: (len(classes[c][0]), c))
        x = min(classes[c][0], key=str)
        fresh = max(col.values()) + 1
        for y in sorted(classes[c][1], key=str):
            nxt = dict(col)
            nxt[(0, x)] = nxt[(1, y)] = fresh
            yield from search(nxt)

    yield from search(col)


def find_isomorphism(X: GraphWithFins, Y: GraphWithFins) -> Optional[CellMap]:
    """An orientation-preserving isomorphism ``X -> Y`` as a cell map, or None.

    The search runs on a typed incidence digraph of all cells, pruned by
    joint colour refinement; the result is re-certified as a degree-one
    cover before it is returned.
    """
    if (len(X.vertices), len(X.edges), sorted(map(len, X.fins.values()))) != (
            len(Y.vertices), len(Y.edges), sorted(map(len, Y.fins.values()))):
        return None
    for m in _matchings(_encode(X), _encode(Y)):
        phi = _map_from_matching(X, Y, m)
        if phi is not None and check_cover(X, phi, Y).ok:
            return phi
    return None


def _map_from_matching(X, Y, m) -> Optional[CellMap]:
    vertices = {v: m[("v", v)][1] for v in X.vertices}
    edges = {}
    for e in X.edges:
        _, g, sign = m[("d", e, 1)]
        edges[e] = Dart(g, sign)
    fins = {}
    for f in X.fins:
        _, g, j, end = m[("h", f, 0, 0)]
        fins[f] = FinImage(g, j, False) if end == 0 else FinImage(g, j, True)
    return CellMap(vertices, edges, fins)


def isomorphic(X: GraphWithFins, Y: GraphWithFins) -> bool:
    return find_isomorphism(X, Y) is not None


# ---------------------------------------------------------------------------
# universal cover balls (graphs without fins)


@dataclass
class RootedTree:
    root: tuple
    children: Dict[tuple, List[tuple]]

    def __len__(self):
        return len(self.children)

    def depth(self) -> int:
        return max((len(p) for p in self.children), default=0)


def unfold_ball(X: GraphWithFins, v: str, r: int) -> RootedTree:
    """Non-backtracking edge paths from ``v`` of length at most ``r``, as a tree
    whose nodes are the paths themselves (tuples of darts)."""
    if X.fins:
        raise ValueError("unfold_ball is only defined for graphs without fins")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    darts = _raw_darts(X)
    root = ()
    children = {root: []}
    frontier = [(root, v)]
    for _ in range(r):
        nxt = []
        for path, x in frontier:
            for d in sorted(darts[x]):
                if path and d == Dart(path[-1].edge, -path[-1].sign):
                    continue
                child = path + (d,)
                children[path].append(child)
                children[child] = []
                nxt.append((child, _ends(X, d)[1]))
        frontier = nxt
    return RootedTree(root, children)


class BallCanonizer:
    """Shared intern table for rooted-tree shapes.

    Shapes are interned bottom-up as sorted tuples of child ids, so two
    trees are isomorphic iff they receive the same id from the same
    canonizer.
    """

    def __init__(self):
        self.table: Dict[tuple, int] = {}

    def intern(self, children_ids) -> int:
        key = tuple(sorted(children_ids))
        got = self.table.get(key)
        if got is None:
            got = self.table[key] = len(self.table)
        return got

    def tree(self, t: RootedTree) -> int:
        """Canonical id of an explicit tree (AHU, iterative post-order)."""
        ids = {}
        order = sorted(t.children, key=len, reverse=True)
        for node in order:
            ids[node] = self.intern(ids[c] for c in t.children[node])
        return ids[t.root]

    def ball(self, X: GraphWithFins, v: str, r: int) -> int:
        """Canonical id of ``unfold_ball(X, v, r)`` without building it.

        Subtrees hanging off a dart depend only on the dart and the
        remaining radius, which keeps large radii cheap.
        """
        return self.balls(X, r)[v]

    def balls(self, X: GraphWithFins, r: int) -> Dict[str, int]:
        if X.fins:
            raise ValueError("ball canonization is only defined for graphs without fins")
        darts = _raw_darts(X)
        leaf = self.intern(())
        # below[d] = id of the subtree entered through dart d with k steps left after it
        below = {d: leaf for ds in darts.values() for d in ds}
        for _ in range(max(r - 1, 0)):
            below = {
                d: self.intern(below[x] for x in darts[_ends(X, d)[1]] if x != Dart(d.edge, -d.sign))
                for d in below
            }
        if r == 0:
            return {v: leaf for v in X.vertices}
        return {v: self.intern(below[d] for d in darts[v]) for v in X.vertices}


def ball_types(X: GraphWithFins, r: int, canon: BallCanonizer) -> frozenset:
    return frozenset(canon.balls(X, r).values())
