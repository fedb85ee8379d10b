"""Assembling covers from weighted copies of polyhedral pairs."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .complex import (
    CellMap, ComplexError, Dart, FinImage, GraphWithFins, SubdivisionRecord,
    components, relabel, restrict, subdivide, unsubdivide,
)
from .pairs import FacePair, IncidenceTable, PolyPair, StarIso, incidences
from .solve import build_system


class GluingError(RuntimeError):
    pass


@dataclass
class CoverComplex:
    graph: GraphWithFins
    phi1: CellMap
    phi2: Optional[CellMap] = None
    provenance: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    @property
    def maps(self) -> List[CellMap]:
        return [m for m in (self.phi1, self.phi2) if m is not None]


def _copies(ids, w):
    return [(p, k) for p in sorted(ids) for k in range(w[p])]


def _vid(p: int, k: int) -> str:
    return "p%d.%d" % (p, k)


def assemble(
    X1: GraphWithFins,
    X2: GraphWithFins,
    P: Sequence[PolyPair],
    F: Sequence[FacePair],
    inc: IncidenceTable,
    w: Mapping[int, int],
    seed: int = 0,
    shuffle: Optional[bool] = None,
) -> CoverComplex:
    """Glue ``w[P]`` copies of every polyhedral pair along face-pair bijections.

    For each face pair the left copies and right copies are sorted by
    ``(pair id, copy index)``; with ``shuffle`` (default: ``seed != 0``) the
    right copies are permuted by a ``random.Random(seed)`` stream consumed in
    face-pair order.  Fin circles are recovered by lifting each base fin
    circle of ``X1`` corner by corner until it closes.
    """
    system = build_system(inc, P)
    if not system.is_solution(w):
        bad = [system.rows[i] for i, r in enumerate(system.residuals(w)) if r]
        raise GluingError("weighting violates the gluing equations on face pairs %s" % bad[:10])
    if shuffle is None:
        shuffle = seed != 0
    rng = random.Random(seed)
    pairs = {p.id: p for p in P}

    vertices, vmap1, vmap2, prov = [], {}, {}, {}
    for p in P:
        for k in range(w[p.id]):
            v = _vid(p.id, k)
            vertices.append(v)
            vmap1[v] = p.u1
            vmap2[v] = p.u2
            prov[v] = (p.id, k)

    edges, emap1, emap2 = {}, {}, {}
    step = {}  # (cover vertex, X1 dart) -> (cover dart, next cover vertex)
    for fp in sorted(F, key=lambda f: f.id):
        left = _copies(inc.left[fp.id], w)
        right = _copies(inc.right[fp.id], w)
        if len(left) != len(right):
            raise GluingError("face pair %d: %d left copies, %d right copies" % (fp.id, len(left), len(right)))
        if shuffle:
            rng.shuffle(right)
        for (p, k), (q, l) in zip(left, right):
            a, b = _vid(p, k), _vid(q, l)
            e = "%s/%s" % (a, fp.e1)
            edges[e] = (a, b)
            emap1[e] = Dart(fp.e1, 1)
            emap2[e] = Dart(fp.e2, 1)
            step[(a, Dart(fp.e1, 1))] = (Dart(e, 1), b)
            step[(b, Dart(fp.e1, -1))] = (Dart(e, -1), a)

    fins, fmap1, fmap2 = {}, {}, {}
    seen = set()
    for v in vertices:
        u1 = vmap1[v]
        for start in X1.corners_at[u1]:
            if (v, start) in seen:
                continue
            f, i0 = start
            base = X1.fins[f]
            path = []
            cur, i = v, i0
            while True:
                if (cur, (f, i)) in seen:
                    raise GluingError("corner chain from %s %s re-entered %s before closing" % (v, start, (cur, (f, i))))
                seen.add((cur, (f, i)))
                try:
                    dart, cur = step[(cur, base[i])]
                except KeyError:
                    raise GluingError("corner chain from %s %s broke at %s (no slot for dart %s)" % (v, start, cur, base[i]))
                path.append(dart)
                i = (i + 1) % len(base)
                if cur == v and i == i0:
                    break
            name = "w%d" % len(fins)
            fins[name] = tuple(path)
            fmap1[name] = FinImage(f, i0, False)
            fmap2[name] = _second_image(X2, pairs[prov[v][0]].sigma, start, base[i0], name)

    graph = GraphWithFins(vertices, edges, fins, name="cover", midpoints=frozenset(
        v for v in vertices if X1.is_midpoint(vmap1[v])))
    phi1 = CellMap(vmap1, emap1, fmap1)
    phi2 = CellMap(vmap2, emap2, fmap2)
    return CoverComplex(graph, phi1, phi2, prov)


def _second_image(X2: GraphWithFins, sigma: StarIso, corner, dart: Dart, name: str) -> FinImage:
    g, j = sigma.corner_map[corner]
    d2 = sigma.dart_map[dart]
    path2 = X2.fins[g]
    if path2[j] == d2:
        return FinImage(g, j, False)
    if path2[(j - 1) % len(path2)].reverse() == d2:
        return FinImage(g, (j - 1) % len(path2), True)
    raise GluingError("fin %s: star isomorphism does not carry the fin corner to a fin corner" % name)


def extract_component(cc: CoverComplex, anchor: Optional[str] = None) -> CoverComplex:
    """Connected component of ``anchor``; by default the smallest component
    (ties broken by smallest vertex id)."""
    comps = components(cc.graph)
    if anchor is not None:
        if anchor not in set(cc.graph.vertices):
            raise KeyError("unknown anchor vertex %r" % (anchor,))
        comp = next(c for c in comps if anchor in c)
    else:
        comp = min(comps, key=lambda c: (len(c), c[0]))
    if len(comp) == len(cc.graph.vertices):
        return cc
    graph, maps = restrict(cc.graph, comp, cc.maps)
    keep = set(comp)
    return CoverComplex(
        graph, maps[0], maps[1] if len(maps) > 1 else None,
        {v: p for v, p in cc.provenance.items() if v in keep},
    )


def unsubdivide_cover(cc: CoverComplex, records: Sequence[SubdivisionRecord], compact: bool = True) -> CoverComplex:
    """Undo subdivision of a cover of subdivided bases; optionally relabel to compact ids."""
    graph, maps = unsubdivide(cc.graph, list(records)[:len(cc.maps)], cc.maps)
    prov = {v: p for v, p in cc.provenance.items() if v in set(graph.vertices)}
    if compact:
        order = sorted(graph.vertices, key=lambda v: prov.get(v, (0, 0)))
        rank = {v: "%06d" % i for i, v in enumerate(order)}
        # relabel sorts naturally; feed it provenance-ordered names
        staged = GraphWithFins(
            [rank[v] for v in graph.vertices],
            {e: (rank[t], rank[h]) for e, (t, h) in graph.edges.items()},
            graph.fins, name=graph.name,
        )
        staged_maps = [CellMap({rank[v]: x for v, x in m.vertices.items()}, m.edges, m.fins) for m in maps]
        graph2, maps2 = relabel(staged, staged_maps)
        back = {("v%d" % i): prov.get(v) for i, v in enumerate(order)}
        prov = {k: p for k, p in back.items() if p is not None}
        graph, maps = graph2, maps2
    return CoverComplex(graph, maps[0], maps[1] if len(maps) > 1 else None, prov)


def identity_pairs(Xs: GraphWithFins):
    """Polyhedral and face pairs of ``Xs`` with itself under the identity."""
    P = []
    for v in sorted(Xs.vertices):
        darts = tuple((d, d) for d in sorted(Xs.darts_at[v]))
        corners = tuple((c, c) for c in Xs.corners_at[v])
        P.append(PolyPair(len(P), v, v, StarIso(v, v, darts, corners)))
    F = []
    for e in sorted(Xs.edges):
        F.append(FacePair(len(F), e, e, tuple((s, s) for s in Xs.squares_over[e])))
    return P, F


def n_fold_cover(X: GraphWithFins, n: int, seed: int = 0) -> CoverComplex:
    """Degree-``n`` cover from ``n`` copies of every star, glued across each
    face by a permutation drawn from ``random.Random(seed)``."""
    from .verify import check_cover

    if n < 1:
        raise ValueError("degree must be a positive integer")
    Xs, rec = subdivide(X)
    P, F = identity_pairs(Xs)
    inc = incidences(Xs, Xs, P, F)
    w = {p.id: n for p in P}
    raw = assemble(Xs, Xs, P, F, inc, w, seed=seed, shuffle=True)
    raw = CoverComplex(raw.graph, raw.phi1, None, raw.provenance)
    cover = unsubdivide_cover(raw, [rec])
    cert = check_cover(cover.graph, cover.phi1, X)
    if not cert.ok:
        raise ComplexError("n-fold construction failed local verification: %s" % cert)
    return cover
