"""Permutation-voltage lifts and seeded random instances with a known common base."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .complex import CellMap, ComplexError, Dart, FinImage, GraphWithFins, check_valid, components

Perm = Tuple[int, ...]


class GenerationError(RuntimeError):
    pass


@dataclass
class VoltageAssignment:
    """A base complex with one permutation of ``range(degree)`` per edge.

    Sheets are numbered from 1 in the ids of the lift; internally a
    permutation is a tuple ``p`` with ``p[i]`` the image of sheet ``i``.
    """

    base: GraphWithFins
    degree: int
    voltages: Dict[str, Perm]

    def __post_init__(self):
        n = self.degree
        if n < 1:
            raise ValueError("degree must be positive")
        for e in self.base.edges:
            p = self.voltages.get(e)
            if p is None or sorted(p) != list(range(n)):
                raise ValueError("voltage on edge %s is not a permutation of %d sheets" % (e, n))

    def step(self, d: Dart, sheet: int) -> Tuple[Dart, int]:
        """Lift dart ``d`` starting on ``sheet``; returns (lifted dart, sheet reached)."""
        p = self.voltages[d.edge]
        if d.sign > 0:
            return Dart(_eid(d.edge, sheet), 1), p[sheet]
        src = p.index(sheet)
        return Dart(_eid(d.edge, src), -1), src

    def holonomy(self, fin: str) -> Perm:
        n = self.degree
        out = []
        for s in range(n):
            for d in self.base.fins[fin]:
                _, s = self.step(d, s)
            out.append(s)
        return tuple(out)


def _vid(v: str, sheet: int) -> str:
    return "%s.%d" % (v, sheet + 1)


def _eid(e: str, sheet: int) -> str:
    return "%s.%d" % (e, sheet + 1)


def lift_with_map(va: VoltageAssignment) -> Tuple[GraphWithFins, CellMap]:
    B, n = va.base, va.degree
    vertices = [_vid(v, s) for v in B.vertices for s in range(n)]
    edges = {}
    emap = {}
    for e, (t, h) in B.edges.items():
        p = va.voltages[e]
        for s in range(n):
            edges[_eid(e, s)] = (_vid(t, s), _vid(h, p[s]))
            emap[_eid(e, s)] = Dart(e, 1)
    fins, fmap = {}, {}
    for f, path in B.fins.items():
        done = set()
        for s0 in range(n):
            if s0 in done:
                continue
            lifted, s = [], s0
            while True:
                done.add(s)
                for d in path:
                    ld, s = va.step(d, s)
                    lifted.append(ld)
                if s == s0:
                    break
            name = "%s.%d" % (f, s0 + 1)
            fins[name] = tuple(lifted)
            fmap[name] = FinImage(f, 0, False)
    X = GraphWithFins(vertices, edges, fins, name=(B.name + "^%d" % n) if B.name else "")
    phi = CellMap({_vid(v, s): v for v in B.vertices for s in range(n)}, emap, fmap)
    return X, phi


def lift(va: VoltageAssignment) -> GraphWithFins:
    """The degree-``n`` cover defined by the voltages, self-checked against the base."""
    from .verify import check_cover

    X, phi = lift_with_map(va)
    if va.degree == 1:
        X = GraphWithFins(list(va.base.vertices), dict(va.base.edges), dict(va.base.fins), name=va.base.name)
        return X
    cert = check_cover(X, phi, va.base)
    if not cert.ok:
        raise ComplexError("voltage lift is not a cover: %s" % cert)
    return X


def random_voltages(B: GraphWithFins, n: int, rng: random.Random) -> VoltageAssignment:
    volt = {}
    for e in sorted(B.edges):
        p = list(range(n))
        rng.shuffle(p)
        volt[e] = tuple(p)
    return VoltageAssignment(B, n, volt)


# ---------------------------------------------------------------------------
# random instances


@dataclass
class GenParams:
    max_vertices: int = 8
    max_edges: int = 12
    max_fins: int = 2
    max_fin_length: int = 6
    max_degree: int = 4  # valence cap at base vertices, keeps star automorphism groups small
    n1: Optional[int] = None
    n2: Optional[int] = None
    max_sheets: int = 4


def _random_base(p: GenParams, rng: random.Random) -> GraphWithFins:
    nv = rng.randint(1, p.max_vertices)
    names = ["b%d" % i for i in range(nv)]
    valence = {v: 0 for v in names}
    edges = {}

    def add(t, h):
        edges["x%d" % len(edges)] = (t, h)
        valence[t] += 1
        valence[h] += 1

    for i in range(1, nv):
        choices = [v for v in names[:i] if valence[v] < p.max_degree]
        add(rng.choice(choices or names[:i]), names[i])
    budget = rng.randint(len(edges) + 1, max(len(edges) + 1, p.max_edges))
    tries = 0
    while len(edges) < budget and tries < 50:
        tries += 1
        t, h = rng.choice(names), rng.choice(names)
        extra = 2 if t == h else 1
        if valence[t] + extra > p.max_degree or valence[h] + (0 if t == h else 1) > p.max_degree:
            continue
        add(t, h)
    B = GraphWithFins(names, edges, {})
    fins = {}
    for k in range(rng.randint(0, p.max_fins)):
        path = _random_circle(B, p.max_fin_length, rng)
        if path:
            fins["y%d" % len(fins)] = path
    return GraphWithFins(names, edges, fins, name="base")


def _random_circle(B: GraphWithFins, max_len: int, rng: random.Random) -> Optional[Tuple[Dart, ...]]:
    """A random cyclically reduced closed walk, or None after a bounded search."""
    if not B.edges:
        return None
    for _ in range(200):
        v = rng.choice(B.vertices)
        length = rng.randint(1, max_len)
        path, cur = [], v
        for i in range(length):
            options = [d for d in B.darts_at[cur] if not path or d != path[-1].reverse()]
            if not options:
                break
            d = rng.choice(sorted(options))
            path.append(d)
            cur = B.head(d)
        else:
            if cur == v and path[0] != path[-1].reverse():
                return tuple(path)
    return None


def _disguise(X: GraphWithFins, rng: random.Random, tag: str) -> GraphWithFins:
    """Fresh ids in random order, random edge orientations, rotated and reversed fins."""
    vs = list(X.vertices)
    rng.shuffle(vs)
    vname = {v: "%s%d" % (tag, i) for i, v in enumerate(vs)}
    es = list(X.edges)
    rng.shuffle(es)
    ename = {e: "%se%d" % (tag, i) for i, e in enumerate(es)}
    flip = {e: rng.random() < 0.5 for e in X.edges}
    edges = {}
    for e in es:
        t, h = X.edges[e]
        if flip[e]:
            t, h = h, t
        edges[ename[e]] = (vname[t], vname[h])
    fs = list(X.fins)
    rng.shuffle(fs)
    fins = {}
    for i, f in enumerate(fs):
        path = [Dart(ename[d.edge], -d.sign if flip[d.edge] else d.sign) for d in X.fins[f]]
        r = rng.randrange(len(path))
        path = path[r:] + path[:r]
        if rng.random() < 0.5:
            path = [d.reverse() for d in reversed(path)]
        fins["%sf%d" % (tag, i)] = tuple(path)
    return GraphWithFins(list(vname[v] for v in sorted(vs, key=lambda v: vname[v])), edges, fins, name=tag)


def gen_instance(params: Optional[GenParams] = None, seed: int = 0) -> Tuple[GraphWithFins, GraphWithFins]:
    """Two independent voltage lifts of one random connected base, disguised."""
    p = params or GenParams()
    rng = random.Random(seed)
    for _ in range(100):
        B = _random_base(p, rng)
        if len(B.edges) >= len(B.vertices):  # a tree has only trivial connected covers
            break
    else:
        raise GenerationError("could not draw a base with a cycle (seed %d)" % seed)
    check_valid(B)
    n1 = p.n1 if p.n1 is not None else rng.randint(1, p.max_sheets)
    n2 = p.n2 if p.n2 is not None else rng.randint(1, p.max_sheets)
    out = []
    for n, tag in ((n1, "u"), (n2, "w")):
        for attempt in range(100):
            X = lift(random_voltages(B, n, rng))
            if len(components(X)) == 1:
                break
        else:
            raise GenerationError("no connected degree-%d lift after 100 voltage draws (seed %d)" % (n, seed))
        out.append(_disguise(X, rng, tag))
    return out[0], out[1]
