"""Polyhedral pairs, face pairs and their left/right incidences.

A polyhedral pair identifies the star of a vertex of ``X1`` with the star of
a vertex of ``X2`` through a colour-preserving isomorphism.  A face pair
does the same for the hyperplane trees dual to two edges.  Every pair is
kept with its identification: triples that differ only in the isomorphism
are different pairs.
"""
from __future__ import annotations

import itertools
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .complex import CellRef, Dart, GraphWithFins, Star, star_at

DEFAULT_CAP = 10 ** 6
CAP_ENV = "FINCOVER_PAIR_CAP"

ColourFn = Callable[[int, str, object], int]


class PairCapExceeded(RuntimeError):
    def __init__(self, what, count, cap):
        super().__init__("%s: more than %d pairs (reached %d); raise %s to allow more" % (what, cap, count, CAP_ENV))
        self.what = what
        self.count = count
        self.cap = cap


class IncidenceError(RuntimeError):
    """A star slot has no matching face pair, or a face pair has an empty side."""


def pair_cap() -> int:
    return int(os.environ.get(CAP_ENV, DEFAULT_CAP))


@dataclass(frozen=True)
class StarIso:
    source: str
    target: str
    darts: Tuple[Tuple[Dart, Dart], ...]
    corners: Tuple[Tuple[CellRef, CellRef], ...]

    @cached_property
    def dart_map(self) -> Dict[Dart, Dart]:
        return dict(self.darts)

    @cached_property
    def corner_map(self) -> Dict[CellRef, CellRef]:
        return dict(self.corners)


@dataclass(frozen=True)
class PolyPair:
    id: int
    u1: str
    u2: str
    sigma: StarIso


@dataclass(frozen=True)
class FacePair:
    id: int
    e1: str
    e2: str
    tau: Tuple[Tuple[CellRef, CellRef], ...]

    @property
    def key(self):
        return (self.e1, self.e2, self.tau)


def _corner_table(s: Star, side: int, c: ColourFn):
    """Counter of oriented corner keys per ordered dart pair."""
    table = defaultdict(Counter)
    for cn in s.corners:
        x, y = s.corner_darts[cn]
        cc = c(side, "C", cn)
        sx = c(side, "S", s.half_squares[(cn, x)])
        sy = c(side, "S", s.half_squares[(cn, y)])
        table[(x, y)][(cc, sx, sy)] += 1
        table[(y, x)][(cc, sy, sx)] += 1
    return table


def _corner_groups(s: Star, side: int, c: ColourFn, dart_image=None):
    groups = defaultdict(list)
    for cn in s.corners:
        x, y = s.corner_darts[cn]
        sx = c(side, "S", s.half_squares[(cn, x)])
        sy = c(side, "S", s.half_squares[(cn, y)])
        px, py = (dart_image[x], dart_image[y]) if dart_image else (x, y)
        if py < px:
            px, py, sx, sy = py, px, sy, sx
        groups[(px, py, c(side, "C", cn), sx, sy)].append(cn)
    return groups


def enumerate_star_isos(s1: Star, s2: Star, c: ColourFn, sides: Tuple[int, int] = (1, 2)) -> List[StarIso]:
    """All colour-preserving isomorphisms ``s1 -> s2``.

    Darts are matched by backtracking in sorted order, pruning as soon as
    two assigned darts carry incompatible corners; corners with the same
    image dart pair and colours are then permuted freely.
    """
    a, b = sides
    if c(a, "V", s1.center) != c(b, "V", s2.center):
        return []
    if len(s1.darts) != len(s2.darts) or len(s1.corners) != len(s2.corners):
        return []
    col1 = {d: c(a, "D", d) for d in s1.darts}
    col2 = {d: c(b, "D", d) for d in s2.darts}
    if Counter(col1.values()) != Counter(col2.values()):
        return []
    tab1 = _corner_table(s1, a, c)
    tab2 = _corner_table(s2, b, c)
    empty = Counter()
    darts1 = sorted(s1.darts)
    candidates = {d: sorted(x for x in s2.darts if col2[x] == col1[d]) for d in darts1}
    groups2 = _corner_groups(s2, b, c)

    results = []
    assigned: List[Dart] = []
    image: Dict[Dart, Dart] = {}
    used = set()

    def extend(k):
        if k == len(darts1):
            groups1 = _corner_groups(s1, a, c, image)
            if set(groups1) != set(groups2):
                return
            keys = sorted(groups1)
            if any(len(groups1[g]) != len(groups2[g]) for g in keys):
                return
            dart_pairs = tuple((d, image[d]) for d in darts1)
            options = [
                [tuple(zip(groups1[g], perm)) for perm in itertools.permutations(groups2[g])]
                for g in keys
            ]
            for choice in itertools.product(*options):
                corners = tuple(sorted(p for block in choice for p in block))
                results.append(StarIso(s1.center, s2.center, dart_pairs, corners))
            return
        d = darts1[k]
        for x in candidates[d]:
            if x in used:
                continue
            ok = tab1.get((d, d), empty) == tab2.get((x, x), empty)
            if ok:
                for p in assigned:
                    if tab1.get((p, d), empty) != tab2.get((image[p], x), empty):
                        ok = False
                        break
            if not ok:
                continue
            image[d] = x
            used.add(x)
            assigned.append(d)
            extend(k + 1)
            assigned.pop()
            used.discard(x)
            del image[d]

    extend(0)
    return results


def _by_colour(items, colour):
    out = defaultdict(list)
    for it in items:
        out[colour(it)].append(it)
    return out


def enumerate_poly_pairs(X1: GraphWithFins, X2: GraphWithFins, c: ColourFn, cap: Optional[int] = None) -> List[PolyPair]:
    cap = pair_cap() if cap is None else cap
    v1 = _by_colour(sorted(X1.vertices), lambda v: c(1, "V", v))
    v2 = _by_colour(sorted(X2.vertices), lambda v: c(2, "V", v))
    stars2 = {v: star_at(X2, v) for v in X2.vertices}
    out = []
    for colour in sorted(v1):
        for u1 in v1[colour]:
            s1 = star_at(X1, u1)
            for u2 in v2.get(colour, ()):
                for sigma in enumerate_star_isos(s1, stars2[u2], c):
                    if len(out) >= cap:
                        raise PairCapExceeded("polyhedral pairs", len(out) + 1, cap)
                    out.append(PolyPair(len(out), u1, u2, sigma))
    return out


def enumerate_face_pairs(X1: GraphWithFins, X2: GraphWithFins, c: ColourFn, cap: Optional[int] = None) -> List[FacePair]:
    cap = pair_cap() if cap is None else cap
    e1s = _by_colour(sorted(X1.edges), lambda e: c(1, "D", Dart(e, 1)))
    e2s = _by_colour(sorted(X2.edges), lambda e: c(2, "D", Dart(e, 1)))
    out = []
    for colour in sorted(e1s):
        for e1 in e1s[colour]:
            sq1 = _by_colour(X1.squares_over[e1], lambda s: c(1, "S", s))
            for e2 in e2s.get(colour, ()):
                sq2 = _by_colour(X2.squares_over[e2], lambda s: c(2, "S", s))
                if {k: len(v) for k, v in sq1.items()} != {k: len(v) for k, v in sq2.items()}:
                    continue
                keys = sorted(sq1)
                options = [[tuple(zip(sq1[k], p)) for p in itertools.permutations(sq2[k])] for k in keys]
                for choice in itertools.product(*options):
                    tau = tuple(sorted(p for block in choice for p in block))
                    if len(out) >= cap:
                        raise PairCapExceeded("face pairs", len(out) + 1, cap)
                    out.append(FacePair(len(out), e1, e2, tau))
    return out


@dataclass
class IncidenceTable:
    left: Dict[int, List[int]]
    right: Dict[int, List[int]]
    # poly pair id -> {dart at u1: face pair id}
    slots: Dict[int, Dict[Dart, int]] = field(default_factory=dict)

    def sides(self, face_id: int) -> Tuple[List[int], List[int]]:
        return self.left.get(face_id, []), self.right.get(face_id, [])


def induced_tau(X1: GraphWithFins, X2: GraphWithFins, P: PolyPair, d: Dart):
    """Face-pair key obtained by restricting ``P`` to the slot of dart ``d``."""
    sigma = P.sigma
    d2 = sigma.dart_map[d]
    e1 = d.edge
    tau = []
    for s in X1.squares_over[e1]:
        sq = X1.squares[s]
        corner = sq.origin_corner if d.sign > 0 else sq.terminus_corner
        tau.append((s, X2.half_square(sigma.corner_map[corner], d2)))
    return (e1, d2.edge, tuple(sorted(tau))), d2


def incidences(X1: GraphWithFins, X2: GraphWithFins, P: Sequence[PolyPair], F: Sequence[FacePair]) -> IncidenceTable:
    """Which polyhedral pairs sit on the left (tail) and right (head) of each face pair."""
    index = {fp.key: fp.id for fp in F}
    left = {fp.id: [] for fp in F}
    right = {fp.id: [] for fp in F}
    slots = {}
    for p in P:
        slot = {}
        for d in sorted(p.sigma.dart_map):
            key, d2 = induced_tau(X1, X2, p, d)
            if d2.sign != d.sign:
                raise IncidenceError("pair %d maps %s to %s with opposite orientation" % (p.id, d, d2))
            fid = index.get(key)
            if fid is None:
                raise IncidenceError(
                    "pair %d: slot %s restricts to face pair %s missing from the face pair list" % (p.id, d, key[:2]))
            (left if d.sign > 0 else right)[fid].append(p.id)
            slot[d] = fid
        slots[p.id] = slot
    return IncidenceTable(left, right, slots)


def extension_counts(fp: FacePair, inc: IncidenceTable) -> Tuple[int, int]:
    n_left, n_right = (len(x) for x in inc.sides(fp.id))
    if not n_left or not n_right:
        raise IncidenceError("face pair %d (%s, %s) has an empty %s side"
                             % (fp.id, fp.e1, fp.e2, "left" if not n_left else "right"))
    return n_left, n_right


def prune_inadmissible(P: Sequence[PolyPair], F: Sequence[FacePair], inc: IncidenceTable):
    """Drop face pairs with an empty side and every polyhedral pair touching them, to a fixed point.

    Such a face pair cannot be realised by an automorphism of the universal
    cover (one would carry a star across it), and neither can a polyhedral
    pair glued along it.  Returns ``(P, F, inc, dropped_poly, dropped_face)``.
    """
    alive_p = {p.id for p in P}
    alive_f = {f.id for f in F}
    left = {f: set(v) for f, v in inc.left.items()}
    right = {f: set(v) for f, v in inc.right.items()}
    changed = True
    while changed:
        changed = False
        for f in sorted(alive_f):
            if not (left[f] & alive_p) or not (right[f] & alive_p):
                alive_f.discard(f)
                for p in (left[f] | right[f]) & alive_p:
                    alive_p.discard(p)
                changed = True
    newP = [p for p in P if p.id in alive_p]
    newF = [f for f in F if f.id in alive_f]
    new_inc = IncidenceTable(
        {f: [p for p in inc.left[f] if p in alive_p] for f in alive_f},
        {f: [p for p in inc.right[f] if p in alive_p] for f in alive_f},
        {p: s for p, s in inc.slots.items() if p in alive_p},
    )
    return newP, newF, new_inc, len(P) - len(newP), len(F) - len(newF)


def iso_count_profile(X1: GraphWithFins, X2: GraphWithFins, P: Sequence[PolyPair], c: ColourFn) -> Dict[int, Counter]:
    """Per vertex colour, a Counter of star-isomorphism counts over all ``(u1, u2)`` of that colour.

    A homogeneous class has a single key.
    """
    per = Counter((p.u1, p.u2) for p in P)
    v2 = _by_colour(X2.vertices, lambda v: c(2, "V", v))
    out = defaultdict(Counter)
    for u1 in X1.vertices:
        col = c(1, "V", u1)
        for u2 in v2.get(col, ()):
            out[col][per[(u1, u2)]] += 1
    return dict(out)
