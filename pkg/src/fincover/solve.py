"""Gluing equations and their strictly positive integer solutions.

Two routes are provided.  ``solve_measure`` assigns each vertex colour a
positive rational mass so that, across every edge colour, the mass on the
tail side times the number of left extensions equals the mass on the head
side times the number of right extensions; the weight of a polyhedral pair
is then the mass of its vertex colour.  ``solve_positive_kernel`` is a
generic exact simplex search used when the counts are not homogeneous.

All arithmetic is exact (``int`` and ``Fraction``).
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .pairs import IncidenceTable, PolyPair
from .refine import ColourGraph


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass
class GluingSystem:
    """Sparse integer matrix: one row per face pair, one column per polyhedral pair."""

    rows: List[int]
    columns: List[int]
    entries: List[Dict[int, int]]  # row index -> {column index: +1 | -1}

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.columns)

    @classmethod
    def from_dense(cls, matrix: Sequence[Sequence[int]]) -> "GluingSystem":
        ncols = len(matrix[0]) if matrix else 0
        entries = [{j: v for j, v in enumerate(row) if v} for row in matrix]
        return cls(list(range(len(matrix))), list(range(ncols)), entries)

    def dense(self) -> List[List[int]]:
        out = []
        for row in self.entries:
            r = [0] * len(self.columns)
            for j, v in row.items():
                r[j] = v
            out.append(r)
        return out

    def residuals(self, w: Mapping[int, int]) -> List[int]:
        """Row sums under a weighting keyed by column id."""
        return [sum(v * w[self.columns[j]] for j, v in row.items()) for row in self.entries]

    def is_solution(self, w: Mapping[int, int]) -> bool:
        return all(w[c] > 0 for c in self.columns) and not any(self.residuals(w))


def build_system(inc: IncidenceTable, P: Sequence[PolyPair]) -> GluingSystem:
    rows = sorted(inc.left)
    cols = [p.id for p in P]
    col_index = {c: j for j, c in enumerate(cols)}
    entries = []
    for f in rows:
        row = {}
        for p in inc.left[f]:
            row[col_index[p]] = row.get(col_index[p], 0) + 1
        for p in inc.right[f]:
            row[col_index[p]] = row.get(col_index[p], 0) - 1
        entries.append({j: v for j, v in row.items() if v})
    return GluingSystem(rows, cols, entries)


# ---------------------------------------------------------------------------
# measure route


@dataclass
class MeasureAssignment:
    vertex: Dict[int, Fraction]
    face: Dict[int, Fraction]
    root: int
    ok = True


@dataclass
class InconsistencyReport:
    """An edge colour whose ratio constraint fails around a cycle of the colour graph."""

    edge_colour: Optional[int]
    cycle: List[int]
    ratio: Optional[Fraction]
    reason: str
    ok = False

    def __str__(self):
        return self.reason


def solve_measure(cg: ColourGraph, counts: Mapping[int, Tuple[int, int]]):
    """Propagate ``m(head) = m(tail) * nL / nR`` from the smallest vertex colour.

    ``counts`` maps each edge colour to its ``(nL, nR)``.  Returns a
    :class:`MeasureAssignment`, or an :class:`InconsistencyReport` naming a
    cycle whose ratio product is not 1.
    """
    if not cg.vertex_colours:
        return InconsistencyReport(None, [], None, "empty colour graph")
    edges = {ec: cg.edge_colours[ec] for ec in sorted(counts)}
    adj = defaultdict(list)
    for ec, (a, b) in edges.items():
        nl, nr = counts[ec]
        if nl <= 0 or nr <= 0:
            return InconsistencyReport(ec, [], None, "edge colour %d has a non-positive extension count" % ec)
        adj[a].append((ec, b, Fraction(nl, nr)))
        adj[b].append((ec, a, Fraction(nr, nl)))
    root = min(cg.vertex_colours)
    m = {root: Fraction(1)}
    parent = {root: None}
    order = [root]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        for ec, y, ratio in adj[x]:
            if y not in m:
                m[y] = m[x] * ratio
                parent[y] = (ec, x)
                order.append(y)
    missing = sorted(set(cg.vertex_colours) - set(m))
    if missing:
        return InconsistencyReport(None, missing, None,
                                   "vertex colours %s are unreachable from colour %d" % (missing, root))
    tree_edges = {p[0] for p in parent.values() if p}
    for ec, (a, b) in edges.items():
        if ec in tree_edges:
            continue
        nl, nr = counts[ec]
        if m[a] * nl != m[b] * nr:
            cycle = _tree_path(parent, b, a) + [ec]
            ratio = (m[a] * nl) / (m[b] * nr)
            return InconsistencyReport(
                ec, cycle, ratio,
                "edge colour %d closes a cycle %s with ratio product %s != 1" % (ec, cycle, ratio))
    face = {ec: m[a] * counts[ec][0] for ec, (a, b) in edges.items()}
    return MeasureAssignment(m, face, root)


def _tree_path(parent, a, b) -> List[int]:
    """Edge colours on the tree path from vertex colour ``a`` to ``b``."""
    def up(x):
        chain = [x]
        while parent[x] is not None:
            x = parent[x][1]
            chain.append(x)
        return chain

    ua, ub = up(a), up(b)
    common = next(x for x in ua if x in set(ub))
    path = [parent[x][0] for x in ua[:ua.index(common)]]
    path += [parent[x][0] for x in reversed(ub[:ub.index(common)])]
    return path


def scale_to_integers(values: Mapping[object, Fraction]) -> Dict[object, int]:
    """Multiply by the least common denominator, then divide by the gcd."""
    lcd = reduce(_lcm, (Fraction(v).denominator for v in values.values()), 1)
    ints = {k: int(Fraction(v) * lcd) for k, v in values.items()}
    g = reduce(gcd, ints.values(), 0) or 1
    return {k: v // g for k, v in ints.items()}


def weights_from_measure(ma: MeasureAssignment, P: Sequence[PolyPair], c) -> Dict[int, int]:
    """ω(P) = m(colour of u1), made integral and gcd-reduced."""
    return scale_to_integers({p.id: ma.vertex[c(1, "V", p.u1)] for p in P})


# ---------------------------------------------------------------------------
# generic exact route


@dataclass
class Infeasible:
    """Row multipliers ``lam`` with ``lam·M >= 0`` componentwise and ``lam·M != 0``.

    Any ``w >= 1`` would then give ``0 = lam·M·w >= sum(lam·M) > 0``.
    """

    multipliers: Dict[int, int]  # row id -> integer multiplier
    combination: Dict[int, int] = field(default_factory=dict)  # column id -> (lam·M)_j, nonzero only
    ok = False

    def __str__(self):
        return "no strictly positive solution: row combination %s has nonnegative, nonzero coefficients %s" % (
            self.multipliers, self.combination)


def _num(x):
    """Keep integral values as ``int``; Fraction arithmetic is several times slower."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


class _Tableau:
    """Sparse exact simplex tableau.

    Pricing is Dantzig's rule (most negative reduced cost, lowest index on
    ties); after a run of degenerate pivots it switches to Bland's rule,
    which cannot cycle.
    """

    STALL = 50

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows  # list of {col: int | Fraction}
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols
        self.cost = {}
        self.value = 0
        self.pivots = 0

    def set_objective(self, c: Mapping[int, int]):
        cost = {j: v for j, v in c.items() if v}
        value = 0
        for i, b in enumerate(self.basis):
            cb = c.get(b, 0)
            if cb:
                for j, a in self.rows[i].items():
                    cost[j] = _num(cost.get(j, 0) - cb * a)
                value = _num(value - cb * self.rhs[i])
        self.cost = {j: v for j, v in cost.items() if v}
        self.value = value  # minus the objective value

    def _column(self, j):
        return [i for i, row in enumerate(self.rows) if j in row]

    def pivot(self, r, j):
        self.pivots += 1
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            if piv == -1:
                row = {k: -v for k, v in row.items()}
                self.rhs[r] = -self.rhs[r]
            else:
                row = {k: _num(Fraction(v) / piv) for k, v in row.items()}
                self.rhs[r] = _num(Fraction(self.rhs[r]) / piv)
            self.rows[r] = row
        items = list(row.items())
        for i in self._column(j):
            if i == r:
                continue
            other = self.rows[i]
            f = other[j]
            for k, v in items:
                nv = _num(other.get(k, 0) - f * v)
                if nv:
                    other[k] = nv
                else:
                    other.pop(k, None)
            self.rhs[i] = _num(self.rhs[i] - f * self.rhs[r])
        f = self.cost.get(j)
        if f:
            for k, v in items:
                nv = _num(self.cost.get(k, 0) - f * v)
                if nv:
                    self.cost[k] = nv
                else:
                    self.cost.pop(k, None)
            self.value = _num(self.value - f * self.rhs[r])
        self.basis[r] = j

    def run(self, allowed) -> str:
        stalled = 0
        while True:
            neg = [(v, j) for j, v in self.cost.items() if v < 0 and allowed(j)]
            if not neg:
                return "optimal"
            entering = min(j for _, j in neg) if stalled >= self.STALL else min(neg)[1]
            best = None
            for i in self._column(entering):
                a = self.rows[i][entering]
                if a > 0:
                    key = (Fraction(self.rhs[i]) / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            stalled = stalled + 1 if best[0][0] == 0 else 0
            self.pivot(best[1], entering)


def equitable_partition(sys: GluingSystem) -> Tuple[List[int], List[int]]:
    """Coarsest partition of rows and of columns such that every column of a
    class meets every row class with the same signed multiset of entries,
    and vice versa.  Returns class indices (rows, columns), numbered by
    first occurrence."""
    m, n = sys.shape
    cols = [[] for _ in range(n)]
    for i, row in enumerate(sys.entries):
        for j, v in row.items():
            cols[j].append((i, v))
    rc, cc = [0] * m, [0] * n
    nr = nc = 1
    while True:
        rsig = [tuple(sorted((v, cc[j]) for j, v in row.items())) for row in sys.entries]
        csig = [tuple(sorted((v, rc[i]) for i, v in col)) for col in cols]
        rc2, cc2 = _number(list(zip(rc, rsig))), _number(list(zip(cc, csig)))
        nr2, nc2 = max(rc2, default=-1) + 1, max(cc2, default=-1) + 1
        rc, cc = rc2, cc2
        if (nr2, nc2) == (nr, nc):
            return rc, cc
        nr, nc = nr2, nc2


def _number(keys) -> List[int]:
    ids = {}
    return [ids.setdefault(k, len(ids)) for k in keys]


def solve_positive_kernel(sys: GluingSystem):
    """Smallest-sum ``w`` with ``M w = 0`` and ``w >= 1``, scaled to coprime integers.

    The system is first folded along its equitable partition: class
    averages of any solution are again a solution with the same sum, so
    nothing is lost by searching among class-constant vectors.  On the
    quotient, ``x = 1 + y`` gives ``Q y = -Q·1``, ``y >= 0``; phase one
    finds a feasible basis with artificial variables, phase two minimises
    the (class-size weighted) sum of ``y``.  Returns a weighting keyed by
    column id, or :class:`Infeasible` with a Farkas certificate read off
    the phase-one duals.
    """
    m, n = sys.shape
    if n == 0:
        return {}
    rc, cc = equitable_partition(sys)
    nq, mq = max(cc) + 1, max(rc) + 1
    size = Counter(cc)
    rep_row = {}
    for i, r in enumerate(rc):
        rep_row.setdefault(r, i)
    # column j of class C meets row class R with signed count B[R][C];
    # quotient row R is sum_C B[R][C] |C| x_C = 0
    quotient = [defaultdict(int) for _ in range(mq)]
    seen_col = set()
    cols = defaultdict(list)
    for i, row in enumerate(sys.entries):
        for j, v in row.items():
            cols[j].append((i, v))
    for j in range(n):
        C = cc[j]
        if C in seen_col:
            continue
        seen_col.add(C)
        for i, v in cols[j]:
            quotient[rc[i]][C] += v * size[C]
    entries = [{C: v for C, v in q.items() if v} for q in quotient]

    rows, rhs, signs = [], [], []
    for R, entry in enumerate(entries):
        b = -sum(entry.values())
        sgn = -1 if b < 0 else 1
        row = {C: sgn * v for C, v in entry.items()}
        row[nq + R] = 1
        rows.append(row)
        rhs.append(sgn * b)
        signs.append(sgn)
    tab = _Tableau(rows, rhs, [nq + R for R in range(mq)], nq + mq)
    tab.set_objective({nq + R: 1 for R in range(mq)})
    tab.run(lambda k: True)
    if -tab.value > 0:
        # dual of row R = 1 - reduced cost of its artificial column
        duals = [1 - tab.cost.get(nq + R, 0) for R in range(mq)]
        lam = {i: -signs[rc[i]] * duals[rc[i]] for i in range(m)}
        return _certificate(sys, lam)
    # drive zero-level artificials out of the basis, dropping redundant rows
    keep = []
    for i, b in enumerate(tab.basis):
        if b >= nq:
            k = min((k for k in tab.rows[i] if k < nq), default=None)
            if k is None:
                continue
            tab.pivot(i, k)
        keep.append(i)
    tab.rows = [tab.rows[i] for i in keep]
    tab.rhs = [tab.rhs[i] for i in keep]
    tab.basis = [tab.basis[i] for i in keep]
    for row in tab.rows:
        for k in [k for k in row if k >= nq]:
            del row[k]
    tab.set_objective({C: size[C] for C in range(nq)})
    status = tab.run(lambda k: k < nq)
    if status != "optimal":
        raise ArithmeticError("phase two ended %s" % status)
    y = [0] * nq
    for i, b in enumerate(tab.basis):
        y[b] = tab.rhs[i]
    w = scale_to_integers({sys.columns[j]: 1 + y[cc[j]] for j in range(n)})
    if not sys.is_solution(w):
        raise ArithmeticError("kernel solver produced a non-solution")
    return w


def _certificate(sys: GluingSystem, lam: Mapping[int, Fraction]) -> Infeasible:
    ints = scale_to_integers({i: v for i, v in lam.items()})
    comb = defaultdict(int)
    for i, row in enumerate(sys.entries):
        if ints[i]:
            for j, v in row.items():
                comb[j] += ints[i] * v
    comb = {sys.columns[j]: v for j, v in comb.items() if v}
    if any(v < 0 for v in comb.values()) or not comb:
        raise ArithmeticError("phase-one duals did not yield a valid infeasibility certificate")
    return Infeasible({sys.rows[i]: v for i, v in ints.items() if v}, comb)
