"""End-to-end common-cover construction with a structured report."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .complex import ComplexError, Dart, GraphWithFins, check_valid
from .glue import CoverComplex, GluingError, assemble, extract_component, unsubdivide_cover
from .pairs import (
    IncidenceError, PairCapExceeded, enumerate_face_pairs, enumerate_poly_pairs,
    extension_counts, incidences, iso_count_profile, prune_inadmissible,
)
from .refine import MismatchCertificate, check_equivalence
from .solve import Infeasible, build_system, solve_measure, solve_positive_kernel, weights_from_measure
from .verify import Violation, check_common, check_cover

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MISMATCH = 2
EXIT_INFEASIBLE = 3
EXIT_UNVERIFIED = 4


@dataclass
class PipelineReport:
    exit_code: int = EXIT_OK
    message: str = ""
    timings: Dict[str, float] = field(default_factory=dict)
    counts: Dict[str, object] = field(default_factory=dict)
    solver: str = ""
    fallback: str = ""
    weights: Dict[int, int] = field(default_factory=dict)
    mismatch: Optional[MismatchCertificate] = None
    infeasible: Optional[Infeasible] = None
    violation: Optional[Violation] = None
    certificates: Tuple = ()
    raw: Optional[CoverComplex] = None
    cover: Optional[CoverComplex] = None

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(c.degree for c in self.certificates)

    def rows(self) -> List[Tuple[str, str]]:
        """Deterministic key/value lines (timings are left out on purpose)."""
        out = [("exit", str(self.exit_code))]
        if self.message:
            out.append(("message", self.message))
        for k, v in self.counts.items():
            out.append((k, str(v)))
        if self.solver:
            out.append(("solver", self.solver))
        if self.fallback:
            out.append(("fallback", self.fallback))
        if self.weights:
            vals = sorted(set(self.weights.values()))
            out.append(("weights", ",".join(map(str, vals))))
            out.append(("weight_sum", str(sum(self.weights.values()))))
        if self.mismatch is not None:
            for line in self.mismatch.lines():
                out.append(("mismatch", line))
        if self.infeasible is not None:
            out.append(("infeasible", str(self.infeasible)))
        if self.violation is not None:
            out.append(("violation", str(self.violation)))
        if self.certificates:
            out.append(("degrees", ",".join(str(d) for d in self.degrees)))
            out.append(("verified", "yes"))
        return out

    def render(self) -> str:
        return "".join("%s\t%s\n" % (k, v.replace("\n", " ")) for k, v in self.rows())


class _Clock:
    def __init__(self, report: PipelineReport):
        self.report = report
        self.t = time.perf_counter()

    def lap(self, stage: str):
        now = time.perf_counter()
        self.report.timings[stage] = now - self.t
        self.t = now


def edge_colour_counts(F, inc, c) -> Tuple[Dict[int, Tuple[int, int]], Optional[str]]:
    """``(nL, nR)`` per edge colour, or a reason why they are not constant."""
    seen: Dict[int, Tuple[int, int]] = {}
    for fp in F:
        col = c(1, "D", Dart(fp.e1, 1))
        n = extension_counts(fp, inc)
        if seen.setdefault(col, n) != n:
            return seen, "edge colour %d has extension counts %s and %s" % (col, seen[col], n)
    return seen, None


def _iso_count_reason(X1, X2, P, c) -> Optional[str]:
    for col, counter in sorted(iso_count_profile(X1, X2, P, c).items()):
        if len(counter) > 1:
            return "vertex colour %d has star isomorphism counts %s" % (col, sorted(counter))
    return None


def run_cover(
    X1: GraphWithFins,
    X2: GraphWithFins,
    seed: int = 0,
    solver: str = "measure",
    keep_all_components: bool = False,
) -> PipelineReport:
    """subdivide, refine, pairs, solve, glue, unsubdivide and verify."""
    rep = PipelineReport()
    clock = _Clock(rep)
    try:
        check_valid(X1)
        check_valid(X2)
    except ComplexError as exc:
        rep.exit_code, rep.message = EXIT_INPUT, "invalid input: %s" % exc
        return rep

    eq = check_equivalence(X1, X2)
    clock.lap("refine")
    if not eq.ok:
        rep.exit_code, rep.mismatch = EXIT_MISMATCH, eq
        rep.message = "universal covers differ"
        return rep
    s1, s2, c = eq.sub1, eq.sub2, eq.colouring
    rep.counts["colours"] = c.n_colours

    try:
        P = enumerate_poly_pairs(s1, s2, c)
        F = enumerate_face_pairs(s1, s2, c)
        inc = incidences(s1, s2, P, F)
    except (PairCapExceeded, IncidenceError) as exc:
        rep.exit_code, rep.message = EXIT_INFEASIBLE, str(exc)
        return rep
    rep.counts["poly_pairs"] = len(P)
    rep.counts["face_pairs"] = len(F)
    P, F, inc, dp, df = prune_inadmissible(P, F, inc)
    rep.counts["pruned_poly_pairs"] = dp
    rep.counts["pruned_face_pairs"] = df
    clock.lap("pairs")
    if not P:
        rep.exit_code, rep.message = EXIT_INFEASIBLE, "no admissible polyhedral pairs"
        return rep

    system = build_system(inc, P)
    w = None
    if solver == "measure":
        counts, why = edge_colour_counts(F, inc, c)
        if why is None:
            why = _iso_count_reason(s1, s2, P, c)
        if why is None:
            ma = solve_measure(eq.colour_graph, counts)
            if ma.ok:
                w = weights_from_measure(ma, P, c)
                if not system.is_solution(w):
                    w, why = None, "measure weighting leaves a nonzero residual"
            else:
                why = str(ma)
        if w is None:
            rep.fallback = why
            solver = "kernel"
    elif solver != "kernel":
        raise ValueError("unknown solver %r" % solver)
    if w is None:
        w = solve_positive_kernel(system)
        if not isinstance(w, dict):
            rep.exit_code, rep.infeasible = EXIT_INFEASIBLE, w
            rep.message = "gluing equations have no positive solution"
            return rep
    rep.solver = solver
    rep.weights = w
    rep.counts["max_residual"] = max((abs(r) for r in system.residuals(w)), default=0)
    clock.lap("solve")

    try:
        raw = assemble(s1, s2, P, F, inc, w, seed=seed)
    except GluingError as exc:
        rep.exit_code, rep.message = EXIT_UNVERIFIED, "assembly failed: %s" % exc
        return rep
    rep.raw = raw
    orig = sum(1 for v in raw.graph.vertices if v not in raw.graph.midpoints)
    rep.counts["assembled_vertices"] = orig
    rep.counts["assembled_stars"] = len(raw.graph.vertices)
    part = raw if keep_all_components else extract_component(raw)
    cover = unsubdivide_cover(part, [eq.record1, eq.record2])
    rep.cover = cover
    G = cover.graph
    rep.counts["cover"] = "%d vertices, %d edges, %d fins" % (len(G.vertices), len(G.edges), len(G.fins))
    clock.lap("glue")

    if keep_all_components:
        res = (check_cover(G, cover.phi1, X1), check_cover(G, cover.phi2, X2))
        bad = [r for r in res if not r.ok]
        res = bad[0] if bad else res
    else:
        res = check_common(G, cover.phi1, X1, cover.phi2, X2)
    clock.lap("verify")
    if isinstance(res, Violation):
        rep.exit_code, rep.violation = EXIT_UNVERIFIED, res
        rep.message = "verification failed (possible inadmissible pair)"
        return rep
    rep.certificates = res
    return rep
