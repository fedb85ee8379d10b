"""Acceptance criteria, one test each; ``pytest`` prints a PASS/FAIL line per criterion."""
import itertools
import random
import re
import time

import networkx as nx
import pytest

from fincover import io
from fincover.cli import main
from fincover.complex import GraphWithFins, identity_map, subdivide, unsubdivide
from fincover.generate import gen_instance
from fincover.glue import n_fold_cover
from fincover.pairs import enumerate_poly_pairs
from fincover.pipeline import EXIT_MISMATCH, run_cover
from fincover.refine import check_equivalence
from fincover.verify import BallCanonizer, Violation, check_common, check_cover, isomorphic

from conftest import MUTATIONS, mutate

LOCATED = re.compile(r"\b(vertex|edge|fin)\b \S+")


@pytest.mark.criterion(1)
def test_pipeline_soundness_at_scale():
    """200 generated instances: exit 0, both maps certified, zero residuals, under 60 s."""
    start = time.perf_counter()
    failures = []
    for seed in range(200):
        X1, X2 = gen_instance(seed=seed)
        rep = run_cover(X1, X2, seed=seed)
        if rep.exit_code != 0 or rep.counts.get("max_residual") != 0:
            failures.append((seed, rep.exit_code, rep.message))
            continue
        # re-certify from scratch, independently of the report
        res = check_common(rep.cover.graph, rep.cover.phi1, X1, rep.cover.phi2, X2)
        if isinstance(res, Violation):
            failures.append((seed, "recheck", str(res)))
    elapsed = time.perf_counter() - start
    assert not failures, failures[:5]
    assert elapsed < 60, "took %.1f s" % elapsed


@pytest.mark.criterion(2)
def test_k4_k33():
    """(K4, K3,3): 144 original-fibre vertices, weights 1 and 2 by pair type, 4*d1 = 6*d2, connected."""
    k4, k33 = io.load_fixture("k4"), io.load_fixture("k33")
    rep = run_cover(k4, k33, solver="measure")
    assert rep.ok and rep.solver == "measure" and not rep.fallback
    raw = rep.raw.graph
    assert len([v for v in raw.vertices if v not in raw.midpoints]) == 144
    eq = check_equivalence(k4, k33)
    P = enumerate_poly_pairs(eq.sub1, eq.sub2, eq.colouring)
    by_type = {}
    for p in P:
        by_type.setdefault(eq.sub1.is_midpoint(p.u1), set()).add(rep.weights[p.id])
    assert by_type == {False: {1}, True: {2}}
    c1, c2 = check_common(rep.cover.graph, rep.cover.phi1, k4, rep.cover.phi2, k33)
    assert 4 * c1.degree == 6 * c2.degree


@pytest.mark.criterion(3)
def test_nfold_three_on_every_fixture(capsys):
    """nfold 3 on every fixture is a certified degree-3 cover; n = 1 returns an isomorphic copy."""
    for name in io.fixture_names():
        X = io.load_fixture(name)
        for seed in (0, 1):
            cc = n_fold_cover(X, 3, seed=seed)
            cert = check_cover(cc.graph, cc.phi1, X)
            assert cert.ok and cert.degree == 3, name
        assert isomorphic(n_fold_cover(X, 1, seed=0).graph, X), name
        assert main(["nfold", "fixture:" + name, "3", "--seed", "0"]) == 0
        assert "degree\t3" in capsys.readouterr().out


def _degrees(X):
    deg = {v: 0 for v in X.vertices}
    for t, h in X.edges.values():
        deg[t] += 1
        deg[h] += 1
    return set(deg.values())


@pytest.mark.criterion(4)
def test_negative_detection(capsys):
    """(K4, C5) and every fixture pair with different vertex degrees exit 2 with a certificate, no cover."""
    names = io.fixture_names()
    pairs = [("k4", "c5")] + [
        (a, b) for a, b in itertools.combinations(names, 2)
        if _degrees(io.load_fixture(a)) != _degrees(io.load_fixture(b))
    ]
    assert len(pairs) > 10
    for a, b in pairs:
        rep = run_cover(io.load_fixture(a), io.load_fixture(b))
        assert rep.exit_code == EXIT_MISMATCH, (a, b)
        assert rep.mismatch is not None and rep.mismatch.lines()
        assert rep.raw is None and rep.cover is None and not rep.weights
    assert main(["cover", "fixture:k4", "fixture:c5"]) == EXIT_MISMATCH
    assert "mismatch\t" in capsys.readouterr().out


@pytest.mark.criterion(5)
def test_verifier_rejects_regluings():
    """100 single re-gluings of certified pipeline covers are all rejected with a located violation."""
    rejected, total = 0, 0
    seed = 0
    while total < 100:
        X1, X2 = gen_instance(seed=seed)
        rep = run_cover(X1, X2, seed=seed)
        assert rep.ok
        rng = random.Random(seed)
        got = mutate(rep.cover.graph, rep.cover.phi1, X1, rng, MUTATIONS[seed % 3])
        seed += 1
        if got is None:
            continue
        total += 1
        res = check_cover(got[0], got[1], X1)
        if isinstance(res, Violation) and LOCATED.search(str(res)):
            rejected += 1
    assert rejected == total == 100


def _atlas_graphs():
    out = []
    for k, G in enumerate(nx.graph_atlas_g()):
        if G.number_of_nodes() > 6 or G.number_of_edges() == 0 or not nx.is_connected(G):
            continue
        if max(d for _, d in G.degree()) > 3:
            continue
        vs = ["n%d" % v for v in G.nodes]
        es = {"e%d" % i: ("n%d" % a, "n%d" % b) for i, (a, b) in enumerate(G.edges)}
        out.append(GraphWithFins(vs, es, {}, name="atlas%d" % k))
    return out


@pytest.mark.criterion(6)
def test_oracle_coherence_without_fins():
    """All connected graphs with at most 6 vertices and degree at most 3: refinement agrees with ball comparison."""
    graphs = _atlas_graphs()
    assert len(graphs) > 40
    canon = BallCanonizer()
    disagree, positives = [], 0
    for X1, X2 in itertools.combinations_with_replacement(graphs, 2):
        # a ball of radius r determines every smaller ball around the same vertex
        r = 2 * max(len(X.vertices) + len(X.edges) for X in (X1, X2))
        same = set(canon.balls(X1, r).values()) == set(canon.balls(X2, r).values())
        ok = check_equivalence(X1, X2).ok
        positives += ok
        if ok != same:
            disagree.append((X1.name, X2.name))
    assert not disagree, disagree[:5]
    assert positives > len(graphs)  # some non-trivial pairs are equivalent


@pytest.mark.criterion(7)
def test_round_trips(tmp_path, capsys):
    """Subdivision round trip on 100 generated complexes, fixture text round trip, byte-identical reruns."""
    for seed in range(50):
        for X in gen_instance(seed=seed):
            s, rec = subdivide(X)
            Y, (phi,) = unsubdivide(s, [rec], [identity_map(s)])
            assert isomorphic(X, Y), seed
            assert check_cover(Y, phi, X).degree == 1
    for name in io.fixture_names():
        text = io.fixture_text(name)
        assert io.normalize(text) == text, name
    for seed in (2, 9):
        inst = tmp_path / ("inst%d.json" % seed)
        assert main(["gen", "--seed", str(seed), "--out", str(inst)]) == 0
        capsys.readouterr()
        outputs = []
        for k in range(2):
            out = tmp_path / ("run%d" % k) / "cover.json"
            assert main(["cover", str(inst), "--seed", str(seed), "--out", str(out)]) == 0
            text = capsys.readouterr().out.replace(str(out.parent), "DIR")
            files = [(out.parent / f).read_bytes() for f in ("cover.json", "cover.phi1.json", "cover.phi2.json")]
            outputs.append((text, files))
        assert outputs[0] == outputs[1]
