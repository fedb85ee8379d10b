import pytest

from fincover.complex import components, subdivide
from fincover.glue import GluingError, assemble, extract_component, n_fold_cover, unsubdivide_cover
from fincover.pairs import enumerate_face_pairs, enumerate_poly_pairs, incidences
from fincover.pipeline import edge_colour_counts
from fincover.refine import check_equivalence
from fincover.solve import solve_measure, weights_from_measure
from fincover.verify import check_common, check_cover, isomorphic


def _assembled(fx, a, b, seed=0):
    eq = check_equivalence(fx(a), fx(b))
    c = eq.colouring
    P = enumerate_poly_pairs(eq.sub1, eq.sub2, c)
    F = enumerate_face_pairs(eq.sub1, eq.sub2, c)
    inc = incidences(eq.sub1, eq.sub2, P, F)
    counts, _ = edge_colour_counts(F, inc, c)
    w = weights_from_measure(solve_measure(eq.colour_graph, counts), P, c)
    return eq, assemble(eq.sub1, eq.sub2, P, F, inc, w, seed=seed), (P, F, inc, w)


def test_seg_assembly(fx):
    eq, raw, _ = _assembled(fx, "seg", "seg")
    G = raw.graph
    assert len([v for v in G.vertices if v not in G.midpoints]) == 4
    assert len(G.midpoints) == 2
    comps = components(G)
    assert len(comps) == 2
    sub, _ = subdivide(fx("seg"))
    one = extract_component(raw)
    assert isomorphic(one.graph, sub)
    assert check_common(one.graph, one.phi1, eq.sub1, one.phi2, eq.sub2)[0].degree == 1


def test_k4_k33_assembly_before_extraction(fx):
    eq, raw, _ = _assembled(fx, "k4", "k33")
    G = raw.graph
    assert len(G.vertices) == 360
    assert len([v for v in G.vertices if v not in G.midpoints]) == 144
    assert check_cover(G, raw.phi1, eq.sub1).degree == 36
    assert check_cover(G, raw.phi2, eq.sub2).degree == 24
    assert len(raw.provenance) == 360


def test_k4_k33_component(fx):
    eq, raw, _ = _assembled(fx, "k4", "k33")
    part = extract_component(raw)
    orig = len([v for v in part.graph.vertices if v not in part.graph.midpoints])
    assert orig % 12 == 0
    cover = unsubdivide_cover(part, [eq.record1, eq.record2])
    c1, c2 = check_common(cover.graph, cover.phi1, fx("k4"), cover.phi2, fx("k33"))
    assert 4 * c1.degree == 6 * c2.degree == len(cover.graph.vertices)


@pytest.mark.parametrize("seed", [1, 2, 17])
def test_any_seed_gives_a_cover(fx, seed):
    eq, raw, _ = _assembled(fx, "theta2", "theta2", seed=seed)
    assert check_cover(raw.graph, raw.phi1, eq.sub1).ok
    assert check_cover(raw.graph, raw.phi2, eq.sub2).ok


def test_seed_zero_is_the_sorted_matching(fx):
    _, a, _ = _assembled(fx, "k4", "k33", seed=0)
    _, b, _ = _assembled(fx, "k4", "k33", seed=0)
    assert a.graph.edges == b.graph.edges


def test_assemble_rejects_non_solutions(fx):
    eq, _, (P, F, inc, w) = _assembled(fx, "k4", "k33")
    bad = dict(w)
    bad[P[0].id] += 1
    with pytest.raises(GluingError):
        assemble(eq.sub1, eq.sub2, P, F, inc, bad)


def test_fin_windings_are_positive(fx):
    eq, raw, _ = _assembled(fx, "tri3", "hex6", seed=3)
    cert = check_cover(raw.graph, raw.phi1, eq.sub1)
    assert cert.ok and min(cert.windings.values()) >= 1
    total = sum(len(p) for p in raw.graph.fins.values())
    assert total == cert.degree * sum(len(p) for p in eq.sub1.fins.values())


def test_extract_component_identity_and_anchor(fx):
    eq, raw, _ = _assembled(fx, "seg", "seg")
    one = extract_component(raw)
    assert extract_component(one) is one
    anchor = sorted(raw.graph.vertices)[-1]
    other = extract_component(raw, anchor)
    assert anchor in other.graph.vertices
    with pytest.raises(KeyError):
        extract_component(raw, "nope")


@pytest.mark.parametrize("name", ["tri3", "rose2a", "theta2", "k4"])
def test_n_fold_identity(fx, name):
    X = fx(name)
    cc = n_fold_cover(X, 1, seed=5)
    assert isomorphic(cc.graph, X)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_n_fold_tri3_double_squares(fx, seed):
    X = fx("tri3")
    cc = n_fold_cover(X, 2, seed=seed)
    cert = check_cover(cc.graph, cc.phi1, X)
    assert cert.degree == 2
    assert sum(len(p) for p in cc.graph.fins.values()) == 2 * 3


def test_n_fold_three(fx):
    X = fx("rose2_commutator")
    cc = n_fold_cover(X, 3, seed=4)
    assert check_cover(cc.graph, cc.phi1, X).degree == 3
    assert len(cc.graph.vertices) == 3 * len(X.vertices)


def test_n_fold_rejects_zero(fx):
    with pytest.raises(ValueError):
        n_fold_cover(fx("seg"), 0)
