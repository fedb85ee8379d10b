import pytest

from fincover.complex import CellMap, Dart, GraphWithFins
from fincover.io import load_fixture

_ACCEPTANCE = {}


@pytest.fixture
def fx():
    return load_fixture


def graph(vertices, edges, fins=None, name=""):
    """Shorthand: edges as (id, tail, head), fins as lists of tokens like "a" / "-a"."""
    return GraphWithFins(
        list(vertices),
        {e: (t, h) for e, t, h in edges},
        {f: tuple(Dart.parse(t) for t in p) for f, p in (fins or {}).items()},
        name=name,
    )


MUTATIONS = ("same-fibre", "other-fibre", "image-dart")


def mutate(cover: GraphWithFins, phi: CellMap, base: GraphWithFins, rng, kind: str):
    """One re-gluing of a cover: move one edge end, or change one edge's image dart."""
    edges = dict(cover.edges)
    emap = dict(phi.edges)
    e = rng.choice(sorted(edges))
    if kind == "image-dart":
        old = emap[e]
        choices = [Dart(b, s) for b in sorted(base.edges) for s in (1, -1) if Dart(b, s) != old]
        if not choices:
            return None
        emap[e] = rng.choice(choices)
    else:
        end = rng.randrange(2)
        x = edges[e][end]
        same = kind == "same-fibre"
        ys = [y for y in cover.vertices if y != x and (phi.vertices[y] == phi.vertices[x]) == same]
        if not ys:
            return None
        ends = list(edges[e])
        ends[end] = rng.choice(sorted(ys))
        edges[e] = tuple(ends)
    return GraphWithFins(list(cover.vertices), edges, dict(cover.fins), name=cover.name), \
        CellMap(dict(phi.vertices), emap, dict(phi.fins))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _ACCEPTANCE[marker.args[0]] = (rep.outcome, doc)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        outcome, doc = _ACCEPTANCE[n]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line("criterion %d: %s  %s" % (n, status, doc))
