"""PNG figures for ``fincover cover --report``."""
from __future__ import annotations

import os
from collections import Counter
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

from .complex import GraphWithFins  # noqa: E402

_SAVE = {"dpi": 110, "metadata": {"Software": None}}


def _nx(X: GraphWithFins) -> nx.MultiGraph:
    G = nx.MultiGraph()
    G.add_nodes_from(X.vertices)
    for e, (t, h) in X.edges.items():
        G.add_edge(t, h, key=e)
    return G


def plot_weights(report, path: str) -> str:
    """Bar chart of how many polyhedral pairs received each weight."""
    hist = Counter(report.weights.values())
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ks = sorted(hist)
    ax.bar([str(k) for k in ks], [hist[k] for k in ks], color="#4c72b0")
    ax.set_xlabel("weight")
    ax.set_ylabel("polyhedral pairs")
    ax.set_title("solver: %s" % report.solver)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_cover(report, X1: GraphWithFins, path: str) -> str:
    """The cover graph, vertices coloured by their image in the first base."""
    cover = report.cover
    G = _nx(cover.graph)
    base = sorted(X1.vertices)
    cmap = plt.get_cmap("tab10" if len(base) <= 10 else "tab20")
    colour = [cmap(base.index(cover.phi1.vertices[v]) % cmap.N) for v in G.nodes]
    simple = nx.Graph(G)
    if len(G) > 300:
        pos = nx.circular_layout(simple)
    else:
        pos = nx.spring_layout(simple, seed=0)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    nx.draw_networkx_edges(simple, pos, ax=ax, width=0.7, edge_color="#888888")
    nx.draw_networkx_nodes(G, pos, ax=ax, node_size=40, node_color=colour)
    d = ",".join(map(str, report.degrees)) or "?"
    ax.set_title("cover: %d vertices, degrees %s" % (len(cover.graph.vertices), d))
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_fins(report, path: str) -> str:
    """Winding degree of each cover fin over its image, per map."""
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for k, cert in enumerate(report.certificates):
        hist = Counter(cert.windings.values())
        ks = sorted(hist)
        ax.plot(ks, [hist[x] for x in ks], marker="o", label="map %d" % (k + 1))
    ax.set_xlabel("winding")
    ax.set_ylabel("cover fins")
    if report.certificates and any(c.windings for c in report.certificates):
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def write_figures(report, X1: GraphWithFins, outdir: str) -> List[str]:
    os.makedirs(outdir, exist_ok=True)
    made = []
    if report.weights:
        made.append(plot_weights(report, os.path.join(outdir, "weights.png")))
    if report.cover is not None:
        made.append(plot_cover(report, X1, os.path.join(outdir, "cover.png")))
    if report.certificates:
        made.append(plot_fins(report, os.path.join(outdir, "windings.png")))
    return made
