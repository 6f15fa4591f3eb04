#!/usr/bin/env python3
"""Generates the bundled reference topology library (GraphML).

The library is the Internet Topology Zoo as packaged by `topohub`
(pip install topohub; MIT licensed): every network whose largest connected
component has between MIN_NODES and MAX_NODES routers. Multi-edges and
self-loops are dropped, nodes are renamed "n<id>", and file names are the
lower-cased network names. The output is deterministic.

Usage: tools/gen_reference_corpus.py [output_dir]  (default: fixtures/reference)
"""

import json
import os
import sys
from importlib import resources

import networkx as nx

MIN_NODES = 10
MAX_NODES = 100


def topology_zoo():
    """Yields (name, graph) for every Topology Zoo network, sorted by name."""
    data = resources.files("topohub") / "data" / "topozoo"
    for entry in sorted(data.iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".json"):
            continue
        raw = json.loads(entry.read_text())
        g = nx.Graph()
        g.add_nodes_from(f"n{n['id']}" for n in raw["nodes"])
        g.add_edges_from((f"n{e['source']}", f"n{e['target']}")
                         for e in raw["edges"] if e["source"] != e["target"])
        if g.number_of_nodes() == 0:
            continue
        largest = max(nx.connected_components(g), key=lambda c: (len(c), min(c)))
        yield entry.name[:-len(".json")].lower(), g.subgraph(largest).copy()


def write(g, path):
    lines = ['<?xml version="1.0" encoding="utf-8"?>',
             '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
             '  <graph edgedefault="undirected">']
    for node in sorted(g.nodes):
        lines.append(f'    <node id="{node}"/>')
    for u, v in sorted(tuple(sorted(e)) for e in g.edges):
        lines.append(f'    <edge source="{u}" target="{v}"/>')
    lines += ['  </graph>', '</graphml>']
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "fixtures", "reference")
    os.makedirs(out, exist_ok=True)
    for old in os.listdir(out):
        if old.endswith(".graphml"):
            os.remove(os.path.join(out, old))
    count = 0
    for name, g in topology_zoo():
        if not MIN_NODES <= g.number_of_nodes() <= MAX_NODES:
            continue
        write(g, os.path.join(out, name + ".graphml"))
        count += 1
    print(f"wrote {count} graphs to {out}")


if __name__ == "__main__":
    main()
