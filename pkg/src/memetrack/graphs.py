"""Phylogeny structures over annotated clusters: dendrogram and threshold graph.

Single linkage is used for the hierarchy so that cutting the dendrogram at
a height equals taking connected components of the threshold graph at the
same distance; that duality is what makes the two views consistent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import networkx as nx

from .metric import ClusterProfile, MetricConfig, cluster_distance

EXPORT_FORMATS = ("graphml", "dot", "csv")


@dataclass
class Dendrogram:
    """Agglomerative merge list; components are named by their smallest leaf id."""

    leaves: tuple[int, ...]
    merges: list[tuple[int, int, float]]  # (rep_a, rep_b, height), rep_a < rep_b

    def cut(self, height: float) -> list[frozenset[int]]:
        """Connected components after applying merges with height < the cut."""
        comp: dict[int, set[int]] = {leaf: {leaf} for leaf in self.leaves}
        for a, b, h in self.merges:
            if h >= height:
                break
            merged = comp[a] | comp[b]
            comp[min(a, b)] = merged
            del comp[max(a, b)]
        return sorted((frozenset(s) for s in comp.values()), key=min)


def _pair_distances(profiles: Sequence[ClusterProfile], cfg: MetricConfig):
    cfg.validate()
    ids = [p.cluster_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate cluster ids in profiles")
    edges = []
    for i in range(len(profiles)):
        for j in range(i + 1, len(profiles)):
            d = cluster_distance(profiles[i], profiles[j], cfg)
            a, b = sorted((ids[i], ids[j]))
            edges.append((d, a, b))
    return ids, edges


def linkage(profiles: Sequence[ClusterProfile], cfg: MetricConfig) -> Dendrogram:
    """Single-linkage dendrogram over the cluster distance.

    Kruskal order: edges ascend by distance, ties by the smaller id pair,
    so the merge list is a pure function of the profiles.
    """
    if len(profiles) < 2:
        raise ValueError("linkage needs at least 2 profiles")
    ids, edges = _pair_distances(profiles, cfg)
    edges.sort()

    rep = {i: i for i in ids}  # component representative: smallest member id

    def find(x: int) -> int:
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    merges = []
    for d, a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        lo, hi = sorted((ra, rb))
        rep[hi] = lo
        merges.append((lo, hi, d))
        if len(merges) == len(ids) - 1:
            break
    return Dendrogram(leaves=tuple(sorted(ids)), merges=merges)


@dataclass(frozen=True)
class NodeLabel:
    name: str = ""
    community: str = ""
    size: int = 0
    racist: bool = False
    political: bool = False


@dataclass
class MemeGraph:
    nodes: dict[int, NodeLabel] = field(default_factory=dict)
    edges: list[tuple[int, int, float]] = field(default_factory=list)  # (a, b, distance), a < b

    def degree(self) -> dict[int, int]:
        deg = {i: 0 for i in self.nodes}
        for a, b, _ in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def components(self) -> list[frozenset[int]]:
        parent = {i: i for i in self.nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, _ in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, set[int]] = {}
        for i in self.nodes:
            groups.setdefault(find(i), set()).add(i)
        return sorted((frozenset(s) for s in groups.values()), key=min)


def build_graph(
    profiles: Sequence[ClusterProfile],
    cfg: MetricConfig,
    kappa: float = 0.45,
    degree_min: int = 10,
    labels: Mapping[int, NodeLabel] | None = None,
) -> MemeGraph:
    """Threshold graph: an edge wherever distance < kappa, then one degree pass.

    The filter is static: it drops every node whose degree in the unfiltered
    graph is below degree_min, plus the incident edges. It is not iterated.
    """
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must be in (0, 1], got {kappa}")
    ids, all_edges = _pair_distances(profiles, cfg) if profiles else ([], [])
    edges = [(a, b, d) for d, a, b in sorted(all_edges) if d < kappa]

    deg = {i: 0 for i in ids}
    for a, b, _ in edges:
        deg[a] += 1
        deg[b] += 1
    kept = {i for i in ids if deg[i] >= degree_min}

    labels = labels or {}
    nodes = {i: labels.get(i, NodeLabel()) for i in sorted(kept)}
    kept_edges = [(a, b, d) for a, b, d in edges if a in kept and b in kept]
    return MemeGraph(nodes=nodes, edges=kept_edges)


def _to_networkx(g: MemeGraph) -> nx.Graph:
    gx = nx.Graph()
    for i, lab in sorted(g.nodes.items()):
        gx.add_node(
            i,
            label=lab.name,
            community=lab.community,
            size=int(lab.size),
            racist=bool(lab.racist),
            political=bool(lab.political),
        )
    for a, b, d in g.edges:
        gx.add_edge(a, b, distance=float(d))
    return gx


def _write_dot(g: MemeGraph, path) -> None:
    def esc(s: str) -> str:
        return s.replace("\\", "\\\\").replace('"', '\\"')

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("graph memes {\n")
        for i, lab in sorted(g.nodes.items()):
            fh.write(
                f'  {i} [label="{esc(lab.name)}", community="{esc(lab.community)}", '
                f'size={lab.size}, racist={str(lab.racist).lower()}, '
                f'political={str(lab.political).lower()}];\n'
            )
        for a, b, d in g.edges:
            fh.write(f"  {a} -- {b} [distance={d:.6f}];\n")
        fh.write("}\n")


_CSV_FIELDS = ["type", "id", "source", "target", "label", "community", "size", "racist", "political", "distance"]


def _write_csv(g: MemeGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
        w.writeheader()
        for i, lab in sorted(g.nodes.items()):
            w.writerow(
                {
                    "type": "node",
                    "id": i,
                    "label": lab.name,
                    "community": lab.community,
                    "size": lab.size,
                    "racist": lab.racist,
                    "political": lab.political,
                }
            )
        for a, b, d in g.edges:
            w.writerow({"type": "edge", "source": a, "target": b, "distance": f"{d:.6f}"})


def read_graph_csv(path) -> MemeGraph:
    g = MemeGraph()
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["type"] == "node":
                g.nodes[int(row["id"])] = NodeLabel(
                    name=row["label"],
                    community=row["community"],
                    size=int(row["size"]),
                    racist=row["racist"] == "True",
                    political=row["political"] == "True",
                )
            elif row["type"] == "edge":
                g.edges.append((int(row["source"]), int(row["target"]), float(row["distance"])))
            else:
                raise ValueError(f"unknown record type {row['type']!r}")
    return g


def export_graph(g: MemeGraph, path, fmt: str) -> None:
    """Write the graph with all node attributes; layout is left to viewers."""
    if fmt == "graphml":
        nx.write_graphml(_to_networkx(g), str(path))
    elif fmt == "dot":
        _write_dot(g, path)
    elif fmt == "csv":
        _write_csv(g, path)
    else:
        raise ValueError(f"unknown export format {fmt!r}; pick one of {EXPORT_FORMATS}")


def write_dendrogram_csv(dend: Dendrogram, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["node_a", "node_b", "height"])
        for a, b, h in dend.merges:
            w.writerow([a, b, f"{h:.9f}"])
