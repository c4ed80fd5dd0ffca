"""Density clustering over Hamming neighborhoods, medoid picking, and the eps sweep.

The DBSCAN variant here is deterministic: border points reachable from
several clusters join the cluster of the lowest-index core that reaches
them, so the partition is a pure function of the input multiset and can be
checked against a brute-force reference.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hashing import format_phash_hex, parse_phash_hex
from .pairwise import NeighborList, pairwise_within


@dataclass(frozen=True)
class Cluster:
    id: int
    members: tuple[int, ...]  # hash indices, sorted
    medoid: int  # member index

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class Clustering:
    clusters: list[Cluster]
    noise: list[int]

    def labels(self, n: int) -> list[int]:
        """Per-index cluster id, -1 for noise."""
        out = [-1] * n
        for c in self.clusters:
            for m in c.members:
                out[m] = c.id
        return out


def medoid(members: Sequence[int], hashes: Sequence[int] | np.ndarray) -> int:
    """Member index minimizing the summed squared Hamming distance to the rest.

    Ties break by smallest hash value, then smallest index.
    """
    if len(members) == 0:
        raise ValueError("medoid of empty member set")
    idx = np.asarray(members, dtype=np.int64)
    vals = np.asarray(hashes, dtype=np.uint64)[idx]
    d = np.bitwise_count(vals[:, None] ^ vals[None, :]).astype(np.int64)
    cost = (d * d).sum(axis=1)
    best = np.flatnonzero(cost == cost.min())
    order = sorted(best.tolist(), key=lambda k: (int(vals[k]), int(idx[k])))
    return int(idx[order[0]])


def dbscan(neighbors: NeighborList, min_pts: int, hashes: Sequence[int] | np.ndarray) -> Clustering:
    """Deterministic DBSCAN over precomputed neighborhoods.

    A point is core when its neighborhood, self included, holds at least
    min_pts points. Core points within one another's neighborhoods share a
    cluster; border points join the cluster of their lowest-index core
    neighbor. Cluster ids are assigned by smallest member index.
    """
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    n = len(neighbors)
    core = [len(lst) >= min_pts - 1 for lst in neighbors]

    label = [-1] * n
    next_label = 0
    for start in range(n):
        if not core[start] or label[start] != -1:
            continue
        label[start] = next_label
        queue = [start]
        while queue:
            u = queue.pop()
            for v, _ in neighbors[u]:
                if core[v] and label[v] == -1:
                    label[v] = next_label
                    queue.append(v)
        next_label += 1

    for i in range(n):
        if core[i] or label[i] != -1:
            continue
        reaching = [j for j, _ in neighbors[i] if core[j]]
        if reaching:
            label[i] = label[min(reaching)]

    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(label):
        if lab != -1:
            groups.setdefault(lab, []).append(i)

    ordered = sorted(groups.values(), key=min)
    clusters = [
        Cluster(id=cid, members=tuple(sorted(members)), medoid=medoid(members, hashes))
        for cid, members in enumerate(ordered)
    ]
    noise = [i for i, lab in enumerate(label) if lab == -1]
    return Clustering(clusters=clusters, noise=noise)


def cluster_hashes(hashes: Sequence[int] | np.ndarray, eps: int, min_pts: int, *, threads: int = 1) -> Clustering:
    """Convenience wrapper: neighborhood sweep at eps, then dbscan."""
    return dbscan(pairwise_within(hashes, eps, threads=threads), min_pts, hashes)


def eps_sweep(
    hashes: Sequence[int] | np.ndarray,
    eps_list: Sequence[int],
    min_pts: int,
    *,
    threads: int = 1,
) -> list[tuple[int, int, float]]:
    """One clustering per eps: rows of (eps, cluster count, noise percentage).

    The neighborhood sweep runs once at max(eps) and is filtered down for
    the smaller radii.
    """
    if not eps_list:
        raise ValueError("eps_list must be non-empty")
    n = len(hashes)
    full = pairwise_within(hashes, max(eps_list), threads=threads)
    rows = []
    for eps in eps_list:
        trimmed = [[(j, d) for j, d in lst if d <= eps] for lst in full]
        clustering = dbscan(trimmed, min_pts, hashes)
        noise_pct = 100.0 * len(clustering.noise) / n if n else 0.0
        rows.append((int(eps), len(clustering.clusters), noise_pct))
    return rows


def write_eps_sweep_csv(rows: list[tuple[int, int, float]], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "clusters", "noise_pct"])
        for eps, k, pct in rows:
            w.writerow([eps, k, f"{pct:.4f}"])


def clustering_to_json(clustering: Clustering, hashes: Sequence[int] | np.ndarray) -> dict:
    return {
        "clusters": [
            {
                "id": c.id,
                "medoid_hex": format_phash_hex(int(hashes[c.medoid])),
                "member_hexes": [format_phash_hex(int(hashes[m])) for m in c.members],
            }
            for c in clustering.clusters
        ],
        "noise_count": len(clustering.noise),
    }


def write_clustering_json(clustering: Clustering, hashes, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(clustering_to_json(clustering, hashes), fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_clustering_json(path) -> dict:
    """Load the clustering artifact; hashes come back as ints.

    Returns {"clusters": [{"id", "medoid", "members"}], "noise_count"}.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return {
        "clusters": [
            {
                "id": int(c["id"]),
                "medoid": parse_phash_hex(c["medoid_hex"]),
                "members": [parse_phash_hex(s) for s in c["member_hexes"]],
            }
            for c in data["clusters"]
        ],
        "noise_count": int(data["noise_count"]),
    }
