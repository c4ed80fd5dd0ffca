"""Exact all-pairs Hamming comparison: neighbor lists and cross-corpus matching.

The engines tile the pair matrix into cache-resident blocks and evaluate
each block with vectorized XOR + hardware popcount. Results are exact
(equivalent to the naive double loop) and merged in deterministic tile
order; tiles are independent, so row bands can run on a thread pool.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from typing import BinaryIO, Sequence

import numpy as np

TILE = 512  # xor/count/mask blocks stay L2-resident at this size

NeighborList = list[list[tuple[int, int]]]
CrossMatchSet = list[tuple[int, int, int]]

_ENTRY_DTYPE = np.dtype([("j", "<u4"), ("d", "u1")])


def _as_u64(hashes) -> np.ndarray:
    a = np.asarray(hashes, dtype=np.uint64)
    if a.ndim != 1:
        raise ValueError("expected a flat sequence of 64-bit hashes")
    return a


class _TileBuffers:
    """Scratch blocks reused across tiles; one set per worker thread."""

    def __init__(self):
        self.xor = np.empty((TILE, TILE), dtype=np.uint64)
        self.cnt = np.empty((TILE, TILE), dtype=np.uint8)
        self.mask = np.empty((TILE, TILE), dtype=bool)

    def hits(self, q: np.ndarray, r: np.ndarray, threshold: int):
        """(row, col, distance) arrays for all pairs at or under threshold."""
        nq, nr = len(q), len(r)
        x = np.bitwise_xor(q[:, None], r[None, :], out=self.xor[:nq, :nr])
        c = np.bitwise_count(x, out=self.cnt[:nq, :nr])
        m = np.less_equal(c, np.uint8(threshold), out=self.mask[:nq, :nr])
        if not m.any():
            return None
        ij = np.argwhere(m)
        return ij[:, 0], ij[:, 1], c[m]


def _check_threshold(threshold: int) -> int:
    if not 0 <= threshold <= 64:
        raise ValueError(f"threshold must be in [0, 64], got {threshold}")
    return int(threshold)


def _row_band_within(args):
    hashes, threshold, i0, buffers = args
    n = len(hashes)
    i1 = min(i0 + TILE, n)
    q = hashes[i0:i1]
    rows, cols, dists = [], [], []
    for j0 in range(i0, n, TILE):
        j1 = min(j0 + TILE, n)
        hit = buffers.hits(q, hashes[j0:j1], threshold)
        if hit is None:
            continue
        hi, hj, hd = hit
        gi = hi + i0
        gj = hj + j0
        if j0 == i0:
            keep = gj > gi  # strict upper triangle; drops self pairs
            gi, gj, hd = gi[keep], gj[keep], hd[keep]
        rows.append(gi)
        cols.append(gj)
        dists.append(hd)
    if not rows:
        return None
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(dists)


def pairwise_within(hashes: Sequence[int] | np.ndarray, threshold: int, *, threads: int = 1) -> NeighborList:
    """Symmetric neighbor lists (no self edges) for all pairs at distance <= threshold.

    Returned lists are sorted by neighbor index; the result is a pure
    function of the input sequence.
    """
    threshold = _check_threshold(threshold)
    h = _as_u64(hashes)
    n = len(h)
    neighbors: NeighborList = [[] for _ in range(n)]
    if n == 0:
        return neighbors

    tasks = [(h, threshold, i0, _TileBuffers()) for i0 in range(0, n, TILE)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_row_band_within, tasks))
    else:
        buffers = _TileBuffers()
        results = [_row_band_within((h, threshold, i0, buffers)) for (h, threshold, i0, _) in tasks]

    for res in results:
        if res is None:
            continue
        gi, gj, gd = res
        for i, j, d in zip(gi.tolist(), gj.tolist(), gd.tolist()):
            neighbors[i].append((j, d))
            neighbors[j].append((i, d))
    for lst in neighbors:
        lst.sort()
    return neighbors


def _row_band_cross(args):
    queries, refs, threshold, i0, buffers = args
    i1 = min(i0 + TILE, len(queries))
    q = queries[i0:i1]
    rows, cols, dists = [], [], []
    for j0 in range(0, len(refs), TILE):
        j1 = min(j0 + TILE, len(refs))
        hit = buffers.hits(q, refs[j0:j1], threshold)
        if hit is None:
            continue
        hi, hj, hd = hit
        rows.append(hi + i0)
        cols.append(hj + j0)
        dists.append(hd)
    if not rows:
        return None
    gi = np.concatenate(rows)
    gj = np.concatenate(cols)
    gd = np.concatenate(dists)
    order = np.lexsort((gj, gi))  # query-major, then reference index
    return gi[order], gj[order], gd[order]


def pairwise_cross(
    queries: Sequence[int] | np.ndarray,
    refs: Sequence[int] | np.ndarray,
    threshold: int,
    *,
    threads: int = 1,
) -> CrossMatchSet:
    """All (query, reference, distance) pairs at distance <= threshold.

    Output is ordered query-major, then by reference index.
    """
    threshold = _check_threshold(threshold)
    q = _as_u64(queries)
    r = _as_u64(refs)
    if len(q) == 0 or len(r) == 0:
        return []

    tasks = [(q, r, threshold, i0, _TileBuffers()) for i0 in range(0, len(q), TILE)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_row_band_cross, tasks))
    else:
        buffers = _TileBuffers()
        results = [_row_band_cross((q, r, threshold, i0, buffers)) for (q, r, threshold, i0, _) in tasks]

    out: CrossMatchSet = []
    for res in results:
        if res is None:
            continue
        gi, gj, gd = res
        out.extend(zip(gi.tolist(), gj.tolist(), gd.tolist()))
    return out


def nearest_within(
    queries: Sequence[int] | np.ndarray,
    refs: Sequence[int] | np.ndarray,
    threshold: int,
) -> list[tuple[int, int] | None]:
    """Per query: (index of nearest reference, distance), or None beyond threshold.

    Ties go to the lowest reference index.
    """
    threshold = _check_threshold(threshold)
    q = _as_u64(queries)
    r = _as_u64(refs)
    out: list[tuple[int, int] | None] = [None] * len(q)
    if len(q) == 0 or len(r) == 0:
        return out
    best_d = np.full(len(q), 255, dtype=np.uint8)
    best_j = np.zeros(len(q), dtype=np.int64)
    buffers = _TileBuffers()
    for i0 in range(0, len(q), TILE):
        i1 = min(i0 + TILE, len(q))
        for j0 in range(0, len(r), TILE):
            j1 = min(j0 + TILE, len(r))
            nq, nr = i1 - i0, j1 - j0
            x = np.bitwise_xor(q[i0:i1, None], r[None, j0:j1], out=buffers.xor[:nq, :nr])
            c = np.bitwise_count(x, out=buffers.cnt[:nq, :nr])
            jloc = c.argmin(axis=1)  # first minimum: lowest index in this tile
            dloc = c[np.arange(nq), jloc]
            better = dloc < best_d[i0:i1]  # strict: earlier tiles win ties
            best_d[i0:i1][better] = dloc[better]
            best_j[i0:i1][better] = jloc[better] + j0
    for qi in range(len(q)):
        if best_d[qi] <= threshold:
            out[qi] = (int(best_j[qi]), int(best_d[qi]))
    return out


def write_neighbors(fh: BinaryIO, neighbors: NeighborList) -> None:
    """Binary spill: per index, (u32 index, u32 count, count x (u32, u8)), little-endian."""
    header = struct.Struct("<II")
    for i, lst in enumerate(neighbors):
        fh.write(header.pack(i, len(lst)))
        if lst:
            rec = np.empty(len(lst), dtype=_ENTRY_DTYPE)
            rec["j"] = [j for j, _ in lst]
            rec["d"] = [d for _, d in lst]
            fh.write(rec.tobytes())


def read_neighbors(fh: BinaryIO) -> NeighborList:
    header = struct.Struct("<II")
    neighbors: NeighborList = []
    while True:
        buf = fh.read(header.size)
        if not buf:
            break
        if len(buf) != header.size:
            raise ValueError("truncated neighbor record header")
        idx, count = header.unpack(buf)
        if idx != len(neighbors):
            raise ValueError(f"non-sequential neighbor record index {idx}")
        payload = fh.read(count * _ENTRY_DTYPE.itemsize)
        if len(payload) != count * _ENTRY_DTYPE.itemsize:
            raise ValueError("truncated neighbor record payload")
        rec = np.frombuffer(payload, dtype=_ENTRY_DTYPE)
        neighbors.append(list(zip(rec["j"].tolist(), rec["d"].tolist())))
    return neighbors
