import io

import numpy as np
import pytest

from memetrack.hashing import parse_phash_hex
from memetrack.pairwise import (
    nearest_within,
    pairwise_cross,
    pairwise_within,
    read_neighbors,
    write_neighbors,
)

from .synth import blob_hashes

PAIR_A = parse_phash_hex("55352b0b8d8b5b53")
PAIR_B = parse_phash_hex("55952b0bb58b5353")


def naive_within(hashes, threshold):
    """Independent double loop with python-int popcount."""
    n = len(hashes)
    out = [[] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = (hashes[i] ^ hashes[j]).bit_count()
            if d <= threshold:
                out[i].append((j, d))
    return out


def naive_cross(queries, refs, threshold):
    out = []
    for qi, q in enumerate(queries):
        for ri, r in enumerate(refs):
            d = (q ^ r).bit_count()
            if d <= threshold:
                out.append((qi, ri, d))
    return out


class TestWithin:
    def test_identical_triplet_threshold_zero(self):
        h = PAIR_A
        res = pairwise_within([h, h, h], 0)
        assert res == [[(1, 0), (2, 0)], [(0, 0), (2, 0)], [(0, 0), (1, 0)]]

    def test_far_pair_empty(self):
        res = pairwise_within([0x0, 0xFFFFFFFFFFFFFFFF], 8)
        assert res == [[], []]

    def test_empty_input(self):
        assert pairwise_within([], 8) == []

    def test_matches_naive_on_blobs(self, rng):
        hashes = blob_hashes(rng, n_blobs=6, per_blob=10, n_noise=40)
        for threshold in (0, 4, 8):
            assert pairwise_within(hashes, threshold) == naive_within(hashes, threshold)

    def test_matches_naive_on_random(self, rng):
        hashes = rng.integers(0, 2**64, size=300, dtype=np.uint64).tolist()
        # high threshold so random pairs actually hit
        assert pairwise_within(hashes, 24) == naive_within(hashes, 24)

    def test_symmetric_no_self_edges(self, rng):
        hashes = blob_hashes(rng, n_blobs=4, per_blob=8, n_noise=20)
        res = pairwise_within(hashes, 8)
        for i, lst in enumerate(res):
            for j, d in lst:
                assert j != i
                assert (i, d) in res[j]

    def test_threads_equal_single(self, rng):
        hashes = blob_hashes(rng, n_blobs=10, per_blob=30, n_noise=300)
        assert pairwise_within(hashes, 8, threads=4) == pairwise_within(hashes, 8)

    def test_spans_tile_boundaries(self, rng):
        # > TILE inputs so row bands and diagonal tiles are all exercised
        hashes = blob_hashes(rng, n_blobs=20, per_blob=30, flip_bits=3, n_noise=100)
        assert len(hashes) == 700
        assert pairwise_within(hashes, 6) == naive_within(hashes, 6)


class TestCross:
    def test_exact_match_threshold_zero(self):
        res = pairwise_cross([PAIR_A], [PAIR_B, PAIR_A], 0)
        assert res == [(0, 1, 0)]

    def test_documented_pair_threshold(self):
        assert pairwise_cross([PAIR_A], [PAIR_B], 8) == [(0, 0, 6)]
        assert pairwise_cross([PAIR_A], [PAIR_B], 4) == []

    def test_matches_naive(self, rng):
        queries = blob_hashes(rng, n_blobs=5, per_blob=8, n_noise=30)
        refs = blob_hashes(rng, n_blobs=5, per_blob=8, n_noise=30)
        refs[:4] = queries[:4]  # guarantee overlap
        assert pairwise_cross(queries, refs, 8) == naive_cross(queries, refs, 8)

    def test_order_query_major(self, rng):
        queries = [0, 0, 1]
        refs = [0, 1, 2, 3]
        res = pairwise_cross(queries, refs, 2)
        assert res == sorted(res)

    def test_empty(self):
        assert pairwise_cross([], [1], 8) == []
        assert pairwise_cross([1], [], 8) == []

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            pairwise_cross([1], [1], 65)
        with pytest.raises(ValueError):
            pairwise_within([1], -1)


class TestNearest:
    def test_nearest_basic(self):
        res = nearest_within([0b111], [0b111, 0b110, 0b0], 8)
        assert res == [(0, 0)]

    def test_beyond_threshold_none(self):
        assert nearest_within([0x0], [0xFFFFFFFFFFFFFFFF], 8) == [None]

    def test_tie_lowest_reference_index(self):
        # both refs at distance 1
        res = nearest_within([0b11], [0b01, 0b10], 8)
        assert res == [(0, 1)]

    def test_matches_naive(self, rng):
        queries = blob_hashes(rng, n_blobs=4, per_blob=6, n_noise=600)
        refs = blob_hashes(rng, n_blobs=4, per_blob=6, n_noise=600)
        got = nearest_within(queries, refs, 12)
        for qi, q in enumerate(queries):
            dists = [(q ^ r).bit_count() for r in refs]
            dmin = min(dists)
            if dmin > 12:
                assert got[qi] is None
            else:
                assert got[qi] == (dists.index(dmin), dmin)


class TestSpill:
    def test_roundtrip(self, rng):
        hashes = blob_hashes(rng, n_blobs=6, per_blob=10, n_noise=40)
        neighbors = pairwise_within(hashes, 8)
        buf = io.BytesIO()
        write_neighbors(buf, neighbors)
        buf.seek(0)
        assert read_neighbors(buf) == neighbors

    def test_roundtrip_empty_lists(self):
        neighbors = [[], [(2, 5)], []]
        # symmetry is a NeighborList invariant but the codec must not care
        buf = io.BytesIO()
        write_neighbors(buf, neighbors)
        buf.seek(0)
        assert read_neighbors(buf) == neighbors

    def test_truncation_detected(self, rng):
        hashes = blob_hashes(rng, n_blobs=2, per_blob=6, n_noise=0)
        buf = io.BytesIO()
        write_neighbors(buf, pairwise_within(hashes, 8))
        raw = buf.getvalue()[:-3]
        with pytest.raises(ValueError):
            read_neighbors(io.BytesIO(raw))
