import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memetrack.hashing import (
    IngestError,
    compute_phash,
    format_phash_hex,
    hamming,
    ingest_posts,
    parse_phash_hex,
)

# the documented example hash pair; their distance by nibble-wise XOR popcount is 6
PAIR_A = "55352b0b8d8b5b53"
PAIR_B = "55952b0bb58b5353"


class TestComputePhash:
    def test_constant_midgray_is_dc_only(self):
        img = np.full((64, 64), 128, dtype=np.uint8)
        assert compute_phash(img) == 0x8000000000000000

    def test_deterministic(self, rng):
        img = rng.integers(0, 256, size=(50, 70), dtype=np.uint8)
        assert compute_phash(img) == compute_phash(img.copy())

    def test_lossless_reencode_identity(self, rng, tmp_path):
        from PIL import Image

        img = rng.integers(0, 256, size=(40, 40, 3), dtype=np.uint8)
        p = tmp_path / "x.png"
        Image.fromarray(img, mode="RGB").save(p)
        with Image.open(p) as reread:
            again = np.asarray(reread.convert("RGB"))
        assert np.array_equal(img, again)
        assert compute_phash(img) == compute_phash(again)

    def test_jpeg_reencode_within_eight_bits(self, rng, tmp_path):
        from PIL import Image

        from .synth import smooth_image

        for i in range(10):
            img = smooth_image(rng, size=96)
            p = tmp_path / f"photo_{i}.jpg"
            Image.fromarray(img, mode="RGB").save(p, quality=90)
            with Image.open(p) as reread:
                jpeg = np.asarray(reread.convert("RGB"))
            assert hamming(compute_phash(img), compute_phash(jpeg)) <= 8

    def test_grayscale_vs_rgb_gray(self, rng):
        gray = rng.integers(0, 256, size=(33, 47), dtype=np.uint8)
        rgb = np.stack([gray, gray, gray], axis=2)
        assert compute_phash(gray) == compute_phash(rgb)

    def test_arbitrary_sizes(self, rng):
        for shape in [(1, 1), (1, 100), (100, 1), (7, 13), (500, 3)]:
            img = rng.integers(0, 256, size=shape, dtype=np.uint8)
            h = compute_phash(img)
            assert 0 <= h < 2**64

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            compute_phash(np.zeros((0, 10), dtype=np.uint8))
        with pytest.raises(ValueError):
            compute_phash(np.zeros((10, 0), dtype=np.uint8))

    def test_bad_ndim_rejected(self):
        with pytest.raises(ValueError):
            compute_phash(np.zeros(10, dtype=np.uint8))


class TestHexCodec:
    @given(st.integers(min_value=0, max_value=2**64 - 1))
    def test_roundtrip(self, h):
        assert parse_phash_hex(format_phash_hex(h)) == h

    def test_formats_lowercase_16(self):
        s = format_phash_hex(0xABCDEF)
        assert s == "0000000000abcdef"
        assert len(s) == 16

    @pytest.mark.parametrize(
        "bad",
        ["xyz", "ABCDEF0011223344", "123", "0x12345678901234", " 55352b0b8d8b5b53", "55352b0b8d8b5b5", 42, None],
    )
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValueError):
            parse_phash_hex(bad)

    def test_format_range_check(self):
        with pytest.raises(ValueError):
            format_phash_hex(2**64)
        with pytest.raises(ValueError):
            format_phash_hex(-1)


class TestHamming:
    def test_self_distance_zero(self):
        h = parse_phash_hex(PAIR_A)
        assert hamming(h, h) == 0

    def test_full_distance(self):
        assert hamming(0, 0xFFFFFFFFFFFFFFFF) == 64

    def test_documented_pair_is_six(self):
        assert hamming(parse_phash_hex(PAIR_A), parse_phash_hex(PAIR_B)) == 6

    @given(
        st.integers(min_value=0, max_value=2**64 - 1),
        st.integers(min_value=0, max_value=2**64 - 1),
        st.integers(min_value=0, max_value=2**64 - 1),
    )
    @settings(max_examples=200)
    def test_metric_properties(self, a, b, c):
        assert 0 <= hamming(a, b) <= 64
        assert hamming(a, b) == hamming(b, a)
        assert hamming(a, c) <= hamming(a, b) + hamming(b, c)


def _line(i, community="pol", ts=100.0, phash="0" * 16, **extra):
    obj = {"id": f"id{i}", "community": community, "timestamp": ts, "phash": phash}
    obj.update(extra)
    return json.dumps(obj)


class TestIngest:
    def test_dedup_on_community_and_id(self):
        lines = [_line(1), _line(1)]
        store = ingest_posts(lines)
        assert len(store) == 1

    def test_same_id_different_community_kept(self):
        lines = [_line(1, community="pol"), _line(1, community="gab")]
        assert len(ingest_posts(lines)) == 2

    def test_invalid_hex_reports_line(self):
        lines = [_line(1), _line(2, phash="xyz")]
        with pytest.raises(IngestError) as err:
            ingest_posts(lines)
        assert "line 2" in str(err.value)
        assert "invalid phash hex" in str(err.value)

    def test_counts_posts_vs_unique_hashes(self):
        hashes = ["0" * 16, "0" * 16, "1".rjust(16, "0"), "2".rjust(16, "0"), "2".rjust(16, "0")]
        lines = [_line(i, phash=h) for i, h in enumerate(hashes)]
        store = ingest_posts(lines)
        assert store.counts() == {"posts": 5, "unique_hashes": 3}

    def test_lenient_skips_and_counts(self):
        lines = [_line(1), _line(2, phash="bad"), "not json", _line(3)]
        store = ingest_posts(lines, strict=False)
        assert len(store) == 2
        assert store.skipped == 2
        assert len(store.skip_reasons) == 2

    def test_missing_field(self):
        with pytest.raises(IngestError) as err:
            ingest_posts(['{"id": "a", "community": "pol", "timestamp": 1}'])
        assert "phash" in str(err.value)

    def test_window_enforced(self):
        lines = [_line(1, ts=50.0), _line(2, ts=500.0)]
        with pytest.raises(IngestError):
            ingest_posts(lines, window=(0.0, 100.0))
        store = ingest_posts(lines, strict=False, window=(0.0, 100.0))
        assert len(store) == 1 and store.skipped == 1

    def test_optional_fields(self):
        lines = [_line(1, score=42, subcommunity="frogs"), _line(2)]
        store = ingest_posts(lines)
        assert store.posts[0].score == 42
        assert store.posts[0].subcommunity == "frogs"
        assert store.posts[1].score is None

    def test_bad_score_type(self):
        with pytest.raises(IngestError):
            ingest_posts([_line(1, score="high")])

    def test_per_community_counts(self):
        lines = [
            _line(1, community="pol", phash="0" * 16),
            _line(2, community="pol", phash="0" * 16),
            _line(3, community="gab", phash="1".rjust(16, "0")),
        ]
        store = ingest_posts(lines)
        assert store.per_community_counts() == {
            "pol": {"posts": 2, "unique_hashes": 1},
            "gab": {"posts": 1, "unique_hashes": 1},
        }
        assert store.communities() == ["gab", "pol"]

    def test_blank_lines_skipped(self):
        store = ingest_posts([_line(1), "", "   \n"])
        assert len(store) == 1
