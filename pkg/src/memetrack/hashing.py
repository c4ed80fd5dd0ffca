"""Perceptual hashing, hex codecs, Hamming distance, and post ingestion.

A hash is a 64-bit fingerprint of an image: the sign pattern of the 8x8
low-frequency DCT block relative to its median, packed row-major with the
first coefficient in the most significant bit. Visually similar images
differ in few bits, so Hamming distance doubles as a visual-similarity
score everywhere downstream.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np
from scipy.fft import dct

MAX_DISTANCE = 64  # bit width of a hash

_HEX_RE = re.compile(r"[0-9a-f]{16}")

# ITU-R BT.601 luma coefficients
_LUMA = np.array([0.299, 0.587, 0.114])

_RESAMPLE_SIZE = 32
_BLOCK = 8


def format_phash_hex(h: int) -> str:
    """Canonical serialized form: exactly 16 lowercase hex characters."""
    if not 0 <= h < (1 << 64):
        raise ValueError(f"hash out of 64-bit range: {h!r}")
    return f"{h:016x}"


def parse_phash_hex(s: str) -> int:
    if not isinstance(s, str) or not _HEX_RE.fullmatch(s):
        raise ValueError(f"invalid phash hex: {s!r}")
    return int(s, 16)


def hamming(a: int, b: int) -> int:
    """Bit-difference count between two 64-bit hashes, 0..64."""
    return (a ^ b).bit_count()


def hashes_to_array(hashes: Iterable[int]) -> np.ndarray:
    """Pack python-int hashes into a uint64 vector for the bulk engines."""
    return np.fromiter(hashes, dtype=np.uint64)


def _box_weights(n_in: int, n_out: int) -> np.ndarray:
    """Area-overlap resampling matrix: W[o, i] = |pixel i ∩ bin o| / bin width."""
    scale = n_in / n_out
    w = np.zeros((n_out, n_in))
    for o in range(n_out):
        lo = o * scale
        hi = lo + scale
        for i in range(int(lo), min(int(np.ceil(hi)), n_in)):
            w[o, i] = (min(i + 1.0, hi) - max(float(i), lo)) / scale
    return w


def _box_resample(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    wr = _box_weights(img.shape[0], out_h)
    wc = _box_weights(img.shape[1], out_w)
    return wr @ img @ wc.T


def compute_phash(image: np.ndarray) -> int:
    """Hash a decoded 8-bit raster (grayscale HxW, or HxWxC with C>=3).

    Grayscale via BT.601 luma, area-average resample to 32x32, 2-D DCT-II,
    then threshold the top-left 8x8 coefficient block (DC included)
    strictly above its median; ties map to 0.
    """
    a = np.asarray(image, dtype=np.float64)
    if a.ndim == 3:
        if a.shape[2] == 1:
            a = a[:, :, 0]
        elif a.shape[2] >= 3:
            a = a[:, :, :3] @ _LUMA  # alpha, if present, is ignored
        else:
            raise ValueError(f"unsupported channel count: {a.shape[2]}")
    elif a.ndim != 2:
        raise ValueError(f"expected a 2-D or 3-D raster, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"empty raster: shape {a.shape}")

    small = _box_resample(a, _RESAMPLE_SIZE, _RESAMPLE_SIZE)
    coeffs = dct(dct(small, type=2, axis=0), type=2, axis=1)
    block = coeffs[:_BLOCK, :_BLOCK]
    bits = (block > np.median(block)).ravel()
    h = 0
    for i in np.flatnonzero(bits):
        h |= 1 << (63 - int(i))
    return h


@dataclass(frozen=True)
class Post:
    """One social-media posting carrying an image hash."""

    id: str
    community: str
    timestamp: float
    hash: int
    score: int | None = None
    subcommunity: str | None = None


class IngestError(ValueError):
    """A malformed input line, reported with its 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass
class PostStore:
    """Validated, (community, id)-deduplicated posts plus hash bookkeeping."""

    posts: list[Post] = field(default_factory=list)
    skipped: int = 0
    skip_reasons: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.posts)

    def communities(self) -> list[str]:
        return sorted({p.community for p in self.posts})

    def hash_counts(self) -> Counter:
        """Multiset of distinct hashes over all posts."""
        return Counter(p.hash for p in self.posts)

    def unique_hashes(self) -> list[int]:
        return sorted({p.hash for p in self.posts})

    def counts(self) -> dict[str, int]:
        return {"posts": len(self.posts), "unique_hashes": len({p.hash for p in self.posts})}

    def per_community_counts(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for c in self.communities():
            hashes = {p.hash for p in self.posts if p.community == c}
            n = sum(1 for p in self.posts if p.community == c)
            out[c] = {"posts": n, "unique_hashes": len(hashes)}
        return out

    def for_communities(self, names: Iterable[str]) -> list[Post]:
        wanted = set(names)
        return [p for p in self.posts if p.community in wanted]


def _parse_post(obj: Mapping, line_no: int) -> Post:
    for key in ("id", "community", "timestamp", "phash"):
        if key not in obj:
            raise IngestError(line_no, f"missing field {key!r}")
    if not isinstance(obj["id"], str) or not isinstance(obj["community"], str):
        raise IngestError(line_no, "id and community must be strings")
    if not isinstance(obj["timestamp"], (int, float)) or isinstance(obj["timestamp"], bool):
        raise IngestError(line_no, "timestamp must be a number")
    try:
        h = parse_phash_hex(obj["phash"])
    except ValueError:
        raise IngestError(line_no, "invalid phash hex") from None
    score = obj.get("score")
    if score is not None and (not isinstance(score, int) or isinstance(score, bool)):
        raise IngestError(line_no, "score must be an integer when present")
    sub = obj.get("subcommunity")
    if sub is not None and not isinstance(sub, str):
        raise IngestError(line_no, "subcommunity must be a string when present")
    return Post(
        id=obj["id"],
        community=obj["community"],
        timestamp=float(obj["timestamp"]),
        hash=h,
        score=score,
        subcommunity=sub,
    )


def ingest_posts(
    lines: Iterable[str],
    *,
    strict: bool = True,
    window: tuple[float, float] | None = None,
) -> PostStore:
    """Ingest a posts JSONL stream.

    Each line holds {id, community, timestamp, phash} plus optional score
    and subcommunity. Duplicates on (community, id) keep the first
    occurrence. In strict mode the first bad line aborts; in lenient mode
    bad lines are skipped and counted.
    """
    store = PostStore()
    seen: set[tuple[str, str]] = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestError(line_no, f"invalid JSON: {e.msg}") from None
            if not isinstance(obj, dict):
                raise IngestError(line_no, "line is not a JSON object")
            post = _parse_post(obj, line_no)
            if window is not None and not (window[0] <= post.timestamp <= window[1]):
                raise IngestError(line_no, "timestamp outside study window")
        except IngestError as err:
            if strict:
                raise
            store.skipped += 1
            store.skip_reasons.append(str(err))
            continue
        key = (post.community, post.id)
        if key in seen:
            continue
        seen.add(key)
        store.posts.append(post)
    return store


def iter_jsonl(path) -> Iterator[str]:
    with open(path, "r", encoding="utf-8") as fh:
        yield from fh
