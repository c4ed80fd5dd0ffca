"""Encyclopedia corpus loading, screenshot filtering, medoid matching, and agreement.

Entries come from a meme-encyclopedia dump: one JSON object per line with a
name, category, tag set, and a gallery of image hashes. Cluster medoids are
matched against galleries at the same threshold used for clustering, and
each annotated cluster gets one representative entry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .hashing import format_phash_hex, parse_phash_hex
from .metric import ClusterProfile
from .pairwise import pairwise_cross

CATEGORIES = frozenset({"Meme", "Subculture", "Culture", "Event", "Person", "Site"})

POLITICAL_TAGS = frozenset(
    {"politics", "2016 us presidential election", "presidential election", "trump", "clinton"}
)
RACIST_TAGS = frozenset({"racism", "racist", "antisemitism"})


@dataclass(frozen=True)
class MemeEntry:
    entry_id: str
    name: str
    url: str
    category: str
    tags: frozenset[str]
    gallery: tuple[int, ...]


class CorpusError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


def load_corpus(lines: Iterable[str]) -> list[MemeEntry]:
    """Parse and validate an entry-per-line corpus; duplicate entry_id is fatal."""
    entries: list[MemeEntry] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusError(line_no, f"invalid JSON: {e.msg}") from None
        for key in ("entry_id", "name", "category"):
            if key not in obj:
                raise CorpusError(line_no, f"missing field {key!r}")
        if obj["category"] not in CATEGORIES:
            raise CorpusError(line_no, f"unknown category {obj['category']!r}")
        if obj["entry_id"] in seen:
            raise CorpusError(line_no, f"duplicate entry_id {obj['entry_id']!r}")
        seen.add(obj["entry_id"])
        tags = frozenset(str(t) for t in obj.get("tags", []))
        gallery: list[int] = []
        gallery_seen: set[int] = set()
        for hex_str in obj.get("gallery", []):
            try:
                h = parse_phash_hex(hex_str)
            except ValueError:
                raise CorpusError(line_no, f"invalid gallery hash {hex_str!r}") from None
            if h not in gallery_seen:  # galleries are de-duplicated, first wins
                gallery_seen.add(h)
                gallery.append(h)
        entries.append(
            MemeEntry(
                entry_id=obj["entry_id"],
                name=obj["name"],
                url=obj.get("url", ""),
                category=obj["category"],
                tags=tags,
                gallery=tuple(gallery),
            )
        )
    return entries


def load_scores(lines: Iterable[str]) -> dict[str, float]:
    """Read screenshot-score records: {"image": <hex or path>, "p_screenshot": p}."""
    scores: dict[str, float] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        obj = json.loads(line)
        if "image" not in obj or "p_screenshot" not in obj:
            raise CorpusError(line_no, "score record needs image and p_screenshot")
        p = float(obj["p_screenshot"])
        if not 0.0 <= p <= 1.0:
            raise CorpusError(line_no, f"p_screenshot out of [0, 1]: {p}")
        scores[str(obj["image"])] = p
    return scores


def filter_screenshots(
    corpus: Sequence[MemeEntry],
    scores: Mapping[str, float],
    cutoff: float,
) -> list[MemeEntry]:
    """Drop gallery hashes scored as screenshots at or above the cutoff.

    Hashes without a score are kept: a missed screenshot only adds noise,
    a false removal would silently delete meme imagery. Entries survive
    even when their gallery empties.
    """
    if not 0.0 <= cutoff <= 1.0:
        raise ValueError(f"cutoff must be in [0, 1], got {cutoff}")
    out = []
    for e in corpus:
        kept = tuple(h for h in e.gallery if scores.get(format_phash_hex(h), 0.0) < cutoff)
        out.append(MemeEntry(e.entry_id, e.name, e.url, e.category, e.tags, kept))
    return out


class EntryMatch(NamedTuple):
    entry_id: str
    matched: int  # gallery hashes within theta of the medoid
    gallery_size: int
    avg_distance: float


@dataclass
class ClusterAnnotation:
    cluster_id: int
    matches: list[EntryMatch]
    representative: str | None


def representative_entry(matches: Sequence[EntryMatch]) -> str | None:
    """Entry with the largest matched proportion of its gallery.

    Ties break by smaller mean Hamming distance, then by entry id.
    """
    if not matches:
        return None
    best = min(matches, key=lambda m: (-(m.matched / m.gallery_size), m.avg_distance, m.entry_id))
    return best.entry_id


def match_clusters(
    medoids: Sequence[tuple[int, int]],
    corpus: Sequence[MemeEntry],
    theta: int = 8,
    *,
    threads: int = 1,
) -> list[ClusterAnnotation]:
    """Match cluster medoids against every entry gallery at distance <= theta.

    medoids is a list of (cluster_id, hash). Each cluster lists every entry
    with at least one gallery hash in range, with the matched count and the
    mean distance of the matched hashes.
    """
    gallery_hashes: list[int] = []
    owner: list[int] = []
    for ei, entry in enumerate(corpus):
        for h in entry.gallery:
            gallery_hashes.append(h)
            owner.append(ei)

    queries = [h for _, h in medoids]
    hits = pairwise_cross(queries, gallery_hashes, theta, threads=threads)

    per_cluster: dict[int, dict[int, list[int]]] = {}
    for qi, ri, d in hits:
        per_cluster.setdefault(qi, {}).setdefault(owner[ri], []).append(d)

    annotations = []
    for qi, (cluster_id, _) in enumerate(medoids):
        matches = []
        for ei, dists in sorted(per_cluster.get(qi, {}).items()):
            entry = corpus[ei]
            matches.append(
                EntryMatch(
                    entry_id=entry.entry_id,
                    matched=len(dists),
                    gallery_size=len(entry.gallery),
                    avg_distance=float(np.mean(dists)),
                )
            )
        matches.sort(key=lambda m: m.entry_id)
        annotations.append(
            ClusterAnnotation(
                cluster_id=cluster_id,
                matches=matches,
                representative=representative_entry(matches),
            )
        )
    return annotations


class TagFlags(NamedTuple):
    racist: bool
    political: bool


def tag_group(tags: Iterable[str]) -> TagFlags:
    """Racist / political flags from the fixed tag lists; independent of each other."""
    t = set(tags)
    return TagFlags(racist=bool(t & RACIST_TAGS), political=bool(t & POLITICAL_TAGS))


def cluster_profiles(
    annotations: Sequence[ClusterAnnotation],
    corpus: Sequence[MemeEntry],
    medoids: Mapping[int, int],
) -> list[ClusterProfile]:
    """Build metric profiles: all matched names per category, not only the representative.

    Subculture entries fold into the culture name set.
    """
    by_id = {e.entry_id: e for e in corpus}
    profiles = []
    for ann in annotations:
        meme, people, culture = set(), set(), set()
        for m in ann.matches:
            entry = by_id[m.entry_id]
            if entry.category == "Meme":
                meme.add(entry.name)
            elif entry.category == "Person":
                people.add(entry.name)
            elif entry.category in ("Culture", "Subculture"):
                culture.add(entry.name)
        profiles.append(
            ClusterProfile(
                cluster_id=ann.cluster_id,
                medoid=medoids[ann.cluster_id],
                meme_names=frozenset(meme),
                people_names=frozenset(people),
                culture_names=frozenset(culture),
            )
        )
    return profiles


def cluster_flags(
    annotations: Sequence[ClusterAnnotation],
    corpus: Sequence[MemeEntry],
) -> dict[int, TagFlags]:
    """Per-cluster tag-group flags from the representative entry's tags."""
    by_id = {e.entry_id: e for e in corpus}
    flags = {}
    for ann in annotations:
        if ann.representative is None:
            flags[ann.cluster_id] = TagFlags(False, False)
        else:
            flags[ann.cluster_id] = tag_group(by_id[ann.representative].tags)
    return flags


def fleiss_kappa(ratings: np.ndarray | Sequence[Sequence[int]]) -> float:
    """Fleiss' agreement score over an N x categories count matrix.

    Every row must sum to the same rater count n >= 2. The degenerate case
    where all raters pick one category on every subject returns 1.0.
    """
    m = np.asarray(ratings, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError("ratings must be a non-empty 2-D count matrix")
    row_sums = m.sum(axis=1)
    n = row_sums[0]
    if n < 2 or not np.all(row_sums == n):
        raise ValueError("every subject needs the same rater count n >= 2")
    p_i = ((m * m).sum(axis=1) - n) / (n * (n - 1))
    p_bar = p_i.mean()
    p_j = m.sum(axis=0) / (m.shape[0] * n)
    p_e = float((p_j * p_j).sum())
    if p_e >= 1.0:
        return 1.0
    return float((p_bar - p_e) / (1.0 - p_e))
