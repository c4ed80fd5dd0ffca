"""Assigning posts to annotated clusters and the derived reports.

A post joins the nearest medoid within the match threshold (ties to the
smallest cluster id). Reports aggregate assignments into popularity,
daily-percentage, score-distribution, and subcommunity tables; every
percentage recomputes from the raw assignments, there is no hidden state.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .annotation import MemeEntry, TagFlags
from .hashing import Post
from .pairwise import nearest_within

GROUPS = ("all", "racist", "political")


@dataclass(frozen=True)
class Assignment:
    post_id: str
    community: str
    cluster_id: int
    distance: int


class UnsupportedCommunityError(ValueError):
    pass


def associate_posts(
    posts: Sequence[Post],
    medoids: Sequence[tuple[int, int]],
    theta: int = 8,
) -> list[Assignment]:
    """Assign each post whose hash lands within theta of a medoid.

    medoids is a list of (cluster_id, hash); the nearest medoid wins and
    ties go to the smallest cluster id. Posts farther than theta from all
    medoids are left out.
    """
    ordered = sorted(medoids)  # argmin over this order resolves ties to the smallest id
    med_hashes = [h for _, h in ordered]
    distinct = sorted({p.hash for p in posts})
    nearest = nearest_within(distinct, med_hashes, theta)
    by_hash = {
        h: (ordered[hit[0]][0], hit[1])
        for h, hit in zip(distinct, nearest)
        if hit is not None
    }
    out = []
    for p in posts:
        hit = by_hash.get(p.hash)
        if hit is not None:
            out.append(Assignment(p.id, p.community, hit[0], hit[1]))
    return out


def _community_totals(assignments: Iterable[Assignment]) -> dict[str, int]:
    totals: dict[str, int] = {}
    for a in assignments:
        totals[a.community] = totals.get(a.community, 0) + 1
    return totals


def popularity_report(
    assignments: Sequence[Assignment],
    representatives: Mapping[int, str | None],
    entries: Mapping[str, MemeEntry],
    *,
    category: str | None = None,
    top_k: int | None = None,
) -> list[dict]:
    """Post counts per representative entry, per community.

    Percentages are over the community's annotated posts (the denominator
    ignores the category filter, matching the headline tables). Rows sort
    by count descending then name ascending inside each community.
    """
    totals = _community_totals(assignments)
    counts: dict[tuple[str, str], int] = {}
    for a in assignments:
        entry_id = representatives.get(a.cluster_id)
        if entry_id is None:
            continue
        if category is not None and entries[entry_id].category != category:
            continue
        key = (a.community, entry_id)
        counts[key] = counts.get(key, 0) + 1

    rows = []
    for community in sorted(totals):
        ranked = sorted(
            ((n, entries[eid].name, eid) for (c, eid), n in counts.items() if c == community),
            key=lambda t: (-t[0], t[1], t[2]),
        )
        if top_k is not None:
            ranked = ranked[:top_k]
        for n, name, eid in ranked:
            rows.append(
                {
                    "community": community,
                    "entry_id": eid,
                    "name": name,
                    "category": entries[eid].category,
                    "posts": n,
                    "pct": 100.0 * n / totals[community],
                }
            )
    return rows


def _day(ts: float) -> str:
    return dt.datetime.fromtimestamp(ts, tz=dt.timezone.utc).strftime("%Y-%m-%d")


def temporal_report(
    assignments: Sequence[Assignment],
    posts: Sequence[Post],
    flags: Mapping[int, TagFlags],
    *,
    group: str = "all",
) -> list[dict]:
    """Percentage of each community's posts per UTC day that carry a matching meme.

    The denominator is every post the community made that day; the
    numerator is assigned posts passing the group filter (all, racist, or
    political). Days with no posts for a community are omitted.
    """
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}, got {group!r}")
    day_totals: dict[tuple[str, str], int] = {}
    post_day = {}
    for p in posts:
        day = _day(p.timestamp)
        post_day[(p.community, p.id)] = day
        day_totals[(p.community, day)] = day_totals.get((p.community, day), 0) + 1

    matched: dict[tuple[str, str], int] = {}
    for a in assignments:
        if group == "racist" and not flags.get(a.cluster_id, TagFlags(False, False)).racist:
            continue
        if group == "political" and not flags.get(a.cluster_id, TagFlags(False, False)).political:
            continue
        day = post_day[(a.community, a.post_id)]
        matched[(a.community, day)] = matched.get((a.community, day), 0) + 1

    rows = []
    for community, day in sorted(day_totals):
        total = day_totals[(community, day)]
        n = matched.get((community, day), 0)
        rows.append(
            {
                "community": community,
                "day": day,
                "group": group,
                "matching_posts": n,
                "total_posts": total,
                "pct": 100.0 * n / total,
            }
        )
    return rows


@dataclass
class EcdfStats:
    values: np.ndarray  # sorted
    cum: np.ndarray  # P(X <= value)
    mean: float
    median: float
    count: int


def _ecdf(scores: Sequence[int]) -> EcdfStats:
    v = np.sort(np.asarray(scores, dtype=np.float64))
    return EcdfStats(
        values=v,
        cum=np.arange(1, len(v) + 1) / len(v),
        mean=float(v.mean()),
        median=float(np.median(v)),
        count=len(v),
    )


def score_cdf(
    assignments: Sequence[Assignment],
    posts: Sequence[Post],
    community: str,
    group_members: set[int],
) -> tuple[EcdfStats, EcdfStats]:
    """Empirical score CDFs for assigned posts in vs out of a cluster group.

    Only communities with a voting system carry scores; a community whose
    posts have none is rejected.
    """
    scores = {
        (p.community, p.id): p.score for p in posts if p.community == community
    }
    if not any(s is not None for s in scores.values()):
        raise UnsupportedCommunityError(f"community {community!r} has no post scores")
    group_scores, rest_scores = [], []
    for a in assignments:
        if a.community != community:
            continue
        s = scores.get((a.community, a.post_id))
        if s is None:
            continue
        (group_scores if a.cluster_id in group_members else rest_scores).append(s)
    if not group_scores or not rest_scores:
        raise ValueError("both partitions need at least one scored post")
    return _ecdf(group_scores), _ecdf(rest_scores)


def subcommunity_report(
    assignments: Sequence[Assignment],
    posts: Sequence[Post],
    flags: Mapping[int, TagFlags],
    *,
    group: str = "all",
    top_k: int | None = None,
) -> list[dict]:
    """Counts of assigned posts per subcommunity, as a share of the community's matches."""
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}, got {group!r}")
    sub_of = {(p.community, p.id): p.subcommunity for p in posts}
    totals = _community_totals(assignments)
    counts: dict[tuple[str, str], int] = {}
    for a in assignments:
        if group == "racist" and not flags.get(a.cluster_id, TagFlags(False, False)).racist:
            continue
        if group == "political" and not flags.get(a.cluster_id, TagFlags(False, False)).political:
            continue
        sub = sub_of.get((a.community, a.post_id))
        if sub is None:
            continue
        counts[(a.community, sub)] = counts.get((a.community, sub), 0) + 1

    rows = []
    for community in sorted(totals):
        ranked = sorted(
            ((n, sub) for (c, sub), n in counts.items() if c == community),
            key=lambda t: (-t[0], t[1]),
        )
        if top_k is not None:
            ranked = ranked[:top_k]
        for n, sub in ranked:
            rows.append(
                {
                    "community": community,
                    "group": group,
                    "subcommunity": sub,
                    "posts": n,
                    "pct": 100.0 * n / totals[community],
                }
            )
    return rows


def write_report_csv(rows: Sequence[dict], fieldnames: Sequence[str], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for row in rows:
            out = dict(row)
            if "pct" in out:
                out["pct"] = f"{out['pct']:.4f}"
            w.writerow(out)


def write_assignments_jsonl(assignments: Sequence[Assignment], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in assignments:
            fh.write(
                json.dumps(
                    {
                        "post_id": a.post_id,
                        "community": a.community,
                        "cluster_id": a.cluster_id,
                        "distance": a.distance,
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")


def read_assignments_jsonl(lines: Iterable[str]) -> list[Assignment]:
    out = []
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        obj = json.loads(line)
        out.append(
            Assignment(
                post_id=obj["post_id"],
                community=obj["community"],
                cluster_id=int(obj["cluster_id"]),
                distance=int(obj["distance"]),
            )
        )
    return out
