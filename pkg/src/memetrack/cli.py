"""Stage-by-stage pipeline CLI with file-based handoff.

Every subcommand reads the artifacts of earlier stages from a run
directory, writes its own, refreshes a sha256 manifest, and persists the
resolved configuration. Outputs are pure functions of (inputs, config,
seed), so a rerun into a fresh directory is byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import click
import numpy as np

from . import annotation, association, clustering, graphs, hawkes, pairwise
from .config import ConfigError, PipelineConfig, load_config
from .hashing import (
    compute_phash,
    format_phash_hex,
    ingest_posts,
    iter_jsonl,
    parse_phash_hex,
)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")

ART_IMAGE_HASHES = "image_hashes.jsonl"
ART_CORPUS_HASHES = "corpus_hashes.txt"
ART_NEIGHBORS = "neighbors.bin"
ART_CLUSTERING = "clustering.json"
ART_SWEEP = "eps_sweep.csv"
ART_ANNOTATIONS = "annotations.json"
ART_DENDROGRAM = "dendrogram.csv"
ART_GRAPH_BASE = "meme_graph"
ART_ASSIGNMENTS = "assignments.jsonl"
ART_EVENTS = "events.jsonl"
ART_MODEL = "hawkes_model.json"
ART_CHAIN = "hawkes_chain.csv"
ART_MODELS = "hawkes_models.jsonl"
ART_INFLUENCE_RAW = "influence_raw.csv"
ART_INFLUENCE_NORM = "influence_normalized.csv"
ART_KAPPA = "kappa.txt"
MANIFEST = "manifest.json"
RESOLVED_CONFIG = "config_resolved.json"


class Stage:
    """Shared per-invocation state: run directory, config, bookkeeping."""

    def __init__(self, run_dir: Path, config: PipelineConfig):
        self.run_dir = run_dir
        self.config = config

    def path(self, name: str) -> Path:
        return self.run_dir / name

    def require(self, name: str, producer: str) -> Path:
        p = self.path(name)
        if not p.exists():
            raise click.ClickException(f"missing artifact '{name}'; run '{producer}' first")
        return p

    def finish(self) -> None:
        (self.run_dir / RESOLVED_CONFIG).write_text(self.config.to_json(), encoding="utf-8")
        manifest = {}
        for p in sorted(self.run_dir.rglob("*")):
            if not p.is_file() or p.name == MANIFEST:
                continue
            digest = hashlib.sha256(p.read_bytes()).hexdigest()
            manifest[str(p.relative_to(self.run_dir))] = digest
        with open(self.run_dir / MANIFEST, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")


def _common_options(fn):
    fn = click.option("--run-dir", required=True, type=click.Path(path_type=Path), help="artifact directory")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)(fn)
    fn = click.option("--seed", type=int, default=None, help="override the config seed")(fn)
    fn = click.option("--threads", type=int, default=None, help="worker cap for parallel stages")(fn)
    fn = click.option("--strict/--lenient", "strict", default=None, help="abort on bad input lines vs skip them")(fn)
    return fn


def _stage(run_dir: Path, config_path, seed, threads, strict) -> Stage:
    try:
        cfg = load_config(config_path) if config_path else PipelineConfig()
        if seed is not None:
            cfg.seed = seed
        if threads is not None:
            cfg.threads = threads
        if strict is not None:
            cfg.strict = strict
        cfg.validate()
    except ConfigError as e:
        raise click.ClickException(f"invalid configuration: {e}")
    run_dir.mkdir(parents=True, exist_ok=True)
    return Stage(run_dir, cfg)


@click.group()
def main():
    """Meme pipeline: hashing, clustering, annotation, association, influence."""


@main.command("hash")
@_common_options
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
def cmd_hash(run_dir, config_path, seed, threads, strict, images):
    """Hash every image under a directory into image_hashes.jsonl."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    from PIL import Image

    files = sorted(
        p.relative_to(images) for p in images.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES
    )
    skipped = 0
    with open(stage.path(ART_IMAGE_HASHES), "w", encoding="utf-8") as out:
        for rel in files:
            try:
                with Image.open(images / rel) as img:
                    raster = np.asarray(img.convert("RGB"))
                h = compute_phash(raster)
            except Exception as e:
                if stage.config.strict:
                    raise click.ClickException(f"cannot hash {rel}: {e}")
                skipped += 1
                continue
            out.write(json.dumps({"image": str(rel), "phash": format_phash_hex(h)}, sort_keys=True) + "\n")
    stage.finish()
    click.echo(f"hashed {len(files) - skipped} images ({skipped} skipped)")


def _load_posts(stage: Stage, posts_path: Path, communities: str | None):
    store = ingest_posts(iter_jsonl(posts_path), strict=stage.config.strict)
    if communities:
        wanted = [c.strip() for c in communities.split(",") if c.strip()]
        posts = store.for_communities(wanted)
    else:
        posts = store.posts
    return store, posts


@main.command("pairwise")
@_common_options
@click.option("--posts", "posts_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--communities", default=None, help="comma-separated source communities (default: all)")
def cmd_pairwise(run_dir, config_path, seed, threads, strict, posts_path, communities):
    """Distinct-hash corpus and neighbor lists at the clustering radius."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    _, posts = _load_posts(stage, posts_path, communities)
    hashes = sorted({p.hash for p in posts})
    with open(stage.path(ART_CORPUS_HASHES), "w", encoding="utf-8") as fh:
        for h in hashes:
            fh.write(format_phash_hex(h) + "\n")
    neighbors = pairwise.pairwise_within(hashes, stage.config.eps, threads=stage.config.threads)
    with open(stage.path(ART_NEIGHBORS), "wb") as fh:
        pairwise.write_neighbors(fh, neighbors)
    stage.finish()
    click.echo(f"compared {len(hashes)} distinct hashes at eps={stage.config.eps}")


def _read_corpus_hashes(path: Path) -> list[int]:
    return [parse_phash_hex(line.strip()) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


@main.command("cluster")
@_common_options
def cmd_cluster(run_dir, config_path, seed, threads, strict):
    """Density clustering over the neighbor lists."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    hashes = _read_corpus_hashes(stage.require(ART_CORPUS_HASHES, "pairwise"))
    with open(stage.require(ART_NEIGHBORS, "pairwise"), "rb") as fh:
        neighbors = pairwise.read_neighbors(fh)
    if len(neighbors) != len(hashes):
        raise click.ClickException("neighbors.bin does not match corpus_hashes.txt")
    result = clustering.dbscan(neighbors, stage.config.min_pts, hashes)
    clustering.write_clustering_json(result, hashes, stage.path(ART_CLUSTERING))
    stage.finish()
    click.echo(f"{len(result.clusters)} clusters, {len(result.noise)} noise points")


@main.command("sweep")
@_common_options
@click.option("--posts", "posts_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--communities", default=None)
@click.option("--eps-list", default="2,4,6,8,10", show_default=True)
def cmd_sweep(run_dir, config_path, seed, threads, strict, posts_path, communities, eps_list):
    """Cluster count and noise percentage across clustering radii."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    _, posts = _load_posts(stage, posts_path, communities)
    hashes = sorted({p.hash for p in posts})
    radii = [int(x) for x in eps_list.split(",") if x.strip()]
    rows = clustering.eps_sweep(hashes, radii, stage.config.min_pts, threads=stage.config.threads)
    clustering.write_eps_sweep_csv(rows, stage.path(ART_SWEEP))
    stage.finish()
    for eps, k, pct in rows:
        click.echo(f"eps={eps}: {k} clusters, {pct:.1f}% noise")


@main.command("annotate")
@_common_options
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--scores", "scores_path", default=None, type=click.Path(exists=True, path_type=Path))
def cmd_annotate(run_dir, config_path, seed, threads, strict, corpus_path, scores_path):
    """Match cluster medoids against the annotation corpus."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    clust = clustering.read_clustering_json(stage.require(ART_CLUSTERING, "cluster"))
    corpus = annotation.load_corpus(iter_jsonl(corpus_path))
    if scores_path is not None:
        scores = annotation.load_scores(iter_jsonl(scores_path))
        corpus = annotation.filter_screenshots(corpus, scores, stage.config.screenshot_cutoff)
    medoids = [(c["id"], c["medoid"]) for c in clust["clusters"]]
    anns = annotation.match_clusters(medoids, corpus, stage.config.theta, threads=stage.config.threads)
    profiles = annotation.cluster_profiles(anns, corpus, dict(medoids))
    flags = annotation.cluster_flags(anns, corpus)
    names = {e.entry_id: e.name for e in corpus}
    sizes = {c["id"]: len(c["members"]) for c in clust["clusters"]}

    payload = {
        "theta": stage.config.theta,
        "clusters": [
            {
                "cluster_id": ann.cluster_id,
                "medoid_hex": format_phash_hex(dict(medoids)[ann.cluster_id]),
                "size": sizes[ann.cluster_id],
                "matches": [m._asdict() for m in ann.matches],
                "representative": ann.representative,
                "representative_name": names.get(ann.representative, ""),
                "names": {
                    "meme": sorted(prof.meme_names),
                    "people": sorted(prof.people_names),
                    "culture": sorted(prof.culture_names),
                },
                "flags": {"racist": flags[ann.cluster_id].racist, "political": flags[ann.cluster_id].political},
            }
            for ann, prof in zip(anns, profiles)
        ],
    }
    with open(stage.path(ART_ANNOTATIONS), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    stage.finish()
    annotated = sum(1 for a in anns if a.representative is not None)
    click.echo(f"annotated {annotated} of {len(anns)} clusters")


def _read_annotations(stage: Stage):
    with open(stage.require(ART_ANNOTATIONS, "annotate"), "r", encoding="utf-8") as fh:
        return json.load(fh)


def _profiles_from_annotations(payload) -> list:
    from .metric import ClusterProfile

    profiles = []
    for c in payload["clusters"]:
        profiles.append(
            ClusterProfile(
                cluster_id=c["cluster_id"],
                medoid=parse_phash_hex(c["medoid_hex"]),
                meme_names=frozenset(c["names"]["meme"]),
                people_names=frozenset(c["names"]["people"]),
                culture_names=frozenset(c["names"]["culture"]),
            )
        )
    return profiles


@main.command("dendrogram")
@_common_options
def cmd_dendrogram(run_dir, config_path, seed, threads, strict):
    """Single-linkage merge list over the cluster metric."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    payload = _read_annotations(stage)
    profiles = _profiles_from_annotations(payload)
    if len(profiles) < 2:
        raise click.ClickException("dendrogram needs at least two clusters")
    dend = graphs.linkage(profiles, stage.config.metric_config())
    graphs.write_dendrogram_csv(dend, stage.path(ART_DENDROGRAM))
    stage.finish()
    click.echo(f"{len(dend.merges)} merges over {len(profiles)} clusters")


def _origin_labels(stage: Stage, payload, posts_path, communities):
    """Node labels: representative name, majority origin community, size, flags."""
    origin: dict[int, str] = {}
    if posts_path is not None:
        clust = clustering.read_clustering_json(stage.require(ART_CLUSTERING, "cluster"))
        member_of = {}
        for c in clust["clusters"]:
            for h in c["members"]:
                member_of[h] = c["id"]
        _, posts = _load_posts(stage, posts_path, communities)
        tallies: dict[int, dict[str, int]] = {}
        for p in posts:
            cid = member_of.get(p.hash)
            if cid is not None:
                t = tallies.setdefault(cid, {})
                t[p.community] = t.get(p.community, 0) + 1
        for cid, t in tallies.items():
            origin[cid] = sorted(t.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    labels = {}
    for c in payload["clusters"]:
        labels[c["cluster_id"]] = graphs.NodeLabel(
            name=c["representative_name"],
            community=origin.get(c["cluster_id"], ""),
            size=c["size"],
            racist=c["flags"]["racist"],
            political=c["flags"]["political"],
        )
    return labels


@main.command("metric-graph")
@_common_options
@click.option("--format", "fmt", type=click.Choice(graphs.EXPORT_FORMATS), default="graphml", show_default=True)
@click.option("--posts", "posts_path", default=None, type=click.Path(exists=True, path_type=Path), help="posts for origin-community labels")
@click.option("--communities", default=None)
def cmd_metric_graph(run_dir, config_path, seed, threads, strict, fmt, posts_path, communities):
    """Threshold graph at kappa with the one-pass degree filter."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    payload = _read_annotations(stage)
    profiles = _profiles_from_annotations(payload)
    labels = _origin_labels(stage, payload, posts_path, communities)
    g = graphs.build_graph(
        profiles,
        stage.config.metric_config(),
        kappa=stage.config.kappa,
        degree_min=stage.config.degree_min,
        labels=labels,
    )
    out = stage.path(f"{ART_GRAPH_BASE}.{fmt}")
    graphs.export_graph(g, out, fmt)
    stage.finish()
    click.echo(f"graph: {len(g.nodes)} nodes, {len(g.edges)} edges -> {out.name}")


@main.command("associate")
@_common_options
@click.option("--posts", "posts_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--communities", default=None)
def cmd_associate(run_dir, config_path, seed, threads, strict, posts_path, communities):
    """Assign posts from any community to annotated cluster medoids."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    payload = _read_annotations(stage)
    medoids = [
        (c["cluster_id"], parse_phash_hex(c["medoid_hex"]))
        for c in payload["clusters"]
        if c["representative"] is not None
    ]
    if not medoids:
        raise click.ClickException("no annotated clusters to associate against")
    _, posts = _load_posts(stage, posts_path, communities)
    assignments = association.associate_posts(posts, medoids, stage.config.theta)
    association.write_assignments_jsonl(assignments, stage.path(ART_ASSIGNMENTS))
    stage.finish()
    click.echo(f"assigned {len(assignments)} of {len(posts)} posts")


@main.command("report")
@_common_options
@click.option("--posts", "posts_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--top-k", type=int, default=20, show_default=True)
def cmd_report(run_dir, config_path, seed, threads, strict, posts_path, corpus_path, top_k):
    """Popularity, temporal, score, and subcommunity tables from assignments."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    payload = _read_annotations(stage)
    assignments = association.read_assignments_jsonl(iter_jsonl(stage.require(ART_ASSIGNMENTS, "associate")))
    store, posts = _load_posts(stage, posts_path, None)
    corpus = annotation.load_corpus(iter_jsonl(corpus_path))
    entries = {e.entry_id: e for e in corpus}
    reps = {c["cluster_id"]: c["representative"] for c in payload["clusters"]}
    flags = {
        c["cluster_id"]: annotation.TagFlags(c["flags"]["racist"], c["flags"]["political"])
        for c in payload["clusters"]
    }

    pop_fields = ["community", "entry_id", "name", "category", "posts", "pct"]
    association.write_report_csv(
        association.popularity_report(assignments, reps, entries),
        pop_fields,
        stage.path("popularity.csv"),
    )
    association.write_report_csv(
        association.popularity_report(assignments, reps, entries, category="Meme", top_k=top_k),
        pop_fields,
        stage.path("popularity_memes.csv"),
    )
    association.write_report_csv(
        association.popularity_report(assignments, reps, entries, category="Person", top_k=top_k),
        pop_fields,
        stage.path("popularity_people.csv"),
    )

    temporal_rows = []
    for group in association.GROUPS:
        temporal_rows.extend(association.temporal_report(assignments, posts, flags, group=group))
    association.write_report_csv(
        temporal_rows,
        ["community", "day", "group", "matching_posts", "total_posts", "pct"],
        stage.path("temporal.csv"),
    )

    sub_rows = []
    for group in association.GROUPS:
        sub_rows.extend(association.subcommunity_report(assignments, posts, flags, group=group, top_k=10))
    association.write_report_csv(
        sub_rows,
        ["community", "group", "subcommunity", "posts", "pct"],
        stage.path("subcommunities.csv"),
    )

    scored = sorted({p.community for p in posts if p.score is not None})
    summary_rows, cdf_rows = [], []
    for community in scored:
        for partition, pick in (("racist", lambda f: f.racist), ("political", lambda f: f.political)):
            members = {cid for cid, f in flags.items() if pick(f)}
            try:
                group_stats, rest_stats = association.score_cdf(assignments, posts, community, members)
            except ValueError:
                continue  # a partition can be empty on small corpora
            for side, stats in (("group", group_stats), ("complement", rest_stats)):
                summary_rows.append(
                    {
                        "community": community,
                        "partition": partition,
                        "side": side,
                        "n": stats.count,
                        "mean": f"{stats.mean:.4f}",
                        "median": f"{stats.median:.4f}",
                    }
                )
                for v, cfrac in zip(stats.values, stats.cum):
                    cdf_rows.append(
                        {
                            "community": community,
                            "partition": partition,
                            "side": side,
                            "value": f"{v:.6f}",
                            "cum": f"{cfrac:.6f}",
                        }
                    )
    association.write_report_csv(
        summary_rows, ["community", "partition", "side", "n", "mean", "median"], stage.path("scores.csv")
    )
    association.write_report_csv(
        cdf_rows, ["community", "partition", "side", "value", "cum"], stage.path("scores_cdf.csv")
    )
    stage.finish()
    click.echo("reports written: popularity, temporal, scores, subcommunities")


def _write_events(path: Path, events: hawkes.EventStream, communities: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t, k in zip(events.times, events.procs):
            fh.write(json.dumps({"t": float(t), "community": communities[int(k)]}, sort_keys=True) + "\n")


def _read_events(path: Path) -> tuple[hawkes.EventStream, list[str]]:
    records = []
    for line in iter_jsonl(path):
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        records.append((float(obj["t"]), str(obj["community"])))
    communities = sorted({c for _, c in records})
    index = {c: i for i, c in enumerate(communities)}
    stream = hawkes.EventStream.from_records([(t, index[c]) for t, c in records])
    return stream, communities


def _streams_from_assignments(stage: Stage, posts_path, per_cluster: bool):
    assignments = association.read_assignments_jsonl(iter_jsonl(stage.require(ART_ASSIGNMENTS, "associate")))
    _, posts = _load_posts(stage, posts_path, None)
    ts_of = {(p.community, p.id): p.timestamp for p in posts}
    communities = sorted({a.community for a in assignments})
    index = {c: i for i, c in enumerate(communities)}
    recs = []
    for a in assignments:
        t = ts_of.get((a.community, a.post_id))
        if t is None:
            raise click.ClickException(f"assignment references unknown post {a.post_id!r}")
        recs.append((t, index[a.community], a.cluster_id))
    if not recs:
        raise click.ClickException("no assigned posts to fit")
    t0 = min(t for t, _, _ in recs)
    horizon = max(t for t, _, _ in recs) - t0
    if per_cluster:
        by_cluster: dict[int, list[tuple[float, int]]] = {}
        for t, k, cid in recs:
            by_cluster.setdefault(cid, []).append((t - t0, k))
        streams = {
            cid: hawkes.EventStream.from_records(r, horizon=horizon)
            for cid, r in sorted(by_cluster.items())
        }
        return streams, communities
    stream = hawkes.EventStream.from_records([(t - t0, k) for t, k, _ in recs], horizon=horizon)
    return stream, communities


@main.command("hawkes-fit")
@_common_options
@click.option("--events", "events_path", default=None, type=click.Path(exists=True, path_type=Path))
@click.option("--posts", "posts_path", default=None, type=click.Path(exists=True, path_type=Path))
@click.option("--per-cluster", is_flag=True, default=False, help="fit one model per cluster from assignments")
def cmd_hawkes_fit(run_dir, config_path, seed, threads, strict, events_path, posts_path, per_cluster):
    """Gibbs-sample background rates and excitation weights."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    cfg = stage.config
    kernel = hawkes.ExpKernel(beta=cfg.hawkes_beta, dmax=cfg.hawkes_dmax)
    priors = hawkes.GammaPriors(cfg.prior_shape, cfg.prior_rate, cfg.prior_shape, cfg.prior_rate)

    if events_path is not None:
        stream, communities = _read_events(events_path)
        fit = hawkes.fit_gibbs(
            stream, len(communities), kernel, cfg.hawkes_iters, cfg.hawkes_burnin, priors, cfg.seed
        )
        with open(stage.path(ART_MODEL), "w", encoding="utf-8") as fh:
            json.dump(fit.model.to_json(communities), fh, indent=1, sort_keys=True)
            fh.write("\n")
        _write_chain_csv(stage.path(ART_CHAIN), fit, communities)
        stage.finish()
        click.echo(f"fitted {len(communities)}-process model over {len(stream)} events")
        return

    if posts_path is None:
        raise click.ClickException("provide --events, or --posts to fit from assignments")

    if per_cluster:
        streams, communities = _streams_from_assignments(stage, posts_path, per_cluster=True)
        with open(stage.path(ART_MODELS), "w", encoding="utf-8") as fh:
            for cid, stream in streams.items():
                fit = hawkes.fit_gibbs(
                    stream, len(communities), kernel, cfg.hawkes_iters, cfg.hawkes_burnin, priors, cfg.seed
                )
                obj = fit.model.to_json(communities)
                obj["cluster_id"] = cid
                fh.write(json.dumps(obj, sort_keys=True) + "\n")
        stage.finish()
        click.echo(f"fitted {len(streams)} per-cluster models")
    else:
        stream, communities = _streams_from_assignments(stage, posts_path, per_cluster=False)
        fit = hawkes.fit_gibbs(
            stream, len(communities), kernel, cfg.hawkes_iters, cfg.hawkes_burnin, priors, cfg.seed
        )
        with open(stage.path(ART_MODEL), "w", encoding="utf-8") as fh:
            json.dump(fit.model.to_json(communities), fh, indent=1, sort_keys=True)
            fh.write("\n")
        _write_chain_csv(stage.path(ART_CHAIN), fit, communities)
        stage.finish()
        click.echo(f"fitted {len(communities)}-process model over {len(stream)} events")


def _write_chain_csv(path: Path, fit: hawkes.GibbsFit, communities: list[str]) -> None:
    K = len(communities)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = ["iter"] + [f"lambda0_{c}" for c in communities]
        header += [f"w_{s}_to_{d}" for s in communities for d in communities]
        w.writerow(header)
        for it in range(fit.lambda0_chain.shape[0]):
            row = [it]
            row += [f"{x:.8g}" for x in fit.lambda0_chain[it]]
            row += [f"{fit.w_chain[it, s, d]:.8g}" for s in range(K) for d in range(K)]
            w.writerow(row)


@main.command("hawkes-sim")
@_common_options
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--horizon", type=float, required=True)
def cmd_hawkes_sim(run_dir, config_path, seed, threads, strict, model_path, horizon):
    """Simulate an event stream from a fitted or hand-written model."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    with open(model_path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    model = hawkes.HawkesModel.from_json(obj)
    communities = obj.get("communities") or [f"p{i}" for i in range(model.K)]
    events = hawkes.simulate(model, horizon, stage.config.seed)
    _write_events(stage.path(ART_EVENTS), events, communities)
    stage.finish()
    click.echo(f"simulated {len(events)} events over horizon {horizon}")


def _influence_csv(path: Path, matrix: np.ndarray, communities: list[str], mode: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# mode={mode}\n")
        w = csv.writer(fh)
        w.writerow(["source"] + communities)
        for s, name in enumerate(communities):
            row = [name]
            for d in range(len(communities)):
                v = matrix[s, d]
                row.append("" if np.isnan(v) else f"{v:.6f}")
            w.writerow(row)


@main.command("influence")
@_common_options
@click.option("--model", "model_path", default=None, type=click.Path(exists=True, path_type=Path))
@click.option("--events", "events_path", default=None, type=click.Path(exists=True, path_type=Path))
@click.option("--models", "models_path", default=None, type=click.Path(exists=True, path_type=Path))
@click.option("--posts", "posts_path", default=None, type=click.Path(exists=True, path_type=Path))
def cmd_influence(run_dir, config_path, seed, threads, strict, model_path, events_path, models_path, posts_path):
    """Root-cause attribution and raw/normalized influence matrices."""
    stage = _stage(run_dir, config_path, seed, threads, strict)

    if models_path is not None:
        if posts_path is None:
            raise click.ClickException("per-cluster influence needs --posts to rebuild event streams")
        streams, communities = _streams_from_assignments(stage, posts_path, per_cluster=True)
        parts = []
        with open(models_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                model = hawkes.HawkesModel.from_json(obj)
                stream = streams.get(obj.get("cluster_id"))
                if stream is None:
                    raise click.ClickException(f"model for unknown cluster {obj.get('cluster_id')!r}")
                parts.append((hawkes.attribute_root_cause(model, stream), stream))
        K = len(communities)
        raw = hawkes.aggregate_influence(parts, K, "raw")
        norm = hawkes.aggregate_influence(parts, K, "normalized")
    else:
        if model_path is None:
            model_p = stage.require(ART_MODEL, "hawkes-fit")
        else:
            model_p = model_path
        with open(model_p, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        model = hawkes.HawkesModel.from_json(obj)
        if events_path is not None:
            stream, communities = _read_events(events_path)
            if len(communities) > model.K:
                raise click.ClickException("event stream names more communities than the model has")
            communities = obj.get("communities") or communities
        elif posts_path is not None:
            stream, communities = _streams_from_assignments(stage, posts_path, per_cluster=False)
        else:
            raise click.ClickException("provide --events or --posts for the event stream")
        if len(communities) != model.K:
            raise click.ClickException("community count does not match the model")
        root = hawkes.attribute_root_cause(model, stream)
        raw = hawkes.influence_matrix(root, stream, model.K, "raw")
        norm = hawkes.influence_matrix(root, stream, model.K, "normalized")
        communities = list(communities)

    _influence_csv(stage.path(ART_INFLUENCE_RAW), raw, communities, "raw")
    _influence_csv(stage.path(ART_INFLUENCE_NORM), norm, communities, "normalized")
    stage.finish()
    click.echo("influence matrices written (raw and normalized)")


@main.command("kappa")
@_common_options
@click.option("--ratings", "ratings_path", required=True, type=click.Path(exists=True, path_type=Path))
def cmd_kappa(run_dir, config_path, seed, threads, strict, ratings_path):
    """Inter-annotator agreement from a subjects x categories count CSV."""
    stage = _stage(run_dir, config_path, seed, threads, strict)
    rows = []
    with open(ratings_path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if row:
                rows.append([int(x) for x in row])
    try:
        value = annotation.fleiss_kappa(np.array(rows))
    except ValueError as e:
        raise click.ClickException(str(e))
    stage.path(ART_KAPPA).write_text(f"{value:.6f}\n", encoding="utf-8")
    stage.finish()
    click.echo(f"kappa = {value:.6f}")


if __name__ == "__main__":
    main(prog_name="memetrack")
