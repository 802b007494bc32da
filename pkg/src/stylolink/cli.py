"""Command-line entry point: ``stylolink <command> --config run.ini``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from stylolink import bench as benchmod
from stylolink.config import ConfigError, RunConfig, load_config
from stylolink.corpus import (
    InputError,
    ValidationError,
    build_profiles,
    clean_posts,
    corpus_stats,
    ingest_posts,
    load_ground_truth,
    select_experiment_sets,
    write_ground_truth,
    write_posts,
)
from stylolink.evaluate import hill_climb_features, multi_ordering_mllf, write_feature_study, write_lr_report
from stylolink.features import extract_profile
from stylolink.mllf import MLLFConfig, build_known_index, export_traces, mllf_link, mllf_run
from stylolink.ranker import export_ranked_lists, rank_known
from stylolink.store import NotFoundError, StoreError, load_site, write_site
from stylolink.synth import generate_corpus
from stylolink.tagger import TagFormatError, ingest_external_tags

log = logging.getLogger("stylolink")


class StageError(RuntimeError):
    pass


def _manifest(cfg: RunConfig, command: str, outputs: list[Path]) -> None:
    path = cfg.run_dir / "manifest.json"
    data = {}
    if path.exists():
        data = json.loads(path.read_text(encoding="utf-8"))
    data["config_sha256"] = cfg.digest
    data.setdefault("commands", {})[command] = {
        "config_sha256": cfg.digest,
        "seed": cfg.seed,
        "synth_seed": cfg.synth.seed,
        "outputs": sorted(str(p.relative_to(cfg.run_dir)) for p in outputs),
    }
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _clean_path(cfg: RunConfig) -> Path:
    return cfg.run_dir / "clean" / "posts.jsonl"


def cmd_gen_synth(cfg: RunConfig, threads: int) -> list[Path]:
    posts, truth = generate_corpus(cfg.synth)
    cfg.synth_dir.mkdir(parents=True, exist_ok=True)
    out_posts, out_truth = cfg.synth_dir / "posts.jsonl", cfg.synth_dir / "truth.tsv"
    write_posts(posts, out_posts)
    write_ground_truth(truth, out_truth)
    log.info("wrote %d posts for %d authors", len(posts), cfg.synth.n_authors)
    return [out_posts, out_truth]


def cmd_clean(cfg: RunConfig, threads: int) -> list[Path]:
    cfg.validate(need=("posts",))
    raw = []
    malformed = 0
    for path in cfg.posts_paths:
        rep = ingest_posts(path)
        raw.extend(rep.posts)
        malformed += rep.malformed
    cleaned = sorted(clean_posts(raw, cfg.cleaning), key=lambda p: (p.site_id, p.author_id, p.post_id))
    min_words = {s: cfg.cleaning.rules_for(s).min_words for s in {p.site_id for p in raw}}
    profiles = build_profiles(cleaned, min_words)
    stats = corpus_stats(raw, profiles, sites={p.site_id for p in raw})

    out_dir = cfg.run_dir / "clean"
    out_dir.mkdir(parents=True, exist_ok=True)
    write_posts(cleaned, _clean_path(cfg))
    stats_path = out_dir / "stats.json"
    doc = stats.to_dict()
    doc["malformed_records"] = malformed
    stats_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("%d of %d posts kept, %d profiles >= min_words", len(cleaned), len(raw), len(profiles))
    return [_clean_path(cfg), stats_path]


def cmd_extract(cfg: RunConfig, threads: int) -> list[Path]:
    cfg.validate()
    src = _clean_path(cfg)
    if not src.exists():
        raise StageError(f"cleaned posts missing ({src}); run the 'clean' command first")
    posts = ingest_posts(src).posts
    min_words = {s: cfg.cleaning.rules_for(s).min_words for s in {p.site_id for p in posts}}
    profiles = build_profiles(posts, min_words)
    settings = cfg.extraction_settings()

    written = []
    for site in sorted({p.site_id for p in profiles}):
        tags = None
        if site in cfg.external_tags:
            tags = {tp.post_id: tp for tp in ingest_external_tags(cfg.external_tags[site])}
        site_profiles = [p for p in profiles if p.site_id == site]
        fn = partial(extract_profile, settings=settings, external_tags=tags)
        if threads > 1 and len(site_profiles) > 1:
            with ProcessPoolExecutor(threads) as pool:
                feats = list(pool.map(fn, site_profiles, chunksize=8))
        else:
            feats = [fn(p) for p in site_profiles]
        write_site(cfg.store_dir, site, feats)
        written.append(cfg.store_dir)
        log.info("extracted %d profiles for site %s", len(feats), site)
    return written


def _experiment(cfg: RunConfig):
    cfg.validate(need=("truth",))
    try:
        unknown_feats = load_site(cfg.store_dir, cfg.unknown_site, cfg.categories)
        known_feats = load_site(cfg.store_dir, cfg.known_site, cfg.categories)
    except NotFoundError as exc:
        raise StageError(f"{exc}; run the 'extract' command first") from None
    truth = load_ground_truth(cfg.truth_path, cfg.truth_delimiter, cfg.truth_header)
    size = cfg.author_size or len(known_feats)
    exp = select_experiment_sets(unknown_feats.values(), known_feats.values(), truth, size, cfg.seed)
    if not exp.unknowns:
        raise StageError("no ground-truth pairs survive cleaning for this direction")
    features = {pf.key: pf for pf in (*unknown_feats.values(), *known_feats.values())}
    return exp, features


def _mllf_config(cfg: RunConfig, author_size: int) -> MLLFConfig:
    return MLLFConfig(author_size=author_size, top_t_floor=cfg.top_t_floor, seed=cfg.seed, categories=cfg.categories)


def cmd_link(cfg: RunConfig, threads: int) -> list[Path]:
    exp, features = _experiment(cfg)
    index = build_known_index(exp, features)
    mcfg = _mllf_config(cfg, exp.author_size)
    mcfg = MLLFConfig(mcfg.resolve_order(index.matrices.keys()), exp.author_size, cfg.top_t_floor, cfg.seed, cfg.categories)
    results = mllf_run(exp, mcfg, features, index, workers=threads)
    baseline = [rank_known(features[p.key], index, mcfg.feature_order) for p in exp.unknowns]

    out = cfg.run_dir / "link"
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "ranked_lists.tsv", out / "link_results.tsv", out / "traces.tsv", out / "mllf_rankings.tsv"]
    export_ranked_lists(baseline, paths[0])
    with open(paths[3], "w", encoding="utf-8") as fh:
        # survivors of the last level first, then earlier eliminees; distances
        # come from the level that last ranked each candidate
        fh.write("unknown_id\trank\tknown_id\tdistance\n")
        for p in exp.unknowns:
            res = mllf_link(features[p.key], index, mcfg)
            for i, (k, d) in enumerate(res.ranking, start=1):
                fh.write(f"{p.author_id}\t{i}\t{k}\t{d:.17g}\n")
    with open(paths[1], "w", encoding="utf-8") as fh:
        fh.write("unknown_id\ttrue_known_id\tfinal_rank\tfinalized_level\n")
        for r in results:
            fh.write(f"{r.unknown_id}\t{r.target_id}\t{r.final_rank}\t{r.finalized_level}\n")
    export_traces(results, paths[2])
    return paths


def cmd_eval(cfg: RunConfig, threads: int) -> list[Path]:
    exp, features = _experiment(cfg)
    index = build_known_index(exp, features)
    report = multi_ordering_mllf(
        exp, features, cfg.n_orderings, cfg.seed, cfg.ks, cfg.categories, cfg.top_t_floor, index, threads
    )
    study = hill_climb_features(exp, features, cfg.beam, cfg.max_size, cfg.categories, index)

    out = cfg.run_dir / "eval"
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "lr_report.tsv", out / "lr_summary.json", out / "feature_study.tsv"]
    write_lr_report(report, paths[0], paths[1])
    write_feature_study(study, paths[2])
    for row in report.rows():
        log.info("Top-%d LR mean %.3f [%.3f, %.3f]", row["K"], row["mean"], row["min"], row["max"])
    return paths


def cmd_bench(cfg: RunConfig, threads: int) -> list[Path]:
    cfg.validate()
    need = max(cfg.bench_sizes)
    if cfg.bench_synthetic:
        pool = benchmod.synthetic_feature_profiles(need, cfg.known_site, cfg.seed, cfg.categories)
        unknowns = benchmod.synthetic_feature_profiles(cfg.bench_unknowns, cfg.unknown_site, cfg.seed + 1, cfg.categories)
    else:
        try:
            pool = list(load_site(cfg.store_dir, cfg.known_site, cfg.categories).values())
            unknowns = list(load_site(cfg.store_dir, cfg.unknown_site, cfg.categories).values())[: cfg.bench_unknowns]
        except NotFoundError as exc:
            raise StageError(f"{exc}; run 'extract' first or set [bench] synthetic = true") from None
    if len(pool) < need:
        raise StageError(f"bench needs {need} known profiles on {cfg.known_site}, store has {len(pool)}")
    report = benchmod.scaling_bench(unknowns, pool, cfg.bench_sizes, _mllf_config(cfg, need), cfg.bench_repeats)

    out = cfg.run_dir / "bench"
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "bench.tsv", out / "bench.json"]
    with open(paths[0], "w", encoding="utf-8") as fh:
        fh.write("size\tseconds_per_unknown\tpeak_level_rss\tmax_level_rss_change\n")
        for r in report.rows:
            fh.write(f"{r.size}\t{r.seconds_per_unknown!r}\t{max(r.level_rss)}\t{benchmod.max_level_change(r.level_rss)!r}\n")
    paths[1].write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    if report.fit:
        log.info("linear fit: slope %.3g s/author, R^2 %.4f", report.fit.slope, report.fit.r2)
    return paths


COMMANDS = {
    "gen-synth": cmd_gen_synth,
    "clean": cmd_clean,
    "extract": cmd_extract,
    "link": cmd_link,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stylolink", description="Stylometric cross-site account linking.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", "-c", help="INI run configuration")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--seed", type=int, default=None, help="override experiment and synth seeds")
    ap.add_argument("--verbose", "-v", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, {"seed": args.seed})
        cfg.validate()
        outputs = COMMANDS[args.command](cfg, max(1, args.threads))
        cfg.run_dir.mkdir(parents=True, exist_ok=True)
        _manifest(cfg, args.command, outputs)
    except (ConfigError, InputError, ValidationError, StoreError, StageError, TagFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
