"""Multi-level linking: re-rank with one feature category per level while
halving the candidate set between levels."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from stylolink.corpus import ExperimentSets
from stylolink.features import ALL_CATEGORIES, FeatureCategory, ProfileFeatures
from stylolink.ranker import CandidateIndex


class ConfigError(ValueError):
    pass


@dataclass
class MLLFConfig:
    """``feature_order`` wins when given; otherwise the enabled ``categories``
    are shuffled with ``seed``. ``author_size`` is the initial topT and
    defaults to the number of knowns."""

    feature_order: tuple[FeatureCategory, ...] | None = None
    author_size: int | None = None
    top_t_floor: int = 1
    seed: int = 0
    categories: tuple[FeatureCategory, ...] = ALL_CATEGORIES

    def __post_init__(self):
        if self.feature_order is not None:
            self.feature_order = tuple(FeatureCategory(c) for c in self.feature_order)
            if len(set(self.feature_order)) != len(self.feature_order):
                raise ConfigError("feature_order contains duplicates")
        if self.author_size is not None and self.author_size < 1:
            raise ConfigError("author_size must be >= 1")
        if self.top_t_floor < 1:
            raise ConfigError("top_t_floor must be >= 1")

    def resolve_order(self, available: Iterable[FeatureCategory] | None = None) -> tuple[FeatureCategory, ...]:
        if self.feature_order is not None:
            return self.feature_order
        pool = sorted(set(self.categories) & set(available if available is not None else self.categories))
        rng = np.random.default_rng(self.seed)
        return tuple(pool[i] for i in rng.permutation(len(pool)))


def shuffled_order(categories: Iterable[FeatureCategory], seed: int) -> tuple[FeatureCategory, ...]:
    return MLLFConfig(categories=tuple(categories), seed=seed).resolve_order()


def halving_schedule(author_size: int, n_levels: int, floor: int = 1) -> list[int]:
    """topT for levels 1..n_levels-1: floor division by 2, clamped at ``floor``."""
    out, t = [], author_size
    for _ in range(n_levels - 1):
        t = max(t // 2, floor)
        out.append(t)
    return out


@dataclass
class LevelTrace:
    level: int
    category: FeatureCategory
    candidate_count: int
    position: int | None  # 0-based; None when no target is tracked


@dataclass
class LinkResult:
    unknown_id: str
    final_rank: int | None
    finalized_level: int
    trace: list[LevelTrace] = field(default_factory=list)
    ranking: list[tuple[str, float]] = field(default_factory=list)
    target_id: str | None = None


def mllf_link(
    unknown: ProfileFeatures,
    knowns: Sequence[ProfileFeatures] | CandidateIndex,
    config: MLLFConfig,
    target_id: str | None = None,
    probe: Callable[[int], None] | None = None,
) -> LinkResult:
    """Link one unknown profile.

    With ``target_id`` the cascade stops as soon as the target falls outside
    the next level's topT, and ``final_rank`` is its 1-based rank in the
    candidate set of the level where it was finalized. Without a target every
    level runs and ``ranking`` lists survivors first, then earlier-level
    eliminees in their last ranked order.

    Categories the unknown lacks (or has empty) are skipped without using a
    halving step. ``probe(level)`` is called after each level is ranked.
    """
    index = knowns if isinstance(knowns, CandidateIndex) else CandidateIndex(knowns)
    if not config.feature_order and config.feature_order is not None:
        raise ConfigError("feature_order is empty")
    order = [c for c in config.resolve_order(index.matrices.keys()) if unknown.has(c)]
    if not order:
        raise ConfigError(f"unknown {unknown.author_id!r} has none of the configured categories")

    top_t = config.author_size if config.author_size is not None else len(index)
    target_row = None
    if target_id is not None:
        target_row = index.ids.index(target_id)

    def position(rows):
        if target_row is None:
            return None
        return int(np.flatnonzero(rows == target_row)[0])

    rows, dists = index.rank(unknown, [order[0]])
    trace = [LevelTrace(0, order[0], len(rows), position(rows))]
    if probe:
        probe(0)
    dropped: list[tuple[np.ndarray, np.ndarray]] = []
    for cat in order[1:]:
        top_t = max(top_t // 2, config.top_t_floor)
        pos = trace[-1].position
        if pos is not None and pos >= top_t:
            break
        dropped.append((rows[top_t:], dists[top_t:]))
        rows, dists = index.rank(unknown, [cat], rows[:top_t])
        trace.append(LevelTrace(len(trace), cat, len(rows), position(rows)))
        if probe:
            probe(trace[-1].level)

    ranking = [(index.ids[r], float(d)) for r, d in zip(rows, dists)]
    for r_tail, d_tail in reversed(dropped):
        ranking.extend((index.ids[r], float(d)) for r, d in zip(r_tail, d_tail))
    last = trace[-1]
    return LinkResult(
        unknown_id=unknown.author_id,
        final_rank=None if last.position is None else last.position + 1,
        finalized_level=last.level,
        trace=trace,
        ranking=ranking,
        target_id=target_id,
    )


def mllf_run(
    experiment: ExperimentSets,
    config: MLLFConfig,
    features: Mapping[tuple[str, str], ProfileFeatures],
    index: CandidateIndex | None = None,
    workers: int = 1,
    keep_ranking: bool = False,
) -> list[LinkResult]:
    """Evaluate every unknown of ``experiment`` against its knowns.

    ``features`` maps (author_id, site_id) to stored features; a known with
    no entry is treated as having only empty vectors.
    """
    if index is None:
        index = build_known_index(experiment, features)
    truth = experiment.truth.forward()
    cfg = MLLFConfig(
        feature_order=config.resolve_order(index.matrices.keys()),
        author_size=config.author_size or experiment.author_size,
        top_t_floor=config.top_t_floor,
        seed=config.seed,
        categories=config.categories,
    )

    def one(prof):
        uf = features.get(prof.key)
        if uf is None:
            raise KeyError(f"no features for unknown {prof.key}")
        res = mllf_link(uf, index, cfg, target_id=truth[prof.author_id])
        if not keep_ranking:
            res.ranking = []
        return res

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, experiment.unknowns))
    return [one(p) for p in experiment.unknowns]


def build_known_index(
    experiment: ExperimentSets, features: Mapping[tuple[str, str], ProfileFeatures]
) -> CandidateIndex:
    knowns = [features.get(p.key) or ProfileFeatures(p.author_id, p.site_id) for p in experiment.knowns]
    return CandidateIndex(knowns)


def export_traces(results: Iterable[LinkResult], path: str | Path, sep: str = "\t") -> None:
    """One record per (unknown, level); positions are written 1-based."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(sep.join(["unknown_id", "level", "category", "candidate_count", "position"]) + "\n")
        for res in results:
            for tr in res.trace:
                pos = "" if tr.position is None else str(tr.position + 1)
                fh.write(sep.join([res.unknown_id, str(tr.level), str(int(tr.category)), str(tr.candidate_count), pos]) + "\n")


def read_traces(path: str | Path, sep: str = "\t") -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(sep)
        return [dict(zip(header, line.rstrip("\n").split(sep))) for line in fh if line.strip()]
