"""Top-K linkability ratios, multi-ordering aggregation and the
single-feature / greedy-combination baseline study."""

from __future__ import annotations

import itertools
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from stylolink.corpus import ExperimentSets
from stylolink.features import ALL_CATEGORIES, FeatureCategory, ProfileFeatures
from stylolink.mllf import LinkResult, MLLFConfig, build_known_index, mllf_run
from stylolink.ranker import CandidateIndex

DEFAULT_KS = (1, 10, 100)


def top_k_lr(results: Sequence[LinkResult] | Sequence[int], k: int) -> float:
    """Fraction of results whose final rank is within the top ``k``."""
    if not results:
        raise ValueError("no results")
    if k < 1:
        raise ValueError("K must be >= 1")
    ranks = [r if isinstance(r, (int, np.integer)) else r.final_rank for r in results]
    return sum(1 for r in ranks if r <= k) / len(ranks)


def derive_seeds(base_seed: int, n: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(base_seed).spawn(n)]


@dataclass
class OrderingResult:
    seed: int
    order: tuple[FeatureCategory, ...]
    lr: dict[int, float]
    ranks: list[int]


@dataclass
class LRReport:
    direction: tuple[str, str]
    author_size: int
    ks: tuple[int, ...]
    orderings: list[OrderingResult] = field(default_factory=list)

    @property
    def n_orderings(self) -> int:
        return len(self.orderings)

    @property
    def seeds(self) -> list[int]:
        return [o.seed for o in self.orderings]

    def values(self, k: int) -> list[float]:
        return [o.lr[k] for o in self.orderings]

    def mean(self, k: int) -> float:
        return statistics.fmean(self.values(k))

    def min(self, k: int) -> float:
        return min(self.values(k))

    def max(self, k: int) -> float:
        return max(self.values(k))

    def std(self, k: int) -> float:
        return statistics.pstdev(self.values(k))

    def rows(self) -> list[dict]:
        return [
            {
                "direction": f"{self.direction[0]}->{self.direction[1]}",
                "author_size": self.author_size,
                "K": k,
                "mean": self.mean(k),
                "min": self.min(k),
                "max": self.max(k),
                "std": self.std(k),
                "n_orderings": self.n_orderings,
            }
            for k in self.ks
        ]

    def to_dict(self) -> dict:
        return {
            "direction": list(self.direction),
            "author_size": self.author_size,
            "ks": list(self.ks),
            "summary": self.rows(),
            "orderings": [
                {
                    "seed": o.seed,
                    "order": [int(c) for c in o.order],
                    "lr": {str(k): v for k, v in o.lr.items()},
                }
                for o in self.orderings
            ],
        }


def write_lr_report(report: LRReport, tsv_path: str | Path, json_path: str | Path | None = None) -> None:
    cols = ["direction", "author_size", "K", "mean", "min", "max", "std", "n_orderings"]
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(cols) + "\n")
        for row in report.rows():
            fh.write("\t".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols) + "\n")
    if json_path is not None:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def multi_ordering_mllf(
    experiment: ExperimentSets,
    features: Mapping[tuple[str, str], ProfileFeatures],
    n_orderings: int = 10,
    base_seed: int = 0,
    ks: Iterable[int] = DEFAULT_KS,
    categories: Iterable[FeatureCategory] = ALL_CATEGORIES,
    top_t_floor: int = 1,
    index: CandidateIndex | None = None,
    workers: int = 1,
) -> LRReport:
    """Run MLLF once per independently shuffled feature order and aggregate.

    The experiment (and therefore its pollution sample) is fixed across
    orderings.
    """
    if n_orderings < 1:
        raise ValueError("n_orderings must be >= 1")
    ks = tuple(sorted(set(ks)))
    if index is None:
        index = build_known_index(experiment, features)
    cats = tuple(categories)
    direction = (
        experiment.unknowns[0].site_id if experiment.unknowns else "?",
        experiment.knowns[0].site_id if experiment.knowns else "?",
    )
    report = LRReport(direction, experiment.author_size, ks)
    for seed in derive_seeds(base_seed, n_orderings):
        cfg = MLLFConfig(author_size=experiment.author_size, top_t_floor=top_t_floor, seed=seed, categories=cats)
        order = cfg.resolve_order(index.matrices.keys())
        results = mllf_run(experiment, cfg, features, index, workers)
        report.orderings.append(
            OrderingResult(seed, order, {k: top_k_lr(results, k) for k in ks}, [r.final_rank for r in results])
        )
    return report


# -- baseline study -----------------------------------------------------------


@dataclass
class FeatureStudy:
    singles: dict[FeatureCategory, float]
    combinations: list[tuple[tuple[FeatureCategory, ...], float]]
    best: tuple[tuple[FeatureCategory, ...], float]

    @property
    def best_single(self) -> tuple[FeatureCategory, float]:
        cat = min(self.singles, key=lambda c: (-self.singles[c], int(c)))
        return cat, self.singles[cat]

    def rows(self) -> list[tuple[str, float]]:
        out = [(str(int(c)), lr) for c, lr in sorted(self.singles.items())]
        out += [("&".join(str(int(c)) for c in combo), lr) for combo, lr in self.combinations]
        return out


def write_feature_study(study: FeatureStudy, path: str | Path) -> None:
    best = "&".join(str(int(c)) for c in study.best[0])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("features\ttop1_lr\tselected\n")
        for name, lr in study.rows():
            fh.write(f"{name}\t{lr!r}\t{int(name == best)}\n")


def baseline_ranks(
    experiment: ExperimentSets,
    features: Mapping[tuple[str, str], ProfileFeatures],
    categories: Iterable[FeatureCategory],
    index: CandidateIndex | None = None,
) -> list[int]:
    """1-based rank of each unknown's true match using combined chi-square distance."""
    if index is None:
        index = build_known_index(experiment, features)
    truth = experiment.truth.forward()
    row_of = {k: i for i, k in enumerate(index.ids)}
    cats = tuple(categories)
    ranks = []
    for prof in experiment.unknowns:
        rows, _ = index.rank(features[prof.key], cats)
        ranks.append(int(np.flatnonzero(rows == row_of[truth[prof.author_id]])[0]) + 1)
    return ranks


def _choose_best(candidates: Iterable[tuple[tuple[FeatureCategory, ...], float]]):
    # highest LR; ties prefer fewer categories, then lower indices
    return min(candidates, key=lambda c: (-c[1], len(c[0]), tuple(int(x) for x in c[0])))


def greedy_combinations(
    singles: Mapping[FeatureCategory, float],
    score: Callable[[tuple[FeatureCategory, ...]], float],
    beam: int = 3,
    max_size: int = 3,
) -> FeatureStudy:
    """Combine the ``beam`` best single categories into every union of size
    2..``max_size`` and score each; return the table and its argmax."""
    top = sorted(singles, key=lambda c: (-singles[c], int(c)))[:beam]
    combos = []
    for size in range(2, min(max_size, len(top)) + 1):
        for combo in itertools.combinations(sorted(top), size):
            combos.append((combo, score(combo)))
    pool = [((c,), lr) for c, lr in singles.items()] + combos
    return FeatureStudy(dict(singles), combos, _choose_best(pool))


def hill_climb_features(
    experiment: ExperimentSets,
    features: Mapping[tuple[str, str], ProfileFeatures],
    beam: int = 3,
    max_size: int = 3,
    categories: Iterable[FeatureCategory] | None = None,
    index: CandidateIndex | None = None,
) -> FeatureStudy:
    if index is None:
        index = build_known_index(experiment, features)
    pool = index.matrices.keys() if categories is None else set(categories) & index.matrices.keys()
    # only categories that both sides actually carry
    cats = sorted(
        c
        for c in pool
        if index.matrices[c].nnz.any() and any(features[u.key].has(c) for u in experiment.unknowns)
    )
    if not cats:
        raise ValueError("no feature category is present on both sites")

    def score(combo):
        return top_k_lr(baseline_ranks(experiment, features, combo, index), 1)

    singles = {c: score((c,)) for c in cats}
    return greedy_combinations(singles, score, beam, max_size)
