"""Runtime and memory scaling of MLLF with the number of known accounts."""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import psutil

from stylolink.features import ALL_CATEGORIES, FeatureCategory, FeatureVector, ProfileFeatures
from stylolink.mllf import MLLFConfig, mllf_link
from stylolink.ranker import CandidateIndex

# alphabet sizes and sampled tokens per profile for synthetic vectors
_SHAPES = {
    FeatureCategory.LETTER_UNI: (26, 4000),
    FeatureCategory.LETTER_BI: (26**2, 2000),
    FeatureCategory.LETTER_TRI: (26**3, 1500),
    FeatureCategory.LETTER_QUAD: (26**4, 1200),
    FeatureCategory.SPECIAL_CHARS: (20, 60),
    FeatureCategory.FUNCTION_WORDS: (512, 500),
    FeatureCategory.PUNCTUATION: (8, 150),
    FeatureCategory.POS_A_UNI: (12, 1100),
    FeatureCategory.POS_A_BI: (144, 1000),
    FeatureCategory.WORDS: (30000, 1000),
    FeatureCategory.POS_B_UNI: (12, 1100),
    FeatureCategory.POS_B_BI: (144, 1000),
}


def synthetic_feature_profiles(
    n: int,
    site_id: str = "bench",
    seed: int = 0,
    categories: Sequence[FeatureCategory] = ALL_CATEGORIES,
    signal: float = 0.3,
) -> list[ProfileFeatures]:
    """Draw ``n`` profiles directly as feature vectors (no text).

    Per category, tokens come from a shared Zipf law over the category's
    alphabet mixed with a handful of author-preferred tokens, so vector
    sizes resemble those extracted from ~1,000-word profiles.
    """
    rng = np.random.default_rng(seed)
    cdfs = {}
    names = [f"t{j}" for j in range(max(_SHAPES[c][0] for c in categories))]
    for cat in categories:
        size, _ = _SHAPES[cat]
        p = 1.0 / (np.arange(size) + 1.0) ** 1.05
        cdfs[cat] = np.cumsum(p / p.sum())
    out = []
    for i in range(n):
        pf = ProfileFeatures(f"{site_id}_{i:06d}", site_id)
        for cat in categories:
            size, draws = _SHAPES[cat]
            n_own = int(rng.binomial(draws, signal))
            base = np.searchsorted(cdfs[cat], rng.random(draws - n_own))
            pref = rng.choice(size, size=min(8, size), replace=False)
            own = pref[rng.integers(len(pref), size=n_own)]
            ids, counts = np.unique(np.concatenate([base, own]), return_counts=True)
            total = counts.sum()
            pf.vectors[cat] = FeatureVector(cat, {names[j]: c / total for j, c in zip(ids.tolist(), counts.tolist())})
        out.append(pf)
    return out


def rss_bytes() -> int:
    return psutil.Process().memory_info().rss


@dataclass
class BenchRow:
    size: int
    seconds_per_unknown: float
    level_rss: list[int]
    top_ids: list[str] = field(default_factory=list)


@dataclass
class LinearFit:
    slope: float
    intercept: float
    r2: float


@dataclass
class BenchReport:
    rows: list[BenchRow]
    fit: LinearFit | None

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"size": r.size, "seconds_per_unknown": r.seconds_per_unknown, "level_rss": r.level_rss}
                for r in self.rows
            ],
            "fit": None if self.fit is None else vars(self.fit),
            "fit_note": "undefined: fewer than two sizes" if self.fit is None else "",
        }


def linear_fit(x: Sequence[float], y: Sequence[float]) -> LinearFit | None:
    if len(set(x)) < 2:
        return None
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2)


def max_level_change(level_rss: Sequence[int]) -> float:
    """Largest relative change between consecutive level samples."""
    return max((abs(b - a) / a for a, b in zip(level_rss, level_rss[1:])), default=0.0)


def scaling_bench(
    unknowns: Sequence[ProfileFeatures],
    known_pool: Sequence[ProfileFeatures],
    sizes: Sequence[int],
    config: MLLFConfig,
    repeats: int = 3,
) -> BenchReport:
    """Time ``mllf_link`` (linking mode, all levels) per unknown at each size.

    Knowns for size N are the first N profiles of ``known_pool``; index
    construction is excluded from timing, as features are precomputed.
    The reported time is the median over ``repeats`` of the mean over
    unknowns. RSS is sampled at each level boundary of one extra run.
    """
    if not sizes:
        raise ValueError("no sizes given")
    if max(sizes) > len(known_pool):
        raise ValueError(f"need {max(sizes)} known profiles, have {len(known_pool)}")
    if not unknowns:
        raise ValueError("no unknown profiles")
    rows = []
    for size in sizes:
        index = CandidateIndex(known_pool[:size])
        cfg = MLLFConfig(config.feature_order, size, config.top_t_floor, config.seed, config.categories)
        mllf_link(unknowns[0], index, cfg)  # warm-up
        gc.collect()
        samples = []
        top_ids = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            res = [mllf_link(u, index, cfg) for u in unknowns]
            samples.append((time.perf_counter() - t0) / len(unknowns))
            top_ids = [r.ranking[0][0] for r in res]
        level_rss: list[int] = []
        mllf_link(unknowns[0], index, cfg, probe=lambda level: level_rss.append(rss_bytes()))
        rows.append(BenchRow(size, float(np.median(samples)), level_rss, top_ids))
        del index
    fit = linear_fit([r.size for r in rows], [r.seconds_per_unknown for r in rows])
    return BenchReport(rows, fit)
