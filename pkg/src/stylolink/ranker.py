"""Chi-square distance and nearest-candidate ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from stylolink.features import FeatureCategory, FeatureVector, ProfileFeatures


class CategoryMismatch(ValueError):
    pass


def _chi_terms(u: Mapping[str, float], v: Mapping[str, float]) -> list[float]:
    terms = []
    for t in u.keys() | v.keys():
        a = u.get(t, 0.0)
        b = v.get(t, 0.0)
        terms.append((a - b) ** 2 / (a + b))
    return terms


def chi_square_distance(u: FeatureVector, v: FeatureVector) -> float:
    """Symmetric chi-square distance: sum of (u_t - v_t)^2 / (u_t + v_t).

    Summed with ``math.fsum`` so the value is exactly symmetric and does not
    depend on token iteration order.
    """
    if u.category != v.category:
        raise CategoryMismatch(f"cannot compare {u.category.label} with {v.category.label}")
    return math.fsum(_chi_terms(u.weights, v.weights))


def _empty(cat):
    return FeatureVector(cat, {})


def combined_distance(
    u: ProfileFeatures, v: ProfileFeatures, categories: Iterable[FeatureCategory]
) -> float:
    """Sum of per-category chi-square distances; a missing vector counts as empty."""
    terms: list[float] = []
    for cat in categories:
        a = u.vectors.get(cat) or _empty(cat)
        b = v.vectors.get(cat) or _empty(cat)
        terms.extend(_chi_terms(a.weights, b.weights))
    return math.fsum(terms)


class CategoryMatrix:
    """CSR layout of one category's vectors for a fixed list of candidates.

    ``distances`` evaluates the chi-square distance from one query vector to
    every (or a subset of) row in O(nnz) numpy work. Tokens of the query
    that a row lacks contribute ``u_t`` each; that part is computed as
    ``sum(u) - matched mass`` and forced to exactly 0 when the row covers
    the whole query support, so identical vectors give exactly 0.
    """

    def __init__(self, vectors: Sequence[Mapping[str, float] | None]):
        tokens: list[str] = []
        weights: list[float] = []
        lens: list[int] = []
        for w in vectors:
            w = w or {}
            tokens.extend(w.keys())
            weights.extend(w.values())
            lens.append(len(w))
        # ids follow token order and entries are sorted by id inside each row,
        # so per-row summation order (and hence every float result) does not
        # depend on the order of the candidates
        self.vocab = {t: i for i, t in enumerate(sorted(set(tokens)))}
        ids = np.fromiter(map(self.vocab.__getitem__, tokens), dtype=np.int64, count=len(tokens))
        self.nnz = np.asarray(lens, dtype=np.int64)
        self.entry_rows = np.repeat(np.arange(len(lens), dtype=np.int64), self.nnz)
        order = np.lexsort((ids, self.entry_rows))
        self.indices = ids[order]
        self.data = np.asarray(weights, dtype=np.float64)[order]
        self.indptr = np.concatenate(([0], np.cumsum(self.nnz))).astype(np.int64)

    @property
    def n_rows(self) -> int:
        return len(self.nnz)

    def nbytes(self) -> int:
        return self.indptr.nbytes + self.indices.nbytes + self.data.nbytes + self.entry_rows.nbytes

    def _select(self, rows: np.ndarray | None):
        if rows is None:
            return self.indices, self.data, self.entry_rows, self.n_rows
        lens = self.nnz[rows]
        total = int(lens.sum())
        starts = self.indptr[rows]
        # position of each selected entry: start of its row + offset within it
        offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(lens) - lens, lens)
        pos = np.repeat(starts, lens) + offsets
        local = np.repeat(np.arange(len(rows), dtype=np.int64), lens)
        return self.indices[pos], self.data[pos], local, len(rows)

    def distances(self, query: Mapping[str, float] | None, rows: np.ndarray | None = None) -> np.ndarray:
        query = query or {}
        udense = np.zeros(len(self.vocab) + 1)
        for t, x in query.items():
            j = self.vocab.get(t)
            if j is not None:
                udense[j] = x
        sum_u = math.fsum(query.values())
        n_u = len(query)

        idx, vv, local, m = self._select(rows)
        uu = udense[idx]
        hit = uu > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            terms = np.where(hit, (uu - vv) ** 2 / (uu + vv), vv)
        part_a = np.bincount(local, weights=terms, minlength=m)
        matched_n = np.bincount(local, weights=hit, minlength=m)
        matched_mass = np.bincount(local, weights=uu, minlength=m)
        part_b = np.where(matched_n == n_u, 0.0, np.maximum(sum_u - matched_mass, 0.0))
        return part_a + part_b


class CandidateIndex:
    """Per-category matrices over a fixed candidate list, for repeated ranking."""

    def __init__(self, candidates: Sequence[ProfileFeatures], categories: Iterable[FeatureCategory] | None = None):
        if not candidates:
            raise ValueError("candidate list is empty")
        self.ids = [c.author_id for c in candidates]
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate candidate ids")
        # rank of each id in ascending string order, used as the tie-breaker
        order = sorted(range(len(self.ids)), key=self.ids.__getitem__)
        self.id_rank = np.empty(len(self.ids), dtype=np.int64)
        self.id_rank[order] = np.arange(len(self.ids))
        cats = set(categories) if categories is not None else {c for p in candidates for c in p.vectors}
        self.matrices = {
            cat: CategoryMatrix([(p.vectors[cat].weights if cat in p.vectors else None) for p in candidates])
            for cat in sorted(cats)
        }

    def __len__(self) -> int:
        return len(self.ids)

    def nbytes(self) -> int:
        return sum(m.nbytes() for m in self.matrices.values())

    def distances(
        self,
        query: ProfileFeatures,
        categories: Iterable[FeatureCategory],
        rows: np.ndarray | None = None,
    ) -> np.ndarray:
        n = len(self.ids) if rows is None else len(rows)
        total = np.zeros(n)
        for cat in sorted(set(categories)):
            vec = query.vectors.get(cat)
            mat = self.matrices.get(cat)
            if mat is None:
                # no candidate has this category: every row is empty
                total += math.fsum(vec.weights.values()) if vec else 0.0
                continue
            total += mat.distances(vec.weights if vec else None, rows)
        return total

    def rank(
        self,
        query: ProfileFeatures,
        categories: Iterable[FeatureCategory],
        rows: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Return (row indices, distances) sorted by distance, then candidate id."""
        d = self.distances(query, categories, rows)
        rows = np.arange(len(self.ids)) if rows is None else np.asarray(rows)
        order = np.lexsort((self.id_rank[rows], d))
        return rows[order], d[order]


@dataclass
class RankedList:
    unknown_id: str
    entries: list[tuple[str, float]]

    def position_of(self, known_id: str) -> int:
        """0-based position of ``known_id``."""
        for i, (k, _) in enumerate(self.entries):
            if k == known_id:
                return i
        raise KeyError(known_id)

    def rank_of(self, known_id: str) -> int:
        return self.position_of(known_id) + 1


def rank_known(
    unknown: ProfileFeatures,
    candidates: Sequence[ProfileFeatures] | CandidateIndex,
    categories: Iterable[FeatureCategory],
) -> RankedList:
    index = candidates if isinstance(candidates, CandidateIndex) else CandidateIndex(candidates, categories)
    rows, dists = index.rank(unknown, categories)
    return RankedList(unknown.author_id, [(index.ids[r], float(d)) for r, d in zip(rows, dists)])


def export_ranked_lists(lists: Iterable[RankedList], path: str | Path, sep: str = "\t") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(sep.join(["unknown_id", "rank", "known_id", "distance"]) + "\n")
        for rl in lists:
            for i, (k, d) in enumerate(rl.entries, start=1):
                fh.write(f"{rl.unknown_id}{sep}{i}{sep}{k}{sep}{d:.17g}\n")
