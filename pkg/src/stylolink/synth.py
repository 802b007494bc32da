"""Synthetic two-site corpora with known ground truth.

Every author draws words from a private mixture of a shared Zipfian
vocabulary and a small set of preferred words, plus personal punctuation
habits. The same author model writes both pseudo-sites, so matching accounts
share style while their texts differ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from stylolink.corpus import MatchSet, Post
from stylolink.lexicon import PUNCTUATION, SPECIAL_CHARS, load_function_words

_ONSETS = ["b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
           "br", "ch", "cl", "dr", "fl", "gr", "pl", "sh", "st", "th", "tr"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ea", "ee", "oo", "ou"]
_CODAS = ["", "", "n", "r", "s", "t", "l", "m", "nd", "ck", "ng", "st"]


@dataclass
class SynthConfig:
    n_authors: int = 200
    words_per_author: int = 2000
    signal: float = 0.3
    preferred_words: int = 40
    content_vocab: int = 3000
    post_length: tuple[int, int] = (8, 30)
    noise: float = 0.05
    sites: tuple[str, str] = ("site1", "site2")
    seed: int = 0


def _content_words(rng: np.random.Generator, n: int, exclude: set[str]) -> list[str]:
    words: list[str] = []
    seen = set(exclude)
    while len(words) < n:
        syll = rng.integers(1, 4)
        w = "".join(
            _ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] + _CODAS[rng.integers(len(_CODAS))]
            for _ in range(syll)
        )
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


class _Author:
    def __init__(self, rng, base_p, n_vocab, cfg: SynthConfig, n_marks):
        pref = rng.choice(n_vocab, size=cfg.preferred_words, replace=False)
        own = np.zeros(n_vocab)
        own[pref] = rng.dirichlet(np.ones(cfg.preferred_words))
        self.p = (1 - cfg.signal) * base_p + cfg.signal * own
        self.mark_rate = rng.uniform(0.05, 0.25)
        self.mark_p = rng.dirichlet(np.full(n_marks, 0.5))
        self.cap_rate = rng.uniform(0.0, 0.6)


def generate_corpus(cfg: SynthConfig | None = None) -> tuple[list[Post], MatchSet]:
    """Return (posts for both sites, ground truth site1 id -> site2 id).

    Each pseudo-site receives at least ``words_per_author / 2`` words per
    author (counted after URL/mention noise is stripped), and every post
    contains at least one function word so it survives cleaning.
    """
    cfg = cfg or SynthConfig()
    rng = np.random.default_rng(cfg.seed)
    func = load_function_words()
    vocab = func + _content_words(rng, cfg.content_vocab, set(func))
    func_set = set(func)
    ranks = rng.permutation(len(vocab)) + 1
    base_p = 1.0 / ranks
    base_p /= base_p.sum()
    marks = list(PUNCTUATION) + list(SPECIAL_CHARS)
    per_site = -(-cfg.words_per_author // 2)
    lo, hi = cfg.post_length
    s1, s2 = cfg.sites

    posts: list[Post] = []
    pairs = []
    for a in range(cfg.n_authors):
        author = _Author(rng, base_p, len(vocab), cfg, len(marks))
        ids = {s1: f"{s1}_{a:05d}", s2: f"{s2}_{a:05d}"}
        pairs.append((ids[s1], ids[s2]))
        for site in cfg.sites:
            written, k = 0, 0
            while written < per_site:
                n = int(rng.integers(lo, hi + 1))
                idx = rng.choice(len(vocab), size=n, p=author.p)
                words = [vocab[i] for i in idx]
                if not any(w in func_set for w in words):
                    words[int(rng.integers(n))] = "the"
                if rng.random() < author.cap_rate:
                    words[0] = words[0].capitalize()
                attach = rng.random(n) < author.mark_rate
                for j in np.flatnonzero(attach):
                    words[j] += marks[rng.choice(len(marks), p=author.mark_p)]
                if cfg.noise and rng.random() < cfg.noise:
                    words.insert(int(rng.integers(n + 1)), f"@user{int(rng.integers(10**6))}")
                if cfg.noise and rng.random() < cfg.noise:
                    words.append(f"https://t.co/{int(rng.integers(10**8)):x}")
                posts.append(Post(ids[site], site, f"{ids[site]}_p{k:05d}", " ".join(words)))
                written += n
                k += 1
    return posts, MatchSet(frozenset(pairs))
