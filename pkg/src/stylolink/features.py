"""The twelve normalized stylometric feature categories."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Mapping, Sequence

from stylolink.corpus import AuthorProfile, normalize_token
from stylolink.lexicon import PUNCTUATION, SPECIAL_CHARS, load_function_words
from stylolink.tagger import TaggedPost, tag_text


class FeatureCategory(IntEnum):
    LETTER_UNI = 1
    LETTER_BI = 2
    LETTER_TRI = 3
    LETTER_QUAD = 4
    SPECIAL_CHARS = 5
    FUNCTION_WORDS = 6
    PUNCTUATION = 7
    POS_A_UNI = 8
    POS_A_BI = 9
    WORDS = 10
    POS_B_UNI = 11
    POS_B_BI = 12

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: str | int) -> "FeatureCategory":
        if isinstance(value, int) or str(value).strip().isdigit():
            return cls(int(value))
        return cls[str(value).strip().upper().replace("-", "_")]


ALL_CATEGORIES = tuple(FeatureCategory)
LETTER_NGRAM_CATEGORIES = {
    1: FeatureCategory.LETTER_UNI,
    2: FeatureCategory.LETTER_BI,
    3: FeatureCategory.LETTER_TRI,
    4: FeatureCategory.LETTER_QUAD,
}
POS_A = (FeatureCategory.POS_A_UNI, FeatureCategory.POS_A_BI)
POS_B = (FeatureCategory.POS_B_UNI, FeatureCategory.POS_B_BI)

_LETTER_RUN_RE = re.compile(r"[a-z]+")
TAG_JOIN = "+"


@dataclass(frozen=True)
class FeatureVector:
    category: FeatureCategory
    weights: Mapping[str, float]

    @property
    def empty(self) -> bool:
        return not self.weights


@dataclass
class ProfileFeatures:
    author_id: str
    site_id: str
    vectors: dict[FeatureCategory, FeatureVector] = field(default_factory=dict)

    @property
    def key(self) -> tuple[str, str]:
        return (self.author_id, self.site_id)

    def get(self, category: FeatureCategory) -> FeatureVector | None:
        return self.vectors.get(category)

    def has(self, category: FeatureCategory) -> bool:
        """True when the category is present with a nonempty vector."""
        v = self.vectors.get(category)
        return v is not None and not v.empty


def normalize(category: FeatureCategory, counts: Mapping[str, int]) -> FeatureVector:
    total = sum(counts.values())
    if total == 0:
        return FeatureVector(category, {})
    return FeatureVector(category, {t: c / total for t, c in sorted(counts.items()) if c > 0})


def _text_of(profile: AuthorProfile | str) -> str:
    return profile if isinstance(profile, str) else profile.text


def letter_ngram_counts(text: str, n: int) -> Counter:
    counts: Counter = Counter()
    for run in _LETTER_RUN_RE.findall(text.lower()):
        if len(run) >= n:
            counts.update(run[i : i + n] for i in range(len(run) - n + 1))
    return counts


def extract_letter_ngrams(profile: AuthorProfile | str, n: int) -> FeatureVector:
    """Letter n-gram frequencies; windows stay inside runs of a-z letters."""
    if n not in LETTER_NGRAM_CATEGORIES:
        raise ValueError(f"letter n-gram order must be 1..4, got {n}")
    return normalize(LETTER_NGRAM_CATEGORIES[n], letter_ngram_counts(_text_of(profile), n))


def extract_charset_freq(
    profile: AuthorProfile | str,
    charset: Sequence[str],
    category: FeatureCategory = FeatureCategory.SPECIAL_CHARS,
) -> FeatureVector:
    if not charset:
        raise ValueError("charset must be nonempty")
    wanted = set(charset)
    counts = Counter(ch for ch in _text_of(profile) if ch in wanted)
    return normalize(category, counts)


def _norm_tokens(text: str) -> Iterable[str]:
    for tok in text.split():
        t = normalize_token(tok)
        if t:
            yield t


def extract_function_words(profile: AuthorProfile | str, lexicon: Iterable[str]) -> FeatureVector:
    lex = frozenset(lexicon)
    if not lex:
        raise ValueError("function-word lexicon must be nonempty")
    counts = Counter(t for t in _norm_tokens(_text_of(profile)) if t in lex)
    return normalize(FeatureCategory.FUNCTION_WORDS, counts)


def extract_words(profile: AuthorProfile | str) -> FeatureVector:
    return normalize(FeatureCategory.WORDS, Counter(_norm_tokens(_text_of(profile))))


def extract_pos_ngrams(
    tag_sequences: Iterable[Sequence[str]], n: int, channel: str = "POS-A"
) -> FeatureVector:
    """Tag n-gram frequencies; each sequence is one post, windows never span posts."""
    if n not in (1, 2):
        raise ValueError(f"POS n-gram order must be 1 or 2, got {n}")
    cats = POS_A if channel in ("POS-A", "A") else POS_B
    counts: Counter = Counter()
    for tags in tag_sequences:
        tags = list(tags)
        counts.update(TAG_JOIN.join(tags[i : i + n]) for i in range(len(tags) - n + 1))
    return normalize(cats[n - 1], counts)


@dataclass
class ExtractionSettings:
    function_words: frozenset[str] = field(default_factory=lambda: frozenset(load_function_words()))
    special_chars: tuple[str, ...] = SPECIAL_CHARS
    punctuation: tuple[str, ...] = PUNCTUATION
    categories: frozenset[FeatureCategory] = frozenset(ALL_CATEGORIES)


def extract_profile(
    profile: AuthorProfile,
    settings: ExtractionSettings | None = None,
    external_tags: Mapping[str, TaggedPost] | None = None,
) -> ProfileFeatures:
    """All enabled categories for one profile.

    POS-A tags come from the baseline tagger. POS-B categories are produced
    only when ``external_tags`` covers at least one of the profile's posts.
    """
    s = settings or ExtractionSettings()
    text = profile.text
    out = ProfileFeatures(profile.author_id, profile.site_id)

    def want(c):
        return c in s.categories

    for n, cat in LETTER_NGRAM_CATEGORIES.items():
        if want(cat):
            out.vectors[cat] = extract_letter_ngrams(text, n)
    if want(FeatureCategory.SPECIAL_CHARS):
        out.vectors[FeatureCategory.SPECIAL_CHARS] = extract_charset_freq(
            text, s.special_chars, FeatureCategory.SPECIAL_CHARS
        )
    if want(FeatureCategory.FUNCTION_WORDS):
        out.vectors[FeatureCategory.FUNCTION_WORDS] = extract_function_words(text, s.function_words)
    if want(FeatureCategory.PUNCTUATION):
        out.vectors[FeatureCategory.PUNCTUATION] = extract_charset_freq(
            text, s.punctuation, FeatureCategory.PUNCTUATION
        )
    if want(FeatureCategory.WORDS):
        out.vectors[FeatureCategory.WORDS] = extract_words(text)
    if any(want(c) for c in POS_A):
        seqs = [tag_text(p.text) for p in profile.posts]
        for n, cat in enumerate(POS_A, start=1):
            if want(cat):
                out.vectors[cat] = extract_pos_ngrams(seqs, n, "POS-A")
    if external_tags and any(want(c) for c in POS_B):
        seqs = [external_tags[p.post_id].tags for p in profile.posts if p.post_id in external_tags]
        if seqs:
            for n, cat in enumerate(POS_B, start=1):
                if want(cat):
                    out.vectors[cat] = extract_pos_ngrams(seqs, n, "POS-B")
    return out
