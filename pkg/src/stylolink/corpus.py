"""Post ingestion, cleaning, author profiles and experiment-set construction."""

from __future__ import annotations

import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from stylolink.lexicon import load_function_words

log = logging.getLogger(__name__)

URL_RE = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
MENTION_RE = re.compile(r"(?<!\S)@\S+")

# printable ASCII plus the usual whitespace characters
_BASIC_LATIN = frozenset(chr(c) for c in range(0x20, 0x7F)) | frozenset("\t\n\r")
_EDGE_PUNCT_RE = re.compile(r"^[\W_]+|[\W_]+$")


class InputError(Exception):
    """Raised when an input source cannot be read at all."""


class ValidationError(ValueError):
    """Raised when input content violates a structural rule (e.g. ground truth)."""


@dataclass(frozen=True)
class Post:
    author_id: str
    site_id: str
    post_id: str
    text: str

    def __post_init__(self):
        for name in ("author_id", "site_id", "post_id"):
            if not getattr(self, name):
                raise ValueError(f"Post.{name} must be nonempty")

    @property
    def words(self) -> list[str]:
        return self.text.split()

    def to_json(self) -> str:
        return json.dumps(
            {
                "author_id": self.author_id,
                "site_id": self.site_id,
                "post_id": self.post_id,
                "text": self.text,
            },
            ensure_ascii=False,
            sort_keys=True,
        )


@dataclass
class IngestReport:
    posts: list[Post]
    malformed: int = 0
    malformed_lines: list[int] = field(default_factory=list)


def _parse_post(line: str) -> Post | None:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(rec, dict):
        return None
    vals = []
    for key in ("author_id", "site_id", "post_id", "text"):
        v = rec.get(key)
        if not isinstance(v, str):
            return None
        vals.append(v)
    try:
        return Post(*vals)
    except ValueError:
        return None


def ingest_lines(lines: Iterable[str]) -> IngestReport:
    report = IngestReport(posts=[])
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        post = _parse_post(line)
        if post is None:
            report.malformed += 1
            report.malformed_lines.append(lineno)
            continue
        report.posts.append(post)
    if report.malformed:
        log.warning("skipped %d malformed post record(s)", report.malformed)
    return report


def ingest_posts(path: str | Path) -> IngestReport:
    """Read line-delimited JSON post records from ``path``.

    Malformed lines (bad JSON, missing or empty id fields, non-string text)
    are skipped and counted. An unreadable file raises :class:`InputError`.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            return ingest_lines(fh)
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read posts from {path}: {exc}") from exc


def write_posts(posts: Iterable[Post], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(p.to_json())
            fh.write("\n")


# -- cleaning ---------------------------------------------------------------


@dataclass(frozen=True)
class SiteRules:
    filter_retweets: bool = False
    english_threshold: float = 0.70
    min_words: int = 1000


@dataclass
class CleaningConfig:
    """Per-site cleaning flags; sites without an entry use ``default``.

    Retweet filtering is on for ``twitter`` unless overridden.
    """

    default: SiteRules = field(default_factory=SiteRules)
    sites: dict[str, SiteRules] = field(
        default_factory=lambda: {"twitter": SiteRules(filter_retweets=True)}
    )
    function_words: frozenset[str] | None = None

    def rules_for(self, site_id: str) -> SiteRules:
        return self.sites.get(site_id, self.default)

    def lexicon(self) -> frozenset[str]:
        if self.function_words is None:
            self.function_words = frozenset(load_function_words())
        return self.function_words


def normalize_token(tok: str) -> str:
    """Lowercase and strip leading/trailing non-alphanumerics."""
    return _EDGE_PUNCT_RE.sub("", tok.lower())


def is_english(text: str, lexicon: frozenset[str], threshold: float = 0.70) -> bool:
    if not text:
        return False
    latin = sum(1 for ch in text if ch in _BASIC_LATIN)
    if latin / len(text) < threshold:
        return False
    return any(normalize_token(t) in lexicon for t in text.split())


def _is_retweet(text: str) -> bool:
    toks = text.split(maxsplit=1)
    return bool(toks) and toks[0].lower() == "rt"


def strip_urls_mentions(text: str) -> str:
    text = URL_RE.sub("", text)
    text = MENTION_RE.sub("", text)
    return " ".join(text.split())


def clean_post(post: Post, config: CleaningConfig | None = None) -> Post | None:
    """Return the cleaned post, or None when it should be dropped.

    A post is dropped when it is a retweet (site rule), empty after URL and
    mention removal, or fails the English heuristic.
    """
    config = config or CleaningConfig()
    rules = config.rules_for(post.site_id)
    if rules.filter_retweets and _is_retweet(post.text):
        return None
    text = strip_urls_mentions(post.text)
    if not text:
        return None
    # "@sam rt ..." becomes "rt ..."; drop it here too so cleaning stays idempotent
    if rules.filter_retweets and _is_retweet(text):
        return None
    if not is_english(text, config.lexicon(), rules.english_threshold):
        return None
    if text == post.text:
        return post
    return Post(post.author_id, post.site_id, post.post_id, text)


def clean_posts(posts: Iterable[Post], config: CleaningConfig | None = None) -> list[Post]:
    config = config or CleaningConfig()
    out = []
    for p in posts:
        c = clean_post(p, config)
        if c is not None:
            out.append(c)
    return out


# -- profiles ---------------------------------------------------------------


@dataclass(frozen=True)
class AuthorProfile:
    author_id: str
    site_id: str
    posts: tuple[Post, ...]

    @property
    def token_stream(self) -> list[str]:
        return [t for p in self.posts for t in p.words]

    @property
    def word_count(self) -> int:
        return sum(len(p.words) for p in self.posts)

    @property
    def post_count(self) -> int:
        return len(self.posts)

    @property
    def text(self) -> str:
        return "\n".join(p.text for p in self.posts)

    @property
    def key(self) -> tuple[str, str]:
        return (self.author_id, self.site_id)


def build_profiles(
    posts: Iterable[Post], min_words: int | dict[str, int] = 1000
) -> list[AuthorProfile]:
    """Merge cleaned posts into one profile per (author, site).

    Profiles with fewer than ``min_words`` whitespace tokens are dropped.
    ``min_words`` may be a per-site mapping. Posts inside a profile are
    ordered by post id so the result does not depend on input order.
    """
    grouped: dict[tuple[str, str], list[Post]] = defaultdict(list)
    for p in posts:
        grouped[(p.author_id, p.site_id)].append(p)
    out = []
    for (author, site), group in sorted(grouped.items()):
        group.sort(key=lambda p: (p.post_id, p.text))
        prof = AuthorProfile(author, site, tuple(group))
        threshold = min_words.get(site, 1000) if isinstance(min_words, dict) else min_words
        if prof.word_count >= threshold:
            out.append(prof)
    return out


@dataclass
class SiteStats:
    users: int = 0
    posts: int = 0
    avg_posts_per_user: float = 0.0
    avg_words_per_post: float = 0.0


@dataclass
class CorpusStats:
    before: dict[str, SiteStats]
    after: dict[str, SiteStats]

    def to_dict(self) -> dict:
        return {
            stage: {site: vars(s) for site, s in sorted(table.items())}
            for stage, table in (("before", self.before), ("after", self.after))
        }


def _site_stats(posts: Iterable[Post]) -> dict[str, SiteStats]:
    users: dict[str, set[str]] = defaultdict(set)
    n_posts: dict[str, int] = defaultdict(int)
    n_words: dict[str, int] = defaultdict(int)
    for p in posts:
        users[p.site_id].add(p.author_id)
        n_posts[p.site_id] += 1
        n_words[p.site_id] += len(p.words)
    out = {}
    for site in users:
        u, n = len(users[site]), n_posts[site]
        out[site] = SiteStats(u, n, n / u, n_words[site] / n)
    return out


def corpus_stats(
    before: Iterable[Post], after: Iterable[AuthorProfile], sites: Iterable[str] = ()
) -> CorpusStats:
    """Per-site user/post/word statistics for raw posts and retained profiles.

    Sites listed in ``sites`` but absent from the data are reported as zeros.
    """
    kept = [p for prof in after for p in prof.posts]
    b, a = _site_stats(before), _site_stats(kept)
    for site in sites:
        b.setdefault(site, SiteStats())
        a.setdefault(site, SiteStats())
    return CorpusStats(before=b, after=a)


# -- ground truth and experiment sets ---------------------------------------


@dataclass(frozen=True)
class MatchSet:
    pairs: frozenset[tuple[str, str]]

    def __post_init__(self):
        left = [a for a, _ in self.pairs]
        right = [b for _, b in self.pairs]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise ValidationError("match set is not one-to-one")

    def __len__(self) -> int:
        return len(self.pairs)

    def forward(self) -> dict[str, str]:
        return dict(self.pairs)


def load_ground_truth(
    path: str | Path, delimiter: str = "\t", header: bool = False
) -> MatchSet:
    """Read two-column (site1_id, site2_id) pairs.

    Lines starting with ``#`` are ignored; ``header=True`` skips the first
    data line. Repeated identical pairs collapse; an id matched to two
    different partners raises :class:`ValidationError`.
    """
    fwd: dict[str, str] = {}
    bwd: dict[str, str] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read ground truth {path}: {exc}") from exc
    with fh:
        skip = header
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            if skip:
                skip = False
                continue
            cols = [c.strip() for c in line.split(delimiter)]
            if len(cols) != 2 or not all(cols):
                raise ValidationError(f"{path}:{lineno}: expected two nonempty columns")
            a, b = cols
            if fwd.get(a, b) != b or bwd.get(b, a) != a:
                raise ValidationError(f"{path}:{lineno}: conflicting match for {a!r} / {b!r}")
            fwd[a] = b
            bwd[b] = a
    return MatchSet(frozenset(fwd.items()))


def write_ground_truth(truth: MatchSet, path: str | Path, delimiter: str = "\t") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in sorted(truth.pairs):
            fh.write(f"{a}{delimiter}{b}\n")


@dataclass
class ExperimentSets:
    unknowns: list[AuthorProfile]
    knowns: list[AuthorProfile]
    truth: MatchSet
    author_size: int
    seed: int

    @property
    def pollution(self) -> int:
        return self.author_size - len(self.truth)


def select_experiment_sets(
    profiles1: Iterable[AuthorProfile],
    profiles2: Iterable[AuthorProfile],
    truth: MatchSet,
    author_size: int,
    seed: int,
) -> ExperimentSets:
    """Matched site-1 profiles become unknowns; knowns are their matches plus
    ``author_size - matched`` randomly drawn non-matching site-2 profiles."""
    by1 = {p.author_id: p for p in profiles1}
    by2 = {p.author_id: p for p in profiles2}
    matched = sorted((a, b) for a, b in truth.pairs if a in by1 and b in by2)
    if author_size < len(matched):
        raise ValueError(f"author_size {author_size} < {len(matched)} matched accounts")
    if author_size > len(by2):
        raise ValueError(f"author_size {author_size} exceeds {len(by2)} available site-2 profiles")

    matched_known = {b for _, b in matched}
    pool = sorted(k for k in by2 if k not in matched_known)
    n_extra = author_size - len(matched)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=n_extra, replace=False) if n_extra else []
    known_ids = sorted(matched_known | {pool[i] for i in picks})

    return ExperimentSets(
        unknowns=[by1[a] for a, _ in matched],
        knowns=[by2[k] for k in known_ids],
        truth=MatchSet(frozenset(matched)),
        author_size=author_size,
        seed=seed,
    )


def iter_site(posts: Iterable[Post], site_id: str) -> Iterator[Post]:
    return (p for p in posts if p.site_id == site_id)
