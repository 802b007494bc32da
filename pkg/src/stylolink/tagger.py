"""POS tag channels: a rule-based baseline tagger and external tag ingestion."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Sequence

TAGSET = frozenset(
    ["NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PRT", "PUNCT", "X"]
)


class Channel(str, Enum):
    POS_A = "POS-A"
    POS_B = "POS-B"


class TagFormatError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class TaggedPost:
    post_id: str
    tokens: tuple[str, ...]
    tags: tuple[str, ...]
    channel: Channel

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"post {self.post_id}: {len(self.tokens)} tokens but {len(self.tags)} tags"
            )


_CLOSED_CLASS: dict[str, str] = {}
for _tag, _words in {
    "DET": "a an the this that these those every each some any no another either neither "
    "all both half several many much few such what which whose",
    "PRON": "i me my mine myself you your yours yourself yourselves he him his himself she her "
    "hers herself it its itself we us our ours ourselves they them their theirs themselves "
    "who whom someone somebody something anyone anybody anything everyone everybody "
    "everything nobody nothing one",
    "ADP": "of in on at by for with from to into onto about above across after against along "
    "among around before behind below beneath beside between beyond during except inside "
    "near off out outside over past since through throughout toward towards under until "
    "upon via within without per",
    "CONJ": "and or but nor so yet because although though while whereas unless whether if",
    "PRT": "not n't 's up down away back",
    "VERB": "be am is are was were been being have has had having do does did done doing "
    "will would shall should can could may might must ought",
    "ADV": "very too also just only even still already always never often sometimes here there "
    "now then again ever quite rather really so almost perhaps maybe",
}.items():
    for _w in _words.split():
        _CLOSED_CLASS.setdefault(_w, _tag)

_PUNCT_RE = re.compile(r"^[.,!?;:'\"()\[\]{}\-]+$")
_NUM_RE = re.compile(r"^[+-]?\d[\d.,:/]*$")
_ADJ_SUFFIXES = ("ous", "ful", "able", "ible", "ive", "less", "ical", "ish")
TOKEN_RE = re.compile(r"\w+(?:['’]\w+)*|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Split text into word and single-symbol tokens for tagging."""
    return TOKEN_RE.findall(text)


def _tag_one(tok: str) -> str:
    low = tok.lower()
    if low in _CLOSED_CLASS:
        return _CLOSED_CLASS[low]
    if _PUNCT_RE.match(tok):
        return "PUNCT"
    if _NUM_RE.match(tok):
        return "NUM"
    if not any(ch.isalnum() for ch in tok):
        return "X"
    if low.endswith("ly") and len(low) > 3:
        return "ADV"
    if (low.endswith("ing") and len(low) > 4) or (low.endswith("ed") and len(low) > 3):
        return "VERB"
    if low.endswith(_ADJ_SUFFIXES) and len(low) > 5:
        return "ADJ"
    return "NOUN"


def baseline_tag(tokens: Sequence[str]) -> list[str]:
    """Deterministic rule tagger; first matching rule wins.

    Order: closed-class lexicon, punctuation, numbers, symbols (X), then
    suffixes -ly (ADV), -ing/-ed (VERB), adjective suffixes (ADJ), and NOUN
    as the fallback (which also covers plural -s).
    """
    if not tokens:
        raise ValueError("baseline_tag needs at least one token")
    return [_tag_one(t) for t in tokens]


def tag_text(text: str) -> list[str]:
    toks = tokenize(text)
    return baseline_tag(toks) if toks else []


def ingest_external_tags(
    path: str | Path, channel: Channel = Channel.POS_B, tagset: frozenset[str] | None = None
) -> Iterator[TaggedPost]:
    """Parse ``#post <id>`` blocks of ``token<TAB>tag`` lines.

    Raises :class:`TagFormatError` naming the offending line on any format
    violation. ``tagset`` restricts the accepted tags when given.
    """
    post_id = None
    toks: list[str] = []
    tags: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            if line.startswith("#post"):
                parts = line.split(maxsplit=1)
                if parts[0] != "#post" or len(parts) != 2:
                    raise TagFormatError(path, lineno, "header must be '#post <post_id>'")
                if post_id is not None:
                    yield TaggedPost(post_id, tuple(toks), tuple(tags), channel)
                post_id, toks, tags = parts[1].strip(), [], []
                continue
            if post_id is None:
                raise TagFormatError(path, lineno, "token line before any '#post' header")
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0] or not cols[1]:
                raise TagFormatError(path, lineno, "expected 'token<TAB>tag'")
            if tagset is not None and cols[1] not in tagset:
                raise TagFormatError(path, lineno, f"tag {cols[1]!r} not in tagset")
            toks.append(cols[0])
            tags.append(cols[1])
    if post_id is not None:
        yield TaggedPost(post_id, tuple(toks), tuple(tags), channel)


def write_external_tags(posts: Sequence[TaggedPost], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tp in posts:
            fh.write(f"#post {tp.post_id}\n")
            for tok, tag in zip(tp.tokens, tp.tags):
                fh.write(f"{tok}\t{tag}\n")
