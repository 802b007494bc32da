"""Default function-word lexicon and character sets, plus file loaders."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

SPECIAL_CHARS: tuple[str, ...] = tuple("*@#$%&+=~^|/<>_-[]{}")
PUNCTUATION: tuple[str, ...] = tuple(".,!?;:'\"")


def read_token_file(path: str | Path) -> list[str]:
    """One token per line, UTF-8; blank lines are ignored, order kept."""
    with open(path, encoding="utf-8") as fh:
        toks = [line.rstrip("\r\n") for line in fh]
    out = []
    for t in toks:
        if t and t not in out:
            out.append(t)
    return out


@lru_cache(maxsize=None)
def _default_function_words() -> tuple[str, ...]:
    with resources.files("stylolink.data").joinpath("function_words.txt").open(
        encoding="utf-8"
    ) as fh:
        return tuple(w.strip() for w in fh if w.strip())


def load_function_words(path: str | Path | None = None) -> list[str]:
    if path is None:
        return list(_default_function_words())
    return [w.lower() for w in read_token_file(path)]


def load_charset(path: str | Path | None, default: tuple[str, ...]) -> list[str]:
    if path is None:
        return list(default)
    chars = read_token_file(path)
    bad = [c for c in chars if len(c) != 1]
    if bad:
        raise ValueError(f"{path}: charset entries must be single characters, got {bad[:3]}")
    return chars
