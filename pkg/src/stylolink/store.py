"""On-disk sparse feature store.

Layout: one directory per site, one consolidated text file per category::

    <store>/<site>/<NN>_<label>.tsv

Each file is a sequence of profile blocks sorted by author id. A block is a
header line followed by ``token<TAB>weight`` records::

    #profile<TAB>author_id=<id><TAB>category=<n><TAB>token_count=<k>
    token<TAB>weight
    ...

Weights are written with ``repr`` (shortest round-tripping decimal), so a
store/load cycle is bit exact. Files are replaced atomically; writers
serialize on a per-site lock file, readers never block.
"""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path
from typing import Iterable
from urllib.parse import quote

from filelock import FileLock

from stylolink.features import ALL_CATEGORIES, FeatureCategory, FeatureVector, ProfileFeatures

HEADER = "#profile"


class StoreError(Exception):
    pass


class NotFoundError(StoreError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "not found"


class IntegrityError(StoreError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


def site_dir(store_dir: str | Path, site_id: str) -> Path:
    return Path(store_dir) / quote(site_id, safe="")


def category_file(store_dir: str | Path, site_id: str, cat: FeatureCategory) -> Path:
    return site_dir(store_dir, site_id) / f"{int(cat):02d}_{cat.label}.tsv"


def _check_field(value: str, what: str) -> None:
    if not value or any(c in value for c in "\t\r\n"):
        raise ValueError(f"{what} {value!r} cannot be stored (empty or contains tab/newline)")


def _format_block(author_id: str, vec: FeatureVector) -> str:
    lines = [f"{HEADER}\tauthor_id={author_id}\tcategory={int(vec.category)}\ttoken_count={len(vec.weights)}"]
    for tok in sorted(vec.weights):
        _check_field(tok, "token")
        lines.append(f"{tok}\t{vec.weights[tok]!r}")
    return "\n".join(lines) + "\n"


def _parse_header(line: str, path, lineno: int) -> tuple[str, int, int]:
    parts = line.split("\t")
    if len(parts) != 4 or parts[0] != HEADER:
        raise IntegrityError(path, lineno, "malformed profile header")
    try:
        kv = dict(p.split("=", 1) for p in parts[1:])
        return kv["author_id"], int(kv["category"]), int(kv["token_count"])
    except (ValueError, KeyError):
        raise IntegrityError(path, lineno, "malformed profile header") from None


def read_category_file(path: Path, cat: FeatureCategory) -> dict[str, FeatureVector]:
    """Parse one category file into {author_id: FeatureVector}."""
    out: dict[str, FeatureVector] = {}
    author, expected, weights, start = None, 0, {}, 0

    def close(lineno):
        if author is None:
            return
        if len(weights) != expected:
            raise IntegrityError(
                path, start, f"token_count={expected} but {len(weights)} records follow"
            )
        if weights and abs(math.fsum(weights.values()) - 1.0) > 1e-9:
            raise IntegrityError(path, start, "weights do not sum to 1")
        out[author] = FeatureVector(cat, weights)

    with open(path, encoding="utf-8") as fh:
        lineno = 0
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if line.startswith(HEADER):
                close(lineno)
                author, c, expected = _parse_header(line, path, lineno)
                if c != int(cat):
                    raise IntegrityError(path, lineno, f"category {c} in file for {int(cat)}")
                if author in out:
                    raise IntegrityError(path, lineno, f"duplicate profile {author!r}")
                weights, start = {}, lineno
                continue
            if author is None:
                raise IntegrityError(path, lineno, "record before any profile header")
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0]:
                raise IntegrityError(path, lineno, "expected 'token<TAB>weight'")
            try:
                w = float(cols[1])
            except ValueError:
                raise IntegrityError(path, lineno, f"bad weight {cols[1]!r}") from None
            if not (0.0 < w <= 1.0) or cols[0] in weights:
                raise IntegrityError(path, lineno, f"invalid or duplicate record {cols[0]!r}")
            weights[cols[0]] = w
        close(lineno)
    return out


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".tsv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _lock(store_dir, site_id) -> FileLock:
    d = site_dir(store_dir, site_id)
    d.mkdir(parents=True, exist_ok=True)
    return FileLock(str(d / ".lock"))


def _write_category(store_dir, site_id, cat, vectors: dict[str, FeatureVector]) -> None:
    path = category_file(store_dir, site_id, cat)
    if not vectors:
        if path.exists():
            path.unlink()
        return
    _atomic_write(path, "".join(_format_block(a, vectors[a]) for a in sorted(vectors)))


def write_site(store_dir: str | Path, site_id: str, profiles: Iterable[ProfileFeatures]) -> None:
    """Replace the stored features of ``site_id`` with ``profiles``."""
    by_cat: dict[FeatureCategory, dict[str, FeatureVector]] = {c: {} for c in ALL_CATEGORIES}
    for pf in profiles:
        if pf.site_id != site_id:
            raise ValueError(f"profile {pf.author_id} belongs to {pf.site_id}, not {site_id}")
        _check_field(pf.author_id, "author_id")
        for cat, vec in pf.vectors.items():
            by_cat[cat][pf.author_id] = vec
    with _lock(store_dir, site_id):
        for cat, vecs in by_cat.items():
            _write_category(store_dir, site_id, cat, vecs)


def store_features(pf: ProfileFeatures, store_dir: str | Path) -> None:
    """Insert or replace one profile's vectors."""
    _check_field(pf.author_id, "author_id")
    with _lock(store_dir, pf.site_id):
        for cat in ALL_CATEGORIES:
            path = category_file(store_dir, pf.site_id, cat)
            existing = read_category_file(path, cat) if path.exists() else {}
            if cat in pf.vectors:
                existing[pf.author_id] = pf.vectors[cat]
            elif existing.pop(pf.author_id, None) is None:
                continue
            _write_category(store_dir, pf.site_id, cat, existing)


def load_site(
    store_dir: str | Path,
    site_id: str,
    categories: Iterable[FeatureCategory] | None = None,
) -> dict[str, ProfileFeatures]:
    cats = ALL_CATEGORIES if categories is None else tuple(categories)
    d = site_dir(store_dir, site_id)
    if not d.is_dir():
        raise NotFoundError(f"no feature store for site {site_id!r} under {store_dir}")
    out: dict[str, ProfileFeatures] = {}
    for cat in cats:
        path = category_file(store_dir, site_id, cat)
        if not path.exists():
            continue
        for author, vec in read_category_file(path, cat).items():
            out.setdefault(author, ProfileFeatures(author, site_id)).vectors[cat] = vec
    return dict(sorted(out.items()))


def load_features(
    store_dir: str | Path,
    author_id: str,
    site_id: str,
    categories: Iterable[FeatureCategory] | None = None,
) -> ProfileFeatures:
    cats = ALL_CATEGORIES if categories is None else tuple(categories)
    d = site_dir(store_dir, site_id)
    pf = ProfileFeatures(author_id, site_id)
    found = False
    for cat in ALL_CATEGORIES:
        path = category_file(store_dir, site_id, cat)
        if not d.is_dir() or not path.exists():
            continue
        vecs = read_category_file(path, cat)
        if author_id in vecs:
            found = True
            if cat in cats:
                pf.vectors[cat] = vecs[author_id]
    if not found:
        raise NotFoundError(f"no stored features for author {author_id!r} on site {site_id!r}")
    return pf
