"""INI-style run configuration.

Example::

    [paths]
    run_dir = run
    posts = synth/posts.jsonl
    ground_truth = synth/truth.tsv

    [clean]
    min_words = 1000

    [clean.twitter]
    filter_retweets = true

    [experiment]
    unknown_site = site1
    known_site = site2
    author_size = 200
    ks = 1, 10, 100

Relative paths resolve against the directory holding the config file.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from stylolink.corpus import CleaningConfig, SiteRules
from stylolink.features import ALL_CATEGORIES, ExtractionSettings, FeatureCategory
from stylolink.lexicon import PUNCTUATION, SPECIAL_CHARS, load_charset, load_function_words
from stylolink.synth import SynthConfig


class ConfigError(ValueError):
    pass


def _list(value: str | None) -> list[str]:
    if not value:
        return []
    return [v for v in value.replace(",", " ").split() if v]


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def parse_categories(value: str | None) -> tuple[FeatureCategory, ...]:
    if value is None or value.strip().lower() in ("", "all"):
        return ALL_CATEGORIES
    try:
        return tuple(sorted({FeatureCategory.parse(v) for v in _list(value)}))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"unknown feature category in {value!r}") from exc


@dataclass
class RunConfig:
    base_dir: Path
    run_dir: Path
    posts: list[Path] = field(default_factory=list)
    ground_truth: Path | None = None
    store: Path | None = None
    function_words: Path | None = None
    special_chars: Path | None = None
    punctuation: Path | None = None
    external_tags: dict[str, Path] = field(default_factory=dict)

    cleaning: CleaningConfig = field(default_factory=CleaningConfig)

    unknown_site: str = "site1"
    known_site: str = "site2"
    author_size: int | None = None
    ks: tuple[int, ...] = (1, 10, 100)
    n_orderings: int = 10
    seed: int = 0
    top_t_floor: int = 1
    truth_delimiter: str = "\t"
    truth_header: bool = False

    categories: tuple[FeatureCategory, ...] = ALL_CATEGORIES
    beam: int = 3
    max_size: int = 3

    bench_sizes: tuple[int, ...] = (1000, 2000, 4000, 8000)
    bench_repeats: int = 3
    bench_unknowns: int = 5
    bench_synthetic: bool = False

    synth: SynthConfig = field(default_factory=SynthConfig)
    digest: str = ""

    @property
    def store_dir(self) -> Path:
        return self.store or self.run_dir / "features"

    @property
    def synth_dir(self) -> Path:
        return self.run_dir / "synth"

    @property
    def posts_paths(self) -> list[Path]:
        return self.posts or [self.synth_dir / "posts.jsonl"]

    @property
    def truth_path(self) -> Path:
        return self.ground_truth or self.synth_dir / "truth.tsv"

    def extraction_settings(self) -> ExtractionSettings:
        return ExtractionSettings(
            function_words=frozenset(load_function_words(self.function_words)),
            special_chars=tuple(load_charset(self.special_chars, SPECIAL_CHARS)),
            punctuation=tuple(load_charset(self.punctuation, PUNCTUATION)),
            categories=frozenset(self.categories),
        )

    def validate(self, need: tuple[str, ...] = ()) -> None:
        if any(k < 1 for k in self.ks) or not self.ks:
            raise ConfigError("K values must be positive")
        if not self.categories:
            raise ConfigError("no feature categories enabled")
        if self.n_orderings < 1:
            raise ConfigError("n_orderings must be >= 1")
        if self.author_size is not None and self.author_size < 1:
            raise ConfigError("author_size must be >= 1")
        for p in (self.function_words, self.special_chars, self.punctuation, *self.external_tags.values()):
            if p is not None and not p.exists():
                raise ConfigError(f"configured file does not exist: {p}")
        if "posts" in need:
            for p in self.posts_paths:
                if not p.exists():
                    raise ConfigError(f"posts file not found: {p} (run gen-synth or fix [paths] posts)")
        if "truth" in need and not self.truth_path.exists():
            raise ConfigError(f"ground truth not found: {self.truth_path}")


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    raw = b""
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        raw = path.read_bytes()
        cp.read_string(raw.decode("utf-8"), source=str(path))
        base = path.resolve().parent
    else:
        base = Path.cwd()

    def p(value):
        if not value:
            return None
        q = Path(value)
        return q if q.is_absolute() else base / q

    paths = cp["paths"] if cp.has_section("paths") else {}
    cfg = RunConfig(base_dir=base, run_dir=p(paths.get("run_dir", "run")))
    cfg.posts = [p(v) for v in _list(paths.get("posts"))]
    cfg.ground_truth = p(paths.get("ground_truth"))
    cfg.store = p(paths.get("store"))
    cfg.function_words = p(paths.get("function_words"))
    cfg.special_chars = p(paths.get("special_chars"))
    cfg.punctuation = p(paths.get("punctuation"))
    if cp.has_section("tags"):
        cfg.external_tags = {site: p(v) for site, v in cp["tags"].items()}

    try:
        default = SiteRules()
        if cp.has_section("clean"):
            sec = cp["clean"]
            default = SiteRules(
                filter_retweets=_bool(sec.get("filter_retweets", "false")),
                english_threshold=float(sec.get("english_threshold", default.english_threshold)),
                min_words=int(sec.get("min_words", default.min_words)),
            )
        sites = {"twitter": SiteRules(True, default.english_threshold, default.min_words)}
        for name in cp.sections():
            if name.startswith("clean."):
                sec = cp[name]
                base_rules = sites.get(name[6:], default)
                sites[name[6:]] = SiteRules(
                    filter_retweets=_bool(sec.get("filter_retweets", str(base_rules.filter_retweets))),
                    english_threshold=float(sec.get("english_threshold", base_rules.english_threshold)),
                    min_words=int(sec.get("min_words", base_rules.min_words)),
                )
        cfg.cleaning = CleaningConfig(default=default, sites=sites)

        if cp.has_section("experiment"):
            ex = cp["experiment"]
            cfg.unknown_site = ex.get("unknown_site", cfg.unknown_site)
            cfg.known_site = ex.get("known_site", cfg.known_site)
            if ex.get("author_size"):
                cfg.author_size = int(ex["author_size"])
            if ex.get("ks"):
                cfg.ks = tuple(sorted({int(k) for k in _list(ex["ks"])}))
            cfg.n_orderings = int(ex.get("n_orderings", cfg.n_orderings))
            cfg.seed = int(ex.get("seed", cfg.seed))
            cfg.top_t_floor = int(ex.get("top_t_floor", cfg.top_t_floor))
            delim = ex.get("truth_delimiter", "tab")
            cfg.truth_delimiter = {"tab": "\t", "comma": ",", "space": " "}.get(delim, delim)
            cfg.truth_header = _bool(ex.get("truth_header", "false"))

        if cp.has_section("features"):
            fs = cp["features"]
            enabled = parse_categories(fs.get("enabled"))
            disabled = set(parse_categories(fs["disabled"])) if fs.get("disabled") else set()
            cfg.categories = tuple(c for c in enabled if c not in disabled)
        if cp.has_section("eval"):
            cfg.beam = int(cp["eval"].get("beam", cfg.beam))
            cfg.max_size = int(cp["eval"].get("max_size", cfg.max_size))
        if cp.has_section("bench"):
            b = cp["bench"]
            if b.get("sizes"):
                cfg.bench_sizes = tuple(int(x) for x in _list(b["sizes"]))
            cfg.bench_repeats = int(b.get("repeats", cfg.bench_repeats))
            cfg.bench_unknowns = int(b.get("unknowns", cfg.bench_unknowns))
            cfg.bench_synthetic = _bool(b.get("synthetic", "false"))
        if cp.has_section("synth"):
            s = cp["synth"]
            d = SynthConfig()
            sites = tuple(_list(s.get("sites"))) or d.sites
            if len(sites) != 2:
                raise ConfigError("[synth] sites needs exactly two names")
            lo_hi = tuple(int(x) for x in _list(s.get("post_length"))) or d.post_length
            cfg.synth = SynthConfig(
                n_authors=int(s.get("n_authors", d.n_authors)),
                words_per_author=int(s.get("words_per_author", d.words_per_author)),
                signal=float(s.get("signal", d.signal)),
                preferred_words=int(s.get("preferred_words", d.preferred_words)),
                content_vocab=int(s.get("content_vocab", d.content_vocab)),
                post_length=lo_hi,
                noise=float(s.get("noise", d.noise)),
                sites=sites,
                seed=int(s.get("seed", d.seed)),
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value in config: {exc}") from exc

    overrides = overrides or {}
    if overrides.get("seed") is not None:
        cfg.seed = int(overrides["seed"])
        cfg.synth.seed = int(overrides["seed"])
    h = hashlib.sha256(raw)
    h.update(repr(sorted(overrides.items())).encode())
    cfg.digest = h.hexdigest()
    return cfg
