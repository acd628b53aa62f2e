"""Composable per-document corpus filters with retention accounting.

Five filter families are provided: an English-score threshold, a
repetition filter over lines/paragraphs/n-grams, a stop-word floor,
exact deduplication, and a score-ranked quality cut.  Per-document
filters are pure functions of (text, config, scorer), so a pipeline's
output is independent of document-level parallelism.

Boundary convention: a fraction exactly equal to its threshold is kept.
"""

from __future__ import annotations

import math
import re
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

from .corpus import Document, Pool
from .errors import ConfigError, ValidationError

DEFAULT_STOPWORDS = ("the", "be", "to", "of", "and", "that", "have", "with")

#: Line/paragraph/n-gram thresholds from the Gopher curation recipe; the
#: granularities are fixed but every number is configurable.
GOPHER_REPETITION_THRESHOLDS = {
    "duplicate_line": 0.30,
    "duplicate_paragraph": 0.30,
    "top_2gram": 0.20,
    "top_3gram": 0.18,
    "top_4gram": 0.16,
    "dup_5gram": 0.15,
    "dup_6gram": 0.14,
    "dup_7gram": 0.13,
    "dup_8gram": 0.12,
    "dup_9gram": 0.11,
    "dup_10gram": 0.10,
}

REPETITION_GRANULARITIES = tuple(GOPHER_REPETITION_THRESHOLDS)


@dataclass(frozen=True)
class DocumentScorer:
    """Named deterministic text -> score-in-[0,1] function."""

    name: str
    score: Callable[[str], float]


@dataclass
class FilterConfig:
    english_threshold: float = 0.5
    stopword_list: tuple[str, ...] = DEFAULT_STOPWORDS
    stopword_min_count: int = 2
    # Count the total across the list by default; set True to require
    # `stopword_min_count` *distinct* stop words instead.
    stopword_distinct: bool = False
    repetition_thresholds: dict[str, float] = field(
        default_factory=lambda: dict(GOPHER_REPETITION_THRESHOLDS)
    )
    quality_keep_fraction: float = 0.16
    dedup_enabled: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.english_threshold <= 1.0:
            raise ConfigError(f"english_threshold must be in [0,1], got {self.english_threshold}")
        if self.stopword_min_count < 0:
            raise ConfigError("stopword_min_count must be >= 0")
        for name, thr in self.repetition_thresholds.items():
            if not 0.0 <= thr <= 1.0:
                raise ConfigError(f"repetition threshold {name} must be in [0,1], got {thr}")
        if not 0.0 < self.quality_keep_fraction <= 1.0:
            raise ConfigError(
                f"quality_keep_fraction must be in (0,1], got {self.quality_keep_fraction}"
            )


#: Named threshold profiles selectable via the CLI --profile flag.
PROFILES: dict[str, FilterConfig] = {
    "gopher": FilterConfig(),
    "permissive": FilterConfig(
        english_threshold=0.0,
        repetition_thresholds={name: 1.0 for name in REPETITION_GRANULARITIES},
        quality_keep_fraction=1.0,
    ),
}


def profile(name: str) -> FilterConfig:
    if name not in PROFILES:
        raise ConfigError(f"unknown profile {name!r}; available: {sorted(PROFILES)}")
    cfg = PROFILES[name]
    return replace(cfg, repetition_thresholds=dict(cfg.repetition_thresholds))


@dataclass(frozen=True)
class FilterOutcome:
    doc_id: str
    kept: bool
    failed_rules: tuple[str, ...] = ()
    scores: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kept != (len(self.failed_rules) == 0):
            raise ValidationError("kept must hold exactly when failed_rules is empty")


@dataclass(frozen=True)
class FilterStats:
    docs_in: int
    docs_kept: int
    tokens_in: int
    tokens_kept: int

    @property
    def retention_docs(self) -> float:
        return self.docs_kept / self.docs_in if self.docs_in > 0 else 1.0

    @property
    def retention_tokens(self) -> float:
        return self.tokens_kept / self.tokens_in if self.tokens_in > 0 else 1.0

    @classmethod
    def from_pools(cls, before: Pool, after: Pool) -> "FilterStats":
        return cls(
            docs_in=len(before),
            docs_kept=len(after),
            tokens_in=before.total_tokens,
            tokens_kept=after.total_tokens,
        )


# ---------------------------------------------------------------------------
# Built-in English scorer: fraction of words found in a bundled wordlist.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _english_words() -> frozenset[str]:
    data = resources.files("poollab.data").joinpath("english_wordlist.txt").read_text("utf-8")
    return frozenset(w for w in data.split() if w)


def _wordlist_score(text: str) -> float:
    words = text.split()
    if not words:
        return 0.0
    vocab = _english_words()
    hits = sum(1 for w in words if w.lower().strip(string.punctuation) in vocab)
    return hits / len(words)


def builtin_english_scorer() -> DocumentScorer:
    """Wordlist-hit-rate scorer; a stand-in for a trained classifier."""
    return DocumentScorer(name="wordlist-english", score=_wordlist_score)


# ---------------------------------------------------------------------------
# Per-document filters.
# ---------------------------------------------------------------------------

_WORD_RE = re.compile(r"\w+")


def stopword_filter(doc: Document, cfg: FilterConfig) -> FilterOutcome:
    """Keep documents with enough whole-word stop-word occurrences.

    Matching is case-insensitive on ``\\w+`` tokens; by default the count
    is the total across the list, not per-word.
    """
    if not cfg.stopword_list:
        raise ConfigError("stopword_list must be non-empty")
    wanted = {w.lower() for w in cfg.stopword_list}
    tokens = _WORD_RE.findall(doc.text.lower())
    if cfg.stopword_distinct:
        count = len(wanted.intersection(tokens))
    else:
        count = sum(1 for t in tokens if t in wanted)
    kept = count >= cfg.stopword_min_count
    return FilterOutcome(
        doc_id=doc.id,
        kept=kept,
        failed_rules=() if kept else ("stopword",),
        scores={"stopword_count": float(count)},
    )


def _dedup_fraction(items: list[str]) -> float:
    if not items:
        return 0.0
    return (len(items) - len(set(items))) / len(items)


def _covered_fraction(spans: list[tuple[int, int]], text_len: int) -> float:
    # Union of character spans, so overlapping occurrences never push the
    # fraction above 1.
    if not spans or text_len == 0:
        return 0.0
    mask = bytearray(text_len)
    for start, end in spans:
        for i in range(start, end):
            mask[i] = 1
    return sum(mask) / text_len


def repetition_fractions(doc: Document) -> dict[str, float]:
    """Duplicate-content fractions at every repetition granularity.

    Returns a value in [0, 1] for each key in
    :data:`REPETITION_GRANULARITIES`:

    - ``duplicate_line`` / ``duplicate_paragraph``: (segments - distinct
      segments) / segments, over newline-split lines and blank-line-split
      paragraphs (whitespace-only segments dropped).
    - ``top_{n}gram`` for n in 2..4: characters covered by occurrences of
      the most frequent word n-gram, divided by total characters.  Ties
      on frequency resolve to the n-gram covering the most characters.
    - ``dup_{n}gram`` for n in 5..10: characters covered by any word
      n-gram occurring at least twice, divided by total characters.

    Word spans include the whitespace between the words of an n-gram; an
    empty document yields all zeros.
    """
    text = doc.text
    out: dict[str, float] = {}

    lines = [ln for ln in text.split("\n") if ln.strip()]
    out["duplicate_line"] = _dedup_fraction(lines)
    paragraphs = [p for p in re.split(r"\n\s*\n", text) if p.strip()]
    out["duplicate_paragraph"] = _dedup_fraction(paragraphs)

    word_spans = [(m.start(), m.end()) for m in re.finditer(r"\S+", text)]
    words = [text[s:e] for s, e in word_spans]

    for n in range(2, 5):
        out[f"top_{n}gram"] = _top_ngram_fraction(words, word_spans, n, len(text))
    for n in range(5, 11):
        out[f"dup_{n}gram"] = _dup_ngram_fraction(words, word_spans, n, len(text))
    return out


def _ngram_occurrences(
    words: list[str], spans: list[tuple[int, int]], n: int
) -> dict[tuple[str, ...], list[tuple[int, int]]]:
    occurrences: dict[tuple[str, ...], list[tuple[int, int]]] = {}
    for i in range(len(words) - n + 1):
        gram = tuple(words[i : i + n])
        occurrences.setdefault(gram, []).append((spans[i][0], spans[i + n - 1][1]))
    return occurrences


def _top_ngram_fraction(
    words: list[str], spans: list[tuple[int, int]], n: int, text_len: int
) -> float:
    occurrences = _ngram_occurrences(words, spans, n)
    if not occurrences:
        return 0.0
    top_count = max(len(v) for v in occurrences.values())
    candidates = [v for v in occurrences.values() if len(v) == top_count]
    return max(_covered_fraction(v, text_len) for v in candidates)


def _dup_ngram_fraction(
    words: list[str], spans: list[tuple[int, int]], n: int, text_len: int
) -> float:
    occurrences = _ngram_occurrences(words, spans, n)
    duplicated = [span for v in occurrences.values() if len(v) >= 2 for span in v]
    return _covered_fraction(duplicated, text_len)


def repetition_filter(doc: Document, cfg: FilterConfig) -> FilterOutcome:
    """Keep documents whose repetition fractions all stay at or below threshold."""
    fractions = repetition_fractions(doc)
    missing = [name for name in fractions if name not in cfg.repetition_thresholds]
    if missing:
        raise ConfigError(f"repetition_thresholds missing granularities: {missing}")
    failed = tuple(
        name for name, frac in fractions.items() if frac > cfg.repetition_thresholds[name]
    )
    return FilterOutcome(doc_id=doc.id, kept=not failed, failed_rules=failed, scores=fractions)


def english_filter(doc: Document, scorer: DocumentScorer, threshold: float) -> FilterOutcome:
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"english threshold must be in [0,1], got {threshold}")
    score = scorer.score(doc.text)
    kept = score >= threshold
    return FilterOutcome(
        doc_id=doc.id,
        kept=kept,
        failed_rules=() if kept else ("english",),
        scores={"english": score},
    )


# ---------------------------------------------------------------------------
# Pool-level filters (single sequential pass).
# ---------------------------------------------------------------------------


def exact_dedup(pool: Pool) -> Pool:
    """Keep the first occurrence of each distinct outer-whitespace-trimmed text."""
    seen: set[str] = set()
    kept: list[Document] = []
    for doc in pool.documents:
        key = doc.text.strip()
        if key not in seen:
            seen.add(key)
            kept.append(doc)
    return pool.replace_documents(kept)


def quality_filter(pool: Pool, scorer: DocumentScorer, keep_fraction: float) -> Pool:
    """Keep the ceil(keep_fraction * docs) highest-scoring documents.

    Score ties at the cut are broken by ascending doc id; survivors keep
    their original pool order.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigError(f"keep_fraction must be in (0,1], got {keep_fraction}")
    if not pool.documents:
        return pool.replace_documents([])
    n_keep = math.ceil(keep_fraction * len(pool.documents))
    ranked = sorted(
        pool.documents, key=lambda d: (-scorer.score(d.text), d.id)
    )
    keep_ids = {d.id for d in ranked[:n_keep]}
    return pool.replace_documents([d for d in pool.documents if d.id in keep_ids])


# ---------------------------------------------------------------------------
# Pipeline: an ordered list of named stages, each Pool -> Pool.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineStage:
    name: str
    apply: Callable[[Pool, int], Pool]


def _per_document_stage(name: str, outcome_fn: Callable[[Document], FilterOutcome]) -> PipelineStage:
    def apply(pool: Pool, threads: int) -> Pool:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                outcomes = list(executor.map(outcome_fn, pool.documents))
        else:
            outcomes = [outcome_fn(doc) for doc in pool.documents]
        kept = [doc for doc, out in zip(pool.documents, outcomes) if out.kept]
        return pool.replace_documents(kept)

    return PipelineStage(name=name, apply=apply)


def english_stage(scorer: DocumentScorer, threshold: float) -> PipelineStage:
    return _per_document_stage("english", lambda d: english_filter(d, scorer, threshold))


def repetition_stage(cfg: FilterConfig) -> PipelineStage:
    return _per_document_stage("repetition", lambda d: repetition_filter(d, cfg))


def stopword_stage(cfg: FilterConfig) -> PipelineStage:
    return _per_document_stage("stopword", lambda d: stopword_filter(d, cfg))


def dedup_stage() -> PipelineStage:
    return PipelineStage(name="dedup", apply=lambda pool, threads: exact_dedup(pool))


def quality_stage(scorer: DocumentScorer, keep_fraction: float) -> PipelineStage:
    return PipelineStage(
        name="quality", apply=lambda pool, threads: quality_filter(pool, scorer, keep_fraction)
    )


#: Stage lineups for the two composite filters: the heuristic-cleaning
#: lineup, and that plus dedup + quality-classifier cut.
REFINEDWEB_STAGES = ("english", "repetition", "stopword")
DCLM_STAGES = REFINEDWEB_STAGES + ("dedup", "quality")


def build_stages(
    names: Sequence[str],
    cfg: FilterConfig,
    scorer: DocumentScorer | None = None,
) -> list[PipelineStage]:
    """Instantiate stages by name using ``cfg`` thresholds and ``scorer``."""
    scorer = scorer or builtin_english_scorer()
    factories: dict[str, Callable[[], PipelineStage]] = {
        "english": lambda: english_stage(scorer, cfg.english_threshold),
        "repetition": lambda: repetition_stage(cfg),
        "stopword": lambda: stopword_stage(cfg),
        "dedup": dedup_stage,
        "quality": lambda: quality_stage(scorer, cfg.quality_keep_fraction),
    }
    stages = []
    for name in names:
        if name not in factories:
            raise ConfigError(f"unknown stage {name!r}; available: {sorted(factories)}")
        stages.append(factories[name]())
    return stages


@dataclass
class PipelineResult:
    pool: Pool
    stage_order: list[str]
    per_stage: list[tuple[str, FilterStats]]
    cumulative: FilterStats

    def stats_rows(self) -> list[dict[str, object]]:
        """Rows for the stats CSV, one per stage plus a cumulative row."""
        rows = []
        for name, stats in self.per_stage + [("cumulative", self.cumulative)]:
            rows.append(
                {
                    "stage": name,
                    "docs_in": stats.docs_in,
                    "docs_kept": stats.docs_kept,
                    "tokens_in": stats.tokens_in,
                    "tokens_kept": stats.tokens_kept,
                    "retention_docs": stats.retention_docs,
                    "retention_tokens": stats.retention_tokens,
                }
            )
        return rows


def run_pipeline(pool: Pool, stages: Sequence[PipelineStage], threads: int = 1) -> PipelineResult:
    """Apply ``stages`` in order, recording per-stage and cumulative stats."""
    if not stages:
        raise ConfigError("pipeline requires at least one stage")
    current = pool
    per_stage: list[tuple[str, FilterStats]] = []
    for stage in stages:
        next_pool = stage.apply(current, threads)
        per_stage.append((stage.name, FilterStats.from_pools(current, next_pool)))
        current = next_pool
    return PipelineResult(
        pool=current,
        stage_order=[s.name for s in stages],
        per_stage=per_stage,
        cumulative=FilterStats.from_pools(pool, current),
    )
