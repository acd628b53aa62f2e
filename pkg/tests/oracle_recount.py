"""Independent brute-force recount of filter retention statistics.

Used to freeze the oracle values for the bundled 1k-document fixture and
to re-verify them at test time.  Everything here is written directly
against the documented filter contracts, without importing any of the
package's filter code: token counts are whitespace runs, stop words are
counted with a regex alternation, repetition fractions mark character
positions in plain Python sets, and the English score is a wordlist hit
rate.  Keep this file boring and obviously correct.
"""

from __future__ import annotations

import json
import math
import re
import string
from importlib import resources

STOPWORDS = ("the", "be", "to", "of", "and", "that", "have", "with")
STOPWORD_RE = re.compile(r"\b(?:" + "|".join(STOPWORDS) + r")\b")

GOPHER = {
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


def load_wordlist() -> frozenset[str]:
    text = resources.files("poollab.data").joinpath("english_wordlist.txt").read_text("utf-8")
    return frozenset(text.split())


def tokens(text: str) -> int:
    return len(text.split())


def english_score(text: str, wordlist: frozenset[str]) -> float:
    words = text.split()
    if not words:
        return 0.0
    hits = 0
    for word in words:
        if word.lower().strip(string.punctuation) in wordlist:
            hits += 1
    return hits / len(words)


def stopword_total(text: str) -> int:
    return len(STOPWORD_RE.findall(text.lower()))


def _word_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < len(text) and not text[j].isspace():
            j += 1
        spans.append((i, j))
        i = j
    return spans


def repetition_fractions(text: str) -> dict[str, float]:
    out = {}
    lines = [ln for ln in text.split("\n") if ln.strip()]
    out["duplicate_line"] = (len(lines) - len(set(lines))) / len(lines) if lines else 0.0
    paragraphs = [p for p in re.split(r"\n\s*\n", text) if p.strip()]
    out["duplicate_paragraph"] = (
        (len(paragraphs) - len(set(paragraphs))) / len(paragraphs) if paragraphs else 0.0
    )

    spans = _word_spans(text)
    words = [text[a:b] for a, b in spans]

    for n in range(2, 11):
        occurrences: dict[tuple[str, ...], list[tuple[int, int]]] = {}
        for i in range(len(words) - n + 1):
            gram = tuple(words[i : i + n])
            occurrences.setdefault(gram, []).append((spans[i][0], spans[i + n - 1][1]))

        def covered(span_list) -> float:
            positions = set()
            for a, b in span_list:
                positions.update(range(a, b))
            return len(positions) / len(text) if text else 0.0

        if n <= 4:
            if occurrences:
                top = max(len(v) for v in occurrences.values())
                frac = max(covered(v) for v in occurrences.values() if len(v) == top)
            else:
                frac = 0.0
            out[f"top_{n}gram"] = frac
        else:
            dup_spans = [s for v in occurrences.values() if len(v) >= 2 for s in v]
            out[f"dup_{n}gram"] = covered(dup_spans)
    return out


def keep_english(text: str, wordlist: frozenset[str], threshold: float = 0.5) -> bool:
    return english_score(text, wordlist) >= threshold


def keep_repetition(text: str) -> bool:
    fractions = repetition_fractions(text)
    return all(fractions[name] <= GOPHER[name] for name in GOPHER)


def keep_stopword(text: str, min_count: int = 2) -> bool:
    return stopword_total(text) >= min_count


def stage_stats(docs: list[tuple[str, str]], kept: list[tuple[str, str]]) -> dict:
    tokens_in = sum(tokens(t) for _, t in docs)
    tokens_kept = sum(tokens(t) for _, t in kept)
    return {
        "docs_in": len(docs),
        "docs_kept": len(kept),
        "tokens_in": tokens_in,
        "tokens_kept": tokens_kept,
        "retention_docs": len(kept) / len(docs) if docs else 1.0,
        "retention_tokens": tokens_kept / tokens_in if tokens_in else 1.0,
    }


def apply_dedup(docs: list[tuple[str, str]]) -> list[tuple[str, str]]:
    seen = set()
    kept = []
    for doc_id, text in docs:
        key = text.strip()
        if key not in seen:
            seen.add(key)
            kept.append((doc_id, text))
    return kept


def apply_quality(
    docs: list[tuple[str, str]], wordlist: frozenset[str], keep_fraction: float = 0.16
) -> list[tuple[str, str]]:
    if not docs:
        return []
    n_keep = math.ceil(keep_fraction * len(docs))
    ranked = sorted(docs, key=lambda d: (-english_score(d[1], wordlist), d[0]))
    keep_ids = {doc_id for doc_id, _ in ranked[:n_keep]}
    return [d for d in docs if d[0] in keep_ids]


def recount(docs: list[tuple[str, str]]) -> dict:
    """Single-stage and pipeline retention stats for the fixture."""
    wordlist = load_wordlist()
    result: dict = {"single_stage": {}, "pipeline": {}}

    single = {
        "english": [d for d in docs if keep_english(d[1], wordlist)],
        "repetition": [d for d in docs if keep_repetition(d[1])],
        "stopword": [d for d in docs if keep_stopword(d[1])],
        "dedup": apply_dedup(docs),
        "quality": apply_quality(docs, wordlist),
    }
    for name, kept in single.items():
        result["single_stage"][name] = stage_stats(docs, kept)

    current = docs
    for name in ("english", "repetition", "stopword", "dedup", "quality"):
        if name == "english":
            kept = [d for d in current if keep_english(d[1], wordlist)]
        elif name == "repetition":
            kept = [d for d in current if keep_repetition(d[1])]
        elif name == "stopword":
            kept = [d for d in current if keep_stopword(d[1])]
        elif name == "dedup":
            kept = apply_dedup(current)
        else:
            kept = apply_quality(current, wordlist)
        result["pipeline"][name] = stage_stats(current, kept)
        current = kept
    result["pipeline"]["cumulative"] = stage_stats(docs, current)
    return result


def load_fixture(path) -> list[tuple[str, str]]:
    docs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                docs.append((obj["id"], obj["text"]))
    return docs
