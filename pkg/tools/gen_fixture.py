#!/usr/bin/env python3
"""One-off generator for the 1k-document filter fixture and its oracle.

Writes tests/data/corpus_1k.jsonl (a deterministic mix of clean,
repetitive, junk, low-stop-word, duplicate, and mixed documents) and
freezes the independent recount of every filter's retention into
tests/data/corpus_1k_oracle.json.  Rerun only if the fixture recipe
changes; the test suite treats both files as frozen inputs.

Usage: python3 tools/gen_fixture.py
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

import oracle_recount  # noqa: E402

SEED = 20250801
FUNCTION_WORDS = ["the", "be", "to", "of", "and", "that", "have", "with", "a", "in"]


def english_sentence(rng: random.Random, wordlist: list[str], n_words: int) -> str:
    words = []
    for _ in range(n_words):
        if rng.random() < 0.35:
            words.append(rng.choice(FUNCTION_WORDS))
        else:
            words.append(rng.choice(wordlist))
    if rng.random() < 0.3 and len(words) > 4:
        words[rng.randrange(1, len(words) - 1)] += ","
    return " ".join(words) + "."


def english_doc(rng, wordlist) -> str:
    paragraphs = []
    for _ in range(rng.randint(1, 4)):
        lines = [
            english_sentence(rng, wordlist, rng.randint(8, 14))
            for _ in range(rng.randint(2, 5))
        ]
        paragraphs.append("\n".join(lines))
    return "\n\n".join(paragraphs)


def junk_doc(rng) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    words = [
        "".join(rng.choice(alphabet) for _ in range(rng.randint(3, 8)))
        for _ in range(rng.randint(30, 120))
    ]
    return " ".join(words)


def repetitive_doc(rng, wordlist) -> str:
    flavor = rng.randrange(3)
    if flavor == 0:  # repeated line
        line = english_sentence(rng, wordlist, rng.randint(6, 10))
        other = english_sentence(rng, wordlist, rng.randint(6, 10))
        lines = [line] * rng.randint(4, 8) + [other]
        rng.shuffle(lines)
        return "\n".join(lines)
    if flavor == 1:  # repeated paragraph
        para = "\n".join(
            english_sentence(rng, wordlist, rng.randint(6, 10)) for _ in range(2)
        )
        return "\n\n".join([para] * rng.randint(3, 5))
    # looping phrase: high duplicated n-gram coverage
    phrase = " ".join(rng.choice(wordlist) for _ in range(6))
    return " ".join([phrase] * rng.randint(6, 12))


def low_stopword_doc(rng, wordlist) -> str:
    usable = [w for w in wordlist if w not in oracle_recount.STOPWORDS]
    words = [rng.choice(usable) for _ in range(rng.randint(25, 80))]
    return " ".join(words)


def mixed_doc(rng, wordlist) -> str:
    english_share = rng.choice([0.35, 0.45, 0.55, 0.65])
    n = rng.randint(30, 90)
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    words = []
    for _ in range(n):
        if rng.random() < english_share:
            words.append(rng.choice(wordlist))
        else:
            words.append("".join(rng.choice(alphabet) for _ in range(rng.randint(3, 8))))
    return " ".join(words)


def main() -> None:
    rng = random.Random(SEED)
    wordlist = sorted(oracle_recount.load_wordlist())

    texts: list[str] = []
    texts += [english_doc(rng, wordlist) for _ in range(480)]
    texts += [junk_doc(rng) for _ in range(150)]
    texts += [repetitive_doc(rng, wordlist) for _ in range(120)]
    texts += [low_stopword_doc(rng, wordlist) for _ in range(120)]
    # exact and whitespace-variant duplicates of earlier documents
    for _ in range(80):
        original = rng.choice(texts[:480])
        texts.append(original + ("\n" if rng.random() < 0.5 else ""))
    texts += [mixed_doc(rng, wordlist) for _ in range(50)]
    assert len(texts) == 1000

    rng.shuffle(texts)
    docs = [(f"doc-{i:04d}", text) for i, text in enumerate(texts)]

    data_dir = REPO / "tests" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    fixture_path = data_dir / "corpus_1k.jsonl"
    with open(fixture_path, "w", encoding="utf-8") as fh:
        for doc_id, text in docs:
            fh.write(json.dumps({"id": doc_id, "text": text, "source": "pool"}) + "\n")

    oracle = oracle_recount.recount(docs)
    oracle_path = data_dir / "corpus_1k_oracle.json"
    with open(oracle_path, "w", encoding="utf-8") as fh:
        json.dump(oracle, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"wrote {fixture_path} ({len(docs)} docs)")
    for name, stats in oracle["single_stage"].items():
        print(f"  single {name:10s}: doc retention {stats['retention_docs']:.4f}")
    print(f"  pipeline cumulative: {oracle['pipeline']['cumulative']['retention_docs']:.4f}")


if __name__ == "__main__":
    main()
