"""Document model, token counting, and seeded pool sampling.

A corpus is a stream of whole documents; a pool is a token-budgeted,
uniformly shuffled subset of that stream.  Documents are never split:
sampling appends whole documents until the token target is met, so a
pool can overshoot its target by at most one document.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .errors import StreamExhaustedError, ValidationError


class DocumentSource(str, Enum):
    POOL = "pool"
    RANDOM_JUNK = "random_junk"
    SHUFFLED_JUNK = "shuffled_junk"
    OTHER = "other"


@dataclass(frozen=True)
class Document:
    """A unit of corpus text; ``token_count`` is under the active counter."""

    id: str
    text: str
    source: DocumentSource = DocumentSource.POOL
    token_count: int = 0


@dataclass(frozen=True)
class TokenCounter:
    """Named, deterministic text -> token-count function with count('') == 0."""

    name: str
    count: Callable[[str], int]


def _whitespace_count(text: str) -> int:
    # Maximal runs of non-whitespace characters, i.e. str.split semantics.
    return len(text.split())


#: Default counter: number of whitespace-separated runs.  Stands in for a
#: subword tokenizer; retention *ratios* stay comparable across counters.
WHITESPACE_COUNTER = TokenCounter(name="whitespace", count=_whitespace_count)


def count_tokens(counter: TokenCounter, text: str) -> int:
    """Apply ``counter`` to ``text``; deterministic, 0 for empty text."""
    n = counter.count(text)
    if n < 0:
        raise ValidationError(f"counter {counter.name!r} returned negative count {n}")
    return n


def make_document(
    doc_id: str,
    text: str,
    source: DocumentSource = DocumentSource.POOL,
    counter: TokenCounter = WHITESPACE_COUNTER,
) -> Document:
    """Build a Document with its token count filled in from ``counter``."""
    return Document(id=doc_id, text=text, source=source, token_count=count_tokens(counter, text))


@dataclass
class Pool:
    """An ordered collection of documents with a recorded sampling seed."""

    documents: list[Document] = field(default_factory=list)
    total_tokens: int = 0
    seed: int = 0
    label: str = ""
    counter_name: str = WHITESPACE_COUNTER.name

    def __post_init__(self) -> None:
        expected = sum(d.token_count for d in self.documents)
        if self.total_tokens == 0 and self.documents:
            self.total_tokens = expected
        elif self.total_tokens != expected:
            raise ValidationError(
                f"pool total_tokens {self.total_tokens} != sum of member counts {expected}"
            )
        ids = [d.id for d in self.documents]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"pool {self.label!r} contains duplicate document ids")

    def __len__(self) -> int:
        return len(self.documents)

    def replace_documents(self, documents: list[Document], label: str | None = None) -> "Pool":
        """New pool with the same seed/counter but different membership."""
        return Pool(
            documents=list(documents),
            total_tokens=sum(d.token_count for d in documents),
            seed=self.seed,
            label=self.label if label is None else label,
            counter_name=self.counter_name,
        )


def sample_pool(
    stream: Iterable[Document],
    target_tokens: int,
    seed: int,
    label: str = "pool",
    counter: TokenCounter = WHITESPACE_COUNTER,
) -> Pool:
    """Draw whole documents in seeded shuffled order until ``target_tokens`` is met.

    The stream is materialized and Fisher-Yates shuffled under ``seed``;
    documents are appended until the running token total reaches the
    target, so ``total_tokens - last_doc.token_count < target_tokens``.

    Raises:
        StreamExhaustedError: the stream ran out first; the error carries
            the token count actually achieved.
    """
    if target_tokens <= 0:
        raise ValidationError(f"target_tokens must be positive, got {target_tokens}")
    docs = list(stream)
    rng = random.Random(seed)
    rng.shuffle(docs)

    chosen: list[Document] = []
    total = 0
    for doc in docs:
        chosen.append(doc)
        total += doc.token_count
        if total >= target_tokens:
            break
    else:
        raise StreamExhaustedError(
            f"stream exhausted at {total} tokens before reaching target {target_tokens}",
            achieved_tokens=total,
        )
    return Pool(
        documents=chosen,
        total_tokens=total,
        seed=seed,
        label=label,
        counter_name=counter.name,
    )


# ---------------------------------------------------------------------------
# JSONL serialization: one {"id", "text", "source"} object per line; pools
# get a sidecar JSON header with label/seed/total_tokens/counter_name.
# ---------------------------------------------------------------------------


def read_documents(
    path: str | Path, counter: TokenCounter = WHITESPACE_COUNTER
) -> Iterator[Document]:
    """Stream documents from a JSONL file, recounting tokens under ``counter``."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                doc_id = obj["id"]
                text = obj["text"]
                source = DocumentSource(obj.get("source", "pool"))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
            yield make_document(doc_id, text, source, counter)


def write_documents(path: str | Path, documents: Iterable[Document]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in documents:
            fh.write(
                json.dumps(
                    {"id": doc.id, "text": doc.text, "source": doc.source.value},
                    ensure_ascii=False,
                )
                + "\n"
            )


def header_path(pool_path: str | Path) -> Path:
    return Path(str(pool_path) + ".header.json")


def write_pool(path: str | Path, pool: Pool) -> None:
    """Write pool documents as JSONL plus a ``<path>.header.json`` sidecar."""
    write_documents(path, pool.documents)
    header = {
        "label": pool.label,
        "seed": pool.seed,
        "total_tokens": pool.total_tokens,
        "counter_name": pool.counter_name,
    }
    with open(header_path(path), "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_pool(path: str | Path, counter: TokenCounter = WHITESPACE_COUNTER) -> Pool:
    """Read a pool written by :func:`write_pool`; header is optional."""
    docs = list(read_documents(path, counter))
    label, seed = Path(path).stem, 0
    hp = header_path(path)
    if hp.exists():
        with open(hp, "r", encoding="utf-8") as fh:
            header = json.load(fh)
        label = header.get("label", label)
        seed = header.get("seed", seed)
        if header.get("counter_name", counter.name) != counter.name:
            raise ValidationError(
                f"{path}: pool was written under counter "
                f"{header['counter_name']!r}, reading with {counter.name!r}"
            )
    return Pool(
        documents=docs,
        total_tokens=sum(d.token_count for d in docs),
        seed=seed,
        label=label,
        counter_name=counter.name,
    )
