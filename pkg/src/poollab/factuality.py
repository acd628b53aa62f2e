"""Keyword-matching of corpus documents to QA items plus judge classification.

Documents matched to a question/answer pair are sent to a judge backend
that labels each one Support, Refute, Related, or Unrelated.  The judge
is any JSON-over-HTTP chat-completion endpoint (credentials via the
JUDGE_API_KEY environment variable) or an in-process mock; responses
that do not parse to exactly one label are recorded as failures, never
coerced, and never stop the rest of the batch.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import requests

from .corpus import Document, Pool
from .errors import JudgeError, ValidationError


class Verdict(str, Enum):
    SUPPORT = "Support"
    REFUTE = "Refute"
    RELATED = "Related"
    UNRELATED = "Unrelated"


VERDICT_COLUMNS = [v.value for v in Verdict]


@dataclass(frozen=True)
class QAItem:
    subject: str
    question: str
    answer: str
    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ValidationError("QA item needs at least one keyword")
        for kw in self.keywords:
            if kw != kw.lower():
                raise ValidationError(f"keywords must be lowercase, got {kw!r}")

    @property
    def qa_id(self) -> str:
        digest = hashlib.sha256(self.question.encode("utf-8")).hexdigest()[:8]
        return f"{self.subject}:{digest}"


@dataclass(frozen=True)
class Judgement:
    doc_id: str
    qa_id: str
    verdict: Verdict
    raw_response: str


@dataclass(frozen=True)
class JudgeFailure:
    doc_id: str
    qa_id: str
    error: str


@dataclass
class JudgeRun:
    """Per-document results: every input doc lands in exactly one list."""

    judgements: list[Judgement]
    failures: list[JudgeFailure]


PROMPT_TEMPLATE = """\
You are given a document, a question, and its reference answer.
Classify whether the document supports, refutes, is related to, or is
unrelated to the question and answer.

Document:
{document}

Question: {question}
Answer: {answer}

Reply with exactly one word: Support, Refute, Related, or Unrelated."""


def render_prompt(doc_text: str, question: str, answer: str) -> str:
    return PROMPT_TEMPLATE.format(document=doc_text, question=question, answer=answer)


def parse_verdict(response: str) -> Verdict:
    """Exact label match after trimming; anything else is an error."""
    cleaned = response.strip().rstrip(".")
    for verdict in Verdict:
        if cleaned == verdict.value:
            return verdict
    raise JudgeError(f"unparseable judge response: {response!r}")


def keyword_match(pool: Pool, qa: QAItem) -> list[Document]:
    """Documents containing every keyword as a case-insensitive whole word.

    Whole-word means regex word boundaries, so "pulsar" does not match
    inside "pulsars".  Pool order is preserved.
    """
    patterns = [re.compile(rf"\b{re.escape(kw)}\b") for kw in qa.keywords]
    matched = []
    for doc in pool.documents:
        lowered = doc.text.lower()
        if all(p.search(lowered) for p in patterns):
            matched.append(doc)
    return matched


@dataclass
class JudgeClient:
    """Judge backend reachable over HTTP, or any classify callable."""

    endpoint: str = ""
    model_name: str = "judge"
    timeout: float = 30.0
    max_concurrency: int = 4
    max_attempts: int = 3
    backoff_base: float = 1.0
    classify: Callable[[str, str, str], Verdict] | None = None

    def __post_init__(self) -> None:
        if self.classify is None:
            if not self.endpoint:
                raise ValidationError("JudgeClient needs an endpoint or a classify callable")
            self.classify = self._classify_http

    def _classify_http(self, doc_text: str, question: str, answer: str) -> Verdict:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get("JUDGE_API_KEY")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.model_name,
            "messages": [{"role": "user", "content": render_prompt(doc_text, question, answer)}],
        }
        response = requests.post(
            self.endpoint, json=payload, headers=headers, timeout=self.timeout
        )
        response.raise_for_status()
        body = response.json()
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise JudgeError(f"malformed judge payload: {body!r}") from exc
        return parse_verdict(content)


def mock_judge_client(
    classify: Callable[[str, str, str], Verdict] | None = None,
    default: Verdict = Verdict.UNRELATED,
    max_concurrency: int = 4,
) -> JudgeClient:
    """In-process judge for tests and offline runs; no network involved."""
    fn = classify if classify is not None else (lambda doc, q, a: default)
    return JudgeClient(
        endpoint="mock://",
        model_name="mock",
        max_concurrency=max_concurrency,
        backoff_base=0.0,
        classify=fn,
    )


def judge_documents(docs: Sequence[Document], qa: QAItem, client: JudgeClient) -> JudgeRun:
    """Judge every document, bounding concurrency and isolating failures.

    Each document gets up to ``client.max_attempts`` tries with
    exponential backoff; a document whose attempts are exhausted becomes
    a failure entry while the rest of the batch proceeds.
    """

    def judge_one(doc: Document) -> Judgement | JudgeFailure:
        last_error = "no attempts made"
        for attempt in range(client.max_attempts):
            try:
                verdict = client.classify(doc.text, qa.question, qa.answer)
                if not isinstance(verdict, Verdict):
                    verdict = parse_verdict(str(verdict))
                return Judgement(
                    doc_id=doc.id, qa_id=qa.qa_id, verdict=verdict, raw_response=verdict.value
                )
            except Exception as exc:  # transport or parse failure; retry
                last_error = f"{type(exc).__name__}: {exc}"
                if attempt + 1 < client.max_attempts and client.backoff_base > 0:
                    time.sleep(client.backoff_base * 2**attempt)
        return JudgeFailure(doc_id=doc.id, qa_id=qa.qa_id, error=last_error)

    if not docs:
        return JudgeRun(judgements=[], failures=[])
    workers = max(1, client.max_concurrency)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(judge_one, docs))
    else:
        results = [judge_one(doc) for doc in docs]
    run = JudgeRun(judgements=[], failures=[])
    for result in results:
        if isinstance(result, Judgement):
            run.judgements.append(result)
        else:
            run.failures.append(result)
    return run


def aggregate_judgements(
    judgements: Sequence[Judgement], qa_items: Sequence[QAItem]
) -> list[dict[str, object]]:
    """Per-subject mean verdict counts over that subject's QA items.

    Returns CSV-ready rows with columns subject, Support, Refute,
    Related, Unrelated; subjects with no judgements get all-zero rows.
    """
    by_qa: dict[str, dict[Verdict, int]] = {}
    for j in judgements:
        counts = by_qa.setdefault(j.qa_id, {v: 0 for v in Verdict})
        counts[j.verdict] += 1

    rows = []
    subjects: dict[str, list[QAItem]] = {}
    for item in qa_items:
        subjects.setdefault(item.subject, []).append(item)
    for subject in sorted(subjects):
        items = subjects[subject]
        means = {}
        for verdict in Verdict:
            total = sum(by_qa.get(item.qa_id, {}).get(verdict, 0) for item in items)
            means[verdict.value] = total / len(items)
        rows.append({"subject": subject, **means})
    return rows


# ---------------------------------------------------------------------------
# JSONL I/O.
# ---------------------------------------------------------------------------


def read_qa_items(path: str | Path) -> list[QAItem]:
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                items.append(
                    QAItem(
                        subject=obj["subject"],
                        question=obj["question"],
                        answer=obj["answer"],
                        keywords=tuple(obj["keywords"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValidationError) as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    return items


def write_judgements(path: str | Path, run: JudgeRun) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for j in run.judgements:
            fh.write(
                json.dumps(
                    {
                        "doc_id": j.doc_id,
                        "qa_id": j.qa_id,
                        "verdict": j.verdict.value,
                        "raw_response": j.raw_response,
                    }
                )
                + "\n"
            )
        for f in run.failures:
            fh.write(
                json.dumps({"doc_id": f.doc_id, "qa_id": f.qa_id, "error": f.error}) + "\n"
            )
