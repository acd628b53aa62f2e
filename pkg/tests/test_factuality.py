import json

import pytest

from poollab import (
    JudgeClient,
    Pool,
    QAItem,
    ValidationError,
    Verdict,
    aggregate_judgements,
    judge_documents,
    keyword_match,
    make_document,
    mock_judge_client,
)
from poollab.errors import JudgeError
from poollab.factuality import Judgement, parse_verdict, read_qa_items, render_prompt


def pool_of(*texts):
    return Pool(documents=[make_document(f"d{i}", t) for i, t in enumerate(texts)])


QA = QAItem(
    subject="astronomy",
    question="What is a pulsar?",
    answer="A rotating neutron star",
    keywords=("pulsar",),
)


class TestKeywordMatch:
    def test_whole_word_hit(self):
        matched = keyword_match(pool_of("The pulsar spins."), QA)
        assert [d.id for d in matched] == ["d0"]

    def test_plural_is_not_a_match(self):
        assert keyword_match(pool_of("pulsars everywhere"), QA) == []

    def test_empty_pool(self):
        assert keyword_match(Pool(documents=[]), QA) == []

    def test_all_keywords_required(self):
        qa = QAItem(
            subject="astronomy",
            question="q",
            answer="a",
            keywords=("pulsar", "neutron"),
        )
        pool = pool_of("a pulsar", "a neutron pulsar", "a neutron")
        assert [d.id for d in keyword_match(pool, qa)] == ["d1"]

    def test_case_insensitive(self):
        assert len(keyword_match(pool_of("PULSAR timing array"), QA)) == 1

    def test_adding_keyword_never_enlarges(self):
        pool = pool_of("pulsar neutron star", "pulsar alone", "nothing here")
        base = {d.id for d in keyword_match(pool, QA)}
        narrowed = QAItem(
            subject=QA.subject, question=QA.question, answer=QA.answer,
            keywords=("pulsar", "neutron"),
        )
        assert {d.id for d in keyword_match(pool, narrowed)} <= base

    def test_keywords_must_be_lowercase(self):
        with pytest.raises(ValidationError):
            QAItem(subject="s", question="q", answer="a", keywords=("Pulsar",))


class TestParseVerdict:
    @pytest.mark.parametrize("raw,expected", [
        ("Support", Verdict.SUPPORT),
        (" Refute \n", Verdict.REFUTE),
        ("Related.", Verdict.RELATED),
        ("Unrelated", Verdict.UNRELATED),
    ])
    def test_accepts_exact_labels(self, raw, expected):
        assert parse_verdict(raw) == expected

    @pytest.mark.parametrize("raw", ["supports", "REFUTE!", "maybe related", ""])
    def test_rejects_everything_else(self, raw):
        with pytest.raises(JudgeError):
            parse_verdict(raw)

    def test_prompt_has_slots_and_labels(self):
        prompt = render_prompt("doc text", "the question", "the answer")
        assert "doc text" in prompt and "the question" in prompt
        for verdict in Verdict:
            assert verdict.value in prompt


class TestJudgeDocuments:
    def test_constant_mock(self):
        docs = pool_of("pulsar one", "pulsar two").documents
        run = judge_documents(docs, QA, mock_judge_client())
        assert [j.verdict for j in run.judgements] == [Verdict.UNRELATED] * 2
        assert run.failures == []

    def test_zero_documents(self):
        run = judge_documents([], QA, mock_judge_client())
        assert run.judgements == [] and run.failures == []

    def test_fault_isolation(self):
        def flaky(doc, question, answer):
            if "poison" in doc:
                raise ConnectionError("socket closed")
            return Verdict.SUPPORT

        docs = pool_of("fine pulsar", "poison pulsar", "fine pulsar again").documents
        run = judge_documents(docs, QA, mock_judge_client(flaky))
        assert {j.doc_id for j in run.judgements} == {"d0", "d2"}
        assert [f.doc_id for f in run.failures] == ["d1"]
        assert "socket closed" in run.failures[0].error

    def test_no_document_lost(self):
        def flaky(doc, question, answer):
            if len(doc) % 2 == 0:
                raise TimeoutError("slow judge")
            return Verdict.RELATED

        docs = pool_of(*[f"pulsar doc {i} {'x' * i}" for i in range(20)]).documents
        run = judge_documents(docs, QA, mock_judge_client(flaky, max_concurrency=8))
        seen = {j.doc_id for j in run.judgements} | {f.doc_id for f in run.failures}
        assert seen == {d.id for d in docs}

    def test_retry_then_success(self):
        calls = {}

        def eventually(doc, question, answer):
            calls[doc] = calls.get(doc, 0) + 1
            if calls[doc] < 3:
                raise ConnectionError("transient")
            return Verdict.REFUTE

        docs = pool_of("pulsar claim").documents
        run = judge_documents(docs, QA, mock_judge_client(eventually, max_concurrency=1))
        assert [j.verdict for j in run.judgements] == [Verdict.REFUTE]
        assert calls["pulsar claim"] == 3

    def test_malformed_response_never_coerced(self):
        def garbage(doc, question, answer):
            return "definitely supports"  # not a valid label

        docs = pool_of("pulsar").documents
        run = judge_documents(docs, QA, mock_judge_client(garbage))
        assert run.judgements == []
        assert len(run.failures) == 1 and "unparseable" in run.failures[0].error


class TestHttpClient:
    def make_response(self, payload, status=200):
        class FakeResponse:
            status_code = status

            def raise_for_status(self):
                if status >= 400:
                    raise RuntimeError(f"http {status}")

            def json(self):
                return payload

        return FakeResponse()

    def test_chat_shape_parsed(self, monkeypatch):
        payload = {"choices": [{"message": {"content": "Support"}}]}
        monkeypatch.setattr(
            "poollab.factuality.requests.post",
            lambda *a, **k: self.make_response(payload),
        )
        client = JudgeClient(endpoint="http://judge.local/v1/chat", backoff_base=0.0)
        docs = pool_of("pulsar fact").documents
        run = judge_documents(docs, QA, client)
        assert [j.verdict for j in run.judgements] == [Verdict.SUPPORT]

    def test_malformed_payload_is_failure(self, monkeypatch):
        monkeypatch.setattr(
            "poollab.factuality.requests.post",
            lambda *a, **k: self.make_response({"unexpected": True}),
        )
        client = JudgeClient(endpoint="http://judge.local/v1/chat", backoff_base=0.0)
        run = judge_documents(pool_of("pulsar").documents, QA, client)
        assert run.judgements == [] and len(run.failures) == 1

    def test_api_key_header(self, monkeypatch):
        captured = {}

        def capture(url, json=None, headers=None, timeout=None):
            captured.update(headers or {})
            return self.make_response({"choices": [{"message": {"content": "Related"}}]})

        monkeypatch.setattr("poollab.factuality.requests.post", capture)
        monkeypatch.setenv("JUDGE_API_KEY", "sekrit")
        client = JudgeClient(endpoint="http://judge.local/v1/chat", backoff_base=0.0)
        judge_documents(pool_of("pulsar").documents, QA, client)
        assert captured.get("Authorization") == "Bearer sekrit"


class TestAggregation:
    def j(self, qa, verdict, doc_id="d0"):
        return Judgement(doc_id=doc_id, qa_id=qa.qa_id, verdict=verdict, raw_response=verdict.value)

    def test_counting_example(self):
        judgements = [
            self.j(QA, Verdict.SUPPORT, "d0"),
            self.j(QA, Verdict.SUPPORT, "d1"),
            self.j(QA, Verdict.REFUTE, "d2"),
        ]
        rows = aggregate_judgements(judgements, [QA])
        assert rows == [
            {
                "subject": "astronomy",
                "Support": 2.0,
                "Refute": 1.0,
                "Related": 0.0,
                "Unrelated": 0.0,
            }
        ]

    def test_no_judgements_all_zero(self):
        rows = aggregate_judgements([], [QA])
        assert rows[0]["Support"] == 0.0 and rows[0]["Unrelated"] == 0.0

    def test_mean_over_subject_items(self):
        qa2 = QAItem(subject="astronomy", question="Another?", answer="a", keywords=("star",))
        judgements = [
            self.j(QA, Verdict.SUPPORT, "d0"),
            self.j(QA, Verdict.SUPPORT, "d1"),
            self.j(qa2, Verdict.SUPPORT, "d2"),
        ]
        rows = aggregate_judgements(judgements, [QA, qa2])
        assert rows[0]["Support"] == 1.5  # (2 + 1) / 2 items

    def test_counts_partition_successes(self):
        judgements = [
            self.j(QA, v, f"d{i}")
            for i, v in enumerate(
                [Verdict.SUPPORT, Verdict.RELATED, Verdict.RELATED, Verdict.UNRELATED]
            )
        ]
        rows = aggregate_judgements(judgements, [QA])
        total = sum(rows[0][v.value] for v in Verdict)
        assert total == len(judgements)

    def test_column_schema_matches_reference_table(self):
        rows = aggregate_judgements([], [QA])
        assert list(rows[0]) == ["subject", "Support", "Refute", "Related", "Unrelated"]


class TestQaIo:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        path.write_text(
            json.dumps(
                {
                    "subject": "astronomy",
                    "question": "What is a pulsar?",
                    "answer": "A rotating neutron star",
                    "keywords": ["pulsar"],
                }
            )
            + "\n",
            encoding="utf-8",
        )
        items = read_qa_items(path)
        assert items == [QA]

    def test_bad_line_reports_lineno(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        path.write_text('{"subject": "s"}\n', encoding="utf-8")
        with pytest.raises(ValidationError, match="line 1"):
            read_qa_items(path)
