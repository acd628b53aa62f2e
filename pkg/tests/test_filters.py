import math
import re

import pytest
from hypothesis import given, settings, strategies as st

from poollab import (
    ConfigError,
    DocumentScorer,
    FilterConfig,
    FilterStats,
    Pool,
    builtin_english_scorer,
    build_stages,
    english_filter,
    exact_dedup,
    make_document,
    profile,
    quality_filter,
    repetition_filter,
    repetition_fractions,
    run_pipeline,
    stopword_filter,
)
from poollab.filters import GOPHER_REPETITION_THRESHOLDS, REPETITION_GRANULARITIES


def doc(text, doc_id="d0"):
    return make_document(doc_id, text)


# ---------------------------------------------------------------------------
# Brute-force oracle for the n-gram coverage fractions: enumerate every
# occurrence and mark individual character positions in a set.
# ---------------------------------------------------------------------------


def oracle_ngram_fractions(text: str, n: int) -> tuple[float, float]:
    """(top fraction, duplicated fraction) for word n-grams of size n."""
    spans = [(m.start(), m.end()) for m in re.finditer(r"\S+", text)]
    words = [text[s:e] for s, e in spans]
    if len(words) < n or not text:
        return 0.0, 0.0
    occurrences = {}
    for i in range(len(words) - n + 1):
        gram = tuple(words[i : i + n])
        occurrences.setdefault(gram, []).append(range(spans[i][0], spans[i + n - 1][1]))

    def coverage(ranges) -> float:
        positions = set()
        for r in ranges:
            positions.update(r)
        return len(positions) / len(text)

    top_count = max(len(v) for v in occurrences.values())
    top = max(coverage(v) for v in occurrences.values() if len(v) == top_count)
    duplicated = coverage(
        [r for v in occurrences.values() if len(v) >= 2 for r in v]
    )
    return top, duplicated


class TestStopwordFilter:
    def test_hand_count_kept(self):
        # the x2 + and x1 = 3 >= 2
        out = stopword_filter(doc("the cat and the hat"), FilterConfig())
        assert out.kept and out.scores["stopword_count"] == 3.0

    def test_empty_dropped(self):
        out = stopword_filter(doc(""), FilterConfig())
        assert not out.kept and out.failed_rules == ("stopword",)

    def test_no_list_words_dropped(self):
        assert not stopword_filter(doc("zebra quantum flux"), FilterConfig()).kept

    def test_case_insensitive_whole_word(self):
        assert stopword_filter(doc("The THE"), FilterConfig()).kept
        # "them"/"theory" must not count as "the"
        assert not stopword_filter(doc("them theory others"), FilterConfig()).kept

    def test_total_versus_distinct_switch(self):
        repeated = doc("the the the")
        assert stopword_filter(repeated, FilterConfig()).kept
        assert not stopword_filter(repeated, FilterConfig(stopword_distinct=True)).kept

    def test_empty_list_rejected(self):
        with pytest.raises(ConfigError):
            stopword_filter(doc("x"), FilterConfig(stopword_list=()))


class TestRepetitionFractions:
    def test_identical_lines(self):
        fractions = repetition_fractions(doc("a\na\na"))
        assert fractions["duplicate_line"] == pytest.approx(2 / 3)

    def test_distinct_lines(self):
        assert repetition_fractions(doc("a\nb\nc"))["duplicate_line"] == 0.0

    def test_duplicate_paragraphs(self):
        fractions = repetition_fractions(doc("para one\n\npara one\n\npara two"))
        assert fractions["duplicate_paragraph"] == pytest.approx(1 / 3)

    def test_top_2gram_hand_example(self):
        # "a b a b": the top 2-gram "a b" covers chars 0..2 and 4..6 of 7.
        fractions = repetition_fractions(doc("a b a b"))
        top, dup = oracle_ngram_fractions("a b a b", 2)
        assert fractions["top_2gram"] == pytest.approx(top)
        assert fractions["top_2gram"] == pytest.approx(6 / 7)
        assert fractions["dup_5gram"] == 0.0
        assert dup == pytest.approx(6 / 7)

    def test_empty_doc_all_zero(self):
        fractions = repetition_fractions(doc(""))
        assert set(fractions) == set(REPETITION_GRANULARITIES)
        assert all(v == 0.0 for v in fractions.values())

    def test_matches_bruteforce_oracle_on_varied_texts(self):
        texts = [
            "one two three one two three one two",
            "spam spam spam spam spam spam spam spam spam",
            "the quick brown fox jumps over the lazy dog again and again and again",
            "x " * 30,
            "alpha beta gamma delta epsilon zeta eta theta iota kappa " * 3,
        ]
        for text in texts:
            fractions = repetition_fractions(doc(text))
            for n in range(2, 5):
                top, _ = oracle_ngram_fractions(text, n)
                assert fractions[f"top_{n}gram"] == pytest.approx(top), (text, n)
            for n in range(5, 11):
                _, dup = oracle_ngram_fractions(text, n)
                assert fractions[f"dup_{n}gram"] == pytest.approx(dup), (text, n)

    @given(st.text(alphabet="ab \n", max_size=120))
    @settings(max_examples=120, deadline=None)
    def test_fractions_bounded(self, text):
        fractions = repetition_fractions(doc(text))
        assert set(fractions) == set(REPETITION_GRANULARITIES)
        for value in fractions.values():
            assert 0.0 <= value <= 1.0


class TestRepetitionFilter:
    def test_zero_fractions_kept(self):
        # a single word has no n-grams and no duplicate segments
        out = repetition_filter(doc("hello"), FilterConfig())
        assert out.kept
        assert all(v == 0.0 for v in out.scores.values())

    def test_varied_text_passes_default_thresholds(self):
        words = [f"unique{i:02d}" for i in range(60)]
        assert repetition_filter(doc(" ".join(words)), FilterConfig()).kept

    def test_duplicate_lines_dropped_and_named(self):
        out = repetition_filter(doc("a\na\na"), FilterConfig())
        assert not out.kept
        assert "duplicate_line" in out.failed_rules

    def test_boundary_equal_is_kept(self):
        # isolate duplicate_line: every other rule is vacuous at 1.0
        cfg = profile("permissive")
        cfg.repetition_thresholds["duplicate_line"] = 0.5
        assert repetition_fractions(doc("same\nsame"))["duplicate_line"] == 0.5
        assert repetition_filter(doc("same\nsame"), cfg).kept
        cfg.repetition_thresholds["duplicate_line"] = 0.49
        assert not repetition_filter(doc("same\nsame"), cfg).kept

    def test_missing_threshold_is_config_error(self):
        cfg = FilterConfig()
        del cfg.repetition_thresholds["dup_7gram"]
        with pytest.raises(ConfigError, match="dup_7gram"):
            repetition_filter(doc("a b"), cfg)


class TestEnglishFilter:
    def test_all_stopwords_scores_high(self):
        out = english_filter(doc("the of and that have"), builtin_english_scorer(), 0.5)
        assert out.scores["english"] >= 0.9
        assert out.kept

    def test_gibberish_scores_zero(self):
        out = english_filter(doc("xqzv bnlp wrtk"), builtin_english_scorer(), 0.1)
        assert out.scores["english"] == 0.0
        assert not out.kept

    def test_zero_threshold_keeps_everything(self):
        assert english_filter(doc("xqzv"), builtin_english_scorer(), 0.0).kept
        assert english_filter(doc(""), builtin_english_scorer(), 0.0).kept

    def test_punctuation_stripped_for_lookup(self):
        out = english_filter(doc("The cat, quite often, sat."), builtin_english_scorer(), 0.5)
        assert out.scores["english"] == 1.0

    @given(st.lists(st.sampled_from("the of and xqzv bnlp wrtk".split()), min_size=1, max_size=20))
    @settings(max_examples=60, deadline=None)
    def test_threshold_monotonicity(self, words):
        d = doc(" ".join(words))
        scorer = builtin_english_scorer()
        kept = [english_filter(d, scorer, t).kept for t in (0.0, 0.3, 0.6, 0.9)]
        # once dropped at some threshold, stays dropped at higher ones
        assert kept == sorted(kept, reverse=True)


class TestDedupAndQuality:
    def test_exact_duplicates_collapse(self):
        pool = Pool(documents=[doc("same text", "a"), doc("same text", "b")])
        assert [d.id for d in exact_dedup(pool).documents] == ["a"]

    def test_distinct_pool_unchanged(self):
        pool = Pool(documents=[doc("one", "a"), doc("two", "b")])
        assert exact_dedup(pool).documents == pool.documents

    def test_outer_whitespace_normalized(self):
        pool = Pool(documents=[doc("text\n", "a"), doc("text", "b")])
        assert [d.id for d in exact_dedup(pool).documents] == ["a"]

    def test_quality_identity_at_one(self, small_pool):
        out = quality_filter(small_pool, builtin_english_scorer(), 1.0)
        assert out.documents == small_pool.documents

    def test_quality_top_k_by_score(self):
        scores = {f"d{i}": i / 10 for i in range(10)}
        scorer = DocumentScorer("table", lambda text: scores[text])
        pool = Pool(documents=[doc(f"d{i}", doc_id=f"d{i}") for i in range(10)])
        out = quality_filter(pool, scorer, 0.2)
        assert sorted(d.id for d in out.documents) == ["d8", "d9"]

    def test_quality_tie_break_lower_id(self):
        scorer = DocumentScorer("const", lambda text: 0.5)
        pool = Pool(documents=[doc("t", "b"), doc("t2", "a"), doc("t3", "c")])
        out = quality_filter(pool, scorer, 1 / 3)
        assert [d.id for d in out.documents] == ["a"]

    def test_quality_size_is_ceil(self, small_pool):
        out = quality_filter(small_pool, builtin_english_scorer(), 0.26)
        assert len(out) == math.ceil(0.26 * len(small_pool))

    def test_quality_preserves_order(self):
        scores = {"x1": 0.9, "x2": 0.1, "x3": 0.8}
        scorer = DocumentScorer("table", lambda text: scores[text])
        pool = Pool(documents=[doc("x1", "x1"), doc("x2", "x2"), doc("x3", "x3")])
        out = quality_filter(pool, scorer, 2 / 3)
        assert [d.id for d in out.documents] == ["x1", "x3"]

    def test_quality_empty_pool(self):
        out = quality_filter(Pool(documents=[]), builtin_english_scorer(), 0.5)
        assert len(out) == 0


class TestPipeline:
    def test_all_pass_stopword_stage(self):
        docs = [doc(f"the cat and the hat {i}", f"d{i}") for i in range(5)]
        pool = Pool(documents=docs)
        result = run_pipeline(pool, build_stages(["stopword"], FilterConfig()))
        assert result.cumulative.retention_docs == 1.0

    def test_vacuous_stages_are_identity(self, small_pool):
        cfg = profile("permissive")
        result = run_pipeline(small_pool, build_stages(["english", "repetition"], cfg))
        assert result.pool.documents == small_pool.documents
        assert result.cumulative.retention_tokens == 1.0

    def test_composition_prefix_bound(self):
        texts = [
            "the cat and the hat sat",
            "xqzv bnlp",
            "spam spam spam spam spam spam",
            "a fine day to walk in the park",
            "b\nb\nb\nb",
        ]
        pool = Pool(documents=[doc(t, f"d{i}") for i, t in enumerate(texts)])
        stages = build_stages(["english", "repetition", "stopword"], FilterConfig())
        result = run_pipeline(pool, stages)
        kept_so_far = pool.total_tokens
        for _, stats in result.per_stage:
            assert stats.tokens_kept <= kept_so_far
            kept_so_far = stats.tokens_kept

    def test_stage_order_recorded(self, small_pool):
        stages = build_stages(["stopword", "english"], profile("permissive"))
        result = run_pipeline(small_pool, stages)
        assert result.stage_order == ["stopword", "english"]

    def test_threads_do_not_change_outcome(self):
        texts = ["the cat and the hat"] * 3 + ["zzz qqq"] * 3 + ["a\na\na\na"] * 2
        pool = Pool(documents=[doc(t, f"d{i}") for i, t in enumerate(texts)])
        stages = lambda: build_stages(["english", "repetition", "stopword"], FilterConfig())
        seq = run_pipeline(pool, stages(), threads=1)
        par = run_pipeline(pool, stages(), threads=4)
        assert [d.id for d in seq.pool.documents] == [d.id for d in par.pool.documents]
        assert seq.stats_rows() == par.stats_rows()

    def test_empty_stage_list_rejected(self, small_pool):
        with pytest.raises(ConfigError):
            run_pipeline(small_pool, [])

    def test_stats_rows_schema(self, small_pool):
        result = run_pipeline(small_pool, build_stages(["stopword"], FilterConfig()))
        rows = result.stats_rows()
        assert [r["stage"] for r in rows] == ["stopword", "cumulative"]
        assert set(rows[0]) == {
            "stage",
            "docs_in",
            "docs_kept",
            "tokens_in",
            "tokens_kept",
            "retention_docs",
            "retention_tokens",
        }


class TestConfig:
    def test_profiles_cover_all_granularities(self):
        for name in ("gopher", "permissive"):
            cfg = profile(name)
            assert set(cfg.repetition_thresholds) == set(REPETITION_GRANULARITIES)

    def test_profile_copies_are_independent(self):
        a = profile("gopher")
        a.repetition_thresholds["duplicate_line"] = 0.0
        assert profile("gopher").repetition_thresholds["duplicate_line"] == \
            GOPHER_REPETITION_THRESHOLDS["duplicate_line"]

    def test_unknown_profile(self):
        with pytest.raises(ConfigError):
            profile("nope")

    def test_threshold_bounds_checked(self):
        with pytest.raises(ConfigError):
            FilterConfig(english_threshold=1.5)
        with pytest.raises(ConfigError):
            FilterConfig(quality_keep_fraction=0.0)

    def test_stats_retention_math(self):
        stats = FilterStats(docs_in=4, docs_kept=1, tokens_in=40, tokens_kept=9)
        assert stats.retention_docs == 0.25
        assert stats.retention_tokens == pytest.approx(0.225)
