"""Tests for the rule-based acronym and long-form identifier."""

import pytest

from acrotag.corpus import (
    Dataset,
    GeneratorConfig,
    Sample,
    Span,
    bio_decode,
    gen_synthetic,
)
from acrotag.evalmetrics import score
from acrotag.rulebase import RuleConfig, is_short_form, rule_identify, rule_predict


def sample_of(*tokens):
    return Sample(id="s", tokens=tuple(tokens))


class TestRuleConfig:
    def test_defaults(self):
        config = RuleConfig()
        assert (config.min_acronym_len, config.max_acronym_len) == (2, 10)
        assert config.min_uppercase_fraction == 0.6
        assert config.window_for("LNL") == 8
        assert config.window_for("AB") == 6

    def test_fixed_window_override(self):
        assert RuleConfig(max_longform_window=4).window_for("LONGACR") == 4

    def test_validation(self):
        with pytest.raises(ValueError):
            RuleConfig(min_acronym_len=0)
        with pytest.raises(ValueError):
            RuleConfig(min_acronym_len=5, max_acronym_len=4)
        with pytest.raises(ValueError):
            RuleConfig(max_longform_window=0)
        with pytest.raises(ValueError):
            RuleConfig(min_uppercase_fraction=0.0)


class TestShortFormDetection:
    def test_accepts_upper_tokens(self):
        config = RuleConfig()
        assert is_short_form("LNL", config)
        assert is_short_form("CNNs", config)  # 3 of 4 uppercase
        assert is_short_form("AB", config)

    def test_rejects_by_fraction(self):
        config = RuleConfig()
        assert not is_short_form("and/or", config)
        assert not is_short_form("Ab", config)        # 0.5 < 0.6
        assert not is_short_form("labels", config)

    def test_rejects_by_length(self):
        config = RuleConfig()
        assert not is_short_form("A", config)
        assert not is_short_form("ABCDEFGHIJK", config)  # 11 > 10


class TestRuleIdentify:
    def test_reference_sentence_trace(self):
        sentence = sample_of("Existing", "methods", "for", "learning", "with",
                             "noisy", "labels", "(", "LNL", ")", "primarily",
                             "take", "a", "loss", "correction", "approach", ".")
        # L <- learning, N <- noisy, L <- labels, "with" skipped
        assert rule_identify(sentence) == [Span(3, 7, "long"), Span(8, 9, "short")]

    def test_plain_sentence_yields_nothing(self):
        assert rule_identify(sample_of("plain", "words", "only", ".")) == []

    def test_standalone_acronym_short_only(self):
        spans = rule_identify(sample_of("we", "apply", "LNL", "here", "."))
        assert spans == [Span(2, 3, "short")]

    def test_internal_first_letter_is_rejected(self):
        # acronym starts with a character internal to the first word, so the
        # leftmost match cannot use an initial and no long span is emitted
        spans = rule_identify(sample_of("earning", "noisy", "labels", "(", "ANL", ")"))
        assert spans == [Span(4, 5, "short")]

    def test_window_bounds_the_scan(self):
        tokens = ["alpha", "beta"] + ["zzz"] * 6 + ["(", "AB", ")"]
        # window for a 2-letter acronym is 6 tokens: the fillers exhaust it
        assert rule_identify(Sample(id="s", tokens=tuple(tokens))) == [Span(9, 10, "short")]
        # a wider window reaches the definition
        wide = rule_identify(Sample(id="s", tokens=tuple(tokens)),
                             RuleConfig(max_longform_window=8))
        assert Span(0, 8, "long") in wide

    def test_scan_stops_at_other_parenthesis(self):
        spans = rule_identify(sample_of("(", "AB", ")", "(", "CD", ")"))
        assert spans == [Span(1, 2, "short"), Span(4, 5, "short")]

    def test_long_form_swallows_standalone_candidate(self):
        # "ABC" sits inside the matched definition, so only the long span
        # plus the parenthesized short survive
        spans = rule_identify(sample_of("the", "ABC", "method", "(", "AM", ")"))
        assert spans == [Span(1, 3, "long"), Span(4, 5, "short")]

    def test_spans_disjoint_sorted_in_bounds(self):
        ds = gen_synthetic(GeneratorConfig(count=200), seed=31)
        for sample in ds:
            spans = rule_identify(sample)
            assert spans == sorted(spans)
            for sp in spans:
                assert 0 <= sp.start < sp.end <= len(sample.tokens)
            for a, b in zip(spans, spans[1:]):
                assert a.end <= b.start

    def test_pure_function(self):
        ds = gen_synthetic(GeneratorConfig(count=20), seed=32)
        for sample in ds:
            assert rule_identify(sample) == rule_identify(sample)


class TestCorpusLevelBehavior:
    def test_standard_only_long_recall_is_one(self):
        gold = gen_synthetic(GeneratorConfig(count=300, standard_fraction=1.0,
                                             nonstandard_fraction=0.0), seed=41)
        pred = rule_predict(gold)
        report = score(gold, Dataset(samples=pred.samples, role="dev"))
        assert report.long.recall == 1.0
        assert report.short.recall == 1.0

    def test_mixed_long_precision_at_least_recall(self):
        gold = gen_synthetic(GeneratorConfig(count=400), seed=42)
        pred = rule_predict(gold)
        report = score(gold, Dataset(samples=pred.samples, role="dev"))
        assert report.long.precision >= report.long.recall
        assert report.long.recall < 1.0  # non-standard forms stay unmatched

    def test_nonstandard_short_found_long_absent(self):
        gold = gen_synthetic(GeneratorConfig(count=120, standard_fraction=0.0,
                                             nonstandard_fraction=1.0), seed=43)
        for sample in gold:
            gold_spans = bio_decode(sample.labels)
            got = rule_identify(sample)
            assert all(sp.kind == "short" for sp in got)
            gold_short = next(sp for sp in gold_spans if sp.kind == "short")
            assert gold_short in got

    def test_rule_predict_emits_labeled_dataset(self):
        gold = gen_synthetic(GeneratorConfig(count=15), seed=44)
        pred = rule_predict(gold)
        assert len(pred) == len(gold)
        for before, after in zip(gold, pred):
            assert after.id == before.id
            assert after.tokens == before.tokens
            assert after.labels is not None
            assert len(after.labels) == len(after.tokens)
