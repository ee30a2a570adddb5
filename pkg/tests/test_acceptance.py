"""Acceptance suite: one test per shipping criterion, in order.

Every criterion is asserted at its stated tolerance and ends with a single
PASS line carrying the measured values (visible under -v with -s, or in
the captured-output section).  Training runs are cached and shared: the
trainability run is one of the adversarial-comparison baselines, and the
corpus-1 ensemble members reuse four of those baselines.
"""

import json
import math
import random
import time
from functools import cache
from statistics import mean

import numpy as np

from acrotag.advtrain import TrainConfig, fgm_perturbation, report_to_dict, train
from acrotag.autodiff import Tape, grad_check
from acrotag.corpus import (
    TAGS,
    Dataset,
    GeneratorConfig,
    Sample,
    Span,
    Tag,
    bio_decode,
    bio_encode,
    gen_synthetic,
)
from acrotag.ensemble import EnsembleSet, ensemble_predict
from acrotag.evalmetrics import brute_force_score, score
from acrotag.rulebase import rule_predict
from acrotag.tagger import (
    TaggerConfig,
    build_vocab,
    forward,
    init_params,
    make_leaves,
    one_hot_labels,
    predict_labels,
    save_weights,
    sequence_loss,
)


def tags(*names):
    return tuple(Tag.parse(n) for n in names)


CASE_TOKENS = ("this", "study", "were", "convolutional", "and/or", "recurrent",
               "neural", "nets", "(", "CNNs", ",", "RNNs", ",", "or", "CRNNs", ")", ",")
CASE_GOLD = tags("O", "O", "O", "B-long", "I-long", "I-long", "I-long", "I-long",
                 "O", "B-short", "O", "B-short", "O", "O", "B-short", "O", "O")
CASE_WITHOUT_AT = tags("O", "O", "O", "O", "O", "B-long", "I-long", "I-long",
                       "O", "B-short", "O", "B-short", "O", "O", "B-short", "O", "O")
CASE_WITH_AT = CASE_GOLD


@cache
def corpus(corpus_seed: int):
    """Default-sized synthetic corpus: 2000 train / 400 dev."""
    train_ds = gen_synthetic(GeneratorConfig(count=2000), seed=corpus_seed, role="train")
    dev_ds = gen_synthetic(GeneratorConfig(count=400), seed=corpus_seed + 1, role="dev")
    return train_ds, dev_ds


@cache
def trained(corpus_seed: int, train_seed: int, adversarial: bool):
    train_ds, dev_ds = corpus(corpus_seed)
    config = TrainConfig(seed=train_seed, adversarial=adversarial)
    return train(train_ds, dev_ds, train_config=config)


def best_f1(report) -> float:
    return report.epoch_dev_f1[report.best_dev_epoch - 1]


def test_criterion_01_gradient_correctness():
    start = time.monotonic()
    tokens = ("the", "framework", "(", "TF", ")", "handles", "long", "phrases")
    labels = tags("B-long", "I-long", "O", "B-short", "O", "O", "O", "O")
    sample = Sample(id="GC-0", tokens=tokens, labels=labels)
    vocab = build_vocab(Dataset(samples=(sample,), role="train"))
    config = TaggerConfig(vocab_size=vocab.size, embed_dim=16, num_blocks=2,
                          max_seq_len=8, seed=0)
    params = init_params(config, vocab)
    ids = vocab.encode(tokens)
    one_hot = one_hot_labels(labels)
    names = list(params.arrays)

    def build_params(tape, nodes):
        loss, _ = sequence_loss(tape, dict(zip(names, nodes)), config, ids, one_hot)
        return loss

    worst_params = grad_check(build_params, [params.arrays[n] for n in names])

    embedding = forward(params, ids, Tape()).embedding.value

    def build_embed(tape, nodes):
        loss, _ = sequence_loss(tape, make_leaves(tape, params), config, None,
                                one_hot, embed_override=nodes[0])
        return loss

    worst_embed = grad_check(build_embed, [embedding])
    elapsed = time.monotonic() - start
    worst = max(worst_params, worst_embed)
    assert worst < 1e-4
    assert elapsed < 30.0
    print(f"criterion 1: PASS (max rel err {worst:.3e} over "
          f"{len(names)} param leaves + embedding, {elapsed:.1f}s)")


def test_criterion_02_fgm_invariants():
    rng = np.random.default_rng(2)
    epsilons = (0.5, 1.0, 3.0)
    for i in range(1000):
        shape = (int(rng.integers(1, 7)), int(rng.integers(1, 9)))
        g = rng.normal(size=shape) * 10.0 ** int(rng.integers(-6, 7))
        eps = epsilons[i % len(epsilons)]
        r = fgm_perturbation(g, eps)
        assert abs(float(np.linalg.norm(r)) - eps) < 1e-9
        # Power-of-two rescaling is exact in floats; c = 10 may move the
        # last bit, so it gets an absolute bound instead.
        assert np.array_equal(fgm_perturbation(0.5 * g, eps), r)
        assert np.array_equal(fgm_perturbation(2.0 * g, eps), r)
        assert np.allclose(fgm_perturbation(10.0 * g, eps), r, rtol=0.0, atol=1e-12)
    zero = fgm_perturbation(np.zeros((3, 4)), 1.0)
    assert np.array_equal(zero, np.zeros((3, 4)))
    print("criterion 2: PASS (1000 gradients: norm within 1e-9, "
          "scale-invariant for c in {0.5, 2, 10}, zero maps to zero)")


def test_criterion_03_loss_oracle():
    errs = []
    for T in (1, 4, 64):
        tape = Tape()
        probs = tape.leaf(np.full((T, 5), 0.2))
        one_hot = one_hot_labels([TAGS[t % 5] for t in range(T)])
        loss = tape.cross_entropy_sum(probs, one_hot, np.ones(T))
        err = abs(float(loss.value) - T * math.log(5.0))
        errs.append(err)
        assert err <= 1e-12
    print(f"criterion 3: PASS (uniform CE vs T*ln5, worst err {max(errs):.2e} "
          "for T in {1, 4, 64})")


def test_criterion_04_scorer_oracle_equivalence():
    rng = random.Random(4)
    for _ in range(1000):
        gold_samples, pred_samples = [], []
        for i in range(rng.randint(1, 4)):
            length = rng.randint(1, 12)
            tokens = tuple(f"w{t}" for t in range(length))
            gold_samples.append(Sample(f"s{i}", tokens,
                                       tuple(rng.choice(TAGS) for _ in range(length))))
            pred_samples.append(Sample(f"s{i}", tokens,
                                       tuple(rng.choice(TAGS) for _ in range(length))))
        gold = Dataset(samples=tuple(gold_samples), role="dev")
        pred = Dataset(samples=tuple(pred_samples), role="dev")
        assert score(gold, pred) == brute_force_score(gold, pred)

    gold = Dataset(samples=(Sample("case", CASE_TOKENS, CASE_GOLD),), role="dev")
    without = Dataset(samples=(Sample("case", CASE_TOKENS, CASE_WITHOUT_AT),), role="dev")
    with_at = Dataset(samples=(Sample("case", CASE_TOKENS, CASE_WITH_AT),), role="dev")
    assert score(gold, without).long.f1 == 0.0
    assert score(gold, with_at).macro_f1 == 1.0
    print("criterion 4: PASS (scorer == brute force on 1000 random pairs; "
          "case fixture: long F1 0 without AT, macro F1 1 with AT)")


def test_criterion_05_bio_codec():
    rng = random.Random(5)
    for _ in range(10_000):
        length = rng.randint(1, 16)
        spans, cursor = [], 0
        while cursor < length:
            if rng.random() < 0.4:
                end = rng.randint(cursor + 1, length)
                spans.append(Span(cursor, end, rng.choice(("short", "long"))))
                cursor = end
            cursor += rng.randint(1, 3)
        encoded = bio_encode(spans, length)
        assert bio_decode(encoded) == spans

    expected = [Span(3, 8, "long"), Span(9, 10, "short"),
                Span(11, 12, "short"), Span(14, 15, "short")]
    assert bio_decode(CASE_GOLD) == expected
    print("criterion 5: PASS (10000 roundtrips; case gold row decodes to "
          "long(3,8), short(9,10), short(11,12), short(14,15))")


def test_criterion_06_trainability():
    start = time.monotonic()
    report = trained(1, 1, False)
    elapsed = time.monotonic() - start
    f1 = best_f1(report)
    assert f1 >= 0.90
    assert elapsed < 600.0
    print(f"criterion 6: PASS (baseline dev macro F1 {f1:.4f} "
          f"in {elapsed:.0f}s on 2000/400 corpus)")


def test_criterion_07_adversarial_benefit():
    seeds = (1, 2, 3, 4, 5)
    base = [best_f1(trained(1, s, False)) for s in seeds]
    adv = [best_f1(trained(1, s, True)) for s in seeds]
    improvement = mean(adv) - mean(base)
    assert mean(adv) >= mean(base)
    assert improvement >= 0.0
    worst_regression = max(b - a for a, b in zip(adv, base))
    assert worst_regression <= 0.02
    print(f"criterion 7: PASS (mean adv {mean(adv):.4f} vs base {mean(base):.4f}, "
          f"improvement {improvement:+.4f}, worst regression {worst_regression:.4f})")


def test_criterion_08_ensemble_benefit():
    member_seeds = (1, 2, 3, 4)
    gains = []
    for corpus_seed in (1, 2, 3):
        reports = [trained(corpus_seed, s, False) for s in member_seeds]
        member_mean = mean(r.epoch_dev_f1[-1] for r in reports)
        ensemble = EnsembleSet(members=tuple(r.params for r in reports))
        dev = corpus(corpus_seed)[1]
        pred = Dataset(samples=tuple(
            Sample(s.id, s.tokens, tuple(ensemble_predict(ensemble, s))) for s in dev),
            role="dev")
        ens_f1 = score(dev, pred).macro_f1
        assert ens_f1 >= member_mean
        gains.append(ens_f1 - member_mean)

    solo = trained(1, 1, False).params
    single = EnsembleSet(members=(solo,))
    dev = corpus(1)[1]
    for sample in dev:
        assert list(ensemble_predict(single, sample)) == list(predict_labels(solo, sample))
    print(f"criterion 8: PASS (ensemble >= member mean on 3 corpus seeds, "
          f"gains {[f'{g:+.4f}' for g in gains]}; K=1 matches single model)")


def test_criterion_09_rule_baseline_shape():
    standard_only = gen_synthetic(
        GeneratorConfig(count=400, standard_fraction=1.0, nonstandard_fraction=0.0),
        seed=11, role="dev")
    rep_std = score(standard_only, rule_predict(standard_only))
    assert rep_std.long.recall == 1.0

    mixed = gen_synthetic(GeneratorConfig(count=400), seed=12, role="dev")
    rep_mix = score(mixed, rule_predict(mixed))
    assert rep_mix.long.precision >= rep_mix.long.recall
    print(f"criterion 9: PASS (standard-only long recall {rep_std.long.recall:.4f}; "
          f"mixed long P {rep_mix.long.precision:.4f} >= R {rep_mix.long.recall:.4f})")


def test_criterion_10_determinism(tmp_path):
    train_ds = gen_synthetic(GeneratorConfig(count=300), seed=9, role="train")
    dev_ds = gen_synthetic(GeneratorConfig(count=100), seed=10, role="dev")
    config = TrainConfig(epochs=3, seed=5)
    first = train(train_ds, dev_ds, train_config=config)
    second = train(train_ds, dev_ds, train_config=config)

    path_a, path_b = tmp_path / "a.w", tmp_path / "b.w"
    save_weights(first.params, path_a)
    save_weights(second.params, path_b)
    assert path_a.read_bytes() == path_b.read_bytes()
    dump_a = json.dumps(report_to_dict(first), sort_keys=True)
    dump_b = json.dumps(report_to_dict(second), sort_keys=True)
    assert dump_a == dump_b
    assert first.params == second.params
    print("criterion 10: PASS (two identical runs: byte-identical weight files, "
          "identical TrainReports)")
