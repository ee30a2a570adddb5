"""Training loops: plain cross-entropy baseline and FGM adversarial mode.

The FGM step follows the single-step recipe: run the clean forward and
backward, read the loss gradient g at the summed input embedding of each
sequence, build r = epsilon * g / ||g||2 with the L2 norm taken over the
whole (T, d) embedding tensor of that sequence, then run a second forward
pass with r added to the embedding.  The optimized objective is the
unweighted sum of clean and adversarial loss; the embedding tables are
never mutated, so there is nothing to restore after the step.

Batch losses are token-mean: per-sequence cross-entropy is a sum, and the
batch divides by the total token count once, so long sentences are not
implicitly upweighted by batching.

The optimizer is adaptive moment estimation with bias correction,
betas (0.9, 0.999), eps 1e-8, no weight decay.  One seed drives parameter
initialization and epoch shuffling, which makes entire runs repeatable
bit for bit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

import numpy as np

from .autodiff import Tape, Tensor
from .corpus import Dataset, Sample
from .evalmetrics import score
from .tagger import (
    TaggerConfig,
    TaggerParams,
    build_vocab,
    forward_from_leaves,
    init_params,
    make_leaves,
    one_hot_labels,
    predict_labels,
)

# Gradients with L2 norm below this are treated as exactly zero; dividing
# by a denormal norm would explode the perturbation direction.
GRAD_NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class FgmConfig:
    """Perturbation radius for the single-step embedding attack.

    The radius is dimensionless; the norm is taken per sequence over the
    full (T, d) embedding tensor.
    """

    epsilon: float = 1.0

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    adversarial: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (self.learning_rate > 0):
            raise ValueError("learning_rate must be positive")
        for name in ("beta1", "beta2"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ValueError(f"{name} must lie in [0, 1)")
        if not (self.adam_eps > 0):
            raise ValueError("adam_eps must be positive")


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch telemetry plus the final-epoch parameters.

    ``epoch_adv_loss`` entries are None in baseline mode.  Loss means are
    per token, matching the batch objective.
    """

    epoch_clean_loss: tuple[float, ...]
    epoch_adv_loss: tuple[float | None, ...]
    epoch_dev_f1: tuple[float, ...]
    best_dev_epoch: int
    params: TaggerParams = field(repr=False)

    def __post_init__(self):
        lengths = {len(self.epoch_clean_loss), len(self.epoch_adv_loss), len(self.epoch_dev_f1)}
        if len(lengths) != 1:
            raise ValueError("per-epoch fields must have equal length")
        for series in (self.epoch_clean_loss, self.epoch_adv_loss):
            for v in series:
                if v is not None and not (np.isfinite(v) and v >= 0):
                    raise ValueError(f"loss values must be finite and non-negative, got {v}")
        if not (1 <= self.best_dev_epoch <= len(self.epoch_dev_f1)):
            raise ValueError("best_dev_epoch out of range")


def report_to_dict(report: TrainReport) -> dict:
    """JSON-friendly view of a report, parameters excluded."""
    return {
        "epoch_clean_loss": list(report.epoch_clean_loss),
        "epoch_adv_loss": list(report.epoch_adv_loss),
        "epoch_dev_f1": list(report.epoch_dev_f1),
        "best_dev_epoch": report.best_dev_epoch,
    }


def fgm_perturbation(g, epsilon: float) -> np.ndarray:
    """r = epsilon * g / ||g||2, or zero when the gradient is (near) zero."""
    if isinstance(g, Tensor):
        g = g.value
    g = np.asarray(g, dtype=np.float64)
    if not np.isfinite(g).all():
        raise ValueError("non-finite gradient passed to fgm_perturbation")
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive")
    norm = np.linalg.norm(g)
    if norm < GRAD_NORM_FLOOR:
        return np.zeros_like(g)
    return (epsilon / norm) * g


@dataclass
class AdamState:
    """First/second moment accumulators keyed like the parameter arrays."""

    step: int
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]

    @classmethod
    def zeros_like(cls, params: TaggerParams) -> "AdamState":
        return cls(step=0,
                   m={k: np.zeros_like(a) for k, a in params.arrays.items()},
                   v={k: np.zeros_like(a) for k, a in params.arrays.items()})


def adam_update(params: TaggerParams, grads: dict[str, np.ndarray],
                state: AdamState, config: TrainConfig) -> None:
    """One in-place update with bias correction."""
    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t
    for name, arr in params.arrays.items():
        g = grads[name]
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = state.m[name] / correction1
        v_hat = state.v[name] / correction2
        arr -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)


@dataclass(frozen=True)
class StepResult:
    params: TaggerParams
    opt_state: AdamState
    clean_loss: float            # token-mean over the batch
    adv_loss: float | None       # token-mean, None in baseline mode


def batch_gradients(params: TaggerParams, batch, train_config: TrainConfig,
                    fgm_config: FgmConfig | None):
    """Forward/backward over one batch; returns (grads, clean, adv, tokens).

    ``batch`` is a sequence of (sample, token_ids, one_hot) triples.  In
    adversarial mode the tape is swept twice: once on the summed clean loss
    to obtain per-sequence embedding gradients, and once on the full
    token-mean objective after the perturbed passes are appended.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    adversarial = train_config.adversarial
    if adversarial and fgm_config is None:
        fgm_config = FgmConfig()
    config = params.config

    tape = Tape()
    leaves = make_leaves(tape, params)
    total_tokens = 0
    clean_losses = []
    outputs = []
    for sample, ids, one_hot in batch:
        out = forward_from_leaves(tape, leaves, config, token_ids=ids)
        loss = tape.cross_entropy_sum(out.probs, one_hot, np.ones(len(ids)))
        if not np.isfinite(loss.value):
            raise FloatingPointError(f"non-finite loss on sample {sample.id!r}")
        clean_losses.append(loss)
        outputs.append(out)
        total_tokens += len(ids)

    total_clean = clean_losses[0]
    for loss in clean_losses[1:]:
        total_clean = tape.add(total_clean, loss)

    adv_sum = None
    if adversarial:
        # sweep 1: per-sequence input gradients from the clean objective
        tape.backward(total_clean)
        perturbations = [fgm_perturbation(out.embedding.grad, fgm_config.epsilon)
                         for out in outputs]
        adv_losses = []
        for (sample, ids, one_hot), r in zip(batch, perturbations):
            out = forward_from_leaves(tape, leaves, config, token_ids=ids, perturbation=r)
            loss = tape.cross_entropy_sum(out.probs, one_hot, np.ones(len(ids)))
            if not np.isfinite(loss.value):
                raise FloatingPointError(f"non-finite adversarial loss on sample {sample.id!r}")
            adv_losses.append(loss)
        adv_sum = adv_losses[0]
        for loss in adv_losses[1:]:
            adv_sum = tape.add(adv_sum, loss)
        objective = tape.scale(tape.add(total_clean, adv_sum), 1.0 / total_tokens)
    else:
        objective = tape.scale(total_clean, 1.0 / total_tokens)

    # final sweep: parameter gradients of the token-mean objective
    tape.backward(objective)
    grads = {name: leaf.grad for name, leaf in leaves.items()}
    clean_mean = float(total_clean.value) / total_tokens
    adv_mean = float(adv_sum.value) / total_tokens if adv_sum is not None else None
    return grads, clean_mean, adv_mean, total_tokens


def train_step(params: TaggerParams, batch, train_config: TrainConfig,
               fgm_config: FgmConfig | None = None,
               opt_state: AdamState | None = None) -> StepResult:
    """One optimizer step over a batch of samples.

    ``batch`` is a sequence of Samples; updates ``params`` arrays in place
    and returns them with the advanced optimizer state and step losses.
    """
    prepared = []
    for sample in batch:
        if sample.labels is None:
            raise ValueError(f"sample {sample.id!r} has no labels")
        prepared.append((sample, params.vocab.encode(sample.tokens),
                         one_hot_labels(sample.labels)))
    if opt_state is None:
        opt_state = AdamState.zeros_like(params)
    grads, clean_mean, adv_mean, _ = batch_gradients(params, prepared, train_config, fgm_config)
    adam_update(params, grads, opt_state, train_config)
    return StepResult(params=params, opt_state=opt_state,
                      clean_loss=clean_mean, adv_loss=adv_mean)


def train(train_ds: Dataset, dev_ds: Dataset, train_config: TrainConfig | None = None,
          fgm_config: FgmConfig | None = None, tagger_template: TaggerConfig | None = None,
          min_count: int = 1, log=None) -> TrainReport:
    """Full training run; deterministic given the configs.

    The vocabulary comes from the training set only.  The tagger config is
    the template (defaults if None) with vocab_size bound to the realized
    vocabulary and the seed bound to train_config.seed, so one seed fixes
    initialization and shuffling together.  Dev macro F1 is recorded every
    epoch and the best epoch reported; the returned params are final-epoch.
    """
    if train_config is None:
        train_config = TrainConfig()
    if train_config.adversarial and fgm_config is None:
        fgm_config = FgmConfig()
    for sample in dev_ds:
        if sample.labels is None:
            raise ValueError(f"dev sample {sample.id!r} has no labels")

    vocab = build_vocab(train_ds, min_count=min_count)
    template = tagger_template if tagger_template is not None else TaggerConfig()
    config = replace(template, vocab_size=vocab.size, seed=train_config.seed)
    params = init_params(config, vocab)

    prepared = []
    for sample in train_ds:
        if sample.labels is None:
            raise ValueError(f"train sample {sample.id!r} has no labels")
        if len(sample.tokens) > config.max_seq_len:
            raise ValueError(f"sample {sample.id!r} is longer than max_seq_len "
                             f"{config.max_seq_len}")
        prepared.append((sample, vocab.encode(sample.tokens), one_hot_labels(sample.labels)))

    shuffle_rng = random.Random(train_config.seed)
    opt_state = AdamState.zeros_like(params)
    order = list(range(len(prepared)))
    bs = train_config.batch_size

    epoch_clean, epoch_adv, epoch_dev = [], [], []
    for epoch in range(train_config.epochs):
        shuffle_rng.shuffle(order)
        clean_total = 0.0
        adv_total = 0.0
        token_total = 0
        for lo in range(0, len(order), bs):
            batch = [prepared[i] for i in order[lo:lo + bs]]
            grads, clean_mean, adv_mean, n_tokens = batch_gradients(
                params, batch, train_config, fgm_config)
            adam_update(params, grads, opt_state, train_config)
            clean_total += clean_mean * n_tokens
            adv_total += (adv_mean or 0.0) * n_tokens
            token_total += n_tokens
        dev_f1 = evaluate_dev(params, dev_ds)
        epoch_clean.append(clean_total / token_total)
        epoch_adv.append(adv_total / token_total if train_config.adversarial else None)
        epoch_dev.append(dev_f1)
        if log is not None:
            adv_part = f" adv_loss={epoch_adv[-1]:.4f}" if train_config.adversarial else ""
            log(f"epoch {epoch + 1}/{train_config.epochs} "
                f"clean_loss={epoch_clean[-1]:.4f}{adv_part} dev_macro_f1={dev_f1:.4f}")

    best = max(range(len(epoch_dev)), key=lambda i: (epoch_dev[i], -i)) + 1
    return TrainReport(epoch_clean_loss=tuple(epoch_clean),
                       epoch_adv_loss=tuple(epoch_adv),
                       epoch_dev_f1=tuple(epoch_dev),
                       best_dev_epoch=best,
                       params=params)


def evaluate_dev(params: TaggerParams, dev_ds: Dataset) -> float:
    """Dev macro F1 of the current params."""
    pred_samples = tuple(
        Sample(id=s.id, tokens=s.tokens, labels=tuple(predict_labels(params, s)))
        for s in dev_ds
    )
    return score(dev_ds, Dataset(samples=pred_samples, role="dev")).macro_f1
