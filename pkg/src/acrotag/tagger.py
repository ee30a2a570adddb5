"""Trainable contextual encoder with a per-token softmax classifier.

The encoder is deliberately small: summed token + learned position
embeddings feed ``num_blocks`` transformer blocks (single-head scaled
dot-product self-attention, residual, layer norm, then a two-layer tanh
feedforward, residual, layer norm), and a linear layer maps each hidden
state to the five BIO classes.  The feedforward hidden width is fixed at
2*d so parameter shapes are a pure function of the config.

Everything runs on the gradient tape from :mod:`acrotag.autodiff`; the
summed input embedding is exposed as a tape node so training code can read
the loss gradient with respect to the input and build embedding-space
perturbations from it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tape, Tensor
from .corpus import Dataset, Sample, Tag, TAGS

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1

NUM_CLASSES = len(TAGS)

WEIGHTS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TaggerConfig:
    """Architecture settings; shapes of every parameter follow from these.

    The default vocab_size is a placeholder covering only the reserved ids;
    real configs bind it to the vocabulary built from the training set.
    """

    vocab_size: int = 2
    embed_dim: int = 64
    num_blocks: int = 2
    max_seq_len: int = 64
    num_classes: int = NUM_CLASSES
    seed: int = 0

    def __post_init__(self):
        if self.vocab_size < 2:
            raise ValueError("vocab_size must be >= 2 (padding and unknown ids are reserved)")
        if self.embed_dim < 4:
            raise ValueError("embed_dim must be >= 4")
        if self.num_blocks < 1:
            raise ValueError("num_blocks must be >= 1")
        if self.max_seq_len < 2:
            raise ValueError("max_seq_len must be >= 2")
        if self.num_classes != NUM_CLASSES:
            raise ValueError(f"num_classes is fixed at {NUM_CLASSES}")


@dataclass(frozen=True)
class Vocab:
    """Lowercased token -> id map with reserved padding and unknown ids."""

    ids: dict[str, int]

    def __post_init__(self):
        if self.ids.get(PAD_TOKEN) != PAD_ID or self.ids.get(UNK_TOKEN) != UNK_ID:
            raise ValueError("vocabulary must reserve ids 0/1 for padding/unknown")

    @property
    def size(self) -> int:
        return len(self.ids)

    def encode(self, tokens) -> np.ndarray:
        return np.array([self.ids.get(t.lower(), UNK_ID) for t in tokens], dtype=np.intp)


def build_vocab(train: Dataset, min_count: int = 1) -> Vocab:
    """Count lowercased tokens over the training set and assign ids.

    Ids follow first-appearance order, so two builds over the same corpus
    agree exactly.  Tokens seen fewer than min_count times map to unknown.
    """
    if len(train) == 0:
        raise ValueError("cannot build a vocabulary from an empty dataset")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: dict[str, int] = {}
    for sample in train:
        for tok in sample.tokens:
            low = tok.lower()
            counts[low] = counts.get(low, 0) + 1
    ids = {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID}
    for low, n in counts.items():  # insertion order == first appearance
        if n >= min_count and low not in ids:
            ids[low] = len(ids)
    return Vocab(ids=ids)


@dataclass(frozen=True)
class TaggerParams:
    """Model parameters plus the vocabulary they were sized for."""

    config: TaggerConfig
    vocab: Vocab
    arrays: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        expect = param_shapes(self.config)
        got = {k: v.shape for k, v in self.arrays.items()}
        if got != expect:
            raise ValueError(f"parameter shapes {got} do not match config {expect}")
        if self.config.vocab_size != self.vocab.size:
            raise ValueError("config.vocab_size does not match the vocabulary")
        for name, arr in self.arrays.items():
            if not np.isfinite(arr).all():
                raise ValueError(f"non-finite values in parameter {name!r}")

    def __eq__(self, other):
        if not isinstance(other, TaggerParams):
            return NotImplemented
        return (self.config == other.config and self.vocab == other.vocab
                and self.arrays.keys() == other.arrays.keys()
                and all(np.array_equal(self.arrays[k], other.arrays[k]) for k in self.arrays))

    def copy(self) -> "TaggerParams":
        return TaggerParams(self.config, self.vocab,
                            {k: v.copy() for k, v in self.arrays.items()})


def param_shapes(config: TaggerConfig) -> dict[str, tuple[int, ...]]:
    """Canonical parameter name -> shape map (also fixes iteration order)."""
    d = config.embed_dim
    ff = 2 * d
    shapes: dict[str, tuple[int, ...]] = {
        "token_emb": (config.vocab_size, d),
        "pos_emb": (config.max_seq_len, d),
    }
    for i in range(config.num_blocks):
        p = f"block{i}."
        shapes[p + "wq"] = (d, d)
        shapes[p + "wk"] = (d, d)
        shapes[p + "wv"] = (d, d)
        shapes[p + "wo"] = (d, d)
        shapes[p + "ln1_g"] = (d,)
        shapes[p + "ln1_b"] = (d,)
        shapes[p + "w1"] = (d, ff)
        shapes[p + "b1"] = (ff,)
        shapes[p + "w2"] = (ff, d)
        shapes[p + "b2"] = (d,)
        shapes[p + "ln2_g"] = (d,)
        shapes[p + "ln2_b"] = (d,)
    shapes["cls_w"] = (d, config.num_classes)
    shapes["cls_b"] = (config.num_classes,)
    return shapes


def init_params(config: TaggerConfig, vocab: Vocab) -> TaggerParams:
    """Seeded initialization: small symmetric embeddings, 1/sqrt(fan_in)
    projection weights, identity layer norms, zero biases."""
    if config.vocab_size != vocab.size:
        raise ValueError("config.vocab_size does not match the vocabulary")
    rng = np.random.default_rng(config.seed)
    arrays: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config).items():
        base = name.split(".")[-1]
        if base in ("token_emb", "pos_emb"):
            arrays[name] = rng.normal(0.0, 0.1, size=shape)
        elif base in ("wq", "wk", "wv", "wo", "w1", "w2", "cls_w"):
            arrays[name] = rng.normal(0.0, 1.0 / math.sqrt(shape[0]), size=shape)
        elif base in ("ln1_g", "ln2_g"):
            arrays[name] = np.ones(shape)
        else:  # biases and layer-norm shifts
            arrays[name] = np.zeros(shape)
    return TaggerParams(config=config, vocab=vocab, arrays=arrays)


@dataclass(frozen=True)
class ForwardOutput:
    """One forward pass: hidden states, class probabilities, and handles.

    ``embedding`` is the summed (token + position) input embedding as fed
    to the first block, perturbation included when one was applied; its
    .grad after backward is the loss gradient with respect to the input.
    ``param_leaves`` maps parameter names to their tape nodes so a trainer
    can collect parameter gradients.
    """

    hidden: Tensor
    probs: Tensor
    embedding: Tensor
    param_leaves: dict[str, Tensor] = field(repr=False)


def make_leaves(tape: Tape, params: TaggerParams) -> dict[str, Tensor]:
    """Enter every parameter array onto the tape as a differentiable leaf."""
    return {name: tape.leaf(arr) for name, arr in params.arrays.items()}


def forward_from_leaves(tape: Tape, leaves: dict[str, Tensor], config: TaggerConfig,
                        token_ids=None, perturbation=None,
                        embed_override: Tensor | None = None) -> ForwardOutput:
    """Forward pass given parameter leaves already on the tape.

    Either ``token_ids`` (normal path: embedding lookup) or
    ``embed_override`` (a (T, d) tape tensor standing in for the summed
    input embedding, used by gradient checks) must be provided.
    """
    if embed_override is None:
        ids = np.asarray(token_ids, dtype=np.intp)
        if ids.ndim != 1 or ids.size < 1:
            raise ValueError("token_ids must be a non-empty 1-d sequence")
        if ids.size > config.max_seq_len:
            raise ValueError(f"sequence length {ids.size} exceeds max_seq_len {config.max_seq_len}")
        if ids.min() < 0 or ids.max() >= config.vocab_size:
            raise ValueError("token id out of vocabulary range")
        tok = tape.embed_lookup(leaves["token_emb"], ids)
        pos = tape.embed_lookup(leaves["pos_emb"], np.arange(ids.size, dtype=np.intp))
        x = tape.add(tok, pos)
    else:
        x = embed_override
    if perturbation is not None:
        x = tape.add(x, tape.leaf(perturbation))
    embedding = x

    inv_sqrt_d = 1.0 / math.sqrt(config.embed_dim)
    for i in range(config.num_blocks):
        p = f"block{i}."
        q = tape.matmul(x, leaves[p + "wq"])
        k = tape.matmul(x, leaves[p + "wk"])
        v = tape.matmul(x, leaves[p + "wv"])
        scores = tape.scale(tape.matmul(q, tape.transpose(k)), inv_sqrt_d)
        mixed = tape.matmul(tape.softmax_rows(scores), v)
        attn_out = tape.matmul(mixed, leaves[p + "wo"])
        x = tape.layer_norm(tape.add(x, attn_out), leaves[p + "ln1_g"], leaves[p + "ln1_b"])
        inner = tape.elementwise_tanh(tape.add_bias(tape.matmul(x, leaves[p + "w1"]),
                                                    leaves[p + "b1"]))
        ff_out = tape.add_bias(tape.matmul(inner, leaves[p + "w2"]), leaves[p + "b2"])
        x = tape.layer_norm(tape.add(x, ff_out), leaves[p + "ln2_g"], leaves[p + "ln2_b"])

    logits = tape.add_bias(tape.matmul(x, leaves["cls_w"]), leaves["cls_b"])
    probs = tape.softmax_rows(logits)
    return ForwardOutput(hidden=x, probs=probs, embedding=embedding, param_leaves=leaves)


def forward(params: TaggerParams, token_ids, tape: Tape, perturbation=None) -> ForwardOutput:
    """Forward pass from raw parameters; creates fresh leaves on the tape."""
    leaves = make_leaves(tape, params)
    return forward_from_leaves(tape, leaves, params.config, token_ids=token_ids,
                               perturbation=perturbation)


def one_hot_labels(labels) -> np.ndarray:
    """Gold tags -> (T, num_classes) one-hot float matrix."""
    labels = tuple(labels)
    out = np.zeros((len(labels), NUM_CLASSES))
    for t, tag in enumerate(labels):
        out[t, tag.index] = 1.0
    return out


def sequence_loss(tape: Tape, leaves: dict[str, Tensor], config: TaggerConfig,
                  token_ids, one_hot, perturbation=None,
                  embed_override: Tensor | None = None):
    """Summed cross-entropy of one sequence; returns (loss, ForwardOutput)."""
    out = forward_from_leaves(tape, leaves, config, token_ids=token_ids,
                              perturbation=perturbation, embed_override=embed_override)
    T = out.probs.value.shape[0]
    loss = tape.cross_entropy_sum(out.probs, one_hot, np.ones(T))
    return loss, out


def predict_probs(params: TaggerParams, sample: Sample) -> np.ndarray:
    """Per-token class probabilities, shape (T, num_classes)."""
    tape = Tape()
    out = forward(params, params.vocab.encode(sample.tokens), tape)
    return out.probs.value


def predict_labels(params: TaggerParams, sample: Sample) -> list[Tag]:
    """Argmax tags; ties go to the earliest class in the fixed tag order."""
    probs = predict_probs(params, sample)
    return [TAGS[i] for i in probs.argmax(axis=1)]


# ---------------------------------------------------------------------------
# Weights file
# ---------------------------------------------------------------------------

def save_weights(params: TaggerParams, path) -> None:
    """Write a versioned JSON weights container.

    Serialization is canonical (sorted keys, repr floats), so identical
    params always produce byte-identical files, and load(save(p)) == p
    bitwise because JSON doubles roundtrip exactly.
    """
    doc = {
        "format_version": WEIGHTS_FORMAT_VERSION,
        "config": {
            "vocab_size": params.config.vocab_size,
            "embed_dim": params.config.embed_dim,
            "num_blocks": params.config.num_blocks,
            "max_seq_len": params.config.max_seq_len,
            "num_classes": params.config.num_classes,
            "seed": params.config.seed,
        },
        "vocab": params.vocab.ids,
        "arrays": {
            name: {"shape": list(arr.shape), "data": arr.reshape(-1).tolist()}
            for name, arr in params.arrays.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_weights(path) -> TaggerParams:
    """Read a weights container written by :func:`save_weights`."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: malformed weights file: {exc}") from exc
    version = doc.get("format_version")
    if version != WEIGHTS_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported weights format_version {version!r}")
    try:
        config = TaggerConfig(**doc["config"])
        vocab = Vocab(ids={str(k): int(v) for k, v in doc["vocab"].items()})
        arrays = {
            name: np.array(entry["data"], dtype=np.float64).reshape(entry["shape"])
            for name, entry in doc["arrays"].items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: invalid weights file: {exc}") from exc
    return TaggerParams(config=config, vocab=vocab, arrays=arrays)
