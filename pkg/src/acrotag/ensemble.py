"""Average ensembles: unweighted mean of member probability distributions.

Members are independently trained taggers (typically differing only in
seed) that share one vocabulary, so they agree on token ids.  Averaging
happens after the softmax, per token, and the fused prediction uses the
same argmax tie-break as a single model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Sample, Tag, TAGS
from .tagger import TaggerParams, predict_probs


@dataclass(frozen=True)
class EnsembleSet:
    """K >= 1 trained members over a shared vocabulary."""

    members: tuple[TaggerParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 1:
            raise ValueError("an ensemble needs at least one member")
        first = self.members[0]
        for i, m in enumerate(self.members[1:], start=1):
            if m.vocab != first.vocab:
                raise ValueError(f"member {i} uses a different vocabulary")
            if replace(m.config, seed=first.config.seed) != first.config:
                raise ValueError(f"member {i} config differs beyond the seed")

    def __len__(self) -> int:
        return len(self.members)


def average_probs(dists) -> np.ndarray:
    """Elementwise unweighted mean of K rowwise-normalized matrices.

    Each cell is summed with exact rounding, so the result (and hence any
    argmax over it) does not depend on member order.
    """
    dists = [np.asarray(d, dtype=np.float64) for d in dists]
    if not dists:
        raise ValueError("need at least one distribution to average")
    shape = dists[0].shape
    for d in dists[1:]:
        if d.shape != shape:
            raise ValueError(f"distribution shape mismatch: {d.shape} vs {shape}")
    out = np.empty(shape)
    k = len(dists)
    for idx in np.ndindex(*shape):
        out[idx] = math.fsum(d[idx] for d in dists) / k
    return out


def ensemble_probs(ensemble: EnsembleSet, sample: Sample) -> np.ndarray:
    """Averaged per-token class distribution for one sample."""
    return average_probs([predict_probs(m, sample) for m in ensemble.members])


def ensemble_predict(ensemble: EnsembleSet, sample: Sample) -> list[Tag]:
    """Argmax of the averaged distribution; ties break by fixed tag order."""
    probs = ensemble_probs(ensemble, sample)
    return [TAGS[i] for i in probs.argmax(axis=1)]
