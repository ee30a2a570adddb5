"""
Seed ensembles by probability averaging
=======================================

Members differ only in training seed.  The ensemble averages their
per-token class distributions and takes the argmax, which smooths out
single-model mistakes without any extra training.
"""

from statistics import mean

import numpy as np

from acrotag import (
    Dataset,
    EnsembleSet,
    GeneratorConfig,
    Sample,
    TaggerConfig,
    TrainConfig,
    ensemble_predict,
    ensemble_probs,
    gen_synthetic,
    predict_probs,
    score,
    train,
)

train_ds = gen_synthetic(GeneratorConfig(count=300), seed=5, role="train")
dev_ds = gen_synthetic(GeneratorConfig(count=60), seed=6, role="dev")
template = TaggerConfig(embed_dim=32, num_blocks=1)

reports = [train(train_ds, dev_ds,
                 train_config=TrainConfig(epochs=3, seed=seed),
                 tagger_template=template)
           for seed in (1, 2, 3)]
ensemble = EnsembleSet(members=tuple(r.params for r in reports))

# The ensemble distribution is the exact mean of the member distributions.
sample = dev_ds.samples[0]
member_rows = [predict_probs(r.params, sample)[0] for r in reports]
print("member P(tag) for token 0:")
for row in member_rows:
    print("  ", np.round(row, 3))
print("ensemble:", np.round(ensemble_probs(ensemble, sample)[0], 3))

# Member versus ensemble dev F1.
member_f1 = [r.epoch_dev_f1[-1] for r in reports]
pred = Dataset(samples=tuple(
    Sample(s.id, s.tokens, tuple(ensemble_predict(ensemble, s))) for s in dev_ds),
    role="dev")
ensemble_f1 = score(dev_ds, pred).macro_f1
print("member dev F1:", [f"{f:.4f}" for f in member_f1])
print(f"mean member {mean(member_f1):.4f} vs ensemble {ensemble_f1:.4f}")
