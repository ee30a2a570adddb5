"""
Training the tagger end to end
==============================

A small corpus, a small encoder, a few epochs: the model learns the
parenthesis-definition pattern well before the budget runs out.  The
trained weights survive a file roundtrip byte for byte.
"""

import tempfile
from pathlib import Path

from acrotag import (
    GeneratorConfig,
    TaggerConfig,
    TrainConfig,
    bio_decode,
    gen_synthetic,
    load_weights,
    predict_labels,
    save_weights,
    train,
)

train_ds = gen_synthetic(GeneratorConfig(count=400), seed=1, role="train")
dev_ds = gen_synthetic(GeneratorConfig(count=80), seed=2, role="dev")

report = train(
    train_ds, dev_ds,
    train_config=TrainConfig(epochs=4, seed=1),
    tagger_template=TaggerConfig(embed_dim=32, num_blocks=1),
    log=print,
)
print("best dev epoch:", report.best_dev_epoch)

# Tag a few dev sentences with the final model.
params = report.params
for sample in list(dev_ds)[:3]:
    predicted = predict_labels(params, sample)
    print(" ".join(sample.tokens))
    print("   gold:", bio_decode(sample.labels))
    print("   pred:", bio_decode(predicted))

# Weights save to a versioned JSON container and load back identically.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.w"
    save_weights(params, path)
    assert load_weights(path) == params
    print("weights roundtrip ok:", path.stat().st_size, "bytes")
