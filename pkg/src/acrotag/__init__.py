"""acrotag: sequence labeling for acronym identification at desk scale.

The package identifies acronyms (short forms) and their expansions (long
forms) in tokenized sentences using BIO tags.  It contains a small
trainable encoder with a from-scratch autodiff tape, gradient-based
adversarial training, a deterministic rule baseline, boundary-exact span
evaluation, probability-averaging ensembles, and a synthetic corpus
generator, all behind one CLI.
"""

from .advtrain import (
    AdamState,
    FgmConfig,
    TrainConfig,
    TrainReport,
    adam_update,
    batch_gradients,
    evaluate_dev,
    fgm_perturbation,
    train,
    train_step,
)
from .autodiff import Tape, Tensor, grad_check
from .corpus import (
    TAGS,
    Dataset,
    DatasetError,
    GeneratorConfig,
    Sample,
    Span,
    Tag,
    bio_decode,
    bio_decode_with_repairs,
    bio_encode,
    gen_synthetic,
    parse_dataset,
    write_dataset,
)
from .ensemble import EnsembleSet, average_probs, ensemble_predict, ensemble_probs
from .evalmetrics import (
    ClassScore,
    EvalReport,
    brute_force_score,
    format_report,
    score,
)
from .rulebase import RuleConfig, is_short_form, rule_identify, rule_predict
from .tagger import (
    TaggerConfig,
    TaggerParams,
    Vocab,
    build_vocab,
    forward,
    init_params,
    load_weights,
    predict_labels,
    predict_probs,
    save_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ClassScore",
    "Dataset",
    "DatasetError",
    "EnsembleSet",
    "EvalReport",
    "FgmConfig",
    "GeneratorConfig",
    "RuleConfig",
    "Sample",
    "Span",
    "TAGS",
    "Tag",
    "TaggerConfig",
    "TaggerParams",
    "Tape",
    "Tensor",
    "TrainConfig",
    "TrainReport",
    "Vocab",
    "adam_update",
    "average_probs",
    "batch_gradients",
    "bio_decode",
    "bio_decode_with_repairs",
    "bio_encode",
    "brute_force_score",
    "build_vocab",
    "ensemble_predict",
    "ensemble_probs",
    "evaluate_dev",
    "fgm_perturbation",
    "format_report",
    "forward",
    "gen_synthetic",
    "grad_check",
    "init_params",
    "is_short_form",
    "load_weights",
    "parse_dataset",
    "predict_labels",
    "predict_probs",
    "rule_identify",
    "rule_predict",
    "save_weights",
    "score",
    "train",
    "train_step",
    "write_dataset",
]
