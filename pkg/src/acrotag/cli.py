"""Command-line interface for the acrotag toolkit.

Subcommands: gen-data, train, predict, rule-predict, ensemble-predict,
evaluate, grad-check.  Every run prints its resolved configuration with
per-value provenance (flag beats config file beats built-in default).
``run`` returns 0 on success and nonzero after a one-line diagnostic.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .advtrain import report_to_dict as train_report_to_dict
from .advtrain import train
from .autodiff import Tape, grad_check
from .config import CONFIG_KEYS, parse_bool, parse_config_file, render_value, resolve
from .corpus import (
    Dataset,
    GeneratorConfig,
    Sample,
    TAGS,
    gen_synthetic,
    parse_dataset,
    write_dataset,
)
from .ensemble import EnsembleSet, ensemble_predict
from .evalmetrics import format_report, report_to_dict, score
from .rulebase import RuleConfig, rule_predict
from .tagger import (
    TaggerConfig,
    build_vocab,
    forward,
    init_params,
    load_weights,
    make_leaves,
    one_hot_labels,
    predict_labels,
    save_weights,
    sequence_loss,
)


def _print_resolved(pairs, note: str = "flag > default") -> None:
    """Print the effective settings of this run, one line per value."""
    print(f"resolved config ({note}):")
    for name, value, source in pairs:
        shown = render_value(value) if isinstance(value, (bool, float)) else value
        print(f"  {name} = {shown}  [{source}]")


def _take(args, name: str, default):
    """Flag value with provenance; None means the flag was not given."""
    value = getattr(args, name)
    return (default, "default") if value is None else (value, "flag")


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_gen_data(args) -> int:
    defaults = GeneratorConfig(count=1)
    fields = [("role", "train"),
              ("vocab_size", defaults.vocab_size),
              ("standard_fraction", defaults.standard_fraction),
              ("nonstandard_fraction", defaults.nonstandard_fraction),
              ("distractor_rate", defaults.distractor_rate)]
    taken = {name: _take(args, name, default) for name, default in fields}
    pairs = [("count", args.count, "flag"), ("seed", args.seed, "flag")]
    pairs += [(name, v, src) for name, (v, src) in taken.items()]
    pairs.append(("out", args.out, "flag"))
    _print_resolved(pairs)

    role = taken.pop("role")[0]
    config = GeneratorConfig(count=args.count,
                             **{name: v for name, (v, _) in taken.items()})
    ds = gen_synthetic(config, seed=args.seed, role=role)
    write_dataset(ds, args.out)
    print(f"wrote {len(ds)} samples to {args.out}")
    return 0


def _cmd_train(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    flag_values = {key.name: getattr(args, key.name) for key in CONFIG_KEYS}
    resolved = resolve(file_values, flag_values)
    print("resolved config (flag > file > default):")
    for name, path in [("train_file", args.train), ("dev_file", args.dev),
                       ("config_file", args.config or "<none>"),
                       ("weights_out", args.out)]:
        print(f"  {name} = {path}  [flag]")
    for line in resolved.describe().splitlines():
        print(f"  {line}")

    train_ds = parse_dataset(args.train, role="train")
    dev_ds = parse_dataset(args.dev, role="dev")
    min_count = resolved.values["min_count"]
    requested = resolved.values["vocab_size"]
    if requested:
        actual = build_vocab(train_ds, min_count=min_count).size
        if requested != actual:
            raise ValueError(f"vocab_size {requested} does not match the training "
                             f"set ({actual} types); use 0 to derive it")

    report = train(train_ds, dev_ds,
                   train_config=resolved.train_config(),
                   fgm_config=resolved.fgm_config(),
                   tagger_template=resolved.tagger_template(),
                   min_count=min_count,
                   log=print)
    save_weights(report.params, args.out)
    print(f"best dev epoch {report.best_dev_epoch} "
          f"(macro F1 {report.epoch_dev_f1[report.best_dev_epoch - 1]:.4f})")
    print(f"wrote weights to {args.out}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(train_report_to_dict(report), fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(f"wrote training report to {args.report}")
    return 0


def _cmd_predict(args) -> int:
    _print_resolved([("model", args.model, "flag"), ("input", args.input, "flag"),
                     ("out", args.out, "flag")])
    params = load_weights(args.model)
    print(f"  model: embed_dim={params.config.embed_dim} "
          f"num_blocks={params.config.num_blocks} vocab_size={params.config.vocab_size}")
    ds = parse_dataset(args.input, role="test")
    pred = Dataset(samples=tuple(
        Sample(id=s.id, tokens=s.tokens, labels=tuple(predict_labels(params, s)))
        for s in ds), role="test")
    write_dataset(pred, args.out)
    print(f"wrote {len(pred)} predictions to {args.out}")
    return 0


def _cmd_rule_predict(args) -> int:
    defaults = RuleConfig()
    fields = [("min_acronym_len", defaults.min_acronym_len),
              ("max_acronym_len", defaults.max_acronym_len),
              ("max_longform_window", defaults.max_longform_window),
              ("min_uppercase_fraction", defaults.min_uppercase_fraction)]
    taken = {name: _take(args, name, default) for name, default in fields}
    pairs = [("input", args.input, "flag")]
    pairs += [(name, "<per-acronym>" if v is None else v, src)
              for name, (v, src) in taken.items()]
    pairs.append(("out", args.out, "flag"))
    _print_resolved(pairs)

    config = RuleConfig(**{name: v for name, (v, _) in taken.items()})
    ds = parse_dataset(args.input, role="test")
    pred = rule_predict(ds, config)
    write_dataset(pred, args.out)
    print(f"wrote {len(pred)} predictions to {args.out}")
    return 0


def _cmd_ensemble_predict(args) -> int:
    pairs = [(f"model_{i + 1}", path, "flag") for i, path in enumerate(args.models)]
    pairs += [("input", args.input, "flag"), ("out", args.out, "flag")]
    _print_resolved(pairs)
    members = tuple(load_weights(p) for p in args.models)
    ensemble = EnsembleSet(members=members)
    ds = parse_dataset(args.input, role="test")
    pred = Dataset(samples=tuple(
        Sample(id=s.id, tokens=s.tokens, labels=tuple(ensemble_predict(ensemble, s)))
        for s in ds), role="test")
    write_dataset(pred, args.out)
    print(f"wrote {len(pred)} predictions ({len(members)} members) to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    _print_resolved([("gold", args.gold, "flag"), ("pred", args.pred, "flag")])
    gold = parse_dataset(args.gold, role="dev")
    pred = parse_dataset(args.pred, role="dev")
    report = score(gold, pred)
    print(format_report(report))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report_to_dict(report), fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(f"wrote report to {args.json}")
    return 0


def _cmd_grad_check(args) -> int:
    taken = {name: _take(args, name, default)
             for name, default in [("embed_dim", 16), ("num_blocks", 2),
                                   ("tokens", 8), ("seed", 0),
                                   ("step", 1e-5), ("threshold", 1e-4)]}
    _print_resolved([(name, v, src) for name, (v, src) in taken.items()])
    values = {name: v for name, (v, _) in taken.items()}

    rng = random.Random(values["seed"])
    words = [f"w{i}" for i in range(8)]
    tokens = tuple(rng.choice(words) for _ in range(values["tokens"]))
    labels = tuple(TAGS[rng.randrange(len(TAGS))] for _ in range(values["tokens"]))
    sample = Sample(id="GC-0", tokens=tokens, labels=labels)
    vocab = build_vocab(Dataset(samples=(sample,), role="train"))
    config = TaggerConfig(vocab_size=vocab.size, embed_dim=values["embed_dim"],
                          num_blocks=values["num_blocks"],
                          max_seq_len=values["tokens"], seed=values["seed"])
    params = init_params(config, vocab)
    ids = vocab.encode(tokens)
    one_hot = one_hot_labels(labels)
    names = list(params.arrays)

    def build_params(tape, nodes):
        loss, _ = sequence_loss(tape, dict(zip(names, nodes)), config, ids, one_hot)
        return loss

    worst_params = grad_check(build_params, [params.arrays[n] for n in names],
                              h=values["step"])

    embedding = forward(params, ids, Tape()).embedding.value

    def build_embed(tape, nodes):
        loss, _ = sequence_loss(tape, make_leaves(tape, params), config, None,
                                one_hot, embed_override=nodes[0])
        return loss

    worst_embed = grad_check(build_embed, [embedding], h=values["step"])

    worst = max(worst_params, worst_embed)
    print(f"parameter leaves: max rel err {worst_params:.3e}")
    print(f"embedding leaf:   max rel err {worst_embed:.3e}")
    if not worst < values["threshold"]:
        raise RuntimeError(f"gradient check failed: max rel err {worst:.3e} "
                           f">= threshold {values['threshold']:.0e}")
    print(f"gradient check passed: max rel err {worst:.3e} < {values['threshold']:.0e}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acrotag",
                                     description="Acronym tagging toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic labeled corpus")
    p.add_argument("--count", type=int, required=True, help="number of sentences")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--out", required=True, help="output dataset path")
    p.add_argument("--role", choices=("train", "dev", "test"), default=None,
                   help="corpus role (default train)")
    p.add_argument("--vocab-size", type=int, default=None,
                   help="word pool size (default 160)")
    p.add_argument("--standard-fraction", type=float, default=None,
                   help="share of standard definitions (default 0.6)")
    p.add_argument("--nonstandard-fraction", type=float, default=None,
                   help="share of nonstandard definitions (default 0.3)")
    p.add_argument("--distractor-rate", type=float, default=None,
                   help="uppercase-distractor rate in plain sentences (default 0.2)")
    p.set_defaults(handler=_cmd_gen_data)

    p = sub.add_parser("train", help="train a tagger and write a weights file")
    p.add_argument("--train", required=True, help="labeled training dataset")
    p.add_argument("--dev", required=True, help="labeled dev dataset")
    p.add_argument("--out", required=True, help="weights file path")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--report", default=None, help="optional JSON training report")
    for key in CONFIG_KEYS:
        flag = "--" + key.name.replace("_", "-")
        if key.kind == "bool":
            p.add_argument(flag, type=parse_bool, default=None, metavar="on|off",
                           help=key.help)
        else:
            p.add_argument(flag, type=int if key.kind == "int" else float,
                           default=None, help=key.help)
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("predict", help="tag a dataset with a trained model")
    p.add_argument("--model", required=True, help="weights file")
    p.add_argument("--input", required=True, help="dataset to tag")
    p.add_argument("--out", required=True, help="prediction file path")
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("rule-predict", help="tag a dataset with the rule baseline")
    p.add_argument("--input", required=True, help="dataset to tag")
    p.add_argument("--out", required=True, help="prediction file path")
    p.add_argument("--min-acronym-len", type=int, default=None,
                   help="shortest acceptable acronym (default 2)")
    p.add_argument("--max-acronym-len", type=int, default=None,
                   help="longest acceptable acronym (default 10)")
    p.add_argument("--max-longform-window", type=int, default=None,
                   help="fixed alignment window; default scales with acronym length")
    p.add_argument("--min-uppercase-fraction", type=float, default=None,
                   help="uppercase share for acronym candidates (default 0.6)")
    p.set_defaults(handler=_cmd_rule_predict)

    p = sub.add_parser("ensemble-predict",
                       help="tag a dataset with an averaged ensemble")
    p.add_argument("--models", nargs="+", required=True,
                   metavar="WEIGHTS", help="one or more weight files")
    p.add_argument("--input", required=True, help="dataset to tag")
    p.add_argument("--out", required=True, help="prediction file path")
    p.set_defaults(handler=_cmd_ensemble_predict)

    p = sub.add_parser("evaluate", help="boundary-exact span F1 of predictions")
    p.add_argument("--gold", required=True, help="labeled reference dataset")
    p.add_argument("--pred", required=True, help="prediction file")
    p.add_argument("--json", default=None, help="optional JSON report path")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("grad-check",
                       help="finite-difference check of the tagger gradient")
    p.add_argument("--embed-dim", type=int, default=None, help="encoder width (default 16)")
    p.add_argument("--num-blocks", type=int, default=None, help="attention blocks (default 2)")
    p.add_argument("--tokens", type=int, default=None, help="sample length (default 8)")
    p.add_argument("--seed", type=int, default=None, help="fixture seed (default 0)")
    p.add_argument("--step", type=float, default=None,
                   help="finite-difference step (default 1e-5)")
    p.add_argument("--threshold", type=float, default=None,
                   help="max acceptable relative error (default 1e-4)")
    p.set_defaults(handler=_cmd_grad_check)

    return parser


def run(argv=None) -> int:
    """Parse argv and dispatch; 0 on success, nonzero with a diagnostic."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or argparse already printed the error
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
