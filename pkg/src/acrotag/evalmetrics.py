"""Boundary-exact span scoring: micro counts per kind, macro F1 across kinds.

A predicted span counts as a true positive only when a gold span of the
same kind with exactly the same (start, end) exists in the same sample.
Counts are pooled over all samples within each kind before computing
precision/recall/F1; the macro average runs only across the two kinds.
Zero denominators score 0, so a kind with no gold and no predicted spans
contributes F1 = 0, never 1.

:func:`brute_force_score` recomputes the same report by exhaustive pairwise
comparison with its own label-walking span extraction, sharing no code with
:func:`score`; it exists as an independent oracle for tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Dataset, KINDS, LONG, SHORT, Span, bio_decode


@dataclass(frozen=True)
class ClassScore:
    """Pooled counts and derived fractions for one span kind."""

    kind: str
    true_positives: int
    predicted_count: int
    gold_count: int
    precision: float
    recall: float
    f1: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not (0 <= self.true_positives <= min(self.predicted_count, self.gold_count)):
            raise ValueError("true_positives exceeds predicted or gold count")
        for name in ("precision", "recall", "f1"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} out of [0, 1]: {v}")

    @classmethod
    def from_counts(cls, kind: str, tp: int, predicted: int, gold: int) -> "ClassScore":
        precision = tp / predicted if predicted > 0 else 0.0
        recall = tp / gold if gold > 0 else 0.0
        f1 = (2 * precision * recall / (precision + recall)) if precision + recall > 0 else 0.0
        return cls(kind=kind, true_positives=tp, predicted_count=predicted,
                   gold_count=gold, precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class EvalReport:
    short: ClassScore
    long: ClassScore
    macro_f1: float

    def __post_init__(self):
        if self.macro_f1 != (self.short.f1 + self.long.f1) / 2:
            raise ValueError("macro_f1 must equal the mean of the two kind F1s")


def _paired_labels(gold: Dataset, pred: Dataset):
    """Yield (sample id, gold labels, predicted labels), aligned by id."""
    pred_by_id = pred.by_id()
    gold_ids = {s.id for s in gold}
    if set(pred_by_id) != gold_ids:
        first = next((s.id for s in gold if s.id not in pred_by_id),
                     None) or next(s.id for s in pred if s.id not in gold_ids)
        raise ValueError(f"gold and prediction ids differ, first mismatch: {first!r}")
    for g in gold:
        p = pred_by_id[g.id]
        if g.labels is None or p.labels is None:
            raise ValueError(f"sample {g.id!r}: both gold and prediction need labels")
        if len(p.labels) != len(g.labels):
            raise ValueError(f"sample {g.id!r}: prediction length {len(p.labels)} "
                             f"!= gold length {len(g.labels)}")
        yield g.id, g.labels, p.labels


def score(gold: Dataset, pred: Dataset) -> EvalReport:
    """Boundary-exact evaluation of a prediction set against gold labels."""
    tp = {SHORT: 0, LONG: 0}
    n_pred = {SHORT: 0, LONG: 0}
    n_gold = {SHORT: 0, LONG: 0}
    for _, gold_labels, pred_labels in _paired_labels(gold, pred):
        gold_spans = set(bio_decode(gold_labels))
        pred_spans = bio_decode(pred_labels)
        for sp in gold_spans:
            n_gold[sp.kind] += 1
        for sp in pred_spans:
            n_pred[sp.kind] += 1
            if sp in gold_spans:
                tp[sp.kind] += 1
    short = ClassScore.from_counts(SHORT, tp[SHORT], n_pred[SHORT], n_gold[SHORT])
    long = ClassScore.from_counts(LONG, tp[LONG], n_pred[LONG], n_gold[LONG])
    return EvalReport(short=short, long=long, macro_f1=(short.f1 + long.f1) / 2)


# ---------------------------------------------------------------------------
# Independent oracle
# ---------------------------------------------------------------------------

def _walk_spans(labels) -> list[Span]:
    # label-string walker, intentionally separate from corpus.bio_decode
    rendered = [t.render() for t in labels]
    spans = []
    i = 0
    while i < len(rendered):
        lab = rendered[i]
        if lab == "O":
            i += 1
            continue
        kind = lab[2:]
        j = i + 1
        while j < len(rendered) and rendered[j] == "I-" + kind:
            j += 1
        spans.append(Span(i, j, kind))
        i = j
    return spans


def brute_force_score(gold: Dataset, pred: Dataset) -> EvalReport:
    """Same report as :func:`score`, via exhaustive pairwise span matching."""
    per_kind: dict[str, list[int]] = {SHORT: [0, 0, 0], LONG: [0, 0, 0]}  # tp, pred, gold
    for _, gold_labels, pred_labels in _paired_labels(gold, pred):
        gold_spans = _walk_spans(gold_labels)
        pred_spans = _walk_spans(pred_labels)
        matched = [False] * len(gold_spans)
        for p in pred_spans:
            per_kind[p.kind][1] += 1
            for gi, g in enumerate(gold_spans):
                if not matched[gi] and g.kind == p.kind and g.start == p.start and g.end == p.end:
                    matched[gi] = True
                    per_kind[p.kind][0] += 1
                    break
        for g in gold_spans:
            per_kind[g.kind][2] += 1

    def fractions(kind):
        tp, npred, ngold = per_kind[kind]
        precision = tp / npred if npred else 0.0
        recall = tp / ngold if ngold else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return ClassScore(kind=kind, true_positives=tp, predicted_count=npred,
                          gold_count=ngold, precision=precision, recall=recall, f1=f1)

    short, long = fractions(SHORT), fractions(LONG)
    return EvalReport(short=short, long=long, macro_f1=(short.f1 + long.f1) / 2)


def format_report(report: EvalReport) -> str:
    """Fixed-format table used by the command-line evaluate output."""
    lines = [f"{'kind':<8}{'P':>8}{'R':>8}{'F1':>8}"]
    for cs in (report.short, report.long):
        lines.append(f"{cs.kind:<8}{cs.precision:>8.4f}{cs.recall:>8.4f}{cs.f1:>8.4f}")
    lines.append(f"macro F1 {report.macro_f1:.4f}")
    return "\n".join(lines)


def report_to_dict(report: EvalReport) -> dict:
    """JSON-friendly view of an evaluation report."""
    def one(cs: ClassScore) -> dict:
        return {
            "true_positives": cs.true_positives,
            "predicted_count": cs.predicted_count,
            "gold_count": cs.gold_count,
            "precision": cs.precision,
            "recall": cs.recall,
            "f1": cs.f1,
        }

    return {"short": one(report.short), "long": one(report.long), "macro_f1": report.macro_f1}
