"""Data model, dataset files, BIO span codec, and synthetic corpus generation.

A corpus is a JSON array of records ``{"id": ..., "tokens": [...],
"labels": [...]}``.  Tokens are taken as given; no re-tokenization is ever
performed.  Labels use the five-tag BIO scheme over two span kinds,
``short`` (the acronym itself) and ``long`` (the phrase it abbreviates).

The synthetic generator stands in for a hand-annotated corpus at desk
scale.  It writes sentences of the shape ``... <long form> ( <ACR> ) ...``
with gold labels that are correct by construction, and can mix in
"non-standard" acronyms whose letters are deliberately chosen so that
word-initial matching cannot recover the long form.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass

from .wordlist import CONTENT_WORDS, FILLER_WORDS

SHORT = "short"
LONG = "long"
KINDS = (SHORT, LONG)

ROLES = ("train", "dev", "test")


class DatasetError(ValueError):
    """Raised for malformed dataset files or invariant violations."""


class Tag(enum.Enum):
    """Per-token BIO label. Exactly five values exist."""

    O = "O"
    B_SHORT = "B-short"
    I_SHORT = "I-short"
    B_LONG = "B-long"
    I_LONG = "I-long"

    @classmethod
    def parse(cls, text: str) -> "Tag":
        try:
            return _TAG_BY_STRING[text]
        except KeyError:
            raise DatasetError(f"unknown tag string {text!r}") from None

    def render(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        """Class id in the fixed tie-break order O < B-short < I-short < B-long < I-long."""
        return _TAG_INDEX[self]

    @property
    def kind(self) -> str | None:
        """'short' or 'long' for B-/I- tags, None for O."""
        if self is Tag.O:
            return None
        return SHORT if self in (Tag.B_SHORT, Tag.I_SHORT) else LONG

    @property
    def begins(self) -> bool:
        return self in (Tag.B_SHORT, Tag.B_LONG)


TAGS = (Tag.O, Tag.B_SHORT, Tag.I_SHORT, Tag.B_LONG, Tag.I_LONG)
_TAG_BY_STRING = {t.value: t for t in TAGS}
_TAG_INDEX = {t: i for i, t in enumerate(TAGS)}

_BEGIN = {SHORT: Tag.B_SHORT, LONG: Tag.B_LONG}
_INSIDE = {SHORT: Tag.I_SHORT, LONG: Tag.I_LONG}


@dataclass(frozen=True, order=True)
class Span:
    """Half-open token interval [start, end) of one kind."""

    start: int
    end: int
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"span kind must be one of {KINDS}, got {self.kind!r}")
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span bounds [{self.start}, {self.end})")


@dataclass(frozen=True)
class Sample:
    """One sentence: unique id, pre-tokenized words, optional gold labels."""

    id: str
    tokens: tuple[str, ...]
    labels: tuple[Tag, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if len(self.tokens) < 1:
            raise DatasetError(f"sample {self.id!r}: tokens must be non-empty")
        for i, tok in enumerate(self.tokens):
            if not isinstance(tok, str) or tok == "":
                raise DatasetError(f"sample {self.id!r}: token {i} is empty or not a string")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != len(self.tokens):
                raise DatasetError(
                    f"sample {self.id!r}: {len(self.labels)} labels for "
                    f"{len(self.tokens)} tokens"
                )


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of samples with a corpus role.

    Train/dev datasets must be fully labeled; test datasets may omit labels.
    """

    samples: tuple[Sample, ...]
    role: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if self.role not in ROLES:
            raise DatasetError(f"role must be one of {ROLES}, got {self.role!r}")
        seen = set()
        for i, s in enumerate(self.samples):
            if s.id in seen:
                raise DatasetError(f"duplicate id {s.id!r} at sample {i}")
            seen.add(s.id)
            if self.role in ("train", "dev") and s.labels is None:
                raise DatasetError(f"sample {s.id!r} (index {i}): missing labels for role {self.role!r}")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def by_id(self) -> dict[str, Sample]:
        return {s.id: s for s in self.samples}


# ---------------------------------------------------------------------------
# File ingestion / emission
# ---------------------------------------------------------------------------

def parse_dataset(path, role: str) -> Dataset:
    """Read a JSON dataset file and validate every record.

    Errors are located by sample index and field.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            records = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DatasetError(f"{path}: malformed dataset file: {exc}") from exc
    if not isinstance(records, list):
        raise DatasetError(f"{path}: expected a top-level array of records")

    samples = []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise DatasetError(f"{path}: record {i} is not an object")
        try:
            sid = rec["id"]
            tokens = rec["tokens"]
        except KeyError as exc:
            raise DatasetError(f"{path}: record {i}: missing field {exc}") from None
        if not isinstance(sid, str):
            raise DatasetError(f"{path}: record {i}: field 'id' must be a string")
        if not isinstance(tokens, list):
            raise DatasetError(f"{path}: record {i}: field 'tokens' must be an array")
        labels = None
        if "labels" in rec and rec["labels"] is not None:
            raw = rec["labels"]
            if not isinstance(raw, list):
                raise DatasetError(f"{path}: record {i}: field 'labels' must be an array")
            try:
                labels = tuple(Tag.parse(x) for x in raw)
            except DatasetError as exc:
                raise DatasetError(f"{path}: record {i}: field 'labels': {exc}") from None
        try:
            samples.append(Sample(id=sid, tokens=tuple(tokens), labels=labels))
        except DatasetError as exc:
            raise DatasetError(f"{path}: record {i}: {exc}") from None
    try:
        return Dataset(samples=tuple(samples), role=role)
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from None


def write_dataset(dataset: Dataset, path) -> None:
    """Write a dataset (or prediction set) as a JSON array, UTF-8."""
    records = []
    for s in dataset:
        rec = {"id": s.id, "tokens": list(s.tokens)}
        if s.labels is not None:
            rec["labels"] = [t.render() for t in s.labels]
        records.append(rec)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, ensure_ascii=False, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# BIO codec
# ---------------------------------------------------------------------------

def bio_decode_with_repairs(labels) -> tuple[list[Span], int]:
    """Decode a tag sequence into spans, repairing ill-formed BIO.

    A B-x opens a span of kind x; following I-x tokens extend it; the span
    closes at the first token that is not I-x.  An orphan I-x (no open span
    of kind x at that point) opens a new span and counts as one repair.
    A B-x directly after a same-kind span starts a new adjacent span.

    Returns (spans sorted by start, repair count).
    """
    labels = tuple(labels)
    spans: list[Span] = []
    repairs = 0
    open_kind: str | None = None
    open_start = 0

    def close(upto: int):
        nonlocal open_kind
        if open_kind is not None:
            spans.append(Span(open_start, upto, open_kind))
            open_kind = None

    for i, tag in enumerate(labels):
        if tag.begins:
            close(i)
            open_kind, open_start = tag.kind, i
        elif tag is Tag.O:
            close(i)
        else:  # inside tag
            if open_kind == tag.kind:
                continue  # extends the open span
            close(i)
            open_kind, open_start = tag.kind, i
            repairs += 1
    close(len(labels))
    return spans, repairs


def bio_decode(labels) -> list[Span]:
    """Decode a tag sequence into disjoint spans sorted by start."""
    return bio_decode_with_repairs(labels)[0]


def bio_encode(spans, length: int) -> list[Tag]:
    """Encode disjoint spans into a BIO tag sequence of the given length.

    Inverse of :func:`bio_decode` on well-formed input.
    """
    out = [Tag.O] * length
    prev_end = -1
    for sp in sorted(spans):
        if sp.end > length:
            raise ValueError(f"span {sp} out of range for length {length}")
        if sp.start < prev_end:
            raise ValueError(f"overlapping spans at {sp}")
        prev_end = sp.end
        out[sp.start] = _BEGIN[sp.kind]
        for i in range(sp.start + 1, sp.end):
            out[i] = _INSIDE[sp.kind]
    return out


# ---------------------------------------------------------------------------
# Synthetic corpus generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    """Settings for :func:`gen_synthetic`.

    ``standard_fraction`` of the samples define their acronym by exact
    initials of the long form; ``nonstandard_fraction`` use a mixed-case
    acronym whose first letter is a word-internal character, so pure
    initial-letter matching cannot recover the long form.  The remainder
    are plain sentences with no entities.  ``distractor_rate`` adds a
    non-acronym parenthetical to that share of sentences.
    """

    count: int
    vocab_size: int = 160
    standard_fraction: float = 0.6
    nonstandard_fraction: float = 0.3
    distractor_rate: float = 0.2

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        for name in ("standard_fraction", "nonstandard_fraction", "distractor_rate"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.standard_fraction + self.nonstandard_fraction > 1.0 + 1e-12:
            raise ValueError("standard_fraction + nonstandard_fraction must not exceed 1")
        if self.vocab_size < 20:
            raise ValueError("vocab_size must be >= 20")


@dataclass(frozen=True)
class _Phrase:
    words: tuple[str, ...]
    standard: str      # exact initials, all caps
    nonstandard: str   # defeats initial-letter matching (see _build_phrase_pool)


# The phrase inventory is a function of the generator config only, never of
# the corpus seed, so corpora generated with different seeds (train vs dev)
# share one acronym vocabulary.
_POOL_SEED = 0x5EED


def _word_pools(vocab_size: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    n_content = min(len(CONTENT_WORDS), vocab_size // 2)
    n_filler = min(len(FILLER_WORDS), vocab_size - n_content)
    return FILLER_WORDS[:n_filler], CONTENT_WORDS[:n_content]


def _nonstandard_acronym(words, rng) -> str | None:
    """Build an acronym that word-initial alignment provably cannot match.

    The first letter is drawn from inside words[0] and differs from every
    word's initial; optionally one middle word is skipped, provided none of
    the acronym's letters occur anywhere in the skipped word.
    """
    initials = {w[0] for w in words}
    first_candidates = [c for c in words[0][1:] if c not in initials]
    if not first_candidates:
        return None
    x1 = rng.choice(sorted(set(first_candidates)))

    skip = None
    if len(words) >= 3 and rng.random() < 0.5:
        middles = list(range(1, len(words) - 1))
        rng.shuffle(middles)
        for s in middles:
            rest = [w[0] for i, w in enumerate(words) if i > 0 and i != s]
            chars = set([x1] + rest)
            if not (chars & set(words[s])):
                skip = s
                break
    rest = [w[0] for i, w in enumerate(words) if i > 0 and i != skip]
    chars = [x1] + rest
    acr = "".join(chars).upper()
    if len(acr) >= 3 and rng.random() < 0.5:
        pos = rng.randrange(1, len(acr))
        acr = acr[:pos] + acr[pos].lower() + acr[pos + 1:]
    return acr


def _build_phrase_pool(content, fillers, rng, size: int) -> list[_Phrase]:
    taken_words = set(content) | set(fillers)
    pool: list[_Phrase] = []
    seen_longforms = set()
    attempts = 0
    while len(pool) < size and attempts < size * 50:
        attempts += 1
        k = rng.choice((2, 3, 3, 4))
        if k > len(content):
            k = len(content)
        words = tuple(rng.sample(list(content), k))
        if words in seen_longforms:
            continue
        standard = "".join(w[0] for w in words).upper()
        nonstandard = _nonstandard_acronym(words, rng)
        if nonstandard is None:
            continue
        # acronym tokens must not collide with ordinary vocabulary words
        if standard.lower() in taken_words or nonstandard.lower() in taken_words:
            continue
        seen_longforms.add(words)
        pool.append(_Phrase(words=words, standard=standard, nonstandard=nonstandard))
    if not pool:
        raise ValueError("could not build a phrase pool; vocab_size too small")
    return pool


_ID_PREFIX = {"train": "TR", "dev": "DEV", "test": "TS"}


def gen_synthetic(config: GeneratorConfig, seed: int, role: str = "train") -> Dataset:
    """Generate a labeled corpus; deterministic for a given (config, seed, role)."""
    fillers, content = _word_pools(config.vocab_size)
    pool_rng = random.Random(_POOL_SEED)
    pool = _build_phrase_pool(content, fillers, pool_rng, size=max(4, min(48, len(content) // 2)))

    rng = random.Random(seed)
    prefix = _ID_PREFIX[role] if role in _ID_PREFIX else role.upper()
    samples = []
    for i in range(config.count):
        u = rng.random()
        if u < config.standard_fraction:
            style = "standard"
        elif u < config.standard_fraction + config.nonstandard_fraction:
            style = "nonstandard"
        else:
            style = "plain"

        tokens: list[str] = []
        spans: list[Span] = []
        if style == "plain":
            tokens.extend(rng.choice(fillers) for _ in range(rng.randint(4, 10)))
        else:
            phrase = rng.choice(pool)
            acr = phrase.standard if style == "standard" else phrase.nonstandard
            tokens.extend(rng.choice(fillers) for _ in range(rng.randint(2, 5)))
            start = len(tokens)
            tokens.extend(phrase.words)
            spans.append(Span(start, len(tokens), LONG))
            tokens.append("(")
            spans.append(Span(len(tokens), len(tokens) + 1, SHORT))
            tokens.append(acr)
            tokens.append(")")
            tokens.extend(rng.choice(fillers) for _ in range(rng.randint(1, 4)))
        if rng.random() < config.distractor_rate:
            tokens.extend(["(", rng.choice(fillers), ")"])
            tokens.extend(rng.choice(fillers) for _ in range(rng.randint(0, 2)))
        tokens.append(".")

        labels = bio_encode(spans, len(tokens))
        samples.append(Sample(id=f"{prefix}-{i}", tokens=tuple(tokens), labels=tuple(labels)))
    return Dataset(samples=tuple(samples), role=role)
