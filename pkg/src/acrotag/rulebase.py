"""Deterministic rule baseline for acronym and long-form identification.

Stage one flags short-form candidates by surface shape: token length within
bounds and uppercase-character fraction at or above a threshold.  Stage two
resolves the classical parenthetical-definition pattern ``long form ( ACR )``
by aligning acronym characters right-to-left against the tokens before the
opening parenthesis: each word may match one character, preferring its
initial and falling back to a word-internal character, or be skipped
entirely.  A long span is emitted only when every character found a home
and the leftmost matched word was matched on its initial character; the
span then runs from that word up to the parenthesis.

The matcher never crosses another parenthesis while scanning leftward, and
short-form candidates swallowed by an emitted long form are dropped so the
output spans stay disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Dataset, LONG, SHORT, Sample, Span, bio_encode


@dataclass(frozen=True)
class RuleConfig:
    """Thresholds for the two rule stages.

    ``max_longform_window`` of None means the adaptive default of
    2 + 2 * len(acronym) tokens scanned left of the parenthesis.
    """

    min_acronym_len: int = 2
    max_acronym_len: int = 10
    max_longform_window: int | None = None
    min_uppercase_fraction: float = 0.6

    def __post_init__(self):
        if not (1 <= self.min_acronym_len <= self.max_acronym_len):
            raise ValueError("need 1 <= min_acronym_len <= max_acronym_len")
        if self.max_longform_window is not None and self.max_longform_window < 1:
            raise ValueError("max_longform_window must be >= 1")
        if not (0.0 < self.min_uppercase_fraction <= 1.0):
            raise ValueError("min_uppercase_fraction must lie in (0, 1]")

    def window_for(self, acronym: str) -> int:
        if self.max_longform_window is not None:
            return self.max_longform_window
        return 2 + 2 * len(acronym)


def is_short_form(token: str, config: RuleConfig) -> bool:
    """Surface test for acronym candidates."""
    if not (config.min_acronym_len <= len(token) <= config.max_acronym_len):
        return False
    upper = sum(1 for ch in token if ch.isupper())
    return upper / len(token) >= config.min_uppercase_fraction


def _align_long_form(acronym: str, tokens, paren_index: int, config: RuleConfig):
    """Right-to-left greedy alignment; returns the long Span or None.

    ``paren_index`` is the position of the opening parenthesis; candidate
    words are scanned from paren_index - 1 leftward, at most window tokens,
    stopping at any other parenthesis.
    """
    chars = acronym.lower()
    a = len(chars) - 1
    lo = max(0, paren_index - config.window_for(acronym))
    leftmost_match = None
    leftmost_used_initial = False
    for w in range(paren_index - 1, lo - 1, -1):
        if a < 0:
            break
        word = tokens[w].lower()
        if word in ("(", ")"):
            break
        if word[0] == chars[a]:
            leftmost_match, leftmost_used_initial = w, True
            a -= 1
        elif chars[a] in word[1:]:
            leftmost_match, leftmost_used_initial = w, False
            a -= 1
        # otherwise the word is skipped and consumes no character
    if a >= 0 or leftmost_match is None or not leftmost_used_initial:
        return None
    return Span(leftmost_match, paren_index, LONG)


def rule_identify(sample: Sample, config: RuleConfig | None = None) -> list[Span]:
    """All spans the rules find in one sentence, disjoint and sorted."""
    if config is None:
        config = RuleConfig()
    tokens = sample.tokens
    shorts = [Span(i, i + 1, SHORT) for i, tok in enumerate(tokens)
              if is_short_form(tok, config)]

    longs: list[Span] = []
    for sp in shorts:
        i = sp.start
        if 0 < i < len(tokens) - 1 and tokens[i - 1] == "(" and tokens[i + 1] == ")":
            found = _align_long_form(tokens[i], tokens, i - 1, config)
            if found is not None:
                longs.append(found)

    claimed = [False] * len(tokens)
    for sp in longs:
        for t in range(sp.start, sp.end):
            claimed[t] = True
    kept = [sp for sp in shorts if not claimed[sp.start]]
    return sorted(kept + longs)


def rule_predict(dataset: Dataset, config: RuleConfig | None = None) -> Dataset:
    """Label every sample with the rule spans; role becomes 'test'."""
    samples = tuple(
        Sample(id=s.id, tokens=s.tokens,
               labels=tuple(bio_encode(rule_identify(s, config), len(s.tokens))))
        for s in dataset
    )
    return Dataset(samples=samples, role="test")
