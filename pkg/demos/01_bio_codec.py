"""
BIO tags, spans, and the codec between them
===========================================

A sentence is labeled per token: B-x begins a span of kind x, I-x
continues it, O is outside.  Spans are half-open token intervals
[start, end) of kind "short" (the acronym) or "long" (its expansion).
"""

from acrotag import Span, Tag, bio_decode, bio_decode_with_repairs, bio_encode

# A sentence with one long form, its acronym in parentheses, and a plain tail.
tokens = ["learning", "with", "noisy", "labels", "(", "LNL", ")", "is", "hard"]
spans = [Span(0, 4, "long"), Span(5, 6, "short")]

labels = bio_encode(spans, len(tokens))
print("tokens:", tokens)
print("labels:", [t.render() for t in labels])

# Decoding recovers exactly the spans we started from.
print("decoded:", bio_decode(labels))
assert bio_decode(labels) == spans

# The decoder also accepts malformed sequences a model might emit.  An
# I- tag with no matching B- opens a span anyway, and the repair is counted.
stray = [Tag.parse(x) for x in ["O", "I-short", "I-short", "O"]]
repaired, n_repairs = bio_decode_with_repairs(stray)
print("stray I-tags decode to", repaired, "with", n_repairs, "repair")

# Kind changes inside a run split the span: I-long after B-short cannot
# continue the short span, so it opens a new long one.
mixed = [Tag.parse(x) for x in ["B-short", "I-long", "O"]]
print("kind switch decodes to", bio_decode_with_repairs(mixed))
