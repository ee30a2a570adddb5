"""
The rule baseline and where it breaks
=====================================

The rules find uppercase acronym candidates, then try to align a
parenthesized acronym's letters right-to-left against the words before
the parenthesis.  The alignment only accepts when every letter matches
and the leftmost matched word contributes its initial, which is exactly
what nonstandard acronyms violate.
"""

from acrotag import GeneratorConfig, Sample, gen_synthetic, rule_identify, rule_predict, score

# A standard definition: initials spell the acronym, so the long form is found.
standard = Sample(
    id="d1",
    tokens=("noisy", "label", "detection", "(", "NLD", ")", "helps"),
)
print("standard:", rule_identify(standard))

# A nonstandard acronym takes its first letter from inside a word; the
# leftmost alignment lands mid-word and the long form is rejected.
nonstandard = Sample(
    id="d2",
    tokens=("extended", "noise", "model", "(", "TNM", ")", "fails"),
)
print("nonstandard:", rule_identify(nonstandard))

# A standalone acronym with no parenthesis is still tagged as a short form.
standalone = Sample(id="d3", tokens=("the", "CNN", "was", "small"))
print("standalone:", rule_identify(standalone))

# On a corpus of only standard definitions the rules recover every long
# form; on the mixed corpus they keep precision but lose recall.
standard_only = gen_synthetic(
    GeneratorConfig(count=300, standard_fraction=1.0, nonstandard_fraction=0.0),
    seed=11, role="dev")
mixed = gen_synthetic(GeneratorConfig(count=300), seed=11, role="dev")

for name, ds in [("standard-only", standard_only), ("mixed", mixed)]:
    report = score(ds, rule_predict(ds))
    print(f"{name:14s} long P {report.long.precision:.3f} "
          f"R {report.long.recall:.3f} F1 {report.long.f1:.3f}")
