"""
Meta-evaluation against human scores
====================================

Three protocols: soft pairwise accuracy at system level, group-by-item
accuracy with a tuned tie threshold at segment level, and character-level
span F1.
"""

import numpy as np

from openqe import (
    CharSpan,
    ScoreMatrix,
    paired_permutation_pvalue,
    soft_pairwise_accuracy,
    span_f1,
    tie_calibrated_accuracy,
)

rng = np.random.default_rng(3)

###############################################################################
# Human scores for four systems on eight items, and a noisy metric.

systems = ("A", "B", "C", "D")
items = tuple(f"p{k}" for k in range(8))
quality = np.array([[80], [70], [60], [40]]) + rng.normal(0, 8, (4, 8))
human = ScoreMatrix(systems, items, np.round(quality / 5) * 5)
metric = ScoreMatrix(systems, items, np.round(quality + rng.normal(0, 10, (4, 8))))

###############################################################################
# Each system pair gets a one-sided sign-flip p-value. With eight items all
# 256 sign patterns are enumerated, so the p-value is exact.

print(paired_permutation_pvalue(human.values[0], human.values[1]))

###############################################################################
# SPA compares metric and human p-values pair by pair.

print("SPA", soft_pairwise_accuracy(metric, human, seed=0))
print("SPA(human, human)", soft_pairwise_accuracy(human, human))

###############################################################################
# Human scores are rounded to fives, so ties are common. The tie threshold
# lets the metric predict them.

acc, eps = tie_calibrated_accuracy(metric, human)
print(f"accuracy {acc:.3f} at eps {eps}")

###############################################################################
# Span F1 gives half credit when the severities disagree.

m = span_f1([CharSpan(0, 3, "major")], [CharSpan(0, 2, "minor")])
print(m.precision, m.recall, m.f1)
