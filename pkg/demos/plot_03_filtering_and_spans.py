"""
Filtering errors and placing spans
==================================

Two cheap filters clean the model's error list before scoring. What
survives is mapped to character offsets in the translation.
"""

from openqe import ErrorAnnotation, QEJudgment, apply_filters, locate_spans

target = "Wir können dir das Paket morgen schicken, aber dir fehlt die Nummer."


def err(sev, phrase, source=None):
    return ErrorAnnotation("fluency/register", sev, source, phrase)


###############################################################################
# "dir" is reported twice as minor and once as major; "Päckchen" never
# occurs in the translation; the omission has no target phrase.

j = QEJudgment(
    70.0,
    major=(err("major", "dir"), err("major", "Päckchen")),
    minor=(err("minor", "dir"), err("minor", "DIR"), err("minor", None, "tracking number")),
)

filtered, report = apply_filters(j, target)
print(report.to_dict())

###############################################################################
# One "dir" remains, in the most severe list. The omission is kept for
# the score but gets no span.

for sev in ("critical", "major", "minor"):
    print(sev, [a.target_error or a.source_error for a in filtered.errors(sev)])

###############################################################################
# Repeated phrases take successive occurrences, leftmost first.

two = QEJudgment(70.0, minor=(err("minor", "dir"), err("minor", "dir")))
for span in locate_spans(two, target):
    print(span.start, span.end, repr(target[span.start:span.end]))
