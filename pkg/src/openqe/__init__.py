"""Reference-free MT quality estimation with a single LLM call per segment.

The pipeline prompts a chat model for a 0-100 score, MQM-style error
annotations and a post-edit, repairs and validates the JSON it returns,
filters spurious errors, and meta-evaluates the result against human ESA
annotations.
"""

from openqe.filtering import (
    FilterReport,
    apply_filters,
    dedupe_cross_severity,
    filter_hallucinated,
    rejection_rate,
)
from openqe.ingestion import (
    GoldAnnotation,
    LanguagePair,
    Segment,
    gold_score,
    load_gold,
    load_segments,
)
from openqe.json_repair import (
    ErrorAnnotation,
    QEJudgment,
    extract_json_block,
    parse_judgment,
    repair_and_parse,
    validate_judgment,
)
from openqe.meta_metrics import (
    ScoreMatrix,
    SpanMetrics,
    inter_annotator_agreement,
    paired_permutation_pvalue,
    soft_pairwise_accuracy,
    span_f1,
    system_scores,
    tie_calibrated_accuracy,
)
from openqe.prompting import PromptPair, build_prompts, build_system_prompt, build_user_prompt
from openqe.span_alignment import CharSpan, locate_spans

__version__ = "0.1.0"

__all__ = [
    "CharSpan",
    "ErrorAnnotation",
    "FilterReport",
    "GoldAnnotation",
    "LanguagePair",
    "PromptPair",
    "QEJudgment",
    "ScoreMatrix",
    "Segment",
    "SpanMetrics",
    "apply_filters",
    "build_prompts",
    "build_system_prompt",
    "build_user_prompt",
    "dedupe_cross_severity",
    "extract_json_block",
    "filter_hallucinated",
    "gold_score",
    "inter_annotator_agreement",
    "load_gold",
    "load_segments",
    "locate_spans",
    "paired_permutation_pvalue",
    "parse_judgment",
    "rejection_rate",
    "repair_and_parse",
    "soft_pairwise_accuracy",
    "span_f1",
    "system_scores",
    "tie_calibrated_accuracy",
    "validate_judgment",
]
