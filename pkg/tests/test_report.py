from openqe.report import render_markdown


def report(model, spa, acc, **extra):
    pair = {"spa": spa, "segment_accuracy": acc, "epsilon": 2.5, **extra}
    return {"model": model, "language_pairs": {"cs-de": pair}, "average": {"spa": spa, "segment_accuracy": acc}}


def test_tables_per_model():
    text = render_markdown([
        report("m1", 0.8, 0.55, rejection={"before": 20278, "after": 13591, "rejection_rate": 33.0},
               span={"filtered": {"precision": 0.1112, "recall": 0.0986, "f1": 0.1045}}),
        report("m2", 0.9, 0.6),
    ])
    assert "| cs-de | m1 | 20,278 | 13,591 | 33.0% |" in text
    assert "| cs-de | m1 | - | - | - | 11.12 | 9.86 | 10.45 |" in text
    assert "| m1 | 0.80 | 0.80 |" in text and "| m2 | 0.90 | 0.90 |" in text
    assert "m2 cs-de eps=2.5" in text


def test_no_optional_sections():
    text = render_markdown([report("m", 1.0, 1.0)])
    assert "Error filtering" not in text and "Span detection" not in text
