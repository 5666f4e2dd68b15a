import json
import subprocess
import sys

import pytest

from openqe.cli import main
from openqe.mock_server import MockServer


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    return path


def client_flags(url, *extra):
    return ["--endpoint", url, "--model", "mock-qe", "--retry-backoff", "0.001", *extra]


E2E_RESAMPLES = ["--resamples", "200"]


# ---------------------------------------------------------------- judge

def test_judge_fixture_judgments(fixtures_dir, e2e_server, tmp_path):
    code = main(["judge", "--segments", str(fixtures_dir / "e2e" / "segments.jsonl"), "--out", str(tmp_path),
                 *client_flags(e2e_server.url)])
    assert code == 0
    rows = read_jsonl(tmp_path / "judgments.jsonl")
    assert [r["system_id"] for r in rows] == ["sysA", "sysB", "sysC", "sysD", "sysE"]
    by_sys = {r["system_id"]: r for r in rows}
    assert by_sys["sysD"]["score"] == 0.0
    assert any("closed" in w for w in by_sys["sysE"]["warnings"])
    assert len(read_jsonl(tmp_path / "raw_completions.jsonl")) == 5
    assert read_jsonl(tmp_path / "failures.jsonl") == []


def test_judge_endpoint_down(fixtures_dir, tmp_path, capsys):
    with MockServer({}) as server:
        url = server.url
    code = main(["judge", "--segments", str(fixtures_dir / "e2e" / "segments.jsonl"), "--out", str(tmp_path),
                 *client_flags(url, "--max-retries", "0")])
    assert code == 1
    assert read_jsonl(tmp_path / "judgments.jsonl") == []
    assert len(read_jsonl(tmp_path / "failures.jsonl")) == 5
    logs = [json.loads(line) for line in capsys.readouterr().err.splitlines()]
    assert any(entry["level"] == "error" and "sysA" in entry["msg"] for entry in logs)


def test_judge_partial(fixtures_dir, tmp_path):
    responses = json.loads((fixtures_dir / "e2e" / "mock" / "responses.json").read_text(encoding="utf-8"))
    responses.pop(sorted(responses)[0])
    with MockServer(responses) as server:
        code = main(["judge", "--segments", str(fixtures_dir / "e2e" / "segments.jsonl"), "--out", str(tmp_path),
                     *client_flags(server.url)])
    assert code == 2
    assert len(read_jsonl(tmp_path / "judgments.jsonl")) == 4
    assert len(read_jsonl(tmp_path / "failures.jsonl")) == 1


def test_judge_warm_cache(fixtures_dir, e2e_server, tmp_path):
    args = ["judge", "--segments", str(fixtures_dir / "e2e" / "segments.jsonl"),
            *client_flags(e2e_server.url, "--cache-dir", str(tmp_path / "cache"))]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    hits = e2e_server.hits
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    assert e2e_server.hits == hits
    assert all(r["from_cache"] for r in read_jsonl(tmp_path / "b" / "raw_completions.jsonl"))
    for name in ("judgments.jsonl", "raw_completions.jsonl"):
        a = read_jsonl(tmp_path / "a" / name)
        b = read_jsonl(tmp_path / "b" / name)
        for row in a + b:
            row.pop("from_cache", None)
        assert a == b


def test_bad_dataset_is_fatal(tmp_path):
    bad = tmp_path / "s.jsonl"
    bad.write_text("{not json\n")
    assert main(["judge", "--segments", str(bad), "--out", str(tmp_path), *client_flags("http://127.0.0.1:9/v1")]) == 1


# ---------------------------------------------------------------- filter

def judgment_row(item, system, errors, model="m"):
    return {"item_id": item, "system_id": system, "model": model, "score": 50, "post_edited_translation": "",
            "errors": {sev: errors.get(sev, []) for sev in ("critical", "major", "minor")}, "warnings": []}


def err(phrase):
    return {"type": "fluency/grammar", "source_error": None if phrase else "src", "target_error": phrase,
            "correction": None, "short_desc": None}


WORDS = "eins zwei drei vier fünf sechs sieben acht neun zehn".split()


def test_filter_replica_counts(tmp_path):
    # 20278 annotations: 13591 survive, 4000 hallucinated, 2687 cross-severity duplicates
    kept, hallucinated, dupes = 13591, 4000, 2687
    segments, rows = [], []
    k = 0
    while kept or hallucinated or dupes:
        n = min(kept, len(WORDS))
        major = [err(w) for w in WORDS[:n]]
        d = min(dupes, n)
        h = min(hallucinated, 3)
        minor = [err(w.upper()) for w in WORDS[:d]] + [err("falsch") for _ in range(h)]
        kept, dupes, hallucinated = kept - n, dupes - d, hallucinated - h
        segments.append({"item_id": f"i{k}", "system_id": "s", "src_lang": "Czech", "tgt_lang": "German",
                         "source": "x", "target": " ".join(WORDS)})
        rows.append(judgment_row(f"i{k}", "s", {"major": major, "minor": minor}))
        k += 1
    seg_path = write_jsonl(tmp_path / "segments.jsonl", segments)
    j_path = write_jsonl(tmp_path / "judgments.jsonl", rows)
    assert main(["filter", "--judgments", str(j_path), "--segments", str(seg_path), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "filter_report.json").read_text())["reports"][0]
    assert (report["before"], report["after"], report["rejection_rate"]) == (20278, 13591, 33.0)
    assert (report["rejected_hallucinated"], report["rejected_duplicates"]) == (4000, 2687)


def filter_once(tmp_path, errors):
    seg_path = write_jsonl(tmp_path / "segments.jsonl", [{"item_id": "1", "system_id": "s", "src_lang": "en",
                                                           "tgt_lang": "de", "source": "x", "target": "Das ist gut"}])
    j_path = write_jsonl(tmp_path / "judgments.jsonl", [judgment_row("1", "s", errors)])
    assert main(["filter", "--judgments", str(j_path), "--segments", str(seg_path), "--out", str(tmp_path)]) == 0
    return (read_jsonl(tmp_path / "filtered.jsonl")[0],
            json.loads((tmp_path / "filter_report.json").read_text())["reports"][0],
            read_jsonl(j_path)[0])


def test_filter_zero_errors_passthrough(tmp_path):
    filtered, report, original = filter_once(tmp_path, {})
    assert filtered == original
    assert report["rejection_rate"] == 0.0


def test_filter_all_hallucinated(tmp_path):
    filtered, report, _ = filter_once(tmp_path, {"major": [err("schlecht")], "minor": [err("nein")]})
    assert report["after"] == 0 and report["rejection_rate"] == 100.0
    assert sum(len(v) for v in filtered["errors"].values()) == 0


def test_filter_spans_written(tmp_path):
    filter_once(tmp_path, {"minor": [err("GUT"), err(None)]})
    spans = read_jsonl(tmp_path / "predicted_spans.jsonl")[0]["spans"]
    assert spans == [{"start": 8, "end": 11, "severity": "minor"}]


# ---------------------------------------------------------------- evaluate

def test_evaluate_toy_matches_oracle(fixtures_dir, tmp_path):
    toy = fixtures_dir / "toy"
    expected = json.loads((toy / "expected.json").read_text())
    code = main(["evaluate", "--segments", str(toy / "segments.jsonl"), "--gold", str(toy / "gold.jsonl"),
                 "--predictions", str(toy / "predictions.jsonl"), "--out", str(tmp_path), "--csv"])
    assert code == 0
    res = json.loads((tmp_path / "report.json").read_text())["language_pairs"]["en-it"]
    assert res["spa"] == pytest.approx(expected["spa"], abs=1e-12)
    assert (res["segment_accuracy"], res["epsilon"]) == (expected["segment_accuracy"], expected["epsilon"])
    for k in ("precision", "recall", "f1"):
        assert res["span"]["filtered"][k] == pytest.approx(expected["span"][k], abs=1e-12)
    assert (tmp_path / "report.md").read_text().startswith("## Span detection")
    assert (tmp_path / "system_scores.csv").read_text().splitlines()[0] == "language_pair,system,metric,human"


def test_evaluate_iaa(fixtures_dir, tmp_path):
    toy = fixtures_dir / "toy"
    expected = json.loads((toy / "expected.json").read_text())["iaa"]
    assert main(["evaluate", "--iaa", "--segments", str(toy / "segments.jsonl"), "--gold", str(toy / "gold.jsonl"),
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    res = report["language_pairs"]["en-it"]
    assert report["model"] == "human-vs-human"
    assert res["spa"] == pytest.approx(expected["spa"], abs=1e-12)
    assert (res["segment_accuracy"], res["epsilon"]) == (expected["segment_accuracy"], expected["epsilon"])
    assert res["span"]["f1"] == pytest.approx(expected["span"]["f1"], abs=1e-12)


def test_evaluate_scores_only(fixtures_dir, tmp_path):
    toy = fixtures_dir / "toy"
    assert main(["evaluate", "--scores-only", "--segments", str(toy / "segments.jsonl"), "--gold",
                 str(toy / "gold.jsonl"), "--predictions", str(toy / "predictions.jsonl"),
                 "--out", str(tmp_path)]) == 0
    assert "span" not in json.loads((tmp_path / "report.json").read_text())["language_pairs"]["en-it"]


def test_evaluate_coverage_gap_listed(fixtures_dir, tmp_path, capsys):
    toy = fixtures_dir / "toy"
    rows = read_jsonl(toy / "predictions.jsonl")[1:]
    preds = write_jsonl(tmp_path / "p.jsonl", rows)
    code = main(["evaluate", "--segments", str(toy / "segments.jsonl"), "--gold", str(toy / "gold.jsonl"),
                 "--predictions", str(preds), "--out", str(tmp_path)])
    assert code == 1
    assert "it-1/alpha" in capsys.readouterr().err


def test_evaluate_needs_predictions(fixtures_dir, tmp_path):
    toy = fixtures_dir / "toy"
    assert main(["evaluate", "--segments", str(toy / "segments.jsonl"), "--gold", str(toy / "gold.jsonl"),
                 "--out", str(tmp_path)]) == 1


def test_self_evaluation(fixtures_dir, tmp_path):
    for name in ("toy", "e2e"):
        d = fixtures_dir / name
        out = tmp_path / name
        assert main(["evaluate", "--segments", str(d / "segments.jsonl"), "--gold", str(d / "gold.jsonl"),
                     "--predictions", str(d / "gold.jsonl"), "--out", str(out)]) == 0
        for res in json.loads((out / "report.json").read_text())["language_pairs"].values():
            assert (res["spa"], res["segment_accuracy"], res["span"]["filtered"]["f1"]) == (1.0, 1.0, 1.0)


def test_report_to_stdout(fixtures_dir, tmp_path, capsys):
    toy = fixtures_dir / "toy"
    main(["evaluate", "--segments", str(toy / "segments.jsonl"), "--gold", str(toy / "gold.jsonl"),
          "--predictions", str(toy / "predictions.jsonl"), "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["report", str(tmp_path / "report.json")]) == 0
    out = capsys.readouterr().out
    assert "| toy-model |" in out and "soft pairwise accuracy" in out


# ---------------------------------------------------------------- run

def test_run_equals_stages(fixtures_dir, e2e_server, tmp_path):
    e2e = fixtures_dir / "e2e"
    seg, gold = str(e2e / "segments.jsonl"), str(e2e / "gold.jsonl")
    fused, staged = tmp_path / "fused", tmp_path / "staged"
    assert main(["run", "--segments", seg, "--gold", gold, "--out", str(fused),
                 *client_flags(e2e_server.url), *E2E_RESAMPLES]) == 0
    assert main(["judge", "--segments", seg, "--out", str(staged), *client_flags(e2e_server.url)]) == 0
    assert main(["filter", "--judgments", str(staged / "judgments.jsonl"), "--segments", seg,
                 "--out", str(staged)]) == 0
    assert main(["evaluate", "--segments", seg, "--gold", gold, "--predictions", str(staged / "filtered.jsonl"),
                 "--unfiltered", str(staged / "judgments.jsonl"), "--filter-report",
                 str(staged / "filter_report.json"), "--out", str(staged), *E2E_RESAMPLES]) == 0
    for name in ("judgments.jsonl", "filtered.jsonl", "predicted_spans.jsonl", "filter_report.json",
                 "report.json", "report.md"):
        assert (fused / name).read_bytes() == (staged / name).read_bytes(), name
    report = json.loads((fused / "report.json").read_text())
    rejection = report["language_pairs"]["cs-de"]["rejection"]
    assert (rejection["before"], rejection["after"], rejection["rejection_rate"]) == (8, 6, 25.0)


def test_severity_map_flag(fixtures_dir, tmp_path):
    toy = fixtures_dir / "toy"
    assert main(["evaluate", "--segments", str(toy / "segments.jsonl"), "--gold", str(toy / "gold.jsonl"),
                 "--predictions", str(toy / "predictions.jsonl"), "--out", str(tmp_path),
                 "--severity-map", "critical=minor"]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["settings"]["severity_map"]["critical"] == "minor"


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "openqe", "--help"], capture_output=True, text=True, check=True)
    for cmd in ("judge", "filter", "evaluate", "report", "mock-serve", "run"):
        assert cmd in out.stdout


def test_mock_serve_subprocess(fixtures_dir):
    import socket
    import time
    import urllib.request

    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    proc = subprocess.Popen([sys.executable, "-m", "openqe", "mock-serve", str(fixtures_dir / "e2e" / "mock"),
                             "--port", str(port), "--fallback", "{}"], stderr=subprocess.PIPE, text=True)
    try:
        line = json.loads(proc.stderr.readline())
        assert line["msg"].endswith(f":{port}/v1")
        body = json.dumps({"model": "x", "messages": []}).encode()
        req = urllib.request.Request(f"http://127.0.0.1:{port}/v1/chat/completions", data=body, method="POST")
        for _ in range(50):
            try:
                with urllib.request.urlopen(req, timeout=2) as resp:
                    assert json.loads(resp.read())["choices"][0]["message"]["content"] == "{}"
                break
            except OSError:
                time.sleep(0.05)
    finally:
        proc.terminate()
        proc.wait(timeout=5)
