"""Command-line entry point: ``openqe judge|filter|evaluate|report|mock-serve|run``.

Exit codes: 0 success, 1 fatal, 2 partial failure (some segments unjudged).
Logs go to stderr as one JSON object per line; only ``report`` prints to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
import time
from pathlib import Path

from openqe import pipeline
from openqe.llm_client import DEFAULT_TOKEN_ENV, ClientConfig
from openqe.meta_metrics import DEFAULT_RESAMPLES, DEFAULT_SEVERITY_MAP

logger = logging.getLogger("openqe")


class JsonLogFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return json.dumps({"level": record.levelname.lower(), "logger": record.name,
                           "msg": record.getMessage()}, ensure_ascii=False)


def _setup_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLogFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _severity_map(text: str | None) -> dict:
    """Parse ``critical=major,major=major,minor=minor``."""
    if not text:
        return dict(DEFAULT_SEVERITY_MAP)
    mapping = dict(DEFAULT_SEVERITY_MAP)
    for part in text.split(","):
        src, _, dst = part.partition("=")
        if not dst:
            raise argparse.ArgumentTypeError(f"bad severity mapping {part!r}")
        mapping[src.strip()] = dst.strip()
    return mapping


def _client_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model endpoint")
    g.add_argument("--endpoint", required=True, help="base URL, e.g. http://localhost:8000/v1")
    g.add_argument("--model", required=True)
    g.add_argument("--temperature", type=float, default=0.0)
    g.add_argument("--max-tokens", type=int, default=4096)
    g.add_argument("--timeout", type=float, default=300.0)
    g.add_argument("--max-retries", type=int, default=5)
    g.add_argument("--retry-backoff", type=float, default=1.0, help="initial backoff in seconds")
    g.add_argument("--parallelism", type=int, default=4)
    g.add_argument("--cache-dir")
    g.add_argument("--token-env", default=DEFAULT_TOKEN_ENV, help="environment variable holding the bearer token")
    g.add_argument("--extra-body", type=json.loads, default={},
                   help="JSON object merged into every request (endpoint-specific options)")


def _metric_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("meta-evaluation")
    g.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--severity-map", type=_severity_map, default=dict(DEFAULT_SEVERITY_MAP))
    g.add_argument("--scores-only", action="store_true", help="skip span metrics")
    g.add_argument("--csv", action="store_true", help="also write system_scores.csv")


def _filter_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-hallucination-filter", action="store_true")
    p.add_argument("--no-dedupe", action="store_true")


def _config(args) -> ClientConfig:
    return ClientConfig(
        endpoint_url=args.endpoint, model_name=args.model, temperature=args.temperature,
        max_output_tokens=args.max_tokens, request_timeout=args.timeout, max_retries=args.max_retries,
        parallelism=args.parallelism, cache_dir=args.cache_dir, backoff_initial=args.retry_backoff,
        token_env=args.token_env, extra_body=args.extra_body)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="openqe", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("judge", help="prompt the model for every segment")
    p.add_argument("--segments", required=True)
    p.add_argument("--out", required=True)
    _client_args(p)

    p = sub.add_parser("filter", help="drop hallucinated and duplicate errors")
    p.add_argument("--judgments", required=True)
    p.add_argument("--segments", required=True)
    p.add_argument("--out", required=True)
    _filter_args(p)

    p = sub.add_parser("evaluate", help="meta-evaluate against human ESA annotations")
    p.add_argument("--segments", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--predictions", help="filtered.jsonl / judgments.jsonl, or a gold-format file")
    p.add_argument("--unfiltered", help="judgments.jsonl before filtering, for the unfiltered span scores")
    p.add_argument("--filter-report", help="filter_report.json to include rejection rates")
    p.add_argument("--iaa", action="store_true", help="second annotator vs first instead of a model")
    p.add_argument("--out", required=True)
    _metric_args(p)

    p = sub.add_parser("report", help="print markdown tables for report.json files")
    p.add_argument("reports", nargs="+")

    p = sub.add_parser("mock-serve", help="serve canned chat completions from a fixture directory")
    p.add_argument("fixture_dir")
    p.add_argument("--port", type=int, default=8089)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--fallback", help="content returned for unknown requests")

    p = sub.add_parser("run", help="judge, filter and evaluate in one go")
    p.add_argument("--segments", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", required=True)
    _client_args(p)
    _filter_args(p)
    _metric_args(p)
    return parser


def _evaluate(args, out: Path, predictions, unfiltered=None, filter_report=None) -> None:
    report = pipeline.evaluate(
        args.segments, args.gold, out, predictions_path=predictions, unfiltered_path=unfiltered,
        filter_report_path=filter_report, resamples=args.resamples, seed=args.seed,
        severity_map=args.severity_map, scores_only=args.scores_only, iaa=getattr(args, "iaa", False))
    if args.csv:
        pipeline.write_system_scores_csv(report, out / "system_scores.csv")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        if args.command == "judge":
            return pipeline.judge(args.segments, args.out, _config(args))
        if args.command == "filter":
            pipeline.filter_stage(args.judgments, args.segments, args.out,
                                  not args.no_hallucination_filter, not args.no_dedupe)
            return pipeline.EXIT_OK
        if args.command == "evaluate":
            if not args.iaa and not args.predictions:
                raise ValueError("--predictions is required unless --iaa is given")
            _evaluate(args, Path(args.out), args.predictions, args.unfiltered, args.filter_report)
            return pipeline.EXIT_OK
        if args.command == "report":
            from openqe.report import render_markdown

            reports = [json.loads(Path(p).read_text(encoding="utf-8")) for p in args.reports]
            sys.stdout.write(render_markdown(reports))
            return pipeline.EXIT_OK
        if args.command == "mock-serve":
            from openqe.mock_server import mock_serve

            server = mock_serve(args.fixture_dir, args.port, args.fallback, args.host)
            logger.info("mock server listening on %s", server.url)
            signal.signal(signal.SIGTERM, lambda *_: sys.exit(0))
            try:
                while True:
                    time.sleep(3600)
            except (KeyboardInterrupt, SystemExit):
                server.stop()
            return pipeline.EXIT_OK
        if args.command == "run":
            out = Path(args.out)
            status = pipeline.judge(args.segments, out, _config(args))
            if status == pipeline.EXIT_FATAL:
                return status
            pipeline.filter_stage(out / "judgments.jsonl", args.segments, out,
                                  not args.no_hallucination_filter, not args.no_dedupe)
            _evaluate(args, out, out / "filtered.jsonl", out / "judgments.jsonl", out / "filter_report.json")
            return status
    except (OSError, ValueError) as exc:
        logger.error("%s", exc)
        return pipeline.EXIT_FATAL
    return pipeline.EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
