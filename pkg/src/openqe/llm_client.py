"""OpenAI-compatible chat-completions client with retries, caching and a bounded worker pool."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import socket
import tempfile
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from openqe.ingestion import Segment
from openqe.prompting import PromptPair, build_prompts

logger = logging.getLogger(__name__)

DEFAULT_TOKEN_ENV = "OPENQE_API_KEY"
RETRYABLE_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})


class ClientError(RuntimeError):
    pass


class TransportError(ClientError):
    """Retries exhausted; ``status`` is the last HTTP status, or None for network failures."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ProtocolError(ClientError):
    """Terminal non-2xx status or a response body that is not a chat completion."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class ClientConfig:
    endpoint_url: str
    model_name: str
    temperature: float = 0.0
    max_output_tokens: int = 4096
    request_timeout: float = 300.0
    max_retries: int = 5
    parallelism: int = 4
    cache_dir: str | None = None
    backoff_initial: float = 1.0
    backoff_factor: float = 2.0
    token_env: str = DEFAULT_TOKEN_ENV
    # endpoint-specific knobs (reasoning budgets etc.) merged verbatim into the request body
    extra_body: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class RawCompletion:
    item_id: str
    system_id: str
    model: str
    raw_text: str | None
    latency_s: float
    from_cache: bool
    error: str | None = None
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["warnings"] = list(self.warnings)
        return d


def cache_key(model_name: str, prompts: PromptPair, temperature: float) -> str:
    payload = json.dumps([model_name, prompts.system_text, prompts.user_text, float(temperature)],
                         ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseCache:
    """Content-addressed directory of JSON files, one per request."""

    def __init__(self, root):
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> dict | None:
        try:
            with open(self._path(key), encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return None
        except json.JSONDecodeError:
            logger.warning("ignoring corrupt cache entry %s", key)
            return None

    def put(self, key: str, entry: dict) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(entry, fh, ensure_ascii=False)
        os.replace(tmp, path)


def _post_json(url: str, body: dict, headers: dict, timeout: float) -> tuple[int, bytes]:
    req = urllib.request.Request(url, data=json.dumps(body).encode("utf-8"), headers=headers, method="POST")
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()


def request_body(prompts: PromptPair, config: ClientConfig) -> dict:
    body = {
        "model": config.model_name,
        "temperature": config.temperature,
        "max_tokens": config.max_output_tokens,
        "messages": prompts.messages(),
    }
    body.update(config.extra_body)
    return body


def complete(prompts: PromptPair, config: ClientConfig, key: tuple[str, str] = ("", ""),
             sleep: Callable[[float], None] = time.sleep, rng: random.Random | None = None) -> RawCompletion:
    """Fetch one completion, from the cache when possible.

    Transient failures (429, 5xx, timeouts, refused connections) are retried
    with exponential backoff and full jitter.
    """
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    ckey = cache_key(config.model_name, prompts, config.temperature)
    if cache is not None:
        hit = cache.get(ckey)
        if hit is not None:
            return RawCompletion(key[0], key[1], config.model_name, hit["raw_text"], hit["latency_s"], True,
                                 warnings=tuple(hit.get("warnings", ())))

    url = config.endpoint_url.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    token = os.environ.get(config.token_env)
    if token:
        headers["Authorization"] = f"Bearer {token}"
    body = request_body(prompts, config)
    rng = rng or random.Random()

    last_status: int | None = None
    last_reason = ""
    start = time.perf_counter()
    for attempt in range(config.max_retries + 1):
        if attempt:
            delay = rng.uniform(0, config.backoff_initial * config.backoff_factor ** (attempt - 1))
            logger.info("retry %d for %s/%s after %s (sleep %.2fs)", attempt, key[0], key[1], last_reason, delay)
            sleep(delay)
        try:
            status, payload = _post_json(url, body, headers, config.request_timeout)
        except (urllib.error.URLError, socket.timeout, TimeoutError, ConnectionError) as exc:
            last_status, last_reason = None, f"network error: {getattr(exc, 'reason', exc)}"
            continue
        if status in RETRYABLE_STATUS:
            last_status, last_reason = status, f"HTTP {status}"
            continue
        if not 200 <= status < 300:
            raise ProtocolError(f"HTTP {status}: {payload[:200].decode('utf-8', 'replace')}", status)
        try:
            data = json.loads(payload)
            choice = data["choices"][0]
            content = choice["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise ProtocolError("response is not a chat completion", status) from None
        if content is None:
            content = ""
        warnings = ()
        if choice.get("finish_reason") == "length":
            warnings = ("output truncated at max_output_tokens",)
            logger.warning("completion for %s/%s was truncated", key[0], key[1])
        latency = time.perf_counter() - start
        if cache is not None:
            cache.put(ckey, {"model": config.model_name, "raw_text": content, "latency_s": latency,
                             "warnings": list(warnings)})
        return RawCompletion(key[0], key[1], config.model_name, content, latency, False, warnings=warnings)
    raise TransportError(f"gave up after {config.max_retries + 1} attempts ({last_reason})", last_status)


def run_batch(segments: Sequence[Segment], config: ClientConfig,
              sleep: Callable[[float], None] = time.sleep) -> list[RawCompletion]:
    """One completion per segment, in input order, at most ``parallelism`` requests in flight.

    A segment that fails yields a record with ``error`` set; the batch goes on.
    """
    if not segments:
        raise ValueError("no segments to judge")

    def one(seg: Segment) -> RawCompletion:
        try:
            return complete(build_prompts(seg), config, seg.key, sleep=sleep)
        except ClientError as exc:
            logger.error("segment %s/%s failed: %s", seg.item_id, seg.system_id, exc)
            return RawCompletion(seg.item_id, seg.system_id, config.model_name, None, 0.0, False, error=str(exc))

    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        return list(pool.map(one, segments))
