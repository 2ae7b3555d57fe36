"""Chat-completions dispatch with a content-addressed disk cache.

Two backends share one interface: ``http`` posts the prompt as a single user
message to any chat-completions compatible endpoint; ``mock`` answers locally
(identity echo of the source sentence, or a fixture table keyed by job id).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import requests

from .errors import BackendError, CredentialError, EmptyResponseError, TransportError
from .prompt import AssembledPrompt

log = logging.getLogger(__name__)

RETRY_STATUS = frozenset({408, 429, 500, 502, 503, 504})


@dataclass(frozen=True)
class BackendConfig:
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "gpt-4-turbo"
    api_key_env_var: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    max_output_tokens: int = 1024
    requests_per_minute: int = 60
    max_retries: int = 5
    backend_kind: str = "http"
    cache_dir: Optional[str] = None
    timeout_s: float = 600.0
    backoff_base_s: float = 1.0
    mock_mode: str = "identity"
    fixture_path: Optional[str] = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.requests_per_minute < 1:
            raise ValueError("requests_per_minute must be >= 1")
        if self.backend_kind not in ("http", "mock"):
            raise ValueError(f"unknown backend kind {self.backend_kind!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "BackendConfig":
        data = dict(data)
        if "kind" in data:
            data["backend_kind"] = data.pop("kind")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown backend settings: {sorted(unknown)}")
        return cls(**data)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def make_job_id(lang: str, direction: str, config_label: str, index: int, prompt_text: str) -> str:
    return _sha256(json.dumps([lang, direction, config_label, index, _sha256(prompt_text)]))[:24]


@dataclass(frozen=True)
class TranslationJob:
    job_id: str
    prompt: AssembledPrompt
    lang: str
    direction: str
    config_label: str
    index: int = 0
    reference: str = field(default="", repr=False)

    @classmethod
    def create(cls, prompt: AssembledPrompt, lang: str, direction: str, config_label: str, index: int,
               reference: str = "") -> "TranslationJob":
        return cls(make_job_id(lang, direction, config_label, index, prompt.text), prompt, lang, direction,
                   config_label, index, reference)


@dataclass
class TranslationResult:
    job_id: str
    hypothesis: str = ""
    raw_response: Any = None
    cached: bool = False
    latency_ms: int = 0
    token_usage: Optional[tuple[int, int]] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def cache_key(model_name: str, temperature: float, prompt_text: str) -> str:
    return _sha256(json.dumps([model_name, float(temperature), prompt_text], ensure_ascii=False))


class DiskCache:
    """Append-only store: ``{root}/{key[:2]}/{key}.json``. Writes are atomic renames."""

    def __init__(self, root):
        self.root = Path(root)

    def path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> Optional[dict]:
        p = self.path(key)
        if not p.exists():
            return None
        with open(p, encoding="utf-8") as f:
            return json.load(f)

    def put(self, key: str, record: dict) -> None:
        p = self.path(key)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(record, f, ensure_ascii=False, sort_keys=True)
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


class RateLimiter:
    """Token bucket holding at most one token; refills at ``per_minute / 60`` per second."""

    def __init__(self, per_minute: int, clock=time.monotonic, sleep=time.sleep):
        self.interval = 60.0 / per_minute
        self._clock = clock
        self._sleep = sleep
        self._next = None
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            if self._next is None or self._next < now:
                self._next = now
            wait = self._next - now
            self._next += self.interval
        if wait > 0:
            self._sleep(wait)


def build_request_body(prompt_text: str, backend: BackendConfig) -> dict:
    return {
        "model": backend.model_name,
        "messages": [{"role": "user", "content": prompt_text}],
        "temperature": backend.temperature,
        "max_tokens": backend.max_output_tokens,
    }


def extract_text(payload: dict) -> str:
    try:
        content = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise EmptyResponseError("response has no choices[0].message.content") from None
    if content is None or not str(content).strip():
        raise EmptyResponseError("model returned an empty completion")
    return str(content)


def _usage(payload) -> Optional[tuple[int, int]]:
    u = payload.get("usage") if isinstance(payload, dict) else None
    if not u:
        return None
    return int(u.get("prompt_tokens", 0)), int(u.get("completion_tokens", 0))


_SUSPICIOUS_PREFIXES = ("translation:", "english translation:")


class Translator:
    """Owns the cache, the HTTP session and the shared rate limiter for one backend."""

    def __init__(self, backend: BackendConfig, cache_dir=None, session: Optional[requests.Session] = None):
        self.backend = backend
        root = cache_dir or backend.cache_dir
        self.cache = DiskCache(root) if root else None
        self.limiter = RateLimiter(backend.requests_per_minute)
        self.session = session
        self._fixture = None
        self.calls = 0
        self._calls_lock = threading.Lock()

    # -- backends

    def _mock_payload(self, job: TranslationJob) -> dict:
        mode = self.backend.mock_mode
        if mode == "identity":
            text = job.prompt.source_sentence
        elif mode == "fixture":
            if self._fixture is None:
                if not self.backend.fixture_path:
                    raise BackendError("mock fixture mode needs fixture_path")
                with open(self.backend.fixture_path, encoding="utf-8") as f:
                    self._fixture = json.load(f)
            if job.job_id not in self._fixture:
                raise BackendError(f"no fixture response for job {job.job_id}")
            text = self._fixture[job.job_id]
        else:
            raise BackendError(f"unknown mock mode {mode!r}")
        return {"choices": [{"message": {"role": "assistant", "content": text}}],
                "model": self.backend.model_name, "mock": mode}

    def _api_key(self) -> str:
        key = os.environ.get(self.backend.api_key_env_var, "").strip()
        if not key:
            raise CredentialError(f"environment variable {self.backend.api_key_env_var} is not set")
        return key

    def _http_payload(self, job: TranslationJob) -> dict:
        key = self._api_key()
        body = build_request_body(job.prompt.text, self.backend)
        headers = {"Authorization": f"Bearer {key}", "api-key": key, "Content-Type": "application/json"}
        session = self.session or requests
        attempt = 0
        while True:
            self.limiter.acquire()
            try:
                resp = session.post(self.backend.endpoint_url, json=body, headers=headers,
                                    timeout=self.backend.timeout_s)
            except requests.RequestException as exc:
                status, detail = None, f"{type(exc).__name__}: {exc}"
            else:
                status, detail = resp.status_code, resp.text[:200]
                if status in (401, 403):
                    raise CredentialError(f"endpoint rejected credentials (HTTP {status})")
                if 200 <= status < 300:
                    try:
                        return resp.json()
                    except ValueError:
                        raise TransportError("endpoint returned non-JSON body") from None
                if status not in RETRY_STATUS:
                    raise TransportError(f"HTTP {status}: {detail}")
            if attempt >= self.backend.max_retries:
                raise TransportError(f"giving up after {attempt + 1} attempts; last error: "
                                     f"{'HTTP ' + str(status) if status else detail}")
            delay = self.backend.backoff_base_s * (2 ** attempt)
            log.warning("request for job %s failed (%s); retrying in %.2fs", job.job_id, status or detail, delay)
            time.sleep(delay)
            attempt += 1

    # -- public

    def translate(self, job: TranslationJob) -> TranslationResult:
        key = cache_key(self.backend.model_name, self.backend.temperature, job.prompt.text)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                payload = hit["response"]
                return TranslationResult(job.job_id, extract_text(payload).strip(), payload, True, 0,
                                         _usage(payload))
        start = time.monotonic()
        if self.backend.backend_kind == "mock":
            payload = self._mock_payload(job)
        else:
            payload = self._http_payload(job)
        with self._calls_lock:
            self.calls += 1
        latency = int((time.monotonic() - start) * 1000)
        hypothesis = extract_text(payload).strip()
        if hypothesis.lower().startswith(_SUSPICIOUS_PREFIXES):
            log.info("job %s: completion starts with a label echo: %r", job.job_id, hypothesis[:40])
        if self.cache is not None:
            self.cache.put(key, {
                "model": self.backend.model_name,
                "temperature": self.backend.temperature,
                "prompt_sha256": _sha256(job.prompt.text),
                "response": payload,
            })
        return TranslationResult(job.job_id, hypothesis, payload, False, latency, _usage(payload))

    def run_batch(self, jobs: Sequence[TranslationJob], max_in_flight: int = 4) -> list[TranslationResult]:
        """Translate every job; results come back in job order, failures as ``error`` slots."""
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")

        def one(job):
            try:
                return self.translate(job)
            except BackendError as exc:
                return TranslationResult(job.job_id, error=f"{type(exc).__name__}: {exc}")

        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            return list(pool.map(one, jobs))


def translate(job: TranslationJob, backend: BackendConfig, cache_dir=None) -> TranslationResult:
    return Translator(backend, cache_dir).translate(job)


def run_batch(jobs: Sequence[TranslationJob], backend: BackendConfig, max_in_flight: int = 4,
              cache_dir=None) -> list[TranslationResult]:
    return Translator(backend, cache_dir).run_batch(jobs, max_in_flight)
