"""Endpoint profiles, the HTTP client, and the bundled offline mock.

A profile names where requests go, which environment variable holds the
credential (the value itself is read at request time and never written to
any output), how fast requests may flow, and how failures retry. The mock
endpoint replays canned responses keyed by (image_id, batch_index) from a
JSON file so the whole adapter is testable without paid API access.
"""

from __future__ import annotations

import json
import os
import threading
import time
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

__all__ = ["EndpointProfile", "MockEndpoint", "HttpEndpoint", "open_endpoint"]


@dataclass(frozen=True)
class EndpointProfile:
    """Where and how to send prompts."""

    endpoint: str  # "mock:<canned.json>" or an http(s) URL
    credentials_env: Optional[str] = None
    rate_limit_per_second: Optional[float] = None
    max_retries: int = 2
    retry_backoff_seconds: float = 0.2
    parallelism: int = 4
    timeout_seconds: float = 30.0

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.rate_limit_per_second is not None and self.rate_limit_per_second <= 0:
            raise ValueError("rate_limit_per_second must be positive")


class _RateGate:
    """Serializes request starts to honor a requests-per-second cap."""

    def __init__(self, per_second: Optional[float]):
        self._interval = 1.0 / per_second if per_second else 0.0
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        if self._interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self._interval
        if delay > 0:
            time.sleep(delay)


class MockEndpoint:
    """Replays canned responses: {image_id: {batch_index: response_text}}."""

    def __init__(self, canned_path: str | Path, profile: EndpointProfile):
        self.profile = profile
        with open(canned_path, encoding="utf-8") as fh:
            self._canned = json.load(fh)
        self._gate = _RateGate(profile.rate_limit_per_second)

    def send(self, prompt: str, image_id: str, batch_index: int) -> str:
        self._gate.wait()
        try:
            return self._canned[image_id][str(batch_index)]
        except KeyError:
            raise RuntimeError(
                f"mock has no canned response for ({image_id!r}, batch {batch_index})"
            ) from None


class HttpEndpoint:
    """POSTs {"prompt", "image"} as JSON and returns the raw response body."""

    def __init__(self, url: str, profile: EndpointProfile):
        self.url = url
        self.profile = profile
        self._gate = _RateGate(profile.rate_limit_per_second)

    def send(self, prompt: str, image_id: str, batch_index: int) -> str:
        self._gate.wait()
        headers = {"Content-Type": "application/json"}
        if self.profile.credentials_env:
            secret = os.environ.get(self.profile.credentials_env, "")
            if secret:
                headers["Authorization"] = f"Bearer {secret}"
        body = json.dumps({"prompt": prompt, "image": image_id}).encode("utf-8")
        request = urllib.request.Request(self.url, data=body, headers=headers, method="POST")
        with urllib.request.urlopen(request, timeout=self.profile.timeout_seconds) as resp:
            return resp.read().decode("utf-8", errors="replace")


def open_endpoint(profile: EndpointProfile):
    if profile.endpoint.startswith("mock:"):
        return MockEndpoint(profile.endpoint[len("mock:") :], profile)
    if profile.endpoint.startswith(("http://", "https://")):
        return HttpEndpoint(profile.endpoint, profile)
    raise ValueError(
        f"unsupported endpoint {profile.endpoint!r}; expected mock:<path> or an http(s) URL"
    )
