"""HTTP client for a model bridge speaking the probe wire protocol.

Endpoints (JSON over HTTP):
  GET  /v1/capabilities -> {model_id, max_length, supports_decode,
                            supports_tokenize, max_concurrency}
  POST /v1/probe    {prefix, suffix, mask_length} -> {confidences: [...]}
  POST /v1/decode   {prefix, suffix, mask_length} -> {middle: str}
  POST /v1/tokenize {text} -> {length: int}

4xx/5xx responses carry {"error": str}. Transport failures (timeouts,
connection refusal) are retried with exponential backoff; protocol
violations and server-declared failures are not.
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request

from ..errors import ProtocolError, RemoteError, TransportError
from .base import BackendCapabilities, ProbeBackend, check_probe_length, check_probe_values

DEFAULT_TIMEOUT_SECS = 120.0
DEFAULT_RETRIES = 2


class RemoteBackend(ProbeBackend):
    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT_SECS,
                 retries: int = DEFAULT_RETRIES, backoff: float = 0.5):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.backend_id = f"remote:{self.base_url}"
        caps = self._request("GET", "/v1/capabilities")
        try:
            self.capabilities = BackendCapabilities(
                model_id=str(caps["model_id"]),
                max_length=int(caps["max_length"]),
                supports_decode=bool(caps["supports_decode"]),
                supports_tokenize=bool(caps["supports_tokenize"]),
                max_concurrency=int(caps["max_concurrency"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed capabilities response: {caps!r}") from exc

    def _request(self, method: str, path: str, body: dict | None = None) -> dict:
        url = self.base_url + path
        payload = None if body is None else json.dumps(body).encode("utf-8")
        last_transport: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            req = urllib.request.Request(
                url, data=payload, method=method,
                headers={"Content-Type": "application/json"})
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    raw = resp.read()
            except urllib.error.HTTPError as exc:
                raw = exc.read()
                try:
                    message = json.loads(raw.decode("utf-8"))["error"]
                except Exception:
                    raise ProtocolError(
                        f"{url} returned HTTP {exc.code} without an error object: "
                        f"{raw[:200]!r}") from exc
                raise RemoteError(f"{url} returned HTTP {exc.code}: {message}") from exc
            except (urllib.error.URLError, TimeoutError, OSError) as exc:
                last_transport = exc
                continue
            try:
                obj = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise ProtocolError(f"{url} returned non-JSON body: {raw[:200]!r}") from exc
            if not isinstance(obj, dict):
                raise ProtocolError(f"{url} returned a non-object body: {raw[:200]!r}")
            return obj
        raise TransportError(
            f"{url} unreachable after {self.retries + 1} attempts: {last_transport}")

    def probe(self, prefix: str, suffix: str, length: int) -> list[float]:
        check_probe_length(length)
        obj = self._request("POST", "/v1/probe",
                            {"prefix": prefix, "suffix": suffix, "mask_length": length})
        if "confidences" not in obj:
            raise ProtocolError(f"probe response missing 'confidences': {obj!r}")
        return check_probe_values(length, obj["confidences"], origin=self.backend_id)

    def decode(self, prefix: str, suffix: str, length: int) -> str:
        check_probe_length(length)
        obj = self._request("POST", "/v1/decode",
                            {"prefix": prefix, "suffix": suffix, "mask_length": length})
        if "middle" not in obj or not isinstance(obj["middle"], str):
            raise ProtocolError(f"decode response missing 'middle': {obj!r}")
        return obj["middle"]

    def tokenize(self, text: str) -> int:
        obj = self._request("POST", "/v1/tokenize", {"text": text})
        if "length" not in obj or not isinstance(obj["length"], int):
            raise ProtocolError(f"tokenize response missing integer 'length': {obj!r}")
        return obj["length"]
