"""HTTP server speaking the probe wire protocol.

Endpoints:
  GET  /v1/capabilities
  POST /v1/probe     {prefix, suffix, mask_length} -> {confidences}
  POST /v1/decode    {prefix, suffix, mask_length} -> {middle}
  POST /v1/tokenize  {text} -> {length}

Invalid requests answer 4xx with {"error": str}; adapter failures answer
500. Requests are handled serially (one forward pass at a time is the
realistic regime for large models), which is also what the advertised
max_concurrency of 1 promises.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, HTTPServer

from .models import BridgeError, BridgeRequestError

PROBE_FIELDS = ("prefix", "suffix", "mask_length")


class BridgeHandler(BaseHTTPRequestHandler):
    server_version = "cal-bridge/0.1"

    def log_message(self, *args):
        pass

    @property
    def model(self):
        return self.server.model

    def _reply(self, status: int, obj: dict) -> None:
        body = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BridgeRequestError(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise BridgeRequestError("request body must be a JSON object")
        return obj

    def do_GET(self):
        if self.path != "/v1/capabilities":
            self._reply(404, {"error": f"unknown path {self.path}"})
            return
        self._reply(200, {
            "model_id": self.model.model_id,
            "max_length": self.model.max_length,
            "supports_decode": self.model.supports_decode,
            "supports_tokenize": self.model.supports_tokenize,
            "max_concurrency": 1,
        })

    def do_POST(self):
        try:
            body = self._read_body()
            if self.path == "/v1/probe":
                self._reply(200, {"confidences": self._masked_call("probe", body)})
            elif self.path == "/v1/decode":
                self._reply(200, {"middle": self._masked_call("decode", body)})
            elif self.path == "/v1/tokenize":
                if not isinstance(body.get("text"), str):
                    raise BridgeRequestError("tokenize needs a string 'text' field")
                self._reply(200, {"length": self.model.tokenize(body["text"])})
            else:
                self._reply(404, {"error": f"unknown path {self.path}"})
        except BridgeError as exc:
            self._reply(exc.status, {"error": str(exc)})
        except Exception as exc:  # adapter failure: declare a server error
            self._reply(500, {"error": f"model failure: {exc}"})

    def _masked_call(self, operation: str, body: dict):
        for field in PROBE_FIELDS:
            if field not in body:
                raise BridgeRequestError(f"missing field {field!r}")
        if not isinstance(body["prefix"], str) or not isinstance(body["suffix"], str):
            raise BridgeRequestError("prefix and suffix must be strings")
        mask_length = body["mask_length"]
        if not isinstance(mask_length, int) or isinstance(mask_length, bool):
            raise BridgeRequestError(f"mask_length must be an integer, got {mask_length!r}")
        if mask_length < 1 or mask_length > self.model.max_length:
            raise BridgeRequestError(
                f"mask_length {mask_length} outside [1, {self.model.max_length}]")
        return getattr(self.model, operation)(body["prefix"], body["suffix"], mask_length)


def make_server(model, host: str = "127.0.0.1", port: int = 0) -> HTTPServer:
    server = HTTPServer((host, port), BridgeHandler)
    server.model = model
    return server


def serve(model, host: str, port: int) -> None:
    server = make_server(model, host, port)
    actual_port = server.server_address[1]
    print(f"cal-bridge serving {model.model_id!r} on http://{host}:{actual_port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
