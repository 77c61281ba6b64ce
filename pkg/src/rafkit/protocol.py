"""Wire protocol for external forecasters and embedders.

Newline-delimited JSON frames, either over a child process's stdin/stdout
(endpoint ``exec:CMD ARGS...``) or via HTTP POST (endpoint ``http://...``).

Request  {"id", "role": "forecast"|"embed", "horizon", "target_indices",
          "matrix", "variables"}   (matrix row-major, oldest row first)
Response {"id", "matrix"}  — horizon x |targets| for "forecast",
                             one row of k_emb floats for "embed"
Error    {"id", "error"}

All numbers must be finite IEEE-754 doubles; NaN/Inf anywhere is a
protocol violation.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import time
import urllib.error
import urllib.request

import numpy as np

MAX_ATTEMPTS = 3
BACKOFF_SECONDS = 0.25


class ProtocolError(RuntimeError):
    """Malformed or non-conforming frame."""


class TransportError(RuntimeError):
    """Endpoint unreachable after retries."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class ContractViolationError(RuntimeError):
    """Response decoded fine but violates the shape/finiteness contract."""


def encode_request(
    request_id: str,
    role: str,
    matrix: np.ndarray,
    horizon: int = 0,
    target_indices=(),
    variables=(),
) -> str:
    mat = np.asarray(matrix, dtype=float)
    if not np.isfinite(mat).all():
        raise ProtocolError("request matrix contains non-finite values")
    frame = {
        "id": request_id,
        "role": role,
        "horizon": int(horizon),
        "target_indices": [int(i) for i in target_indices],
        "matrix": mat.tolist(),
        "variables": [str(v) for v in variables],
    }
    return json.dumps(frame, allow_nan=False)


def _reject_constant(name: str):
    raise ValueError(f"non-finite JSON constant {name!r}")


def parse_frame(line: str) -> dict:
    """Decode one frame, rejecting NaN/Infinity literals."""
    excerpt = line.strip()[:200]
    try:
        frame = json.loads(line, parse_constant=_reject_constant)
    except ValueError as exc:
        raise ProtocolError(f"malformed frame: {exc}; payload: {excerpt!r}") from None
    if not isinstance(frame, dict):
        raise ProtocolError(f"frame is not a JSON object; payload: {excerpt!r}")
    return frame


def decode_response(line: str, request_id: str, rows: int, cols: int) -> np.ndarray:
    """Validate an expected-matrix response against the shape contract."""
    frame = parse_frame(line)
    if frame.get("id") != request_id:
        raise ProtocolError(
            f"response id {frame.get('id')!r} does not match request {request_id!r}"
        )
    if "error" in frame:
        raise ProtocolError(f"endpoint returned error: {frame['error']}")
    if "matrix" not in frame:
        raise ProtocolError(f"response lacks 'matrix'; payload: {line.strip()[:200]!r}")
    try:
        matrix = np.asarray(frame["matrix"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"matrix not numeric: {exc}") from None
    if matrix.ndim != 2 or matrix.shape != (rows, cols):
        raise ContractViolationError(
            f"expected a {rows}x{cols} matrix, got shape {matrix.shape}"
        )
    if not np.isfinite(matrix).all():
        raise ContractViolationError("response matrix contains non-finite values")
    return matrix


class StdioEndpoint:
    """Child process speaking one NDJSON frame per line on stdin/stdout."""

    def __init__(self, command: str):
        self.command = shlex.split(command)
        self._proc: subprocess.Popen | None = None

    def _ensure_process(self):
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )

    def roundtrip(self, line: str) -> str:
        failure = None
        for attempt in range(1, MAX_ATTEMPTS + 1):
            if attempt > 1:
                time.sleep(BACKOFF_SECONDS * 2 ** (attempt - 2))
            try:
                self._ensure_process()
                assert self._proc.stdin is not None and self._proc.stdout is not None
                self._proc.stdin.write(line + "\n")
                self._proc.stdin.flush()
                reply = self._proc.stdout.readline()
                if reply:
                    return reply
                failure = "child process closed stdout"
            except (BrokenPipeError, OSError) as exc:
                failure = str(exc)
            self.close()
        raise TransportError(
            f"stdio endpoint {self.command!r} failed: {failure}", MAX_ATTEMPTS
        )

    def close(self):
        if self._proc is not None:
            try:
                if self._proc.stdin:
                    self._proc.stdin.close()
                self._proc.terminate()
                self._proc.wait(timeout=5)
            except Exception:
                self._proc.kill()
            self._proc = None


class HttpEndpoint:
    """POSTs each frame to a URL and reads the response body as one frame."""

    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url
        self.timeout = timeout

    def roundtrip(self, line: str) -> str:
        failure = None
        for attempt in range(1, MAX_ATTEMPTS + 1):
            if attempt > 1:
                time.sleep(BACKOFF_SECONDS * 2 ** (attempt - 2))
            req = urllib.request.Request(
                self.url,
                data=line.encode("utf-8"),
                headers={"Content-Type": "application/json"},
            )
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    return resp.read().decode("utf-8")
            except urllib.error.HTTPError as exc:
                body = exc.read().decode("utf-8", errors="replace")
                failure = f"HTTP {exc.code}: {body[:200]}"
            except (urllib.error.URLError, OSError) as exc:
                failure = str(exc)
        raise TransportError(f"http endpoint {self.url} failed: {failure}", MAX_ATTEMPTS)

    def close(self):
        pass


def open_endpoint(spec: str):
    if spec.startswith("exec:"):
        return StdioEndpoint(spec[len("exec:") :])
    if spec.startswith("http://") or spec.startswith("https://"):
        return HttpEndpoint(spec)
    raise ValueError(
        f"endpoint must be 'exec:CMD ...' or an http(s) URL, got {spec!r}"
    )


class WireClient:
    """Typed request helpers over one endpoint."""

    def __init__(self, endpoint):
        self.endpoint = open_endpoint(endpoint) if isinstance(endpoint, str) else endpoint
        self._counter = 0

    def _next_id(self) -> str:
        self._counter += 1
        return f"req-{self._counter}"

    def forecast(
        self, matrix: np.ndarray, horizon: int, target_indices, variables=()
    ) -> np.ndarray:
        request_id = self._next_id()
        line = encode_request(
            request_id, "forecast", matrix, horizon, target_indices, variables
        )
        reply = self.endpoint.roundtrip(line)
        return decode_response(reply, request_id, horizon, len(tuple(target_indices)))

    def embed(self, matrix: np.ndarray, k_emb: int) -> np.ndarray:
        request_id = self._next_id()
        line = encode_request(request_id, "embed", matrix)
        reply = self.endpoint.roundtrip(line)
        return decode_response(reply, request_id, 1, k_emb)[0]

    def close(self):
        self.endpoint.close()
