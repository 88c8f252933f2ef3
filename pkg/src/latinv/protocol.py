"""Newline-delimited JSON wire protocol: one UTF-8 object per LF-terminated line.

Requests and responses:

    {"id":0,"op":"meta"}                    -> {"id":0,"latent_dim":N,"num_classes":K}
    {"id":i,"op":"query","codes":[[...]]}   -> {"id":i,"probs":[[...]]}
    anything the server rejects             -> {"id":i,"error":"message"}

Floats are serialized with Python's shortest round-trip repr, so float64
values survive the boundary exactly. Request ids are strictly increasing per
connection and responses come back in request order; a request line whose
JSON cannot be parsed (so no id is recoverable) is answered with id -1.

The client side supports two endpoint forms: "cmd:<shell words>" spawns a
child process and speaks over its stdin/stdout, "tcp:host:port" connects a
socket. Timeouts surface as oracle-unavailable errors carrying the cause.
"""

from __future__ import annotations

import json
import os
import select
import shlex
import socket
import subprocess
import sys
import time
from typing import IO, Any

from .errors import OracleUnavailableError, ProtocolError

MALFORMED_ID = -1


# -- server side ------------------------------------------------------------


def handle_request_line(oracle, line: str) -> dict:
    """Compute the response object for one raw request line.

    `oracle` needs `latent_dim`, `num_classes`, and `query(codes)`; any
    exception from scoring is reported in-protocol so the server loop
    survives bad requests.
    """
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        return {"id": MALFORMED_ID, "error": f"malformed JSON: {exc}"}
    if not isinstance(request, dict) or not isinstance(request.get("id"), int):
        return {"id": MALFORMED_ID, "error": "request must be an object with an integer id"}
    rid = request["id"]
    op = request.get("op")
    if op == "meta":
        return {"id": rid, "latent_dim": oracle.latent_dim, "num_classes": oracle.num_classes}
    if op == "query":
        codes = request.get("codes")
        if not isinstance(codes, list) or not codes:
            return {"id": rid, "error": "query needs a non-empty codes array"}
        try:
            probs = oracle.query(codes)
        except Exception as exc:  # reported in-protocol, never fatal
            return {"id": rid, "error": f"{type(exc).__name__}: {exc}"}
        return {"id": rid, "probs": [list(map(float, row)) for row in probs]}
    return {"id": rid, "error": f"unknown op {op!r}"}


def serve(oracle, infile: IO[str] | None = None, outfile: IO[str] | None = None) -> None:
    """Answer requests line by line until end-of-input (default: stdio)."""
    src = sys.stdin if infile is None else infile
    dst = sys.stdout if outfile is None else outfile
    for line in src:
        line = line.strip()
        if not line:
            continue
        dst.write(json.dumps(handle_request_line(oracle, line), separators=(",", ":")))
        dst.write("\n")
        dst.flush()


# -- client side ------------------------------------------------------------


class _LineReader:
    """Buffered LF-delimited reads over a raw file descriptor with timeouts."""

    def __init__(self, fd: int):
        self.fd = fd
        self.buffer = bytearray()

    def readline(self, timeout: float) -> str:
        deadline = time.monotonic() + timeout
        while True:
            pos = self.buffer.find(b"\n")
            if pos >= 0:
                raw = bytes(self.buffer[:pos])
                del self.buffer[: pos + 1]
                return raw.decode("utf-8")
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise OracleUnavailableError(f"timed out after {timeout:.1f}s waiting for a response line")
            ready, _, _ = select.select([self.fd], [], [], remaining)
            if not ready:
                continue
            try:
                chunk = os.read(self.fd, 65536)
            except OSError as exc:
                raise OracleUnavailableError(f"transport read failed: {exc}") from exc
            if not chunk:
                raise OracleUnavailableError("transport closed (end of stream)")
            self.buffer.extend(chunk)


class WireClient:
    """Sequential request/response client for one oracle connection."""

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self._next_id = 0
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        if endpoint.startswith("cmd:"):
            argv = shlex.split(endpoint[len("cmd:"):])
            if not argv:
                raise OracleUnavailableError("empty command endpoint")
            try:
                self._proc = subprocess.Popen(
                    argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=None
                )
            except OSError as exc:
                raise OracleUnavailableError(f"failed to launch {argv[0]!r}: {exc}") from exc
            assert self._proc.stdout is not None
            self._writer: IO[bytes] = self._proc.stdin  # type: ignore[assignment]
            self._reader = _LineReader(self._proc.stdout.fileno())
        elif endpoint.startswith("tcp:"):
            host, _, port = endpoint[len("tcp:"):].rpartition(":")
            if not host or not port.isdigit():
                raise OracleUnavailableError(f"bad tcp endpoint {endpoint!r}, need tcp:host:port")
            try:
                self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            except OSError as exc:
                raise OracleUnavailableError(f"failed to connect to {endpoint!r}: {exc}") from exc
            self._sock.setblocking(True)
            self._writer = self._sock.makefile("wb")
            self._reader = _LineReader(self._sock.fileno())
        else:
            raise OracleUnavailableError(f"unknown endpoint scheme in {endpoint!r} (use cmd: or tcp:)")

    def _roundtrip(self, request: dict) -> tuple[dict, str]:
        rid = self._next_id
        self._next_id += 1
        request = {"id": rid, **request}
        payload = json.dumps(request, separators=(",", ":")) + "\n"
        try:
            self._writer.write(payload.encode("utf-8"))
            self._writer.flush()
        except (OSError, ValueError) as exc:
            raise OracleUnavailableError(f"transport write failed: {exc}") from exc
        line = self._reader.readline(self.timeout)
        try:
            response = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError(f"unparseable response line: {line!r}") from None
        if not isinstance(response, dict):
            raise ProtocolError(f"response is not an object: {line!r}")
        if response.get("id") != rid:
            raise ProtocolError(f"response id {response.get('id')!r} does not match request id {rid}: {line!r}")
        if "error" in response:
            raise OracleUnavailableError(f"oracle reported an error: {response['error']}")
        return response, line

    def meta(self) -> tuple[int, int]:
        response, line = self._roundtrip({"op": "meta"})
        latent_dim = response.get("latent_dim")
        num_classes = response.get("num_classes")
        if not isinstance(latent_dim, int) or not isinstance(num_classes, int):
            raise ProtocolError(f"meta response missing integer dims: {line!r}")
        return latent_dim, num_classes

    def query(self, codes: list[list[float]]) -> tuple[list[list[float]], str]:
        response, line = self._roundtrip({"op": "query", "codes": codes})
        probs = response.get("probs")
        if not isinstance(probs, list):
            raise ProtocolError(f"query response missing probs: {line!r}")
        return probs, line

    def close(self) -> None:
        try:
            self._writer.close()
        except Exception:
            pass
        if self._proc is not None:
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
