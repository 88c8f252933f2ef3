"""Black-box conformance harness for wire-protocol oracle servers.

Drives an adapter process through a fixed corpus (handshake, sequential and
pipelined queries, malformed lines, out-of-contract requests) and validates
every response against the protocol rules: ids echo requests, responses
arrive in request order one line each, probability rows are finite, in
range, and sum to one. With a stub spec supplied it additionally checks the
served numbers against the canonical arithmetic bit for bit.

Every violation, including a dead or silent server, lands in the report as
a failed entry; the harness itself does not raise on misbehavior.
"""

from __future__ import annotations

import json
import queue
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass, field

import numpy as np

from .config import StubSpec
from .stub import stub_probs

CORPUS_SEED = 2718
SUM_TOLERANCE = 1e-9
IDLE_GRACE = 0.2  # seconds to wait when asserting that no extra line arrives


@dataclass
class CheckEntry:
    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


@dataclass
class ConformanceReport:
    endpoint: str
    entries: list[CheckEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __str__(self) -> str:
        lines = [str(e) for e in self.entries]
        verdict = "conformant" if self.passed else "NOT conformant"
        lines.append(f"{self.endpoint}: {verdict} "
                     f"({sum(e.passed for e in self.entries)}/{len(self.entries)} checks)")
        return "\n".join(lines)


class _Transport:
    """Line transport with a timeout-capable reader; never raises on misuse."""

    def __init__(self, endpoint: str, timeout: float):
        self.timeout = timeout
        self.dead = False
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        self._writer = None
        if endpoint.startswith("cmd:"):
            self._proc = subprocess.Popen(
                shlex.split(endpoint[4:]),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
            )
            self._writer = self._proc.stdin
            source = self._proc.stdout
        elif endpoint.startswith("tcp:"):
            host, _, port = endpoint[4:].rpartition(":")
            try:
                self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            except OSError:
                self.dead = True
                return
            self._writer = self._sock.makefile("w")
            source = self._sock.makefile("r")
        else:
            raise ValueError(f"endpoint must start with 'cmd:' or 'tcp:', got {endpoint!r}")
        threading.Thread(target=self._pump, args=(source,), daemon=True).start()

    def _pump(self, source) -> None:
        try:
            for line in source:
                self._lines.put(line)
        except (OSError, ValueError):
            pass
        self._lines.put(None)  # EOF sentinel

    def send(self, line: str) -> bool:
        if self.dead:
            return False
        try:
            self._writer.write(line + "\n")
            self._writer.flush()
            return True
        except (OSError, ValueError):
            self.dead = True
            return False

    def recv(self, timeout: float | None = None) -> str | None:
        if self.dead:
            return None
        try:
            line = self._lines.get(timeout=self.timeout if timeout is None else timeout)
        except queue.Empty:
            return None
        if line is None:
            self.dead = True
            return None
        return line.rstrip("\n")

    def close(self) -> None:
        for closer in (self._writer, self._sock):
            try:
                if closer is not None:
                    closer.close()
            except (OSError, ValueError):
                pass
        if self._proc is not None:
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


def _parse(line: str | None) -> dict | None:
    if line is None:
        return None
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return None
    return obj if isinstance(obj, dict) else None


def _row_problems(response: dict | None, rid: int, batch: int, width: int) -> str | None:
    """None if a query response is well-formed, else the first violation."""
    if response is None:
        return "no parseable response (timeout, EOF, or junk line)"
    if response.get("id") != rid:
        return f"response id {response.get('id')!r} for request {rid}"
    if "error" in response:
        return f"unexpected error response: {response['error']!r}"
    rows = response.get("probs")
    if not isinstance(rows, list) or len(rows) != batch:
        return f"expected {batch} probability rows, got {type(rows).__name__}"
    for row in rows:
        if not isinstance(row, list) or len(row) != width:
            return f"row of width {len(row) if isinstance(row, list) else '?'}, expected {width}"
        arr = np.asarray(row, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            return "non-finite probability"
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            return f"probability outside [0, 1]: {arr.min()}..{arr.max()}"
        if abs(arr.sum() - 1.0) > SUM_TOLERANCE:
            return f"row sums to {float(arr.sum())!r}"
    return None


def _expect_error(response: dict | None, rid: int) -> str | None:
    """None if the response is an error correctly tagged with `rid`."""
    if response is None:
        return "no parseable response (timeout, EOF, or junk line)"
    if response.get("id") != rid:
        return f"response id {response.get('id')!r}, expected {rid}"
    if "error" not in response:
        return f"expected an error response, got keys {sorted(response)}"
    if "probs" in response:
        return "error response also carries probs"
    return None


def conformance_check(
    endpoint: str, expected_stub: StubSpec | None = None, timeout: float = 10.0
) -> ConformanceReport:
    """Run the full corpus against `endpoint` and report every check."""
    report = ConformanceReport(endpoint)
    entry = report.entries.append
    transport = _Transport(endpoint, timeout)
    try:
        return _run_corpus(transport, report, entry, expected_stub)
    finally:
        transport.close()


def _run_corpus(transport, report, entry, expected_stub) -> ConformanceReport:
    # -- handshake ---------------------------------------------------------
    transport.send('{"id":0,"op":"meta"}')
    meta = _parse(transport.recv())
    meta_ok = (
        meta is not None
        and meta.get("id") == 0
        and isinstance(meta.get("latent_dim"), int)
        and meta["latent_dim"] >= 1
        and isinstance(meta.get("num_classes"), int)
        and meta["num_classes"] >= 2
    )
    if not meta_ok:
        entry(CheckEntry("meta handshake", False, f"unusable meta response: {meta!r}"))
        entry(CheckEntry("corpus", False, "skipped: cannot size query corpus without meta"))
        return report
    n, k = meta["latent_dim"], meta["num_classes"]
    entry(CheckEntry("meta handshake", True, f"latent_dim={n} num_classes={k}"))

    rng = np.random.default_rng(CORPUS_SEED)
    scored: list[tuple[list[list[float]], list[list[float]]]] = []
    id_log: list[tuple[int, object]] = []  # (request id, response id seen)

    def query(rid: int, codes: list[list[float]]) -> dict | None:
        transport.send(json.dumps({"id": rid, "op": "query", "codes": codes},
                                  separators=(",", ":")))
        response = _parse(transport.recv())
        id_log.append((rid, None if response is None else response.get("id")))
        if response is not None and isinstance(response.get("probs"), list):
            scored.append((codes, response["probs"]))
        return response

    # -- sequential queries ------------------------------------------------
    problems = []
    for rid, batch in ((1, 1), (2, 4), (3, 7)):
        codes = rng.standard_normal((batch, n)).tolist()
        if rid == 3:
            codes[-1] = [40.0] * n  # far from everything: exercises any floor
        p = _row_problems(query(rid, codes), rid, batch, k)
        if p:
            problems.append(f"id {rid}: {p}")
    entry(CheckEntry("query responses well-formed", not problems,
                     "; ".join(problems) or "3 batches, rows finite, in range, sum to 1"))

    # -- pipelined burst: catches adapters that buffer or reorder ----------
    burst_codes = [rng.standard_normal((2, n)).tolist() for _ in range(3)]
    for rid, codes in zip((4, 5, 6), burst_codes):
        transport.send(json.dumps({"id": rid, "op": "query", "codes": codes},
                                  separators=(",", ":")))
    burst_problems = []
    for rid, codes in zip((4, 5, 6), burst_codes):
        response = _parse(transport.recv())
        id_log.append((rid, None if response is None else response.get("id")))
        if response is not None and isinstance(response.get("probs"), list):
            scored.append((codes, response["probs"]))
        p = _row_problems(response, rid, 2, k)
        if p:
            burst_problems.append(f"id {rid}: {p}")
    entry(CheckEntry("pipelined burst answered in order", not burst_problems,
                     "; ".join(burst_problems) or "3 back-to-back requests, ids 4,5,6 in order"))

    # -- malformed and out-of-contract requests ----------------------------
    transport.send("this is not json")
    p = _expect_error(_parse(transport.recv()), -1)
    entry(CheckEntry("malformed line answered with id -1", p is None, p or "error response, id -1"))

    p = _row_problems(query(7, rng.standard_normal((1, n)).tolist()), 7, 1, k)
    entry(CheckEntry("server survives malformed input", p is None, p or "next query answered"))

    transport.send(json.dumps({"id": 8, "op": "query", "codes": [[0.0] * (n + 1)]},
                              separators=(",", ":")))
    response = _parse(transport.recv())
    id_log.append((8, None if response is None else response.get("id")))
    p = _expect_error(response, 8)
    entry(CheckEntry("wrong-width query rejected in protocol", p is None,
                     p or "error response, same id"))

    p = _row_problems(query(9, rng.standard_normal((1, n)).tolist()), 9, 1, k)
    entry(CheckEntry("server survives rejected query", p is None, p or "next query answered"))

    transport.send('{"id":10,"op":"query","codes":[]}')
    p = _expect_error(_parse(transport.recv()), 10)
    entry(CheckEntry("empty codes rejected", p is None, p or "error response"))

    transport.send('{"id":11,"op":"shutdown"}')
    p = _expect_error(_parse(transport.recv()), 11)
    entry(CheckEntry("unknown op rejected", p is None, p or "error response"))

    transport.send('{"id":"x","op":"meta"}')
    p = _expect_error(_parse(transport.recv()), -1)
    entry(CheckEntry("non-integer id answered with id -1", p is None, p or "error response"))

    # -- global ordering and framing ---------------------------------------
    mismatches = [f"{got!r} for request {want}" for want, got in id_log if got != want]
    entry(CheckEntry("response ids echo request ids in order", not mismatches,
                     "; ".join(mismatches) or f"{len(id_log)} responses, all in request order"))

    extra = transport.recv(timeout=IDLE_GRACE)
    entry(CheckEntry("one response line per request", extra is None,
                     f"unsolicited extra line: {extra!r}" if extra is not None
                     else "no unsolicited lines"))

    # -- stub numerical equivalence ----------------------------------------
    if expected_stub is not None:
        worst = 0.0
        exact = True
        for codes, rows in scored:
            want = stub_probs(np.asarray(codes), expected_stub.prototypes,
                              expected_stub.temperature)
            got = np.asarray(rows, dtype=np.float64)
            if got.shape != want.shape or not np.array_equal(got, want):
                exact = False
                if got.shape == want.shape:
                    worst = max(worst, float(np.abs(got - want).max()))
        detail = (f"{sum(len(c) for c, _ in scored)} codes bit-identical" if exact
                  else f"served numbers deviate (worst abs diff {worst:.3e})")
        entry(CheckEntry("stub numerics match canonical arithmetic exactly", exact, detail))

    return report
