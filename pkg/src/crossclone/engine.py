"""Execution engine: run synthesized functions over their signature's pool
through per-language worker processes, enforce the per-invocation timeout
from the orchestrator side, and assemble IOProfiles.

Wire protocol to workers (newline-delimited JSON over std streams):

    -> {"op":"load","source_path":str,"entry":str,"sig":canonical}
    <- {"ok":true} | {"ok":false,"detail":str}
    -> {"op":"invoke","id":int,"args":[TaggedValue...]}
    <- {"id":int,"status":"ok","value":TaggedValue,"elapsed_us":int}
       | {"id":int,"status":"exception","detail":str,"elapsed_us":int}
    -> {"op":"shutdown"}

Workers never self-time; no reply within T_L means the worker is killed and
replaced, and the remaining tuples still run on the fresh worker so
profiles stay positionally complete.
"""

from __future__ import annotations

import json
import math
import os
import select
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from crossclone.errors import LoadError
from crossclone.model import (
    IOProfile,
    Outcome,
    decode_value,
    encode_value,
    exception,
    from_native,
    ok,
    timeout,
    to_native,
)

LOAD_TIMEOUT_S = 30.0
GRACE_S = 0.5  # kill latency budget on top of T_L


@dataclass(frozen=True)
class ExecutionConfig:
    timeout_s: float = 5.0
    workers: int = 4
    pool_n: int = 256

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


class TransportError(Exception):
    """Worker process died or its streams broke mid-conversation."""


def _tuple_key(inputs) -> str:
    return json.dumps(
        [encode_value(v) for v in inputs], sort_keys=True, separators=(",", ":")
    )


class ReplayAdapter:
    """Test double returning tabulated outcomes keyed by exact input tuples;
    untabulated tuples yield an exception outcome."""

    def __init__(self, table):
        self._table = {_tuple_key(inputs): outcome for inputs, outcome in table}
        self.dead = False

    def load(self, fn):
        pass

    def invoke(self, inputs, timeout_s) -> Outcome:
        hit = self._table.get(_tuple_key(inputs))
        if hit is None:
            return exception("untabulated: no recorded outcome for input")
        return hit

    def close(self):
        pass


def replay_adapter(table) -> ReplayAdapter:
    return ReplayAdapter(table)


class OracleAdapter:
    """In-process worker backed by a Python callable over native values.
    Lets tests drive the whole pipeline with pure (or deliberately
    nondeterministic) fixtures and no subprocess."""

    def __init__(self, fn):
        self.fn = fn
        self.dead = False

    def load(self, fn):
        pass

    def invoke(self, inputs, timeout_s) -> Outcome:
        start = time.perf_counter_ns()
        try:
            result = self.fn(*[to_native(v) for v in inputs])
        except Exception as exc:  # captured with class name, like a worker
            elapsed = (time.perf_counter_ns() - start) // 1000
            return exception(f"{type(exc).__name__}: {exc}", elapsed)
        elapsed = (time.perf_counter_ns() - start) // 1000
        return ok(from_native(result), elapsed)

    def close(self):
        pass


class SubprocessAdapter:
    """One worker process speaking the wire protocol; state idle -> loaded
    -> (dead). A dead worker is replaced, never reused."""

    def __init__(self, argv, stderr_path=None):
        self.argv = list(argv)
        self._stderr_handle = open(stderr_path, "ab") if stderr_path else None
        self.proc = subprocess.Popen(
            self.argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=self._stderr_handle or subprocess.DEVNULL,
        )
        os.set_blocking(self.proc.stdout.fileno(), False)
        self._buf = bytearray()
        self._next_id = 0
        self.dead = False
        self.state = "idle"

    # --- framing ---

    def _send(self, obj):
        try:
            self.proc.stdin.write(
                (json.dumps(obj, separators=(",", ":")) + "\n").encode()
            )
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._mark_dead()
            raise TransportError(str(exc))

    def _recv_line(self, deadline):
        """One reply line, or None if the deadline passes first."""
        while True:
            nl = self._buf.find(b"\n")
            if nl >= 0:
                line = bytes(self._buf[:nl])
                del self._buf[: nl + 1]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            ready, _, _ = select.select([self.proc.stdout], [], [], remaining)
            if not ready:
                continue
            chunk = self.proc.stdout.read(65536)
            if chunk is None:
                continue
            if chunk == b"":
                self._mark_dead()
                raise TransportError("worker closed its stdout")
            self._buf += chunk

    # --- protocol ---

    def load(self, fn):
        self._send(
            {
                "op": "load",
                "source_path": str(fn.source_path),
                "entry": fn.entry,
                "sig": fn.canonical_sig,
            }
        )
        try:
            line = self._recv_line(time.monotonic() + LOAD_TIMEOUT_S)
        except TransportError as exc:
            raise LoadError(f"{fn.entry}: worker died during load ({exc})")
        if line is None:
            self._kill()
            raise LoadError(f"{fn.entry}: load timed out")
        reply = json.loads(line)
        if not reply.get("ok"):
            raise LoadError(f"{fn.entry}: {reply.get('detail', 'load failed')}")
        self.state = "loaded"

    def invoke(self, inputs, timeout_s) -> Outcome:
        self._next_id += 1
        self._send(
            {
                "op": "invoke",
                "id": self._next_id,
                "args": [encode_value(v) for v in inputs],
            }
        )
        line = self._recv_line(time.monotonic() + timeout_s)
        if line is None:
            self._kill()
            return timeout(int(math.ceil(timeout_s * 1e6)))
        reply = json.loads(line)
        if reply.get("status") == "ok":
            return ok(decode_value(reply["value"]), int(reply.get("elapsed_us", 0)))
        if reply.get("status") == "exception":
            return exception(
                reply.get("detail", "unknown"), int(reply.get("elapsed_us", 0))
            )
        return exception(f"protocol-error: {reply}")

    # --- lifecycle ---

    def _mark_dead(self):
        self.dead = True
        self.state = "dead"

    def _kill(self):
        self._mark_dead()
        try:
            self.proc.kill()
            self.proc.wait(timeout=GRACE_S)
        except Exception:
            pass

    def close(self):
        if not self.dead:
            try:
                self._send({"op": "shutdown"})
                self.proc.wait(timeout=GRACE_S)
            except Exception:
                pass
        self._kill()
        if self._stderr_handle is not None:
            self._stderr_handle.close()


def execute_profile(fn, pool, cfg: ExecutionConfig, adapter_factory) -> IOProfile:
    """One Outcome per pool tuple, in pool order.

    `fn` carries id/signature (plus source_path/entry/canonical_sig for
    subprocess workers); `adapter_factory()` yields a fresh adapter. A
    worker that times out or crashes is replaced; a tuple that crashed its
    worker is retried once on the replacement before being marked
    exception("adapter-crash"). A function that never loads raises
    LoadError and its profile is omitted by the caller.
    """
    adapter = adapter_factory()
    records = []
    try:
        adapter.load(fn)  # LoadError propagates: never executed
        for inputs in pool.tuples:
            outcome = None
            for attempt in (0, 1):
                if adapter.dead:
                    adapter.close()
                    adapter = adapter_factory()
                    try:
                        adapter.load(fn)
                    except LoadError as exc:
                        outcome = exception(f"adapter-crash: reload failed: {exc}")
                        break
                try:
                    outcome = adapter.invoke(inputs, cfg.timeout_s)
                    break
                except TransportError:
                    if attempt == 1:
                        outcome = exception("adapter-crash")
            if outcome is None:
                outcome = exception("adapter-crash")
            records.append((inputs, outcome))
    finally:
        adapter.close()
    return IOProfile(fn.id, fn.signature, tuple(records), pool.pool_key)


def execute_profiles(jobs, cfg: ExecutionConfig):
    """jobs: list of (fn, pool, adapter_factory). Functions run in parallel
    across `cfg.workers` executors; result order matches job order.
    Returns (profiles, load_failures)."""
    results = [None] * len(jobs)
    failures = []

    def run(idx):
        fn, pool, factory = jobs[idx]
        try:
            results[idx] = execute_profile(fn, pool, cfg, factory)
        except LoadError as exc:
            failures.append((fn.id, str(exc)))

    if cfg.workers == 1 or len(jobs) <= 1:
        for i in range(len(jobs)):
            run(i)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool_exec:
            list(pool_exec.map(run, range(len(jobs))))
    profiles = [p for p in results if p is not None]
    return profiles, failures
