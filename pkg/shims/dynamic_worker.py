#!/usr/bin/env python3
"""Dynamic-language worker: loads one synthesized Python function from a
source path and serves invocations over the stdio wire protocol.

Frames (one JSON object per line):
    -> {"op":"load","source_path":str,"entry":str,"sig":canonical}
    <- {"ok":true} | {"ok":false,"detail":str}
    -> {"op":"invoke","id":int,"args":[TaggedValue...]}
    <- {"id":int,"status":"ok","value":TaggedValue,"elapsed_us":int}
       | {"id":int,"status":"exception","detail":str,"elapsed_us":int}
    -> {"op":"shutdown"}

The worker never times invocations out; the orchestrator kills it instead.
Standard library only: this file runs standalone, outside the package.
"""

import argparse
import io
import json
import locale
import math
import os
import random
import sys
import tempfile
import time
import types

RNG_SEED = 0x5EED
_SPECIAL_REALS = {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}


def _fix_environment():
    os.environ["TZ"] = "UTC"
    if hasattr(time, "tzset"):
        time.tzset()
    try:
        locale.setlocale(locale.LC_ALL, "C")
    except locale.Error:
        pass
    random.seed(RNG_SEED)


def _encode_real(r):
    if math.isnan(r):
        return "NaN"
    if math.isinf(r):
        return "Infinity" if r > 0 else "-Infinity"
    return r


def decode(tagged, resources, cleanup):
    tag = tagged["t"]
    if tag == "b":
        return bool(tagged["v"])
    if tag == "i":
        return int(tagged["v"])
    if tag == "f":
        raw = tagged["v"]
        return _SPECIAL_REALS[raw] if isinstance(raw, str) else float(raw)
    if tag in ("c", "s"):
        return tagged["v"]
    if tag == "a":
        return [decode(x, resources, cleanup) for x in tagged["v"]]
    if tag == "o":
        ns = types.SimpleNamespace()
        for name, sub in tagged["v"]:
            setattr(ns, name, decode(sub, resources, cleanup))
        return ns
    if tag == "file":
        content = resources.get(tagged["v"], "")
        fd, path = tempfile.mkstemp(prefix="ccfile-", text=True)
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        handle = open(path, "r")
        cleanup.append((handle, path))
        return handle
    if tag == "null":
        return None
    raise ValueError(f"unknown tag {tag!r}")


def encode(value):
    if isinstance(value, bool):  # bool outranks int
        return {"t": "b", "v": value}
    if isinstance(value, int):
        return {"t": "i", "v": value}
    if isinstance(value, float):
        return {"t": "f", "v": _encode_real(value)}
    if isinstance(value, str):
        return {"t": "s", "v": value}
    if isinstance(value, (list, tuple)):
        return {"t": "a", "v": [encode(x) for x in value]}
    if isinstance(value, set):
        items = sorted((encode(x) for x in value), key=lambda d: json.dumps(d, sort_keys=True))
        return {"t": "a", "v": items}
    if isinstance(value, dict):
        return {"t": "o", "v": [[str(k), encode(v)] for k, v in value.items()]}
    if isinstance(value, types.SimpleNamespace):
        return {"t": "o", "v": [[k, encode(v)] for k, v in vars(value).items()]}
    if value is None:
        return {"t": "null"}
    raise TypeError(f"unsupported-return: {type(value).__name__}")


def _arity_of(sig):
    args = sig.split(";", 1)[0]
    if not args.startswith("a:") or not args[2:]:
        return 0
    depth, count = 0, 1
    for ch in args[2:]:
        if ch in "<{":
            depth += 1
        elif ch in ">}":
            depth -= 1
        elif ch == "," and depth == 0:
            count += 1
    return count


class Worker:
    def __init__(self, resources):
        self.resources = resources
        self.entry = None
        self.fn = None
        self.arity = None
        self.real_stdout = sys.stdout

    def reply(self, obj):
        self.real_stdout.write(json.dumps(obj) + "\n")
        self.real_stdout.flush()

    def load(self, msg):
        if self.fn is not None:
            self.reply({"ok": False, "detail": "worker already holds a function"})
            return
        path, entry = msg["source_path"], msg["entry"]
        random.seed(RNG_SEED)  # reseed per load
        namespace = {"__name__": f"loaded_{entry}"}
        try:
            with open(path, "r", encoding="utf-8") as fh:
                source = fh.read()
            code = compile(source, path, "exec")
            # loaded code must not touch the protocol stream
            sys.stdout = io.StringIO()
            sys.stdin = io.StringIO()
            try:
                exec(code, namespace)
            finally:
                sys.stdout = io.StringIO()
            fn = namespace.get(entry)
            if not callable(fn):
                self.reply({"ok": False, "detail": f"no callable named {entry!r}"})
                return
            self.entry, self.fn = entry, fn
            self.arity = _arity_of(msg.get("sig", ""))
            self.reply({"ok": True})
        except Exception as exc:
            self.reply({"ok": False, "detail": f"{type(exc).__name__}: {exc}"})

    def invoke(self, msg):
        if self.fn is None:
            self.reply({"id": msg.get("id"), "status": "exception",
                        "detail": "LoadError: no function loaded", "elapsed_us": 0})
            return
        cleanup = []
        try:
            args = [decode(a, self.resources, cleanup) for a in msg["args"]]
        except Exception as exc:
            self.reply({"id": msg.get("id"), "status": "exception",
                        "detail": f"DecodeError: {exc}", "elapsed_us": 0})
            return
        if self.arity is not None and len(args) != self.arity:
            self.reply({"id": msg.get("id"), "status": "exception",
                        "detail": f"ArityError: expected {self.arity} args, got {len(args)}",
                        "elapsed_us": 0})
            return
        sys.stdout = io.StringIO()
        sys.stdin = io.StringIO()
        start = time.perf_counter_ns()
        try:
            result = self.fn(*args)
            elapsed = (time.perf_counter_ns() - start) // 1000
            payload = encode(result)
        except TypeError as exc:
            elapsed = (time.perf_counter_ns() - start) // 1000
            detail = str(exc)
            if detail.startswith("unsupported-return"):
                self.reply({"id": msg["id"], "status": "exception",
                            "detail": detail, "elapsed_us": elapsed})
            else:
                self.reply({"id": msg["id"], "status": "exception",
                            "detail": f"TypeError: {exc}", "elapsed_us": elapsed})
            return
        except BaseException as exc:
            elapsed = (time.perf_counter_ns() - start) // 1000
            self.reply({"id": msg["id"], "status": "exception",
                        "detail": f"{type(exc).__name__}: {exc}", "elapsed_us": elapsed})
            return
        finally:
            for handle, path in cleanup:
                try:
                    handle.close()
                    os.unlink(path)
                except OSError:
                    pass
        self.reply({"id": msg["id"], "status": "ok", "value": payload,
                    "elapsed_us": elapsed})

    def serve(self, stream):
        for line in stream:
            if not line.strip():
                continue
            try:
                msg = json.loads(line)
                op = msg.get("op")
            except (json.JSONDecodeError, AttributeError):
                self.reply({"error": "protocol: malformed frame"})
                continue
            if op == "shutdown":
                return
            if op == "load":
                self.load(msg)
            elif op == "invoke":
                self.invoke(msg)
            else:
                self.reply({"error": f"protocol: unknown op {op!r}"})


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--resources", default=None,
                        help="JSON file mapping resource ids to file contents")
    opts = parser.parse_args()
    resources = {}
    if opts.resources and os.path.exists(opts.resources):
        with open(opts.resources) as fh:
            resources = json.load(fh).get("entries", {})
    _fix_environment()
    worker = Worker(resources)
    stdin = sys.stdin
    worker.serve(stdin)


if __name__ == "__main__":
    main()
