"""Grey-box input generation.

Constants mined from the corpus become the peaks of per-type multi-modal
samplers (80% of the mass shared over peaks proportional to source counts,
20% a uniform exploration tail over the type's bounds).  Pools of input
tuples are memoized on disk by canonical argument signature, so every
function sharing a signature is executed on the same inputs.  Validation
draws fresh pools from per-kind triangular distributions in a disjoint
seed namespace.
"""

from __future__ import annotations

import ast
import hashlib
import json
import math
import random
import string as string_mod
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from crossclone.errors import StoreError, UnsupportedType
from crossclone.model import (
    NULL,
    PRIMITIVE_KINDS,
    REAL_TAIL_BOUND,
    LanguageId,
    TypeDescriptor,
    VArr,
    VBool,
    VChar,
    VFile,
    VInt,
    VObj,
    VReal,
    VStr,
    canonical_args,
    encode_value,
    decode_value,
    int_bounds,
    int_desc,
)

ARRAY_SIZE_CAP = 32
NEGATIVE_RETRIES = 8
STRING_LENGTH_CAP = 64
PEAK_MASS = 0.8
TAIL_MASS = 0.2
PRINTABLE = string_mod.digits + string_mod.ascii_letters + " .,:;-_()[]"

DEFAULT_CONSTANTS = {
    "int": (-1, 0, 1),
    "real": (-1.0, 0.0, 1.0),
    "char": ("a",),
    "string": ("",),
}


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary parts (independent of hash salt)."""
    blob = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "big")


def _rng(*parts) -> random.Random:
    return random.Random(derive_seed(*parts))


# --- constant mining -------------------------------------------------------


@dataclass
class ConstantBank:
    """Literals mined per primitive kind, with source occurrence counts."""

    ints: Counter = field(default_factory=Counter)
    reals: Counter = field(default_factory=Counter)
    chars: Counter = field(default_factory=Counter)
    strings: Counter = field(default_factory=Counter)

    def counter(self, kind: str) -> Counter:
        return {"int": self.ints, "real": self.reals, "char": self.chars,
                "string": self.strings}[kind]

    def with_defaults(self) -> "ConstantBank":
        """Inject the default constants into any kind the corpus left empty."""
        bank = ConstantBank(
            Counter(self.ints), Counter(self.reals),
            Counter(self.chars), Counter(self.strings),
        )
        for kind, defaults in DEFAULT_CONSTANTS.items():
            counter = bank.counter(kind)
            if not counter:
                counter.update(defaults)
        return bank

    def alphabet(self) -> str:
        mined = "".join(sorted({ch for s in self.strings for ch in s} | set(self.chars)))
        return mined or PRINTABLE


def _mine_python(source: str, bank: ConstantBank):
    for node in ast.walk(ast.parse(source)):
        if not isinstance(node, ast.Constant):
            continue
        v = node.value
        if isinstance(v, bool):
            continue
        if isinstance(v, int):
            bank.ints[v] += 1
        elif isinstance(v, float):
            bank.reals[v] += 1
        elif isinstance(v, str):
            bank.strings[v] += 1
            if len(v) == 1:
                bank.chars[v] += 1


def _mine_cfamily(source: str, language: LanguageId, bank: ConstantBank):
    from crossclone.segmenter.cfamily import tokenize

    for tok in tokenize(source):
        if tok.kind == "number":
            text = tok.text.rstrip("lLfFdDn")
            try:
                if any(c in text for c in ".eE") and not text.startswith(("0x", "0X")):
                    bank.reals[float(text)] += 1
                else:
                    bank.ints[int(text, 0)] += 1
            except ValueError:
                continue
        elif tok.kind == "string":
            body = tok.text[1:-1]
            bank.strings[body] += 1
            if len(body) == 1:
                bank.chars[body] += 1
        elif tok.kind == "char":
            bank.chars[tok.text[1:-1]] += 1


def mine_constants(sources) -> ConstantBank:
    """sources: iterable of (source_text, LanguageId). Unparsable sources
    contribute nothing. Defaults are injected for kinds left empty."""
    bank = ConstantBank()
    for text, language in sources:
        try:
            if language.name == "python":
                _mine_python(text, bank)
            else:
                _mine_cfamily(text, language, bank)
        except SyntaxError:
            continue
    return bank.with_defaults()


# --- multi-modal samplers --------------------------------------------------


def _int_spread(center: int) -> float:
    return max(1.0, abs(center) / 16.0)


def _real_spread(center: float) -> float:
    return abs(center) / 16.0 + 1e-3


@dataclass(frozen=True)
class Peak:
    center: float
    weight: float  # of the whole mixture, peaks sum to PEAK_MASS
    spread: float


class MultiModalSampler:
    """Mixture of triangular kernels at mined constants plus a uniform
    tail; each draw is fully determined by (seed, draw index)."""

    def __init__(self, kind: str, bank: ConstantBank, bounds, seed: int):
        if kind not in ("int", "real"):
            raise ValueError("numeric sampler only handles int/real")
        self.kind = kind
        self.bounds = bounds
        self.seed = seed
        counter = bank.counter(kind)
        total = sum(counter.values())
        spread_of = _int_spread if kind == "int" else _real_spread
        self.peaks = tuple(
            Peak(float(c), PEAK_MASS * n / total, spread_of(c))
            for c, n in sorted(counter.items())
        )

    def draw(self, index):
        rng = _rng("mm", self.kind, self.seed, self.bounds, index)
        return self.draw_with(rng)

    def draw_with(self, rng: random.Random):
        lo, hi = self.bounds
        roll = rng.random()
        if roll >= PEAK_MASS or not self.peaks:
            x = rng.randint(int(lo), int(hi)) if self.kind == "int" else rng.uniform(lo, hi)
        else:
            acc = 0.0
            peak = self.peaks[-1]
            for p in self.peaks:
                acc += p.weight
                if roll < acc:
                    peak = p
                    break
            x = rng.triangular(peak.center - peak.spread, peak.center + peak.spread, peak.center)
        if self.kind == "int":
            x = math.floor(x + 0.5)
        return min(max(x, lo), hi)


# --- file resources --------------------------------------------------------


@dataclass
class FileResourcePool:
    """Immutable id -> content strings backing file-typed arguments."""

    entries: dict = field(default_factory=dict)
    provenance: str = "constant-sampled"

    @classmethod
    def from_seed_files(cls, paths, seed: int, mutants_per_seed: int = 32):
        entries = {}
        for path in paths:
            data = Path(path).read_bytes()
            for k in range(mutants_per_seed):
                rng = _rng("filemut", seed, str(path), k)
                entries[f"res-{len(entries):04d}"] = _mutate_bytes(data, rng).decode(
                    "utf-8", errors="replace"
                )
        return cls(entries, provenance="seeded-mutation")

    @classmethod
    def from_bank(cls, bank: ConstantBank, seed: int, count: int = 16):
        entries = {}
        strings = sorted(bank.strings)
        for k in range(count):
            rng = _rng("fileconst", seed, k)
            lines = [rng.choice(strings) for _ in range(rng.randint(1, 5))]
            entries[f"res-{k:04d}"] = "\n".join(lines)
        return cls(entries, provenance="constant-sampled")

    def sample_id(self, rng: random.Random) -> str:
        ids = sorted(self.entries)
        if not ids:
            raise StoreError("file resource pool is empty")
        return rng.choice(ids)


def _mutate_bytes(data: bytes, rng: random.Random) -> bytes:
    out = bytearray(data or b"x")
    edits = max(1, int(len(out) * rng.uniform(0.01, 0.05)))
    for _ in range(edits):
        op = rng.choice(("insert", "delete", "replace"))
        pos = rng.randrange(len(out)) if out else 0
        if op == "insert":
            out.insert(pos, rng.randrange(32, 127))
        elif op == "delete" and len(out) > 1:
            del out[pos]
        else:
            out[pos] = rng.randrange(32, 127)
    return bytes(out)


# --- value generation ------------------------------------------------------


class InputGenerator:
    """Draws Values for any supported descriptor, deterministically keyed
    by an explicit draw path."""

    def __init__(self, bank: ConstantBank, seed: int, resources: FileResourcePool = None):
        self.bank = bank
        self.seed = seed
        self.resources = resources or FileResourcePool.from_bank(bank, seed)
        self._samplers = {}

    def _sampler(self, kind: str, bounds) -> MultiModalSampler:
        key = (kind, bounds)
        if key not in self._samplers:
            self._samplers[key] = MultiModalSampler(kind, self.bank, bounds, self.seed)
        return self._samplers[key]

    def int_sampler(self, width: int = 64) -> MultiModalSampler:
        return self._sampler("int", int_bounds(width))

    def real_sampler(self) -> MultiModalSampler:
        return self._sampler("real", (-REAL_TAIL_BOUND, REAL_TAIL_BOUND))

    def _array_size(self, rng: random.Random, width: int = 64) -> int:
        sampler = self.int_sampler(width)
        for _ in range(NEGATIVE_RETRIES):
            size = sampler.draw_with(rng)
            if size >= 0:
                return min(int(size), ARRAY_SIZE_CAP)
        return 0

    def _string(self, rng: random.Random) -> str:
        length = self._array_size(rng)
        length = min(length, STRING_LENGTH_CAP)
        alphabet = self.bank.alphabet()
        chars = []
        for _ in range(length):
            if rng.random() < 0.8 and alphabet:
                chars.append(rng.choice(alphabet))
            else:
                chars.append(rng.choice(PRINTABLE))
        return "".join(chars)

    def _char(self, rng: random.Random) -> str:
        mined = sorted(self.bank.chars)
        if rng.random() < 0.8 and mined:
            weights = [self.bank.chars[c] for c in mined]
            return rng.choices(mined, weights=weights, k=1)[0]
        return rng.choice(PRINTABLE)

    def sample_value(self, desc: TypeDescriptor, path: str):
        rng = _rng("val", self.seed, path)
        return self._sample(desc, path, rng)

    def _sample(self, desc: TypeDescriptor, path: str, rng: random.Random):
        kind = desc.kind
        if kind == "bool":
            return VBool(rng.random() < 0.5)
        if kind == "int":
            return VInt(int(self.int_sampler(desc.bit_width).draw_with(rng)))
        if kind == "real":
            return VReal(float(self.real_sampler().draw_with(rng)))
        if kind == "char":
            return VChar(self._char(rng))
        if kind == "string":
            return VStr(self._string(rng))
        if kind == "array":
            size = self._array_size(rng)
            return VArr(
                tuple(
                    self.sample_value(desc.element, f"{path}[{k}]")
                    for k in range(size)
                )
            )
        if kind == "object":
            return VObj(
                tuple(
                    (name, self.sample_value(d, f"{path}.{name}"))
                    for name, d in desc.members
                )
            )
        if kind == "file":
            return VFile(self.resources.sample_id(rng))
        if kind == "generic":
            prim = rng.choice(PRIMITIVE_KINDS)
            prim_desc = int_desc(64) if prim == "int" else (
                TypeDescriptor("real", bit_width=64) if prim == "real" else TypeDescriptor(prim)
            )
            return self._sample(prim_desc, path, rng)
        raise UnsupportedType(str(desc))

    # --- triangular fuzzing (validation pools) ---

    def fuzz_value(self, desc: TypeDescriptor, path: str):
        rng = _rng("fuzzval", self.seed, path)
        return self._fuzz(desc, path, rng)

    def _fuzz(self, desc: TypeDescriptor, path: str, rng: random.Random):
        kind = desc.kind
        if kind == "bool":
            return VBool(rng.random() < 0.5)
        if kind == "int":
            lo, hi = int_bounds(desc.bit_width)
            return VInt(min(max(math.floor(rng.triangular(lo, hi, 0) + 0.5), lo), hi))
        if kind == "real":
            return VReal(rng.triangular(-REAL_TAIL_BOUND, REAL_TAIL_BOUND, 0.0))
        if kind == "char":
            return VChar(rng.choice(PRINTABLE))
        if kind == "string":
            length = int(rng.triangular(0, STRING_LENGTH_CAP, 0))
            return VStr("".join(rng.choice(PRINTABLE) for _ in range(length)))
        if kind == "array":
            size = int(rng.triangular(0, ARRAY_SIZE_CAP, 0))
            return VArr(
                tuple(self.fuzz_value(desc.element, f"{path}[{k}]") for k in range(size))
            )
        if kind == "object":
            return VObj(
                tuple((name, self.fuzz_value(d, f"{path}.{name}")) for name, d in desc.members)
            )
        if kind == "file":
            return VFile(self.resources.sample_id(rng))
        if kind == "generic":
            prim = rng.choice(PRIMITIVE_KINDS)
            prim_desc = int_desc(64) if prim == "int" else (
                TypeDescriptor("real", bit_width=64) if prim == "real" else TypeDescriptor(prim)
            )
            return self._fuzz(prim_desc, path, rng)
        raise UnsupportedType(str(desc))


# --- pools and the memoizing store ----------------------------------------


@dataclass(frozen=True)
class InputPool:
    pool_key: str
    tuples: tuple  # tuple[tuple[Value, ...], ...]
    seed: int
    size: int

    def __post_init__(self):
        object.__setattr__(self, "tuples", tuple(tuple(t) for t in self.tuples))


def _pool_payload(pool: InputPool) -> str:
    rows = [[encode_value(v) for v in row] for row in pool.tuples]
    return json.dumps(rows, sort_keys=True, separators=(",", ":"))


class PoolStore:
    """One JSON file per (pool_key, seed, n) with a checksummed payload."""

    FORMAT = 1

    def __init__(self, root):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreError(f"cannot create pool store at {self.root}: {exc}")
        self.writes = 0

    def _path(self, key: str, seed: int, n: int) -> Path:
        digest = hashlib.sha1(f"{key}|{seed}|{n}".encode()).hexdigest()[:16]
        return self.root / f"{digest}.json"

    def load(self, key: str, seed: int, n: int):
        path = self._path(key, seed, n)
        if not path.exists():
            return None
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreError(f"unreadable pool file {path}: {exc}")
        if doc.get("format") != self.FORMAT:
            raise StoreError(f"pool format mismatch in {path}")
        payload = json.dumps(doc["tuples"], sort_keys=True, separators=(",", ":"))
        if hashlib.sha1(payload.encode()).hexdigest() != doc.get("checksum"):
            raise StoreError(f"checksum mismatch in pool file {path}")
        tuples = tuple(
            tuple(decode_value(v) for v in row) for row in doc["tuples"]
        )
        return InputPool(doc["key"], tuples, doc["seed"], doc["n"])

    def save(self, pool: InputPool):
        path = self._path(pool.pool_key, pool.seed, pool.size)
        payload = _pool_payload(pool)
        doc = {
            "format": self.FORMAT,
            "key": pool.pool_key,
            "seed": pool.seed,
            "n": pool.size,
            "checksum": hashlib.sha1(payload.encode()).hexdigest(),
            "tuples": json.loads(payload),
        }
        try:
            path.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")))
        except OSError as exc:
            raise StoreError(f"cannot persist pool to {path}: {exc}")
        self.writes += 1


class PoolManager:
    """Serves memoized pools; materializes a missing key exactly once."""

    def __init__(self, generator: InputGenerator, store: PoolStore = None):
        self.generator = generator
        self.store = store
        self._memo = {}

    def get_pool(self, args, n: int, seed: int) -> InputPool:
        if n < 1:
            raise ValueError("pool size must be >= 1")
        key = canonical_args(args)
        memo_key = (key, seed, n)
        if memo_key in self._memo:
            return self._memo[memo_key]
        if self.store is not None:
            loaded = self.store.load(key, seed, n)
            if loaded is not None:
                self._memo[memo_key] = loaded
                return loaded
        tuples = tuple(
            tuple(
                self.generator.sample_value(d, f"{key}|{seed}|{i}|{j}")
                for j, d in enumerate(args)
            )
            for i in range(n)
        )
        pool = InputPool(key, tuples, seed, n)
        if self.store is not None:
            self.store.save(pool)
        self._memo[memo_key] = pool
        return pool

    def fuzz_pool_triangular(self, args, n: int, seed: int) -> InputPool:
        """Fresh validation pool; disjoint seed namespace from base pools."""
        if n < 1:
            raise ValueError("pool size must be >= 1")
        key = canonical_args(args)
        fuzz_seed = derive_seed("fuzz", seed)
        memo_key = (f"fuzz:{key}", fuzz_seed, n)
        if memo_key in self._memo:
            return self._memo[memo_key]
        tuples = tuple(
            tuple(
                self.generator.fuzz_value(d, f"fuzz|{key}|{seed}|{i}|{j}")
                for j, d in enumerate(args)
            )
            for i in range(n)
        )
        pool = InputPool(key, tuples, fuzz_seed, n)
        self._memo[memo_key] = pool
        return pool
