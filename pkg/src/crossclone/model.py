"""Core data model shared by every pipeline stage.

Holds the language-neutral type lattice, the canonical signature encoding
that keys memoized input pools, and the tagged runtime value union that
travels between the orchestrator and the per-language worker shims.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

PRIMITIVE_KINDS = ("bool", "int", "real", "char", "string")
KINDS = PRIMITIVE_KINDS + ("array", "object", "file", "generic")

INT_WIDTHS = (8, 16, 32, 64)
REAL_WIDTHS = (32, 64)

#: Default integer width a plain `int` declaration carries per language.
#: Dynamic languages get 64-bit ints; C-family static `int` is 32-bit.
LANGUAGE_INT_WIDTH = {"python": 64, "java": 32, "typescript": 32}

#: Exploration range for the uniform real tail. The full binary64 range
#: makes nearly every arithmetic overflow, so the tail is capped here.
REAL_TAIL_BOUND = 1e9


@dataclass(frozen=True)
class LanguageId:
    """A corpus language: its name token and whether it is statically typed."""

    name: str
    typing: str  # "static" | "dynamic"

    def __post_init__(self):
        if self.typing not in ("static", "dynamic"):
            raise ValueError(f"bad typing discipline: {self.typing!r}")

    @property
    def is_dynamic(self) -> bool:
        return self.typing == "dynamic"


PYTHON = LanguageId("python", "dynamic")
JAVA = LanguageId("java", "static")
TYPESCRIPT = LanguageId("typescript", "static")

LANGUAGES = {lang.name: lang for lang in (PYTHON, JAVA, TYPESCRIPT)}


def language_by_name(name: str) -> LanguageId:
    try:
        return LANGUAGES[name]
    except KeyError:
        raise ValueError(f"unknown language: {name!r}") from None


@dataclass(frozen=True)
class TypeDescriptor:
    """A node in the language-neutral type tree.

    `element` is set only for arrays, `members` only for objects (ordered,
    public members only), and `bit_width` only for int/real.
    """

    kind: str
    element: Optional["TypeDescriptor"] = None
    members: tuple = ()  # tuple[(name, TypeDescriptor), ...]
    bit_width: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind: {self.kind!r}")
        if self.kind == "array":
            if self.element is None:
                raise ValueError("array needs exactly one element descriptor")
        elif self.element is not None:
            raise ValueError(f"{self.kind} carries no element descriptor")
        if self.kind == "object":
            if not self.members:
                raise ValueError("object needs at least one member")
        elif self.members:
            raise ValueError(f"{self.kind} carries no members")
        if self.kind == "int":
            if self.bit_width not in INT_WIDTHS:
                raise ValueError(f"int width must be one of {INT_WIDTHS}")
        elif self.kind == "real":
            if self.bit_width not in REAL_WIDTHS:
                raise ValueError(f"real width must be one of {REAL_WIDTHS}")
        elif self.bit_width is not None:
            raise ValueError(f"{self.kind} carries no bit width")


def int_desc(width: int = 32) -> TypeDescriptor:
    return TypeDescriptor("int", bit_width=width)


def real_desc(width: int = 64) -> TypeDescriptor:
    return TypeDescriptor("real", bit_width=width)


def array_desc(element: TypeDescriptor) -> TypeDescriptor:
    return TypeDescriptor("array", element=element)


def object_desc(members: Iterable[tuple]) -> TypeDescriptor:
    return TypeDescriptor("object", members=tuple(members))


BOOL = TypeDescriptor("bool")
CHAR = TypeDescriptor("char")
STRING = TypeDescriptor("string")
FILE = TypeDescriptor("file")
GENERIC = TypeDescriptor("generic")
INT8, INT16, INT32, INT64 = (int_desc(w) for w in INT_WIDTHS)
REAL32, REAL64 = (real_desc(w) for w in REAL_WIDTHS)


@dataclass(frozen=True)
class Signature:
    """Ordered argument descriptors plus the single return slot."""

    args: tuple  # tuple[TypeDescriptor, ...]
    ret: TypeDescriptor

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


def cast_lattice(frm: TypeDescriptor, to: TypeDescriptor) -> bool:
    """True iff `frm` widens to `to`: bool < int < real, char < string,
    int(w1) < int(w2) for w1 <= w2, arrays elementwise, objects only to a
    structurally identical object, file only to file, generic to and from
    every primitive. Reflexive and transitive; total (never raises).
    """
    if frm == to:
        return True
    if frm.kind == "generic":
        return to.kind in PRIMITIVE_KINDS or to.kind == "generic"
    if to.kind == "generic":
        return frm.kind in PRIMITIVE_KINDS
    if frm.kind == "bool":
        return to.kind in ("int", "real")
    if frm.kind == "int":
        if to.kind == "int":
            return frm.bit_width <= to.bit_width
        return to.kind == "real"
    if frm.kind == "real":
        return to.kind == "real" and frm.bit_width <= to.bit_width
    if frm.kind == "char":
        return to.kind == "string"
    if frm.kind == "array":
        return to.kind == "array" and cast_lattice(frm.element, to.element)
    # string/object/file fall through: only the reflexive case holds.
    return False


def _token(desc: TypeDescriptor) -> str:
    kind = desc.kind
    if kind == "bool":
        return "b"
    if kind == "int":
        return f"i{desc.bit_width}"
    if kind == "real":
        return f"f{desc.bit_width}"
    if kind == "char":
        return "c"
    if kind == "string":
        return "s"
    if kind == "array":
        return f"arr<{_token(desc.element)}>"
    if kind == "object":
        inner = ",".join(f"{name}:{_token(d)}" for name, d in desc.members)
        return "obj{%s}" % inner
    if kind == "file":
        return "file"
    return "any"


def canonical_args(args: Iterable[TypeDescriptor]) -> str:
    """The `a:` segment of the canonical grammar; this string keys pools."""
    return "a:" + ",".join(_token(d) for d in args)


def canonical_signature(sig: Signature) -> str:
    """Deterministic, injective encoding of a signature.

    Grammar: `a:` + comma-joined argument tokens + `;r:` + return token,
    with tokens b, i8|i16|i32|i64, f32|f64, c, s, arr<tok>,
    obj{name:tok,...}, file, any.
    """
    if not sig.args:
        raise ValueError("zero-argument signatures are never admitted")
    return f"{canonical_args(sig.args)};r:{_token(sig.ret)}"


def _parse_token(tok: str) -> TypeDescriptor:
    if tok == "b":
        return BOOL
    if tok in ("i8", "i16", "i32", "i64"):
        return int_desc(int(tok[1:]))
    if tok in ("f32", "f64"):
        return real_desc(int(tok[1:]))
    if tok == "c":
        return CHAR
    if tok == "s":
        return STRING
    if tok == "file":
        return FILE
    if tok == "any":
        return GENERIC
    if tok.startswith("arr<") and tok.endswith(">"):
        return array_desc(_parse_token(tok[4:-1]))
    if tok.startswith("obj{") and tok.endswith("}"):
        members = []
        for part in _split_depth0(tok[4:-1]):
            name, sub = part.split(":", 1)
            members.append((name, _parse_token(sub)))
        return object_desc(members)
    raise ValueError(f"bad canonical token: {tok!r}")


def _split_depth0(body: str):
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch in "<{":
            depth += 1
        elif ch in ">}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return parts


def parse_canonical_args(key: str) -> tuple:
    """Inverse of canonical_args: descriptor tuple from an `a:` key."""
    if not key.startswith("a:"):
        raise ValueError(f"not an argument key: {key!r}")
    return tuple(_parse_token(tok) for tok in _split_depth0(key[2:]))


def parse_canonical_signature(encoded: str) -> "Signature":
    """Inverse of canonical_signature."""
    arg_part, _, ret_part = encoded.partition(";r:")
    if not ret_part:
        raise ValueError(f"not a canonical signature: {encoded!r}")
    return Signature(parse_canonical_args(arg_part), _parse_token(ret_part))


def unify_widths(a: TypeDescriptor, b: TypeDescriptor) -> TypeDescriptor:
    """Joint pool descriptor for two same-structure descriptors: ints at the
    narrower declared bound, reals at binary64, containers elementwise."""
    if a.kind == "int" and b.kind == "int":
        return int_desc(min(a.bit_width, b.bit_width))
    if a.kind == "real" and b.kind == "real":
        return REAL64
    if a.kind == "array" and b.kind == "array":
        return array_desc(unify_widths(a.element, b.element))
    if a.kind == "object" and b.kind == "object":
        return object_desc(
            (na, unify_widths(da, db))
            for (na, da), (_, db) in zip(a.members, b.members)
        )
    return a


def narrow_widths(desc: TypeDescriptor, int_width: int) -> TypeDescriptor:
    """Rewrite a descriptor tree to the joint numeric bounds of a run:
    ints are capped at `int_width`, reals are always binary64."""
    if desc.kind == "int":
        return int_desc(min(desc.bit_width, int_width))
    if desc.kind == "real":
        return REAL64
    if desc.kind == "array":
        return array_desc(narrow_widths(desc.element, int_width))
    if desc.kind == "object":
        return object_desc((n, narrow_widths(d, int_width)) for n, d in desc.members)
    return desc


def int_bounds(width: int) -> tuple:
    return (-(1 << (width - 1)), (1 << (width - 1)) - 1)


# --- Runtime values -------------------------------------------------------


class Value:
    """Base of the tagged runtime value union."""

    __slots__ = ()


@dataclass(frozen=True)
class VBool(Value):
    b: bool


@dataclass(frozen=True)
class VInt(Value):
    i: int


@dataclass(frozen=True)
class VReal(Value):
    r: float


@dataclass(frozen=True)
class VChar(Value):
    c: str

    def __post_init__(self):
        if len(self.c) != 1:
            raise ValueError("char holds exactly one character")


@dataclass(frozen=True)
class VStr(Value):
    s: str


@dataclass(frozen=True)
class VArr(Value):
    items: tuple  # tuple[Value, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True)
class VObj(Value):
    members: tuple  # tuple[(name, Value), ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))


@dataclass(frozen=True)
class VFile(Value):
    resource_id: str


@dataclass(frozen=True)
class VNull(Value):
    pass


NULL = VNull()


def encode_value(v: Value):
    """Value -> wire TaggedValue ({"t": ..., "v": ...}).

    Reals ride as JSON numbers (repr round-trip) except NaN/infinities,
    which ride as the strings "NaN", "Infinity", "-Infinity".
    """
    if isinstance(v, VBool):
        return {"t": "b", "v": v.b}
    if isinstance(v, VInt):
        return {"t": "i", "v": v.i}
    if isinstance(v, VReal):
        r = v.r
        if math.isnan(r):
            return {"t": "f", "v": "NaN"}
        if math.isinf(r):
            return {"t": "f", "v": "Infinity" if r > 0 else "-Infinity"}
        return {"t": "f", "v": r}
    if isinstance(v, VChar):
        return {"t": "c", "v": v.c}
    if isinstance(v, VStr):
        return {"t": "s", "v": v.s}
    if isinstance(v, VArr):
        return {"t": "a", "v": [encode_value(x) for x in v.items]}
    if isinstance(v, VObj):
        return {"t": "o", "v": [[name, encode_value(x)] for name, x in v.members]}
    if isinstance(v, VFile):
        return {"t": "file", "v": v.resource_id}
    if isinstance(v, VNull):
        return {"t": "null"}
    raise TypeError(f"not a Value: {v!r}")


_SPECIAL_REALS = {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}


def decode_value(d) -> Value:
    tag = d["t"]
    if tag == "b":
        return VBool(bool(d["v"]))
    if tag == "i":
        return VInt(int(d["v"]))
    if tag == "f":
        raw = d["v"]
        if isinstance(raw, str):
            return VReal(_SPECIAL_REALS[raw])
        return VReal(float(raw))
    if tag == "c":
        return VChar(d["v"])
    if tag == "s":
        return VStr(d["v"])
    if tag == "a":
        return VArr(tuple(decode_value(x) for x in d["v"]))
    if tag == "o":
        return VObj(tuple((name, decode_value(x)) for name, x in d["v"]))
    if tag == "file":
        return VFile(d["v"])
    if tag == "null":
        return NULL
    raise ValueError(f"unknown value tag: {tag!r}")


def from_native(x) -> Value:
    """Native Python value -> Value. bools outrank ints (bool is an int
    subclass); any str maps to VStr (VChar only ever originates in pools)."""
    if isinstance(x, Value):
        return x
    if isinstance(x, bool):
        return VBool(x)
    if isinstance(x, int):
        return VInt(x)
    if isinstance(x, float):
        return VReal(x)
    if isinstance(x, str):
        return VStr(x)
    if isinstance(x, (list, tuple)):
        return VArr(tuple(from_native(e) for e in x))
    if isinstance(x, dict):
        return VObj(tuple((str(k), from_native(v)) for k, v in x.items()))
    if x is None:
        return NULL
    raise TypeError(f"cannot model native value of type {type(x).__name__}")


def to_native(v: Value):
    """Value -> native Python value (used by in-process oracle adapters)."""
    if isinstance(v, VBool):
        return v.b
    if isinstance(v, VInt):
        return v.i
    if isinstance(v, VReal):
        return v.r
    if isinstance(v, (VChar,)):
        return v.c
    if isinstance(v, VStr):
        return v.s
    if isinstance(v, VArr):
        return [to_native(x) for x in v.items]
    if isinstance(v, VObj):
        return {name: to_native(x) for name, x in v.members}
    if isinstance(v, VNull):
        return None
    raise TypeError(f"no native form for {v!r}")


# --- Execution outcomes and profiles --------------------------------------

OK, EXCEPTION, TIMEOUT = "ok", "exception", "timeout"


@dataclass(frozen=True)
class Outcome:
    """Result of one invocation: ok carries a value, exception a detail
    string ("ClassName: message"), timeout neither. elapsed in microseconds."""

    status: str
    value: Optional[Value] = None
    detail: Optional[str] = None
    elapsed_us: int = 0

    def __post_init__(self):
        if self.status not in (OK, EXCEPTION, TIMEOUT):
            raise ValueError(f"bad status: {self.status!r}")
        if (self.value is not None) != (self.status == OK):
            raise ValueError("value present iff status is ok")

    @property
    def exception_class(self) -> Optional[str]:
        if self.detail is None:
            return None
        return self.detail.split(":", 1)[0].strip()


def ok(value: Value, elapsed_us: int = 0) -> Outcome:
    return Outcome(OK, value=value, elapsed_us=elapsed_us)


def exception(detail: str, elapsed_us: int = 0) -> Outcome:
    return Outcome(EXCEPTION, detail=detail, elapsed_us=elapsed_us)


def timeout(elapsed_us: int) -> Outcome:
    return Outcome(TIMEOUT, elapsed_us=elapsed_us)


@dataclass(frozen=True)
class IOProfile:
    """Ordered invocation records of one function over a shared pool."""

    function_id: str
    signature: Signature
    records: tuple  # tuple[(tuple[Value, ...], Outcome), ...]
    pool_key: str

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        for inputs, _ in self.records:
            if len(inputs) != len(self.signature.args):
                raise ValueError("record arity does not match signature")


@dataclass
class CloneCluster:
    """A behaviorally-similar group; the representative is the first member."""

    members: list  # list[str]
    sim_t: float
    validity: str = "unvalidated"  # unvalidated | valid | false_positive

    @property
    def representative(self) -> str:
        return self.members[0]
