import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from crossclone.model import (
    BOOL,
    CHAR,
    FILE,
    GENERIC,
    INT8,
    INT16,
    INT32,
    INT64,
    NULL,
    REAL32,
    REAL64,
    STRING,
    Outcome,
    Signature,
    TypeDescriptor,
    VArr,
    VBool,
    VChar,
    VInt,
    VObj,
    VReal,
    VStr,
    array_desc,
    canonical_args,
    canonical_signature,
    cast_lattice,
    decode_value,
    encode_value,
    from_native,
    int_bounds,
    narrow_widths,
    object_desc,
    ok,
    to_native,
)

PRIMS = [BOOL, INT8, INT16, INT32, INT64, REAL32, REAL64, CHAR, STRING, FILE, GENERIC]


def random_descriptor(rng, depth=0):
    roll = rng.random()
    if depth >= 2 or roll < 0.7:
        return rng.choice(PRIMS)
    if roll < 0.85:
        return array_desc(random_descriptor(rng, depth + 1))
    n = rng.randint(1, 3)
    return object_desc(
        (f"m{k}", random_descriptor(rng, depth + 1)) for k in range(n)
    )


def random_signature(rng):
    n = rng.randint(1, 5)
    return Signature(
        tuple(random_descriptor(rng) for _ in range(n)), random_descriptor(rng)
    )


# --- cast lattice ----------------------------------------------------------


def test_cast_examples_from_worked_cases():
    assert cast_lattice(INT32, INT64)  # int widens to long
    assert not cast_lattice(INT32, FILE)  # primitives never cast to file
    assert not cast_lattice(FILE, INT32)
    assert cast_lattice(BOOL, INT32)
    assert cast_lattice(BOOL, REAL64)
    assert cast_lattice(INT64, REAL64)
    assert not cast_lattice(INT64, INT32)
    assert cast_lattice(CHAR, STRING)
    assert not cast_lattice(STRING, CHAR)
    assert cast_lattice(GENERIC, STRING) and cast_lattice(STRING, GENERIC)
    assert cast_lattice(array_desc(INT32), array_desc(INT64))
    assert not cast_lattice(array_desc(INT64), array_desc(INT32))
    shape = object_desc([("length", INT32), ("width", INT32)])
    shape2 = object_desc([("length", INT32), ("width", INT32)])
    other = object_desc([("length", INT32), ("height", INT32)])
    assert cast_lattice(shape, shape2)
    assert not cast_lattice(shape, other)


def test_cast_reflexive_on_random_descriptors():
    rng = random.Random(7)
    for _ in range(300):
        d = random_descriptor(rng)
        assert cast_lattice(d, d)


def test_cast_antisymmetric_except_generic():
    for a in PRIMS:
        for b in PRIMS:
            if a == b or "generic" in (a.kind, b.kind):
                continue
            assert not (cast_lattice(a, b) and cast_lattice(b, a)), (a, b)


def test_cast_transitive_on_primitives():
    for a in PRIMS:
        for b in PRIMS:
            for c in PRIMS:
                if cast_lattice(a, b) and cast_lattice(b, c):
                    if "generic" in (a.kind, b.kind, c.kind):
                        continue  # generic hops are not transitive by design
                    assert cast_lattice(a, c), (a, b, c)


# --- canonical encoding ----------------------------------------------------


def test_canonical_signature_fixed_grammar():
    sig = Signature((INT32, STRING), INT32)
    assert canonical_signature(sig) == "a:i32,s;r:i32"


def test_canonical_rejects_zero_arity():
    with pytest.raises(ValueError):
        canonical_signature(Signature((), BOOL))


def test_canonical_object_and_array_tokens():
    shape = object_desc([("length", INT32), ("width", INT64)])
    sig = Signature((array_desc(shape), GENERIC), REAL64)
    assert (
        canonical_signature(sig)
        == "a:arr<obj{length:i32,width:i64}>,any;r:f64"
    )
    # structurally equal descriptors encode identically
    shape2 = object_desc([("length", INT32), ("width", INT64)])
    assert canonical_args([shape]) == canonical_args([shape2])


def test_canonical_injective_over_random_corpus():
    rng = random.Random(20177)
    seen = {}
    for _ in range(10_000):
        sig = random_signature(rng)
        key = canonical_signature(sig)
        if key in seen:
            assert seen[key] == sig, f"collision on {key}"
        seen[key] = sig


def test_narrow_widths():
    sig_args = (INT64, array_desc(INT64), REAL32)
    narrowed = [narrow_widths(d, 32) for d in sig_args]
    assert narrowed[0] == INT32
    assert narrowed[1] == array_desc(INT32)
    assert narrowed[2] == REAL64  # reals always binary64
    assert narrow_widths(INT16, 32) == INT16  # narrower stays narrower
    assert int_bounds(32) == (-2147483648, 2147483647)


# --- value round trips -----------------------------------------------------

values = st.deferred(
    lambda: st.one_of(
        st.booleans().map(VBool),
        st.integers(min_value=-(2**63), max_value=2**63 - 1).map(VInt),
        st.floats(allow_nan=True, allow_infinity=True).map(VReal),
        st.characters(min_codepoint=32, max_codepoint=126).map(VChar),
        st.text(max_size=12).map(VStr),
        st.just(NULL),
        st.lists(values, max_size=4).map(lambda xs: VArr(tuple(xs))),
        st.lists(
            st.tuples(st.text(min_size=1, max_size=5), values),
            min_size=1,
            max_size=3,
        ).map(lambda ms: VObj(tuple(ms))),
    )
)


@settings(max_examples=300, deadline=None)
@given(values)
def test_value_roundtrip(v):
    once = encode_value(v)
    again = encode_value(decode_value(json.loads(json.dumps(once))))
    assert once == again


def test_real_serialization_precision():
    for r in (0.1, 1e-300, 1.7976931348623157e308, -2.5, 3.141592653589793):
        v = decode_value(json.loads(json.dumps(encode_value(VReal(r)))))
        assert v.r == r  # bit-exact double round trip via repr


def test_special_reals_roundtrip():
    for r in (math.nan, math.inf, -math.inf):
        enc = encode_value(VReal(r))
        assert isinstance(enc["v"], str)
        back = decode_value(json.loads(json.dumps(enc)))
        assert math.isnan(back.r) if math.isnan(r) else back.r == r


def test_native_conversions():
    assert from_native(True) == VBool(True)  # bool outranks int
    assert from_native(3) == VInt(3)
    assert from_native([1, "x", None]) == VArr((VInt(1), VStr("x"), NULL))
    assert to_native(VObj((("a", VInt(1)),))) == {"a": 1}
    assert to_native(from_native({"a": [1.5]})) == {"a": [1.5]}


def test_char_arity_enforced():
    with pytest.raises(ValueError):
        VChar("ab")


# --- outcome invariants ----------------------------------------------------


def test_outcome_value_iff_ok():
    with pytest.raises(ValueError):
        Outcome("ok")
    with pytest.raises(ValueError):
        Outcome("timeout", value=VInt(1))
    out = ok(VInt(2), elapsed_us=12)
    assert out.value == VInt(2) and out.elapsed_us == 12


def test_outcome_exception_class():
    from crossclone.model import exception

    assert exception("ZeroDivisionError: division by zero").exception_class == (
        "ZeroDivisionError"
    )


def test_descriptor_invariants():
    with pytest.raises(ValueError):
        TypeDescriptor("array")  # missing element
    with pytest.raises(ValueError):
        TypeDescriptor("object")  # needs members
    with pytest.raises(ValueError):
        TypeDescriptor("int", bit_width=12)
    with pytest.raises(ValueError):
        TypeDescriptor("generic", bit_width=32)
