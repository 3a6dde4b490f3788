import json

import pytest

from crossclone.errors import StoreError
from crossclone.inputs import (
    ARRAY_SIZE_CAP,
    ConstantBank,
    FileResourcePool,
    InputGenerator,
    MultiModalSampler,
    PoolManager,
    PoolStore,
    _pool_payload,
    derive_seed,
    mine_constants,
)
from crossclone.model import (
    GENERIC,
    INT32,
    INT64,
    PYTHON,
    REAL64,
    STRING,
    TYPESCRIPT,
    VArr,
    VBool,
    VInt,
    VReal,
    VStr,
    array_desc,
    int_bounds,
)

FIB = "def fib(n):\n    if n <= 1: return n\n    return fib(n-1) + fib(n-2)\n"


def bank_with_ints(*ints):
    bank = ConstantBank()
    bank.ints.update(ints)
    return bank.with_defaults()


# --- mining ----------------------------------------------------------------


def test_mine_fib_constants():
    bank = mine_constants([(FIB, PYTHON)])
    assert {1, 2} <= set(bank.ints)


def test_mine_empty_corpus_injects_defaults():
    bank = mine_constants([])
    assert set(bank.ints) == {-1, 0, 1}
    assert set(bank.reals) == {-1.0, 0.0, 1.0}
    assert set(bank.chars) == {"a"}
    assert set(bank.strings) == {""}


def test_mine_string_literal_only():
    bank = mine_constants([('def f():\n    return ""\n', PYTHON)])
    assert "" in bank.strings
    assert set(bank.ints) == {-1, 0, 1}  # defaults for the missing kinds


def test_mine_cfamily_literals():
    src = 'export function f(x: int): int { let s = "ab"; return x % 37 + 2.5; }'
    bank = mine_constants([(src, TYPESCRIPT)])
    assert 37 in bank.ints
    assert 2.5 in bank.reals
    assert "ab" in bank.strings


# --- samplers --------------------------------------------------------------


def test_sampler_deterministic_by_seed_and_index():
    bank = bank_with_ints(0, 1, 2)
    s1 = MultiModalSampler("int", bank, int_bounds(64), seed=42)
    s2 = MultiModalSampler("int", bank, int_bounds(64), seed=42)
    assert [s1.draw(i) for i in range(50)] == [s2.draw(i) for i in range(50)]
    s3 = MultiModalSampler("int", bank, int_bounds(64), seed=43)
    assert [s1.draw(i) for i in range(50)] != [s3.draw(i) for i in range(50)]


def test_sampler_weights_sum_to_peak_mass():
    bank = bank_with_ints(0, 5, 5, 100)
    sampler = MultiModalSampler("int", bank, int_bounds(32), seed=1)
    assert sum(p.weight for p in sampler.peaks) == pytest.approx(0.8)
    by_center = {p.center: p.weight for p in sampler.peaks}
    assert by_center[5.0] == pytest.approx(2 * by_center[100.0])


def test_peak_coverage_quick():
    bank = bank_with_ints(0, 1, 2)
    sampler = MultiModalSampler("int", bank, int_bounds(64), seed=9)
    n = 20_000
    near = sum(1 for i in range(n) if -1 <= sampler.draw(i) <= 3)
    frac = near / n
    assert abs(frac - 0.8) < 0.012  # ~4 sigma


def test_bool_roughly_uniform():
    gen = InputGenerator(ConstantBank().with_defaults(), seed=5)
    from crossclone.model import BOOL

    draws = [gen.sample_value(BOOL, f"p{i}").b for i in range(2000)]
    assert 0.45 < sum(draws) / len(draws) < 0.55


def test_array_sizes_capped_and_nonnegative():
    bank = bank_with_ints(-50, -2, 3)
    gen = InputGenerator(bank, seed=3)
    sizes = [
        len(gen.sample_value(array_desc(INT32), f"a{i}").items) for i in range(300)
    ]
    assert all(0 <= s <= ARRAY_SIZE_CAP for s in sizes)
    assert any(s > 0 for s in sizes)


def test_int_draws_respect_width_bounds():
    from crossclone.model import int_desc

    gen = InputGenerator(bank_with_ints(0), seed=11)
    lo, hi = int_bounds(8)
    for i in range(500):
        v = gen.sample_value(int_desc(8), f"w{i}")
        assert lo <= v.i <= hi


def test_generic_draws_primitives_only():
    gen = InputGenerator(ConstantBank().with_defaults(), seed=7)
    kinds = set()
    for i in range(200):
        v = gen.sample_value(GENERIC, f"g{i}")
        kinds.add(type(v).__name__)
    assert kinds <= {"VBool", "VInt", "VReal", "VChar", "VStr"}
    assert len(kinds) >= 4


def test_string_lengths_capped():
    gen = InputGenerator(bank_with_ints(100), seed=13)
    for i in range(100):
        v = gen.sample_value(STRING, f"s{i}")
        assert len(v.s) <= 64


# --- pools -----------------------------------------------------------------


def test_pool_memoization_single_write(tmp_path):
    store = PoolStore(tmp_path)
    mgr = PoolManager(InputGenerator(bank_with_ints(1), seed=1), store)
    args = (INT64, STRING)
    pools = [mgr.get_pool(args, 16, seed=1) for _ in range(4)]
    assert store.writes == 1
    assert all(p is pools[0] for p in pools)


def test_pool_persisted_and_reloaded_identically(tmp_path):
    store = PoolStore(tmp_path)
    args = (INT64, array_desc(INT64))
    p1 = PoolManager(InputGenerator(bank_with_ints(4), seed=2), store).get_pool(
        args, 32, seed=2
    )
    store2 = PoolStore(tmp_path)
    p2 = PoolManager(InputGenerator(bank_with_ints(4), seed=2), store2).get_pool(
        args, 32, seed=2
    )
    assert store2.writes == 0
    assert _pool_payload(p1) == _pool_payload(p2)


def test_pool_determinism_without_store():
    args = (INT64, REAL64)
    mk = lambda: PoolManager(InputGenerator(bank_with_ints(7), seed=5)).get_pool(
        args, 64, seed=5
    )
    assert _pool_payload(mk()) == _pool_payload(mk())


def test_same_key_different_seed_differs():
    gen = InputGenerator(bank_with_ints(7), seed=5)
    mgr = PoolManager(gen)
    a = mgr.get_pool((INT64,), 32, seed=1)
    b = mgr.get_pool((INT64,), 32, seed=2)
    assert _pool_payload(a) != _pool_payload(b)


def test_tampered_pool_file_raises(tmp_path):
    store = PoolStore(tmp_path)
    mgr = PoolManager(InputGenerator(bank_with_ints(1), seed=1), store)
    mgr.get_pool((INT64,), 8, seed=1)
    path = next(tmp_path.glob("*.json"))
    doc = json.loads(path.read_text())
    doc["tuples"][0][0]["v"] = 424242
    path.write_text(json.dumps(doc))
    with pytest.raises(StoreError):
        PoolStore(tmp_path).load("a:i64", 1, 8)


def test_fuzz_pool_triangular_bounds_and_namespace():
    gen = InputGenerator(bank_with_ints(3), seed=4)
    mgr = PoolManager(gen)
    base = mgr.get_pool((INT32,), 64, seed=4)
    fuzz = mgr.fuzz_pool_triangular((INT32,), 64, seed=4)
    lo, hi = int_bounds(32)
    for (v,) in fuzz.tuples:
        assert lo <= v.i <= hi
    assert _pool_payload(base) != _pool_payload(fuzz)
    again = mgr.fuzz_pool_triangular((INT32,), 64, seed=4)
    assert _pool_payload(fuzz) == _pool_payload(again)


def test_fuzz_pool_rejects_empty():
    mgr = PoolManager(InputGenerator(bank_with_ints(1), seed=1))
    with pytest.raises(ValueError):
        mgr.fuzz_pool_triangular((INT32,), 0, seed=1)
    with pytest.raises(ValueError):
        mgr.get_pool((INT32,), 0, seed=1)


def test_file_resources_stable_and_mutated(tmp_path):
    seed_file = tmp_path / "seed.txt"
    seed_file.write_text("1 2 3 4 5 6 7 8 9 10")
    pool = FileResourcePool.from_seed_files([seed_file], seed=1)
    assert len(pool.entries) == 32
    pool2 = FileResourcePool.from_seed_files([seed_file], seed=1)
    assert pool.entries == pool2.entries
    assert any(c != "1 2 3 4 5 6 7 8 9 10" for c in pool.entries.values())


def test_derive_seed_stable():
    assert derive_seed("a", 1) == derive_seed("a", 1)
    assert derive_seed("a", 1) != derive_seed("a", 2)
