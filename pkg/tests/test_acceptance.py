"""Acceptance suite.

Each test enforces one acceptance criterion at its stated tolerance and
time budget and prints one PASS/FAIL line. The primary criteria run fully
against replay/oracle adapters (no worker shim involved); the end-to-end
criteria at the bottom drive the real worker shims and skip when the
corresponding toolchain is absent.
"""

import json
import random
import shutil
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import pytest

from crossclone.cluster import SimilarityConfig, cluster, cluster_all, similarity
from crossclone.engine import ExecutionConfig, OracleAdapter, ReplayAdapter, execute_profile
from crossclone.inputs import (
    ConstantBank,
    InputGenerator,
    MultiModalSampler,
    PoolManager,
    PoolStore,
    _pool_payload,
)
from crossclone.model import (
    INT64,
    IOProfile,
    Signature,
    VArr,
    VInt,
    VStr,
    canonical_args,
    int_bounds,
    ok,
)
from crossclone.segmenter import StatementNode, segment_nodes
from crossclone.validate import output_consistency, validate_clusters


@contextmanager
def criterion(name, budget_s):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    elapsed = time.perf_counter() - start
    assert elapsed < budget_s, f"{name}: {elapsed:.2f}s exceeded {budget_s}s budget"
    print(f"ACCEPTANCE {name}: PASS ({elapsed:.2f}s < {budget_s:.0f}s)")


@dataclass(frozen=True)
class Ref:
    id: str
    signature: Signature
    source_path: str = ""
    entry: str = ""
    canonical_sig: str = ""


# --- 1. segmentation oracle --------------------------------------------------


def test_segmentation_oracle():
    with criterion("segmentation-oracle", 1.0):
        for n in range(1, 13):
            nodes = tuple(StatementNode("other", (10 * k, 10 * k + 9)) for k in range(n))
            for min_stmt in range(1, 5):
                expected = [
                    (i, j)
                    for i in range(0, n - 1)
                    for j in range(i, n)
                    if j - i + 1 >= min_stmt
                ]
                got = [
                    (nodes.index(w[0]), nodes.index(w[-1]))
                    for w, _ in segment_nodes(nodes, min_stmt)
                ]
                assert got == expected, (n, min_stmt)


# --- 2. similarity worked example ---------------------------------------------


def _interleave_profiles():
    from crossclone.model import STRING, array_desc

    sig = Signature((array_desc(INT64), array_desc(INT64)), STRING)
    key = canonical_args(sig.args)
    in1 = (VArr((VInt(2), VInt(3))), VArr((VInt(4),)))
    in2 = (VArr((VInt(2), VInt(3))), VArr((VInt(4), VInt(5))))

    from crossclone.inputs import InputPool

    pool = InputPool(key, (in1, in2), seed=0, size=2)
    tables = {
        "interleave": [(in1, ok(VStr("243"))), (in2, ok(VStr("2435")))],
        "fancy_interleave": [(in1, ok(VStr("24"))), (in2, ok(VStr("2435")))],
        "valid_interleave": [(in1, ok(VStr("243"))), (in2, ok(VStr("2435")))],
    }
    cfg = ExecutionConfig(timeout_s=1.0, workers=1)
    profiles = {}
    for fid, table in tables.items():
        profiles[fid] = execute_profile(
            Ref(fid, sig), pool, cfg, lambda table=table: ReplayAdapter(table)
        )
    return profiles


def test_similarity_worked_example():
    with criterion("similarity-worked-example", 1.0):
        p = _interleave_profiles()
        assert similarity(p["interleave"], p["fancy_interleave"]) == 0.5
        assert similarity(p["interleave"], p["valid_interleave"]) == 1.0
        assert similarity(p["fancy_interleave"], p["valid_interleave"]) == 0.5
        clusters = cluster(
            [p["interleave"], p["fancy_interleave"], p["valid_interleave"]],
            SimilarityConfig(sim_t=1.0),
        )
        assert len(clusters) == 1
        assert clusters[0].members == ["interleave", "valid_interleave"]


# --- 3. clustering invariants ---------------------------------------------------


def _random_profiles(count, records, alphabet, seed):
    sig = Signature((INT64,), INT64)
    key = canonical_args(sig.args)
    rng = random.Random(seed)
    inputs = [(VInt(i),) for i in range(records)]
    out = []
    for k in range(count):
        recs = tuple(
            (inputs[i], ok(VInt(rng.randrange(alphabet)))) for i in range(records)
        )
        out.append(IOProfile(f"f{k:04d}", sig, recs, key))
    return out


def test_clustering_invariants():
    with criterion("clustering-invariants", 30.0):
        profiles = _random_profiles(1000, records=8, alphabet=2, seed=20177)
        cfg = SimilarityConfig(sim_t=0.75)
        partition = cluster_all(profiles, cfg)
        by_id = {p.function_id: p for p in profiles}
        seen = set()
        for members in partition:
            rep = members[0]
            for member in members:
                assert member.function_id not in seen  # disjoint partition
                seen.add(member.function_id)
                assert similarity(rep, by_id[member.function_id], cfg) >= cfg.sim_t
        assert len(seen) == len(profiles)

        exact = SimilarityConfig(sim_t=1.0)
        reference = None
        for shuffle in range(20):
            order = list(profiles)
            random.Random(shuffle).shuffle(order)
            clusters = cluster_all(order, exact)
            as_sets = frozenset(
                frozenset(p.function_id for p in members) for members in clusters
            )
            reference = as_sets if reference is None else reference
            assert as_sets == reference  # order-independent at sim_t = 1.0


# --- 4. sampler statistics -------------------------------------------------------


def _tent_bucket_probs():
    """Discrete landing probabilities of a triangular kernel with half-width
    1 centered on an integer, after round-half-up: -1/0/+1 around center."""
    return {-1: 0.125, 0: 0.75, 1: 0.125}


def test_sampler_statistics(tmp_path):
    from scipy import stats as scipy_stats

    with criterion("sampler-statistics", 10.0):
        bank = ConstantBank()
        bank.ints.update([0, 1, 2])
        bank = bank.with_defaults()
        sampler = MultiModalSampler("int", bank, int_bounds(64), seed=20177)
        n = 100_000
        draws = [sampler.draw(i) for i in range(n)]

        # peak coverage: within +-spread (1) of some peak, mass 0.8 +- 3 sigma
        near = sum(1 for d in draws if -1 <= d <= 3)
        frac = near / n
        sigma = (0.8 * 0.2 / n) ** 0.5
        assert abs(frac - 0.8) <= 3 * sigma, f"coverage {frac:.4f}"

        # chi-square of the discrete landing histogram against the mixture
        kernel = _tent_bucket_probs()
        weight = 0.8 / 3
        expected = {v: 0.0 for v in range(-1, 4)}
        for center in (0, 1, 2):
            for offset, p in kernel.items():
                expected[center + offset] += weight * p
        buckets = sorted(expected)
        observed = [sum(1 for d in draws if d == v) for v in buckets]
        observed.append(n - sum(observed))  # tail bucket
        probs = [expected[v] for v in buckets]
        probs.append(1.0 - sum(probs))
        result = scipy_stats.chisquare(observed, [p * n for p in probs])
        assert result.pvalue > 0.01, f"chi-square p={result.pvalue:.4f}"

        # pool determinism: two materializations are byte-identical
        args = (INT64,)
        pool_a = PoolManager(
            InputGenerator(bank, 20177), PoolStore(tmp_path / "a")
        ).get_pool(args, 256, seed=20177)
        pool_b = PoolManager(
            InputGenerator(bank, 20177), PoolStore(tmp_path / "b")
        ).get_pool(args, 256, seed=20177)
        assert _pool_payload(pool_a) == _pool_payload(pool_b)
        file_a = next((tmp_path / "a").glob("*.json")).read_bytes()
        file_b = next((tmp_path / "b").glob("*.json")).read_bytes()
        assert file_a == file_b


# --- 5. validation soundness ------------------------------------------------------


class OracleCorpus:
    def __init__(self, oracles, seed=20177, n=64):
        self.oracles = dict(oracles)
        self.sig = Signature((INT64,), INT64)
        self.manager = PoolManager(
            InputGenerator(ConstantBank().with_defaults(), seed)
        )
        self.n = n
        self.seed = seed
        self.base = self.manager.get_pool(self.sig.args, n, seed)

    def profiles(self, pool):
        cfg = ExecutionConfig(timeout_s=2.0, workers=1)
        out = []
        for fid in sorted(self.oracles):
            fn = self.oracles[fid]
            out.append(
                execute_profile(
                    Ref(fid, self.sig), pool, cfg, lambda fn=fn: OracleAdapter(fn)
                )
            )
        return out

    def detect(self, sim_cfg):
        return cluster(self.profiles(self.base), sim_cfg)

    def rerun(self, c):
        fresh = self.manager.fuzz_pool_triangular(self.sig.args, self.n, self.seed)
        by_id = {p.function_id: p for p in self.profiles(fresh)}
        return [by_id[m] for m in c.members if m in by_id]


def test_validation_soundness():
    with criterion("validation-soundness", 10.0):
        sim_cfg = SimilarityConfig(sim_t=1.0)
        rng = random.Random(99)
        corpus = OracleCorpus(
            {
                "double_mul": lambda x: x * 2,
                "double_add": lambda x: x + x,
                "negate_a": lambda x: -x,
                "negate_b": lambda x: 0 - x,
                "flaky": lambda x: x * 2 + (0 if rng.random() < 0.5 else 1),
            }
        )
        clusters = corpus.detect(sim_cfg)
        flaky_clusters = [c for c in clusters if "flaky" in c.members]
        pure_clusters = [c for c in clusters if "flaky" not in c.members]
        assert pure_clusters, "pure oracle clusters must form"
        if not flaky_clusters:
            from crossclone.model import CloneCluster

            flaky_clusters = [CloneCluster(members=["double_mul", "flaky"], sim_t=1.0)]
        report = validate_clusters(pure_clusters + flaky_clusters, corpus.rerun, sim_cfg)
        for c in pure_clusters:
            assert c.validity == "valid"
        for c in flaky_clusters:
            assert c.validity == "false_positive"
        again = validate_clusters(pure_clusters + flaky_clusters, corpus.rerun, sim_cfg)
        assert report.verdicts == again.verdicts  # idempotent at fixed seed


# --- 6. consistency screen -----------------------------------------------------------


def test_consistency_screen():
    with criterion("consistency-screen", 1.0):
        sig = Signature((INT64,), INT64)
        key = canonical_args(sig.args)

        def prof(fid, outs):
            recs = tuple(((VInt(i + 1),), ok(VInt(o))) for i, o in enumerate(outs))
            return IOProfile(fid, sig, recs, key)

        a = prof("A", [1, 2])
        b = prof("B", [9, 18])
        assert output_consistency(a, b) is True  # constant ratio 9
        perturbed = prof("B2", [9, 19])
        assert output_consistency(a, perturbed) is False


# --- 7. input-count sensitivity trend ---------------------------------------------


def _near_collision_corpus():
    """20 oracle functions over ([int64], int64): seven exact-clone pairs
    plus three near-collision pairs that diverge only on tail-magnitude
    draws falling in disjoint residue windows. Small pools miss the
    divergence and form spurious clusters; fresh triangular pools expose
    them; from 64 inputs up no spurious cluster survives."""
    oracles = {}
    for k in range(7):
        oracles[f"stable{k}a"] = (lambda k=k: (lambda x: x + k))()
        oracles[f"stable{k}b"] = (lambda k=k: (lambda x: x + k - 0))()
    windows = ((0, 39), (39, 71), (71, 95))
    magnitude = 1 << 40
    for j, (lo, hi) in enumerate(windows):
        oracles[f"near{j}a"] = (lambda j=j: (lambda x: 2 * x + j))()
        oracles[f"near{j}b"] = (
            lambda j=j, lo=lo, hi=hi: (
                lambda x: 2 * x + j + 1
                if abs(x) > magnitude and lo <= x % 97 < hi
                else 2 * x + j
            )
        )()
    return oracles


def test_input_count_trend():
    with criterion("input-count-trend", 60.0):
        sim_cfg = SimilarityConfig(sim_t=1.0)
        sweep = (8, 16, 32, 64, 128, 256)
        fps, cluster_counts = [], []
        for n in sweep:
            corpus = OracleCorpus(_near_collision_corpus(), seed=20177, n=n)
            clusters = corpus.detect(sim_cfg)
            report = validate_clusters(clusters, corpus.rerun, sim_cfg)
            fps.append(report.false_positives)
            cluster_counts.append(len(clusters))
        print(f"  inputs={sweep} clusters={tuple(cluster_counts)} fps={tuple(fps)}")
        # near-collisions do produce early false positives at this seed
        assert fps[0] >= 1, fps
        # false positives are non-increasing past 64 inputs
        past = fps[sweep.index(64):]
        assert all(a >= b for a, b in zip(past, past[1:])), fps
        # cluster counts stabilize at the plateau (the seven stable pairs)
        assert cluster_counts[-1] == cluster_counts[-2] == 7, cluster_counts


# === [SECONDARY] end-to-end criteria (real worker shims) =======================

REPO = Path(__file__).resolve().parents[1]
HAS_TS_WORKER = (
    shutil.which("node") is not None
    and (REPO / "shims" / "static" / "dist" / "worker.js").exists()
)
needs_ts = pytest.mark.skipif(not HAS_TS_WORKER, reason="typescript worker not built")

SUM_LOOP = """\
def func_db8e(a):
    n = len(a)
    sum0 = [0] * (n + 1)
    for i in range(n):
        sum0[i + 1] = sum0[i] + a[i]
    allv = sum0[-1]
    return allv
"""

SUM_BUILTIN = """\
def func_43df(items):
    _sum = sum(items)
    j = len(items) - 1
    return _sum
"""

DISTRACTORS = """\
def biggest(xs):
    best = max(xs)
    extra = 0
    return best

def scaled(values):
    out = [v * 3 for v in values]
    total = sum(out)
    return total

def joined(words):
    text = ""
    for w in words:
        text = text + str(w)
    return text

def count_positive(nums):
    c = 0
    for v in nums:
        if v > 0:
            c = c + 1
    return c

def always_none(data):
    sink = len(data)
    sink = sink - len(data)
    return None
"""

DIVIDE_TS = """\
type int = number;

export function divideSimple(a: int, b: int): int {
    if (b === 0) { return 0; }
    return Math.trunc(a / b);
}

export function divideComplex(divisor: int, dividend: int): int {
    if (divisor === 0) { return 0; }
    let quotient: int = 0;
    let num: int = Math.abs(dividend);
    let den: int = Math.abs(divisor);
    for (let bit = 31; bit >= 0; bit = bit - 1) {
        if (num >= den * Math.pow(2, bit)) {
            num = num - den * Math.pow(2, bit);
            quotient = quotient + Math.pow(2, bit);
        }
    }
    if ((divisor < 0) !== (dividend < 0)) { quotient = 0 - quotient; }
    return quotient;
}
"""

MIN_TS = """\
type int = number;

export function func_3b0e(x2: int[]): int {
    if (x2.length === 0) { return 0; }
    let res: int = x2[0];
    let len: int = x2.length;
    for (let i = 1; i < len; i = i + 1) {
        if (x2[i] < res) { res = x2[i]; }
    }
    return res;
}
"""

MIN_PY = """\
def func_6437(y):
    if len(y) == 0:
        return 0
    ymin = min(y)
    count = 0
    return ymin
"""


def _detect(tmp_path, corpora, **overrides):
    from crossclone.pipeline import RunConfig, run_detect

    cfg = RunConfig(
        corpora=corpora,
        inputs=256,
        seed=20177,
        workers=4,
        timeout_s=overrides.pop("timeout_s", 1.0),
        out_dir=str(tmp_path / "out"),
        **overrides,
    )
    return run_detect(cfg)


def _clusters_with_both(result, part_a, part_b, whole_only=True):
    """Reported clusters containing members originating from both sources."""
    out = []
    for rec in result.clusters:
        members = rec["members"]
        if whole_only:
            members = [m for m in members if m["whole_method"]]
        origins = {m["origin"].split(":")[0] for m in members}
        if any(part_a in o for o in origins) and any(part_b in o for o in origins):
            out.append(rec)
    return out


def test_e2e_dynamic_language(tmp_path):
    with criterion("e2e-dynamic-language", 120.0):
        from crossclone.pipeline import run_validate

        corpus = tmp_path / "py"
        corpus.mkdir()
        (corpus / "loop_sum.py").write_text(SUM_LOOP)
        (corpus / "builtin_sum.py").write_text(SUM_BUILTIN)
        (corpus / "distractors.py").write_text(DISTRACTORS)
        result = _detect(tmp_path, {"python": str(corpus)})
        both = _clusters_with_both(result, "loop_sum", "builtin_sum")
        assert len(both) == 1, [r["cluster_id"] for r in both]
        target = both[0]["cluster_id"]
        report = run_validate(result.out_dir)
        records = [
            json.loads(line)
            for line in (result.out_dir / "report" / "clusters.jsonl")
            .read_text().splitlines()
        ]
        verdict = [r["validity"] for r in records if r["cluster_id"] == target]
        assert verdict == ["valid"]


@needs_ts
def test_e2e_static_language(tmp_path):
    with criterion("e2e-static-language", 120.0):
        corpus = tmp_path / "ts"
        corpus.mkdir()
        (corpus / "divide.ts").write_text(DIVIDE_TS)
        # args_max=2: the permutation mechanism under test lives at the
        # two-argument wrappers; wider windows only add compile latency
        result = _detect(tmp_path, {"typescript": str(corpus)}, args_max=2)
        both = _clusters_with_both(result, "divide", "divide")
        # clusters joining the two origin functions, whole-method level
        joint = []
        for rec in result.clusters:
            wholes = [m for m in rec["members"] if m["whole_method"]]
            names = {m["function"] for m in wholes}
            if {"divideSimple", "divideComplex"} <= names:
                joint.append(rec)
        assert joint, "divide pair never clustered"
        for rec in joint:
            simple = [m for m in rec["members"]
                      if m["whole_method"] and m["function"] == "divideSimple"]
            complexes = [m for m in rec["members"]
                         if m["whole_method"] and m["function"] == "divideComplex"]
            for s in simple:
                for c in complexes:
                    # only the argument-reversed pairing matches
                    assert s["permutation"] != c["permutation"], rec["cluster_id"]


@needs_ts
def test_e2e_cross_language_cluster(tmp_path):
    with criterion("e2e-cross-language", 180.0):
        py = tmp_path / "py"
        ts = tmp_path / "ts"
        py.mkdir(), ts.mkdir()
        (py / "builtin_min.py").write_text(MIN_PY)
        (ts / "loop_min.ts").write_text(MIN_TS)
        result = _detect(
            tmp_path, {"python": str(py), "typescript": str(ts)}, args_max=2
        )
        cross = [
            rec
            for rec in result.clusters
            if len({m["language"] for m in rec["members"]}) > 1
        ]
        assert len(cross) == 1, [r["cluster_id"] for r in cross]
        members = cross[0]["members"]
        assert {m["language"] for m in members} == {"python", "typescript"}
        # the two whole-method min functions sit in the cluster; any extra
        # members are guard-including windows of those same two functions
        wholes = {m["function"] for m in members if m["whole_method"]}
        assert wholes == {"func_6437", "func_3b0e"}
        assert {m["function"] for m in members} == {"func_6437", "func_3b0e"}
        assert cross[0]["sim_t"] == 1.0
        # both ran over one shared 256-tuple pool at the narrower int width
        manifest = json.loads(
            (result.out_dir / "work" / "manifest.json").read_text()
        )["functions"]
        keys = {manifest[m["id"]]["pool_key"] for m in members}
        assert keys == {"a:arr<i32>"}
        assert result.stats["synthesis"]["functions"] >= 2
        pool_files = list((result.out_dir / "pools").glob("*.json"))
        target = [
            json.loads(p.read_text())
            for p in pool_files
            if json.loads(p.read_text()).get("key") == "a:arr<i32>"
        ]
        assert target and target[0]["n"] == 256
