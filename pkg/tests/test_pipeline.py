import json
from dataclasses import dataclass
from pathlib import Path

import pytest

from crossclone.model import (
    GENERIC,
    INT32,
    INT64,
    REAL32,
    Signature,
    array_desc,
    canonical_args,
)
from crossclone.pipeline import (
    RunConfig,
    assign_pools,
    erased_key,
    run_detect,
    run_validate,
)

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


@pytest.fixture
def sum_corpus(tmp_path):
    corpus = tmp_path / "py"
    corpus.mkdir()
    (corpus / "loop_sum.py").write_text(SUM_LOOP)
    (corpus / "builtin_sum.py").write_text(SUM_BUILTIN)
    (corpus / "distractors.py").write_text(DISTRACTORS)
    return corpus


def config_for(corpus, out, **kw):
    defaults = dict(
        corpora={"python": str(corpus)},
        min_stmt=2,
        inputs=32,
        seed=11,
        workers=1,
        timeout_s=5.0,
        out_dir=str(out),
    )
    defaults.update(kw)
    return RunConfig(**defaults)


def whole_method_ids(result, origin_file_part):
    return [
        fn.id
        for fn in result.functions
        if fn.whole_method and origin_file_part in fn.origin_file
    ]


def test_detect_clusters_the_sum_pair(sum_corpus, tmp_path, inproc_registry):
    cfg = config_for(sum_corpus, tmp_path / "out")
    result = run_detect(cfg, registry=inproc_registry)
    loop_ids = set(whole_method_ids(result, "loop_sum"))
    builtin_ids = set(whole_method_ids(result, "builtin_sum"))
    assert loop_ids and builtin_ids
    containing = [
        rec
        for rec in result.clusters
        if {m["id"] for m in rec["members"]} & loop_ids
        and {m["id"] for m in rec["members"]} & builtin_ids
    ]
    assert len(containing) == 1  # exactly one cluster holds both sums
    # stage-count consistency
    stats = result.stats
    assert stats["clones"] <= stats["functions_generated"]
    manifest = json.loads(
        (result.out_dir / "work" / "manifest.json").read_text()
    )["functions"]
    for rec in result.clusters:
        for m in rec["members"]:
            assert m["id"] in manifest


def test_detect_reports_reproducible_byte_for_byte(sum_corpus, tmp_path, inproc_registry):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    run_detect(config_for(sum_corpus, out1), registry=inproc_registry)
    run_detect(config_for(sum_corpus, out2), registry=inproc_registry)
    for rel in ("report/clusters.jsonl", "report/stats.json", "report/digest.txt"):
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel
    pools1 = sorted(p.name for p in (out1 / "pools").glob("*.json"))
    pools2 = sorted(p.name for p in (out2 / "pools").glob("*.json"))
    assert pools1 == pools2
    for name in pools1:
        assert (out1 / "pools" / name).read_bytes() == (out2 / "pools" / name).read_bytes()


def test_validate_marks_sum_cluster_valid(sum_corpus, tmp_path, inproc_registry):
    out = tmp_path / "out"
    run_detect(config_for(sum_corpus, out), registry=inproc_registry)
    report = run_validate(out, registry=inproc_registry)
    assert report.clusters >= 1
    assert all(v == "valid" for v in report.verdicts)
    digest = (out / "report" / "digest.txt").read_text()
    assert "== validation ==" in digest and "precision=" in digest


def test_validate_is_idempotent(sum_corpus, tmp_path, inproc_registry):
    out = tmp_path / "out"
    run_detect(config_for(sum_corpus, out), registry=inproc_registry)
    first = run_validate(out, registry=inproc_registry)
    second = run_validate(out, registry=inproc_registry)
    assert first.verdicts == second.verdicts


# --- pool assignment ---------------------------------------------------------


@dataclass(frozen=True)
class FakeFn:
    id: str
    signature: Signature


def test_erased_key_strips_widths():
    assert erased_key((INT64, array_desc(INT32))) == "a:i,arr<i>"
    assert erased_key((REAL32,)) == "a:f"


def test_assign_pools_narrows_to_joint_bounds():
    fns = [
        FakeFn("py", Signature((array_desc(INT64),), GENERIC)),
        FakeFn("ts", Signature((array_desc(INT32),), INT32)),
    ]
    assignment = assign_pools(fns)
    key_py, args_py = assignment["py"]
    key_ts, args_ts = assignment["ts"]
    assert key_py == key_ts == canonical_args((array_desc(INT32),))
    assert args_py == (array_desc(INT32),)


def test_assign_pools_single_language_keeps_width():
    fns = [FakeFn("a", Signature((INT64,), GENERIC))]
    key, args = assign_pools(fns)["a"]
    assert key == "a:i64"


def test_assign_pools_reals_unify_to_binary64():
    fns = [
        FakeFn("f32", Signature((REAL32,), GENERIC)),
        FakeFn("f64", Signature((array_desc(INT32), ), GENERIC)),
    ]
    # different arities stay separate groups
    assignment = assign_pools(fns)
    assert assignment["f32"][0] == "a:f64"
