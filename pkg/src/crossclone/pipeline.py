"""Pipeline orchestration: corpus -> segmentation -> synthesis -> pools ->
execution -> clustering -> reports, with a replayable work directory.

Work directory layout (all inspectable):
    pools/      memoized input pools, one checksummed file each
    work/<lang>/<function_id>.<ext>   emitted sources
    profiles/   one JSON per executed function
    report/     clusters.jsonl, digest.txt, stats.json, config.json
"""

from __future__ import annotations

import dataclasses
import functools
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from crossclone.cluster import SimilarityConfig, cluster_all
from crossclone.engine import ExecutionConfig, SubprocessAdapter, execute_profiles
from crossclone.errors import ConfigError, MissingArtifacts, MissingShim
from crossclone.inputs import (
    ConstantBank,
    FileResourcePool,
    InputGenerator,
    PoolManager,
    PoolStore,
    mine_constants,
)
from crossclone.model import (
    IOProfile,
    Signature,
    canonical_args,
    language_by_name,
    parse_canonical_args,
    parse_canonical_signature,
    unify_widths,
)
from crossclone.segmenter import segment
from crossclone.segmenter.corpus import parse_corpus
from crossclone.synthesizer import SynthesisStats, synthesize_snippets
from crossclone.validate import ValidationReport, validate_clusters

log = logging.getLogger(__name__)

SOURCE_EXT = {"python": ".py", "java": ".java", "typescript": ".ts"}


@dataclass
class RunConfig:
    corpora: dict  # language name -> corpus path
    min_stmt: int = 2
    args_max: int = 5
    inputs: int = 256
    sim_t: float = 1.0
    timeout_s: float = 5.0
    seed: int = 0
    workers: int = 4
    out_dir: str = "out"
    exception_match: bool = False
    shims: dict = field(default_factory=dict)  # language -> argv list

    def similarity(self) -> SimilarityConfig:
        return SimilarityConfig(sim_t=self.sim_t, exception_match=self.exception_match)

    def execution(self) -> ExecutionConfig:
        return ExecutionConfig(
            timeout_s=self.timeout_s, workers=self.workers, pool_n=self.inputs
        )

    def validate_config(self):
        if self.min_stmt < 1:
            raise ConfigError("min-stmt must be >= 1")
        if self.inputs < 1:
            raise ConfigError("inputs must be >= 1")
        if not 0.0 <= self.sim_t <= 1.0:
            raise ConfigError("sim-t must lie in [0, 1]")
        for name in self.corpora:
            try:
                language_by_name(name)
            except ValueError as exc:
                raise ConfigError(str(exc))


def repo_root() -> Path:
    return Path(__file__).resolve().parents[2]


class ShimRegistry:
    """Maps a language to the worker argv that executes its functions."""

    def __init__(self, overrides=None, resources_path=None):
        self.overrides = dict(overrides or {})
        self.resources_path = resources_path

    def command_for(self, language: str):
        if language in self.overrides:
            return list(self.overrides[language])
        root = repo_root()
        if language == "python":
            worker = root / "shims" / "dynamic_worker.py"
            if worker.exists():
                return [sys.executable, str(worker)]
            raise MissingShim(language, f"worker not found at {worker}")
        if language == "typescript":
            worker = root / "shims" / "static" / "dist" / "worker.js"
            if worker.exists():
                return ["node", str(worker)]
            raise MissingShim(language, f"build shims/static first ({worker} missing)")
        raise MissingShim(language, "no worker toolchain in this environment")

    def check(self, languages):
        for language in sorted(set(languages)):
            self.command_for(language)

    def factory_for(self, fn):
        argv = self.command_for(fn.language)
        if self.resources_path is not None:
            argv = argv + ["--resources", str(self.resources_path)]
        return lambda: SubprocessAdapter(argv)


# --- pool grouping -----------------------------------------------------------


_WIDTH_RE = re.compile(r"\b(i|f)(8|16|32|64)\b")


def erased_key(args) -> str:
    return _WIDTH_RE.sub(r"\1", canonical_args(args))


def assign_pools(functions):
    """Group functions by width-erased argument structure and narrow every
    group to its joint bounds; returns (fn.id -> (pool_key, pool_args))."""
    groups = {}
    for fn in functions:
        groups.setdefault(erased_key(fn.signature.args), []).append(fn)
    assignment = {}
    for fns in groups.values():
        arity = len(fns[0].signature.args)
        pool_args = []
        for j in range(arity):
            joint = functools.reduce(
                unify_widths, (fn.signature.args[j] for fn in fns)
            )
            # self-unification normalizes reals to binary64 in singleton groups
            pool_args.append(unify_widths(joint, joint))
        pool_args = tuple(pool_args)
        key = canonical_args(pool_args)
        for fn in fns:
            assignment[fn.id] = (key, pool_args)
    return assignment


# --- detect -------------------------------------------------------------------


@dataclass
class DetectResult:
    functions: list
    profiles: list
    clusters: list  # list[dict] report records
    stats: dict
    out_dir: Path


def _collapse_same_origin(members, fn_by_id):
    """Keep one member per origin snippet/return slot (argument-permutation
    variants of one snippet must not inflate clone counts)."""
    seen, kept = set(), []
    for fid in members:
        key = fn_by_id[fid].origin_key
        if key in seen:
            continue
        seen.add(key)
        kept.append(fid)
    return kept


def _function_order_key(fn):
    return (
        fn.origin_file,
        fn.origin_span,
        str(fn.return_var),
        fn.member_path,
        fn.permutation,
    )


def run_detect(cfg: RunConfig, registry: ShimRegistry = None) -> DetectResult:
    cfg.validate_config()
    out = Path(cfg.out_dir)
    for sub in ("pools", "profiles", "report"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    # 1-2. parse and segment
    units, skipped, sources = [], [], []
    for lang_name in sorted(cfg.corpora):
        language = language_by_name(lang_name)
        corpus_units, corpus_skipped = parse_corpus(cfg.corpora[lang_name], language)
        units.extend(corpus_units)
        skipped.extend(corpus_skipped)
        for unit in corpus_units:
            sources.append((unit.source, language))
    snippets = [s for unit in units for s in segment(unit, cfg.min_stmt)]

    # 3. synthesis
    functions, synth_stats = synthesize_snippets(snippets, cfg.args_max)
    functions.sort(key=_function_order_key)
    for fn in functions:
        lang_dir = out / "work" / fn.language
        lang_dir.mkdir(parents=True, exist_ok=True)
        path = lang_dir / f"{fn.id}{SOURCE_EXT[fn.language]}"
        path.write_text(fn.source_text)
        object.__setattr__(fn, "source_path", str(path))

    # 4. pools (constants mined once per distinct origin source)
    bank = mine_constants({(src, lang.name): (src, lang) for src, lang in sources}.values())
    resources = FileResourcePool.from_bank(bank, cfg.seed)
    resources_path = out / "pools" / "file_resources.json"
    resources_path.write_text(
        json.dumps(
            {"provenance": resources.provenance, "entries": resources.entries},
            sort_keys=True,
            indent=1,
        )
    )
    generator = InputGenerator(bank, cfg.seed, resources)
    manager = PoolManager(generator, PoolStore(out / "pools"))
    assignment = assign_pools(functions)
    pools = {}
    for fn in functions:
        key, pool_args = assignment[fn.id]
        if key not in pools:
            pools[key] = manager.get_pool(pool_args, cfg.inputs, cfg.seed)

    # 5. execution
    if registry is None:
        registry = ShimRegistry(cfg.shims, resources_path=resources_path)
    registry.check({fn.language for fn in functions})
    jobs = [
        (fn, pools[assignment[fn.id][0]], registry.factory_for(fn))
        for fn in functions
    ]
    profiles, load_failures = execute_profiles(jobs, cfg.execution())
    profile_by_id = {}
    for fn, profile in zip([j[0] for j in jobs], _aligned(profiles, jobs)):
        if profile is not None:
            profile = IOProfile(
                profile.function_id,
                profile.signature,
                profile.records,
                assignment[fn.id][0],
            )
            profile_by_id[fn.id] = profile
            _write_profile(out / "profiles" / f"{fn.id}.json", profile)

    # 6. clustering per pool group, function order preserved
    sim_cfg = cfg.similarity()
    fn_by_id = {fn.id: fn for fn in functions}
    ordered_profiles = [profile_by_id[fn.id] for fn in functions if fn.id in profile_by_id]
    by_key = {}
    for p in ordered_profiles:
        by_key.setdefault(p.pool_key, []).append(p)
    records = []
    for key in sorted(by_key):
        for members in cluster_all(by_key[key], sim_cfg):
            ids = [p.function_id for p in members]
            kept = _collapse_same_origin(ids, fn_by_id)
            if len(kept) < 2:
                continue
            records.append(
                {
                    "record": "cluster",
                    "schema": 1,
                    "cluster_id": f"c{len(records):04d}",
                    "sim_t": cfg.sim_t,
                    "pool_key": key,
                    "representative": kept[0],
                    "members": [_member_record(fn_by_id[f]) for f in kept],
                    "validity": "unvalidated",
                }
            )

    stats = {
        "schema": 1,
        "units": len(units),
        "files_skipped": len(skipped),
        "snippets": len(snippets),
        "functions_generated": len(functions),
        "load_failures": sorted(f[0] for f in load_failures),
        "pools": len(pools),
        "clusters": len(records),
        "clones": sum(len(r["members"]) for r in records),
        "synthesis": synth_stats.as_dict(),
    }

    _write_report(out, cfg, records, stats)
    _write_manifest(out, functions, assignment)
    return DetectResult(functions, ordered_profiles, records, stats, out)


def _aligned(profiles, jobs):
    by_id = {p.function_id: p for p in profiles}
    return [by_id.get(fn.id) for fn, _, _ in jobs]


def _member_record(fn):
    return {
        "id": fn.id,
        "language": fn.language,
        "origin": f"{fn.origin_file}:{fn.origin_span[0]}-{fn.origin_span[1]}",
        "function": fn.origin_function,
        "whole_method": fn.whole_method,
        "permutation": list(fn.permutation),
        "return_var": fn.return_var,
    }


def _write_profile(path: Path, profile: IOProfile):
    from crossclone.model import encode_value

    rows = []
    for inputs, outcome in profile.records:
        rows.append(
            {
                "inputs": [encode_value(v) for v in inputs],
                "status": outcome.status,
                "value": encode_value(outcome.value) if outcome.value is not None else None,
                "detail": outcome.detail,
                "elapsed_us": outcome.elapsed_us,
            }
        )
    path.write_text(
        json.dumps(
            {"function_id": profile.function_id, "pool_key": profile.pool_key, "records": rows},
            sort_keys=True,
        )
    )


def _digest_lines(records):
    def is_cross(rec):
        return len({m["language"] for m in rec["members"]}) > 1

    lines = []
    for title, keep in (
        ("cross-language clusters", True),
        ("single-language clusters", False),
    ):
        chosen = [r for r in records if is_cross(r) == keep]
        lines.append(f"== {title} ({len(chosen)}) ==")
        for rec in chosen:
            langs = "+".join(sorted({m["language"] for m in rec["members"]}))
            lines.append(
                f"{rec['cluster_id']} sim_t={rec['sim_t']} [{langs}] "
                f"rep={rec['representative']} validity={rec['validity']}"
            )
            for m in rec["members"]:
                flag = " whole-method" if m["whole_method"] else ""
                lines.append(f"  {m['id']} {m['language']} {m['origin']}{flag}")
        lines.append("")
    return lines


def _write_report(out: Path, cfg: RunConfig, records, stats):
    report = out / "report"
    with open(report / "clusters.jsonl", "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    (report / "digest.txt").write_text("\n".join(_digest_lines(records)) + "\n")
    (report / "stats.json").write_text(json.dumps(stats, sort_keys=True, indent=1))
    (report / "config.json").write_text(
        json.dumps(dataclasses.asdict(cfg), sort_keys=True, indent=1)
    )


def _write_manifest(out: Path, functions, assignment):
    entries = {}
    for fn in functions:
        key, pool_args = assignment[fn.id]
        entries[fn.id] = {
            "language": fn.language,
            "origin_file": fn.origin_file,
            "origin_span": list(fn.origin_span),
            "origin_function": fn.origin_function,
            "signature": fn.canonical_sig,
            "pool_key": key,
            "arg_names": list(fn.arg_names),
            "return_var": fn.return_var,
            "permutation": list(fn.permutation),
            "member_path": list(fn.member_path),
            "whole_method": fn.whole_method,
            "source_path": fn.source_path,
        }
    (out / "work").mkdir(parents=True, exist_ok=True)
    (out / "work" / "manifest.json").write_text(
        json.dumps({"schema": 1, "functions": entries}, sort_keys=True, indent=1)
    )


# --- validate -----------------------------------------------------------------


@dataclass(frozen=True)
class _ManifestFn:
    id: str
    language: str
    signature: Signature
    source_path: str
    canonical_sig: str
    pool_key: str

    @property
    def entry(self):
        return self.id


def load_run(out_dir):
    out = Path(out_dir)
    manifest_path = out / "work" / "manifest.json"
    clusters_path = out / "report" / "clusters.jsonl"
    config_path = out / "report" / "config.json"
    if not (manifest_path.exists() and clusters_path.exists() and config_path.exists()):
        raise MissingArtifacts(f"no detect artifacts under {out}")
    manifest = json.loads(manifest_path.read_text())["functions"]
    records = [
        json.loads(line)
        for line in clusters_path.read_text().splitlines()
        if line.strip()
    ]
    cfg = RunConfig(**json.loads(config_path.read_text()))
    return cfg, manifest, records


def run_validate(out_dir, registry: ShimRegistry = None, fresh_seed=None) -> ValidationReport:
    """Re-execute every reported cluster's members on fresh triangular pools
    and mark clusters whose membership changes as false positives."""
    cfg, manifest, records = load_run(out_dir)
    out = Path(out_dir)
    seed = cfg.seed if fresh_seed is None else fresh_seed

    bank = ConstantBank().with_defaults()
    resources_path = out / "pools" / "file_resources.json"
    resources = FileResourcePool(
        entries=json.loads(resources_path.read_text())["entries"]
    ) if resources_path.exists() else None
    generator = InputGenerator(bank, seed, resources)
    manager = PoolManager(generator, PoolStore(out / "pools"))

    if registry is None:
        registry = ShimRegistry(cfg.shims, resources_path=resources_path)

    from crossclone.model import CloneCluster

    clusters = [
        CloneCluster(members=[m["id"] for m in rec["members"]], sim_t=rec["sim_t"])
        for rec in records
    ]

    def fn_ref(fid):
        entry = manifest[fid]
        return _ManifestFn(
            id=fid,
            language=entry["language"],
            signature=parse_canonical_signature(entry["signature"]),
            source_path=entry["source_path"],
            canonical_sig=entry["signature"],
            pool_key=entry["pool_key"],
        )

    def rerun(c):
        refs = [fn_ref(fid) for fid in c.members]
        pool_args = parse_canonical_args(refs[0].pool_key)
        fresh = manager.fuzz_pool_triangular(pool_args, cfg.inputs, seed)
        jobs = [(ref, fresh, registry.factory_for(ref)) for ref in refs]
        profiles, _failures = execute_profiles(jobs, cfg.execution())
        return [
            IOProfile(p.function_id, p.signature, p.records, refs[0].pool_key)
            for p in profiles
        ]

    report = validate_clusters(clusters, rerun, cfg.similarity())

    for rec, c in zip(records, clusters):
        rec["validity"] = c.validity
    with open(out / "report" / "clusters.jsonl", "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    summary = {
        "schema": 1,
        "clusters": report.clusters,
        "valid": report.clusters - report.false_positives,
        "false_positives": report.false_positives,
        "precision": report.precision,
        "fresh_seed": seed,
    }
    (out / "report" / "validation.json").write_text(
        json.dumps(summary, sort_keys=True, indent=1)
    )
    digest = out / "report" / "digest.txt"
    lines = _digest_lines(records)
    lines.append("== validation ==")
    for rec in records:
        lines.append(f"{rec['cluster_id']} {rec['validity']}")
    lines.append(
        "clusters={} valid={} false_positives={} precision={:.1f}%".format(
            report.clusters,
            report.clusters - report.false_positives,
            report.false_positives,
            100.0 * report.precision,
        )
    )
    digest.write_text("\n".join(lines) + "\n")
    return report
