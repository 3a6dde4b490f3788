"""Command-line driver.

Subcommands: `detect` runs the full behavioral-clone pipeline, `validate`
re-checks a finished run's clusters on fresh fuzzed inputs, `baseline-ast`
runs the syntactic type-III comparison over the same segmentation, and
`import-pairs` converts an external tool's clone-pair list into this
cluster-report schema (pairs sharing a function merge into one cluster).

Configuration comes from flags and an optional --config JSON file only;
environment variables are never consulted, so runs stay reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from crossclone.baseline import ast_type3_clones
from crossclone.errors import ConfigError, CrosscloneError
from crossclone.model import language_by_name
from crossclone.pipeline import RunConfig, run_detect, run_validate
from crossclone.segmenter import segment
from crossclone.segmenter.corpus import parse_corpus


def _parse_assignments(pairs, what):
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--{what} expects LANG={'PATH' if what == 'corpus' else 'CMD'}, got {item!r}")
        out[key] = value
    return out


def _load_config_file(path):
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"unreadable config file {path}: {exc}")


def _build_run_config(args) -> RunConfig:
    base = _load_config_file(args.config)
    corpora = dict(base.get("corpora", {}))
    corpora.update(_parse_assignments(args.corpus, "corpus"))
    if not corpora:
        raise ConfigError("no corpus given (use --corpus LANG=PATH)")
    if args.lang:
        unknown = set(args.lang) - set(corpora)
        if unknown:
            raise ConfigError(f"--lang without corpus: {', '.join(sorted(unknown))}")
        corpora = {k: v for k, v in corpora.items() if k in args.lang}
    shims = dict(base.get("shims", {}))
    for lang, cmd in _parse_assignments(args.shim, "shim").items():
        shims[lang] = cmd.split()
    values = {
        "min_stmt": args.min_stmt,
        "args_max": args.args_max,
        "inputs": args.inputs,
        "sim_t": args.sim_t,
        "timeout_s": args.timeout,
        "seed": args.seed,
        "workers": args.workers,
        "out_dir": args.out,
        "exception_match": args.exception_match,
    }
    merged = {
        key: (base.get(key) if values[key] is None else values[key])
        for key in values
    }
    merged = {k: v for k, v in merged.items() if v is not None}
    return RunConfig(corpora=corpora, shims=shims, **merged)


def cmd_detect(args) -> int:
    cfg = _build_run_config(args)
    result = run_detect(cfg)
    stats = result.stats
    print(
        "snippets={snippets} functions={functions_generated} pools={pools}".format(
            **stats
        )
    )
    print(f"#C={stats['clusters']} #M={stats['clones']}")
    print(f"report: {result.out_dir / 'report' / 'clusters.jsonl'}")
    return 0


def cmd_validate(args) -> int:
    report = run_validate(args.out, fresh_seed=args.seed)
    valid = report.clusters - report.false_positives
    print(
        f"clusters={report.clusters} valid={valid} "
        f"false_positives={report.false_positives} "
        f"precision={100.0 * report.precision:.1f}%"
    )
    return 0  # false positives are findings, not failures


def cmd_baseline_ast(args) -> int:
    corpora = _parse_assignments(args.corpus, "corpus")
    if len(corpora) != 1:
        raise ConfigError(
            "automated AST comparison is single-language: give exactly one corpus"
        )
    lang_name, path = next(iter(corpora.items()))
    language = language_by_name(lang_name)
    units, _skipped = parse_corpus(path, language)
    snippets = [s for unit in units for s in segment(unit, args.min_stmt)]
    clusters = ast_type3_clones(snippets)
    out = Path(args.out)
    (out / "report").mkdir(parents=True, exist_ok=True)
    records = []
    for idx, members in enumerate(clusters):
        records.append(
            {
                "record": "cluster",
                "schema": 1,
                "method": "ast-type3",
                "cluster_id": f"a{idx:04d}",
                "sim_t": 1.0,
                "representative": _snippet_id(members[0]),
                "members": [
                    {
                        "id": _snippet_id(s),
                        "language": s.language.name,
                        "origin": _snippet_id(s),
                        "function": s.parent_function,
                        "whole_method": s.is_whole_body,
                    }
                    for s in members
                ],
                "validity": "unvalidated",
            }
        )
    with open(out / "report" / "clusters.jsonl", "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    print(f"snippets={len(snippets)} #C={len(records)} "
          f"#M={sum(len(r['members']) for r in records)}")
    return 0


def _snippet_id(snippet):
    return f"{snippet.file}:{snippet.span[0]}-{snippet.span[1]}"


def cmd_import_pairs(args) -> int:
    try:
        pairs = json.loads(Path(args.pairs).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"unreadable pairs file: {exc}")
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = []
    for pair in pairs:
        a, b = pair[0], pair[1]
        for fid in (a, b):
            if fid not in parent:
                parent[fid] = fid
                order.append(fid)
        parent[find(b)] = find(a)
    groups = {}
    for fid in order:
        groups.setdefault(find(fid), []).append(fid)
    out = Path(args.out)
    (out / "report").mkdir(parents=True, exist_ok=True)
    records = []
    for members in groups.values():
        if len(members) < 2:
            continue
        records.append(
            {
                "record": "cluster",
                "schema": 1,
                "method": "imported-pairs",
                "cluster_id": f"i{len(records):04d}",
                "sim_t": None,
                "representative": members[0],
                "members": [
                    {"id": m, "language": None, "origin": None,
                     "function": None, "whole_method": None}
                    for m in members
                ],
                "validity": "unvalidated",
            }
        )
    with open(out / "report" / "clusters.jsonl", "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    print(f"#C={len(records)} #M={sum(len(r['members']) for r in records)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossclone",
        description="Cross-language semantic clone detection by IO behavior",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="run the full detection pipeline")
    detect.add_argument("--corpus", action="append", metavar="LANG=PATH")
    detect.add_argument("--lang", action="append", help="restrict to these languages")
    detect.add_argument("--config", help="JSON config file (flags override)")
    detect.add_argument("--min-stmt", type=int, default=None)
    detect.add_argument("--args-max", type=int, default=None)
    detect.add_argument("--inputs", type=int, default=None)
    detect.add_argument("--sim-t", type=float, default=None)
    detect.add_argument("--timeout", type=float, default=None)
    detect.add_argument("--seed", type=int, default=None)
    detect.add_argument("--workers", type=int, default=None)
    detect.add_argument("--out", default="out")
    detect.add_argument("--shim", action="append", metavar="LANG=CMD")
    detect.add_argument("--exception-match", action="store_true", default=None)
    detect.set_defaults(func=cmd_detect)

    validate = sub.add_parser("validate", help="false-positive pass over a run")
    validate.add_argument("--out", default="out", help="detect run directory")
    validate.add_argument("--seed", type=int, default=None, help="fresh pool seed")
    validate.set_defaults(func=cmd_validate)

    baseline = sub.add_parser("baseline-ast", help="syntactic type-III baseline")
    baseline.add_argument("--corpus", action="append", metavar="LANG=PATH")
    baseline.add_argument("--min-stmt", type=int, default=2)
    baseline.add_argument("--out", default="out-ast")
    baseline.set_defaults(func=cmd_baseline_ast)

    imp = sub.add_parser("import-pairs", help="convert a clone-pair list")
    imp.add_argument("--pairs", required=True, help="JSON array of [a, b] pairs")
    imp.add_argument("--out", default="out-import")
    imp.set_defaults(func=cmd_import_pairs)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CrosscloneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
