"""Function synthesis: turn snippets into standalone compilable functions.

Per snippet: dataflow finds argument and return variables; each return
variable yields one function, a snippet covering a whole returning method
additionally yields the method wrapper; object returns expand into one
function per public leaf member; and every function is emitted in all
|args|! argument orders (bounded by ARGS_MAX).
"""

from __future__ import annotations

import itertools

from crossclone.errors import SynthesisError
from crossclone.model import GENERIC, Signature
from crossclone.segmenter.windows import Snippet
from crossclone.synthesizer import py_lane, static_lane
from crossclone.synthesizer.common import (
    ARGS_MAX_DEFAULT,
    SynthesisStats,
    SynthesizedFunction,
    variant_id,
)

__all__ = [
    "ARGS_MAX_DEFAULT",
    "SynthesisStats",
    "SynthesizedFunction",
    "synthesize_snippet",
    "synthesize_snippets",
    "infer_io_variables",
    "infer_types",
    "expand_object_returns",
    "permute_arguments",
]


def _py_flow(snippet: Snippet):
    stmts = py_lane.parse_snippet_statements(snippet)
    flow = py_lane.analyze(snippet, stmts)
    return stmts, flow


def infer_io_variables(snippet: Snippet):
    """(argument variables, return-variable candidates) for a snippet."""
    if snippet.language.is_dynamic:
        _, flow = _py_flow(snippet)
        return flow.args, flow.returns
    sflow = static_lane.StaticFlow(snippet)
    return sflow.args(), sflow.returns()


def infer_types(snippet: Snippet, arg_names=None) -> dict:
    """Usage-site type inference for dynamic-language snippets (static
    languages take declared types directly)."""
    stmts, flow = _py_flow(snippet)
    names = arg_names if arg_names is not None else flow.args
    return py_lane.infer_argument_types(snippet, names, stmts)


def _context_names(snippet, flow_used):
    module_names = py_lane.module_level_names(snippet.unit)
    return sorted(set(flow_used) & module_names)


def _emit(snippet, fid, names, descs, ret_desc, return_var, ctx, predeclare=()):
    if snippet.language.is_dynamic:
        return py_lane.emit_source(snippet, fid, names, return_var, ctx)
    return static_lane.emit_source(
        snippet, fid, names, descs, ret_desc, return_var, ctx, predeclare
    )


def _expand_leaves(ret_desc):
    """Leaf (member_path, descriptor) pairs of an object descriptor."""
    leaves = []

    def rec(desc, path):
        for name, d in desc.members:
            if d.kind == "object":
                rec(d, path + (name,))
            else:
                leaves.append((path + (name,), d))

    rec(ret_desc, ())
    return leaves


def expand_object_returns(fn: SynthesizedFunction):
    """One function per public leaf member of an object return; the object
    function itself is replaced by its projections."""
    ret = fn.signature.ret
    if ret.kind != "object":
        return [fn]
    front = fn.origin.unit.context if fn.origin is not None else None
    out = []
    for path, desc in _expand_leaves(ret):
        fid = variant_id(fn.origin, fn.return_var, path, fn.language, fn.permutation)
        if fn.language == "python":
            source = py_lane.emit_member_projection(fn, fid, path)
        else:
            source = static_lane.emit_member_projection(fn, fid, path, desc, front)
        out.append(
            SynthesizedFunction(
                id=fid,
                origin=fn.origin,
                language=fn.language,
                signature=Signature(fn.signature.args, desc),
                arg_names=fn.arg_names,
                return_var=fn.return_var,
                source_text=source,
                permutation=fn.permutation,
                member_path=path,
                whole_method=fn.whole_method,
            )
        )
    return out


class _Candidate:
    """One (return slot, argument list) pair awaiting permutation."""

    def __init__(self, snippet, arg_names, arg_descs, ret_desc, return_var,
                 whole_method, ctx, predeclare=()):
        self.snippet = snippet
        self.arg_names = tuple(arg_names)
        self.arg_descs = tuple(arg_descs)
        self.ret_desc = ret_desc
        self.return_var = return_var
        self.whole_method = whole_method
        self.ctx = ctx
        self.predeclare = tuple(predeclare)

    def emit_variant(self, perm) -> SynthesizedFunction:
        names = tuple(self.arg_names[i] for i in perm)
        descs = tuple(self.arg_descs[i] for i in perm)
        sig = Signature(descs, self.ret_desc)
        fid = variant_id(
            self.snippet, self.return_var, (), self.snippet.language.name, perm
        )
        source = _emit(
            self.snippet, fid, names, descs, self.ret_desc, self.return_var,
            self.ctx, self.predeclare,
        )
        return SynthesizedFunction(
            id=fid,
            origin=self.snippet,
            language=self.snippet.language.name,
            signature=sig,
            arg_names=names,
            return_var=self.return_var,
            source_text=source,
            permutation=tuple(perm),
            whole_method=self.whole_method,
        )


def permute_arguments(fn: SynthesizedFunction):
    """All |args|! argument-order variants of a base function (identity
    included); variants share the origin snippet and their permutations are
    expressed over the base argument order."""
    snippet = fn.origin
    if snippet.language.is_dynamic:
        _, flow = _py_flow(snippet)
        ctx = _context_names(snippet, flow.used)
        predeclare = ()
    else:
        sflow = static_lane.StaticFlow(snippet)
        ctx = sorted(sflow.context_refs)
        predeclare = _static_predeclare(sflow)
    n = len(fn.arg_names)
    base_names = [None] * n
    base_descs = [None] * n
    for pos, k in enumerate(fn.permutation):
        base_names[k] = fn.arg_names[pos]
        base_descs[k] = fn.signature.args[pos]
    cand = _Candidate(
        snippet, base_names, base_descs, fn.signature.ret,
        fn.return_var, fn.whole_method, ctx, predeclare,
    )
    variants = []
    for perm in itertools.permutations(range(n)):
        if tuple(perm) == fn.permutation:
            variants.append(fn)
        else:
            variants.append(cand.emit_variant(perm))
    return variants


def _static_predeclare(sflow):
    """Variables assigned in the snippet without a declaration: the wrapper
    declares them so the emitted source compiles."""
    args = set(sflow.args())
    return tuple(
        n for n in sflow.modified_order if n not in sflow.bound and n not in args
    )


def synthesize_snippet(snippet: Snippet, args_max: int = ARGS_MAX_DEFAULT):
    """All synthesized functions for one snippet plus drop accounting."""
    stats = SynthesisStats(snippets=1)
    out = []
    dynamic = snippet.language.is_dynamic

    try:
        if dynamic:
            stmts, flow = _py_flow(snippet)
            args, returns = flow.args, flow.returns
            ctx = _context_names(snippet, flow.used)
            predeclare = ()
        else:
            sflow = static_lane.StaticFlow(snippet)
            args, returns = sflow.args(), sflow.returns()
            ctx = sorted(sflow.context_refs)
            predeclare = _static_predeclare(sflow)
    except SynthesisError:
        stats.dropped_uncompilable += 1
        return out, stats

    unit = snippet.unit
    whole = snippet.is_whole_body and unit.has_return
    if not returns and not whole:
        stats.dropped_no_return += 1
        return out, stats
    if len(args) > args_max:
        stats.dropped_too_many_args += 1
        return out, stats

    candidates = []
    # Per-return-variable functions. A whole-body snippet of a returning
    # method yields only the method wrapper: the body's own return would
    # shadow every appended `return <var>`, duplicating the wrapper.
    if returns and not whole:
        if not args:
            stats.dropped_no_args += 1  # zero-argument functions: never admitted
        else:
            if dynamic:
                descs = py_lane.infer_argument_types(snippet, args, stmts)
                arg_descs = tuple(descs[a] for a in args)
                ret_of = lambda _v: GENERIC
            else:
                arg_descs = tuple(sflow.resolve_type(a) for a in args)
                ret_of = sflow.resolve_type
            for ret_var in returns:
                candidates.append(
                    _Candidate(
                        snippet, args, arg_descs, ret_of(ret_var), ret_var,
                        whole_method=False, ctx=ctx, predeclare=predeclare,
                    )
                )

    if whole:
        params = tuple(n for n, _ in unit.params)
        if not params:
            stats.dropped_no_args += 1
        elif len(params) > args_max:
            stats.dropped_too_many_args += 1
        else:
            if dynamic:
                wdescs = py_lane.infer_argument_types(snippet, params, stmts)
                w_descs = tuple(wdescs[p] for p in params)
                w_ret = GENERIC
            else:
                w_descs = tuple(
                    d if d is not None else GENERIC for _, d in unit.params
                )
                if unit.return_type is None and _private_only_class(unit):
                    stats.dropped_no_accessible_members += 1
                    w_descs = None
                w_ret = unit.return_type or GENERIC
            if w_descs is not None:
                candidates.append(
                    _Candidate(
                        snippet, params, w_descs, w_ret, None,
                        whole_method=True, ctx=ctx, predeclare=(),
                    )
                )

    for cand in candidates:
        for perm in itertools.permutations(range(len(cand.arg_names))):
            try:
                variant = cand.emit_variant(perm)
            except SynthesisError:
                stats.dropped_uncompilable += 1
                continue
            if variant.signature.ret.kind == "object":
                expanded = expand_object_returns(variant)
                out.extend(expanded)
                stats.functions += len(expanded)
            else:
                out.append(variant)
                stats.functions += 1
    return out, stats


def _private_only_class(unit) -> bool:
    front = unit.context
    token = unit.return_type_token
    if front is None or not token:
        return False
    fields = front.classes.get(token)
    if not fields:
        return False
    return front.class_descriptor(token) is None


def synthesize_snippets(snippets, args_max: int = ARGS_MAX_DEFAULT):
    functions, stats = [], SynthesisStats()
    seen = set()
    for snippet in snippets:
        fns, s = synthesize_snippet(snippet, args_max)
        stats.merge(s)
        for fn in fns:
            if fn.id not in seen:
                seen.add(fn.id)
                functions.append(fn)
    return functions, stats
