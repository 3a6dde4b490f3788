"""Python lane of the synthesizer.

Dataflow over a snippet's AST finds argument and return variables; literal
evidence at usage sites infers types for the dynamic language; emission
wraps the verbatim snippet body in a standalone def, replicating the
imports and module-level definitions the body references.

Note: snippets are assumed space-indented (the corpus walker feeds files
as-is; tab-indented files parse but re-indent poorly).
"""

from __future__ import annotations

import ast
import builtins
from dataclasses import dataclass

from crossclone.errors import SynthesisError
from crossclone.model import (
    GENERIC,
    REAL64,
    STRING,
    Signature,
    TypeDescriptor,
    array_desc,
    int_desc,
)
from crossclone.segmenter.windows import Snippet

PY_BUILTINS = frozenset(dir(builtins))

ARRAY_FUNCS = frozenset(
    {"len", "sorted", "list", "reversed", "enumerate", "iter", "zip", "set", "tuple"}
)
NUMERIC_AGG_FUNCS = frozenset({"sum", "min", "max"})
ORDER_OPS = (ast.Lt, ast.LtE, ast.Gt, ast.GtE)
ARITH_OPS = (ast.Sub, ast.Mult, ast.Div, ast.FloorDiv, ast.Mod, ast.Pow)


def snippet_block(snippet: Snippet) -> str:
    """Snippet text with the first line's indentation restored, dedented to
    column zero."""
    raw = snippet.unit.source.encode("utf-8")
    line_start = raw.rfind(b"\n", 0, snippet.span[0]) + 1
    margin = snippet.span[0] - line_start
    text = (b" " * margin + raw[snippet.span[0] : snippet.span[1]]).decode("utf-8")
    lines = text.splitlines()
    margins = [len(l) - len(l.lstrip(" ")) for l in lines if l.strip()]
    cut = min(margins, default=0)
    return "\n".join(l[cut:] if l.strip() else "" for l in lines)


def parse_snippet_statements(snippet: Snippet):
    """Snippet statements as an AST (wrapped in a dummy def so bare
    `return` parses)."""
    block = snippet_block(snippet)
    indented = "\n".join(
        "    " + l if l.strip() else "" for l in block.splitlines()
    )
    try:
        mod = ast.parse("def __snippet__():\n" + indented)
    except SyntaxError as exc:
        raise SynthesisError(f"snippet does not reparse: {exc}")
    return mod.body[0].body


# --- dataflow ---------------------------------------------------------------


@dataclass(frozen=True)
class Dataflow:
    args: tuple  # used but not bound, first-use order
    returns: tuple  # defined or modified, minus const-last-def and loop headers
    bound: frozenset
    modified: frozenset
    used: frozenset


def _root_name(node):
    while isinstance(node, (ast.Subscript, ast.Attribute)):
        node = node.value
    return node.id if isinstance(node, ast.Name) else None


class _Walker:
    def __init__(self):
        self.bound = set()
        self.modified = set()
        self.mod_order = []
        self.used = set()
        self.use_order = []
        self.last_def_const = {}
        self.loop_header = set()
        self.nonheader_bound = set()
        self.scoped = set()  # comprehension/lambda locals: invisible outside

    # -- bookkeeping --

    def _use(self, name):
        if name in self.scoped:
            return
        if name not in self.used:
            self.used.add(name)
            self.use_order.append(name)

    def _modify(self, name, const):
        if name in self.scoped:
            return
        if name not in self.modified:
            self.modified.add(name)
            self.mod_order.append(name)
        self.last_def_const[name] = const

    def _bind(self, name, const, header=False):
        if name in self.scoped:
            return
        self.bound.add(name)
        (self.loop_header if header else self.nonheader_bound).add(name)
        self._modify(name, const)

    # -- expressions --

    def _prescan_scoped(self, node):
        for sub in ast.walk(node):
            if isinstance(sub, (ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)):
                for gen in sub.generators:
                    for t in ast.walk(gen.target):
                        if isinstance(t, ast.Name):
                            self.scoped.add(t.id)
            elif isinstance(sub, ast.Lambda):
                for a in sub.args.args:
                    self.scoped.add(a.arg)

    def expr(self, node):
        if node is None:
            return
        self._prescan_scoped(node)
        for sub in ast.walk(node):
            if isinstance(sub, ast.Name) and isinstance(sub.ctx, ast.Load):
                self._use(sub.id)

    # -- statements --

    def target(self, node, const, in_loop, header=False):
        if isinstance(node, ast.Name):
            self._bind(node.id, const and not in_loop, header)
        elif isinstance(node, (ast.Tuple, ast.List)):
            for el in node.elts:
                self.target(el, False, in_loop, header)
        elif isinstance(node, ast.Starred):
            self.target(node.value, False, in_loop, header)
        elif isinstance(node, (ast.Subscript, ast.Attribute)):
            # a store through a subscript/attribute modifies the base and
            # needs its prior value: use + modify, never a binding
            self.expr(node.value)
            if isinstance(node, ast.Subscript):
                self.expr(node.slice)
            base = _root_name(node)
            if base is not None:
                self._modify(base, False)

    def stmt(self, node, in_loop):
        if isinstance(node, ast.Assign):
            self.expr(node.value)
            const = isinstance(node.value, ast.Constant)
            for t in node.targets:
                self.target(t, const, in_loop)
        elif isinstance(node, ast.AugAssign):
            self.expr(node.value)
            if isinstance(node.target, ast.Name):
                self._use(node.target.id)
                self._modify(node.target.id, False)
            else:
                self.target(node.target, False, in_loop)
        elif isinstance(node, ast.AnnAssign):
            if node.value is not None:
                self.expr(node.value)
                self.target(node.target, isinstance(node.value, ast.Constant), in_loop)
        elif isinstance(node, (ast.For, ast.AsyncFor)):
            self.expr(node.iter)
            self.target(node.target, False, in_loop, header=True)
            for s in node.body:
                self.stmt(s, True)
            for s in node.orelse:
                self.stmt(s, True)
        elif isinstance(node, ast.While):
            self.expr(node.test)
            for s in node.body:
                self.stmt(s, True)
            for s in node.orelse:
                self.stmt(s, True)
        elif isinstance(node, ast.If):
            self.expr(node.test)
            for s in node.body + node.orelse:
                self.stmt(s, in_loop)
        elif isinstance(node, ast.Try):
            for s in node.body:
                self.stmt(s, in_loop)
            for h in node.handlers:
                if h.name:
                    self._bind(h.name, False)
                for s in h.body:
                    self.stmt(s, in_loop)
            for s in node.orelse + node.finalbody:
                self.stmt(s, in_loop)
        elif isinstance(node, (ast.With, ast.AsyncWith)):
            for item in node.items:
                self.expr(item.context_expr)
                if item.optional_vars is not None:
                    self.target(item.optional_vars, False, in_loop)
            for s in node.body:
                self.stmt(s, in_loop)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            self._bind(node.name, False)  # body is a new scope: skipped
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                self._bind((alias.asname or alias.name).split(".")[0], False)
        elif isinstance(node, (ast.Global, ast.Nonlocal, ast.Pass, ast.Break, ast.Continue)):
            pass
        else:
            # Return / Expr / Raise / Assert / Delete ...: uses only
            for child in ast.iter_child_nodes(node):
                if isinstance(child, ast.expr):
                    self.expr(child)


def module_level_names(unit) -> frozenset:
    """Top-level names of the snippet's origin module (resolved by source
    replication, never turned into arguments)."""
    try:
        tree = ast.parse(unit.source)
    except SyntaxError:
        return frozenset()
    names = set()
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            names.add(node.name)
        elif isinstance(node, ast.Assign):
            for t in node.targets:
                if isinstance(t, ast.Name):
                    names.add(t.id)
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                names.add((alias.asname or alias.name).split(".")[0])
    return frozenset(names)


def analyze(snippet: Snippet, stmts=None) -> Dataflow:
    stmts = stmts if stmts is not None else parse_snippet_statements(snippet)
    walker = _Walker()
    for s in stmts:
        walker.stmt(s, in_loop=False)
    module_names = module_level_names(snippet.unit)
    args = tuple(
        n
        for n in walker.use_order
        if n not in walker.bound and n not in PY_BUILTINS and n not in module_names
    )
    returns = tuple(
        n
        for n in walker.mod_order
        if not walker.last_def_const.get(n, False)
        and not (n in walker.loop_header and n not in walker.nonheader_bound)
    )
    return Dataflow(
        args=args,
        returns=returns,
        bound=frozenset(walker.bound),
        modified=frozenset(walker.modified),
        used=frozenset(walker.used),
    )


# --- type inference ---------------------------------------------------------


class _Evidence:
    __slots__ = ("string", "real", "int", "weak_int", "array", "elem")

    def __init__(self):
        self.string = self.real = self.int = self.weak_int = self.array = False
        self.elem = None

    def elem_evidence(self):
        if self.elem is None:
            self.elem = _Evidence()
        return self.elem

    def resolve(self, int_width=64, depth=0) -> TypeDescriptor:
        if self.array and depth == 0:
            elem = self.elem.resolve(int_width, 1) if self.elem else GENERIC
            return array_desc(elem)
        if self.string:
            return STRING
        if self.real:
            return REAL64
        if self.int or self.weak_int:
            return int_desc(int_width)
        return GENERIC


def _literal_kind(node):
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool):
            return None
        if isinstance(node.value, int):
            return "int"
        if isinstance(node.value, float):
            return "real"
        if isinstance(node.value, str):
            return "string"
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        return _literal_kind(node.operand)
    return None


def _is_str_call(node):
    return (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "str"
    )


def _scalar_evidence(ev: _Evidence, other, op):
    kind = _literal_kind(other)
    if kind == "string":
        ev.string = True
    elif kind == "real":
        ev.real = True
    elif kind == "int":
        ev.int = True
    elif isinstance(op, ast.Add):
        if _is_str_call(other):
            ev.string = True
        else:
            ev.weak_int = True  # numeric default when no string evidence
    else:
        ev.weak_int = True


def _collect(stmts, match, ev: _Evidence):
    """Accumulate usage-site evidence for expression nodes chosen by
    `match` over every statement."""
    for stmt in stmts:
        for node in ast.walk(stmt):
            if isinstance(node, ast.BinOp):
                if match(node.left):
                    _scalar_evidence(ev, node.right, node.op)
                if match(node.right):
                    _scalar_evidence(ev, node.left, node.op)
            elif isinstance(node, ast.Compare):
                operands = [node.left] + list(node.comparators)
                for idx, operand in enumerate(operands):
                    if not match(operand):
                        continue
                    op = node.ops[min(idx, len(node.ops) - 1)]
                    for k, other in enumerate(operands):
                        if k != idx:
                            _scalar_evidence(ev, other, op)
            elif isinstance(node, ast.Subscript) and match(node.value):
                ev.array = True
            elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
                if any(match(a) for a in node.args):
                    if node.func.id in ARRAY_FUNCS:
                        ev.array = True
                    elif node.func.id in NUMERIC_AGG_FUNCS:
                        ev.array = True
                        ev.elem_evidence().weak_int = True
            elif isinstance(node, (ast.For, ast.AsyncFor)) and match(node.iter):
                ev.array = True


def infer_argument_types(snippet: Snippet, arg_names, stmts=None) -> dict:
    """Literal-evidence inference per argument; generic when nothing is
    known. Array element types come from the same rules applied to the
    argument's subscript expressions."""
    stmts = stmts if stmts is not None else parse_snippet_statements(snippet)
    out = {}
    for name in arg_names:
        ev = _Evidence()

        def is_var(node, _name=name):
            return isinstance(node, ast.Name) and node.id == _name

        _collect(stmts, is_var, ev)
        if ev.array:

            def is_elem(node, _name=name):
                return (
                    isinstance(node, ast.Subscript)
                    and isinstance(node.value, ast.Name)
                    and node.value.id == _name
                )

            _collect(stmts, is_elem, ev.elem_evidence())
        out[name] = ev.resolve(int_width=64)
    return out


# --- emission ---------------------------------------------------------------


def _module_context(unit):
    """(imports, ordered decls name -> (text, referenced names))."""
    tree = ast.parse(unit.source)
    imports, decls = [], {}
    for node in tree.body:
        seg = ast.get_source_segment(unit.source, node)
        if seg is None:
            continue
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            imports.append(seg)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            refs = {
                n.id
                for n in ast.walk(node)
                if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load)
            }
            decls[node.name] = (seg, refs)
        elif isinstance(node, ast.Assign) and all(
            isinstance(t, ast.Name) for t in node.targets
        ):
            refs = {
                n.id
                for n in ast.walk(node.value)
                if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load)
            }
            for t in node.targets:
                decls[t.id] = (seg, refs)
    return imports, decls


def context_block(unit, needed_names) -> str:
    """Imports plus the transitive closure of referenced module-level
    definitions, in original source order."""
    imports, decls = _module_context(unit)
    include = set()
    frontier = [n for n in needed_names if n in decls]
    while frontier:
        name = frontier.pop()
        if name in include:
            continue
        include.add(name)
        _, refs = decls[name]
        frontier.extend(r for r in refs if r in decls and r not in include)
    ordered = [name for name in decls if name in include]
    parts = list(imports) + [decls[name][0] for name in ordered]
    return ("\n".join(parts) + "\n\n") if parts else ""


def emit_source(snippet: Snippet, fid: str, arg_names, return_var, context_names):
    body = snippet_block(snippet)
    ctx = context_block(snippet.unit, context_names)
    lines = [f"def {fid}({', '.join(arg_names)}):"]
    for line in body.splitlines():
        lines.append(("    " + line) if line.strip() else "")
    if return_var is not None:
        lines.append(f"    return {return_var}")
    source = ctx + "\n".join(lines) + "\n"
    try:
        compile(source, f"<{fid}>", "exec")
    except SyntaxError as exc:
        raise SynthesisError(f"{fid} does not compile: {exc}")
    return source


def emit_member_projection(base_fn, fid, member_path):
    """Wrapper projecting an object member off the base function's result."""
    args = ", ".join(base_fn.arg_names)
    access = "".join(f".{m}" for m in member_path)
    source = (
        base_fn.source_text
        + f"\n\ndef {fid}({args}):\n    return {base_fn.entry}({args}){access}\n"
    )
    compile(source, f"<{fid}>", "exec")
    return source
