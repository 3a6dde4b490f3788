"""Python source front end: parse files into FunctionUnits with statement
trees classified by the shared taxonomy. Spans are UTF-8 byte offsets."""

from __future__ import annotations

import ast

from crossclone.errors import ParseError
from crossclone.model import PYTHON
from crossclone.segmenter.windows import FunctionUnit, StatementNode


def _line_byte_offsets(source: str):
    offsets = [0]
    for line in source.splitlines(keepends=True):
        offsets.append(offsets[-1] + len(line.encode("utf-8")))
    return offsets


class _SpanMap:
    def __init__(self, source: str):
        self.line_offsets = _line_byte_offsets(source)

    def span(self, node) -> tuple:
        # col_offset / end_col_offset are already UTF-8 byte columns.
        start = self.line_offsets[node.lineno - 1] + node.col_offset
        end = self.line_offsets[node.end_lineno - 1] + node.end_col_offset
        return (start, end)


def _classify(node: ast.stmt, spans: _SpanMap) -> StatementNode:
    span = spans.span(node)
    if isinstance(node, ast.AnnAssign) and node.value is None:
        return StatementNode("declaration", span)
    if isinstance(node, (ast.Assign, ast.AugAssign, ast.AnnAssign)):
        return StatementNode("assignment", span)
    if isinstance(node, (ast.For, ast.AsyncFor, ast.While)):
        blocks = [_block(node.body, spans)]
        if node.orelse:
            blocks.append(_block(node.orelse, spans))
        return StatementNode("loop", span, tuple(blocks))
    if isinstance(node, ast.If):
        blocks = [_block(node.body, spans)]
        if node.orelse:
            blocks.append(_block(node.orelse, spans))
        return StatementNode("conditional", span, tuple(blocks))
    if isinstance(node, ast.Try):
        blocks = [_block(node.body, spans)]
        for handler in node.handlers:
            blocks.append(_block(handler.body, spans))
        if node.orelse:
            blocks.append(_block(node.orelse, spans))
        if node.finalbody:
            blocks.append(_block(node.finalbody, spans))
        return StatementNode("try", span, tuple(blocks))
    if isinstance(node, (ast.With, ast.AsyncWith)):
        return StatementNode("block", span, (_block(node.body, spans),))
    match_cls = getattr(ast, "Match", None)
    if match_cls is not None and isinstance(node, match_cls):
        blocks = tuple(_block(case.body, spans) for case in node.cases)
        return StatementNode("conditional", span, blocks)
    # Nested defs/classes stay opaque: they open a new scope, not a branch.
    return StatementNode("other", span)


def _block(stmts, spans: _SpanMap) -> tuple:
    return tuple(_classify(s, spans) for s in stmts)


def _has_value_return(stmts) -> bool:
    for stmt in stmts:
        for node in ast.walk(stmt):
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda)):
                continue
            if isinstance(node, ast.Return) and node.value is not None:
                return True
    return False


def parse_functions(source_text: str, file: str = "<source>"):
    """One FunctionUnit per def/method; raises ParseError on bad syntax."""
    try:
        tree = ast.parse(source_text)
    except SyntaxError as exc:
        raise ParseError(file, position=(exc.lineno or 0, exc.offset or 0)) from exc
    spans = _SpanMap(source_text)
    units = []

    def visit(body, prefix):
        for node in body:
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                qual = f"{prefix}{node.name}"
                arg_nodes = node.args.posonlyargs + node.args.args
                params = tuple((a.arg, None) for a in arg_nodes)
                units.append(
                    FunctionUnit(
                        name=qual,
                        language=PYTHON,
                        file=file,
                        source=source_text,
                        body=_block(node.body, spans),
                        span=spans.span(node),
                        params=params,
                        return_type=None,
                        has_return=_has_value_return(node.body),
                    )
                )
            elif isinstance(node, ast.ClassDef):
                visit(node.body, f"{prefix}{node.name}.")

    visit(tree.body, "")
    return units
