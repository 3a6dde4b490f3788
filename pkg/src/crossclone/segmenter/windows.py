"""Statement windows: the sliding-window segmentation over function bodies.

A function body is a list of sibling statements; every contiguous window of
at least `min_stmt` siblings becomes a snippet, and statements with nested
bodies (loops, conditionals, try, blocks) are segmented recursively, one
sibling list per branch. Duplicate spans arising from the recursion are
dropped, keeping first-occurrence order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from crossclone.model import LanguageId

STATEMENT_KINDS = (
    "declaration",
    "assignment",
    "block",
    "loop",
    "conditional",
    "try",
    "other",
)

NESTING_KINDS = ("block", "loop", "conditional", "try")


@dataclass(frozen=True)
class StatementNode:
    """One statement with its byte span and nested statement lists.

    `blocks` holds one tuple of statements per nested branch (loop body,
    then/else branches, try sections) so windows never cross branches.
    """

    kind: str
    span: tuple  # (start_byte, end_byte)
    blocks: tuple = ()  # tuple[tuple[StatementNode, ...], ...]

    def __post_init__(self):
        if self.kind not in STATEMENT_KINDS:
            raise ValueError(f"unknown statement kind: {self.kind!r}")
        if self.blocks and self.kind not in NESTING_KINDS:
            raise ValueError(f"{self.kind} statements carry no nested bodies")

    @property
    def children(self) -> tuple:
        return tuple(s for block in self.blocks for s in block)

    @property
    def has_children(self) -> bool:
        return any(self.blocks)


@dataclass(frozen=True)
class FunctionUnit:
    """A parsed function: body statement tree plus what synthesis needs."""

    name: str  # qualified (Class.method or module-level name)
    language: LanguageId
    file: str
    source: str  # full file text
    body: tuple  # tuple[StatementNode, ...]
    span: tuple  # byte span of the whole definition
    params: tuple  # tuple[(name, TypeDescriptor | None), ...]
    return_type: object = None  # TypeDescriptor | None
    has_return: bool = False
    problem: Optional[str] = None
    author: Optional[str] = None
    # front-end context for synthesis (imports, top-level decls, classes);
    # the python lane reparses `source` instead and leaves this None
    context: object = field(compare=False, default=None)
    # raw declared return token (static lanes), for private-only-class checks
    return_type_token: str = ""

    def text(self, span) -> str:
        raw = self.source.encode("utf-8")
        return raw[span[0] : span[1]].decode("utf-8")


@dataclass(frozen=True)
class Snippet:
    """A window of consecutive sibling statements from one function body."""

    parent_function: str
    statements: tuple  # tuple[StatementNode, ...]
    language: LanguageId
    span: tuple
    depth: int
    unit: FunctionUnit = field(compare=False, repr=False, default=None)

    @property
    def file(self) -> str:
        return self.unit.file if self.unit else ""

    @property
    def text(self) -> str:
        return self.unit.text(self.span)

    @property
    def is_whole_body(self) -> bool:
        return len(self.statements) == len(self.unit.body) and all(
            a is b for a, b in zip(self.statements, self.unit.body)
        )


def segment_nodes(stmts, min_stmt: int):
    """Sliding-window enumeration over one sibling list, recursing into
    nested bodies. Yields (window, depth) pairs in traversal order with
    span-level de-duplication. The outer loop deliberately stops before the
    last index, so a single-statement list yields nothing at any min_stmt.
    """
    if min_stmt < 1:
        raise ValueError("min_stmt must be >= 1")
    out = []
    seen_spans = set()
    visited = set()

    def walk(siblings, depth):
        n = len(siblings)
        for i in range(0, n - 1):
            window = []
            for j in range(i, n):
                node = siblings[j]
                window.append(node)
                if len(window) >= min_stmt:
                    span = (window[0].span[0], window[-1].span[1])
                    if span not in seen_spans:
                        seen_spans.add(span)
                        out.append((tuple(window), depth))
                if node.has_children and id(node) not in visited:
                    visited.add(id(node))
                    for block in node.blocks:
                        walk(tuple(block), depth + 1)

    walk(tuple(stmts), 0)
    return out


def segment(unit: FunctionUnit, min_stmt: int):
    """All snippets of one function, in Algorithm-order."""
    snippets = []
    for window, depth in segment_nodes(unit.body, min_stmt):
        snippets.append(
            Snippet(
                parent_function=unit.name,
                statements=window,
                language=unit.language,
                span=(window[0].span[0], window[-1].span[1]),
                depth=depth,
                unit=unit,
            )
        )
    return snippets
