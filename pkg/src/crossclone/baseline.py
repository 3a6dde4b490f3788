"""Syntactic type-III baseline: snippets cluster when their normalized ASTs
(identifiers and literals abstracted to kind tokens) are equal or differ by
at most one node under tree edit distance. Single-language by construction:
the normalized trees of different languages are not comparable."""

from __future__ import annotations

import ast
from dataclasses import dataclass

from crossclone.errors import ConfigError, SynthesisError
from crossclone.segmenter.windows import Snippet
from crossclone.synthesizer import py_lane


@dataclass(frozen=True)
class NormNode:
    label: str
    children: tuple = ()


def tree_size(node: NormNode) -> int:
    return 1 + sum(tree_size(c) for c in node.children)


# --- normalization -----------------------------------------------------------


def _norm_py(node) -> NormNode:
    if isinstance(node, (ast.Name, ast.arg)):
        return NormNode("id")
    if isinstance(node, ast.Constant):
        return NormNode("lit")
    if isinstance(node, ast.Attribute):
        return NormNode("attr", (_norm_py(node.value),))
    children = []
    for child in ast.iter_child_nodes(node):
        if isinstance(child, (ast.Load, ast.Store, ast.Del, ast.expr_context)):
            continue
        children.append(_norm_py(child))
    return NormNode(type(node).__name__, tuple(children))


def _normalize_python(snippet: Snippet) -> NormNode:
    stmts = py_lane.parse_snippet_statements(snippet)
    return NormNode("body", tuple(_norm_py(s) for s in stmts))


def _normalize_static(snippet: Snippet) -> NormNode:
    from crossclone.segmenter.cfamily import tokenize

    text = snippet.text
    base = snippet.span[0]

    def node_of(stmt) -> NormNode:
        child_spans = [
            (c.span[0] - base, c.span[1] - base)
            for block in stmt.blocks
            for c in block
        ]
        lo, hi = stmt.span[0] - base, stmt.span[1] - base
        leaves = []
        for tok in tokenize(text[lo:hi]):
            pos = lo + tok.start
            if any(s <= pos < e for s, e in child_spans):
                continue
            if tok.kind == "ident":
                leaves.append(NormNode("id"))
            elif tok.kind in ("number", "string", "char"):
                leaves.append(NormNode("lit"))
            else:
                leaves.append(NormNode(tok.text))
        nested = tuple(
            NormNode("block", tuple(node_of(c) for c in block))
            for block in stmt.blocks
        )
        return NormNode(stmt.kind, tuple(leaves) + nested)

    return NormNode("body", tuple(node_of(s) for s in snippet.statements))


def normalize(snippet: Snippet) -> NormNode:
    if snippet.language.is_dynamic:
        return _normalize_python(snippet)
    return _normalize_static(snippet)


# --- tree edit distance (Zhang-Shasha, unit costs) ---------------------------


class _Annotated:
    def __init__(self, root: NormNode):
        self.labels = []
        self.l = []  # leftmost-leaf postorder index per node
        self._post(root)
        n = len(self.labels)
        seen = set()
        keyroots = []
        for i in range(n - 1, -1, -1):
            if self.l[i] not in seen:
                seen.add(self.l[i])
                keyroots.append(i)
        self.keyroots = sorted(keyroots)

    def _post(self, node):
        first = None
        for child in node.children:
            idx = self._post(child)
            if first is None:
                first = idx
        self.labels.append(node.label)
        self.l.append(first if first is not None else len(self.labels) - 1)
        return self.l[-1]


def tree_edit_distance(t1: NormNode, t2: NormNode) -> int:
    a, b = _Annotated(t1), _Annotated(t2)
    n, m = len(a.labels), len(b.labels)
    td = [[0] * m for _ in range(n)]
    for i in a.keyroots:
        for j in b.keyroots:
            _treedist(i, j, a, b, td)
    return td[n - 1][m - 1]


def _treedist(i, j, a, b, td):
    li, lj = a.l[i], b.l[j]
    rows, cols = i - li + 2, j - lj + 2
    fd = [[0] * cols for _ in range(rows)]
    for x in range(1, rows):
        fd[x][0] = fd[x - 1][0] + 1
    for y in range(1, cols):
        fd[0][y] = fd[0][y - 1] + 1
    for x in range(1, rows):
        for y in range(1, cols):
            ni, nj = li + x - 1, lj + y - 1
            if a.l[ni] == li and b.l[nj] == lj:
                cost = 0 if a.labels[ni] == b.labels[nj] else 1
                fd[x][y] = min(
                    fd[x - 1][y] + 1, fd[x][y - 1] + 1, fd[x - 1][y - 1] + cost
                )
                td[ni][nj] = fd[x][y]
            else:
                fd[x][y] = min(
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[a.l[ni] - li][b.l[nj] - lj] + td[ni][nj],
                )


def type3_equal(a: NormNode, b: NormNode) -> bool:
    if a == b:
        return True
    if abs(tree_size(a) - tree_size(b)) > 1:
        return False
    return tree_edit_distance(a, b) <= 1


# --- clustering ---------------------------------------------------------------


def ast_type3_clones(snippets):
    """Representative-based grouping of same-language snippets whose
    normalized trees are type-III equal; returns clusters with >= 2 members.
    Unparsable snippets are skipped."""
    languages = {s.language.name for s in snippets}
    if len(languages) > 1:
        raise ConfigError(
            "AST comparison is single-language; got " + ", ".join(sorted(languages))
        )
    normalized = []
    for s in snippets:
        try:
            normalized.append((s, normalize(s)))
        except (SynthesisError, SyntaxError):
            continue
    clusters = []  # list of [(snippet, tree), ...]
    for item in normalized:
        placed = False
        for members in clusters:
            if type3_equal(members[0][1], item[1]):
                members.append(item)
                placed = True
                break
        if not placed:
            clusters.append([item])
    return [
        [snip for snip, _ in members] for members in clusters if len(members) >= 2
    ]
