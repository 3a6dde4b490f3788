"""Segmentation stage: parse sources into function bodies and slide
statement windows over them."""

from __future__ import annotations

from crossclone.model import LanguageId
from crossclone.segmenter import cfamily, python_frontend
from crossclone.segmenter.windows import (
    FunctionUnit,
    Snippet,
    StatementNode,
    segment,
    segment_nodes,
)

__all__ = [
    "FunctionUnit",
    "Snippet",
    "StatementNode",
    "segment",
    "segment_nodes",
    "parse_functions",
    "snippets_of_source",
]


def parse_functions(source_text: str, language: LanguageId, file: str = "<source>"):
    """One (name, statement tree) FunctionUnit per function definition."""
    if language.name == "python":
        return python_frontend.parse_functions(source_text, file)
    units, _front = cfamily.parse_functions(source_text, language, file)
    return units


def snippets_of_source(source_text: str, language: LanguageId, min_stmt: int, file: str = "<source>"):
    out = []
    for unit in parse_functions(source_text, language, file):
        out.extend(segment(unit, min_stmt))
    return out
