"""Corpus walker: find source files per language, attach provenance.

The Google-Code-Jam layout `<problem>/<author>/<files>` is recognized when
files sit exactly two directories below the corpus root; the (problem,
author) pair is attached to every function parsed from such files.
"""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path

from crossclone.errors import ParseError
from crossclone.model import LanguageId
from crossclone.segmenter import parse_functions

log = logging.getLogger(__name__)

EXTENSIONS = {"python": (".py",), "java": (".java",), "typescript": (".ts",)}


def iter_source_files(root: Path, language: LanguageId):
    exts = EXTENSIONS[language.name]
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.suffix in exts:
            yield path


def _provenance(root: Path, path: Path):
    rel = path.relative_to(root)
    if len(rel.parts) == 3:
        return rel.parts[0], rel.parts[1]
    return None, None


def parse_corpus(root, language: LanguageId):
    """Parse every source file under `root`; syntax errors skip the file."""
    root = Path(root)
    units, skipped = [], []
    for path in iter_source_files(root, language):
        try:
            text = path.read_text(encoding="utf-8")
            file_units = parse_functions(text, language, file=str(path))
        except ParseError as exc:
            log.warning("skipping unparsable file %s (%s)", path, exc)
            skipped.append(str(path))
            continue
        problem, author = _provenance(root, path)
        for unit in file_units:
            units.append(
                dataclasses.replace(unit, problem=problem, author=author)
            )
    return units, skipped
