"""Shared synthesizer pieces: the SynthesizedFunction record, identifier
minting, and drop accounting."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from crossclone.model import Signature, canonical_signature

ARGS_MAX_DEFAULT = 5


@dataclass(frozen=True)
class SynthesizedFunction:
    """A compilable standalone function derived from one snippet."""

    id: str
    origin: object  # Snippet
    language: str
    signature: Signature
    arg_names: tuple
    return_var: object  # variable name, or None for a whole-method wrapper
    source_text: str
    permutation: tuple  # index map over the base argument order
    member_path: tuple = ()  # object-return projection path
    whole_method: bool = False
    source_path: str = ""  # filled in when written to the work directory

    def __post_init__(self):
        object.__setattr__(self, "arg_names", tuple(self.arg_names))
        object.__setattr__(self, "permutation", tuple(self.permutation))
        if len(self.arg_names) != len(self.signature.args):
            raise ValueError("arg names and descriptors disagree")
        if sorted(self.permutation) != list(range(len(self.arg_names))):
            raise ValueError("permutation must be a bijection")

    def __eq__(self, other):
        return isinstance(other, SynthesizedFunction) and self.id == other.id

    def __hash__(self):
        return hash(self.id)

    @property
    def entry(self) -> str:
        return self.id

    @property
    def canonical_sig(self) -> str:
        return canonical_signature(self.signature)

    @property
    def origin_file(self) -> str:
        return self.origin.file if self.origin is not None else ""

    @property
    def origin_span(self) -> tuple:
        return self.origin.span if self.origin is not None else (0, 0)

    @property
    def origin_function(self) -> str:
        return self.origin.parent_function if self.origin is not None else ""

    @property
    def origin_key(self) -> tuple:
        """Same-origin variants (argument permutations of one snippet/return
        slot) collapse under this key when clusters are reported."""
        return (self.origin_file, self.origin_span, self.return_var, self.member_path)


def function_id(*parts) -> str:
    blob = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return "func_" + hashlib.blake2b(blob, digest_size=4).hexdigest()


def variant_id(snippet, return_var, member_path, language, perm) -> str:
    return function_id(
        snippet.file, snippet.span, return_var, member_path, language, tuple(perm)
    )


@dataclass
class SynthesisStats:
    snippets: int = 0
    functions: int = 0
    dropped_no_return: int = 0
    dropped_no_args: int = 0
    dropped_too_many_args: int = 0
    dropped_unsupported_type: int = 0
    dropped_uncompilable: int = 0
    dropped_no_accessible_members: int = 0

    def merge(self, other: "SynthesisStats"):
        for name in vars(other):
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def as_dict(self) -> dict:
        return dict(vars(self))
