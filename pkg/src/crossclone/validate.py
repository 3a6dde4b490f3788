"""False-positive validation and the output-consistency screen.

A reported cluster is validated by re-executing its members on a fresh
triangular-fuzzed pool and re-clustering just those members; any membership
change marks the whole cluster false_positive. The consistency screen
flags profile pairs whose outputs are equal or differ by a constant offset,
constant nonzero ratio (numerics), or constant Levenshtein distance
(strings), recursing through arrays and object members.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from crossclone.cluster import SimilarityConfig, cluster_all
from crossclone.errors import InsufficientData
from crossclone.model import (
    OK,
    IOProfile,
    VArr,
    VBool,
    VChar,
    VInt,
    VNull,
    VObj,
    VReal,
    VStr,
)

_REL_TOL = 1e-6
_ABS_TOL = 1e-9


@dataclass
class ValidationReport:
    verdicts: list  # per input cluster, in order: "valid" | "false_positive"
    clusters: int = 0
    clones: int = 0
    false_positives: int = 0
    precision: float = 0.0

    @classmethod
    def from_counts(cls, verdicts, clones):
        fp = sum(1 for v in verdicts if v == "false_positive")
        total = len(verdicts)
        return cls(
            verdicts=list(verdicts),
            clusters=total,
            clones=clones,
            false_positives=fp,
            precision=(total - fp) / total if total else 1.0,
        )


def validate_clusters(clusters, rerun, cfg: SimilarityConfig) -> ValidationReport:
    """`rerun(cluster)` must return the members' fresh profiles over one
    shared fuzzed pool (missing members count as membership changes).
    Verdicts are recorded on the clusters and summarized in the report."""
    verdicts = []
    clones = 0
    for c in clusters:
        clones += len(c.members)
        fresh = rerun(c)
        intact = len(fresh) == len(c.members) and len(cluster_all(fresh, cfg)) == 1
        c.validity = "valid" if intact else "false_positive"
        verdicts.append(c.validity)
    return ValidationReport.from_counts(verdicts, clones)


# --- output consistency ------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _numeric(v):
    if isinstance(v, VBool):
        return float(v.b)
    if isinstance(v, VInt):
        return float(v.i)
    if isinstance(v, VReal):
        return v.r
    return None


def _text(v):
    if isinstance(v, VChar):
        return v.c
    if isinstance(v, VStr):
        return v.s
    return None


def _constant(xs) -> bool:
    lo, hi = min(xs), max(xs)
    return hi - lo <= max(_REL_TOL * max(abs(lo), abs(hi)), _ABS_TOL)


def _series_consistent(pairs) -> bool:
    """pairs: [(value_a, value_b)] across records for one output slot."""
    if all(isinstance(a, VNull) and isinstance(b, VNull) for a, b in pairs):
        return True
    nums = [(_numeric(a), _numeric(b)) for a, b in pairs]
    if all(x is not None and y is not None for x, y in nums):
        if _constant([y - x for x, y in nums]):
            return True
        if all(x != 0 and y != 0 for x, y in nums):
            return _constant([y / x for x, y in nums])
        return False  # a mix of zero and nonzero can never have constant ratio
    texts = [(_text(a), _text(b)) for a, b in pairs]
    if all(x is not None and y is not None for x, y in texts):
        return _constant([levenshtein(x, y) for x, y in texts])
    if all(isinstance(a, VArr) and isinstance(b, VArr) for a, b in pairs):
        if any(len(a.items) != len(b.items) for a, b in pairs):
            return False
        width = max((len(a.items) for a, _ in pairs), default=0)
        for k in range(width):
            sub = [
                (a.items[k], b.items[k]) for a, b in pairs if k < len(a.items)
            ]
            if sub and not _series_consistent(sub):
                return False
        return True
    if all(isinstance(a, VObj) and isinstance(b, VObj) for a, b in pairs):
        names = [tuple(n for n, _ in a.members) for a, _ in pairs]
        names_b = [tuple(n for n, _ in b.members) for _, b in pairs]
        if names != names_b or len(set(names)) != 1:
            return False
        for k, _ in enumerate(names[0]):
            sub = [(a.members[k][1], b.members[k][1]) for a, b in pairs]
            if not _series_consistent(sub):
                return False
        return True
    return False


def output_consistency(p: IOProfile, q: IOProfile) -> bool:
    """True iff the two aligned profiles' ok outputs are pairwise equal or
    differ by one constant rule; needs at least two ok record pairs."""
    pairs = [
        (oa.value, ob.value)
        for (_, oa), (_, ob) in zip(p.records, q.records)
        if oa.status == OK and ob.status == OK
    ]
    if len(pairs) < 2:
        raise InsufficientData(
            f"need >= 2 aligned ok pairs, have {len(pairs)}"
        )
    return _series_consistent(pairs)
