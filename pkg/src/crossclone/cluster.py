"""Behavioral similarity and representative-based clustering.

The equality semantics live entirely in `outputs_equal` so experiments can
swap them: ints compare exactly after widening (bools widen to ints), any
int/real mix compares as reals under a relative epsilon, NaN equals NaN,
chars equal length-1 strings by content, arrays and ordered object members
compare element-wise, and non-ok outcomes never match unless
`exception_match` is enabled for same-class exception pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from crossclone.errors import PoolMismatch
from crossclone.model import (
    OK,
    CloneCluster,
    IOProfile,
    Outcome,
    Signature,
    VArr,
    VBool,
    VChar,
    VFile,
    VInt,
    VNull,
    VObj,
    VReal,
    VStr,
    cast_lattice,
)

_NUMERIC = (VBool, VInt, VReal)


@dataclass(frozen=True)
class SimilarityConfig:
    sim_t: float = 1.0
    real_tolerance: float = 1e-6  # relative
    abs_tolerance: float = 1e-9  # near zero
    exception_match: bool = False


DEFAULT_CONFIG = SimilarityConfig()


def _as_real(v) -> float:
    if isinstance(v, VBool):
        return float(v.b)
    if isinstance(v, VInt):
        return float(v.i)
    return v.r


def _as_int(v) -> int:
    return int(v.b) if isinstance(v, VBool) else v.i


def reals_close(a: float, b: float, cfg: SimilarityConfig = DEFAULT_CONFIG) -> bool:
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= max(cfg.real_tolerance * max(abs(a), abs(b)), cfg.abs_tolerance)


def values_equal(a, b, cfg: SimilarityConfig = DEFAULT_CONFIG) -> bool:
    if isinstance(a, _NUMERIC) and isinstance(b, _NUMERIC):
        if not isinstance(a, VReal) and not isinstance(b, VReal):
            return _as_int(a) == _as_int(b)
        return reals_close(_as_real(a), _as_real(b), cfg)
    if isinstance(a, (VChar, VStr)) and isinstance(b, (VChar, VStr)):
        # char vs length-1 string compares by content
        sa = a.c if isinstance(a, VChar) else a.s
        sb = b.c if isinstance(b, VChar) else b.s
        return sa == sb
    if isinstance(a, VArr) and isinstance(b, VArr):
        return len(a.items) == len(b.items) and all(
            values_equal(x, y, cfg) for x, y in zip(a.items, b.items)
        )
    if isinstance(a, VObj) and isinstance(b, VObj):
        if len(a.members) != len(b.members):
            return False
        return all(
            na == nb and values_equal(x, y, cfg)
            for (na, x), (nb, y) in zip(a.members, b.members)
        )
    if isinstance(a, VNull) and isinstance(b, VNull):
        return True
    if isinstance(a, VFile) and isinstance(b, VFile):
        return a.resource_id == b.resource_id
    return False


def outputs_equal(a: Outcome, b: Outcome, cfg: SimilarityConfig = DEFAULT_CONFIG) -> bool:
    if a.status == OK and b.status == OK:
        return values_equal(a.value, b.value, cfg)
    if cfg.exception_match and a.status == "exception" and b.status == "exception":
        return a.exception_class == b.exception_class
    return False


def similarity(p: IOProfile, q: IOProfile, cfg: SimilarityConfig = DEFAULT_CONFIG) -> float:
    """Fraction of positionally-aligned records whose outputs match."""
    if p.pool_key != q.pool_key:
        raise PoolMismatch(f"{p.pool_key} vs {q.pool_key}")
    if len(p.records) != len(q.records):
        raise PoolMismatch("profiles are not positionally aligned")
    if not p.records:
        return 0.0
    hits = sum(
        1
        for (_, oa), (_, ob) in zip(p.records, q.records)
        if outputs_equal(oa, ob, cfg)
    )
    return hits / len(p.records)


def meets_threshold(p: IOProfile, q: IOProfile, cfg: SimilarityConfig) -> bool:
    """similarity(p, q) >= sim_t, with early exit once the verdict is
    decided (at sim_t = 1.0 the first mismatch settles it)."""
    if p.pool_key != q.pool_key:
        raise PoolMismatch(f"{p.pool_key} vs {q.pool_key}")
    total = len(p.records)
    if not total:
        return cfg.sim_t <= 0.0
    needed = math.ceil(cfg.sim_t * total - 1e-9)
    allowed_misses = total - needed
    hits = misses = 0
    for (_, oa), (_, ob) in zip(p.records, q.records):
        if outputs_equal(oa, ob, cfg):
            hits += 1
            if hits >= needed:
                return True
        else:
            misses += 1
            if misses > allowed_misses:
                return False
    return hits >= needed


def comparable(a: Signature, b: Signature) -> bool:
    """Same arity, each argument pair castable in either direction, and
    castable return types. Incomparable profiles are never scored."""
    if len(a.args) != len(b.args):
        return False
    for da, db in zip(a.args, b.args):
        if not (cast_lattice(da, db) or cast_lattice(db, da)):
            return False
    return cast_lattice(a.ret, b.ret) or cast_lattice(b.ret, a.ret)


def cluster_all(profiles, cfg: SimilarityConfig = DEFAULT_CONFIG):
    """Representative-based partition of every profile (Algorithm order):
    each profile joins the first cluster whose representative it matches
    with similarity >= sim_t, else opens a singleton. Returns the full
    partition including singletons."""
    clusters = []  # list[list[IOProfile]]
    for profile in profiles:
        placed = False
        for members in clusters:
            rep = members[0]
            if rep.pool_key != profile.pool_key:
                continue
            if not comparable(rep.signature, profile.signature):
                continue
            if meets_threshold(rep, profile, cfg):
                members.append(profile)
                placed = True
                break
        if not placed:
            clusters.append([profile])
    return clusters


def cluster(profiles, cfg: SimilarityConfig = DEFAULT_CONFIG):
    """Reported clone clusters: partitions with at least two members."""
    out = []
    for members in cluster_all(profiles, cfg):
        if len(members) >= 2:
            out.append(
                CloneCluster(members=[p.function_id for p in members], sim_t=cfg.sim_t)
            )
    return out
