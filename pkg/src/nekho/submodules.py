"""Enumeration of maximal K-submodules of Z^(n+m) and their admissible subfamily."""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceededError
from .lattice import (
    MAX_DIM,
    SubmoduleBasis,
    _check_dim,
    canonicalize,
    contains,
    hermite_rows,
    integer_kernel,
    is_admissible,
    saturate,
)

log = logging.getLogger(__name__)

__all__ = [
    "ModuleFamily",
    "enumerate_maximal_K_submodules",
    "admissible_family",
    "admissible_families",
    "is_admissible",
    "contains",
    "is_K_generated",
    "short_vectors",
    "primitive_short_vectors",
]

TUPLE_BUDGET = 2_000_000


@dataclass(frozen=True)
class ModuleFamily:
    n: int
    m: int
    K: float
    d: int
    members: tuple[SubmoduleBasis, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, lat) -> bool:
        return lat in self.members

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "m": self.m, "K": self.K, "d": self.d,
            "modules": [lat.to_json() for lat in self.members],
        })

    @classmethod
    def from_json(cls, text: str) -> "ModuleFamily":
        obj = json.loads(text)
        n, m = obj["n"], obj["m"]
        members = tuple(canonicalize(gens, n, m) for gens in obj["modules"])
        return cls(n, m, obj["K"], obj["d"], members)


def _sign_normalized(v) -> bool:
    for x in v:
        if x:
            return x > 0
    return False


@lru_cache(maxsize=64)
def short_vectors(dim: int, kmax: int) -> tuple[tuple[int, ...], ...]:
    """All nonzero v in Z^dim with |v|_1 <= kmax, one per +/- pair, sorted."""
    out = []
    rng = range(-kmax, kmax + 1)
    for v in itertools.product(rng, repeat=dim):
        s = sum(abs(x) for x in v)
        if 0 < s <= kmax and _sign_normalized(v):
            out.append(v)
    out.sort(key=lambda v: (sum(abs(x) for x in v), v))
    return tuple(out)


def primitive_short_vectors(dim: int, kmax: int) -> tuple[tuple[int, ...], ...]:
    return tuple(v for v in short_vectors(dim, kmax) if math.gcd(*v) == 1)


def _kcap(K: float) -> int:
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return int(math.floor(K))


def is_K_generated(lat: SubmoduleBasis, K: float) -> bool:
    """True iff the members of ``lat`` with |(k,l)| <= K span ``lat``."""
    if lat.is_zero():
        return True
    members = _short_members(lat, _kcap(K))
    if len(members) < lat.rank:
        return False
    return canonicalize(members, lat.n, lat.m, allow_large=True) == lat


def _short_members(lat: SubmoduleBasis, kmax: int) -> list[tuple[int, ...]]:
    sv = short_vectors(lat.dim, kmax)
    if not sv:
        return []
    arr = np.asarray(sv, dtype=np.int64)
    ker = integer_kernel(saturate(lat))
    if ker:
        cmat = np.asarray(ker, dtype=object).astype(np.int64)
        in_span = np.all(arr @ cmat.T == 0, axis=1)
    else:
        in_span = np.ones(len(sv), dtype=bool)
    return [sv[i] for i in np.flatnonzero(in_span) if contains(lat, sv[i])]


def enumerate_maximal_K_submodules(n: int, m: int, K: float, d: int, *,
                                   admissible_only: bool = False,
                                   allow_large: bool = False) -> ModuleFamily:
    """All rank-d saturated submodules of Z^(n+m) generated by members of norm <= K.

    Candidates are saturations of spans of d-tuples of primitive short
    vectors; each is then re-checked for K-generation and dropped if the
    check fails.
    """
    if d < 1:
        raise ValueError("rank d must be >= 1")
    dim = n + m
    _check_dim(dim, allow_large)
    kmax = _kcap(K)
    if d > dim or (admissible_only and d > n):
        return ModuleFamily(n, m, K, d, ())

    vecs = primitive_short_vectors(dim, kmax)
    if admissible_only:
        vecs = tuple(v for v in vecs if any(v[:n]))
    ntuples = math.comb(len(vecs), d)
    if ntuples > TUPLE_BUDGET:
        raise BudgetExceededError(
            f"{ntuples} generator tuples for (n={n}, m={m}, K={K}, d={d}) exceeds {TUPLE_BUDGET}"
        )

    seen: set[SubmoduleBasis] = set()
    for combo in itertools.combinations(vecs, d):
        if admissible_only and len(hermite_rows([v[:n] for v in combo], n)) < d:
            continue
        h = hermite_rows(combo, dim)
        if len(h) < d:
            continue
        lat = saturate(SubmoduleBasis(tuple(tuple(r) for r in h), n, m))
        seen.add(lat)

    members = []
    dropped = 0
    for lat in seen:
        if admissible_only and not is_admissible(lat):
            continue
        if is_K_generated(lat, K):
            members.append(lat)
        else:
            dropped += 1
    if dropped:
        log.info("dropped %d saturated spans that are not %s-generated", dropped, K)
    members.sort(key=lambda lat: lat.generators)
    return ModuleFamily(n, m, K, d, tuple(members))


def admissible_family(n: int, m: int, K: float, d: int, **kw) -> ModuleFamily:
    """Admissible members of the rank-d maximal K-submodule family."""
    if d > n:
        return ModuleFamily(n, m, K, d, ())
    return enumerate_maximal_K_submodules(n, m, K, d, admissible_only=True, **kw)


@lru_cache(maxsize=32)
def admissible_families(n: int, m: int, K: float) -> tuple[ModuleFamily, ...]:
    """Admissible families for ranks 1..n (index d-1)."""
    return tuple(admissible_family(n, m, K, d) for d in range(1, n + 1))


__all__.append("MAX_DIM")
