"""Exact integer lattice algebra.

Lattices are submodules of Z^(n+m) written as integer row vectors (k, l) with
k in Z^n (angle part) and l in Z^m (forcing part).  Everything here works on
Python ints, so entries may grow past 64 bits without loss.  The only float
produced is the square root in :meth:`ProjectedModule.covolume`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DimensionGuardError, EmptyModuleError, ProjectionRankError

MAX_DIM = 6

Row = tuple[int, ...]


@dataclass(frozen=True)
class IntVector:
    k: tuple[int, ...]
    l: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        object.__setattr__(self, "l", tuple(int(x) for x in self.l))

    @classmethod
    def from_flat(cls, flat: Sequence[int], n: int) -> "IntVector":
        return cls(tuple(flat[:n]), tuple(flat[n:]))

    @property
    def flat(self) -> Row:
        return self.k + self.l

    @property
    def norm1(self) -> int:
        return sum(abs(x) for x in self.k) + sum(abs(x) for x in self.l)

    def __neg__(self) -> "IntVector":
        return IntVector(tuple(-x for x in self.k), tuple(-x for x in self.l))


def _as_row(v) -> Row:
    if isinstance(v, IntVector):
        return v.flat
    return tuple(int(x) for x in v)


def norm1(v) -> int:
    return sum(abs(x) for x in _as_row(v))


def hermite_rows(rows: Iterable[Sequence[int]], ncols: int) -> list[list[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Output rows are in echelon form with positive pivots; entries above each
    pivot lie in ``[0, pivot)``.  Zero rows are dropped, so the result is a
    basis and its length is the rank.
    """
    a = [list(map(int, r)) for r in rows]
    a = [r for r in a if any(r)]
    p = 0
    for col in range(ncols):
        if p >= len(a):
            break
        while True:
            nz = [i for i in range(p, len(a)) if a[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][col]))
            a[p], a[piv] = a[piv], a[p]
            pr = a[p]
            done = True
            for i in range(p + 1, len(a)):
                x = a[i][col]
                if x:
                    q = x // pr[col]
                    a[i] = [u - q * v for u, v in zip(a[i], pr)]
                    if a[i][col]:
                        done = False
            if done:
                break
        if p >= len(a) or a[p][col] == 0:
            continue
        if a[p][col] < 0:
            a[p] = [-u for u in a[p]]
        pr = a[p]
        for i in range(p):
            q = a[i][col] // pr[col]
            if q:
                a[i] = [u - q * v for u, v in zip(a[i], pr)]
        p += 1
    return [r for r in a if any(r)]


def _column_reduce(rows: list[list[int]], ncols: int):
    """Unimodular column reduction of a full-row-rank matrix B (d x N).

    Returns ``(V, W)`` with ``B V = [H | 0]`` (H lower triangular, invertible)
    and ``W = V^{-1}``.  The first d rows of W span the saturation of the row
    lattice; the last N - d columns of V span its integer kernel.
    """
    b = [list(r) for r in rows]
    d = len(b)
    v = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    w = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def addcol(dst, src, c):
        # col_dst += c * col_src; W: row_src -= c * row_dst
        for r in b:
            r[dst] += c * r[src]
        for r in v:
            r[dst] += c * r[src]
        w[src] = [x - c * y for x, y in zip(w[src], w[dst])]

    def swapcol(i, j):
        for r in b:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]
        w[i], w[j] = w[j], w[i]

    for i in range(d):
        while True:
            nz = [j for j in range(i, ncols) if b[i][j] != 0]
            if not nz:
                raise ValueError("rows are linearly dependent")
            piv = min(nz, key=lambda j: abs(b[i][j]))
            if piv != i:
                swapcol(i, piv)
            if len(nz) == 1:
                break
            for j in range(i + 1, ncols):
                if b[i][j]:
                    addcol(j, i, -(b[i][j] // b[i][i]))
    return v, w


@dataclass(frozen=True)
class SubmoduleBasis:
    """Canonical (Hermite) basis of a submodule of Z^(n+m).

    ``generators`` are the HNF rows; two bases compare equal iff they span
    the same lattice.  The zero module has no generators.
    """

    generators: tuple[Row, ...]
    n: int
    m: int

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return self.n + self.m

    @property
    def k_parts(self) -> tuple[Row, ...]:
        return tuple(g[: self.n] for g in self.generators)

    @property
    def l_parts(self) -> tuple[Row, ...]:
        return tuple(g[self.n :] for g in self.generators)

    @property
    def max_norm1(self) -> int:
        return max((norm1(g) for g in self.generators), default=0)

    def is_zero(self) -> bool:
        return not self.generators

    @classmethod
    def zero(cls, n: int, m: int) -> "SubmoduleBasis":
        return cls((), n, m)

    def to_json(self) -> list[list[int]]:
        return [list(g) for g in self.generators]

    def __repr__(self) -> str:
        gens = ", ".join(
            "(" + ",".join(map(str, g[: self.n])) + "|" + ",".join(map(str, g[self.n :])) + ")"
            for g in self.generators
        )
        return f"Lattice[{gens}]"


@dataclass(frozen=True)
class ProjectedModule:
    generators: tuple[Row, ...]
    rank: int

    def covolume(self) -> float:
        return math.sqrt(covolume_sq(self))


def _check_dim(dim: int, allow_large: bool) -> None:
    if dim > MAX_DIM and not allow_large:
        raise DimensionGuardError(
            f"ambient dimension {dim} exceeds {MAX_DIM}; pass allow_large=True to override"
        )


def canonicalize(generators, n: int | None = None, m: int | None = None, *,
                 allow_large: bool = False) -> SubmoduleBasis:
    """Unique HNF basis of the lattice spanned by ``generators``.

    ``generators`` may be IntVectors (n and m are then inferred) or flat
    integer sequences together with ``n``.
    """
    gens = list(generators)
    if not gens:
        raise EmptyModuleError("empty module")
    if n is None:
        if not isinstance(gens[0], IntVector):
            raise ValueError("n is required for flat generators")
        n = len(gens[0].k)
    rows = [_as_row(g) for g in gens]
    dim = len(rows[0])
    if any(len(r) != dim for r in rows):
        raise ValueError("generators have inconsistent lengths")
    if m is None:
        m = dim - n
    if n + m != dim:
        raise ValueError(f"n + m = {n + m} does not match generator length {dim}")
    _check_dim(dim, allow_large)
    h = hermite_rows(rows, dim)
    if not h:
        raise EmptyModuleError("empty module")
    return SubmoduleBasis(tuple(tuple(r) for r in h), n, m)


def saturate(lat: SubmoduleBasis) -> SubmoduleBasis:
    """Basis of span_R(lat) intersected with Z^(n+m)."""
    if lat.is_zero():
        return lat
    _, w = _column_reduce([list(g) for g in lat.generators], lat.dim)
    sat = hermite_rows(w[: lat.rank], lat.dim)
    return SubmoduleBasis(tuple(tuple(r) for r in sat), lat.n, lat.m)


def integer_kernel(lat: SubmoduleBasis) -> list[list[int]]:
    """Integer basis (as rows) of {x in Z^(n+m) : g . x = 0 for all generators g}."""
    dim = lat.dim
    if lat.is_zero():
        return [[int(i == j) for j in range(dim)] for i in range(dim)]
    v, _ = _column_reduce([list(g) for g in lat.generators], dim)
    return [[v[i][j] for i in range(dim)] for j in range(lat.rank, dim)]


def is_saturated(lat: SubmoduleBasis) -> bool:
    return saturate(lat) == lat


def rank_of(rows: Iterable[Sequence[int]], ncols: int) -> int:
    return len(hermite_rows(rows, ncols))


def contains(lat: SubmoduleBasis, v) -> bool:
    """Exact membership of an integer vector in the lattice."""
    vec = list(_as_row(v))
    if len(vec) != lat.dim:
        raise ValueError("dimension mismatch")
    for g in lat.generators:
        col = next(j for j, x in enumerate(g) if x)
        if vec[col] % g[col]:
            return False
        q = vec[col] // g[col]
        if q:
            vec = [a - q * b for a, b in zip(vec, g)]
    return not any(vec)


def is_admissible(lat: SubmoduleBasis) -> bool:
    """True iff the lattice meets {0} x Z^m only at the origin."""
    if lat.is_zero():
        return True
    return rank_of(lat.k_parts, lat.n) == lat.rank


def project(lat: SubmoduleBasis) -> ProjectedModule:
    """Canonical basis of the projection onto the first n coordinates."""
    if lat.is_zero():
        return ProjectedModule((), 0)
    h = hermite_rows(lat.k_parts, lat.n)
    if len(h) != lat.rank:
        raise ProjectionRankError("projection drops rank")
    return ProjectedModule(tuple(tuple(r) for r in h), len(h))


def bareiss_det(mat: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (fraction-free elimination)."""
    a = [list(map(int, r)) for r in mat]
    size = len(a)
    if size == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def gram(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    return [[sum(x * y for x, y in zip(r, s)) for s in rows] for r in rows]


def covolume_sq(module) -> int:
    """det(A^T A) for A the n x d matrix of basis columns; 1 for the zero module."""
    rows = module.generators
    if not rows:
        return 1
    return bareiss_det(gram(rows))


def covolume(module) -> float:
    return math.sqrt(covolume_sq(module))
