import itertools
import random

import pytest
from hypothesis import given, strategies as st

from nekho.errors import DimensionGuardError, EmptyModuleError, ProjectionRankError
from nekho.lattice import (
    IntVector,
    SubmoduleBasis,
    bareiss_det,
    canonicalize,
    contains,
    covolume,
    covolume_sq,
    hermite_rows,
    integer_kernel,
    is_admissible,
    is_saturated,
    project,
    saturate,
)

import oracles


def lat(rows, n, m):
    return canonicalize(rows, n, m)


def test_identity_basis():
    L = lat([(1, 0), (0, 1)], 1, 1)
    assert L.generators == ((1, 0), (0, 1)) and L.rank == 2


def test_canonical_form_of_2_4_and_0_2():
    L = lat([(2, 4), (0, 2)], 1, 1)
    assert L.generators == ((2, 0), (0, 2))
    for v in oracles.box_points(2, 4):
        assert contains(L, v) == oracles.in_lattice([(2, 4), (0, 2)], v)


def test_single_generator_not_saturated():
    L = lat([(2, 4)], 1, 1)
    assert L.generators == ((2, 4),) and L.rank == 1


def test_empty_module_rejected():
    with pytest.raises(EmptyModuleError, match="empty module"):
        canonicalize([(0, 0), (0, 0)], 1, 1)
    with pytest.raises(EmptyModuleError):
        canonicalize([], 1, 1)


def test_intvector_inputs():
    L = canonicalize([IntVector((1, 0), (1,)), IntVector((0, 1), (0,))])
    assert (L.n, L.m, L.rank) == (2, 1, 2)
    assert IntVector((1, -2), (3,)).norm1 == 6
    assert (-IntVector((1,), (2,))).flat == (-1, -2)


def test_saturate_examples():
    assert saturate(lat([(2, 0)], 1, 1)).generators == ((1, 0),)
    full = saturate(lat([(1, 1), (1, -1)], 1, 1))
    assert full.generators == ((1, 0), (0, 1))
    for v in oracles.box_points(2, 2):
        assert contains(full, v)
    assert covolume_sq(lat([(1, 1), (1, -1)], 2, 0)) == 4
    assert covolume_sq(full) == 1
    z2 = lat([(1, 0), (0, 1)], 1, 1)
    assert saturate(z2) == z2


def test_projection_examples():
    assert project(lat([(1, 0, 1)], 2, 1)).generators == ((1, 0),)
    p = project(lat([(3, 4, 2)], 2, 1))
    assert p.generators == ((3, 4),) and covolume_sq(p) == 25 and covolume(p) == 5.0
    p2 = project(lat([(1, 0, 0, 2), (0, 1, 1, 0)], 2, 2))
    assert p2.rank == 2 and covolume_sq(p2) == 1


def test_projection_of_non_admissible_fails():
    with pytest.raises(ProjectionRankError, match="projection drops rank"):
        project(lat([(1, 0, 0), (0, 0, 1)], 2, 1))


def test_covolume_examples():
    from nekho.lattice import ProjectedModule
    assert covolume_sq(ProjectedModule(((1, 0), (0, 1)), 2)) == 1
    # columns (1,2) and (0,3): det = 3
    assert covolume_sq(ProjectedModule(((1, 2), (0, 3)), 2)) == 9
    assert covolume_sq(ProjectedModule((), 0)) == 1


def test_dimension_guard():
    with pytest.raises(DimensionGuardError):
        canonicalize([tuple(range(1, 8))], 4, 3)
    assert canonicalize([tuple(range(1, 8))], 4, 3, allow_large=True).rank == 1


def test_big_entries_stay_exact():
    big = 2 ** 70 + 1
    L = canonicalize([(big, 3), (2 ** 70, 5)], 1, 1)
    assert bareiss_det(L.generators) == abs(big * 5 - 3 * 2 ** 70)


def test_admissibility_examples():
    assert not is_admissible(lat([(0, 1)], 1, 1))
    assert is_admissible(lat([(1, 1)], 1, 1))
    assert not is_admissible(lat([(1, 0, 0), (0, 0, 1)], 2, 1))
    assert is_admissible(SubmoduleBasis.zero(2, 1))


def test_contains_examples():
    assert contains(lat([(1, 0)], 1, 1), (2, 0))
    assert not contains(lat([(2, 0)], 1, 1), (1, 0))
    z2 = lat([(1, 0), (0, 1)], 1, 1)
    assert all(contains(z2, v) for v in oracles.box_points(2, 3))


def test_repr_shows_parts():
    assert repr(lat([(1, 2, -1)], 2, 1)) == "Lattice[(1,2|-1)]"


# -- property tests ---------------------------------------------------------

small = st.integers(-5, 5)


@st.composite
def generator_sets(draw, max_dim=4, max_rank=3):
    dim = draw(st.integers(2, max_dim))
    d = draw(st.integers(1, min(max_rank, dim)))
    rows = draw(st.lists(st.lists(small, min_size=dim, max_size=dim), min_size=d, max_size=d))
    return dim, rows


@given(generator_sets())
def test_canonicalize_idempotent_and_order_free(data):
    dim, rows = data
    if not any(any(r) for r in rows):
        return
    L = canonicalize(rows, dim - 1, 1)
    assert canonicalize(L.generators, dim - 1, 1) == L
    assert canonicalize(list(reversed(rows)), dim - 1, 1) == L
    # unimodular recombination: add an integer multiple of one row to another
    if len(rows) >= 2:
        mixed = [rows[0], [a + 3 * b for a, b in zip(rows[1], rows[0])]] + rows[2:]
        assert canonicalize(mixed, dim - 1, 1) == L


@given(generator_sets(max_dim=3, max_rank=2))
def test_canonical_form_matches_membership_oracle(data):
    dim, rows = data
    if not any(any(r) for r in rows):
        return
    L = canonicalize(rows, dim - 1, 1)
    indep = [list(g) for g in L.generators]
    assert L.rank == oracles.rank(rows)
    for v in oracles.box_points(dim, 3):
        # v in the span of the input rows iff v in the span of the canonical basis
        assert contains(L, v) == oracles.in_lattice(indep, v)


@given(generator_sets(max_dim=4, max_rank=3))
def test_saturation_properties(data):
    dim, rows = data
    if not any(any(r) for r in rows):
        return
    L = canonicalize(rows, dim - 1, 1)
    S = saturate(L)
    assert S.rank == L.rank
    assert saturate(S) == S and is_saturated(S)
    for g in L.generators:
        assert contains(S, g)
    if is_admissible(L):
        assert covolume_sq(project(L)) % covolume_sq(project(S)) == 0


@given(generator_sets(max_dim=3, max_rank=2))
def test_saturation_matches_rational_span_oracle(data):
    dim, rows = data
    if not any(any(r) for r in rows):
        return
    S = saturate(canonicalize(rows, dim - 1, 1))
    for v in oracles.box_points(dim, 2):
        assert contains(S, v) == oracles.in_rational_span(rows, v)


@given(generator_sets(max_dim=4, max_rank=3))
def test_integer_kernel_is_orthogonal_complement(data):
    dim, rows = data
    if not any(any(r) for r in rows):
        return
    L = canonicalize(rows, dim - 1, 1)
    ker = integer_kernel(L)
    assert len(ker) == dim - L.rank
    for kvec in ker:
        for g in L.generators:
            assert sum(a * b for a, b in zip(kvec, g)) == 0
    assert oracles.rank(ker) == len(ker) if ker else True


def test_cauchy_binet_random():
    rng = random.Random(1234)
    for _ in range(1000):
        n = rng.randint(1, 4)
        d = rng.randint(1, min(3, n))
        cols = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(d)]
        lhs = bareiss_det([[sum(x * y for x, y in zip(a, b)) for b in cols] for a in cols])
        assert lhs == oracles.sum_squared_minors(cols)


def test_hermite_rows_shape():
    h = hermite_rows([(4, 6), (6, 9)], 2)
    assert h == [[2, 3]]
    for r, row in enumerate(hermite_rows([(3, 1, 2), (0, 2, 4), (1, 1, 1)], 3)):
        piv = next(j for j, x in enumerate(row) if x)
        assert row[piv] > 0
