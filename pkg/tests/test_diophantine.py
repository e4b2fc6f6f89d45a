import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nekho.diophantine import (
    PHI,
    ForcingVector,
    PsiTable,
    best_gamma,
    delta,
    delta_dio_bound,
    dio_check,
    dot_compensated,
    l1_shell,
    psi,
    psi_dio_bound,
)
from nekho.errors import BudgetExceededError, DomainError, ResonantWitnessError

import oracles

GOLDEN = (1.0, PHI)


def fib(count):
    a, b = 0, 1
    out = []
    for _ in range(count):
        out.append(a)
        a, b = b, a + b
    return out


def test_forcing_vector_validation():
    assert ForcingVector.named("golden_pair").alpha == GOLDEN
    with pytest.raises(ValueError):
        ForcingVector(())
    with pytest.raises(ValueError):
        ForcingVector((1.0, math.inf))
    with pytest.raises(ValueError):
        ForcingVector.named("nope")


def test_l1_shell_counts():
    for m in (1, 2, 3):
        for r in (1, 2, 4):
            brute = [v for v in oracles.box_points(m, r) if sum(map(abs, v)) == r]
            shell = l1_shell(m, r)
            assert 2 * len(shell) == len(brute)
            assert len({tuple(v) for v in shell}) == len(shell)


def test_unit_alpha_is_diophantine():
    for K in (1, 5, 40):
        res = dio_check((1.0,), 1.0, 0.0, K)
        assert res.passed and not res.resonant
        prof = best_gamma((1.0,), 0.0, K)
        assert prof.gamma == 1.0 and abs(prof.worst_witness[0]) == 1


def test_resonant_witness():
    res = dio_check((1.0, 1.0, 2.0), 0.1, 2.0, 5)
    assert res.resonant and not res.passed
    k = res.witness
    assert sum(a * b for a, b in zip(k, (1, 1, 2))) == 0
    assert sum(map(abs, k)) == 2  # shortest relation (1,-1,0) up to sign
    with pytest.raises(ResonantWitnessError) as ei:
        best_gamma((1.0, 1.0, 2.0), 2.0, 5)
    assert sum(a * b for a, b in zip(ei.value.witness, (1, 1, 2))) == 0


def test_golden_pair_brute_force():
    prof = best_gamma(GOLDEN, 1.0, 50)
    brute = min(abs(k[0] + k[1] * PHI) * (abs(k[0]) + abs(k[1]))
                for k in oracles.box_points(2, 50) if 0 < abs(k[0]) + abs(k[1]) <= 50)
    assert prof.gamma == pytest.approx(brute, rel=1e-12)
    assert dio_check(GOLDEN, prof.gamma, 1.0, 50).passed
    assert not dio_check(GOLDEN, prof.gamma * 1.001, 1.0, 50).passed


def test_golden_witness_is_fibonacci():
    prof = best_gamma(GOLDEN, 1.0, 10)
    k1, k2 = (abs(x) for x in prof.worst_witness)
    F = fib(12)
    assert any((k1, k2) == (F[j + 1], F[j]) for j in range(10))
    # small divisors along K come from consecutive Fibonacci numbers
    tab = PsiTable(GOLDEN)
    for K in (2, 3, 5, 8, 13, 21):
        w = tuple(abs(x) for x in tab.witness(K))
        assert any(w == (F[j + 1], F[j]) for j in range(15))


def test_best_gamma_homogeneous():
    for c in (0.5, 3.0):
        a = best_gamma(GOLDEN, 1.0, 20).gamma
        b = best_gamma(tuple(c * x for x in GOLDEN), 1.0, 20).gamma
        assert b == pytest.approx(c * a, rel=1e-12)


def test_best_gamma_antitone():
    vals = [best_gamma((1.0, math.sqrt(2)), 1.0, K).gamma for K in (2, 5, 10, 20, 40)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))


def test_psi_examples():
    assert psi(GOLDEN, 2) == pytest.approx(PHI, abs=1e-12)
    assert psi(GOLDEN, 2) == pytest.approx(oracles.psi_brute(GOLDEN, 2), abs=1e-12)
    assert psi((1.0,), 7) == 1.0
    # Psi(1) = 1/min |alpha_j|
    assert psi((2.0, 3.0), 1) == pytest.approx(0.5)
    assert psi((1.0, 1.0), 1) == 1.0
    vals = [psi(GOLDEN, K) for K in range(1, 30)]
    assert all(x <= y for x, y in zip(vals, vals[1:]))
    assert psi(GOLDEN, 2.7) == psi(GOLDEN, 2)
    with pytest.raises(DomainError):
        psi(GOLDEN, 0.5)


def test_psi_matches_brute_force():
    for alpha in (GOLDEN, (1.0, math.sqrt(2)), (1.0, math.sqrt(2), math.sqrt(3))):
        for K in (1, 3, 6):
            assert psi(alpha, K) == pytest.approx(oracles.psi_brute(alpha, K), rel=1e-12)


def test_psi_resonant():
    with pytest.raises(ResonantWitnessError):
        psi((1.0, 2.0), 3)


def test_delta_examples():
    p1 = psi(GOLDEN, 1)
    assert delta(GOLDEN, p1) >= 1
    with pytest.raises(DomainError):
        delta(GOLDEN, 0.5 * p1)
    x = 10.0
    d = delta(GOLDEN, x)
    # brute force: scan K psi(K) on a fine grid of real K
    grid = np.linspace(1, 12, 110001)
    feas = [K for K in grid if K * psi(GOLDEN, K) <= x]
    assert d == pytest.approx(max(feas), abs=2e-4)
    assert d * psi(GOLDEN, d) <= x * (1 + 1e-12)


def test_delta_unit_alpha_is_identity():
    for x in (1.0, 2.5, 17.0):
        assert delta((1.0,), x) == pytest.approx(x)


def test_casdio_both_halves():
    g = best_gamma(GOLDEN, 1.0, 400).gamma
    for K in range(1, 51):
        assert psi(GOLDEN, K) <= psi_dio_bound(g, 1.0)(K) * (1 + 1e-12)
    for x in np.logspace(0.5, 3, 20):
        assert delta(GOLDEN, x) >= delta_dio_bound(g, 1.0)(x) * (1 - 1e-12)


def test_delta_is_generalized_inverse():
    for K in range(1, 30):
        assert delta(GOLDEN, K * psi(GOLDEN, K)) >= K
    xs = np.logspace(0.3, 2.5, 40)
    ds = [delta(GOLDEN, x) for x in xs]
    assert all(a <= b for a, b in zip(ds, ds[1:]))


def test_dot_compensated_exact_on_integers():
    k = np.array([[3, -5], [10 ** 6, -(10 ** 6)]])
    vals = dot_compensated(k, (0.1, 0.1))
    assert abs(vals[1]) < 1e-9
    assert vals[0] == pytest.approx(-0.2, abs=1e-16)


def test_budget_guard(monkeypatch):
    import nekho.diophantine as dio
    monkeypatch.setattr(dio, "ENUM_BUDGET", 100)
    with pytest.raises(BudgetExceededError):
        dio.best_gamma((1.0, 2.0 ** 0.5, 3.0 ** 0.5), 2.0, 50)


@given(st.floats(0.1, 10.0), st.integers(1, 25))
def test_psi_scaling(c, K):
    a = psi(GOLDEN, K)
    b = psi(tuple(c * x for x in GOLDEN), K)
    assert b == pytest.approx(a / c, rel=1e-12)
