import numpy as np
import pytest

from nekho.fitting import fit_exponent
from nekho.geometry import task_rng


def test_power_two():
    xs = np.logspace(-3, 0, 7)
    r = fit_exponent(zip(xs, xs ** 2))
    assert r.slope == pytest.approx(2.0, abs=1e-12) and r.r2 == pytest.approx(1.0)


def test_constant():
    r = fit_exponent([(x, 3.0) for x in (1e-3, 1e-2, 1e-1)])
    assert r.slope == pytest.approx(0.0, abs=1e-12)


def test_linear_drift_synthetic():
    eps = [1e-2, 1e-3, 1e-4, 1e-5]
    assert fit_exponent([(e, e) for e in eps]).slope == pytest.approx(1.0, abs=1e-12)


def test_noisy_root():
    rng = task_rng(0)
    xs = np.logspace(-4, 0, 40)
    ys = xs ** 0.5 * np.exp(rng.normal(0, 0.05, xs.size))
    assert 0.45 <= fit_exponent(zip(xs, ys)).slope <= 0.55


@pytest.mark.parametrize("pairs", [[(1.0, 1.0)], [(1.0, 1.0), (0.0, 2.0)], [(1.0, -1.0), (2.0, 1.0)],
                                   [(2.0, 1.0), (2.0, 3.0)]])
def test_invalid_input(pairs):
    with pytest.raises(ValueError):
        fit_exponent(pairs)


def test_to_dict_roundtrip():
    d = fit_exponent([(1.0, 1.0), (10.0, 100.0)]).to_dict()
    assert set(d) >= {"slope", "intercept", "r2"}
