"""Arithmetic of the forcing frequency vector alpha.

All quantities are computed by exhaustive enumeration of integer vectors k
in Z^m, shell by shell in the l1 norm.  Results are relative to the stored
double-precision alpha; products k.alpha use error-free transformations so
that small divisors are not swamped by rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError, ResonantWitnessError

PHI = (1.0 + math.sqrt(5.0)) / 2.0
RESONANCE_TOL = 1e-13
ENUM_BUDGET = 50_000_000

KNOWN_VECTORS = {
    "unit": (1.0,),
    "golden_pair": (1.0, PHI),
    "sqrt2_pair": (1.0, math.sqrt(2.0)),
}


@dataclass(frozen=True)
class ForcingVector:
    alpha: tuple[float, ...]
    tag: str = ""

    def __post_init__(self):
        a = tuple(float(x) for x in self.alpha)
        if not a:
            raise ValueError("alpha must have at least one entry")
        if not all(math.isfinite(x) for x in a):
            raise ValueError("alpha entries must be finite")
        object.__setattr__(self, "alpha", a)

    @property
    def m(self) -> int:
        return len(self.alpha)

    @property
    def sup_norm(self) -> float:
        return max(abs(x) for x in self.alpha)

    @classmethod
    def named(cls, kind: str) -> "ForcingVector":
        try:
            return cls(KNOWN_VECTORS[kind], kind)
        except KeyError:
            raise ValueError(f"unknown alpha kind {kind!r}; known: {sorted(KNOWN_VECTORS)}") from None


@dataclass(frozen=True)
class DioProfile:
    gamma: float
    tau: float
    K_max: int
    worst_witness: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "tau": self.tau, "K_max": self.K_max,
                "worst_witness": list(self.worst_witness)}


@dataclass(frozen=True)
class DioCheck:
    passed: bool
    witness: tuple[int, ...]
    value: float
    resonant: bool = False


def _alpha(alpha) -> np.ndarray:
    if isinstance(alpha, ForcingVector):
        alpha = alpha.alpha
    return np.asarray(alpha, dtype=float).reshape(-1)


def _shell_all(m: int, r: int) -> np.ndarray:
    """All k in Z^m with |k|_1 == r (both signs)."""
    if r == 0:
        return np.zeros((1, m), dtype=np.int64)
    if m == 1:
        return np.array([[r], [-r]], dtype=np.int64)
    if m == 2:
        a = np.arange(-r, r + 1, dtype=np.int64)
        b = r - np.abs(a)
        pos = np.column_stack([a, b])
        neg = np.column_stack([a, -b])[b > 0]
        return np.vstack([pos, neg])
    parts = []
    for a in range(-r, r + 1):
        rest = _shell_all(m - 1, r - abs(a))
        parts.append(np.hstack([np.full((len(rest), 1), a, dtype=np.int64), rest]))
    return np.vstack(parts)


def l1_shell(m: int, r: int) -> np.ndarray:
    """Nonzero k in Z^m with |k|_1 == r, one representative per +/- pair."""
    if r <= 0:
        return np.zeros((0, m), dtype=np.int64)
    s = _shell_all(m, r)
    first = s[np.arange(len(s)), (s != 0).argmax(axis=1)]
    return s[first > 0]


def _shell_count_estimate(m: int, K: int) -> int:
    # |{k : |k|_1 <= K}| ~ (2K)^m / m!
    return int((2 * K + 1) ** m / math.factorial(m)) + 1


def _check_budget(m: int, K: int) -> None:
    est = _shell_count_estimate(m, K)
    if est > ENUM_BUDGET:
        raise BudgetExceededError(f"enumerating |k| <= {K} in Z^{m} needs ~{est} vectors")


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = 134217729.0 * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dot_compensated(kmat: np.ndarray, alpha: Sequence[float]) -> np.ndarray:
    """Row-wise k.alpha with error-free products and compensated summation."""
    a = _alpha(alpha)
    kf = np.asarray(kmat, dtype=float)
    if kf.ndim == 1:
        kf = kf[None, :]
    s = np.zeros(len(kf))
    c = np.zeros(len(kf))
    for j in range(kf.shape[1]):
        p, e = _two_prod(kf[:, j], a[j])
        s, e2 = _two_sum(s, p)
        c += e + e2
    return s + c


def _shell_divisors(alpha: np.ndarray, r: int):
    ks = l1_shell(len(alpha), r)
    vals = np.abs(dot_compensated(ks, alpha))
    return ks, vals


def _resonance_mask(vals: np.ndarray, r: int, alpha: np.ndarray, tol: float) -> np.ndarray:
    return vals <= tol * r * np.max(np.abs(alpha))


def dio_check(alpha, gamma: float, tau: float, K_max: int, *,
              tol: float = RESONANCE_TOL) -> DioCheck:
    """Check |k.alpha| >= gamma |k|^-tau for every nonzero |k| <= K_max."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if K_max < 1:
        raise ValueError("K_max must be >= 1")
    a = _alpha(alpha)
    _check_budget(len(a), K_max)
    worst_val = math.inf
    worst_k: tuple[int, ...] = ()
    for r in range(1, int(K_max) + 1):
        ks, vals = _shell_divisors(a, r)
        res = _resonance_mask(vals, r, a, tol)
        if res.any():
            k = tuple(int(x) for x in ks[np.argmax(res)])
            return DioCheck(False, k, 0.0, resonant=True)
        scaled = vals * float(r) ** tau
        i = int(np.argmin(scaled))
        if scaled[i] < worst_val:
            worst_val = float(scaled[i])
            worst_k = tuple(int(x) for x in ks[i])
    return DioCheck(worst_val >= gamma, worst_k, worst_val)


def best_gamma(alpha, tau: float, K_max: int, *, tol: float = RESONANCE_TOL) -> DioProfile:
    """Largest gamma for which the Diophantine inequality holds up to K_max."""
    a = _alpha(alpha)
    _check_budget(len(a), K_max)
    worst_val = math.inf
    worst_k: tuple[int, ...] = ()
    for r in range(1, int(K_max) + 1):
        ks, vals = _shell_divisors(a, r)
        res = _resonance_mask(vals, r, a, tol)
        if res.any():
            raise ResonantWitnessError(ks[np.argmax(res)])
        scaled = vals * float(r) ** tau
        i = int(np.argmin(scaled))
        if scaled[i] < worst_val:
            worst_val = float(scaled[i])
            worst_k = tuple(int(x) for x in ks[i])
    return DioProfile(worst_val, float(tau), int(K_max), worst_k)


class PsiTable:
    """Incrementally extended table of Psi(1), Psi(2), ...

    Psi(K) = max{ 1/|k.alpha| : 0 < |k| <= K }, a step function of real K.
    """

    def __init__(self, alpha, tol: float = RESONANCE_TOL):
        self.alpha = _alpha(alpha)
        self.tol = tol
        self._values: list[float] = []
        self._argmax: list[tuple[int, ...]] = []

    def _extend(self, K: int) -> None:
        if K > len(self._values):
            _check_budget(len(self.alpha), K)
        while len(self._values) < K:
            r = len(self._values) + 1
            ks, vals = _shell_divisors(self.alpha, r)
            res = _resonance_mask(vals, r, self.alpha, self.tol)
            if res.any():
                raise ResonantWitnessError(ks[np.argmax(res)], "Psi undefined: resonant witness "
                                           f"k={tuple(int(x) for x in ks[np.argmax(res)])}")
            i = int(np.argmin(vals))
            cand = 1.0 / float(vals[i])
            prev = self._values[-1] if self._values else -math.inf
            if cand > prev:
                self._values.append(cand)
                self._argmax.append(tuple(int(x) for x in ks[i]))
            else:
                self._values.append(prev)
                self._argmax.append(self._argmax[-1])

    def __call__(self, K: float) -> float:
        if K < 1:
            raise DomainError(f"Psi is defined for K >= 1, got {K}")
        j = int(math.floor(K))
        self._extend(j)
        return self._values[j - 1]

    def witness(self, K: float) -> tuple[int, ...]:
        j = int(math.floor(K))
        self._extend(j)
        return self._argmax[j - 1]


@lru_cache(maxsize=64)
def _psi_table(alpha_key: tuple[float, ...]) -> PsiTable:
    return PsiTable(alpha_key)


def psi(alpha, K: float) -> float:
    """Worst inverse small divisor max 1/|k.alpha| over 0 < |k| <= K."""
    return _psi_table(tuple(_alpha(alpha).tolist()))(K)


def delta_from_psi(psi_fn: Callable[[float], float], x: float) -> float:
    """sup{K >= 1 : K psi(K) <= x} for a psi that is constant on [j, j+1)."""
    p1 = psi_fn(1)
    if x < p1:
        raise DomainError(f"Delta is defined for x >= Psi(1) = {p1}, got {x}")
    j = 1
    while True:
        pj = psi_fn(j)
        if j * pj > x:
            # previous segment was feasible up to its right end
            return float(j)
        if (j + 1) * pj > x:
            # K = j is feasible, so never report less than j despite rounding
            return max(float(j), x / pj)
        j += 1


def delta(alpha, x: float) -> float:
    """Generalized inverse of K -> K Psi(K)."""
    return delta_from_psi(lambda K: psi(alpha, K), x)


def psi_dio_bound(gamma: float, tau: float) -> Callable[[float], float]:
    """K -> K^tau / gamma, the Diophantine upper bound on Psi."""
    return lambda K: K ** tau / gamma


def delta_dio_bound(gamma: float, tau: float) -> Callable[[float], float]:
    """x -> (gamma x)^(1/(tau+1)), the inverse of K -> K psi_dio_bound(K)."""
    return lambda x: (gamma * x) ** (1.0 / (tau + 1.0))
