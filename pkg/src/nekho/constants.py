"""Closed-form stability exponents and thresholds.

Exponents are exact ``Fraction`` values (tau is converted exactly from its
float representation); radii, times and thresholds are floats.  The convexity
modulus is called ``ell`` throughout to keep ``m`` for the number of forcing
frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .diophantine import ForcingVector, delta as _delta, psi as _psi
from .errors import DomainError, HypothesisNotMetError
from .lattice import SubmoduleBasis, covolume, is_admissible, project


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(float(x))


def _check_common(n, tau, M, ell=None, r0=None, s0=None):
    if n < 1:
        raise DomainError("n must be >= 1")
    if tau < 0:
        raise DomainError("tau must be >= 0")
    if M <= 0:
        raise DomainError("M must be positive")
    if ell is not None and not (0 < ell <= min(1.0, M)):
        raise DomainError(f"convexity modulus must satisfy 0 < ell <= min(1, M), got {ell}")
    if r0 is not None and r0 <= 0:
        raise DomainError("r0 must be positive")
    if s0 is not None and s0 <= 0:
        raise DomainError("s0 must be positive")


def _R_star(n, tau, gamma, ell, M) -> float:
    return ell * gamma / (10.0 * M * (n + 1) ** tau)


def _eps0(n, tau, gamma, ell, M, power) -> float:
    return ell * gamma ** 2 / (2 ** 10 * (n + 1) ** (2 * tau)) * (ell / (10.0 * M)) ** power


def exponents(n: int, tau) -> tuple[Fraction, Fraction]:
    """Time and radius exponents (a, b) of the main estimate."""
    t = _frac(tau)
    a = 1 / (2 * (n + 1) * (t + 1))
    b = ((n + 1) * t + 1) / (2 * (n + 1) * (t + 1))
    return a, b


def exponents_near_resonance(n: int, tau, d: int, printed: bool = False) -> tuple[Fraction, Fraction]:
    """(a(d), b(d)) for a resonance of multiplicity d.

    The default uses 1/(2((n+1)tau + n+1-d)); ``printed=True`` gives the
    alternative parenthesization 1/(2(n+1)tau + n+1-d), which does not
    reduce to the d = 0 exponents.
    """
    t = _frac(tau)
    if printed:
        den = 2 * (n + 1) * t + n + 1 - d
    else:
        den = 2 * ((n + 1) * t + n + 1 - d)
    return 1 / den, ((n + 1) * t + 1) / den


@dataclass(frozen=True)
class Thm1Constants:
    n: int
    tau: float
    a: Fraction
    b: Fraction
    R_star: float
    T_star: float
    eps0: float
    eps_star: float
    F: float
    s0: float
    eps: Optional[float] = None

    def K(self, eps: float) -> float:
        return (self.eps0 / eps) ** float(self.a)

    def R(self, eps: float) -> float:
        return self.R_star * (eps / self.eps0) ** float(self.b)

    def T(self, eps: float) -> float:
        return self.T_star * math.exp(self.s0 / 6.0 * (self.eps0 / eps) ** float(self.a))

    def hypothesis_met(self, eps: Optional[float] = None) -> bool:
        e = self.eps if eps is None else eps
        return e is not None and 0 < e <= min(self.eps0, self.eps_star)

    def to_dict(self) -> dict:
        out = {
            "theorem": "1", "n": self.n, "tau": self.tau,
            "a": float(self.a), "a_exact": str(self.a),
            "b": float(self.b), "b_exact": str(self.b),
            "R_star": self.R_star, "T_star": self.T_star,
            "eps0": self.eps0, "eps_star": self.eps_star, "F": self.F,
        }
        if self.eps is not None:
            out.update(eps=self.eps, R=self.R(self.eps), T=self.T(self.eps), K=self.K(self.eps),
                       hypothesis_met=self.hypothesis_met())
        return out


def thm1(n: int, tau: float, gamma: float, ell: float, M: float, Omega: float,
         r0: float, s0: float, eps: Optional[float] = None) -> Thm1Constants:
    """Constants of the main stability estimate under a Diophantine forcing."""
    _check_common(n, tau, M, ell, r0, s0)
    if gamma <= 0 or Omega <= 0:
        raise DomainError("gamma and Omega must be positive")
    a, b = exponents(n, tau)
    F = 10.0 * M / ell
    R_star = _R_star(n, tau, gamma, ell, M)
    T_star = 3.0 * s0 / Omega
    eps0 = _eps0(n, tau, gamma, ell, M, 2 * (n + 1))
    eps_star = eps0 * (r0 / R_star) ** (1.0 / float(b))
    return Thm1Constants(n, float(tau), a, b, R_star, T_star, eps0, eps_star, F, float(s0), eps)


@dataclass(frozen=True)
class Thm2Constants:
    n: int
    tau: float
    d: int
    a_d: Fraction
    b_d: Fraction
    R_star_d: float
    eps0_L: float
    eps_star_L: float
    eps_dstar_L: float
    K_L: int
    covolume_L: float
    T_star: Optional[float] = None
    rho: Optional[float] = None
    eps: Optional[float] = None
    printed: bool = False

    def R(self, eps: float) -> float:
        return self.R_star_d * (eps / self.eps0_L) ** float(self.b_d)

    def hypothesis_met(self, eps: Optional[float] = None) -> bool:
        e = self.eps if eps is None else eps
        return e is not None and 0 < e <= min(self.eps0_L, self.eps_star_L, self.eps_dstar_L)

    def as_thm1_fields(self) -> dict:
        """Fields under the names used by :class:`Thm1Constants`."""
        return {"a": self.a_d, "b": self.b_d, "R_star": self.R_star_d, "T_star": self.T_star,
                "eps0": self.eps0_L, "eps_star": self.eps_star_L}

    def to_dict(self) -> dict:
        out = {
            "theorem": "2", "n": self.n, "tau": self.tau, "d": self.d,
            "a_d": float(self.a_d), "a_d_exact": str(self.a_d),
            "b_d": float(self.b_d), "b_d_exact": str(self.b_d),
            "R_star_d": self.R_star_d, "eps0_L": self.eps0_L, "eps_star_L": self.eps_star_L,
            "eps_dstar_L": self.eps_dstar_L, "K_L": self.K_L, "covolume_L": self.covolume_L,
            "T_star": self.T_star, "rho": self.rho, "printed_form": self.printed,
        }
        if not self.printed:
            pa, pb = exponents_near_resonance(self.n, self.tau, self.d, printed=True)
            out["note"] = ("exponents use 1/(2((n+1)tau+n+1-d)); the alternative form "
                           f"1/(2(n+1)tau+n+1-d) would give a_d={float(pa)}, b_d={float(pb)}")
        if self.eps is not None:
            out.update(eps=self.eps, R=self.R(self.eps), hypothesis_met=self.hypothesis_met())
        return out


def thm2(L: SubmoduleBasis, n: int, tau: float, gamma: float, ell: float, M: float, r0: float,
         eps: Optional[float] = None, *, s0: Optional[float] = None,
         Omega: Optional[float] = None, printed: bool = False) -> Thm2Constants:
    """Constants of the improved estimate near the resonance defined by ``L``.

    ``printed=True`` switches both the exponents and the radius prefactor to
    the alternative forms (radius ``(ell/10M)^(n+1-d) gamma/(n+1)^tau``).
    """
    _check_common(n, tau, M, ell, r0, s0)
    if L.n != n:
        raise DomainError(f"module lives in Z^{L.n}+{L.m}, expected n={n}")
    if not is_admissible(L):
        raise DomainError("L must be admissible")
    d = L.rank
    a_d, b_d = exponents_near_resonance(n, tau, d, printed=printed)
    cov = 1.0 if L.is_zero() else covolume(project(L))
    K_L = max(1, L.max_norm1)
    ratio = ell / (10.0 * M)
    if printed:
        R_star_d = ratio ** (n + 1 - d) * gamma / (n + 1) ** tau
    else:
        R_star_d = _R_star(n, tau, gamma, ell, M)
    eps0_L = _eps0(n, tau, gamma, ell, M, 2 * (n + 1 - d)) / cov
    eps_star_L = eps0_L * (r0 / R_star_d) ** (1.0 / float(b_d))
    eps_dstar_L = eps0_L * K_L ** (-1.0 / float(a_d))
    T_star = 3.0 * s0 / Omega if (s0 is not None and Omega) else None
    rho = 4.0 / M * math.sqrt(ell * eps) if eps is not None else None
    return Thm2Constants(n, float(tau), d, a_d, b_d, R_star_d, eps0_L, eps_star_L, eps_dstar_L,
                         K_L, cov, T_star, rho, eps, printed)


@dataclass(frozen=True)
class Thm3Constants:
    n: int
    tau: float
    a: Fraction
    measure_exponent: Fraction
    radius_exponent: Fraction
    R_bar_star: float
    eps_bar0: float
    eps_bar_star: float
    s0: float

    def R(self, eps: float) -> float:
        return self.R_bar_star * (eps / self.eps_bar0) ** 0.5

    def T(self, eps: float) -> float:
        e0 = self.eps_bar0
        return (self.s0 * self.R_bar_star / (5 * e0) * (e0 / eps) ** 0.5
                * math.exp(self.s0 / 6 * (e0 / eps) ** float(self.a)))

    def hypothesis_met(self, eps: float) -> bool:
        return 0 < eps <= min(self.eps_bar0, self.eps_bar_star)

    def to_dict(self) -> dict:
        return {"theorem": "3", "n": self.n, "tau": self.tau, "a": float(self.a),
                "a_exact": str(self.a), "measure_exponent": float(self.measure_exponent),
                "radius_exponent": float(self.radius_exponent), "R_bar_star": self.R_bar_star,
                "eps_bar0": self.eps_bar0, "eps_bar_star": self.eps_bar_star}


def thm3(n: int, tau: float, gamma: float, mbar: float, M: float, r0: float, s0: float) -> Thm3Constants:
    """Constants for solutions starting in the completely non-resonant block."""
    _check_common(n, tau, M, None, r0, s0)
    if gamma <= 0 or mbar <= 0:
        raise DomainError("gamma and mbar must be positive")
    a, b = exponents(n, tau)
    ratio = mbar / (10.0 * M)
    R_bar = ratio ** (n + 1) * gamma / (n + 1) ** tau
    e0 = M * gamma ** 2 / (2 ** 10 * (n + 1) ** (2 * tau)) * ratio ** (2 * (n + 1))
    e_star = e0 * (r0 / R_bar) ** 2
    return Thm3Constants(n, float(tau), a, b, Fraction(1, 2), R_bar, e0, e_star, float(s0))


@dataclass(frozen=True)
class Thm33Constants:
    n: int
    tau: float
    gamma_p: float
    tau_p: float
    a_p: Fraction
    radius_exponent: Fraction
    measure_exponent_gamma: Fraction
    R_star_p: float
    eps0_p: float
    eps_star_p: float
    s0: float

    def R(self, eps: float) -> float:
        return self.R_star_p * (eps / self.eps0_p) ** 0.5

    def T(self, eps: float) -> float:
        e0 = self.eps0_p
        return (self.s0 * self.R_star_p / (5 * e0) * (e0 / eps) ** 0.5
                * math.exp(self.s0 / 6 * (e0 / eps) ** float(self.a_p)))

    def hypothesis_met(self, eps: float) -> bool:
        return 0 < eps <= min(self.eps0_p, self.eps_star_p)

    def to_dict(self) -> dict:
        return {"theorem": "33", "n": self.n, "tau": self.tau, "gamma_prime": self.gamma_p,
                "tau_prime": self.tau_p, "a_prime": float(self.a_p), "a_prime_exact": str(self.a_p),
                "radius_exponent": float(self.radius_exponent),
                "measure_exponent_gamma": float(self.measure_exponent_gamma),
                "R_star_prime": self.R_star_p, "eps0_prime": self.eps0_p,
                "eps_star_prime": self.eps_star_p}


def thm33(n: int, tau: float, gamma_p: float, tau_p: float, M: float, r0: float, s0: float, *,
          gamma: Optional[float] = None, m: Optional[int] = None) -> Thm33Constants:
    """Constants on the set where |(k,l).(w,alpha)| >= gamma' |(k,l)|^-tau'."""
    _check_common(n, tau, M, None, r0, s0)
    if gamma_p <= 0:
        raise DomainError("gamma' must be positive")
    if gamma is not None and gamma_p > gamma:
        raise DomainError(f"gamma' = {gamma_p} exceeds gamma = {gamma}")
    if m is not None and not tau_p > n + m - 1:
        raise DomainError(f"tau' must exceed n+m-1 = {n + m - 1}")
    if tau_p < tau:
        raise DomainError("tau' must be >= tau")
    a_p = 1 / (2 * (_frac(tau_p) + 1))
    R_p = 8.0 * gamma_p / (9.0 * M)
    e0 = gamma_p ** 2 / (768.0 * M)
    e_star = e0 * (r0 / R_p) ** 2
    return Thm33Constants(n, float(tau), float(gamma_p), float(tau_p), a_p, Fraction(1, 2),
                          Fraction(1), R_p, e0, e_star, float(s0))


@dataclass(frozen=True)
class Thm4Constants:
    n: int
    eps: float
    F: float
    threshold: float
    delta_arg: float
    Delta_eps: float
    K_eps: float
    R_eps: float
    K_ok: bool
    R_ok: bool
    T_eps: Optional[float] = None

    @property
    def applicable(self) -> bool:
        return self.K_ok and self.R_ok

    def to_dict(self) -> dict:
        return {"theorem": "4", "n": self.n, "eps": self.eps, "F": self.F,
                "threshold": self.threshold, "delta_arg": self.delta_arg,
                "Delta_eps": self.Delta_eps, "K_eps": self.K_eps, "R_eps": self.R_eps,
                "K_ok": self.K_ok, "R_ok": self.R_ok, "T_eps": self.T_eps}


def thm4(n: int, alpha, ell: float, M: float, r0: float, s0: float, eps: float,
         psi: Optional[Callable[[float], float]] = None,
         delta: Optional[Callable[[float], float]] = None, *,
         Omega: Optional[float] = None) -> Thm4Constants:
    """Constants of the estimate for a merely non-resonant forcing vector.

    ``psi`` and ``delta`` default to the brute-force functions of ``alpha``;
    passing the Diophantine bounds reproduces the main-theorem scaling.
    """
    _check_common(n, 0, M, ell, r0, s0)
    if eps <= 0:
        raise DomainError("eps must be positive")
    fv = alpha if isinstance(alpha, ForcingVector) else ForcingVector(tuple(alpha))
    psi_fn = psi or (lambda K: _psi(fv.alpha, K))
    delta_fn = delta or (lambda x: _delta(fv.alpha, x))
    F = 10.0 * M / ell
    threshold = (n + 1) ** 2 * ell * fv.sup_norm ** 2 / (2 ** 10 * F ** (2 * (n + 1)))
    if eps > threshold:
        raise HypothesisNotMetError(f"eps = {eps} exceeds the applicability threshold {threshold}")
    x = (n + 1) / (2 ** 5 * F ** (n + 1)) * math.sqrt(ell / eps)
    if x < psi_fn(1) * (1 - 1e-12):
        raise HypothesisNotMetError(
            f"Delta argument {x} lies below Psi(1) = {psi_fn(1)}; Delta is undefined there")
    x = max(x, psi_fn(1))
    D = delta_fn(x)
    K_eps = (D / (n + 1)) ** (1.0 / (n + 1))
    R_eps = 1.0 / (F * K_eps * psi_fn(max(1.0, (n + 1) * K_eps ** (n + 1))))
    T_eps = 3.0 * s0 / Omega * math.exp(s0 * K_eps / 6.0) if Omega else None
    return Thm4Constants(n, eps, F, threshold, x, D, K_eps, R_eps, K_eps >= 1.0, R_eps <= r0, T_eps)
