"""Extended Hamiltonian H = h(I) + alpha.J + f(theta, phi) and its simulation.

h(I) = I.QI/2 + w.I is a convex quadratic and f is a real trigonometric
polynomial in the angles only.  Each stored harmonic (k, l, c) stands for the
pair c e^{i(k.theta + l.phi)} + conj(c) e^{-i(k.theta + l.phi)}.  Both halves
of the splitting (free rotation, angle-frozen kick) are exact flows, so the
Strang composition is symplectic, time-reversible and second order.

All integration routines work on a batch of B trajectories at once; each
trajectory may carry its own perturbation scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .diophantine import ForcingVector
from .errors import DomainError, IntegrationError, PreconditionError
from .lattice import IntVector, SubmoduleBasis, contains

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Harmonic:
    k: tuple[int, ...]
    l: tuple[int, ...]
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        object.__setattr__(self, "l", tuple(int(x) for x in self.l))
        object.__setattr__(self, "c", complex(self.c))

    @property
    def norm1(self) -> int:
        return sum(map(abs, self.k)) + sum(map(abs, self.l))

    @property
    def vector(self) -> IntVector:
        return IntVector(self.k, self.l)

    @classmethod
    def cosine(cls, k, l, amplitude: float = 1.0) -> "Harmonic":
        """amplitude * cos(k.theta + l.phi)."""
        return cls(k, l, amplitude / 2.0)

    @classmethod
    def sine(cls, k, l, amplitude: float = 1.0) -> "Harmonic":
        """amplitude * sin(k.theta + l.phi)."""
        return cls(k, l, -0.5j * amplitude)


def fourier_norm(harmonics: Iterable[Harmonic], s0: float) -> float:
    """sum over all (k, l), both members of each pair, of |c| e^{|(k,l)| s0}."""
    return float(sum(2.0 * abs(h.c) * math.exp(h.norm1 * s0) for h in harmonics))


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    n: int
    m: int
    Q: np.ndarray
    w: np.ndarray
    alpha: ForcingVector
    harmonics: tuple[Harmonic, ...]
    eps: float
    r0: float
    s0: float
    domain: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        w = np.asarray(self.w, dtype=float).reshape(-1)
        alpha = self.alpha if isinstance(self.alpha, ForcingVector) else ForcingVector(tuple(self.alpha))
        lo, hi = (np.asarray(b, dtype=float).reshape(-1) for b in self.domain)
        n, m = self.n, self.m
        if Q.shape != (n, n) or w.shape != (n,):
            raise ValueError("Q must be n x n and w length n")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-14 * max(1.0, np.abs(Q).max())):
            raise ValueError("Q must be symmetric")
        if alpha.m != m:
            raise ValueError(f"alpha has length {alpha.m}, expected m={m}")
        if lo.shape != (n,) or hi.shape != (n,) or np.any(hi < lo):
            raise ValueError("domain must be a box lo <= hi in R^n")
        if self.r0 <= 0 or self.s0 <= 0:
            raise ValueError("r0 and s0 must be positive")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        ev = np.linalg.eigvalsh(Q)
        if ev[0] <= 0:
            raise ValueError("Q must be positive definite")
        seen = set()
        for h in self.harmonics:
            if len(h.k) != n or len(h.l) != m:
                raise ValueError(f"harmonic {h} has wrong dimensions")
            key = h.k + h.l
            if not any(key):
                raise ValueError("the constant harmonic carries no dynamics; drop it")
            neg = tuple(-x for x in key)
            if key in seen or neg in seen:
                raise ValueError(f"harmonic {key} stored twice (store one member of each +/- pair)")
            seen.add(key)
        norm = fourier_norm(self.harmonics, self.s0)
        if norm > self.eps * (1 + 1e-12) + 1e-300:
            raise ValueError(f"perturbation norm {norm} exceeds eps = {self.eps}")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "harmonics", tuple(self.harmonics))
        object.__setattr__(self, "domain", (lo, hi))

    @classmethod
    def build(cls, Q, w, alpha, shape: Sequence[Harmonic], eps: float, *, r0: float = 1.0,
              s0: float = 1.0, domain=None, eps_mode: str = "amplitude") -> "HamiltonianSpec":
        """Spec with perturbation eps * shape.

        ``eps_mode="amplitude"`` multiplies the shape coefficients by eps and
        records the resulting Fourier norm; ``"norm"`` rescales the shape so
        its Fourier norm equals eps.
        """
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        n = Q.shape[0]
        alpha = alpha if isinstance(alpha, ForcingVector) else ForcingVector(tuple(alpha))
        base = fourier_norm(shape, s0)
        if eps_mode == "amplitude":
            scale = eps
        elif eps_mode == "norm":
            scale = eps / base if base > 0 else 0.0
        else:
            raise ValueError(f"unknown eps_mode {eps_mode!r}")
        harm = tuple(Harmonic(h.k, h.l, h.c * scale) for h in shape) if scale else ()
        bound = fourier_norm(harm, s0)
        if domain is None:
            domain = (-np.ones(n), np.ones(n))
        return cls(n, alpha.m, Q, np.asarray(w, dtype=float), alpha, harm, bound, r0, s0, domain)

    def with_eps(self, eps: float, eps_mode: str = "amplitude", shape=None) -> "HamiltonianSpec":
        return HamiltonianSpec.build(self.Q, self.w, self.alpha, shape or self.harmonics, eps,
                                     r0=self.r0, s0=self.s0, domain=self.domain, eps_mode=eps_mode)

    # -- derived constants
    @property
    def ell(self) -> float:
        return float(np.linalg.eigvalsh(self.Q)[0])

    @property
    def M(self) -> float:
        return float(np.linalg.eigvalsh(self.Q)[-1])

    @property
    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alpha.alpha)

    def omega_bound(self) -> float:
        """Upper bound on ||(grad h(I), alpha)|| over the r0-neighbourhood of the domain."""
        lo, hi = self.domain
        best = 0.0
        for corner in itertools.product(*zip(lo, hi)):
            best = max(best, float(np.linalg.norm(self.Q @ np.asarray(corner) + self.w)))
        g = best + self.M * self.r0
        return math.hypot(g, float(np.linalg.norm(self.alpha_array)))

    def frequency(self, I) -> np.ndarray:
        return np.asarray(I, dtype=float) @ self.Q.T + self.w

    def in_domain(self, I) -> bool:
        lo, hi = self.domain
        I = np.asarray(I, dtype=float)
        return bool(np.all(I >= lo) and np.all(I <= hi))

    def arrays(self):
        H = len(self.harmonics)
        hk = np.array([h.k for h in self.harmonics], dtype=float).reshape(H, self.n)
        hl = np.array([h.l for h in self.harmonics], dtype=float).reshape(H, self.m)
        hc = np.array([h.c for h in self.harmonics], dtype=complex).reshape(H)
        return hk, hl, hc

    def default_step(self) -> float:
        lo, hi = self.domain
        fmax = max(float(np.linalg.norm(self.Q @ np.asarray(c) + self.w))
                   for c in itertools.product(*zip(lo, hi)))
        fmax = max(fmax, float(np.abs(self.alpha_array).max()), 1e-12)
        return TWO_PI / (50.0 * fmax)


@dataclass(frozen=True)
class State:
    theta: np.ndarray
    phi: np.ndarray
    I: np.ndarray
    J: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi", "I", "J"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        object.__setattr__(self, "theta", np.mod(self.theta, TWO_PI))
        object.__setattr__(self, "phi", np.mod(self.phi, TWO_PI))


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    """Snapshots of one or more trajectories.

    Arrays carry a leading batch axis B: ``I`` has shape (B, S, n) for S
    snapshots.  ``sup_drift`` is the running maximum of ||I(t)-I0|| over
    every integration step, not only the snapshots.
    """

    times: np.ndarray
    I: np.ndarray
    J: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    energy: np.ndarray
    driftI: np.ndarray
    sup_drift: np.ndarray
    step: float

    @property
    def batch(self) -> int:
        return self.I.shape[0]

    @property
    def energy_error(self) -> np.ndarray:
        return self.energy - self.energy[:, :1]

    def final_state(self, b: int = 0) -> State:
        return State(self.theta[b, -1], self.phi[b, -1], self.I[b, -1], self.J[b, -1], float(self.times[-1]))

    def member(self, b: int) -> "TrajectorySample":
        sl = slice(b, b + 1)
        return TrajectorySample(self.times, self.I[sl], self.J[sl], self.theta[sl], self.phi[sl],
                                self.energy[sl], self.driftI[sl], self.sup_drift[sl], self.step)

    def prefix(self, count: int) -> "TrajectorySample":
        """First ``count`` snapshots (running sup recomputed from them)."""
        d = self.driftI[:, :count]
        return TrajectorySample(self.times[:count], self.I[:, :count], self.J[:, :count],
                                self.theta[:, :count], self.phi[:, :count], self.energy[:, :count],
                                d, d.max(axis=1), self.step)


def _phase(hk, hl, theta, phi):
    return theta @ hk.T + phi @ hl.T  # (B, H)


def perturbation(spec: HamiltonianSpec, theta, phi, scale=None) -> np.ndarray:
    hk, hl, hc = spec.arrays()
    if not len(hc):
        return np.zeros(np.shape(theta)[:-1])
    x = _phase(hk, hl, np.atleast_2d(theta), np.atleast_2d(phi))
    val = 2.0 * (hc.real * np.cos(x) - hc.imag * np.sin(x)).sum(axis=-1)
    if scale is not None:
        val = val * np.asarray(scale)
    return val


def _forces(hk, hl, hc, theta, phi, scale):
    """(-d f/d theta, -d f/d phi) for batch angles."""
    x = _phase(hk, hl, theta, phi)
    g = 2.0 * (hc.real * np.sin(x) + hc.imag * np.cos(x))  # -(d/dx) of 2 Re(c e^{ix})
    if scale is not None:
        g = g * scale[:, None]
    return g @ hk, g @ hl


def energy(spec: HamiltonianSpec, theta, phi, I, J, scale=None) -> np.ndarray:
    I = np.atleast_2d(I)
    J = np.atleast_2d(J)
    h = 0.5 * np.einsum("bi,ij,bj->b", I, spec.Q, I) + I @ spec.w
    return h + J @ spec.alpha_array + perturbation(spec, theta, phi, scale)


def vector_field(spec: HamiltonianSpec, state: State):
    """Time derivatives (theta', phi', I', J') at a single state."""
    hk, hl, hc = spec.arrays()
    th, ph = state.theta[None], state.phi[None]
    if len(hc):
        dI, dJ = _forces(hk, hl, hc, th, ph, None)
    else:
        dI, dJ = np.zeros((1, spec.n)), np.zeros((1, spec.m))
    return spec.frequency(state.I), spec.alpha_array.copy(), dI[0], dJ[0]


def _batch(x, B, width):
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = np.broadcast_to(a, (B, width))
    return np.array(a, dtype=float).reshape(B, width)


def integrate(spec: HamiltonianSpec, initial, T: float, h_step: Optional[float] = None, *,
              stride: Optional[int] = None, max_snapshots: int = 20_000,
              scale: Optional[Sequence[float]] = None) -> TrajectorySample:
    """Strang splitting: half rotation, full kick, half rotation.

    ``initial`` is a State or a sequence of States (a batch).  ``T`` may be
    negative to integrate backwards.  ``scale`` multiplies the perturbation
    per batch member.
    """
    states = [initial] if isinstance(initial, State) else list(initial)
    if not states:
        raise ValueError("empty batch")
    B, n, m = len(states), spec.n, spec.m
    if not math.isfinite(T):
        raise ValueError("T must be finite")
    h = spec.default_step() if h_step is None else float(h_step)
    if h <= 0:
        raise ValueError("h_step must be positive")
    nsteps = int(math.ceil(abs(T) / h - 1e-9)) if T else 0
    dt = (T / nsteps) if nsteps else 0.0
    if stride is None:
        stride = max(1, int(math.ceil(nsteps / max_snapshots))) if nsteps else 1
    theta = np.stack([s.theta for s in states]).reshape(B, n).astype(float)
    phi = np.stack([s.phi for s in states]).reshape(B, m).astype(float)
    I = np.stack([s.I for s in states]).reshape(B, n).astype(float)
    J = np.stack([s.J for s in states]).reshape(B, m).astype(float)
    t0 = float(states[0].t)
    sc = None if scale is None else np.asarray(scale, dtype=float).reshape(B)
    I0 = I.copy()
    hk, hl, hc = spec.arrays()
    active = len(hc) > 0 and (sc is None or np.any(sc != 0))
    Q, w, al = spec.Q, spec.w, spec.alpha_array
    half = 0.5 * dt

    snaps_t, snaps = [], []

    def record(step_idx):
        snaps_t.append(t0 + step_idx * dt)
        snaps.append((theta.copy(), phi.copy(), I.copy(), J.copy()))

    record(0)
    sup = np.zeros(B)
    for s in range(1, nsteps + 1):
        freq = I @ Q.T + w
        theta = np.mod(theta + half * freq, TWO_PI)
        phi = np.mod(phi + half * al, TWO_PI)
        if active:
            fI, fJ = _forces(hk, hl, hc, theta, phi, sc)
            I = I + dt * fI
            J = J + dt * fJ
            freq = I @ Q.T + w
        theta = np.mod(theta + half * freq, TWO_PI)
        phi = np.mod(phi + half * al, TWO_PI)
        if active:
            np.maximum(sup, np.sqrt(((I - I0) ** 2).sum(axis=1)), out=sup)
        if s % stride == 0 or s == nsteps:
            if not (np.all(np.isfinite(I)) and np.all(np.isfinite(J))):
                raise IntegrationError(f"non-finite state at t = {t0 + s * dt}")
            record(s)
    times = np.asarray(snaps_t)
    th = np.stack([x[0] for x in snaps], axis=1)
    ph = np.stack([x[1] for x in snaps], axis=1)
    Is = np.stack([x[2] for x in snaps], axis=1)
    Js = np.stack([x[3] for x in snaps], axis=1)
    S = len(times)
    en = energy(spec, th.reshape(B * S, n), ph.reshape(B * S, m), Is.reshape(B * S, n),
                Js.reshape(B * S, m), None if sc is None else np.repeat(sc, S)).reshape(B, S)
    drift_snap = np.linalg.norm(Is - I0[:, None, :], axis=2)
    sup = np.maximum(sup, drift_snap.max(axis=1))
    return TrajectorySample(times, Is, Js, th, ph, en, drift_snap, sup, abs(dt))


def drift(traj: TrajectorySample) -> float:
    """sup_t ||I(t) - I0|| over the whole batch."""
    return float(traj.sup_drift.max())


def first_exit_time(traj: TrajectorySample, R: float, b: int = 0) -> Optional[float]:
    """First snapshot time with ||I(t)-I0|| > R, or None."""
    idx = np.flatnonzero(traj.driftI[b] > R)
    return float(traj.times[idx[0]]) if idx.size else None


def resonant_first_integral_check(spec: HamiltonianSpec, omega_star, traj: TrajectorySample, *,
                                  module: Optional[SubmoduleBasis] = None, tol: float = 1e-12) -> float:
    """max |(omega*, alpha).(I, J) - initial value| over the snapshots.

    Requires every harmonic to be orthogonal to (omega*, alpha) and, when
    ``module`` is given, to lie in it and every generator to be orthogonal.
    """
    ws = np.asarray(omega_star, dtype=float).reshape(spec.n)
    a = spec.alpha_array
    if module is not None:
        for g in module.generators:
            v = float(np.dot(g[:spec.n], ws) + np.dot(g[spec.n:], a))
            if abs(v) > tol:
                raise PreconditionError(f"generator {g} is not orthogonal to (omega*, alpha): {v}")
    for hm in spec.harmonics:
        v = float(np.dot(hm.k, ws) + np.dot(hm.l, a))
        if abs(v) > tol:
            raise PreconditionError(f"harmonic {hm.k + hm.l} is not orthogonal to (omega*, alpha): {v}")
        if module is not None and not contains(module, hm.k + hm.l):
            raise PreconditionError(f"harmonic {hm.k + hm.l} does not lie in the module")
    q = traj.I @ ws + traj.J @ a  # (B, S)
    return float(np.abs(q - q[:, :1]).max())


def random_states(spec: HamiltonianSpec, count: int, rng: np.random.Generator, *,
                  I_box=None) -> list[State]:
    """Uniform angles, actions uniform in ``I_box`` (default: the domain), J = 0."""
    lo, hi = spec.domain if I_box is None else (np.asarray(I_box[0], float), np.asarray(I_box[1], float))
    out = []
    for _ in range(count):
        out.append(State(rng.uniform(0, TWO_PI, spec.n), rng.uniform(0, TWO_PI, spec.m),
                         rng.uniform(lo, hi), np.zeros(spec.m)))
    return out


@dataclass(frozen=True)
class SweepRow:
    eps: float
    drift: float
    bound_R: float
    horizon_T: float
    hypothesis_met: bool


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]
    fit: Optional[object] = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def drift_sweep(spec: HamiltonianSpec, eps_grid: Sequence[float], *, T: Optional[float] = None,
                T_schedule=None, h_step: Optional[float] = None, initial: Sequence[State],
                gamma: float, tau: float, eps_mode: str = "amplitude") -> SweepTable:
    """Maximal drift over the initial conditions for each eps.

    The perturbation shape is ``spec.harmonics``; each row scales it by eps
    (``eps_mode`` as in :meth:`HamiltonianSpec.build`).  The horizon is ``T``
    or ``T_schedule(eps)``.  All runs sharing a horizon are integrated as a
    single batch.
    """
    from .constants import thm1
    from .fitting import fit_exponent

    if T is None and T_schedule is None:
        raise ValueError("give T or T_schedule")
    shape = spec.harmonics
    base = fourier_norm(shape, spec.s0)
    Omega = spec.omega_bound()
    rows = []
    horizons = {}
    for e in eps_grid:
        if e < 0:
            raise ValueError("eps must be nonnegative")
        horizons.setdefault(float(T if T is not None else T_schedule(e)), []).append(float(e))
    drifts = {}
    for horizon, group in horizons.items():
        scales = []
        for e in group:
            s = e if eps_mode == "amplitude" else (e / base if base else 0.0)
            scales.extend([s] * len(initial))
        batch = list(initial) * len(group)
        traj = integrate(spec.with_eps(1.0, "amplitude", shape), batch, horizon, h_step, scale=scales)
        sup = traj.sup_drift.reshape(len(group), len(initial)).max(axis=1)
        for e, d in zip(group, sup):
            drifts[e] = float(d)
    c1 = thm1(spec.n, tau, gamma, min(spec.ell, 1.0), spec.M, Omega, spec.r0, spec.s0)
    for e in eps_grid:
        e = float(e)
        norm = (e * base if eps_mode == "amplitude" else e)
        horizon = float(T if T is not None else T_schedule(e))
        bound = c1.R(norm) if norm > 0 else 0.0
        rows.append(SweepRow(e, drifts[e], bound, horizon, bool(norm > 0 and c1.hypothesis_met(norm))))
    pos = [(r.eps, r.drift) for r in rows if r.drift > 0 and r.eps > 0]
    fit = fit_exponent(pos) if len(pos) >= 2 else None
    return SweepTable(tuple(rows), fit)
