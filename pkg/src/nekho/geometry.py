"""Resonance spaces, zones, blocks and their covering parameters.

A rank-d admissible module Lambda with basis rows (k^j, l^j) defines the
affine resonance space R_Lambda = {omega : K omega + L alpha = 0} and the
open zone Z_Lambda of radius delta_Lambda = lambda_d / |Lambda~| around it.
Blocks are zones minus all zones of the next multiplicity; together with the
completely non-resonant block B_{0} = R^n minus Z_1 they cover frequency space.

Lattice data stays exact; geometric predicates use doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from .diophantine import ForcingVector, l1_shell, psi_dio_bound
from .errors import DomainError, LadderViolationError
from .lattice import SubmoduleBasis, covolume, integer_kernel, is_admissible, project
from .submodules import ModuleFamily, admissible_families, short_vectors

GEOM_TOL = 1e-9
BOUNDARY_TOL = 1e-12
DEFAULT_HALF_WIDTH = 3.0


def task_rng(seed: int, task: int = 0) -> np.random.Generator:
    """Independent stream per (seed, task) so results do not depend on scheduling."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(task)]))


def _alpha(alpha) -> np.ndarray:
    if isinstance(alpha, ForcingVector):
        alpha = alpha.alpha
    return np.asarray(alpha, dtype=float).reshape(-1)


@dataclass(frozen=True)
class FrequencyPoint:
    omega: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in np.ravel(self.omega))
        if not all(math.isfinite(x) for x in w):
            raise ValueError("frequency entries must be finite")
        object.__setattr__(self, "omega", w)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.omega)


@dataclass(frozen=True, eq=False)
class AffineResonanceSpace:
    """R_Lambda; ``empty`` is set for non-admissible modules."""

    module: SubmoduleBasis
    base_point: Optional[np.ndarray]
    direction_basis: Optional[np.ndarray]  # rows, orthonormal, shape (n-d, n)
    normal_basis: Optional[np.ndarray] = None  # rows, orthonormal, shape (d, n)
    empty: bool = False

    @property
    def dim(self) -> int:
        return -1 if self.empty else self.direction_basis.shape[0]

    def distance(self, omega) -> float:
        if self.empty:
            return math.inf
        v = np.asarray(omega, dtype=float) - self.base_point
        if self.normal_basis.shape[0] == 0:
            return 0.0
        return float(np.linalg.norm(self.normal_basis @ v))


def resonance_space(lat: SubmoduleBasis, alpha) -> AffineResonanceSpace:
    a = _alpha(alpha)
    n = lat.n
    if len(a) != lat.m:
        raise ValueError(f"alpha has length {len(a)}, module expects m={lat.m}")
    if lat.is_zero():
        return AffineResonanceSpace(lat, np.zeros(n), np.eye(n), np.zeros((0, n)))
    if not is_admissible(lat):
        return AffineResonanceSpace(lat, None, None, None, empty=True)
    kmat = np.asarray(lat.k_parts, dtype=float)
    lmat = np.asarray(lat.l_parts, dtype=float).reshape(lat.rank, lat.m)
    rhs = -(lmat @ a)
    base = np.linalg.pinv(kmat) @ rhs
    direction = null_space(kmat).T
    normal = null_space(direction).T if direction.size else np.eye(n)
    return AffineResonanceSpace(lat, base, direction.reshape(-1, n), normal.reshape(-1, n))


def distance_to_resonance(omega, lat: SubmoduleBasis, alpha) -> float:
    return resonance_space(lat, alpha).distance(omega)


# ---------------------------------------------------------------------------
# covering parameters


@dataclass(frozen=True)
class LadderCheck:
    inequality: str
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)


@dataclass(frozen=True)
class CoveringParams:
    """lambda ladder and derived radii for one cutoff K.

    ``lambdas[d-1]`` is lambda_d.  For rank d >= 1 modules
    delta = lambda_d/|Lambda~|, beta = E K delta and r = 8 delta/ell;
    the trivial module uses beta = lambda_1 and r = 8 lambda_1/(ell F K).
    """

    n: int
    m: int
    K: float
    lambdas: tuple[float, ...]
    F: float
    E: float
    ell: float
    M: float
    ladder: tuple[LadderCheck, ...] = ()
    mode: str = "dio"

    @property
    def ladder_ok(self) -> bool:
        return all(c.ok for c in self.ladder)

    def lam(self, d: int) -> float:
        if d == 0:
            return self.lambdas[0] / (self.F * self.K)
        return self.lambdas[d - 1]

    def delta(self, lat: SubmoduleBasis, cov: Optional[float] = None) -> float:
        if lat.is_zero():
            raise DomainError("the trivial module has no zone")
        cov = module_covolume(lat) if cov is None else cov
        return self.lambdas[lat.rank - 1] / cov

    def beta(self, lat: SubmoduleBasis, cov: Optional[float] = None) -> float:
        if lat.is_zero():
            return self.lambdas[0]
        return self.E * self.K * self.delta(lat, cov)

    def beta_zero_stated(self) -> float:
        """9 M K r_{0} / 8, weaker than lambda_1 by the factor E/F."""
        return 9.0 * self.M * self.K * self.r(SubmoduleBasis.zero(self.n, self.m)) / 8.0

    def r(self, lat: SubmoduleBasis, cov: Optional[float] = None) -> float:
        cov = 1.0 if lat.is_zero() else (module_covolume(lat) if cov is None else cov)
        return 8.0 * self.lam(lat.rank) / (self.ell * cov)

    def scaled(self, c: float) -> "CoveringParams":
        """Same parameters with every lambda_d multiplied by c (ladder not rechecked)."""
        return CoveringParams(self.n, self.m, self.K, tuple(c * x for x in self.lambdas), self.F,
                              self.E, self.ell, self.M, (), self.mode)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "K": self.K, "lambdas": list(self.lambdas),
                "F": self.F, "E": self.E, "ell": self.ell, "M": self.M, "mode": self.mode,
                "ladder": [{"inequality": c.inequality, "lhs": c.lhs, "rhs": c.rhs, "ok": c.ok}
                           for c in self.ladder]}


def module_covolume(lat: SubmoduleBasis) -> float:
    return 1.0 if lat.is_zero() else covolume(project(lat))


def _check_params(n, K, ell, M):
    if n < 1:
        raise DomainError("n must be >= 1")
    if K < 1:
        raise DomainError("K must be >= 1")
    if not (0 < ell <= min(1.0, M)):
        raise DomainError(f"need 0 < ell <= min(1, M), got ell={ell}, M={M}")


def _lambdas(n, K, ell, F, p_top) -> tuple[float, ...]:
    return tuple(ell / (8.0 * F ** (n - d + 1) * p_top * K ** (n - d + 1)) for d in range(1, n + 1))


def _finish(params: CoveringParams, check: bool) -> CoveringParams:
    if check:
        for c in params.ladder:
            if not c.ok:
                raise LadderViolationError(c.inequality, c.lhs, c.rhs)
    return params


def covering_params(n: int, m: int, K: float, gamma: float, tau: float, ell: float, M: float,
                    *, check: bool = True) -> CoveringParams:
    """Diophantine covering parameters with F = 10M/ell and E = 9M/ell."""
    _check_params(n, K, ell, M)
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    if tau < m - 1:
        raise DomainError(f"tau must be >= m-1 = {m - 1}")
    F, E = 10.0 * M / ell, 9.0 * M / ell
    # lambda_d = ell gamma / (8 F^(n-d+1) (n+1)^tau K^((n+1)tau+n-d+1)), written through the
    # Psi bound so that the Psi-driven parameters coincide exactly
    lams = _lambdas(n, K, ell, F, psi_dio_bound(gamma, tau)((n + 1) * K ** (n + 1)))
    ladder = []
    for d in range(1, n):
        ladder.append(LadderCheck(f"F K lambda_{d} <= lambda_{d + 1}", F * K * lams[d - 1], lams[d]))
        ladder.append(LadderCheck(f"lambda_{d + 1} <= gamma (d+1)^-tau K^-(d+1)tau", lams[d],
                                  gamma * (d + 1) ** (-tau) * K ** (-(d + 1) * tau)))
    ladder.append(LadderCheck("lambda_n <= gamma (n+1)^-tau K^-((n+1)tau+1) / F", lams[-1],
                              gamma * (n + 1) ** (-tau) * K ** (-(n + 1) * tau - 1) / F))
    ladder.append(LadderCheck("E + 1 <= F", E + 1, F))
    return _finish(CoveringParams(n, m, float(K), lams, F, E, ell, M, tuple(ladder), "dio"), check)


def covering_params_psi(n: int, m: int, K: float, psi: Callable[[float], float], ell: float,
                        M: float, *, check: bool = True) -> CoveringParams:
    """Covering parameters for a merely non-resonant alpha, driven by Psi."""
    _check_params(n, K, ell, M)
    F, E = 10.0 * M / ell, 9.0 * M / ell
    p_top = psi((n + 1) * K ** (n + 1))
    lams = _lambdas(n, K, ell, F, p_top)
    ladder = []
    for d in range(1, n):
        ladder.append(LadderCheck(f"F K lambda_{d} <= lambda_{d + 1}", F * K * lams[d - 1], lams[d]))
        ladder.append(LadderCheck(f"lambda_{d + 1} <= 1/Psi((d+1)K^(d+1))", lams[d],
                                  1.0 / psi((d + 1) * K ** (d + 1))))
    ladder.append(LadderCheck("lambda_n <= 1/(F Psi((n+1)K^(n+1)))", lams[-1], 1.0 / (F * p_top)))
    ladder.append(LadderCheck("E + 1 <= F", E + 1, F))
    return _finish(CoveringParams(n, m, float(K), lams, F, E, ell, M, tuple(ladder), "psi"), check)


# ---------------------------------------------------------------------------
# covering: families + parameters + alpha, with vectorized zone tests


@dataclass(frozen=True)
class BlockAssignment:
    module: SubmoduleBasis
    d: int
    distance_to_resonance: float
    margin: float


@dataclass(eq=False)
class _RankData:
    d: int
    modules: tuple[SubmoduleBasis, ...]
    kmat: np.ndarray  # (M, d, n)
    lalpha: np.ndarray  # (M, d)
    ginv: np.ndarray  # (M, d, d)
    delta: np.ndarray  # (M,)

    def dist2(self, omegas: np.ndarray) -> np.ndarray:
        """Squared distances, shape (N, M)."""
        r = np.einsum("mdn,Nn->Nmd", self.kmat, omegas) + self.lalpha[None]
        return np.einsum("Nmd,mde,Nme->Nm", r, self.ginv, r)


@dataclass(eq=False)
class Covering:
    """The zones Z_Lambda for every admissible maximal K-submodule."""

    alpha: np.ndarray
    params: CoveringParams
    families: tuple[ModuleFamily, ...]
    ranks: list[_RankData] = field(default_factory=list)
    chunk: int = 1024

    @classmethod
    def build(cls, alpha, params: CoveringParams,
              families: Optional[Sequence[ModuleFamily]] = None) -> "Covering":
        a = _alpha(alpha)
        if len(a) != params.m:
            raise ValueError("alpha length does not match params.m")
        fams = tuple(families) if families is not None else admissible_families(params.n, params.m, params.K)
        cov = cls(a, params, fams)
        for d, fam in enumerate(fams, start=1):
            mods = tuple(fam.members)
            if not mods:
                cov.ranks.append(_RankData(d, (), np.zeros((0, d, params.n)), np.zeros((0, d)),
                                           np.zeros((0, d, d)), np.zeros(0)))
                continue
            kmat = np.array([lat.k_parts for lat in mods], dtype=float).reshape(len(mods), d, params.n)
            lmat = np.array([lat.l_parts for lat in mods], dtype=float).reshape(len(mods), d, params.m)
            lalpha = lmat @ a
            ginv = np.linalg.inv(kmat @ kmat.transpose(0, 2, 1))
            covs = np.array([module_covolume(lat) for lat in mods])
            delta = params.lambdas[d - 1] / covs
            cov.ranks.append(_RankData(d, mods, kmat, lalpha, ginv, delta))
        return cov

    @property
    def n(self) -> int:
        return self.params.n

    def modules(self, d: int) -> tuple[SubmoduleBasis, ...]:
        if d == 0:
            return (SubmoduleBasis.zero(self.params.n, self.params.m),)
        if d > len(self.ranks):
            return ()
        return self.ranks[d - 1].modules

    def index_of(self, lat: SubmoduleBasis) -> int:
        return self.ranks[lat.rank - 1].modules.index(lat)

    def zone_slack(self, omegas: np.ndarray, d: int) -> np.ndarray:
        """delta - distance for every rank-d zone, shape (N, M); positive means inside."""
        rd = self.ranks[d - 1]
        return rd.delta[None, :] - np.sqrt(np.maximum(rd.dist2(omegas), 0.0))

    def in_rank_zone(self, omegas: np.ndarray, d: int) -> np.ndarray:
        """Membership in Z_d (open, with the boundary band treated as outside)."""
        omegas = np.atleast_2d(omegas)
        if d > len(self.ranks) or len(self.ranks[d - 1].modules) == 0:
            return np.zeros(len(omegas), dtype=bool)
        out = np.empty(len(omegas), dtype=bool)
        for s in range(0, len(omegas), self.chunk):
            sl = self.zone_slack(omegas[s:s + self.chunk], d)
            out[s:s + self.chunk] = (sl > BOUNDARY_TOL).any(axis=1)
        return out

    def classify_many(self, omegas) -> list[BlockAssignment]:
        omegas = np.atleast_2d(np.asarray(omegas, dtype=float))
        out: list[Optional[BlockAssignment]] = [None] * len(omegas)
        for s in range(0, len(omegas), self.chunk):
            block = omegas[s:s + self.chunk]
            for i, ba in enumerate(self._classify_chunk(block)):
                out[s + i] = ba
        return out  # type: ignore[return-value]

    def _classify_chunk(self, omegas: np.ndarray) -> list[BlockAssignment]:
        N = len(omegas)
        n = self.params.n
        slack = {}
        dist = {}
        for d in range(1, n + 1):
            rd = self.ranks[d - 1]
            if len(rd.modules):
                dist[d] = np.sqrt(np.maximum(rd.dist2(omegas), 0.0))
                slack[d] = rd.delta[None, :] - dist[d]
        result = []
        zero = SubmoduleBasis.zero(n, self.params.m)
        for i in range(N):
            chosen = None
            for d in range(n, 0, -1):
                if d not in slack:
                    continue
                inside = np.flatnonzero(slack[d][i] > BOUNDARY_TOL)
                if inside.size:
                    # smallest distance first; ties go to the earlier canonical module
                    j = int(inside[np.argmin(dist[d][i, inside])])
                    upper = -slack[d + 1][i].max() if (d + 1) in slack else math.inf
                    margin = min(float(slack[d][i, j]), upper)
                    chosen = BlockAssignment(self.ranks[d - 1].modules[j], d, float(dist[d][i, j]), margin)
                    break
            if chosen is None:
                margin = -float(slack[1][i].max()) if 1 in slack else math.inf
                dmin = float(dist[1][i].min()) if 1 in dist else math.inf
                chosen = BlockAssignment(zero, 0, dmin, margin)
            result.append(chosen)
        return result


def classify(omega, covering: Covering) -> BlockAssignment:
    """Block of the decomposition containing omega (total: always returns one)."""
    w = np.asarray(omega.omega if isinstance(omega, FrequencyPoint) else omega, dtype=float)
    if w.shape != (covering.n,):
        raise ValueError(f"omega must have shape ({covering.n},)")
    return covering.classify_many(w[None, :])[0]


def classify_action(I, h_spec, covering: Covering) -> BlockAssignment:
    """Classify the frequency grad h(I) of an action vector."""
    I = np.asarray(I, dtype=float)
    if not h_spec.in_domain(I):
        raise DomainError(f"action {I.tolist()} lies outside the domain box")
    return classify(h_spec.frequency(I), covering)


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class CertificateReport:
    module: SubmoduleBasis
    d: int
    beta: float
    samples: int
    min_margin: float
    min_divisor: float
    violations: tuple[dict, ...]
    empty: bool = False
    lambda1_margin: Optional[float] = None
    beta_stated: Optional[float] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        out = {"module": self.module.to_json(), "d": self.d, "beta": self.beta,
               "samples": self.samples, "min_margin": self.min_margin,
               "violations": list(self.violations)}
        if self.empty:
            out["empty_block"] = True
        if self.lambda1_margin is not None:
            out["lambda1_margin"] = self.lambda1_margin
            out["beta_stated"] = self.beta_stated
        return out


def integer_vectors_upto(dim: int, K: float) -> np.ndarray:
    """Nonzero v with |v|_1 <= K, one per +/- pair."""
    sv = short_vectors(dim, int(math.floor(K)))
    return np.asarray(sv, dtype=np.int64).reshape(-1, dim)


def _not_in_module_mask(vecs: np.ndarray, lat: SubmoduleBasis) -> np.ndarray:
    if lat.is_zero():
        return np.ones(len(vecs), dtype=bool)
    # lat is saturated, so membership is membership of its rational span
    ker = np.asarray(integer_kernel(lat), dtype=object).astype(np.int64)
    if ker.size == 0:
        return np.zeros(len(vecs), dtype=bool)
    return np.any(vecs @ ker.T != 0, axis=1)


def _sample_ball(rng, count, d):
    g = rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.random((count, 1)) ** (1.0 / d)


def sample_block(covering: Covering, lat: SubmoduleBasis, count: int, rng: np.random.Generator,
                 half_width: float = DEFAULT_HALF_WIDTH, center=None, max_rounds: int = 50) -> np.ndarray:
    """Rejection-sample points of B_Lambda.

    The trivial block is sampled in the box ``center + [-w, w]^n``.  For
    rank d >= 1, points are drawn uniformly from the delta-tube around the
    part of R_Lambda within ``half_width`` of its least-norm point, then
    points lying in Z_{d+1} are rejected.
    """
    n = covering.n
    ctr = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    d = lat.rank
    got: list[np.ndarray] = []
    total = 0
    batch = max(256, 2 * count)
    if d > 0:
        space = resonance_space(lat, covering.alpha)
        delta = covering.params.delta(lat)
        if delta <= BOUNDARY_TOL:
            return np.zeros((0, n))
    for _ in range(max_rounds):
        if d == 0:
            pts = ctr + rng.uniform(-half_width, half_width, size=(batch, n))
            keep = ~covering.in_rank_zone(pts, 1)
        else:
            t = rng.uniform(-half_width, half_width, size=(batch, n - d))
            off = _sample_ball(rng, batch, d) * delta
            pts = space.base_point + t @ space.direction_basis + off @ space.normal_basis
            dist = np.linalg.norm((pts - space.base_point) @ space.normal_basis.T, axis=1)
            keep = dist < delta - BOUNDARY_TOL
            if d < n:
                keep &= ~covering.in_rank_zone(pts, d + 1)
        if keep.any():
            got.append(pts[keep])
            total += int(keep.sum())
        if total >= count:
            break
    if not got:
        return np.zeros((0, n))
    return np.vstack(got)[:count]


def certify_block(lat: SubmoduleBasis, covering: Covering, sample_count: int, rng_seed: int, *,
                  task: int = 0, half_width: float = DEFAULT_HALF_WIDTH, center=None,
                  max_violations: int = 10) -> CertificateReport:
    """Check the small-divisor bound beta_Lambda on sampled points of B_Lambda.

    Every (k, l) with |k|+|l| <= K outside Lambda is tested at each sample.
    """
    params = covering.params
    rng = task_rng(rng_seed, task)
    pts = sample_block(covering, lat, sample_count, rng, half_width, center)
    beta = params.beta(lat)
    extra = {}
    if lat.is_zero():
        extra = {"beta_stated": params.beta_zero_stated()}
    if len(pts) == 0:
        return CertificateReport(lat, lat.rank, beta, 0, math.inf, math.inf, (), empty=True, **extra)
    n = params.n
    vecs = integer_vectors_upto(n + params.m, params.K)
    vecs = vecs[_not_in_module_mask(vecs, lat)]
    kv = vecs[:, :n].astype(float)
    lv = vecs[:, n:].astype(float) @ covering.alpha
    vals = np.abs(pts @ kv.T + lv[None, :])
    scale = np.abs(pts) @ np.abs(kv.T) + np.abs(lv)[None, :]
    tol = 1e-12 * np.maximum(scale, 1.0)
    bad = vals < beta - tol
    violations = []
    for i, j in zip(*np.nonzero(bad)):
        violations.append({"omega": pts[i].tolist(), "k": vecs[j, :n].tolist(),
                           "l": vecs[j, n:].tolist(), "divisor": float(vals[i, j])})
        if len(violations) >= max_violations:
            break
    min_div = float(vals.min()) if vals.size else math.inf
    if lat.is_zero():
        extra["lambda1_margin"] = min_div - params.lambdas[0]
    return CertificateReport(lat, lat.rank, beta, len(pts), min_div - beta, min_div,
                             tuple(violations), **extra)


# ---------------------------------------------------------------------------
# Monte Carlo measure of slab unions


@dataclass(frozen=True)
class SlabUnion:
    """Union of open slabs {omega : |k . omega + c| < h}."""

    k: np.ndarray  # (S, n)
    c: np.ndarray  # (S,)
    h: np.ndarray  # (S,)
    full: bool = False  # whole space (a k = 0 slab with |c| < h)

    @property
    def n(self) -> int:
        return self.k.shape[1]

    def restrict(self, lo: np.ndarray, hi: np.ndarray) -> "SlabUnion":
        """Drop slabs that cannot meet the box [lo, hi]."""
        mid = 0.5 * (lo + hi)
        rad = 0.5 * (hi - lo)
        center_val = self.k @ mid + self.c
        reach = np.abs(self.k) @ rad
        keep = np.abs(center_val) < self.h + reach
        return SlabUnion(self.k[keep], self.c[keep], self.h[keep], self.full)

    def contains(self, pts: np.ndarray, chunk: int = 2048) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.full:
            return np.ones(len(pts), dtype=bool)
        out = np.zeros(len(pts), dtype=bool)
        if len(self.h) == 0:
            return out
        for s in range(0, len(pts), chunk):
            v = np.abs(pts[s:s + chunk] @ self.k.T + self.c[None, :])
            out[s:s + chunk] = (v < self.h[None, :]).any(axis=1)
        return out

    def intervals_1d(self) -> np.ndarray:
        """Sorted, merged open intervals (n = 1 only)."""
        if self.n != 1:
            raise ValueError("intervals only exist for n = 1")
        k = self.k[:, 0]
        ok = (k != 0) & (self.h > 0)
        centers = -self.c[ok] / k[ok]
        widths = self.h[ok] / np.abs(k[ok])
        lo, hi = centers - widths, centers + widths
        order = np.argsort(lo)
        lo, hi = lo[order], hi[order]
        merged: list[list[float]] = []
        for a, b in zip(lo, hi):
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return np.asarray(merged, dtype=float).reshape(-1, 2)


def z1_slabs(covering: Covering) -> SlabUnion:
    """Z_1 as slabs: dist(omega, R_Lambda) < lambda_1/||k|| iff |k.omega + l.alpha| < lambda_1."""
    n = covering.n
    lam1 = covering.params.lambdas[0]
    rd = covering.ranks[0]
    if len(rd.modules) == 0:
        return SlabUnion(np.zeros((0, n)), np.zeros(0), np.zeros(0))
    return SlabUnion(rd.kmat[:, 0, :].copy(), rd.lalpha[:, 0].copy(), np.full(len(rd.modules), lam1))


def non_dio_slabs(n: int, alpha, gamma_p: float, tau_p: float, K_max: int) -> SlabUnion:
    """Complement of B_{gamma',tau'} truncated to |(k,l)| <= K_max."""
    a = _alpha(alpha)
    m = len(a)
    ks, cs, hs = [], [], []
    full = False
    for r in range(1, K_max + 1):
        v = l1_shell(n + m, r)
        thr = gamma_p * float(r) ** (-tau_p)
        kpart = v[:, :n].astype(float)
        c = v[:, n:].astype(float) @ a
        zero_k = ~kpart.any(axis=1)
        if np.any(np.abs(c[zero_k]) < thr):
            full = True
        ks.append(kpart[~zero_k])
        cs.append(c[~zero_k])
        hs.append(np.full(int((~zero_k).sum()), thr))
    return SlabUnion(np.vstack(ks), np.concatenate(cs), np.concatenate(hs), full)


@dataclass(frozen=True)
class MeasureEstimate:
    fraction: float
    stderr: float
    samples: int
    hits: int


def zone_measure_mc(selector, box, sample_count: int, rng_seed: int, *, task: int = 0) -> MeasureEstimate:
    """Fraction of a box covered by ``selector`` (a SlabUnion or a point predicate)."""
    if sample_count <= 0:
        raise ValueError("sample_count must be positive")
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    if not np.all(hi > lo):
        raise ValueError("box must have hi > lo in every coordinate")
    rng = task_rng(rng_seed, task)
    pts = rng.uniform(lo, hi, size=(sample_count, len(lo)))
    if isinstance(selector, SlabUnion):
        sel = selector.restrict(lo, hi)
        if sel.n == 1 and not sel.full:
            iv = sel.intervals_1d()
            x = pts[:, 0]
            if len(iv) == 0:
                iv = np.zeros((1, 2))
            j = np.searchsorted(iv[:, 0], x, side="right") - 1
            hit = (j >= 0) & (x > iv[np.maximum(j, 0), 0]) & (x < iv[np.maximum(j, 0), 1])
        else:
            hit = sel.contains(pts)
    else:
        hit = np.asarray(selector(pts), dtype=bool)
    hits = int(hit.sum())
    p = hits / sample_count
    return MeasureEstimate(p, math.sqrt(p * (1 - p) / sample_count), sample_count, hits)


def exact_measure_1d(slabs: SlabUnion, lo: float, hi: float) -> float:
    """Exact relative length of the slab union inside [lo, hi] (n = 1)."""
    if slabs.full:
        return 1.0
    iv = slabs.intervals_1d()
    a = np.clip(iv[:, 0], lo, hi)
    b = np.clip(iv[:, 1], lo, hi)
    return float(np.sum(b - a) / (hi - lo))
