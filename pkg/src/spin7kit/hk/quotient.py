"""Moment-fibre solving, quotient charts, decay fits and fibre distances.

All computations happen in the real orthonormal coordinates of a ``RepSpace``.
The quotient M_ζ = μ⁻¹(ζ)/G is represented at a point A by the horizontal
space K_A = ker dμ_A ∩ (gauge orbit)^⊥ with the restricted flat metric.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space, svd

from ..chambers import StabilityParam
from ..exterior import wedge_coeffs
from .rep import QuiverRepPoint, RepSpace

SOLVE_TOL = 1e-10
RANK_TOL = 1e-9
MAX_ITER = 200


class ConvergenceError(RuntimeError):
    """Raised by strict callers when an iteration misses its target."""


class ChartDimensionError(ValueError):
    def __init__(self, msg: str, singular_values: np.ndarray):
        super().__init__(msg)
        self.singular_values = singular_values


@dataclass(frozen=True)
class SolveResult:
    point: QuiverRepPoint
    residual: float
    iterations: int
    converged: bool


def _target(space: RepSpace, zeta) -> np.ndarray:
    if zeta is None:
        return np.zeros((3, space.gauge_dim))
    return space.zeta_coords(zeta)


def _gauge_projector(space: RepSpace, x: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the complement of the gauge orbit at x."""
    X = space.gauge_vectors(x)
    P = np.eye(space.real_dim)
    if X.shape[1]:
        Qo, s, _ = svd(X, full_matrices=False)
        Qo = Qo[:, s > RANK_TOL * max(1.0, s[0])]
        P -= Qo @ Qo.T
    return P


def moment_solve(space: RepSpace, zeta, seed: QuiverRepPoint | np.ndarray, tol: float = SOLVE_TOL,
                 max_iter: int = MAX_ITER, strict: bool = False) -> SolveResult:
    """Levenberg–Marquardt on ‖μ(A) − ζ‖² with steps in the slice orthogonal to the gauge orbit.

    Steps are the minimum-norm solutions −Pᵀ Jᵀ (J P Pᵀ Jᵀ + λ)⁻¹ r, so the
    under-determined system (3G equations, D unknowns) is handled directly.
    """
    target = _target(space, zeta).ravel()
    x = np.array(getattr(seed, "x", seed), dtype=float)
    if x.shape != (space.real_dim,):
        raise ValueError(f"seed must have {space.real_dim} real coordinates")
    lam = 1e-3
    r = space.mu(x).ravel() - target
    res = float(np.linalg.norm(r))
    it = 0
    while res >= tol and it < max_iter:
        it += 1
        J = space.mu_jacobian(x) @ _gauge_projector(space, x)
        JJ = J @ J.T
        scale = max(1.0, float(np.trace(JJ)) / max(1, len(JJ)))
        while True:
            try:
                step = -J.T @ np.linalg.solve(JJ + lam * scale * np.eye(len(JJ)), r)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            x_new = x + step
            r_new = space.mu(x_new).ravel() - target
            res_new = float(np.linalg.norm(r_new))
            if res_new < res:
                x, r, res = x_new, r_new, res_new
                lam = max(lam / 10, 1e-15)
                break
            lam *= 10
            if lam > 1e12:
                break
        if lam > 1e12:
            break
    ok = res < tol
    if strict and not ok:
        raise ConvergenceError(f"moment solve stalled at residual {res:.3e} after {it} iterations")
    return SolveResult(QuiverRepPoint(space, x), res, it, ok)


@dataclass(frozen=True)
class QuotientChart:
    """Orthonormal basis (columns) of K_A at a solved point."""

    space: RepSpace
    point: QuiverRepPoint
    basis: np.ndarray
    singular_values: np.ndarray
    expected_dim: int

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def regular(self) -> bool:
        return self.dim == self.expected_dim


def tangent_chart(space: RepSpace, A: QuiverRepPoint, strict: bool = False,
                  rank_tol: float = RANK_TOL) -> QuotientChart:
    """K_A = ker dμ_A ∩ (gauge orbit)^⊥; a dimension jump signals a wall."""
    x = A.x
    M = np.vstack([space.mu_jacobian(x), space.gauge_vectors(x).T])
    s = np.linalg.svd(M, compute_uv=False) if M.size else np.zeros(0)
    tol = rank_tol * max(1.0, float(s[0]) if len(s) else 1.0)
    K = null_space(M, rcond=tol / max(1.0, float(s[0]))) if len(M) else np.eye(space.real_dim)
    expected = space.real_dim - 4 * space.gauge_dim
    chart = QuotientChart(space, A, K, s, expected)
    if strict and not chart.regular:
        raise ChartDimensionError(
            f"chart dimension {chart.dim} != {expected}; smallest singular values {np.sort(s)[:4]}", s)
    return chart


def quotient_metric(chart: QuotientChart) -> np.ndarray:
    B = chart.basis
    G = B.T @ B
    if np.linalg.cond(G) > 1e8:
        raise ValueError("ill-conditioned chart")
    return G


def kahler_triple(chart: QuotientChart) -> np.ndarray:
    """The ambient ω_1, ω_2, ω_3 restricted to K_A, as (3, d, d) antisymmetric matrices."""
    B = chart.basis
    return np.einsum("ia,kij,jb->kab", B, chart.space.kahler_forms, B)


def triple_pairing(omegas: np.ndarray) -> np.ndarray:
    """Matrix of ω_i ∧ ω_j in units of the chart volume form (4-dimensional charts)."""
    d = omegas.shape[1]
    if d != 4:
        raise ValueError("pairing is defined on 4-dimensional charts")
    iu = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    c = np.array([[w[a, b] for a, b in iu] for w in omegas])
    return np.array([[wedge_coeffs(ci, 2, cj, 2, 4)[0] for cj in c] for ci in c])


# -- nearest points and the ALE decay ---------------------------------------------------


def nearest_point(space: RepSpace, zeta, a0: np.ndarray, guess: np.ndarray | None = None,
                  tol: float = 1e-12, max_iter: int = 100):
    """Closest point p of μ⁻¹(ζ) to a0, with multipliers, by Newton on the Lagrange system.

    Returns (p, λ, kkt_matrix). Since ∇μ rows are orthogonal to the gauge
    orbit on a central level, p is also critical for the orbit distance.
    """
    a0 = np.asarray(a0, dtype=float)
    target = _target(space, zeta).ravel()
    Q = space.Q.reshape(-1, space.real_dim, space.real_dim)
    D, m = space.real_dim, len(Q)
    p = a0.copy() if guess is None else np.array(guess, dtype=float)
    lam = np.zeros(m)

    def system(p, lam):
        Jm = np.einsum("kij,j->ki", Q, p)
        F = np.concatenate([p - a0 + Jm.T @ lam, space.mu(p).ravel() - target])
        K = np.block([[np.eye(D) + np.einsum("k,kij->ij", lam, Q), Jm.T], [Jm, np.zeros((m, m))]])
        return F, K

    for _ in range(max_iter):
        F, K = system(p, lam)
        if np.linalg.norm(F) < tol * max(1.0, np.linalg.norm(a0)):
            break
        sol = np.linalg.lstsq(K, -F, rcond=None)[0]
        p, lam = p + sol[:D], lam + sol[D:]
    F, K = system(p, lam)
    if np.linalg.norm(F) > 1e-8 * max(1.0, np.linalg.norm(a0)):
        raise ConvergenceError(f"nearest-point Newton residual {np.linalg.norm(F):.3e}")
    return p, lam, K


def _horizontal_basis(space: RepSpace, x: np.ndarray) -> np.ndarray:
    M = np.vstack([space.mu_jacobian(x), space.gauge_vectors(x).T])
    return null_space(M, rcond=RANK_TOL)


def pullback_deviation(space: RepSpace, zeta, a0: np.ndarray) -> float:
    """‖F*g_ζ − g_0‖ at a cone point a0 ∈ μ⁻¹(0), F the nearest-point map onto μ⁻¹(ζ)."""
    p, _, K = nearest_point(space, zeta, a0)
    D = space.real_dim
    U0 = _horizontal_basis(space, a0)
    rhs = np.vstack([U0, np.zeros((len(K) - D, U0.shape[1]))])
    dp = np.linalg.lstsq(K, rhs, rcond=None)[0][:D]
    dp = _gauge_projector(space, p) @ dp
    G = dp.T @ dp
    return float(np.linalg.norm(G - np.eye(len(G))))


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    intercept: float
    radii: np.ndarray
    deviations: np.ndarray
    exact: bool = False
    residual: float = 0.0
    notes: list = field(default_factory=list)


def _free_directions(space: RepSpace, n: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        q = rng.normal(size=2) + 1j * rng.normal(size=2)
        out.append(q / np.linalg.norm(q))
    return out


def ale_decay_fit(space: RepSpace, zeta, radii, directions: int = 3, seed: int = 0) -> DecayFit:
    """Least-squares slope of log‖g_ζ − g_0‖ against log r over flat-orbit base points."""
    radii = np.asarray(sorted(radii), dtype=float)
    if len(radii) < 2 or radii[-1] / radii[0] < 10 - 1e-9:
        raise ValueError("radii must span at least one decade")
    zc = _target(space, zeta)
    if not np.any(zc):
        return DecayFit(float("-inf"), float("-inf"), radii, np.zeros(len(radii)), exact=True,
                        notes=["zero parameter: the quotient is the flat cone"])
    zmag = float(np.linalg.norm(zc))
    if radii[0] ** 2 < 10 * zmag:
        raise ValueError("radii must be large compared with |ζ|^(1/2)")
    qs = _free_directions(space, directions, seed)
    devs = np.array([max(pullback_deviation(space, zeta, space.flat_orbit_point(q, r).x) for q in qs)
                     for r in radii])
    A = np.column_stack([np.log(radii), np.ones(len(radii))])
    coef, res, *_ = np.linalg.lstsq(A, np.log(devs), rcond=None)
    resid = float(np.sqrt(res[0] / len(radii))) if len(res) else 0.0
    return DecayFit(float(coef[0]), float(coef[1]), radii, devs, residual=resid)


# -- fibre distances ------------------------------------------------------------------


def sample_fiber(space: RepSpace, zeta, radii, per_radius: int = 4, seed: int = 0) -> list[QuiverRepPoint]:
    """Points of μ⁻¹(ζ) obtained by solving from flat-orbit seeds."""
    out = []
    for r in radii:
        for q in _free_directions(space, per_radius, seed + int(1000 * r)):
            res = moment_solve(space, zeta, space.flat_orbit_point(q, r))
            if res.converged:
                out.append(res.point)
    return out


def fiber_distance(space: RepSpace, zeta, zeta_prime, radii=(0.3, 0.6, 1.0, 1.5, 2.5),
                   per_radius: int = 4, seed: int = 0) -> float:
    """Sampled Hausdorff distance between μ⁻¹(ζ)/G and μ⁻¹(ζ′)/G in the flat orbit metric.

    Each sample is moved to its nearest point on the other fibre; the result is
    the largest such displacement over both directions. Radii are in units of
    |ζ|^(1/2) of the larger parameter so that the core is always sampled.
    """
    z1, z2 = _target(space, zeta), _target(space, zeta_prime)
    if np.allclose(z1, z2, atol=1e-15):
        return 0.0
    unit = max(np.linalg.norm(z1), np.linalg.norm(z2)) ** 0.5
    rs = [r * unit for r in radii]
    best = 0.0
    for a, b in ((zeta, zeta_prime), (zeta_prime, zeta)):
        for A in sample_fiber(space, a, rs, per_radius, seed):
            p, _, _ = nearest_point(space, b, A.x)
            best = max(best, float(np.linalg.norm(p - A.x)))
    return best


def distance_linearity(space: RepSpace, zeta, direction, steps, **kw) -> tuple[float, np.ndarray]:
    """Log-log slope of d(ζ, ζ + tη) against t, with the measured distances."""
    z0 = zeta
    d = []
    for t in steps:
        zt = z0 + direction * float(t) if isinstance(z0, StabilityParam) else np.asarray(z0) + t * np.asarray(direction)
        d.append(fiber_distance(space, z0, zt, **kw))
    d = np.array(d)
    slope = float(np.polyfit(np.log(steps), np.log(d), 1)[0])
    return slope, d
