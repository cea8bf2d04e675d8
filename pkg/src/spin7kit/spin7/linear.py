"""Pointwise Spin(7) linear algebra on forms over R^8.

Cayley forms are the GL(8)-orbit of Φ₀. Everything here is computed from the
form itself: the stabilizer is the kernel of X -> L_X Φ, the metric is the
unique stabilizer-invariant inner product normalised by |Φ|² = 14, and the
isotypic projectors are spectral projectors of a Casimir operator.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.linalg import expm

from ..exterior import (
    DIM, AltForm, FourForm, action_jacobian, basis, derivation_matrix, euclidean_star,
    gram_matrix, interior_coeffs, pullback_coeffs, pullback_matrix, wedge_coeffs,
)
from ..octonion import cayley0

RANK_TOL = 1e-8          # relative singular-value threshold for ranks
NEWTON_TOL = 1e-11       # target residual of the projection onto the Cayley orbit
THETA_TOL = 1e-13        # internal tangential residual target (keeps Q accurate at t ~ 1e-4)
THETA_MAX_ITER = 200
TUBE_RADIUS = 1.25        # |η| (in the g_Φ norm) below which theta_project is guaranteed to converge
CAYLEY_NORM2 = 14.0      # |Φ₀|² in the standard metric
SPIN7_DIM = 21


class NotCayleyError(ValueError):
    """Raised when a 4-form is not in the GL(8)-orbit of Φ₀."""


class ThetaProjectionError(RuntimeError):
    def __init__(self, msg: str, residual: float):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class Metric8:
    matrix: np.ndarray

    def __post_init__(self):
        g = np.array(self.matrix, dtype=float)
        if g.shape != (DIM, DIM):
            raise ValueError("metric must be 8x8")
        if np.max(np.abs(g - g.T)) > 1e-12 * max(1.0, np.max(np.abs(g))):
            raise ValueError("metric not symmetric")
        g = 0.5 * (g + g.T)
        if np.min(np.linalg.eigvalsh(g)) <= 0:
            raise ValueError("metric not positive definite")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    @classmethod
    def euclidean(cls) -> "Metric8":
        return cls(np.eye(DIM))

    def inverse_sqrt(self) -> np.ndarray:
        """Symmetric P with P^T g P = I and det P > 0."""
        w, V = np.linalg.eigh(self.matrix)
        return (V / np.sqrt(w)) @ V.T

    def form_gram(self, k: int) -> np.ndarray:
        return gram_matrix(self.matrix, k)


@dataclass(frozen=True, eq=False)
class Projector:
    matrix: np.ndarray
    grade: int
    label: str

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix)))

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(coeffs, dtype=float)


# --- Hodge star and Clifford multiplication --------------------------------

def hodge_star(f: AltForm, g: Metric8 | None = None) -> AltForm:
    """Hodge star for metric g and the standard orientation e^0 ∧ ... ∧ e^7."""
    k = f.degree
    S = euclidean_star(k)
    if g is None:
        c = S @ f.coeffs
    else:
        P = g.inverse_sqrt()
        Pinv = np.linalg.inv(P)
        c = pullback_matrix(Pinv, DIM - k) @ (S @ (pullback_matrix(P, k) @ f.coeffs))
    if DIM - k == 4:
        return FourForm(4, c, frame=f.frame)
    return AltForm(DIM - k, c, frame=f.frame)


class MixedForm:
    """Inhomogeneous form stored over the 256 subsets of {0..7} (bitmask basis)."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        c = np.zeros(1 << DIM) if coeffs is None else np.array(coeffs, dtype=float)
        if c.shape != (1 << DIM,):
            raise ValueError("mixed form needs 256 coefficients")
        c.setflags(write=False)
        self.c = c

    @classmethod
    def from_forms(cls, *forms: AltForm) -> "MixedForm":
        c = np.zeros(1 << DIM)
        seen = set()
        for f in forms:
            if f.degree in seen:
                raise ValueError("repeated degree in mixed form")
            seen.add(f.degree)
            for I, v in zip(basis(f.degree), f.coeffs):
                c[_mask(I)] += v
        return cls(c)

    @classmethod
    def scalar(cls, s: float) -> "MixedForm":
        c = np.zeros(1 << DIM)
        c[0] = s
        return cls(c)

    def component(self, k: int) -> AltForm:
        c = np.array([self.c[_mask(I)] for I in basis(k)])
        return FourForm(4, c) if k == 4 else AltForm(k, c)

    def degrees(self) -> list[int]:
        return sorted({bin(m).count("1") for m in np.flatnonzero(self.c)})

    def __add__(self, o):
        return MixedForm(self.c + o.c)

    def __sub__(self, o):
        return MixedForm(self.c - o.c)

    def __mul__(self, s):
        return MixedForm(self.c * float(s))

    __rmul__ = __mul__

    def allclose(self, o, atol=1e-12) -> bool:
        return bool(np.max(np.abs(self.c - o.c)) <= atol)


def _mask(I) -> int:
    m = 0
    for i in I:
        m |= 1 << i
    return m


@lru_cache(maxsize=1)
def _clifford_tables():
    """For each i: wedge e^i (target, sign) and contraction with e_i (target, sign)."""
    n = 1 << DIM
    wt = np.zeros((DIM, n), dtype=np.int64)
    ws = np.zeros((DIM, n))
    it = np.zeros((DIM, n), dtype=np.int64)
    is_ = np.zeros((DIM, n))
    for i in range(DIM):
        below = (1 << i) - 1
        for m in range(n):
            s = -1.0 if bin(m & below).count("1") % 2 else 1.0
            if m & (1 << i):
                it[i, m], is_[i, m] = m ^ (1 << i), s
            else:
                wt[i, m], ws[i, m] = m | (1 << i), s
    return wt, ws, it, is_


def clifford_act(xi, omega: MixedForm, g: Metric8 | None = None) -> MixedForm:
    """ξ·ω = ξ ∧ ω − ι_{ξ♯} ω, so that ξ·ξ·ω = −|ξ|² ω."""
    xi = np.asarray(xi, dtype=float)
    sharp = xi if g is None else np.linalg.solve(g.matrix, xi)
    wt, ws, it, is_ = _clifford_tables()
    out = np.zeros(1 << DIM)
    for i in range(DIM):
        if xi[i]:
            np.add.at(out, wt[i], xi[i] * ws[i] * omega.c)
        if sharp[i]:
            np.add.at(out, it[i], -sharp[i] * is_[i] * omega.c)
    # wedge onto a set containing i is zero; those entries carry sign 0
    return MixedForm(out)


# --- stabilizer, metric, orbit frame ----------------------------------------

def _null_basis(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    if M.size == 0:
        return np.eye(M.shape[1])
    _, s, Vt = np.linalg.svd(M)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * scale))
    return Vt[rank:].T


def stabilizer_algebra(phi: AltForm) -> list[np.ndarray]:
    """Basis (Frobenius-orthonormal) of {X in gl(8) : L_X φ = 0}."""
    J = action_jacobian(phi.coeffs, phi.degree)
    N = _null_basis(J)
    return [N[:, i].reshape(DIM, DIM) for i in range(N.shape[1])]


def orbit_dimension(phi: AltForm) -> int:
    return DIM * DIM - len(stabilizer_algebra(phi))


@lru_cache(maxsize=1)
def _sym_basis():
    out = []
    for i in range(DIM):
        for j in range(i, DIM):
            E = np.zeros((DIM, DIM))
            E[i, j] = E[j, i] = 1.0
            out.append(E)
    return np.array(out)


def _invariant_metric(stab: list[np.ndarray]) -> np.ndarray:
    S = _sym_basis()
    rows = []
    for X in stab:
        rows.append(np.einsum("ji,sjk->sik", X, S) + np.einsum("sij,jk->sik", S, X))
    M = np.concatenate([r.reshape(len(S), -1).T for r in rows], axis=0)
    N = _null_basis(M, 1e-9)
    if N.shape[1] != 1:
        raise NotCayleyError(f"invariant symmetric forms have dimension {N.shape[1]}, expected 1")
    g = np.einsum("s,sij->ij", N[:, 0], S)
    if np.trace(g) < 0:
        g = -g
    if np.min(np.linalg.eigvalsh(g)) <= 0:
        raise NotCayleyError("stabilizer-invariant form is indefinite")
    return g


@dataclass(frozen=True)
class CayleyCheck:
    is_cayley: bool
    component: int            # +1 for the self-dual (positive) component, -1 opposite, 0 if not Cayley
    stabilizer_dim: int
    duality_residual: float
    message: str = ""


def cayley_check(phi: AltForm, tol: float = 1e-8) -> CayleyCheck:
    """Classify a 4-form: positive Cayley, opposite-orientation Cayley, or neither."""
    if phi.degree != 4:
        return CayleyCheck(False, 0, -1, np.inf, "not a 4-form")
    stab = stabilizer_algebra(phi)
    if len(stab) != SPIN7_DIM:
        return CayleyCheck(False, 0, len(stab), np.inf, f"stabilizer dimension {len(stab)}")
    try:
        g = Metric8(_scaled_metric(phi, stab))
    except (NotCayleyError, ValueError) as exc:
        return CayleyCheck(False, 0, len(stab), np.inf, str(exc))
    star = hodge_star(phi, g).coeffs
    scale = max(1.0, np.max(np.abs(phi.coeffs)))
    r_plus = np.max(np.abs(star - phi.coeffs)) / scale
    r_minus = np.max(np.abs(star + phi.coeffs)) / scale
    if r_plus <= tol:
        return CayleyCheck(True, +1, len(stab), r_plus)
    if r_minus <= tol:
        return CayleyCheck(True, -1, len(stab), r_minus, "opposite orientation")
    return CayleyCheck(False, 0, len(stab), min(r_plus, r_minus), "not (anti-)self-dual for its metric")


def _scaled_metric(phi: AltForm, stab=None) -> np.ndarray:
    stab = stabilizer_algebra(phi) if stab is None else stab
    if len(stab) != SPIN7_DIM:
        raise NotCayleyError(f"stabilizer dimension {len(stab)}, expected {SPIN7_DIM}")
    g = _invariant_metric(stab)
    n2 = phi.coeffs @ gram_matrix(g, 4) @ phi.coeffs
    # |φ|²_{cg} = c^{-4} |φ|²_g
    return g * (n2 / CAYLEY_NORM2) ** 0.25


def metric_from_cayley(phi: AltForm) -> Metric8:
    """The metric g_Φ; pullback-equivariant: g_{A*Φ} = Aᵀ g_Φ A."""
    return Metric8(_scaled_metric(phi))


def _triple_product(phi_T: np.ndarray, ginv: np.ndarray, u, v, w) -> np.ndarray:
    return ginv @ np.einsum("ijkl,i,j,k->l", phi_T, u, v, w)


def orbit_factor(phi: AltForm, tol: float = 1e-8) -> np.ndarray:
    """A with A*Φ₀ = φ, built from a Cayley frame of φ.

    A frame (f0..f7) with φ(f_I) = Φ₀(e_I) is determined by an orthonormal
    triple f0, f1, f2 and a unit f4 orthogonal to f0..f3; the remaining
    vectors are triple products. det A < 0 signals the opposite component.
    """
    g = metric_from_cayley(phi).matrix
    ginv = np.linalg.inv(g)
    T = phi.tensor()

    def unit(x):
        return x / np.sqrt(x @ g @ x)

    def gs(x, fs):
        for f in fs:
            x = x - (f @ g @ x) * f
        return x

    E = np.eye(DIM)
    f = [None] * DIM
    f[0] = unit(E[0])
    f[1] = unit(gs(E[1], [f[0]]))
    f[2] = unit(gs(E[2], [f[0], f[1]]))
    f[3] = _triple_product(T, ginv, f[0], f[1], f[2])
    cands = [gs(E[i], f[:4]) for i in range(DIM)]
    f[4] = unit(max(cands, key=lambda x: x @ g @ x))
    f[5] = _triple_product(T, ginv, f[0], f[1], f[4])
    f[6] = _triple_product(T, ginv, f[0], f[2], f[4])
    f[7] = _triple_product(T, ginv, f[0], f[3], f[4])
    F = np.column_stack(f)
    A = np.linalg.inv(F)
    resid = np.max(np.abs(pullback_coeffs(A, cayley0().coeffs, 4) - phi.coeffs))
    if resid > tol * max(1.0, np.max(np.abs(phi.coeffs))):
        raise NotCayleyError(f"Cayley frame construction failed, residual {resid:.2e}")
    return A


# --- isotypic projectors ----------------------------------------------------

def _cluster(w: np.ndarray, rel_gap: float = 1e-6) -> list[np.ndarray]:
    order = np.argsort(w)
    groups, cur = [], [order[0]]
    span = max(1.0, np.max(np.abs(w)))
    for a, b in zip(order[:-1], order[1:]):
        if w[b] - w[a] > rel_gap * span:
            groups.append(np.array(cur))
            cur = [b]
        else:
            cur.append(b)
    groups.append(np.array(cur))
    return groups


def _casimir_projectors_orthonormal(phi_o: AltForm, k: int) -> list[np.ndarray]:
    stab = stabilizer_algebra(phi_o)
    C = np.zeros((comb(DIM, k), comb(DIM, k)))
    for X in stab:
        # stabilizer is in so(8) here; enforce exact antisymmetry before use
        X = 0.5 * (X - X.T)
        L = derivation_matrix(X, k)
        C += L @ L.T
    C = 0.5 * (C + C.T)
    w, V = np.linalg.eigh(C)
    out = []
    for grp in _cluster(w):
        Vg = V[:, grp]
        out.append(Vg @ Vg.T)
    return out


def isotypic_projectors(phi: AltForm, k: int) -> list[Projector]:
    """Spin(7)_φ-isotypic projectors on degree-k coefficients, labelled by rank.

    Self-adjoint for the g_φ inner product on forms. For k = 4 the composite
    projectors "tau" (span of φ, rank-7 and rank-35 parts) and "nu" (the rest)
    are appended.
    """
    g = metric_from_cayley(phi)
    P = g.inverse_sqrt()
    phi_o = FourForm(4, pullback_matrix(P, 4) @ phi.coeffs)
    M = pullback_matrix(P, k)
    Minv = pullback_matrix(np.linalg.inv(P), k)
    projs = []
    for E in _casimir_projectors_orthonormal(phi_o, k):
        Pi = Minv @ E @ M
        projs.append(Projector(_ro(Pi), k, str(int(round(np.trace(E))))))
    projs.sort(key=lambda p: (p.rank, p.label))
    if k == 4:
        span_phi = [p for p in projs if p.rank in (1, 7, 35)]
        rest = [p for p in projs if p.rank not in (1, 7, 35)]
        if len(span_phi) == 3 and len(rest) == 1:
            tau = sum(p.matrix for p in span_phi)
            projs.append(Projector(_ro(tau), 4, "tau"))
            projs.append(Projector(_ro(rest[0].matrix.copy()), 4, "nu"))
    return projs


def _ro(M: np.ndarray) -> np.ndarray:
    M = np.array(M, dtype=float)
    M.setflags(write=False)
    return M


def projector(phi: AltForm, k: int, label: str) -> Projector:
    for p in isotypic_projectors(phi, k):
        if p.label == label:
            return p
    raise KeyError(f"no projector labelled {label!r} in degree {k}")


def pi_tau(phi: AltForm, eta: AltForm) -> FourForm:
    """Projection of η onto the tangent space of the Cayley orbit at φ."""
    return FourForm(4, projector(phi, 4, "tau")(eta.coeffs), frame=eta.frame)


@dataclass(frozen=True)
class DecompositionReport:
    ranks_2: tuple[int, ...]
    ranks_4: tuple[int, ...]
    stabilizer_dim: int
    orbit_dim: int
    orbit_codim: int
    stated_codim: int = 28

    @property
    def codim_discrepancy(self) -> int:
        return self.stated_codim - self.orbit_codim


def decomposition_report(phi: AltForm | None = None) -> DecompositionReport:
    """Measured ranks and orbit dimension, alongside the commonly quoted codimension 28."""
    phi = cayley0() if phi is None else phi
    r2 = tuple(p.rank for p in isotypic_projectors(phi, 2))
    r4 = tuple(p.rank for p in isotypic_projectors(phi, 4) if p.label not in ("tau", "nu"))
    sd = len(stabilizer_algebra(phi))
    od = DIM * DIM - sd
    return DecompositionReport(r2, r4, sd, od, comb(DIM, 4) - od)


# --- projection onto the orbit -----------------------------------------------

@dataclass
class _OrbitFrame:
    """Projectors and a pseudo-inverse of the orbit map at a fixed base φ."""

    phi: np.ndarray
    tau: np.ndarray
    J_pinv: np.ndarray
    gram: np.ndarray

    @classmethod
    def at(cls, phi: AltForm) -> "_OrbitFrame":
        tau = projector(phi, 4, "tau").matrix
        J = action_jacobian(phi.coeffs, 4)
        g = metric_from_cayley(phi)
        return cls(np.array(phi.coeffs), tau, np.linalg.pinv(J, rcond=1e-10), g.form_gram(4))

    def norm(self, c: np.ndarray) -> float:
        return float(np.sqrt(max(c @ self.gram @ c, 0.0)))


def _theta(frame: _OrbitFrame, psi: np.ndarray, tol: float, max_iter: int):
    """Find B with ψ − B*φ normal to the orbit at B*φ. Returns (B*φ, residual, iterations)."""
    B = np.eye(DIM)
    cur = frame.phi.copy()
    res = np.inf
    for it in range(1, max_iter + 1):
        r = psi - cur
        # tangential residual at cur = B*φ, computed via equivariance from the base
        r_base = pullback_coeffs(np.linalg.inv(B), r, 4)
        t_base = frame.tau @ r_base
        res = frame.norm(t_base)
        if res <= tol:
            return cur, res, it
        if not np.isfinite(res) or res > 1e6:
            break
        # L_X(B*φ) = B*(L_{B X B^{-1}} φ)
        Y = (frame.J_pinv @ t_base).reshape(DIM, DIM)
        X = np.linalg.solve(B, Y @ B)
        if np.linalg.norm(X) > 4.0:
            break
        B = B @ expm(X)
        cur = pullback_coeffs(B, frame.phi, 4)
    raise ThetaProjectionError("projection onto the Cayley orbit did not converge", res)


def theta_project(phi: AltForm, eta: AltForm, tol: float = THETA_TOL,
                  max_iter: int = THETA_MAX_ITER, check_tube: bool = True) -> FourForm:
    """Θ(φ + η): the Cayley form Φ' near φ with φ + η − Φ' normal to the orbit at Φ'.

    Normality is measured with the g_{Φ'} inner product, so Θ commutes with
    the GL₊(8) action. Inputs with |η|_{g_φ} beyond the calibrated tube
    radius are rejected when ``check_tube`` is set.
    """
    frame = _OrbitFrame.at(phi)
    if check_tube and frame.norm(np.asarray(eta.coeffs)) > TUBE_RADIUS:
        raise ThetaProjectionError("η lies outside the calibrated tube", frame.norm(eta.coeffs))
    out, _, _ = _theta(frame, phi.coeffs + eta.coeffs, tol, max_iter)
    return FourForm(4, out, frame=phi.frame)


class OrbitProjector:
    """Reusable Θ at a fixed base point; amortises the projector setup."""

    def __init__(self, phi: AltForm, tol: float = THETA_TOL, max_iter: int = THETA_MAX_ITER):
        self.phi = phi
        self.frame = _OrbitFrame.at(phi)
        self.tol = tol
        self.max_iter = max_iter
        self.last_iterations = 0

    def project(self, eta: np.ndarray) -> np.ndarray:
        out, _, it = _theta(self.frame, self.frame.phi + np.asarray(eta), self.tol, self.max_iter)
        self.last_iterations = it
        return out

    def remainder(self, eta: np.ndarray) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        return self.project(eta) - self.frame.phi - self.frame.tau @ eta

    def norm(self, c: np.ndarray) -> float:
        return self.frame.norm(np.asarray(c))


def q_remainder(phi: AltForm, eta: AltForm) -> FourForm:
    """Q_φ(η) = Θ(φ + η) − φ − π_τ(η); quadratic in η."""
    op = OrbitProjector(phi)
    return FourForm(4, op.remainder(eta.coeffs), frame=phi.frame)


# --- small helpers used by the constructors -----------------------------------

def wedge_forms(a: AltForm, b: AltForm) -> AltForm:
    c = wedge_coeffs(a.coeffs, a.degree, b.coeffs, b.degree, a.n)
    if a.degree + b.degree == 4 and a.n == DIM:
        return FourForm(4, c)
    return AltForm(a.degree + b.degree, c, n=a.n)


def contract(v, a: AltForm) -> AltForm:
    return AltForm(a.degree - 1, interior_coeffs(np.asarray(v, float), a.coeffs, a.degree, a.n), n=a.n)
