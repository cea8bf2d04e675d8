"""Finite-difference exterior derivative of a fibred 4-form, split by fibration bidegree.

A fibred field lives on a chart R^h × R^v with coordinates (x, y) and an
Ehresmann connection written as the adapted coframe

    dx^a,   θ^b = dy^b + Γ^b_a(x, y) dx^a.

At every point it returns the 4-form in that coframe together with Γ. The
exterior derivative then splits as d = d^{1,0} + d^{0,1} + d^{2,-1}, where
d^{0,1} differentiates along the fibres and d^{2,-1} is wedge with the
curvature of the connection contracted into the vertical slot.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..exterior import DIM, basis, bidegree, interior_coeffs, pullback_matrix, wedge_coeffs

RICHARDSON_RTOL = 1e-3
RICHARDSON_ATOL = 1e-6


class FibredField(Protocol):
    h_dim: int

    def sample(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(70 adapted-frame coefficients of Φ, Γ of shape (8-h, h))."""
        ...


@dataclass(frozen=True)
class ConstantField:
    """A fixed 4-form on the trivial bundle with flat connection."""

    phi: np.ndarray
    h_dim: int = 4

    def sample(self, p):
        return np.asarray(self.phi, dtype=float), np.zeros((DIM - self.h_dim, self.h_dim))


@dataclass(frozen=True)
class CallableField:
    """Wrap ``f(p) -> (phi_coeffs, gamma)`` or ``f(p) -> phi_coeffs`` (flat connection)."""

    f: object
    h_dim: int

    def sample(self, p):
        out = self.f(p)
        if isinstance(out, tuple):
            phi, gam = out
        else:
            phi, gam = out, np.zeros((DIM - self.h_dim, self.h_dim))
        return np.asarray(getattr(phi, "coeffs", phi), dtype=float), np.asarray(gam, dtype=float)


@dataclass(frozen=True)
class TorsionComponents:
    """5-form coefficients in the adapted coframe at one point."""

    d: np.ndarray
    d10: np.ndarray
    d01: np.ndarray
    d21: np.ndarray
    step: float
    richardson_error: float
    step_ok: bool

    def norms(self) -> dict[str, float]:
        return {k: float(np.linalg.norm(getattr(self, k))) for k in ("d", "d10", "d01", "d21")}

    def by_type(self, which: str = "d", h: int = 4) -> dict[tuple[int, int], float]:
        """Coefficient norm of one component grouped by (horizontal, vertical) degree."""
        c = getattr(self, which)
        out: dict[tuple[int, int], float] = {}
        for I, v in zip(basis(5), c):
            t = bidegree(I, h)
            out[t] = out.get(t, 0.0) + v * v
        return {t: float(np.sqrt(s)) for t, s in sorted(out.items())}


def _coframe_matrix(gamma: np.ndarray, h: int) -> np.ndarray:
    """M with (dx, θ)^i = Σ_j M_ij (dx, dy)^j."""
    M = np.eye(DIM)
    M[h:, :h] = gamma
    return M


def _dx_wedge(k: int) -> list[np.ndarray]:
    """Matrices E_m: c -> coefficients of dx^m ∧ (Σ c_I dx^I) from degree k to k+1."""
    out = []
    for m in range(DIM):
        e = np.zeros(DIM)
        e[m] = 1.0
        M = np.zeros((len(basis(k + 1)), len(basis(k))))
        for j in range(len(basis(k))):
            c = np.zeros(len(basis(k)))
            c[j] = 1.0
            M[:, j] = wedge_coeffs(e, 1, c, k)
        out.append(M)
    return out


_WEDGE_DX4 = _dx_wedge(4)
_WEDGE_DX2 = _dx_wedge(2)


def _components(field: FibredField, p: np.ndarray, step: float):
    h = field.h_dim
    v = DIM - h
    phi0, gam0 = field.sample(p)
    Minv = np.linalg.inv(_coframe_matrix(gam0, h))
    to_adapted5 = pullback_matrix(Minv, 5)

    d_coord = np.zeros(len(basis(5)))
    d_alpha = np.zeros((DIM, len(phi0)))       # ∂_m of adapted coefficients
    d_gamma = np.zeros((DIM,) + gam0.shape)
    for m in range(DIM):
        e = np.zeros(DIM)
        e[m] = step
        pp, gp = field.sample(p + e)
        pm, gm = field.sample(p - e)
        cp = pullback_matrix(_coframe_matrix(gp, h), 4) @ pp
        cm = pullback_matrix(_coframe_matrix(gm, h), 4) @ pm
        d_coord += _WEDGE_DX4[m] @ ((cp - cm) / (2 * step))
        d_alpha[m] = (pp - pm) / (2 * step)
        d_gamma[m] = (gp - gm) / (2 * step)
    d_total = to_adapted5 @ d_coord

    # fibre derivative: θ^b ∧ ∂_{y_b} α, and in the adapted frame θ^b has index h+b
    d01 = np.zeros_like(d_total)
    for b in range(v):
        d01 += _WEDGE_DX4[h + b] @ d_alpha[h + b]

    # curvature R^b = Σ_{c,a} (∂_c Γ^b_a − Γ^d_c ∂_{y_d} Γ^b_a) dx^c ∧ dx^a
    dxG = d_gamma[:h]            # [c, b, a]
    dyG = d_gamma[h:]            # [d, b, a]
    R = np.einsum("cba->bca", dxG) - np.einsum("dc,dba->bca", gam0, dyG)
    d21 = np.zeros_like(d_total)
    e_dim = np.eye(DIM)
    for b in range(v):
        Rb = np.zeros(len(basis(2)))
        for (c, a), k in zip(basis(2), range(len(basis(2)))):
            if a < h:
                Rb[k] = R[b, c, a] - R[b, a, c]
        if not np.any(Rb):
            continue
        iota = interior_coeffs(e_dim[h + b], phi0, 4)
        d21 += wedge_coeffs(Rb, 2, iota, 3)
    d10 = d_total - d01 - d21
    return d_total, d10, d01, d21


def finite_diff_torsion(field: FibredField, point, h: float = 1e-3) -> TorsionComponents:
    """Central-difference dΦ at ``point`` with a Richardson step check at h/2."""
    p = np.asarray(point, dtype=float)
    if p.shape != (DIM,):
        raise ValueError("point must be a vector in R^8")
    full = _components(field, p, h)
    half = _components(field, p, h / 2)
    err = max(float(np.linalg.norm(a - b)) for a, b in zip(full, half))
    scale = float(np.linalg.norm(half[0]))
    ok = err <= max(RICHARDSON_RTOL * scale, RICHARDSON_ATOL)
    # Richardson-extrapolated values; the stencil error is O(h²)
    comps = [(4 * b - a) / 3 for a, b in zip(full, half)]
    return TorsionComponents(*comps, step=h, richardson_error=err, step_ok=ok)


def raw_torsion(field: FibredField, point, h: float) -> tuple[np.ndarray, ...]:
    """Single-stencil (d, d10, d01, d21) without extrapolation, for step-convergence studies."""
    return _components(field, np.asarray(point, dtype=float), h)
