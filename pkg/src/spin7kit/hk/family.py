"""A fibred Cayley form built from a family of hyperkähler quotients over R^4.

Over a base point x ∈ R^4 the fibre is the quotient at the level ζ(x), with ζ
affine in x. Near a solved point A0 the fibre is charted by

    A(x, u) = A0 + U u + N s(x, u),     μ(A(x, u)) = ζ(x),

with U an orthonormal basis of K_{A0} and N one of the row space of dμ_{A0};
s is found by Newton. The connection is the one whose horizontal lifts are
orthogonal to the fibre tangent spaces K_A, and the 4-form is

    Φ = vol_H − Σ ω_H^i ∧ ω_V^i + ⅙ Σ ω_V^i ∧ ω_V^i.

A parameter is harmonic when Σ_i dζ_i ∧ ω_H^i = 0.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import null_space, orth

from ..exterior import AltForm, basis, wedge_coeffs
from ..spin7.assemble import FibredFrameData, assemble_codim4, standard_triple
from ..spin7.linear import cayley_check
from .quotient import _target, moment_solve, tangent_chart
from .rep import RepSpace

NEWTON_TOL = 1e-14


def harmonic_gradients(self_dual: bool = True, which: int = 0) -> np.ndarray:
    """Basis element ``which`` of the linear ζ with Σ_i dζ_i ∧ ω_H^i = 0, as (4, 3) slopes.

    The slope matrix c[a, i] = ∂ζ_i/∂x_a multiplies a fixed reduced direction
    in the gauge centre (see ``KronheimerFamily``).
    """
    return harmonic_slope_space(self_dual)[which].reshape(4, 3)


def harmonic_slope_space(self_dual: bool = True) -> np.ndarray:
    """Orthonormal basis (rows) of the 8-dimensional space of harmonic linear slopes."""
    tri = standard_triple(self_dual)
    cols = []
    for a in range(4):
        for i in range(3):
            e = np.zeros(4)
            e[a] = 1.0
            cols.append(wedge_coeffs(e, 1, tri[i].coeffs, 2, 4))
    return null_space(np.array(cols).T).T


class KronheimerFamily:
    """FibredField over R^4 with fibres M_{ζ(x)}, ζ(x) = ζ0 + Σ_a x_a Σ_i c[a, i] e_i ⊗ Z.

    ``zeta0`` is a stability parameter with three components, ``direction`` a
    single-component parameter Z fixing the gauge-centre direction, and
    ``slopes`` the (4, 3) matrix c. Non-affine dependence is out of scope.
    """

    h_dim = 4

    def __init__(self, space: RepSpace, zeta0, direction, slopes, seed=None, self_dual: bool = True):
        self.space = space
        self.z0 = _target(space, zeta0)                      # (3, G)
        zdir = _target(space, direction)[0]                  # (G,)
        self.slopes = np.asarray(slopes, dtype=float)
        # dζ/dx_a in moment coordinates, shape (4, 3G)
        self.dzeta = np.einsum("ai,g->aig", self.slopes, zdir).reshape(4, -1)
        if seed is None:
            seed = space.flat_orbit_point(np.array([0.6, 0.8j]), 1.0)
        res = moment_solve(space, zeta0, seed, strict=True)
        self.A0 = res.point.x
        chart = tangent_chart(space, res.point, strict=True)
        self.U = chart.basis
        self.N = orth(space.mu_jacobian(self.A0).T)
        self.horizontal = standard_triple(self_dual)
        self.self_dual = self_dual
        # orient the fibre chart so the assembled form is a positive Cayley form
        if cayley_check(self.form(np.zeros(8))[0]).component < 0:
            self.U = self.U * np.array([-1.0] + [1.0] * (self.U.shape[1] - 1))

    def zeta_at(self, x) -> np.ndarray:
        return self.z0.ravel() + np.asarray(x) @ self.dzeta

    def solve(self, x, u) -> np.ndarray:
        S = self.space
        target = self.zeta_at(x)
        base = self.A0 + self.U @ u
        s = np.zeros(self.N.shape[1])
        for _ in range(50):
            A = base + self.N @ s
            r = S.mu(A).ravel() - target
            if np.linalg.norm(r) < NEWTON_TOL * max(1.0, np.linalg.norm(target)):
                break
            s -= np.linalg.solve(S.mu_jacobian(A) @ self.N, r)
        return base + self.N @ s

    def frame(self, p):
        """(A, P_u, P_x, Γ) at p = (x, u)."""
        p = np.asarray(p, dtype=float)
        x, u = p[:4], p[4:]
        S = self.space
        A = self.solve(x, u)
        JN = S.mu_jacobian(A) @ self.N
        Pu = self.U - self.N @ np.linalg.solve(JN, S.mu_jacobian(A) @ self.U)
        Px = self.N @ np.linalg.solve(JN, self.dzeta.T)
        K = tangent_chart(S, S.point(x=A)).basis
        gamma = np.linalg.solve(K.T @ Pu, K.T @ Px)
        return A, Pu, Px, gamma

    def vertical_triple(self, Pu) -> tuple[AltForm, ...]:
        out = []
        for W in self.space.kahler_forms:
            M = Pu.T @ W @ Pu
            out.append(AltForm(2, np.array([M[a, b] for a, b in basis(2, 4)]), n=4))
        return tuple(out)

    def form(self, p):
        _, Pu, _, gamma = self.frame(p)
        data = FibredFrameData(4, self.horizontal, self.vertical_triple(Pu))
        return assemble_codim4(data), gamma

    def sample(self, p):
        phi, gamma = self.form(p)
        return phi.coeffs, gamma

    def is_cayley(self, p=None) -> bool:
        phi, _ = self.form(np.zeros(8) if p is None else p)
        return cayley_check(phi).is_cayley
