"""Equivariant representation spaces and the hyperkähler moment map.

For Γ ⊂ SU(2) with regular representation R = C^N (left-regular action L),
a point is a pair (α, β) of N×N complex matrices fixed by Γ acting on
End(R) ⊗ C²:

    L(g) (α, β) L(g)⁻¹ = ρ_V(g)⁻¹ (α, β)    (acting on the column (α, β)ᵀ).

The space carries the flat metric g(A, B) = Re tr(α*α' + β*β') and
complex structures I = i·, J(α, β) = (−β*, α*) (adjoints), K = IJ. The gauge algebra is
the anti-Hermitian part of the commutant of L(Γ); its scalar line acts
trivially, so moment values live in the traceless part.

Everything is expressed in an orthonormal real basis of the equivariant space,
in which each moment component is a quadratic form μ_k(x) = ½ xᵀ Q_k x.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import null_space, orth

from ..mckay import CharacterTable, FiniteMatrixGroup, character_table

RANK_TOL = 1e-9


def _regular(g: FiniteMatrixGroup, i: int) -> np.ndarray:
    """Permutation matrix of left multiplication by element i: e_h ↦ e_{ih}."""
    n = g.order
    P = np.zeros((n, n))
    P[g.table[i], np.arange(n)] = 1.0
    return P


def _cvec(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return np.concatenate([alpha.ravel(), beta.ravel()])


def _to_real(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag])


def _from_real(x: np.ndarray) -> np.ndarray:
    h = len(x) // 2
    return x[:h] + 1j * x[h:]


def moment_components(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """The three anti-Hermitian components ½(i([α,α*]+[β,β*]), [α,β]+[α*,β*], i(−[α,β]+[α*,β*]))."""
    a, b = alpha, beta
    as_, bs = a.conj().T, b.conj().T
    ab = a @ b - b @ a
    asbs = as_ @ bs - bs @ as_
    m1 = 0.5j * (a @ as_ - as_ @ a + b @ bs - bs @ b)
    m2 = 0.5 * (ab + asbs)
    m3 = 0.5j * (-ab + asbs)
    return np.stack([m1, m2, m3])


@dataclass(frozen=True, eq=False)
class QuiverRepPoint:
    """A point of the equivariant space, stored by its real coordinates."""

    space: "RepSpace"
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.shape != (self.space.real_dim,):
            raise ValueError(f"expected {self.space.real_dim} real coordinates")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def alpha(self) -> np.ndarray:
        return self.space.matrices(self.x)[0]

    @property
    def beta(self) -> np.ndarray:
        return self.space.matrices(self.x)[1]

    def norm(self) -> float:
        return float(np.linalg.norm(self.x))

    def __mul__(self, t: float) -> "QuiverRepPoint":
        return QuiverRepPoint(self.space, self.x * float(t))

    __rmul__ = __mul__


@dataclass(frozen=True)
class MomentValue:
    """Three traceless anti-Hermitian N×N matrices, plus their coordinates in the gauge basis."""

    components: np.ndarray
    coords: np.ndarray

    @property
    def real(self) -> np.ndarray:
        return self.components[0]

    @property
    def complex(self) -> np.ndarray:
        """μ₂ + iμ₃ = [α, β]."""
        return self.components[1] + 1j * self.components[2]


class RepSpace:
    """(End(R) ⊗ C²)^Γ for Γ ⊂ SU(2), with its gauge algebra and moment map."""

    def __init__(self, g: FiniteMatrixGroup, table: CharacterTable | None = None):
        if g.dim != 2 or g.real:
            raise ValueError("the Kronheimer construction needs Γ ⊂ SU(2) acting on C²")
        self.group = g
        self.table = table or character_table(g)
        self.N = g.order
        gens = [g.index_of(x) for x in g.generators] if g.generators else []
        self._gens = gens
        self._L = {i: _regular(g, i) for i in gens}
        self.basis = self._equivariant_basis()           # (D, 2N²) complex rows, orthonormal for Re<,>
        self.gauge = self._gauge_basis()                  # (G, N, N) anti-Hermitian, traceless, orthonormal
        self.Q = self._quadratic_forms()                  # (3, G, D, D)

    # -- bases -----------------------------------------------------------------

    def _equivariant_basis(self) -> np.ndarray:
        N = self.N
        n = 2 * N * N
        rows = []
        for i in self._gens:
            L = self._L[i]
            Linv = L.T
            rho_inv = np.linalg.inv(self.group.elements[i])
            # linear map (α, β) ↦ L(α,β)L⁻¹ − ρ⁻¹(α,β), as a complex n×n matrix
            M = np.zeros((n, n), dtype=complex)
            Ad = np.kron(L, Linv.T)             # vec(L X L⁻¹) = (L ⊗ L⁻ᵀ) vec X, row-major
            for r in range(2):
                for c in range(2):
                    blk = -rho_inv[r, c] * np.eye(N * N)
                    if r == c:
                        blk = blk + Ad
                    M[r * N * N:(r + 1) * N * N, c * N * N:(c + 1) * N * N] = blk
            rows.append(M)
        if not rows:
            B = np.vstack([np.eye(n), 1j * np.eye(n)])
        else:
            Mr = np.vstack(rows)
            # real-linear nullspace of z ↦ Mz on (Re z, Im z)
            R = np.block([[Mr.real, -Mr.imag], [Mr.imag, Mr.real]])
            ns = null_space(R, rcond=RANK_TOL)
            B = (ns[:n] + 1j * ns[n:]).T
        return B

    def _gauge_basis(self) -> np.ndarray:
        """Orthonormal basis of traceless anti-Hermitian matrices commuting with L(Γ)."""
        N = self.N
        herm = []
        for a in range(N):
            for b in range(a, N):
                if a == b:
                    E = np.zeros((N, N), dtype=complex)
                    E[a, a] = 1j
                    herm.append(E)
                else:
                    E = np.zeros((N, N), dtype=complex)
                    E[a, b], E[b, a] = 1, -1
                    herm.append(E)
                    F = np.zeros((N, N), dtype=complex)
                    F[a, b], F[b, a] = 1j, 1j
                    herm.append(F)
        H = np.array(herm)                                  # real basis of u(N)
        cons = []
        for i in self._gens:
            L = self._L[i]
            C = np.einsum("ab,kbc->kac", L, H) - np.einsum("kab,bc->kac", H, L)
            cons.append(C.reshape(len(H), -1))
        tr = np.array([[np.trace(E)] for E in H])
        cons.append(tr)
        Mc = np.hstack(cons) if len(cons) > 1 else cons[0]
        Mr = np.vstack([Mc.real.T, Mc.imag.T])
        ns = null_space(Mr, rcond=RANK_TOL)
        X = np.einsum("kj,kab->jab", ns, H)
        # orthonormalise for <X, Y> = Re tr(X* Y)
        flat = np.array([_to_real(x.ravel()) for x in X])
        q = orth(flat.T).T if len(flat) else flat
        return np.array([_from_real(v).reshape(N, N) for v in q]) if len(q) else np.zeros((0, N, N))

    def _quadratic_forms(self) -> np.ndarray:
        D, G = self.real_dim, len(self.gauge)
        Q = np.zeros((3, G, D, D))
        E = np.eye(D)
        mus = [self._mu_raw(E[i]) for i in range(D)]
        for i in range(D):
            Q[:, :, i, i] = 2 * mus[i]
            for j in range(i + 1, D):
                # polarisation: μ(e_i + e_j) − μ(e_i) − μ(e_j) = e_iᵀ Q e_j
                v = self._mu_raw(E[i] + E[j]) - mus[i] - mus[j]
                Q[:, :, i, j] = Q[:, :, j, i] = v
        return Q

    def _mu_raw(self, x: np.ndarray) -> np.ndarray:
        a, b = self.matrices(x)
        comps = moment_components(a, b)
        # coordinates <μ_k, ξ> = Re tr(ξ* μ_k)
        return np.real(np.einsum("gab,kab->kg", self.gauge.conj(), comps))

    # -- conversions -------------------------------------------------------------

    @property
    def real_dim(self) -> int:
        return len(self.basis)

    @property
    def gauge_dim(self) -> int:
        return len(self.gauge)

    def matrices(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(x, dtype=float) @ self.basis
        N = self.N
        return z[:N * N].reshape(N, N), z[N * N:].reshape(N, N)

    def coords(self, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
        z = _cvec(alpha, beta)
        return np.real(self.basis.conj() @ z)     # real-orthonormal basis of a real subspace

    def point(self, alpha=None, beta=None, x=None) -> QuiverRepPoint:
        if x is None:
            x = self.coords(np.asarray(alpha, dtype=complex), np.asarray(beta, dtype=complex))
        return QuiverRepPoint(self, x)

    def equivariance_residual(self, A: QuiverRepPoint) -> float:
        a, b = A.alpha, A.beta
        worst = 0.0
        for i in self._gens:
            L = self._L[i]
            ri = np.linalg.inv(self.group.elements[i])
            lhs = np.stack([L @ a @ L.T, L @ b @ L.T])
            rhs = np.einsum("rc,cab->rab", ri, np.stack([a, b]))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    # -- structures --------------------------------------------------------------

    @cached_property
    def complex_structures(self) -> np.ndarray:
        """Real D×D matrices of I, J, K in the orthonormal coordinates."""
        D = self.real_dim
        E = np.eye(D)
        out = np.zeros((3, D, D))
        for c in range(D):
            a, b = self.matrices(E[c])
            images = [(1j * a, 1j * b), (-b.conj().T, a.conj().T)]
            images.append((1j * images[1][0], 1j * images[1][1]))
            for k, (p, q) in enumerate(images):
                out[k, :, c] = self.coords(p, q)
        return out

    @cached_property
    def kahler_forms(self) -> np.ndarray:
        """ω_k(X, Y) = g(I_k X, Y) as antisymmetric matrices: ω_k = I_kᵀ.

        With these, dμ_k(v) = −ω_k(X_ξ, v) paired against ξ; ``mu_jacobian`` follows that sign.
        """
        return np.transpose(self.complex_structures, (0, 2, 1))

    def gauge_vectors(self, x: np.ndarray) -> np.ndarray:
        """Columns X_ξ(A) = ([ξ, α], [ξ, β]) for the gauge basis."""
        a, b = self.matrices(x)
        cols = [self.coords(xi @ a - a @ xi, xi @ b - b @ xi) for xi in self.gauge]
        return np.array(cols).T if cols else np.zeros((self.real_dim, 0))

    # -- moment map --------------------------------------------------------------

    def mu(self, x: np.ndarray) -> np.ndarray:
        """(3, G) coordinates of the moment map."""
        return 0.5 * np.einsum("i,kgij,j->kg", x, self.Q, x)

    def mu_jacobian(self, x: np.ndarray) -> np.ndarray:
        """(3G, D) derivative of the flattened moment map."""
        return np.einsum("kgij,j->kgi", self.Q, x).reshape(-1, self.real_dim)

    def moment_map(self, A: QuiverRepPoint) -> MomentValue:
        comps = moment_components(A.alpha, A.beta)
        return MomentValue(comps, self.mu(A.x))

    def zeta_matrix(self, values: np.ndarray) -> np.ndarray:
        """Central element i Σ_ρ (ζ_ρ / dim ρ) π_ρ of one stability component."""
        return 1j * np.einsum("r,rab->ab", np.asarray(values, dtype=float) / np.array(self.table.degrees),
                              self.isotypic_projectors)

    def zeta_coords(self, zeta) -> np.ndarray:
        """(3, G) gauge coordinates of the target level for a stability parameter."""
        vals = np.asarray(getattr(zeta, "values", zeta), dtype=float)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.shape[1] != len(self.table.degrees):
            raise ValueError("stability parameter has the wrong number of entries")
        d = np.array(self.table.degrees, dtype=float)
        resid = np.abs(vals @ d)
        if np.any(resid > 1e-12 * max(1.0, float(np.max(np.abs(vals))))):
            raise ValueError("stability parameter violates the trace relation")
        out = np.zeros((3, self.gauge_dim))
        for k in range(vals.shape[0]):
            Z = self.zeta_matrix(vals[k])
            out[k] = np.real(np.einsum("gab,ab->g", self.gauge.conj(), Z))
        return out

    def zeta_norm(self, zeta) -> float:
        """|ζ| as the Frobenius norm of its central anti-Hermitian embedding."""
        return float(np.linalg.norm(self.zeta_coords(zeta)))

    @cached_property
    def isotypic_projectors(self) -> np.ndarray:
        """π_ρ = (dim ρ/|Γ|) Σ_g conj(χ_ρ(g)) L(g) in End(R)."""
        g, t = self.group, self.table
        out = np.zeros((len(t.rows), self.N, self.N), dtype=complex)
        for i in range(g.order):
            L = _regular(g, i)
            chi = t.rows[:, g.class_of[i]]
            out += np.einsum("r,ab->rab", np.conj(chi), L)
        return out * (np.array(t.degrees)[:, None, None] / g.order)

    # -- seeds -------------------------------------------------------------------

    def flat_orbit_point(self, q, radius: float | None = None) -> QuiverRepPoint:
        """Diagonal (α, β) = Σ_g (ρ_V(g) q) E_gg: on μ⁻¹(0), free when q ≠ 0."""
        q = np.asarray(q, dtype=complex)
        n = self.N
        a = np.zeros((n, n), dtype=complex)
        b = np.zeros((n, n), dtype=complex)
        for i, M in enumerate(self.group.elements):
            v = M @ q
            a[i, i], b[i, i] = v
        x = self.coords(a, b)
        if radius is not None:
            x = x * (radius / np.linalg.norm(x))
        return QuiverRepPoint(self, x)


def constellation_residual(A: QuiverRepPoint) -> float:
    """‖[α, β]‖, which equals ‖μ₂ + iμ₃‖."""
    a, b = A.alpha, A.beta
    return float(np.linalg.norm(a @ b - b @ a))


def scaling_transport(A: QuiverRepPoint, t: float) -> QuiverRepPoint:
    """δ_t: μ⁻¹(ζ) → μ⁻¹(t²ζ), A ↦ tA."""
    return A * t


def rep_space_basis(g: FiniteMatrixGroup) -> RepSpace:
    return RepSpace(g)
