"""Exterior algebra of (R^8)* in the lexicographic basis of sorted index tuples.

A k-form is stored as its coefficient vector over ``basis(k)``; ``e^I`` with
``I = (i1 < ... < ik)`` is the wedge of the dual basis covectors. Linear maps
act by pullback, ``(A*a)(v1, ..., vk) = a(A v1, ..., A vk)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

DIM = 8


@lru_cache(maxsize=None)
def basis(k: int, n: int = DIM) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def index(k: int, n: int = DIM) -> dict[tuple[int, ...], int]:
    return {I: a for a, I in enumerate(basis(k, n))}


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AltForm:
    """Constant-coefficient alternating k-form on R^n.

    ``exact`` optionally carries integer coefficients; it is kept only when
    every coefficient is an integer and is dropped by floating arithmetic.
    """

    degree: int
    coeffs: np.ndarray
    exact: tuple[int, ...] | None = None
    frame: str = "std"
    n: int = DIM

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if c.size != comb(self.n, self.degree):
            raise ValueError(
                f"degree-{self.degree} form on R^{self.n} needs "
                f"{comb(self.n, self.degree)} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", _frozen(c))
        if self.exact is not None:
            ex = tuple(int(v) for v in self.exact)
            if len(ex) != c.size or np.any(np.asarray(ex, dtype=float) != c):
                raise ValueError("exact coefficients disagree with float coefficients")
            object.__setattr__(self, "exact", ex)

    @classmethod
    def from_dict(cls, degree: int, terms: dict, frame: str = "std", n: int = DIM):
        c = np.zeros(comb(n, degree))
        idx = index(degree, n)
        for I, v in terms.items():
            s = perm_sign(I)
            if s == 0:
                continue
            c[idx[tuple(sorted(I))]] += s * v
        return cls(degree, c, frame=frame, n=n)

    @classmethod
    def zero(cls, degree: int, frame: str = "std", n: int = DIM):
        return cls(degree, np.zeros(comb(n, degree)), frame=frame, n=n)

    def _check(self, other: "AltForm"):
        if not isinstance(other, AltForm) or other.degree != self.degree or other.n != self.n:
            raise TypeError("forms of different degree or dimension")
        if other.frame != self.frame:
            raise ValueError(f"frame mismatch: {self.frame} vs {other.frame}")

    def _new(self, coeffs, exact=None):
        return type(self)(self.degree, coeffs, exact=exact, frame=self.frame, n=self.n)

    def __add__(self, other):
        self._check(other)
        ex = None
        if self.exact is not None and other.exact is not None:
            ex = tuple(a + b for a, b in zip(self.exact, other.exact))
        return self._new(self.coeffs + other.coeffs, ex)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        ex = None if self.exact is None else tuple(-a for a in self.exact)
        return self._new(-self.coeffs, ex)

    def __mul__(self, s):
        if isinstance(s, (int, np.integer)) and self.exact is not None:
            return self._new(self.coeffs * s, tuple(int(s) * a for a in self.exact))
        return self._new(self.coeffs * float(s))

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / s)

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector (the standard metric norm)."""
        return float(np.linalg.norm(self.coeffs))

    def allclose(self, other: "AltForm", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0) <= atol)

    def evaluate(self, *vectors) -> float:
        if len(vectors) != self.degree:
            raise ValueError(f"expected {self.degree} vectors")
        if self.degree == 0:
            return float(self.coeffs[0])
        V = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        rows = np.array(basis(self.degree, self.n))
        minors = np.linalg.det(V[rows, :])
        return float(self.coeffs @ minors)

    def tensor(self) -> np.ndarray:
        """Fully antisymmetric component array T[i1..ik] = a(e_i1, ..., e_ik)."""
        return to_tensor(self.coeffs, self.degree, self.n)

    def terms(self) -> dict:
        return {I: c for I, c in zip(basis(self.degree, self.n), self.coeffs) if c != 0}

    def with_frame(self, frame: str):
        return type(self)(self.degree, self.coeffs, exact=self.exact, frame=frame, n=self.n)


class FourForm(AltForm):
    """Alternating 4-form on R^8 (70 coefficients)."""

    def __init__(self, degree=4, coeffs=None, exact=None, frame="std", n=DIM):
        if coeffs is None:
            # FourForm(coeffs) shorthand
            degree, coeffs = 4, degree
        if degree != 4 or n != DIM:
            raise ValueError("FourForm is a degree-4 form on R^8")
        super().__init__(4, coeffs, exact, frame, n)

    @classmethod
    def from_dict(cls, terms: dict, frame: str = "std"):  # type: ignore[override]
        a = AltForm.from_dict(4, terms, frame)
        return cls(4, a.coeffs, frame=frame)

    @classmethod
    def coerce(cls, a: AltForm) -> "FourForm":
        if isinstance(a, FourForm):
            return a
        if a.degree != 4 or a.n != DIM:
            raise ValueError("not a 4-form on R^8")
        return cls(4, a.coeffs, exact=a.exact, frame=a.frame)


# --- tensor conversion -----------------------------------------------------

@lru_cache(maxsize=None)
def _expansion(k: int, n: int):
    """Sparse data for coefficient -> full antisymmetric tensor."""
    flat, col, sgn = [], [], []
    for a, I in enumerate(basis(k, n)):
        for p in itertools.permutations(range(k)):
            idx = tuple(I[i] for i in p)
            flat.append(np.ravel_multi_index(idx, (n,) * k) if k else 0)
            col.append(a)
            sgn.append(perm_sign(p))
    return np.array(flat, dtype=np.int64), np.array(col), np.array(sgn, dtype=float)


def to_tensor(coeffs: np.ndarray, k: int, n: int = DIM) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    flat, col, sgn = _expansion(k, n)
    out = np.zeros(n ** k, dtype=coeffs.dtype)
    out[flat] = sgn * coeffs[col]
    return out.reshape((n,) * k) if k else out.reshape(())


def from_tensor(T: np.ndarray, k: int, n: int = DIM) -> np.ndarray:
    """Coefficients from a tensor; antisymmetrizes implicitly by reading sorted slots.

    Only correct for tensors that are already alternating; use
    ``antisymmetrize`` first otherwise.
    """
    T = np.asarray(T)
    if k == 0:
        return T.reshape(1)
    rows = np.array(basis(k, n))
    return T[tuple(rows.T)]


def antisymmetrize(T: np.ndarray) -> np.ndarray:
    k = T.ndim
    out = np.zeros_like(T)
    for p in itertools.permutations(range(k)):
        out = out + perm_sign(p) * np.transpose(T, p)
    return out / math.factorial(k)


# --- products -------------------------------------------------------------

@lru_cache(maxsize=None)
def _wedge_table(p: int, q: int, n: int):
    ip, iq, out, sgn = [], [], [], []
    idx = index(p + q, n)
    for a, I in enumerate(basis(p, n)):
        sI = set(I)
        for b, J in enumerate(basis(q, n)):
            if sI.intersection(J):
                continue
            s = perm_sign(I + J)
            ip.append(a)
            iq.append(b)
            out.append(idx[tuple(sorted(I + J))])
            sgn.append(s)
    return (np.array(ip, dtype=np.int64), np.array(iq, dtype=np.int64),
            np.array(out, dtype=np.int64), np.array(sgn, dtype=float))


def wedge_coeffs(a: np.ndarray, p: int, b: np.ndarray, q: int, n: int = DIM) -> np.ndarray:
    if p + q > n:
        return np.zeros(0)
    ip, iq, out, sgn = _wedge_table(p, q, n)
    res = np.zeros(comb(n, p + q), dtype=np.result_type(a, b, float))
    np.add.at(res, out, sgn * a[ip] * b[iq])
    return res


def wedge(a: AltForm, b: AltForm) -> AltForm:
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    c = wedge_coeffs(a.coeffs, a.degree, b.coeffs, b.degree, a.n)
    cls = FourForm if a.degree + b.degree == 4 and a.n == DIM else AltForm
    if cls is FourForm:
        return FourForm(4, c, frame=a.frame)
    return AltForm(a.degree + b.degree, c, frame=a.frame, n=a.n)


# --- GL action --------------------------------------------------------------

def pullback_matrix(A: np.ndarray, k: int) -> np.ndarray:
    """Matrix of a -> A*a on degree-k coefficients: (A*a)_I = sum_J det(A[J, I]) a_J."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if k == 0:
        return np.ones((1, 1))
    rows = np.array(basis(k, n))
    sub = A[rows[:, None, :, None], rows[None, :, None, :]]  # [J, I, j, i]
    return np.linalg.det(sub).T


def derivation_matrix(X: np.ndarray, k: int) -> np.ndarray:
    """Infinitesimal pullback L_X = d/dt (exp tX)* at t=0 on degree-k coefficients."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    idx = index(k, n)
    M = np.zeros((comb(n, k), comb(n, k)))
    for col, J in enumerate(basis(k, n)):
        for pos, j in enumerate(J):
            rest = J[:pos] + J[pos + 1:]
            for i in range(n):
                x = X[j, i]
                if x == 0 or i in rest:
                    continue
                new = J[:pos] + (i,) + J[pos + 1:]
                M[idx[tuple(sorted(new))], col] += perm_sign(new) * x
    return M


@lru_cache(maxsize=None)
def _elementary_derivations(k: int, n: int) -> np.ndarray:
    """Stack L_{E_ab} for the elementary matrices E_ab, shape (n*n, C(n,k), C(n,k))."""
    out = np.zeros((n * n, comb(n, k), comb(n, k)))
    for a in range(n):
        for b in range(n):
            E = np.zeros((n, n))
            E[a, b] = 1.0
            out[a * n + b] = derivation_matrix(E, k)
    out.setflags(write=False)
    return out


def action_jacobian(coeffs: np.ndarray, k: int, n: int = DIM) -> np.ndarray:
    """Matrix of X -> L_X a with X flattened row-major; shape (C(n,k), n*n)."""
    D = _elementary_derivations(k, n)
    return np.einsum("xij,j->ix", D, np.asarray(coeffs, dtype=float))


def gram_matrix(g: np.ndarray, k: int) -> np.ndarray:
    """Inner products <e^I, e^J>_g = det(g^{-1}[I, J])."""
    ginv = np.linalg.inv(np.asarray(g, dtype=float))
    return pullback_matrix(ginv, k)


@lru_cache(maxsize=None)
def euclidean_star(k: int, n: int = DIM) -> np.ndarray:
    """Hodge star on degree-k coefficients for the standard metric and orientation."""
    idx = index(n - k, n)
    M = np.zeros((comb(n, n - k), comb(n, k)))
    full = tuple(range(n))
    for a, I in enumerate(basis(k, n)):
        J = tuple(i for i in full if i not in I)
        M[idx[J], a] = perm_sign(I + J)
    M.setflags(write=False)
    return M


@lru_cache(maxsize=None)
def _interior_table(k: int, n: int):
    """Entries of i_{e_m}: e^I -> sign e^{I minus m}, for m in I."""
    m_, src, dst, sgn = [], [], [], []
    idx = index(k - 1, n)
    for a, I in enumerate(basis(k, n)):
        for pos, m in enumerate(I):
            m_.append(m)
            src.append(a)
            dst.append(idx[I[:pos] + I[pos + 1:]])
            sgn.append(-1.0 if pos % 2 else 1.0)
    return (np.array(m_, dtype=np.int64), np.array(src, dtype=np.int64),
            np.array(dst, dtype=np.int64), np.array(sgn))


def interior_coeffs(v: np.ndarray, coeffs: np.ndarray, k: int, n: int = DIM) -> np.ndarray:
    """Coefficients of the contraction i_v a of a degree-k form."""
    if k == 0:
        return np.zeros(0)
    m_, src, dst, sgn = _interior_table(k, n)
    out = np.zeros(comb(n, k - 1), dtype=np.result_type(v, coeffs, float))
    np.add.at(out, dst, sgn * np.asarray(v)[m_] * np.asarray(coeffs)[src])
    return out


def pullback_coeffs(A: np.ndarray, coeffs: np.ndarray, k: int, n: int = DIM) -> np.ndarray:
    """A*a computed through the full tensor; cheaper than building the matrix once."""
    T = to_tensor(np.asarray(coeffs, dtype=float), k, n)
    for axis in range(k):
        T = np.tensordot(T, A, axes=([0], [0]))
    return from_tensor(T, k, n)


def bidegree(I: tuple[int, ...], h: int) -> tuple[int, int]:
    """(horizontal, vertical) degree of e^I when the first h coordinates are horizontal."""
    p = sum(1 for i in I if i < h)
    return p, len(I) - p
