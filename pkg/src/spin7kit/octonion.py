"""Octonions via Cayley-Dickson doubling and the standard Cayley 4-form.

Convention: an element of R^{2m} is a pair (p, q) of elements of R^m and

    (p, q)(r, s) = (p r - s̄ q,  s p + q r̄),

starting from R. Basis e0 = 1, e1..e3 span the quaternion units and
e_{4+i} = (0, e_i). This gives e1 e2 = e3, e1 e4 = e5, e2 e4 = e6, e3 e4 = e7.

There are 480 distinct octonion multiplication tables on a labelled basis
(sign and index choices); everything downstream that is coefficient-level
(for instance the 14 terms of the Cayley form) is pinned to this one table,
exposed as ``MULT_SIGN`` / ``MULT_INDEX``. Invariant quantities (stabilizer
dimension, projector ranks, metrics) do not depend on the choice.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exterior import DIM, FourForm, basis

CONVENTION = "cayley-dickson:(p,q)(r,s)=(pr-s*q,sp+qr*)"


def _cd_conj(x: np.ndarray) -> np.ndarray:
    y = -x
    y[0] = x[0]
    return y


def _cd_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if n == 1:
        return a * b
    h = n // 2
    p, q, r, s = a[:h], a[h:], b[:h], b[h:]
    return np.concatenate([_cd_mul(p, r) - _cd_mul(_cd_conj(s), q),
                           _cd_mul(s, p) + _cd_mul(q, _cd_conj(r))])


def _build_table():
    E = np.eye(DIM, dtype=np.int64)
    sign = np.zeros((DIM, DIM), dtype=np.int64)
    idx = np.zeros((DIM, DIM), dtype=np.int64)
    for i in range(DIM):
        for j in range(DIM):
            prod = _cd_mul(E[i], E[j])
            k = int(np.flatnonzero(prod)[0])
            sign[i, j], idx[i, j] = prod[k], k
    sign.setflags(write=False)
    idx.setflags(write=False)
    return sign, idx


# e_i e_j = MULT_SIGN[i, j] * e_{MULT_INDEX[i, j]}
MULT_SIGN, MULT_INDEX = _build_table()

# structure constants C[i, j, k] with e_i e_j = sum_k C[i, j, k] e_k
_STRUCT = np.zeros((DIM, DIM, DIM), dtype=np.int64)
for _i in range(DIM):
    for _j in range(DIM):
        _STRUCT[_i, _j, MULT_INDEX[_i, _j]] = MULT_SIGN[_i, _j]
_STRUCT.setflags(write=False)


@dataclass(frozen=True, eq=False)
class Octonion:
    """Immutable octonion with 8 real (or integer) components."""

    c: np.ndarray

    def __post_init__(self):
        arr = np.array(self.c, copy=True)
        if arr.shape != (DIM,):
            raise ValueError("octonion needs 8 components")
        if arr.dtype.kind not in "iuf":
            arr = arr.astype(float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite octonion component")
        arr.setflags(write=False)
        object.__setattr__(self, "c", arr)

    @classmethod
    def unit(cls, i: int) -> "Octonion":
        v = np.zeros(DIM, dtype=np.int64)
        v[i] = 1
        return cls(v)

    @classmethod
    def real(cls, x) -> "Octonion":
        v = np.zeros(DIM, dtype=np.asarray(x).dtype if isinstance(x, (int, np.integer)) else float)
        v[0] = x
        return cls(v)

    def __add__(self, o):
        return Octonion(self.c + _as_oct(o).c)

    def __sub__(self, o):
        return Octonion(self.c - _as_oct(o).c)

    def __neg__(self):
        return Octonion(-self.c)

    def __mul__(self, o):
        if isinstance(o, Octonion):
            return oct_mul(self, o)
        return Octonion(self.c * o)

    def __rmul__(self, s):
        return Octonion(self.c * s)

    def __eq__(self, o):
        return isinstance(o, Octonion) and bool(np.array_equal(self.c, o.c))

    def __hash__(self):
        return hash(tuple(self.c.tolist()))

    def __repr__(self):
        return "Octonion(" + ", ".join(f"{x:g}" for x in self.c) + ")"


def _as_oct(x) -> Octonion:
    return x if isinstance(x, Octonion) else Octonion.real(x)


def oct_mul(a: Octonion, b: Octonion) -> Octonion:
    return Octonion(np.einsum("i,j,ijk->k", a.c, b.c, _STRUCT))


def conj(a: Octonion) -> Octonion:
    return Octonion(_cd_conj(a.c.copy()))


def inner(a: Octonion, b: Octonion):
    """<a, b> = Re(ā b), the Euclidean inner product of components."""
    return oct_mul(conj(a), b).c[0]


def norm(a: Octonion) -> float:
    return float(np.sqrt(inner(a, a)))


def triple_cross(u: Octonion, v: Octonion, w: Octonion) -> Octonion:
    """u × v × w = ½(u(v̄w) − w(v̄u)); alternating in its three arguments."""
    vb = conj(v)
    t = oct_mul(u, oct_mul(vb, w)) - oct_mul(w, oct_mul(vb, u))
    if t.c.dtype.kind in "iu":
        if np.any(t.c % 2):
            return Octonion(t.c / 2.0)
        return Octonion(t.c // 2)
    return Octonion(t.c / 2.0)


@lru_cache(maxsize=1)
def _cayley0_exact() -> tuple[int, ...]:
    out = []
    for I in basis(4):
        x, y, z, w = (Octonion.unit(i) for i in I)
        out.append(int(inner(x, triple_cross(y, z, w))))
    return tuple(out)


def cayley0() -> FourForm:
    """Φ₀(x, y, z, w) = <x, y × z × w> with integer coefficients in {-1, 0, 1}."""
    ex = _cayley0_exact()
    return FourForm(4, np.array(ex, dtype=float), exact=ex, frame="std")


def cayley_eval(x, y, z, w) -> float:
    """Evaluate Φ₀ on arbitrary vectors directly from the triple cross product."""
    ox, oy, oz, ow = (v if isinstance(v, Octonion) else Octonion(np.asarray(v, dtype=float))
                      for v in (x, y, z, w))
    return float(inner(ox, triple_cross(oy, oz, ow)))


def cayley_terms() -> dict[tuple[int, ...], int]:
    """Nonzero coefficients of Φ₀ keyed by sorted index 4-tuples."""
    return {I: c for I, c in zip(basis(4), _cayley0_exact()) if c}


def is_alternative_on_basis() -> bool:
    """Exact integer check of a(ab) = (aa)b and (ba)a = b(aa) on all basis pairs."""
    E = [Octonion.unit(i) for i in range(DIM)]
    for a, b in itertools.product(E, E):
        if oct_mul(a, oct_mul(a, b)) != oct_mul(oct_mul(a, a), b):
            return False
        if oct_mul(oct_mul(b, a), a) != oct_mul(b, oct_mul(a, a)):
            return False
    return True
