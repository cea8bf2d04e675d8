"""Cayley forms assembled from horizontal and vertical structures on R^h ⊕ R^{8-h}.

Horizontal coordinates come first (indices 0..h-1), vertical ones after.

    h = 4:  Φ = vol_H − s Σ_i ω_H^i ∧ ω_V^i + vol_V      (Sp(1) triples)
    h = 2:  Φ = e⁰∧Reθ − e¹∧Imθ + e⁰∧e¹∧ω + ½ ω∧ω       (SU(3) pair, z = e⁰ + i e¹)
    h = 1:  Φ = e∧φ + ψ                                 (G₂ pair, ψ = ⋆φ)

For a triple the volume form is either ⅙ Σ_i ω^i∧ω^i ("sixth") or ½ ω¹∧ω¹
("half"); both agree on triples with ω^i∧ω^j = 2δ_ij vol, which is what the
validation enforces. ``pairing_scale`` is the factor s in front of the
mixed term.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..exterior import DIM, AltForm, FourForm, basis, index, wedge_coeffs
from .linear import CayleyCheck, NotCayleyError, cayley_check

VALIDATION_TOL = 1e-9
VOLUME_CONVENTIONS = ("sixth", "half")


class FrameDataError(ValueError):
    pass


def embed(form: AltForm, offset: int, n: int = DIM) -> AltForm:
    """Push a form on R^m into R^n along coordinates offset..offset+m-1."""
    idx = index(form.degree, n)
    c = np.zeros(len(basis(form.degree, n)))
    for I, v in zip(basis(form.degree, form.n), form.coeffs):
        c[idx[tuple(i + offset for i in I)]] = v
    if form.degree == 4 and n == DIM:
        return FourForm(4, c)
    return AltForm(form.degree, c, n=n)


def _wedge(a: AltForm, b: AltForm) -> AltForm:
    if a.n != b.n:
        raise FrameDataError("wedge of forms on different spaces")
    return AltForm(a.degree + b.degree,
                   wedge_coeffs(a.coeffs, a.degree, b.coeffs, b.degree, a.n), n=a.n)


def _scale(*forms: AltForm) -> float:
    return max([1.0] + [float(np.max(np.abs(f.coeffs))) for f in forms])


def triple_volume(triple, convention: str = "sixth") -> AltForm:
    if convention == "sixth":
        vol = _wedge(triple[0], triple[0])
        for w in triple[1:]:
            vol = vol + _wedge(w, w)
        return vol * (1.0 / 6.0)
    if convention == "half":
        return _wedge(triple[0], triple[0]) * 0.5
    raise FrameDataError(f"unknown volume convention {convention!r}; use one of {VOLUME_CONVENTIONS}")


def validate_triple(triple, convention: str = "sixth", tol: float = VALIDATION_TOL) -> AltForm:
    """Check ω^i ∧ ω^j = 2 δ_ij vol on R^4 and return vol."""
    if len(triple) != 3 or any(w.degree != 2 or w.n != 4 for w in triple):
        raise FrameDataError("a triple is three 2-forms on R^4")
    vol = triple_volume(triple, convention)
    v = float(vol.coeffs[0])
    if abs(v) <= tol * _scale(*triple) ** 2:
        raise FrameDataError("degenerate triple: volume form vanishes")
    for i, j in combinations(range(3), 2):
        if abs(_wedge(triple[i], triple[j]).coeffs[0]) > tol * abs(v):
            raise FrameDataError(f"triple components {i}, {j} are not wedge-orthogonal")
    for i in range(3):
        if abs(_wedge(triple[i], triple[i]).coeffs[0] - 2 * v) > tol * abs(v):
            raise FrameDataError(f"triple component {i} has the wrong normalisation")
    return vol


def standard_triple(self_dual: bool = True) -> tuple[AltForm, AltForm, AltForm]:
    """dx01 ± dx23, dx02 ± dx31, dx03 ± dx12 on R^4."""
    s = 1 if self_dual else -1
    terms = [{(0, 1): 1, (2, 3): s}, {(0, 2): 1, (3, 1): s}, {(0, 3): 1, (1, 2): s}]
    return tuple(AltForm.from_dict(2, t, n=4) for t in terms)


@dataclass(frozen=True)
class FibredFrameData:
    """Pointwise structure data for one of the three fibred shapes.

    h = 4: horizontal = ω_H triple on R^4, vertical = ω_V triple on R^4.
    h = 2: horizontal = complex coframe (a, b), z = a dx⁰ + b dx¹;
           vertical = (ω, Reθ, Imθ) on R^6.
    h = 1: horizontal = (c,) for e = c dx⁰; vertical = (φ, ψ) on R^7.
    """

    h: int
    horizontal: tuple
    vertical: tuple
    volume_convention: str = "sixth"
    pairing_scale: float = 1.0

    def __post_init__(self):
        if self.h not in (1, 2, 4):
            raise FrameDataError("horizontal dimension must be 1, 2 or 4")
        v = DIM - self.h
        if self.h == 4:
            ok = len(self.horizontal) == 3 and len(self.vertical) == 3 and all(
                w.degree == 2 and w.n == 4 for w in (*self.horizontal, *self.vertical))
        elif self.h == 2:
            ok = len(self.horizontal) == 2 and len(self.vertical) == 3 and \
                self.vertical[0].degree == 2 and all(t.degree == 3 for t in self.vertical[1:]) and \
                all(t.n == v for t in self.vertical)
        else:
            ok = len(self.horizontal) == 1 and len(self.vertical) == 2 and \
                self.vertical[0].degree == 3 and self.vertical[1].degree == 4 and \
                all(t.n == v for t in self.vertical)
        if not ok:
            raise FrameDataError(f"tensor shapes do not match the h={self.h} case")
        if self.volume_convention not in VOLUME_CONVENTIONS:
            raise FrameDataError(f"unknown volume convention {self.volume_convention!r}")


def assemble_codim4(d: FibredFrameData, require_positive: bool = False) -> FourForm:
    if d.h != 4:
        raise FrameDataError("codim-4 assembly needs h = 4")
    vol_h = validate_triple(d.horizontal, d.volume_convention)
    vol_v = validate_triple(d.vertical, d.volume_convention)
    phi = embed(vol_h, 0) + embed(vol_v, 4)
    for wh, wv in zip(d.horizontal, d.vertical):
        phi = phi - d.pairing_scale * FourForm.coerce(_wedge8(embed(wh, 0), embed(wv, 4)))
    return _finish(FourForm.coerce(phi), require_positive)


def _wedge8(a: AltForm, b: AltForm) -> AltForm:
    return AltForm(a.degree + b.degree, wedge_coeffs(a.coeffs, a.degree, b.coeffs, b.degree))


def validate_su3(omega: AltForm, re_theta: AltForm, im_theta: AltForm,
                 tol: float = VALIDATION_TOL) -> None:
    """ω∧θ = 0 and ω³/6 = ¼ Reθ∧Imθ ≠ 0 on R^6."""
    s = _scale(omega, re_theta, im_theta)
    for t in (re_theta, im_theta):
        if np.max(np.abs(_wedge(omega, t).coeffs)) > tol * s ** 2:
            raise FrameDataError("ω ∧ θ ≠ 0")
    lhs = _wedge(_wedge(omega, omega), omega).coeffs[0] / 6.0
    rhs = 0.25 * _wedge(re_theta, im_theta).coeffs[0]
    if abs(rhs) <= tol * s ** 2:
        raise FrameDataError("degenerate complex volume form")
    if abs(lhs - rhs) > tol * abs(rhs):
        raise FrameDataError(f"normalisation ω³/6 = ¼ Reθ∧Imθ fails ({lhs:.6g} vs {rhs:.6g})")


def assemble_codim6(z, omega: AltForm, theta, require_positive: bool = False) -> FourForm:
    """z: complex coframe (a, b) on R^2; θ given as (Reθ, Imθ) or a complex coefficient array."""
    if isinstance(theta, (tuple, list)):
        re_t, im_t = theta
    else:
        th = np.asarray(theta)
        re_t, im_t = AltForm(3, th.real, n=6), AltForm(3, th.imag, n=6)
    if omega.n != 6 or omega.degree != 2:
        raise FrameDataError("ω must be a 2-form on R^6")
    validate_su3(omega, re_t, im_t)
    a, b = (complex(c) for c in z)
    e0 = AltForm(1, np.array([a.real, b.real, 0, 0, 0, 0, 0, 0]))
    e1 = AltForm(1, np.array([a.imag, b.imag, 0, 0, 0, 0, 0, 0]))
    if abs(a.real * b.imag - a.imag * b.real) <= VALIDATION_TOL:
        raise FrameDataError("degenerate horizontal coframe")
    om8 = embed(omega, 2)
    phi = _wedge8(e0, embed(re_t, 2)) - _wedge8(e1, embed(im_t, 2)) \
        + _wedge8(_wedge8(e0, e1), om8) + 0.5 * _wedge8(om8, om8)
    return _finish(FourForm.coerce(phi), require_positive)


def _g2_metric_orientation(phi3: AltForm) -> tuple[np.ndarray, float]:
    from ..exterior import interior_coeffs
    E = np.eye(7)
    B = np.zeros((7, 7))
    for i in range(7):
        ui = AltForm(2, interior_coeffs(E[i], phi3.coeffs, 3, 7), n=7)
        for j in range(i, 7):
            uj = AltForm(2, interior_coeffs(E[j], phi3.coeffs, 3, 7), n=7)
            B[i, j] = B[j, i] = -_wedge(_wedge(ui, uj), phi3).coeffs[0] / 6.0
    w = np.linalg.eigvalsh(B)
    if not (np.all(w > 0) or np.all(w < 0)):
        raise FrameDataError("3-form is not a G₂ form: its bilinear form is indefinite")
    # −φ gives −B; reversing the orientation of R^7 makes it positive again
    sign = 1.0 if w[0] > 0 else -1.0
    B = sign * B
    return B / np.linalg.det(B) ** (1.0 / 9.0), sign


def g2_metric(phi3: AltForm) -> np.ndarray:
    """Metric of a G₂ 3-form on R^7 from B(u,v) vol = −⅙ ι_uφ ∧ ι_vφ ∧ φ.

    The sign makes φ(x, y, z) = <x, yz> on Im O positive with the orientation
    e1..e7 for the octonion table in use; with it, e⁰∧φ + ⋆φ is the standard
    Cayley form.
    """
    return _g2_metric_orientation(phi3)[0]


def g2_star(phi3: AltForm) -> AltForm:
    """⋆φ for the metric and orientation determined by φ itself."""
    from ..exterior import euclidean_star, pullback_matrix
    g, orient = _g2_metric_orientation(phi3)
    w, V = np.linalg.eigh(g)
    P = (V / np.sqrt(w)) @ V.T
    Pinv = np.linalg.inv(P)
    S = euclidean_star(3, 7)
    c = pullback_matrix(Pinv, 4) @ (S @ (pullback_matrix(P, 3) @ phi3.coeffs))
    return AltForm(4, orient * c, n=7)


def assemble_codim7(e, phi3: AltForm, psi4: AltForm, require_positive: bool = False) -> FourForm:
    """e: scalar c for e = c dx⁰ (or a length-1 sequence)."""
    c = float(np.atleast_1d(np.asarray(e, dtype=float))[0])
    if c == 0:
        raise FrameDataError("horizontal covector e vanishes")
    if phi3.n != 7 or psi4.n != 7 or phi3.degree != 3 or psi4.degree != 4:
        raise FrameDataError("need a 3-form and a 4-form on R^7")
    star = g2_star(phi3)
    if np.max(np.abs(star.coeffs - psi4.coeffs)) > VALIDATION_TOL * _scale(phi3, psi4):
        raise FrameDataError("ψ is not ⋆φ for the metric of φ")
    e8 = AltForm(1, np.array([c, 0, 0, 0, 0, 0, 0, 0]))
    phi = _wedge8(e8, embed(phi3, 1)) + embed(psi4, 1)
    return _finish(FourForm.coerce(phi), require_positive)


def assemble(d: FibredFrameData, require_positive: bool = False) -> FourForm:
    if d.h == 4:
        return assemble_codim4(d, require_positive)
    if d.h == 2:
        return assemble_codim6(d.horizontal, d.vertical[0], d.vertical[1:], require_positive)
    return assemble_codim7(d.horizontal[0], *d.vertical, require_positive=require_positive)


def _finish(phi: FourForm, require_positive: bool) -> FourForm:
    chk: CayleyCheck = cayley_check(phi)
    if not chk.is_cayley:
        raise NotCayleyError(f"assembled form is not Cayley: {chk.message}")
    if require_positive and chk.component != 1:
        raise NotCayleyError("assembled form lies in the opposite-orientation component")
    return phi
