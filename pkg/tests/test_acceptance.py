"""Acceptance criteria 1-12, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from spin7kit.chambers import (StabilityParam, is_regular, path_wall_crossings, reflect, reflect_normal,
                               wall_system)
from spin7kit.cohomology import (ahat_genus, chen_ruan, holonomy_class, isentropic_check, load_spec,
                                 moduli_dimension, resolution_betti)
from spin7kit.hk.family import KronheimerFamily, harmonic_slope_space
from spin7kit.hk.quotient import ale_decay_fit, distance_linearity, moment_solve, tangent_chart
from spin7kit.hk.rep import RepSpace
from spin7kit.mckay import (build_group, cartan_matrix, character_table, conjugacy_age_spectrum, freeness_check,
                            mckay_quiver)
from spin7kit.octonion import cayley0
from spin7kit.spin7.assemble import FibredFrameData, assemble_codim4, standard_triple
from spin7kit.spin7.linear import OrbitProjector, decomposition_report, stabilizer_algebra
from spin7kit.spin7.torsion import CallableField, finite_diff_torsion

from importlib import resources

DATA = resources.files("spin7kit.data")

SU2_CATALOGUE = ([f"su2.cyclic:{n}" for n in range(2, 9)] + [f"su2.bindih:{n}" for n in (2, 3, 4)]
                 + ["su2.bintet", "su2.binoct", "su2.binico"])
EXPECTED_DYNKIN = {**{f"su2.cyclic:{n}": f"A~{n - 1}" for n in range(2, 9)},
                   "su2.bindih:2": "D~4", "su2.bindih:3": "D~5", "su2.bindih:4": "D~6",
                   "su2.bintet": "E~6", "su2.binoct": "E~7", "su2.binico": "E~8"}


def _unit_zeta(space: RepSpace, values) -> StabilityParam:
    z = StabilityParam(np.asarray(values, dtype=float), tuple(space.table.degrees))
    return z * (1.0 / space.zeta_norm(z))


# 1 ---------------------------------------------------------------------------

def test_criterion_01_spin7_dimension(record):
    t = time.perf_counter()
    dim = len(stabilizer_algebra(cayley0()))
    dt = time.perf_counter() - t
    ok = dim == 21 and dt < 1.0
    record(1, ok, f"dim stab(Φ₀) = {dim}, {dt:.3f} s")
    assert ok


# 2 ---------------------------------------------------------------------------

def test_criterion_02_decompositions(record):
    t = time.perf_counter()
    r = decomposition_report()
    dt = time.perf_counter() - t
    ok = (r.ranks_2 == (7, 21) and r.ranks_4[:2] == (1, 7) and r.ranks_4[3] == 35
          and sum(r.ranks_4) == 70 and r.orbit_dim == 43 and dt < 10)
    record(2, ok, f"Λ² {r.ranks_2}, Λ⁴ {r.ranks_4}, orbit dim {r.orbit_dim}, codim {r.orbit_codim} "
                  f"(stated {r.stated_codim}, discrepancy {r.codim_discrepancy}), {dt:.2f} s")
    assert ok


# 3 ---------------------------------------------------------------------------

def _lipschitz_ratios(op: OrbitProjector, n: int, scale: float, rng) -> np.ndarray:
    out = np.empty(n)
    for k in range(n):
        a, b = rng.normal(size=70), rng.normal(size=70)
        a *= scale * rng.uniform() / op.norm(a)
        b *= scale * rng.uniform() / op.norm(b)
        dq = op.norm(op.remainder(a) - op.remainder(b))
        out[k] = dq / ((op.norm(a) + op.norm(b)) * op.norm(a - b))
    return out


def test_criterion_03_theta_estimates(record):
    phi = cayley0()
    op = OrbitProjector(phi)
    fixed = float(np.max(np.abs(op.project(np.zeros(70)) - phi.coeffs)))
    rng = np.random.default_rng(0)
    e = rng.normal(size=70)
    e /= op.norm(e)
    ts = np.logspace(-4, -1, 10)
    q = [op.norm(op.remainder(t * e)) for t in ts]
    slope = float(np.polyfit(np.log(ts), np.log(q), 1)[0])
    r1 = _lipschitz_ratios(op, 1000, 0.1, rng)
    r2 = np.concatenate([r1, _lipschitz_ratios(op, 1000, 0.1, rng)])
    r3 = _lipschitz_ratios(op, 1000, 0.2, np.random.default_rng(1))
    stable = abs(r2.max() / r1.max() - 1) <= 0.2 and abs(r3.max() / r1.max() - 1) <= 0.2
    ok = fixed < 1e-11 and abs(slope - 2.0) <= 0.1 and np.isfinite(r1.max()) and stable
    record(3, ok, f"|Θ(Φ₀) − Φ₀| = {fixed:.1e}, exponent {slope:.4f}, Lipschitz ratio max "
                  f"{r1.max():.4f} (2× samples {r2.max():.4f}, 2× scale {r3.max():.4f})")
    assert ok


# 4 ---------------------------------------------------------------------------

def test_criterion_04_mckay(record):
    bad = []
    for desc in SU2_CATALOGUE:
        g = build_group(desc)
        t = character_table(g)
        q = mckay_quiver(g, t)
        c = cartan_matrix(q)
        if c.dynkin != EXPECTED_DYNKIN[desc]:
            bad.append(f"{desc}: {c.dynkin}")
        # exact certificate: kernel = dims and all leading principal minors of the finite part > 0
        if c.kernel != tuple(t.degrees) or np.any(c.matrix @ np.array(t.degrees)):
            bad.append(f"{desc}: kernel")
        if not all(isinstance(m, Fraction) and m > 0 for m in c.psd_certificate):
            bad.append(f"{desc}: not PSD")
        if c.matrix.dtype.kind != "i":
            bad.append(f"{desc}: non-integer Cartan matrix")
    ok = not bad
    record(4, ok, f"{len(SU2_CATALOGUE)} groups matched Ã/D̃/Ẽ with exact PSD certificates"
                  if ok else "; ".join(bad))
    assert ok


# 5 ---------------------------------------------------------------------------

def test_criterion_05_ages(record):
    bad = []
    n_el = 0
    for desc in SU2_CATALOGUE:
        g = build_group(desc)
        by_class = {a.index: a.age for a in conjugacy_age_spectrum(g)}
        for i in range(g.order):
            if i == g.identity:
                continue
            n_el += 1
            a = by_class[g.class_of[i]]
            if not (isinstance(a, Fraction) and a == 1):
                bad.append(f"{desc}[{i}]: {a}")
    ok = not bad
    record(5, ok, f"{n_el} nontrivial elements, all of age exactly 1" if ok else "; ".join(bad[:5]))
    assert ok


# 6 ---------------------------------------------------------------------------

def test_criterion_06_gamma_groups(record):
    orders, free = [], []
    for n in (1, 3, 5):
        g = build_group(f"spin7.gamma_n:{n}")
        orders.append(g.order)
        free.append(freeness_check(g).free)
    g = build_group("spin7.gamma_n:1")
    # i·1 and the antilinear (z̄₂, −z̄₁, z̄₄, −z̄₃) have integer real matrices: check exactly
    a, b = (np.rint(M.real).astype(np.int64) for M in g.generators[1:3])
    exact = all(np.allclose(M, np.rint(M.real)) for M in g.generators[1:3])
    I = np.eye(8, dtype=np.int64)
    mp = np.linalg.matrix_power
    rel = exact and np.array_equal(mp(a, 4), I) and np.array_equal(mp(b, 4), I) and np.array_equal(a @ b, mp(b, 3) @ a)
    ok = orders == [8, 24, 40] and all(free) and rel
    record(6, ok, f"orders {orders}, free {free}, α⁴ = β⁴ = 1 and αβ = β³α exact: {rel}")
    assert ok


# 7 ---------------------------------------------------------------------------

def test_criterion_07_moment_map(record):
    rng = np.random.default_rng(7)
    S = RepSpace(build_group("su2.cyclic:3"))
    zc = S.zeta_coords(_unit_zeta(S, [[1, -1, 0], [0, 1, -1], [0.5, 0, -0.5]])).ravel()
    # μ is quadratic, so its own central differences are exact; the O(h²) check uses ‖μ − ζ‖², which is quartic
    factors, exact_err = [], 0.0
    h = 1e-2
    for _ in range(100):
        x, v = rng.normal(size=S.real_dim), rng.normal(size=S.real_dim)
        v /= np.linalg.norm(v)
        dmu = S.mu_jacobian(x) @ v
        fd = (S.mu(x + h * v) - S.mu(x - h * v)).ravel() / (2 * h)
        exact_err = max(exact_err, float(np.max(np.abs(fd - dmu))))
        f = lambda y: float(np.sum((S.mu(y).ravel() - zc) ** 2))
        g = 2 * (S.mu(x).ravel() - zc) @ dmu
        e1 = abs((f(x + h * v) - f(x - h * v)) / (2 * h) - g)
        e2 = abs((f(x + h / 2 * v) - f(x - h / 2 * v)) / h - g)
        factors.append(e1 / e2)
    factor = float(np.median(factors))
    worst_factor = float(np.max(np.abs(np.array(factors) - 4)))
    # gauge equivariance μ(UAU⁻¹) = U μ(A) U⁻¹ over 100 random A
    eq = 0.0
    for _ in range(100):
        A = S.point(x=rng.normal(size=S.real_dim))
        xi = np.einsum("g,gab->ab", rng.normal(size=S.gauge_dim), S.gauge)
        U = expm(xi)
        B = S.point(U @ A.alpha @ U.conj().T, U @ A.beta @ U.conj().T)
        lhs = S.moment_map(B).components
        rhs = np.einsum("ab,kbc,cd->kad", U, S.moment_map(A).components, U.conj().T)
        eq = max(eq, float(np.max(np.abs(lhs - rhs))), S.equivariance_residual(B))
    x = rng.normal(size=S.real_dim)
    scale = max(float(np.max(np.abs(S.mu(t * x) - t * t * S.mu(x))) / max(1.0, t * t * np.max(np.abs(S.mu(x)))))
                for t in (0.5, 2.0, 3.0))
    ok = abs(factor - 4) <= 0.5 and worst_factor <= 0.5 and exact_err < 1e-9 and eq < 1e-10 and scale < 1e-14
    record(7, ok, f"Richardson factor {factor:.3f} (worst |f−4| {worst_factor:.3f}), exact-FD error {exact_err:.1e}, "
                  f"equivariance {eq:.1e}, scaling {scale:.1e}")
    assert ok


# 8 ---------------------------------------------------------------------------

def test_criterion_08_quotient(record):
    t0 = time.perf_counter()
    parts, ok = [], True
    for desc, vals in (("su2.cyclic:2", [[1, -1], [0.3, -0.3], [-0.2, 0.2]]),
                       ("su2.cyclic:3", [[1, -1, 0], [0, 1, -1], [0.5, 0, -0.5]])):
        S = RepSpace(build_group(desc))
        z = _unit_zeta(S, vals)
        regular = is_regular(z, wall_system(S.group)).regular
        res = moment_solve(S, z, S.flat_orbit_point(np.array([0.6, 0.8j]), 1.0))
        chart = tangent_chart(S, res.point)
        fit = ale_decay_fit(S, z, [10, 20, 40, 70, 100])
        good = regular and res.residual < 1e-10 and chart.dim == 4 and abs(fit.exponent + 4) <= 0.3
        ok &= good
        parts.append(f"{desc}: residual {res.residual:.1e}, dim {chart.dim}, exponent {fit.exponent:.3f}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    record(8, ok, "; ".join(parts) + f"; {dt:.1f} s")
    assert ok


# 9 ---------------------------------------------------------------------------

def test_criterion_09_fiber_distance(record):
    S = RepSpace(build_group("su2.cyclic:2"))
    z = _unit_zeta(S, [[1, -1], [0, 0], [0, 0]])
    steps = np.array([0.05, 0.1, 0.15, 0.2, 0.25])
    slope, d = distance_linearity(S, z, z, steps)
    ratio = d / (steps * S.zeta_norm(z))
    ok = abs(slope - 1) < 0.05
    record(9, ok, f"log-log slope {slope:.4f} along ζ → (1+t)ζ; d/|ζ−ζ′| = {ratio.min():.3f}..{ratio.max():.3f}")
    assert ok


# 10 --------------------------------------------------------------------------

def test_criterion_10_cohomology(record):
    t = time.perf_counter()
    kummer = load_spec(DATA / "kummer_t4.json")
    res = resolution_betti(kummer).b
    cr = chen_ruan(kummer).b
    iso = isentropic_check(kummer).isentropic
    t8 = load_spec(DATA / "t8.json").ambient
    k3 = load_spec(DATA / "k3xk3.json").ambient
    a_t8, a_k3 = ahat_genus(t8), ahat_genus(k3)
    hol = holonomy_class(a_k3, k3).label
    md = moduli_dimension(a_k3, k3)
    dt = time.perf_counter() - t
    exact = all(isinstance(v, int) for v in res + cr) and isinstance(a_t8, Fraction)
    ok = (res == (1, 0, 22, 0, 1) and cr == (1, 0, 22, 0, 1) and iso and a_t8 == 0 and a_k3 == 4
          and hol == "Spin(4)" and md == 119 and exact and dt < 1.0)
    record(10, ok, f"Kummer resolution {res}, CR {cr}, isentropic {iso}; Â(T⁸) = {a_t8}; "
                   f"Â(K3×K3) = {a_k3}, {hol}, moduli {md}; {dt:.3f} s")
    assert ok


# 11 --------------------------------------------------------------------------

def _product_field():
    S = RepSpace(build_group("su2.cyclic:2"))
    z0 = StabilityParam([[1, -1], [0.3, -0.3], [0.2, -0.2]], (1, 1))
    Z = StabilityParam([[1, -1]], (1, 1))
    return S, z0, Z


def test_criterion_11_torsion(record):
    S, z0, Z = _product_field()
    p = np.array([0.01, -0.02, 0.03, 0.01, 0.05, -0.03, 0.02, 0.04])
    # trivial product: flat R^4 times a curved quotient fibre, constant parameter
    prod = finite_diff_torsion(KronheimerFamily(S, z0, Z, np.zeros((4, 3))), p)
    flat = finite_diff_torsion(CallableField(lambda q: assemble_codim4(
        FibredFrameData(4, standard_triple(), standard_triple())), 4), p)
    prod_ok = np.linalg.norm(prod.d) <= 10 * prod.richardson_error + 1e-9 and np.linalg.norm(flat.d) < 1e-12
    c = (np.random.default_rng(1).normal(size=8) @ harmonic_slope_space()).reshape(4, 3) * 0.3
    harm = finite_diff_torsion(KronheimerFamily(S, z0, Z, c), p)
    h_res = float(np.linalg.norm(harm.d10 + harm.d01))
    harm_ok = h_res <= 10 * harm.richardson_error + 1e-9 and np.linalg.norm(harm.d21) > 1e3 * h_res
    cn = np.zeros((4, 3))
    cn[0, 0] = 0.3
    non = finite_diff_torsion(KronheimerFamily(S, z0, Z, cn), p)
    n_res = float(np.linalg.norm(non.d10))
    non_ok = n_res >= 10 * non.richardson_error
    ok = prod_ok and harm_ok and non_ok
    record(11, ok, f"product |dΦ| = {np.linalg.norm(prod.d):.1e} (stencil {prod.richardson_error:.1e}); "
                   f"harmonic |d¹⁰+d⁰¹| = {h_res:.1e} vs |d²⁻¹| = {np.linalg.norm(harm.d21):.2e}; "
                   f"non-harmonic |d¹⁰| = {n_res:.2e} vs stencil {non.richardson_error:.1e}")
    assert ok


# 12 --------------------------------------------------------------------------

def _weyl_permutes(w, C) -> bool:
    walls = {tuple(n) for n in w.normals.tolist()}
    signed = walls | {tuple(-x for x in n) for n in walls}
    for i in range(1, len(C) + 1):
        image = {reflect_normal(n, C, i) for n in walls}
        if {max(n, tuple(-x for x in n)) for n in image} != {max(n, tuple(-x for x in n)) for n in walls}:
            return False
        if not image <= signed:
            return False
    return True


def test_criterion_12_walls(record):
    parts, ok = [], True
    rng = np.random.default_rng(12)
    cases = [(f"su2.cyclic:{n}", n * (n - 1) // 2) for n in range(2, 9)] + [("su2.bindih:2", 12)]
    for desc, expected in cases:
        g = build_group(desc)
        w = wall_system(g)
        c = cartan_matrix(mckay_quiver(g))
        z = StabilityParam.from_reduced(rng.normal(size=(1, len(w.dims) - 1)), w.dims)
        events = path_wall_crossings([z.values, -z.values], w)
        crossed = {e.wall for e in events}
        at_half = all(abs(e.t - 0.5) < 1e-12 for e in events)
        perm = _weyl_permutes(w, c.finite_matrix)
        # the parameter action matches: pairings of s_i ζ are a signed permutation of those of ζ
        P = np.sort(np.abs(w.pairings(z)[0]))
        Q = np.sort(np.abs(w.pairings(reflect(z, c.finite_matrix, 1))[0]))
        good = (w.n_walls == expected and len(crossed) == expected and at_half and perm and np.allclose(P, Q))
        ok &= good
        parts.append(f"{desc} {w.n_walls}/{expected}")
    record(12, ok, "walls = positive roots: " + ", ".join(parts) + "; all crossed at t = 0.5; Weyl permutes walls")
    assert ok


if __name__ == "__main__":
    import sys

    def _print_record(n, ok, detail):
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn(_print_record)
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
