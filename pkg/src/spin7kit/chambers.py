"""Stability parameters, walls, chambers and the Weyl-group action.

A stability parameter assigns k real numbers (k = 1 for real, 3 for
Im H-valued parameters) to each irreducible representation, subject to the
trace relation Σ_ρ dim(ρ) θ_ρ = 0 per component. Irreducible 0 is the
trivial one, so θ_0 is determined by the others; all wall normals act on
these reduced coordinates θ_1, ..., θ_{r-1}.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .mckay import CartanData, CharacterTable, FiniteMatrixGroup, cartan_matrix, character_table, mckay_quiver

WALL_TOL = 1e-10
TRACE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StabilityParam:
    values: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if v.shape[1] != len(self.dims):
            raise ValueError(f"expected {len(self.dims)} entries per component, got {v.shape[1]}")
        if v.shape[0] not in (1, 3):
            raise ValueError("a stability parameter has 1 or 3 components")
        d = np.asarray(self.dims, dtype=float)
        resid = np.abs(v @ d)
        if np.any(resid > TRACE_TOL * max(1.0, float(np.max(np.abs(v))))):
            raise ValueError(f"trace relation Σ dim(ρ) θ_ρ = 0 violated by {resid.max():.3e}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))

    @classmethod
    def from_reduced(cls, reduced, dims) -> "StabilityParam":
        """Fill in θ_0 from the trace relation; ``reduced`` has shape (k, r-1) or (r-1,)."""
        red = np.atleast_2d(np.asarray(reduced, dtype=float))
        d = np.asarray(dims, dtype=float)
        theta0 = -(red @ d[1:]) / d[0]
        return cls(np.column_stack([theta0, red]), tuple(dims))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def reduced(self) -> np.ndarray:
        return self.values[:, 1:]

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __neg__(self):
        return StabilityParam(-self.values, self.dims)

    def __mul__(self, t: float):
        return StabilityParam(self.values * float(t), self.dims)

    __rmul__ = __mul__

    def __add__(self, other: "StabilityParam"):
        if other.dims != self.dims:
            raise ValueError("parameters for different groups")
        return StabilityParam(self.values + other.values, self.dims)

    def to_json(self, labels=None) -> str:
        labels = list(labels) if labels is not None else [f"rho{i}" for i in range(len(self.dims))]
        return json.dumps({"irreducibles": labels, "dims": list(self.dims), "values": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "StabilityParam":
        obj = json.loads(text)
        return cls(np.asarray(obj["values"], dtype=float), tuple(obj["dims"]))


@dataclass(frozen=True)
class ThetaSpace:
    dimension: int
    basis: np.ndarray     # (dimension, k, r)


def theta_space(dims, k: int = 3) -> ThetaSpace:
    """Basis e_ρ − dim(ρ) e_0 (ρ ≥ 1) of the trace-relation subspace, per component."""
    dims = _dims(dims)
    r = len(dims)
    out = []
    for i in range(k):
        for rho in range(1, r):
            B = np.zeros((k, r))
            B[i, rho] = 1.0
            B[i, 0] = -dims[rho] / dims[0]
            out.append(B)
    return ThetaSpace(k * (r - 1), np.array(out).reshape(k * (r - 1), k, r))


def _dims(x) -> tuple[int, ...]:
    if isinstance(x, FiniteMatrixGroup):
        return character_table(x).degrees
    if isinstance(x, CharacterTable):
        return x.degrees
    return tuple(int(d) for d in x)


# --- walls ------------------------------------------------------------------

def subsum_walls(dims) -> list[tuple[int, ...]]:
    """Primitive normals Σ_{ρ≥1}(a_ρ − a_0 dim ρ) θ_ρ from all 0 ≤ a ≤ dim, a ≠ 0, dim."""
    dims = _dims(dims)
    d = np.array(dims, dtype=np.int64)
    if len(d) < 2:
        return []
    A = np.indices(tuple(d + 1)).reshape(len(d), -1).T
    N = A[:, 1:] - A[:, :1] * d[1:]
    g = np.gcd.reduce(np.abs(N), axis=1)
    N = N[g > 0] // g[g > 0, None]
    first = N[np.arange(len(N)), np.argmax(N != 0, axis=1)]
    N = N * np.sign(first)[:, None]
    return [tuple(int(x) for x in row) for row in np.unique(N, axis=0)]


def positive_roots(C: np.ndarray) -> list[tuple[int, ...]]:
    """Positive roots in simple-root coordinates by closing the simple roots under reflections."""
    C = np.asarray(C, dtype=np.int64)
    n = len(C)
    roots = {tuple(int(x) for x in row) for row in np.eye(n, dtype=np.int64)}
    frontier = list(roots)
    while frontier:
        nxt = []
        for a in frontier:
            av = np.array(a)
            for j in range(n):
                b = av - int(av @ C[:, j]) * np.eye(n, dtype=np.int64)[j]
                tb = tuple(int(x) for x in b)
                if tb not in roots and (np.all(b >= 0) or np.all(b <= 0)):
                    roots.add(tb)
                    nxt.append(tb)
                    if len(roots) > 10_000:
                        raise ValueError("root closure does not terminate; not a finite type")
        frontier = nxt
    return sorted(r for r in roots if all(x >= 0 for x in r))


@dataclass(frozen=True)
class WallSystem:
    normals: np.ndarray              # (n_walls, r-1) integer normals used for all tests
    dims: tuple[int, ...]
    source: str                      # "roots" or "subsums"
    root_normals: tuple = ()
    subsum_normals: tuple = ()
    dynkin: str = ""
    mismatch: dict = field(default_factory=dict)

    @property
    def n_walls(self) -> int:
        return len(self.normals)

    def pairings(self, zeta: StabilityParam) -> np.ndarray:
        """(k, n_walls) array of <ζ_i, n>."""
        if zeta.dims != self.dims:
            raise ValueError("parameter and wall system belong to different groups")
        return zeta.reduced @ self.normals.T


def wall_system(g, cartan: CartanData | None = None) -> WallSystem:
    """Sub-sum walls always; for SU(2) groups also the positive roots, which become the walls."""
    if isinstance(g, FiniteMatrixGroup):
        table = character_table(g)
        dims = table.degrees
        su2 = g.dim == 2 and not g.real and np.allclose([np.linalg.det(x) for x in g.elements], 1)
        if su2 and cartan is None and g.order > 1:
            cartan = cartan_matrix(mckay_quiver(g, table))
    else:
        dims = _dims(g)
    subs = subsum_walls(dims)
    if cartan is None or len(dims) < 2:
        normals = np.array(subs, dtype=np.int64) if subs else np.zeros((0, len(dims) - 1), dtype=np.int64)
        return WallSystem(normals, dims, "subsums",
                          subsum_normals=tuple(subs))
    roots = positive_roots(cartan.finite_matrix)
    rs, ss = set(roots), set(subs)
    mismatch = {}
    if rs != ss:
        mismatch = {"roots_not_subsums": sorted(rs - ss), "subsums_not_roots": sorted(ss - rs)}
    return WallSystem(np.array(roots, dtype=np.int64), dims, "roots", tuple(roots), tuple(subs),
                      cartan.dynkin, mismatch)


# --- regularity and chambers -----------------------------------------------

@dataclass(frozen=True)
class Regularity:
    regular: bool
    distance: float
    nearest_wall: int


def is_regular(zeta: StabilityParam, w: WallSystem) -> Regularity:
    """Regular iff every wall sees a nonzero pairing in at least one component."""
    if w.n_walls == 0:
        return Regularity(True, math.inf, -1)
    P = w.pairings(zeta)
    dist = np.linalg.norm(P, axis=0)
    norms = np.linalg.norm(w.normals, axis=1)
    scaled = dist / norms
    i = int(np.argmin(dist))
    tol = WALL_TOL * max(1.0, zeta.norm())
    return Regularity(bool(np.all(scaled > tol)), float(dist[i]), i)


def chamber_signature(zeta: StabilityParam, w: WallSystem, axis: int = 0) -> tuple[int, ...]:
    """Signs of the pairings of one component with each wall; 0 marks "on wall"."""
    p = w.pairings(zeta)[axis]
    tol = WALL_TOL * max(1.0, zeta.norm()) * np.linalg.norm(w.normals, axis=1)
    return tuple(int(np.sign(x)) if abs(x) > t else 0 for x, t in zip(p, tol))


def reflect(zeta: StabilityParam, C: np.ndarray, i: int) -> StabilityParam:
    """Simple reflection (s_i θ)_ρ = θ_ρ − C_{ρi} θ_i on reduced coordinates (i ≥ 1)."""
    red = zeta.reduced.copy()
    Cf = np.asarray(C)
    red = red - np.outer(red[:, i - 1], Cf[:, i - 1])
    return StabilityParam.from_reduced(red, zeta.dims)


def weyl_orbit(zeta: StabilityParam, c: CartanData, max_size: int = 1_000_000) -> list[StabilityParam]:
    C = c.finite_matrix
    n = len(C)

    def key(z):
        return tuple(np.round(z.reduced, 9).ravel() + 0.0)

    orbit = {key(zeta): zeta}
    frontier = [zeta]
    while frontier:
        nxt = []
        for z in frontier:
            for i in range(1, n + 1):
                y = reflect(z, C, i)
                ky = key(y)
                if ky not in orbit:
                    orbit[ky] = y
                    nxt.append(y)
                    if len(orbit) > max_size:
                        raise ValueError("orbit exceeds the size bound")
        frontier = nxt
    return list(orbit.values())


def reflect_normal(n, C: np.ndarray, i: int) -> tuple[int, ...]:
    """Reflection of a root (simple-root coordinates) by s_i."""
    a = np.asarray(n, dtype=np.int64)
    b = a - int(a @ np.asarray(C)[:, i - 1]) * np.eye(len(a), dtype=np.int64)[i - 1]
    return tuple(int(x) for x in b)


# --- paths ------------------------------------------------------------------

class WallEndpointError(ValueError):
    pass


@dataclass(frozen=True)
class WallCrossing:
    t: float
    wall: int
    transversal: bool
    sign_before: int
    sign_after: int


def path_wall_crossings(path, w: WallSystem, times=None) -> list[WallCrossing]:
    """Events along a piecewise-linear path through the given vertices.

    Vertices sit at ``times`` (default: uniform on [0, 1]). On each segment the
    pairing is affine in t, so crossing times are solved in closed form. For
    k = 1 the sign before and after is recorded; a zero at a vertex with the
    same sign on both sides is a tangential touch. For k = 3 an event is a
    simultaneous zero of all components, transversal when the path velocity
    has nonzero pairing there.
    """
    pts = [p if isinstance(p, StabilityParam) else StabilityParam(np.asarray(p), w.dims) for p in path]
    if len(pts) < 2:
        raise ValueError("a path needs at least two vertices")
    ts = np.linspace(0.0, 1.0, len(pts)) if times is None else np.asarray(times, dtype=float)
    if len(ts) != len(pts) or np.any(np.diff(ts) <= 0):
        raise ValueError("times must increase strictly and match the vertices")
    for end in (pts[0], pts[-1]):
        if not is_regular(end, w).regular:
            raise WallEndpointError("path endpoint lies on a wall")
    P = np.array([w.pairings(p) for p in pts])            # (m, k, n_walls)
    scale = max(1.0, max(p.norm() for p in pts)) * np.linalg.norm(w.normals, axis=1)
    tol = WALL_TOL * scale
    k = P.shape[1]
    events: list[WallCrossing] = []
    for j in range(w.n_walls):
        found = []
        for s in range(len(pts) - 1):
            p0, p1 = P[s, :, j], P[s + 1, :, j]
            dp = p1 - p0
            if k == 1:
                a, b = p0[0], p1[0]
                if abs(a) <= tol[j] and abs(b) <= tol[j]:
                    found.append((ts[s], False))
                    continue
                if abs(b) <= tol[j]:
                    found.append((ts[s + 1], None))     # resolved against the next segment
                    continue
                if abs(a) <= tol[j]:
                    continue
                if a * b < 0:
                    u = a / (a - b)
                    found.append((ts[s] + u * (ts[s + 1] - ts[s]), True))
            else:
                dd = float(dp @ dp)
                if dd == 0.0:
                    continue
                u = -float(p0 @ dp) / dd
                if -1e-15 <= u <= 1 + 1e-15 and np.linalg.norm(p0 + u * dp) <= tol[j]:
                    found.append((ts[s] + min(max(u, 0.0), 1.0) * (ts[s + 1] - ts[s]), True))
        seen_t = []
        for t, transversal in found:
            if any(abs(t - t0) <= 1e-12 for t0 in seen_t):
                continue
            seen_t.append(t)
            before = _component_sign(P, ts, j, t - 1e-9)
            after = _component_sign(P, ts, j, t + 1e-9)
            if transversal is None:
                transversal = before * after < 0
            events.append(WallCrossing(float(t), j, bool(transversal), before, after))
    events.sort(key=lambda e: (e.t, e.wall))
    return events


def _component_sign(P: np.ndarray, ts: np.ndarray, j: int, t: float) -> int:
    t = min(max(t, ts[0]), ts[-1])
    s = int(np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2))
    u = (t - ts[s]) / (ts[s + 1] - ts[s])
    v = (1 - u) * P[s, 0, j] + u * P[s + 1, 0, j]
    return int(np.sign(v))


# --- integral characters ----------------------------------------------------

def _dets(g: FiniteMatrixGroup, table: CharacterTable) -> np.ndarray:
    """det ρ(g) per irreducible and class, from power sums χ_ρ(g^k) via Newton's identities."""
    lab = g.class_of
    r = len(table.rows)
    out = np.zeros((r, r), dtype=complex)
    for c, members in enumerate(g.classes):
        x = members[0]
        powers = [g.identity]
        for _ in range(max(table.degrees)):
            powers.append(int(g.table[powers[-1], x]))
        for i, d in enumerate(table.degrees):
            p = [table.rows[i, lab[powers[m]]] for m in range(1, d + 1)]
            e = [1.0 + 0j]
            for m in range(1, d + 1):
                e.append(sum((-1) ** (j - 1) * e[m - j] * p[j - 1] for j in range(1, m + 1)) / m)
            out[i, c] = e[d]
    return out


def integral_character(zeta: StabilityParam, g: FiniteMatrixGroup,
                       table: CharacterTable | None = None) -> np.ndarray:
    """χ_ζ on each class: Π_ρ det(ρ(g))^{θ_ρ} for integer θ (first component)."""
    theta = zeta.values[0]
    ti = np.round(theta)
    if np.max(np.abs(theta - ti)) > 1e-12:
        raise ValueError("integral character needs integer θ values")
    t = table or character_table(g)
    D = _dets(g, t)
    vals = np.ones(D.shape[1], dtype=complex)
    for i, e in enumerate(ti.astype(int)):
        vals *= D[i] ** e
    return vals
