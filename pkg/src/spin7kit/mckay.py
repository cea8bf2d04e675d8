"""Finite matrix groups, character tables, McKay quivers and Cartan data.

Groups are closed numerically from generators: matrices are hashed after
rounding to ``HASH_DECIMALS`` places, which is exact enough for the roots of
unity and golden-ratio entries appearing in the ADE families. Characters
come from Burnside's algorithm (simultaneous eigenvectors of the class
multiplication matrices), then get checked against orthogonality and against
the integrality of tensor-power decompositions of the defining representation.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import networkx as nx
import numpy as np

HASH_DECIMALS = 8
UNITARY_TOL = 1e-9
INTEGRALITY_TOL = 1e-8
MAX_ORDER = 10_000


class GroupError(ValueError):
    pass


class CharacterTableError(RuntimeError):
    pass


def _key(M: np.ndarray) -> bytes:
    R = np.round(np.asarray(M, dtype=complex), HASH_DECIMALS) + (0.0 + 0.0j)
    return R.tobytes()


@dataclass(eq=False)
class FiniteMatrixGroup:
    """A finite group of unitary (or real orthogonal) matrices with its multiplication table."""

    elements: list[np.ndarray]
    name: str = ""
    generators: list[np.ndarray] = field(default_factory=list)
    real: bool = False

    def __post_init__(self):
        lookup = {_key(g): i for i, g in enumerate(self.elements)}
        if len(lookup) != len(self.elements):
            raise GroupError("duplicate elements")
        n = len(self.elements)
        E = np.stack(self.elements)
        table = np.empty((n, n), dtype=np.int64)
        for i in range(n):
            prods = np.einsum("ab,nbc->nac", E[i], E)
            for j in range(n):
                k = lookup.get(_key(prods[j]))
                if k is None:
                    raise GroupError(f"{self.name or 'group'} is not closed under multiplication")
                table[i, j] = k
        self.table = table
        self._lookup = lookup
        eye = np.eye(E.shape[1])
        self.identity = lookup.get(_key(eye))
        if self.identity is None:
            raise GroupError("identity missing")
        self.inverse = np.argmax(table == self.identity, axis=1)
        if not np.all(table[np.arange(n), self.inverse] == self.identity):
            raise GroupError("some element has no inverse")

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def index_of(self, M) -> int:
        i = self._lookup.get(_key(M))
        if i is None:
            raise KeyError("matrix is not a group element")
        return i

    def verify_axioms(self) -> bool:
        """Exhaustive associativity plus identity and inverse laws on the table."""
        t = self.table
        n = self.order
        if not np.all(t[self.identity] == np.arange(n)) or not np.all(t[:, self.identity] == np.arange(n)):
            return False
        # (ab)c = a(bc) for all triples, vectorised over c
        for a in range(n):
            if not np.array_equal(t[t[a]], t[a][t]):
                return False
        return True

    def element_order(self, i: int) -> int:
        k, j = 1, i
        while j != self.identity:
            j = self.table[j, i]
            k += 1
        return k

    @cached_property
    def classes(self) -> list[list[int]]:
        """Conjugacy classes as sorted index lists; identity class first, then by first element."""
        n = self.order
        seen = np.zeros(n, dtype=bool)
        out = []
        for i in range(n):
            if seen[i]:
                continue
            cls = sorted({int(self.table[self.table[g, i], self.inverse[g]]) for g in range(n)})
            seen[cls] = True
            out.append(cls)
        out.sort(key=lambda c: (self.identity not in c, c[0]))
        return out

    @cached_property
    def class_of(self) -> np.ndarray:
        lab = np.empty(self.order, dtype=np.int64)
        for c, members in enumerate(self.classes):
            lab[members] = c
        return lab

    def traces(self) -> np.ndarray:
        """Character of the defining representation, one value per class."""
        return np.array([np.trace(self.elements[c[0]]) for c in self.classes], dtype=complex)

    def conjugate_by(self, U: np.ndarray) -> "FiniteMatrixGroup":
        Ui = np.linalg.inv(U)
        return FiniteMatrixGroup([U @ g @ Ui for g in self.elements], name=self.name + "^U",
                                 generators=[U @ g @ Ui for g in self.generators], real=self.real)


def close_group(generators, name: str = "", max_order: int = MAX_ORDER, real: bool = False) -> FiniteMatrixGroup:
    gens = [np.asarray(g, dtype=float if real else complex) for g in generators]
    if not gens:
        raise GroupError("need at least one generator")
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise GroupError("generators must be square matrices of one size")
        if np.max(np.abs(g.conj().T @ g - np.eye(d))) > UNITARY_TOL:
            raise GroupError("generator is not unitary")
    eye = np.eye(d, dtype=gens[0].dtype)
    elements = [eye]
    seen = {_key(eye)}
    frontier = [eye]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x @ g
                k = _key(y)
                if k not in seen:
                    seen.add(k)
                    elements.append(y)
                    nxt.append(y)
                    if len(elements) > max_order:
                        raise GroupError(f"closure exceeded {max_order} elements; group infinite or too large")
        frontier = nxt
    return FiniteMatrixGroup(elements, name=name, generators=gens, real=real)


# --- catalogue -------------------------------------------------------------

def _root(n: int, k: int = 1) -> complex:
    return cmath.exp(2j * math.pi * k / n)


def quaternion(a, b, c, d) -> np.ndarray:
    """a + bi + cj + dk as an SU(2) matrix (left multiplication on H = C ⊕ Cj)."""
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def su2_cyclic(n: int) -> FiniteMatrixGroup:
    if n < 1:
        raise GroupError("cyclic order must be positive")
    w = _root(n)
    return close_group([np.diag([w, w.conjugate()])], name=f"su2.cyclic:{n}")


def su2_binary_dihedral(n: int) -> FiniteMatrixGroup:
    """Binary dihedral group of order 4n (n ≥ 2); n = 2 is the quaternion group of order 8."""
    if n < 2:
        raise GroupError("binary dihedral needs n >= 2")
    w = _root(2 * n)
    return close_group([np.diag([w, w.conjugate()]), quaternion(0, 0, 1, 0)], name=f"su2.bindih:{n}")


def su2_binary_tetrahedral() -> FiniteMatrixGroup:
    return close_group([quaternion(0, 1, 0, 0), quaternion(0, 0, 1, 0), quaternion(.5, .5, .5, .5)],
                       name="su2.bintet")


def su2_binary_octahedral() -> FiniteMatrixGroup:
    s = 1 / math.sqrt(2)
    return close_group([quaternion(.5, .5, .5, .5), quaternion(s, s, 0, 0)], name="su2.binoct")


def su2_binary_icosahedral() -> FiniteMatrixGroup:
    phi = (1 + math.sqrt(5)) / 2
    return close_group([quaternion(.5, .5, .5, .5), quaternion(phi / 2, 1 / (2 * phi), .5, 0)],
                       name="su2.binico")


def su3_cyclic(n: int, weights) -> FiniteMatrixGroup:
    a, b, c = (int(w) for w in weights)
    if (a + b + c) % n:
        raise GroupError(f"weights {a},{b},{c} do not sum to 0 mod {n}; not in SU(3)")
    return close_group([np.diag([_root(n, a), _root(n, b), _root(n, c)])], name=f"su3.cyclic:{n}:{a},{b},{c}")


def realify(A: np.ndarray, antilinear: bool = False) -> np.ndarray:
    """Real 2d×2d matrix of z ↦ A z (or A z̄) with z_k = x_{2k} + i x_{2k+1}."""
    d = A.shape[0]
    R = np.zeros((2 * d, 2 * d))
    R[0::2, 0::2] = A.real
    R[0::2, 1::2] = -A.imag
    R[1::2, 0::2] = A.imag
    R[1::2, 1::2] = A.real
    if antilinear:
        R = R @ np.diag([1.0, -1.0] * d)
    return R


def spin7_gamma(n: int) -> FiniteMatrixGroup:
    """⟨α, β, γ⟩ on C⁴ = R⁸ with α = diag(ζ, ζ̄, ζ, ζ̄), β = i·1 and the
    antilinear γ(z) = (z̄₂, −z̄₁, z̄₄, −z̄₃); order 8n for odd n."""
    if n < 1:
        raise GroupError("n must be positive")
    w = _root(n)
    alpha = realify(np.diag([w, w.conjugate(), w, w.conjugate()]))
    beta = realify(1j * np.eye(4))
    J = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=complex)
    gamma = realify(J, antilinear=True)
    return close_group([alpha, beta, gamma], name=f"spin7.gamma_n:{n}", real=True)


def trivial_group(d: int = 2) -> FiniteMatrixGroup:
    return FiniteMatrixGroup([np.eye(d, dtype=complex)], name="trivial")


DESCRIPTOR_HELP = """\
su2.cyclic:N          Z_N in SU(2), generator diag(w, w^-1)
su2.bindih:N          binary dihedral group of order 4N (N >= 2)
su2.bintet|binoct|binico   binary polyhedral groups (orders 24, 48, 120)
su3.cyclic:N:A,B,C    Z_N in SU(3), generator diag(w^A, w^B, w^C), A+B+C = 0 mod N
spin7.gamma_n:N       the order-8N group <alpha, beta, gamma> acting on R^8
trivial               the trivial subgroup of SU(2)"""


def build_group(spec: str) -> FiniteMatrixGroup:
    """Parse a compact descriptor (see ``DESCRIPTOR_HELP``) and close the group."""
    s = spec.strip().lower()
    parts = s.split(":")
    head = parts[0]
    try:
        if head in ("trivial", "su2.trivial"):
            return trivial_group()
        if head == "su2.cyclic":
            return su2_cyclic(int(parts[1]))
        if head == "su2.bindih":
            return su2_binary_dihedral(int(parts[1]))
        if head in ("su2.bintet", "su2.tet"):
            return su2_binary_tetrahedral()
        if head in ("su2.binoct", "su2.oct"):
            return su2_binary_octahedral()
        if head in ("su2.binico", "su2.ico"):
            return su2_binary_icosahedral()
        if head == "su3.cyclic":
            return su3_cyclic(int(parts[1]), parts[2].split(","))
        if head == "spin7.gamma_n":
            return spin7_gamma(int(parts[1]))
    except (IndexError, ValueError) as exc:
        if isinstance(exc, GroupError):
            raise
        raise GroupError(f"malformed group descriptor {spec!r}") from exc
    raise GroupError(f"unknown group descriptor {spec!r}")


# --- characters ------------------------------------------------------------

@dataclass(frozen=True)
class CharacterTable:
    """rows[i, c] = χ_i on class c; trivial character first."""

    rows: np.ndarray
    degrees: tuple[int, ...]
    class_sizes: tuple[int, ...]

    @property
    def order(self) -> int:
        return sum(self.class_sizes)

    def inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        return complex(np.sum(np.asarray(self.class_sizes) * a * np.conj(b)) / self.order)

    def decompose(self, chi: np.ndarray) -> np.ndarray:
        """Multiplicities of a class function; raises if they are not integers."""
        m = np.array([self.inner(chi, r) for r in self.rows])
        mi = np.round(m.real)
        if np.max(np.abs(m - mi), initial=0.0) > INTEGRALITY_TOL:
            raise CharacterTableError(f"non-integral multiplicities {m}")
        return mi.astype(np.int64)

    def orthogonality_error(self) -> float:
        G = np.array([[self.inner(a, b) for b in self.rows] for a in self.rows])
        return float(np.max(np.abs(G - np.eye(len(self.rows)))))


def _class_constants(g: FiniteMatrixGroup) -> np.ndarray:
    """c[j, k, l] = #{(x, y) ∈ C_j × C_k : xy = rep(C_l)}."""
    cls = g.classes
    lab = g.class_of
    r = len(cls)
    c = np.zeros((r, r, r))
    for j, Cj in enumerate(cls):
        for k, Ck in enumerate(cls):
            prods = g.table[np.ix_(Cj, Ck)].ravel()
            counts = np.bincount(lab[prods], minlength=r)
            c[j, k] = counts / np.array([len(C) for C in cls])
    return c


def character_table(g: FiniteMatrixGroup, seed: int = 0) -> CharacterTable:
    cls = g.classes
    r = len(cls)
    sizes = np.array([len(C) for C in cls])
    c = _class_constants(g)
    rng = np.random.default_rng(seed)
    t = rng.normal(size=r) + 1j * rng.normal(size=r)
    M = np.einsum("j,jkl->kl", t, c)
    w, V = np.linalg.eig(M)            # Σ_l c_{jkl} ω(C_l) = ω(C_j) ω(C_k)
    gaps = np.abs(w[:, None] - w[None, :]) + np.eye(r)
    if np.min(gaps) < 1e-8 * max(1.0, np.max(np.abs(w))):
        raise CharacterTableError("class-algebra eigenvalues not separated; retry with another seed")
    rows, degs = [], []
    for i in range(r):
        v = V[:, i] / V[0, i]          # identity class is first, ω(C_1) = 1
        deg2 = g.order / np.sum(np.abs(v) ** 2 / sizes)
        deg = int(round(math.sqrt(deg2.real)))
        if abs(deg * deg - deg2) > 1e-6 * g.order:
            raise CharacterTableError(f"degree {math.sqrt(abs(deg2))} is not an integer")
        rows.append(deg * v / sizes)
        degs.append(deg)
    rows = np.array(rows)
    gen_cls = [g.class_of[g.index_of(x)] for x in g.generators] if g.generators else []

    def sort_key(i):
        phases = tuple(round((cmath.phase(rows[i, c] / degs[i]) if abs(rows[i, c]) > 1e-9 else 0.0)
                             % (2 * math.pi), 6) for c in gen_cls)
        trivial = np.allclose(rows[i], 1)
        return (not trivial, degs[i], phases, tuple(np.round(rows[i].real, 6)))

    order = sorted(range(r), key=sort_key)
    rows = rows[order]
    degs = tuple(degs[i] for i in order)
    table = CharacterTable(rows=rows, degrees=degs, class_sizes=tuple(int(s) for s in sizes))
    if sum(d * d for d in degs) != g.order:
        raise CharacterTableError("degrees violate Σ d² = |G|")
    if table.orthogonality_error() > 1e-10:
        raise CharacterTableError(f"rows not orthonormal ({table.orthogonality_error():.2e})")
    return table


def tensor_power_check(g: FiniteMatrixGroup, t: CharacterTable, max_power: int = 12) -> dict:
    """Decompose χ_V^k; every multiplicity must be integral and, for a faithful V,
    every irreducible must occur in some power."""
    chi = g.traces()
    seen = np.zeros(len(t.rows), dtype=bool)
    power = np.ones_like(chi)
    for k in range(max_power + 1):
        seen |= t.decompose(power) > 0
        power = power * chi
        if seen.all():
            return {"integral": True, "all_irreducibles_seen": True, "power": k}
    return {"integral": True, "all_irreducibles_seen": bool(seen.all()), "power": max_power}


# --- quivers and Cartan data -----------------------------------------------

@dataclass(frozen=True)
class McKayQuiver:
    adjacency: np.ndarray
    dims: tuple[int, ...]
    representation: str = "defining"

    @property
    def n_vertices(self) -> int:
        return len(self.dims)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.adjacency, self.adjacency.T))

    def loops(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(np.diag(self.adjacency))]


def mckay_quiver(g: FiniteMatrixGroup, table: CharacterTable | None = None, chi_v=None) -> McKayQuiver:
    """a_{ρσ} = <χ_V χ_ρ, χ_σ>; V defaults to the defining matrix representation."""
    t = table or character_table(g)
    chi = g.traces() if chi_v is None else np.asarray(chi_v, dtype=complex)
    r = len(t.rows)
    A = np.zeros((r, r), dtype=np.int64)
    for i in range(r):
        A[i] = t.decompose(chi * t.rows[i])
    dims = tuple(t.degrees)
    d = np.array(dims)
    if not np.array_equal(A @ d, int(round(chi[0].real)) * d):
        raise CharacterTableError("dimension bookkeeping Σ a_{ρσ} dim σ = dim V dim ρ fails")
    return McKayQuiver(A, dims, g.name or "defining")


def _weighted_graph(A: np.ndarray) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(len(A)))
    for i in range(len(A)):
        for j in range(i + 1, len(A)):
            if A[i, j]:
                G.add_edge(i, j, w=int(A[i, j]))
    return G


def _path(n):
    return [(i, i + 1) for i in range(n - 1)]


def extended_catalogue(max_rank: int = 24) -> dict[str, nx.Graph]:
    cat = {}
    g = nx.Graph()
    g.add_edge(0, 1, w=2)
    cat["A~1"] = g
    for n in range(2, max_rank + 1):
        cat[f"A~{n}"] = nx.cycle_graph(n + 1)
    for n in range(4, max_rank + 1):
        # D~n: path of n-1 vertices with extra leaves at the second and second-to-last
        g = nx.Graph(_path(n - 1) + [(1, n - 1), (n - 3, n)])
        cat[f"D~{n}"] = g
    cat["E~6"] = nx.Graph(_path(5) + [(2, 5), (5, 6)])
    cat["E~7"] = nx.Graph(_path(7) + [(3, 7)])
    cat["E~8"] = nx.Graph(_path(8) + [(2, 8)])
    for G in cat.values():
        for u, v in G.edges:
            G[u][v].setdefault("w", 1)
    return cat


def finite_catalogue(max_rank: int = 24) -> dict[str, nx.Graph]:
    cat = {}
    for n in range(1, max_rank + 1):
        cat[f"A{n}"] = nx.path_graph(n)
    for n in range(4, max_rank + 1):
        g = nx.Graph(_path(n - 1))
        g.add_edge(n - 3, n - 1)
        cat[f"D{n}"] = g
    cat["E6"] = nx.Graph(_path(5) + [(2, 5)])
    cat["E7"] = nx.Graph(_path(6) + [(2, 6)])
    cat["E8"] = nx.Graph(_path(7) + [(4, 7)])
    for G in cat.values():
        for u, v in G.edges:
            G[u][v]["w"] = 1
    return cat


def identify_dynkin(A: np.ndarray, extended: bool = True) -> str:
    if np.any(np.diag(A)) or not np.array_equal(A, A.T):
        return "non-ADE"
    G = _weighted_graph(A)
    n = len(A) - 1 if extended else len(A)
    cat = extended_catalogue(max(n, 1)) if extended else finite_catalogue(max(n, 1))
    em = nx.algorithms.isomorphism.numerical_edge_match("w", 1)
    for name, H in cat.items():
        if H.number_of_nodes() == G.number_of_nodes() and H.number_of_edges() == G.number_of_edges() \
                and nx.is_isomorphic(G, H, edge_match=em):
            return name
    return "non-ADE"


def _leading_minors(M: np.ndarray) -> list[Fraction]:
    """Exact leading principal minors by fraction-valued Gaussian elimination."""
    n = len(M)
    a = [[Fraction(int(x)) for x in row] for row in M]
    minors = []
    det = Fraction(1)
    for k in range(n):
        if a[k][k] == 0:
            minors.extend([Fraction(0)] * (n - k))
            return minors
        det *= a[k][k]
        minors.append(det)
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return minors


@dataclass(frozen=True)
class CartanData:
    matrix: np.ndarray
    dynkin: str
    kernel: tuple[int, ...]
    finite_dynkin: str
    psd_certificate: tuple[Fraction, ...]

    @property
    def is_affine_ade(self) -> bool:
        return self.dynkin != "non-ADE"

    @property
    def finite_matrix(self) -> np.ndarray:
        """C̄ with the trivial vertex (index 0) deleted."""
        return self.matrix[1:, 1:]


def cartan_matrix(q: McKayQuiver) -> CartanData:
    """C̄ = 2I − A with an exact certificate that it is PSD with kernel spanned by dims."""
    C = 2 * np.eye(q.n_vertices, dtype=np.int64) - q.adjacency
    dyn = identify_dynkin(q.adjacency, extended=True)
    d = np.array(q.dims)
    in_kernel = not np.any(C @ d)
    minors = tuple(_leading_minors(C[1:, 1:])) if q.n_vertices > 1 else ()
    certified = in_kernel and all(m > 0 for m in minors) and q.is_symmetric()
    fin = identify_dynkin(q.adjacency[1:, 1:], extended=False) if q.n_vertices > 1 else "trivial"
    return CartanData(C, dyn, tuple(int(x) for x in d) if certified else (), fin, minors)


# --- ages and freeness -------------------------------------------------------

def age(M: np.ndarray, order: int | None = None) -> Fraction:
    """Σ θ_i for eigenvalues e^{2πiθ_i}, θ_i ∈ [0, 1), reconstructed as exact rationals."""
    M = np.asarray(M)
    if order is None:
        order, P = 1, M.copy()
        while not np.allclose(P, np.eye(len(M)), atol=1e-9):
            P = P @ M
            order += 1
            if order > MAX_ORDER:
                raise GroupError("element order exceeds the search bound")
    total = Fraction(0)
    for lam in np.linalg.eigvals(M):
        th = (cmath.phase(lam) / (2 * math.pi)) % 1.0
        f = Fraction(round(th * order), order)
        if f == 1:
            f = Fraction(0)
        total += f
    return total


@dataclass(frozen=True)
class ClassAge:
    index: int
    representative: np.ndarray
    age: Fraction
    size: int


def conjugacy_age_spectrum(g: FiniteMatrixGroup) -> list[ClassAge]:
    out = []
    for c, members in enumerate(g.classes):
        rep = members[0]
        out.append(ClassAge(c, g.elements[rep], age(g.elements[rep], g.element_order(rep)), len(members)))
    return out


@dataclass(frozen=True)
class FreenessResult:
    free: bool
    witness: np.ndarray | None = None


def freeness_check(g: FiniteMatrixGroup, m: int | None = None, tol: float = 1e-8) -> FreenessResult:
    """Free on the complement of the origin iff no nontrivial element fixes a nonzero vector."""
    if m is not None and m not in (g.dim, 2 * g.dim if not g.real else g.dim):
        raise GroupError(f"group acts on dimension {g.dim}, not {m}")
    for i, M in enumerate(g.elements):
        if i == g.identity:
            continue
        if np.min(np.abs(np.linalg.eigvals(M) - 1)) < tol:
            return FreenessResult(False, M)
    return FreenessResult(True)
