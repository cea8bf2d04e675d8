"""Graded Betti bookkeeping for depth-one orbifolds and their resolutions.

Everything here is exact: Betti numbers are ints, ages and Â are Fractions.
Ages come from the isotropy group via ``mckay`` (reconstructed as rationals).

A stratum S of codimension m with isotropy Γ ⊂ SU(m/2) contributes the
vertical cohomology H^{2k}(N_ζ/S), of rank #{classes of age k}, as a local
system over S. With trivial monodromy the twisted Betti numbers are
b_p(S) · rank; otherwise they are supplied by the caller.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import jsonschema

from .mckay import GroupError, build_group, conjugacy_age_spectrum, freeness_check

SCHEMA_ID = "spin7kit.orbifold/1"


class CohomologyDataError(ValueError):
    """Inconsistent or missing cohomological input."""


class HypothesisError(CohomologyDataError):
    """A statement's hypotheses do not hold for the given data."""


def _shift(b: list[int], k: int, n: int) -> list[int]:
    out = [0] * (n + 1)
    for d, v in enumerate(b):
        if v and not 0 <= d + k <= n:
            raise CohomologyDataError(f"degree {d} shifted by {k} leaves 0..{n}")
        if v:
            out[d + k] += v
    return out


def _add(*bs: list[int]) -> list[int]:
    n = max(len(b) for b in bs)
    return [sum(b[i] if i < len(b) else 0 for b in bs) for i in range(n)]


@dataclass(frozen=True)
class GradedBetti:
    b: tuple[int, ...]
    split: tuple[int, int] | None = None
    closed_oriented: bool = False

    def __post_init__(self):
        b = tuple(int(v) for v in self.b)
        if any(v < 0 for v in b):
            raise CohomologyDataError("Betti numbers must be nonnegative")
        object.__setattr__(self, "b", b)
        if self.split is not None:
            sp = tuple(int(v) for v in self.split)
            if self.n != 8:
                raise CohomologyDataError("a (b4+, b4-) split needs an 8-dimensional space")
            if sum(sp) != b[4]:
                raise CohomologyDataError(f"b4+ + b4- = {sum(sp)} but b4 = {b[4]}")
            object.__setattr__(self, "split", sp)
        if self.closed_oriented:
            bad = [k for k in range(len(b)) if b[k] != b[self.n - k]]
            if bad:
                raise CohomologyDataError(f"Poincaré duality fails in degrees {bad}")

    @property
    def n(self) -> int:
        return len(self.b) - 1

    def __getitem__(self, k: int) -> int:
        return self.b[k] if 0 <= k < len(self.b) else 0

    @property
    def euler(self) -> int:
        return sum((-1) ** k * v for k, v in enumerate(self.b))


@lru_cache(maxsize=None)
def _class_ages(isotropy: str) -> tuple[tuple[Fraction, int], ...]:
    """(age, class size) per conjugacy class, identity first."""
    g = build_group(isotropy)
    scale = Fraction(1, 2) if g.real else Fraction(1)   # real reps: halve the age of the complexification
    return tuple((c.age * scale, c.size) for c in conjugacy_age_spectrum(g))


@lru_cache(maxsize=None)
def _is_free(isotropy: str) -> bool:
    return freeness_check(build_group(isotropy)).free


@dataclass(frozen=True)
class StratumSpec:
    """A singular stratum. ``twisted`` maps vertical degree q to b_•(S; H^q(N_ζ/S))."""

    codim: int
    isotropy: str
    betti: GradedBetti
    label: str = "S"
    twisted: dict[int, tuple[int, ...]] | None = None
    d3_vanishes: bool | None = None
    vertical: str = "asd"

    def __post_init__(self):
        if self.codim not in (4, 6, 7, 8):
            raise CohomologyDataError(f"codimension {self.codim} not in (4, 6, 7, 8)")
        try:
            self.ages
        except GroupError as e:
            raise CohomologyDataError(f"stratum {self.label}: {e}") from e
        if self.twisted is not None:
            tw = {int(q): tuple(int(v) for v in b) for q, b in self.twisted.items()}
            for q, b in tw.items():
                if len(b) > self.dim + 1:
                    raise CohomologyDataError(f"stratum {self.label}: twisted Betti in degree {q} too long")
            object.__setattr__(self, "twisted", tw)

    @property
    def dim(self) -> int:
        return self.betti.n

    @property
    def ages(self) -> tuple[tuple[Fraction, int], ...]:
        return _class_ages(self.isotropy)

    @property
    def type_a(self) -> bool:
        return _is_free(self.isotropy)

    @property
    def n_classes(self) -> int:
        return len(self.ages)

    @property
    def cartan_rank(self) -> int:
        return self.n_classes - 1

    def vertical_ranks(self) -> dict[int, int]:
        """Rank of H^q(N_ζ/S) for q > 0: classes of age k sit in degree 2k."""
        out: dict[int, int] = {}
        for a, _ in self.ages[1:]:
            if a.denominator != 1:
                raise CohomologyDataError(f"stratum {self.label}: non-integral age {a}")
            q = 2 * int(a)
            out[q] = out.get(q, 0) + 1
        return out

    def twisted_betti(self) -> dict[int, list[int]]:
        if self.twisted is not None:
            missing = set(self.vertical_ranks()) - set(self.twisted)
            if missing:
                raise CohomologyDataError(f"stratum {self.label}: twisted Betti missing for degrees {sorted(missing)}")
            return {q: list(b) + [0] * (self.dim + 1 - len(b)) for q, b in self.twisted.items()}
        return {q: [r * v for v in self.betti.b] for q, r in self.vertical_ranks().items()}

    def age_duality(self) -> bool:
        """age(g) + age(g⁻¹) = m/2 for every nontrivial class (free actions)."""
        g = build_group(self.isotropy)
        scale = Fraction(1, 2) if g.real else Fraction(1)
        ages = {}
        for c in conjugacy_age_spectrum(g):
            ages[c.index] = c.age * scale
        half = Fraction(self.codim, 2) * (Fraction(1, 2) if g.real else 1)
        for i in range(g.order):
            if i == g.identity:
                continue
            if ages[g.class_of[i]] + ages[g.class_of[g.inverse[i]]] != half:
                return False
        return True


@dataclass(frozen=True)
class OrbifoldSpec:
    ambient: GradedBetti | None
    strata: tuple[StratumSpec, ...] = ()
    dimension: int = 8
    name: str = ""
    closed: bool = True
    oriented: bool = True
    simply_connected: bool = False
    depth_one: bool = True

    def __post_init__(self):
        if not self.depth_one:
            raise CohomologyDataError("strata must be disjoint and of depth one")
        if self.ambient is not None and self.ambient.n != self.dimension:
            raise CohomologyDataError(f"ambient Betti has top degree {self.ambient.n}, not {self.dimension}")
        for s in self.strata:
            if s.dim != self.dimension - s.codim:
                raise CohomologyDataError(
                    f"stratum {s.label}: dim {s.dim} + codim {s.codim} != {self.dimension}")

    def require_ambient(self) -> GradedBetti:
        if self.ambient is None:
            raise CohomologyDataError("ambient Betti numbers not supplied")
        return self.ambient


# -- inertia and Chen–Ruan ------------------------------------------------------------


@dataclass(frozen=True)
class Sector:
    label: str
    conjugacy_class: int
    age: Fraction
    betti: tuple[int, ...]


def _require_type_a(spec: OrbifoldSpec) -> None:
    for s in spec.strata:
        if not s.type_a:
            raise HypothesisError(f"stratum {s.label}: isotropy {s.isotropy} does not act freely on the normal sphere")


def inertia_strata(spec: OrbifoldSpec) -> list[Sector]:
    """Untwisted sector plus one sector per nontrivial class per stratum.

    With user-supplied (twisted) local systems the classes of one age are
    reported together, since monodromy may permute them.
    """
    _require_type_a(spec)
    out = [Sector("X", 0, Fraction(0), spec.ambient.b if spec.ambient else ())]
    for s in spec.strata:
        if s.twisted is None:
            for c, (a, _) in enumerate(s.ages):
                if c:
                    out.append(Sector(f"{s.label}/({c})", c, a, s.betti.b))
        else:
            for q, b in sorted(s.twisted_betti().items()):
                out.append(Sector(f"{s.label}/age{q // 2}", -1, Fraction(q, 2), tuple(b)))
    return out


def stratum_cr_contribution(s: StratumSpec, n: int) -> list[int]:
    out = [0] * (n + 1)
    for q, b in s.twisted_betti().items():
        out = _add(out, _shift(b, q, n))
    return out


def chen_ruan(spec: OrbifoldSpec) -> GradedBetti:
    """H^k_CR = b_k(X) + Σ_S Σ_(g)≠1 b_{k − 2 age(g)}(sector)."""
    _require_type_a(spec)
    amb = spec.require_ambient()
    n = spec.dimension
    b = list(amb.b)
    for s in spec.strata:
        b = _add(b, stratum_cr_contribution(s, n))
    return GradedBetti(b)


# -- spectral sequence and resolution ------------------------------------------------


@dataclass(frozen=True)
class E2Page:
    table: tuple[tuple[int, ...], ...]          # table[p][q]
    collapses: bool | None                      # None: not forced either way
    reason: str

    def totals(self) -> list[int]:
        P, Q = len(self.table), len(self.table[0])
        out = [0] * (P + Q - 1)
        for p in range(P):
            for q in range(Q):
                out[p + q] += self.table[p][q]
        return out


def leray_serre_e2(s: StratumSpec) -> E2Page:
    """E₂^{p,q} = b_p(S; H^q(N_ζ/S)) for the fibre profile R[0] ⊕ even-degree local systems."""
    if s.codim not in (4, 6):
        raise HypothesisError(f"stratum {s.label}: no fibre cohomology model in codimension {s.codim}")
    g = build_group(s.isotropy)
    if g.real or g.dim != s.codim // 2:
        raise HypothesisError(f"stratum {s.label}: isotropy must be a subgroup of SU({s.codim // 2})")
    m, d = s.codim, s.dim
    tw = s.twisted_betti()
    table = [[0] * m for _ in range(d + 1)]
    for p in range(d + 1):
        table[p][0] = s.betti[p]
        for q, b in tw.items():
            if q >= m:
                raise CohomologyDataError(f"vertical degree {q} outside the fibre range")
            table[p][q] = b[p]
    if m == 6:
        collapses, why = True, "odd rows vanish and higher differentials exceed dim S"
    else:
        # the only possible differential is d: E^{p,2} -> E^{p+3,0}
        blocked = all(table[p][2] == 0 or p + 3 > d or table[p + 3][0] == 0 for p in range(d + 1))
        if blocked:
            collapses, why = True, "every d^{3,-2} has zero source or target"
        elif s.d3_vanishes is not None:
            collapses, why = bool(s.d3_vanishes), "d^{3,-2} vanishing supplied with the stratum"
        else:
            collapses, why = None, "d^{3,-2} not forced to vanish; supply d3_vanishes"
    return E2Page(tuple(tuple(r) for r in table), collapses, why)


def fibre_total_betti(s: StratumSpec) -> list[int]:
    page = leray_serre_e2(s)
    if page.collapses is not True:
        raise CohomologyDataError(f"stratum {s.label}: {page.reason}")
    return page.totals()[: s.dim + s.codim + 1]


def resolution_betti(spec: OrbifoldSpec, fibre_betti: dict[str, list[int]] | None = None) -> GradedBetti:
    """b_k(X_ζ) = b_k(X) + Σ_S (b_k(N_ζ) − b_k(S)), with b(N_ζ) from the collapsed E₂ page by default."""
    amb = spec.require_ambient()
    n = spec.dimension
    b = list(amb.b)
    for s in spec.strata:
        nb = list(fibre_betti[s.label]) if fibre_betti and s.label in fibre_betti else fibre_total_betti(s)
        if len(nb) > n + 1:
            if any(nb[n + 1:]):
                raise CohomologyDataError(f"stratum {s.label}: fibre-bundle Betti beyond degree {n}")
            nb = nb[: n + 1]
        b = [x + (nb[k] if k < len(nb) else 0) - s.betti[k] for k, x in enumerate(b)]
        if any(v < 0 for v in b):
            raise CohomologyDataError(f"stratum {s.label}: negative Betti number after resolution")
    return GradedBetti(b)


@dataclass(frozen=True)
class IsentropicReport:
    isentropic: bool
    resolution: tuple[int, ...] | None
    chen_ruan: tuple[int, ...] | None
    deltas: dict[int, int] = field(default_factory=dict)
    branch: str = "comparison"


def isentropic_check(spec: OrbifoldSpec, fibre_betti: dict[str, list[int]] | None = None) -> IsentropicReport:
    """Graded agreement of resolution and Chen–Ruan Betti numbers (codim 4, SU(2) isotropy).

    Strata of codimension m > 4 with SU(m/2) isotropy are isentropic by theorem.
    """
    _require_type_a(spec)
    for s in spec.strata:
        g = build_group(s.isotropy)
        if g.real or g.dim != s.codim // 2:
            raise HypothesisError(f"stratum {s.label}: isotropy is not in SU({s.codim // 2})")
    if spec.strata and all(s.codim > 4 for s in spec.strata) and fibre_betti is None:
        return IsentropicReport(True, None, None, branch="theorem")
    res = resolution_betti(spec, fibre_betti)
    cr = chen_ruan(spec)
    deltas = {k: res[k] - cr[k] for k in range(spec.dimension + 1) if res[k] != cr[k]}
    return IsentropicReport(not deltas, res.b, cr.b, deltas)


# -- index-theoretic invariants ------------------------------------------------------


def ahat_genus(b: GradedBetti) -> Fraction:
    """24 Â = −1 + b1 − b2 + b3 + b4⁺ − 2 b4⁻."""
    if b.split is None:
        raise CohomologyDataError("Â needs the (b4+, b4-) split")
    bp, bm = b.split
    return Fraction(-1 + b[1] - b[2] + b[3] + bp - 2 * bm, 24)


HOLONOMY = {1: "Spin(7)", 2: "SU(4)", 3: "Sp(2)", 4: "Spin(4)"}


@dataclass(frozen=True)
class HolonomyLabel:
    label: str
    simply_connected: bool | None


def holonomy_class(ahat: Fraction, b: GradedBetti | None = None) -> HolonomyLabel:
    if Fraction(ahat).denominator != 1:
        raise CohomologyDataError(f"Â = {ahat} is not an integer")
    a = int(ahat)
    if a in HOLONOMY:
        return HolonomyLabel(HOLONOMY[a], True if a == 1 else None)
    return HolonomyLabel("indeterminate", None)


def moduli_dimension(ahat: Fraction, b: GradedBetti) -> int:
    """Â + b1 + b4⁻."""
    if Fraction(ahat).denominator != 1:
        raise CohomologyDataError(f"Â = {ahat} is not an integer")
    if b.split is None:
        raise CohomologyDataError("moduli dimension needs the (b4+, b4-) split")
    return int(ahat) + b[1] + b.split[1]


@dataclass(frozen=True)
class HolonomyInheritance:
    holds: bool
    beta1: int
    beta2_7: int
    notes: tuple[str, ...] = ()


def full_holonomy_resolution_check(spec: OrbifoldSpec) -> HolonomyInheritance:
    """β₁ and β₂⁷ of every codim-4 fibre vanish, so holonomy Spin(7) is inherited."""
    _require_type_a(spec)
    beta1 = beta27 = 0
    notes = []
    for s in spec.strata:
        if s.codim != 4:
            raise HypothesisError(f"stratum {s.label}: codimension {s.codim} is outside the statement")
        if s.vertical != "asd":
            raise HypothesisError(f"stratum {s.label}: vertical cohomology must be anti-self-dual 2-forms")
        ranks = s.vertical_ranks()
        if set(ranks) - {2}:
            raise HypothesisError(f"stratum {s.label}: vertical cohomology outside degree 2")
        page = leray_serre_e2(s)
        # β_1 = Σ_{p+q=1} E₂^{p,q} − b_1(S) = E₂^{0,1}; anti-self-dual classes add nothing to β₂⁷
        beta1 += page.table[0][1]
        notes.append(f"{s.label}: vertical H^1 = 0, H^2 = H^2_- of rank {ranks.get(2, 0)}")
    return HolonomyInheritance(beta1 == 0 and beta27 == 0, beta1, beta27, tuple(notes))


# -- JSON -------------------------------------------------------------------------------

_BETTI = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}

ORBIFOLD_SCHEMA = {
    "type": "object",
    "required": ["schema", "dimension", "ambient", "strata"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "dimension": {"type": "integer", "minimum": 1},
        "ambient": {
            "type": "object",
            "additionalProperties": False,
            "required": ["betti"],
            "properties": {
                "betti": {"oneOf": [_BETTI, {"type": "null"}]},
                "split": {"oneOf": [{"type": "array", "items": {"type": "integer", "minimum": 0},
                                     "minItems": 2, "maxItems": 2}, {"type": "null"}]},
            },
        },
        "flags": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "boolean"} for k in
                           ("closed", "oriented", "simply_connected", "depth_one")},
        },
        "strata": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["label", "codim", "isotropy", "betti"],
                "properties": {
                    "label": {"type": "string"},
                    "codim": {"enum": [4, 6, 7, 8]},
                    "isotropy": {"type": "string"},
                    "betti": _BETTI,
                    "copies": {"type": "integer", "minimum": 1},
                    "monodromy": {"enum": ["trivial", "twisted"]},
                    "twisted_betti": {"oneOf": [
                        {"type": "object", "patternProperties": {"^[0-9]+$": _BETTI},
                         "additionalProperties": False},
                        {"type": "null"}]},
                    "d3_vanishes": {"type": ["boolean", "null"]},
                    "vertical": {"enum": ["asd", "other"]},
                    "note": {"type": "string"},
                },
            },
        },
    },
}


class SchemaError(CohomologyDataError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def spec_from_dict(obj: dict) -> OrbifoldSpec:
    errors = sorted(jsonschema.Draft202012Validator(ORBIFOLD_SCHEMA).iter_errors(obj),
                    key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise SchemaError(_pointer(e.absolute_path), e.message)
    flags = {"closed": True, "oriented": True, "simply_connected": False, "depth_one": True}
    flags.update(obj.get("flags", {}))
    amb = obj["ambient"]
    ambient = None
    try:
        if amb.get("betti") is not None:
            ambient = GradedBetti(tuple(amb["betti"]), tuple(amb["split"]) if amb.get("split") else None,
                                  closed_oriented=flags["closed"] and flags["oriented"])
    except CohomologyDataError as e:
        raise SchemaError("/ambient", str(e)) from e
    strata = []
    for i, s in enumerate(obj["strata"]):
        if s.get("monodromy") == "twisted" and s.get("twisted_betti") is None:
            raise SchemaError(f"/strata/{i}/twisted_betti", "twisted monodromy needs twisted Betti numbers")
        try:
            st = StratumSpec(
                codim=s["codim"], isotropy=s["isotropy"], betti=GradedBetti(tuple(s["betti"])),
                label=s["label"], twisted=s.get("twisted_betti"), d3_vanishes=s.get("d3_vanishes"),
                vertical=s.get("vertical", "asd"))
        except CohomologyDataError as e:
            raise SchemaError(f"/strata/{i}", str(e)) from e
        n = s.get("copies", 1)
        strata.extend([st] if n == 1 else [replace(st, label=f"{st.label} #{j + 1}") for j in range(n)])
    try:
        return OrbifoldSpec(ambient, tuple(strata), obj["dimension"], obj.get("name", ""),
                            flags["closed"], flags["oriented"], flags["simply_connected"], flags["depth_one"])
    except CohomologyDataError as e:
        raise SchemaError("/", str(e)) from e


def load_spec(path) -> OrbifoldSpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def resolution_report(spec: OrbifoldSpec) -> dict:
    """ResolutionReport: every quantity the data determines, with reasons for the rest."""
    rep: dict = {"schema": "spin7kit.resolution/1", "name": spec.name, "dimension": spec.dimension}
    rep["sectors"] = [{"label": s.label, "class": s.conjugacy_class, "age": str(s.age), "betti": list(s.betti)}
                      for s in inertia_strata(spec)]
    rep["strata"] = []
    for s in spec.strata:
        entry = {"label": s.label, "codim": s.codim, "isotropy": s.isotropy, "type_a": s.type_a,
                 "cartan_rank": s.cartan_rank, "cr_contribution": stratum_cr_contribution(s, spec.dimension)}
        try:
            page = leray_serre_e2(s)
            entry["e2"] = [list(r) for r in page.table]
            entry["collapses"] = page.collapses
            entry["collapse_reason"] = page.reason
        except HypothesisError as e:
            entry["e2"] = None
            entry["collapse_reason"] = str(e)
        rep["strata"].append(entry)
    if spec.ambient is None:
        rep["incomplete"] = "ambient Betti numbers not supplied"
        return rep
    rep["ambient_betti"] = list(spec.ambient.b)
    rep["chen_ruan"] = list(chen_ruan(spec).b)
    try:
        iso = isentropic_check(spec)
        rep["resolution_betti"] = list(iso.resolution) if iso.resolution else None
        rep["isentropic"] = iso.isentropic
        rep["isentropic_branch"] = iso.branch
        rep["deltas"] = {str(k): v for k, v in iso.deltas.items()}
    except CohomologyDataError as e:
        rep["resolution_betti"] = None
        rep["isentropic"] = None
        rep["isentropic_note"] = str(e)
    if spec.ambient.split is not None and not spec.strata:
        a = ahat_genus(spec.ambient)
        hol = holonomy_class(a, spec.ambient)
        rep["ahat"] = str(a)
        rep["holonomy"] = hol.label
        rep["moduli_dimension"] = moduli_dimension(a, spec.ambient)
    return rep
