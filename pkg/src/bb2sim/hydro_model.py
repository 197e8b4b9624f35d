"""Coefficient-based hydrodynamic loads: velocity products, added mass, planes, propeller."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import G, RHO
from .errors import ValidationError
from .hydrostatics import BuoyancyProperties
from .rigid_body import MassProperties, assemble_mass_matrix

log = logging.getLogger(__name__)

AXES = ("X", "Y", "Z", "K", "M", "N")
VARS = ("u", "v", "w", "p", "q", "r")
N_SURFACES = 5
DEFLECTION_LAWS = ("linear", "literal", "signed_quadratic")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class DepthTable:
    depth: np.ndarray
    factor: np.ndarray

    def __call__(self, d: float) -> float:
        if d > self.depth[-1]:
            return 1.0
        return float(np.interp(d, self.depth, self.factor))


@dataclass(frozen=True)
class PropellerModel:
    diameter: float = 1.0
    kt: tuple = (0.0,)
    kq: tuple = (0.0,)
    j_range: tuple = (0.0, 1.5)
    n_max: float = np.inf
    torque_sign: float = -1.0
    rho: float = RHO


@dataclass(frozen=True)
class ActuatorState:
    deflections: np.ndarray = field(default_factory=lambda: np.zeros(N_SURFACES))
    n: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "deflections", np.asarray(self.deflections, dtype=float).reshape(N_SURFACES))


@dataclass
class CoefficientSet:
    """Dimensional (SI) hydrodynamic coefficients.

    Velocity-product terms are stored as parallel arrays: axis index ``quad_axis``,
    velocity indices ``quad_j``/``quad_k``, coefficient ``quad_value``, and
    ``quad_signed`` selecting |s_j| s_k instead of s_j s_k.
    """
    quad_axis: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    quad_j: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    quad_k: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    quad_value: np.ndarray = field(default_factory=lambda: np.zeros(0))
    quad_signed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    quad_tables: dict = field(default_factory=dict)  # term index -> DepthTable
    added_mass: np.ndarray = field(default_factory=lambda: np.zeros((6, 6)))
    added_mass_tables: dict = field(default_factory=dict)  # (i, j) -> DepthTable
    surface: np.ndarray = field(default_factory=lambda: np.zeros((6, N_SURFACES)))
    surface_tables: dict = field(default_factory=dict)  # (i, l) -> DepthTable
    deflection_law: str = "linear"
    delta_max: float = np.deg2rad(30.0)
    prop: PropellerModel = field(default_factory=PropellerModel)
    mass: MassProperties | None = None
    buoyancy: BuoyancyProperties | None = None
    origin: str = "body origin"
    name: str = ""

    def __post_init__(self):
        self.quad_axis = np.asarray(self.quad_axis, dtype=int)
        self.quad_j = np.asarray(self.quad_j, dtype=int)
        self.quad_k = np.asarray(self.quad_k, dtype=int)
        self.quad_value = np.asarray(self.quad_value, dtype=float)
        self.quad_signed = np.asarray(self.quad_signed, dtype=bool)
        if self.quad_signed.size == 0:
            self.quad_signed = np.zeros(len(self.quad_value), dtype=bool)
        if not len(self.quad_axis) == len(self.quad_j) == len(self.quad_k) == len(self.quad_value) \
                == len(self.quad_signed):
            raise ValueError("velocity-product term arrays differ in length")
        self.added_mass = np.asarray(self.added_mass, dtype=float)
        self.surface = np.asarray(self.surface, dtype=float)
        if self.deflection_law not in DEFLECTION_LAWS:
            raise ValueError(f"unknown deflection law {self.deflection_law!r}")

    def added_mass_at(self, depth: float) -> np.ndarray:
        if not self.added_mass_tables:
            return self.added_mass
        A = self.added_mass.copy()
        for (i, j), tab in self.added_mass_tables.items():
            A[i, j] *= tab(depth)
        return A

    def check_effective_mass(self, mp: MassProperties, depths=(np.inf,)) -> None:
        M = assemble_mass_matrix(mp)
        for d in depths:
            A = self.added_mass_at(d)
            eig = np.linalg.eigvalsh(0.5 * ((M - A) + (M - A).T))
            if eig.min() < 1e-6 * mp.m:
                raise ValidationError([("coefficients", "added_mass",
                                        f"effective mass matrix not positive definite at depth {d} (min eig {eig.min():.3e})")])


def deflection_law(delta, mode: str = "linear"):
    if mode == "linear":
        return delta
    if mode == "literal":
        return delta * delta
    if mode == "signed_quadratic":
        return delta * np.abs(delta)
    raise ValueError(f"unknown deflection law {mode!r}")


def velocity_terms(cs: CoefficientSet, s, depth: float = np.inf) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    sj = s[cs.quad_j]
    sj = np.where(cs.quad_signed, np.abs(sj), sj)
    contrib = cs.quad_value * sj * s[cs.quad_k]
    if cs.quad_tables:
        contrib = contrib.copy()
        for n, tab in cs.quad_tables.items():
            contrib[n] *= tab(depth)
    return np.bincount(cs.quad_axis, weights=contrib, minlength=6)


def control_surface_force(cs: CoefficientSet, u: float, delta: float, l: int, depth: float = np.inf) -> np.ndarray:
    """Load of plane ``l`` (1..5) at forward speed ``u`` and deflection ``delta`` [rad]."""
    if not 1 <= l <= N_SURFACES:
        raise ValueError(f"surface index must be in 1..{N_SURFACES}, got {l}")
    coef = cs.surface[:, l - 1].copy()
    for (i, ll), tab in cs.surface_tables.items():
        if ll == l - 1:
            coef[i] *= tab(depth)
    return coef * (u * u * deflection_law(delta, cs.deflection_law))


def control_surface_forces(cs: CoefficientSet, u: float, deflections, depth: float = np.inf) -> np.ndarray:
    g = deflection_law(np.asarray(deflections, dtype=float), cs.deflection_law)
    if cs.surface_tables:
        S = cs.surface.copy()
        for (i, l), tab in cs.surface_tables.items():
            S[i, l] *= tab(depth)
    else:
        S = cs.surface
    return (S @ g) * (u * u)


_warned_j = set()


def propeller_force(cs: CoefficientSet, n: float, u: float) -> np.ndarray:
    """Thrust on X and shaft reaction torque on K from K_T(J), K_Q(J) polynomials."""
    pm = cs.prop
    out = np.zeros(6)
    if n == 0.0:
        return out
    D = pm.diameter
    J = u / (n * D)
    lo, hi = pm.j_range
    if J < lo or J > hi:
        if id(cs) not in _warned_j:
            log.warning("advance ratio %.3f outside [%g, %g]; clamped", J, lo, hi)
            _warned_j.add(id(cs))
        J = min(max(J, lo), hi)
    kt = np.polynomial.polynomial.polyval(J, pm.kt)
    kq = np.polynomial.polynomial.polyval(J, pm.kq)
    n2 = n * abs(n)
    out[0] = pm.rho * n2 * D**4 * kt
    out[3] = pm.torque_sign * pm.rho * n2 * D**5 * kq
    return out


def hydrodynamic_breakdown(cs: CoefficientSet, s, act: ActuatorState, depth: float = np.inf):
    """Return (velocity-product load, plane load, propeller load, added-mass matrix)."""
    s = np.asarray(s, dtype=float)
    return (velocity_terms(cs, s, depth),
            control_surface_forces(cs, s[0], act.deflections, depth),
            propeller_force(cs, act.n, s[0]),
            cs.added_mass_at(depth))


def hydrodynamic_force(cs: CoefficientSet, s, act: ActuatorState, depth: float = np.inf):
    """Velocity-dependent hydrodynamic load and the added-mass matrix for the LHS."""
    fv, fs, fp, A = hydrodynamic_breakdown(cs, s, act, depth)
    return fv + fs + fp, A


def self_propulsion_advance_ratio(cs: CoefficientSet, drag_coefficient: float) -> float:
    """Advance ratio J* where thrust balances drag ``d u^2`` at any speed.

    Thrust rho n^2 D^4 K_T(J) with n = u / (J D) gives rho D^2 u^2 K_T(J) / J^2,
    so J* solves rho D^2 K_T(J) = d J^2 on the validity range.
    """
    pm = cs.prop
    coeffs = np.array(pm.kt, dtype=float) * pm.rho * pm.diameter**2
    poly = np.zeros(max(len(coeffs), 3))
    poly[:len(coeffs)] = coeffs
    poly[2] -= drag_coefficient
    roots = np.polynomial.polynomial.polyroots(poly)
    lo, hi = pm.j_range
    real = sorted(r.real for r in roots if abs(r.imag) < 1e-12 and lo < r.real <= hi)
    if not real:
        raise ValueError("no self-propulsion point inside the propeller validity range")
    return real[0]


# ---------------------------------------------------------------------------
# file format

_table = {
    "type": "object",
    "required": ["depth", "factor"],
    "additionalProperties": False,
    "properties": {
        "depth": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "factor": {"type": "array", "items": {"type": "number"}, "minItems": 2},
    },
}
_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

COEFFICIENT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "units", "origin", "quad_terms", "added_mass", "surfaces", "propeller"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "comment": {"type": "string"},
        "units": {
            "type": "object",
            "required": ["system"],
            "additionalProperties": False,
            "properties": {
                "system": {"enum": ["dimensional", "prime"]},
                "length": {"type": "number", "exclusiveMinimum": 0},
                "rho": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "origin": {
            "type": "object",
            "required": ["description"],
            "additionalProperties": False,
            "properties": {"description": {"type": "string"}, "x_from_nose": {"type": "number"}},
        },
        "mass": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mass": {"type": "number", "exclusiveMinimum": 0},
                "displacement_volume": {"type": "number", "exclusiveMinimum": 0},
                "cg": _vec3,
                "gyration": _vec3,
                "products": _vec3,
            },
            "required": ["cg", "gyration"],
        },
        "buoyancy": {
            "type": "object",
            "additionalProperties": False,
            "required": ["cb"],
            "properties": {"B": {"anyOf": [{"type": "number", "minimum": 0}, {"const": "neutral"}]}, "cb": _vec3},
        },
        "quad_terms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["axis", "vars", "value"],
                "additionalProperties": False,
                "properties": {
                    "axis": {"enum": list(AXES)},
                    "vars": {"type": "array", "items": {"enum": list(VARS)}, "minItems": 2, "maxItems": 2},
                    "value": {"type": "number"},
                    "signed": {"type": "boolean"},
                    "depth_table": _table,
                },
            },
        },
        "added_mass": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["axis", "var", "value"],
                "additionalProperties": False,
                "properties": {
                    "axis": {"enum": list(AXES)},
                    "var": {"enum": list(VARS)},
                    "value": {"type": "number"},
                    "depth_table": _table,
                },
            },
        },
        "surfaces": {
            "type": "object",
            "required": ["terms"],
            "additionalProperties": False,
            "properties": {
                "deflection_law": {"enum": list(DEFLECTION_LAWS)},
                "delta_max_deg": {"type": "number", "exclusiveMinimum": 0},
                "terms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["surface", "axis", "value"],
                        "additionalProperties": False,
                        "properties": {
                            "surface": {"type": "integer", "minimum": 1, "maximum": N_SURFACES},
                            "axis": {"enum": list(AXES)},
                            "value": {"type": "number"},
                            "depth_table": _table,
                        },
                    },
                },
            },
        },
        "propeller": {
            "type": "object",
            "required": ["diameter", "kt", "kq"],
            "additionalProperties": False,
            "properties": {
                "diameter": {"type": "number", "exclusiveMinimum": 0},
                "kt": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "kq": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "j_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "n_max": {"type": "number", "exclusiveMinimum": 0},
                "torque_sign": {"enum": [-1, 1]},
            },
        },
        "added_mass_symmetry_tol": {"type": "number", "minimum": 0},
    },
}


def _fmt_path(path) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def schema_issues(doc, schema, source: str):
    v = jsonschema.Draft7Validator(schema)
    issues = []
    for err in sorted(v.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        issues.append((source, _fmt_path(err.absolute_path), err.message))
    return issues


def load_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError([(str(path), "$", f"cannot read file: {exc.strerror or exc}")]) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([(str(path), f"line {exc.lineno} col {exc.colno}", exc.msg)]) from None


def _prime_scale(rho: float, L: float, power: int) -> float:
    return 0.5 * rho * L**power


def _make_table(spec, where, issues, source):
    d = np.asarray(spec["depth"], dtype=float)
    f = np.asarray(spec["factor"], dtype=float)
    if len(d) != len(f):
        issues.append((source, where, "depth and factor arrays differ in length"))
        return None
    if np.any(np.diff(d) <= 0):
        issues.append((source, where, "depth grid must be strictly increasing"))
        return None
    return DepthTable(d, f)


def coefficients_from_dict(doc: dict, source: str = "<coefficients>") -> CoefficientSet:
    issues = schema_issues(doc, COEFFICIENT_SCHEMA, source)
    if issues:
        raise ValidationError(issues)
    units = doc["units"]
    prime = units["system"] == "prime"
    if prime and "length" not in units:
        raise ValidationError([(source, "$.units.length", "prime-system coefficients need a reference length")])
    rho = units.get("rho", RHO)
    L = units.get("length", 1.0)
    is_moment = lambda ax: AXES.index(ax) >= 3
    is_ang = lambda var: VARS.index(var) >= 3

    qa, qj, qk, qv, qs, qt = [], [], [], [], [], {}
    for n, term in enumerate(doc["quad_terms"]):
        j, k = term["vars"]
        scale = _prime_scale(rho, L, 2 + is_ang(j) + is_ang(k) + is_moment(term["axis"])) if prime else 1.0
        qa.append(AXES.index(term["axis"]))
        qj.append(VARS.index(j))
        qk.append(VARS.index(k))
        qv.append(term["value"] * scale)
        qs.append(term.get("signed", False))
        if "depth_table" in term:
            tab = _make_table(term["depth_table"], f"$.quad_terms[{n}].depth_table", issues, source)
            if tab is not None:
                qt[n] = tab

    A = np.zeros((6, 6))
    At = {}
    for n, term in enumerate(doc["added_mass"]):
        i, j = AXES.index(term["axis"]), VARS.index(term["var"])
        scale = _prime_scale(rho, L, 3 + is_ang(term["var"]) + is_moment(term["axis"])) if prime else 1.0
        A[i, j] += term["value"] * scale
        if "depth_table" in term:
            tab = _make_table(term["depth_table"], f"$.added_mass[{n}].depth_table", issues, source)
            if tab is not None:
                At[(i, j)] = tab
    tol = doc.get("added_mass_symmetry_tol", 1e-6)
    asym = np.abs(A - A.T).max()
    if asym > tol * max(np.abs(A).max(), 1.0):
        issues.append((source, "$.added_mass", f"added-mass matrix not symmetric (max asymmetry {asym:.3e})"))

    S = np.zeros((6, N_SURFACES))
    St = {}
    surf = doc["surfaces"]
    for n, term in enumerate(surf["terms"]):
        i, l = AXES.index(term["axis"]), term["surface"] - 1
        scale = _prime_scale(rho, L, 2 + is_moment(term["axis"])) if prime else 1.0
        S[i, l] += term["value"] * scale
        if "depth_table" in term:
            tab = _make_table(term["depth_table"], f"$.surfaces.terms[{n}].depth_table", issues, source)
            if tab is not None:
                St[(i, l)] = tab

    pr = doc["propeller"]
    jr = tuple(pr.get("j_range", (0.0, 1.5)))
    if jr[0] >= jr[1]:
        issues.append((source, "$.propeller.j_range", "lower bound must be below upper bound"))
    if not (np.all(np.isfinite(pr["kt"])) and np.all(np.isfinite(pr["kq"]))):
        issues.append((source, "$.propeller", "non-finite polynomial coefficient"))
    prop = PropellerModel(pr["diameter"], tuple(pr["kt"]), tuple(pr["kq"]), jr,
                          pr.get("n_max", np.inf), float(pr.get("torque_sign", -1)), rho)

    mp = None
    if "mass" in doc:
        md = doc["mass"]
        if "mass" in md:
            m = md["mass"]
        elif "displacement_volume" in md:
            m = rho * md["displacement_volume"]
        else:
            issues.append((source, "$.mass", "either 'mass' or 'displacement_volume' is required"))
            m = None
        if m is not None:
            ixy, ixz, iyz = md.get("products", (0.0, 0.0, 0.0))
            mp = MassProperties(m, tuple(md["cg"]), tuple(md["gyration"]), ixy, ixz, iyz)
    bp = None
    if "buoyancy" in doc:
        bd = doc["buoyancy"]
        B = bd.get("B", "neutral")
        if B == "neutral":
            if mp is None:
                issues.append((source, "$.buoyancy.B", "'neutral' buoyancy needs a mass block"))
                B = 0.0
            else:
                B = mp.m * G
        bp = BuoyancyProperties(B, tuple(bd["cb"]))

    if issues:
        raise ValidationError(issues)
    cs = CoefficientSet(np.array(qa, dtype=int), np.array(qj, dtype=int), np.array(qk, dtype=int),
                        np.array(qv, dtype=float), np.array(qs, dtype=bool), qt, A, At, S, St,
                        surf.get("deflection_law", "linear"), np.deg2rad(surf.get("delta_max_deg", 30.0)),
                        prop, mp, bp, doc["origin"]["description"], doc.get("name", ""))
    if mp is not None:
        knots = sorted({float(x) for t in At.values() for x in t.depth} | {np.inf})
        try:
            cs.check_effective_mass(mp, knots)
        except ValidationError as exc:
            raise ValidationError([(source, f, r) for _, f, r in exc.issues]) from None
    return cs


def load_coefficients(path) -> CoefficientSet:
    return coefficients_from_dict(load_json(path), str(path))
