"""Bernstein-polynomial paths/trajectories and the horizontal-plane outer-loop laws.

Path following drives a virtual target p_d(gamma) along the path with a controlled
virtual time gamma and commands a heading that steers the vehicle onto the path.
Trajectory tracking uses wall-clock time and commands both speed and heading.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from .errors import DegenerateCommand, DegenerateTangent, DomainError, ValidationError
from .hydro_model import load_json, schema_issues
from .rigid_body import rk4

EPS_SPEED = 1e-6
DOMAIN_TOL = 1e-9


@dataclass(frozen=True)
class BernsteinCurve:
    """Curve sum_j P_j b_{j,N}(tau / T) on [0, T].

    ``check_regular`` verifies ||p'(tau)|| > EPS_SPEED over the whole domain; it is
    switched off for scalar profiles (depth) and internal derivative curves.
    """
    points: np.ndarray
    T: float
    check_regular: bool = True

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        object.__setattr__(self, "points", P)
        if not self.T > 0:
            raise ValueError("domain end T must be positive")
        if self.check_regular:
            if self.order < 1:
                raise ValueError("curve order must be >= 1")
            if not is_regular(self):
                raise DegenerateTangent("curve speed ||p'|| drops below the regularity bound")

    @property
    def order(self) -> int:
        return len(self.points) - 1

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @cached_property
    def derivative(self) -> "BernsteinCurve":
        return bernstein_derivative(self)

    def __call__(self, tau):
        return bernstein_eval(self, tau)


def bernstein_eval(curve: BernsteinCurve, tau: float) -> np.ndarray:
    """De Casteljau evaluation at ``tau`` in [0, T]."""
    if tau < -DOMAIN_TOL or tau > curve.T + DOMAIN_TOL:
        raise DomainError(f"tau={tau} outside [0, {curve.T}]")
    s = min(max(tau / curve.T, 0.0), 1.0)
    r = 1.0 - s
    pts = curve.points
    if len(pts) == 1:
        return pts[0].copy()
    for _ in range(len(pts) - 1):
        pts = r * pts[:-1] + s * pts[1:]
    return pts[0]


def bernstein_derivative(curve: BernsteinCurve) -> BernsteinCurve:
    """Hodograph: order N-1 curve with control points N (P_{j+1} - P_j) / T."""
    N = curve.order
    if N == 0:
        return BernsteinCurve(np.zeros_like(curve.points), curve.T, check_regular=False)
    return BernsteinCurve(N * np.diff(curve.points, axis=0) / curve.T, curve.T, check_regular=False)


def bernstein_basis(N: int, s):
    s = np.asarray(s, dtype=float)
    return np.stack([comb(N, j) * s**j * (1 - s) ** (N - j) for j in range(N + 1)], axis=-1)


def is_regular(curve: BernsteinCurve, eps: float = EPS_SPEED, max_depth: int = 12) -> bool:
    """Certify min ||p'|| > eps using samples plus a Lipschitz bound from p''."""
    d1 = bernstein_derivative(curve)
    d2 = bernstein_derivative(d1)
    lip = float(np.max(np.linalg.norm(d2.points, axis=1))) if d2.points.size else 0.0
    n = 16 * max(curve.order, 1)
    for _ in range(max_depth):
        s = np.linspace(0.0, 1.0, n + 1)
        smin = min(float(np.min(np.linalg.norm(bernstein_basis(d1.order, c) @ d1.points, axis=1)))
                   for c in np.array_split(s, max(1, len(s) // 100_000)))
        if smin <= eps:
            return False
        if smin - lip * (curve.T / n) / 2 > eps:
            return True
        n *= 2
    return False


@dataclass(frozen=True)
class TransportFrame:
    t1: np.ndarray
    t2: np.ndarray
    omega: float
    speed: float  # ||p'(tau)||
    R: np.ndarray  # columns t1, t2


def transport_frame(curve: BernsteinCurve, tau: float) -> TransportFrame:
    d1 = bernstein_eval(curve.derivative, tau)
    speed = float(np.hypot(d1[0], d1[1]))
    if speed < EPS_SPEED:
        raise DegenerateTangent(f"||p_d'|| = {speed:.3e} at tau={tau}")
    d2 = bernstein_eval(curve.derivative.derivative, tau) if curve.order >= 2 else np.zeros(2)
    t1 = d1 / speed
    t2 = np.array([-t1[1], t1[0]])
    omega = (d1[0] * d2[1] - d1[1] * d2[0]) / speed**2
    R = np.array([[t1[0], t2[0]], [t1[1], t2[1]]])
    return TransportFrame(t1, t2, float(omega), speed, R)


def heading_of(R) -> float:
    return float(np.arctan2(R[1, 0], R[0, 0]))


def rot2(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


# --- path following ---------------------------------------------------------

def pf_error(p, gamma: float, curve: BernsteinCurve, frame: TransportFrame | None = None,
             p_d=None) -> np.ndarray:
    """Path-following error (x_T, y_T) resolved in the transport frame.

    ``frame`` and ``p_d`` may be passed in when already evaluated at ``gamma``.
    """
    fr = transport_frame(curve, gamma) if frame is None else frame
    pd = curve(gamma) if p_d is None else p_d
    return fr.R.T @ (np.asarray(p, dtype=float)[:2] - pd)


def pf_gamma_rate(p, gamma: float, curve: BernsteinCurve, v: float, w1, k_gamma: float,
                  frame: TransportFrame | None = None, p_d=None) -> float:
    fr = transport_frame(curve, gamma) if frame is None else frame
    pd = curve(gamma) if p_d is None else p_d
    err = np.asarray(p, dtype=float)[:2] - pd
    rate = float((v * np.asarray(w1) + k_gamma * err) @ fr.t1) / fr.speed
    if gamma <= 0.0 and rate < 0.0:
        return 0.0
    if gamma >= curve.T and rate > 0.0:
        return 0.0
    return rate


def pf_orientation_cmd(gamma: float, curve: BernsteinCurve, y_T: float, d: float,
                       frame: TransportFrame | None = None):
    """Commanded flow-frame rotation and heading that turn the vehicle toward the path."""
    if not d > 0:
        raise ValueError("d must be positive")
    fr = transport_frame(curve, gamma) if frame is None else frame
    h = np.hypot(d, y_T)
    inner = np.array([[d, y_T], [-y_T, d]]) / h
    Rc = fr.R @ inner
    return Rc, heading_of(Rc)


def pf_lyapunov_rate(x_T: float, y_T: float, v: float, d: float, k_gamma: float) -> float:
    return -k_gamma * x_T**2 - v * y_T**2 / np.sqrt(d * d + y_T**2)


# --- trajectory tracking ----------------------------------------------------

def tt_error(p, t: float, curve: BernsteinCurve) -> np.ndarray:
    return curve(t) - np.asarray(p, dtype=float)[:2]


def tt_commands(e_p, t: float, curve: BernsteinCurve, k_p: float, w1,
                v_min: float = -np.inf, v_max: float = np.inf):
    """Speed command, commanded rotation and heading for trajectory tracking."""
    fr = transport_frame(curve, t)
    v_d = float(np.linalg.norm(bernstein_eval(curve.derivative, t)))
    vec = k_p * np.asarray(e_p, dtype=float) + v_d * fr.t1
    nrm = float(np.linalg.norm(vec))
    if nrm < EPS_SPEED:
        raise DegenerateCommand("commanded velocity vector vanishes")
    b1 = vec / nrm
    Rc = np.column_stack([b1, [-b1[1], b1[0]]])
    v_c = float(vec @ np.asarray(w1, dtype=float))
    return min(max(v_c, v_min), v_max), Rc, heading_of(Rc)


# --- kinematic testbeds (ideal autopilot: R_W = R_c instantly) ---------------

def pf_kinematic_rhs(curve, v, d, k_gamma):
    """RHS of the ideal-autopilot path-following loop on state (x, y, gamma)."""
    def f(t, x):
        p, gamma = x[:2], min(max(x[2], 0.0), curve.T)
        fr, pd = transport_frame(curve, gamma), curve(gamma)
        _, y_T = pf_error(p, gamma, curve, fr, pd)
        Rc, _ = pf_orientation_cmd(gamma, curve, y_T, d, fr)
        w1 = Rc[:, 0]
        return np.array([*(v * w1), pf_gamma_rate(p, gamma, curve, v, w1, k_gamma, fr, pd)])
    return f


def _eval_batch(curve: BernsteinCurve, tau):
    """Points and hodograph of ``curve`` at an array of parameters (Bernstein basis form)."""
    s = np.clip(np.asarray(tau, dtype=float) / curve.T, 0.0, 1.0)
    d1 = curve.derivative
    return bernstein_basis(curve.order, s) @ curve.points, bernstein_basis(d1.order, s) @ d1.points


def _tangents(d1):
    speed = np.hypot(d1[:, 0], d1[:, 1])
    if np.any(speed < EPS_SPEED):
        raise DegenerateTangent("||p_d'|| below the regularity bound")
    t1 = d1 / speed[:, None]
    return t1, np.column_stack([-t1[:, 1], t1[:, 0]]), speed


def pf_kinematic_rhs_batch(curve, v, d, k_gamma):
    """Vectorized form of :func:`pf_kinematic_rhs` on states of shape (n, 3)."""
    def f(t, X):
        gamma = np.clip(X[:, 2], 0.0, curve.T)
        pd, d1 = _eval_batch(curve, gamma)
        t1, t2, speed = _tangents(d1)
        e = X[:, :2] - pd
        y_T = np.sum(e * t2, axis=1)
        h = np.hypot(d, y_T)
        w1 = (d * t1 - y_T[:, None] * t2) / h[:, None]
        rate = np.sum((v * w1 + k_gamma * e) * t1, axis=1) / speed
        rate = np.where((gamma <= 0.0) & (rate < 0.0), 0.0, rate)
        rate = np.where((gamma >= curve.T) & (rate > 0.0), 0.0, rate)
        return np.column_stack([v * w1, rate])
    return f


def simulate_pf_kinematic(curve, p0, gamma0, v, d=50.0, k_gamma=1.0, dt=0.05, duration=300.0):
    """Integrate the ideal-autopilot PF loop for one or many initial conditions.

    ``p0`` is (2,) or (n, 2) and ``gamma0`` a scalar or (n,). Histories have shape
    (steps + 1, n, ...), with the batch axis dropped for a single run.
    """
    P0 = np.atleast_2d(np.asarray(p0, dtype=float))[:, :2]
    G0 = np.broadcast_to(np.asarray(gamma0, dtype=float), (len(P0),))
    f = pf_kinematic_rhs_batch(curve, v, d, k_gamma)
    n = int(round(duration / dt))
    X = np.empty((n + 1, len(P0), 3))
    X[0, :, :2], X[0, :, 2] = P0, G0
    for k in range(n):
        X[k + 1] = rk4(f, k * dt, X[k], dt)
        X[k + 1, :, 2] = np.clip(X[k + 1, :, 2], 0.0, curve.T)
    flat = X.reshape(-1, 3)
    pd, d1 = _eval_batch(curve, flat[:, 2])
    t1, t2, _ = _tangents(d1)
    e = flat[:, :2] - pd
    pT = np.column_stack([np.sum(e * t1, axis=1), np.sum(e * t2, axis=1)]).reshape(n + 1, len(P0), 2)
    out = {"t": np.arange(n + 1) * dt, "state": X, "p_T": pT, "V": 0.5 * np.sum(pT**2, axis=-1)}
    if np.ndim(p0) == 1:
        out.update({k: out[k][:, 0] for k in ("state", "p_T", "V")})
    out["rhs"] = pf_kinematic_rhs(curve, v, d, k_gamma)
    return out


def tt_kinematic_rhs(curve, k_p):
    def f(t, x):
        tc = min(t, curve.T)
        e = tt_error(x, tc, curve)
        fr = transport_frame(curve, tc)
        vec = k_p * e + fr.speed * fr.t1
        w1 = vec / np.linalg.norm(vec)
        v_c, _, _ = tt_commands(e, tc, curve, k_p, w1)
        return v_c * w1
    return f


def tt_kinematic_rhs_batch(curve, k_p):
    """Vectorized form of :func:`tt_kinematic_rhs` on positions of shape (n, 2)."""
    def f(t, X):
        pd, d1 = _eval_batch(curve, np.full(len(X), min(t, curve.T)))
        vec = k_p * (pd - X) + d1  # v_d t1 = p_d'
        nrm = np.linalg.norm(vec, axis=1)
        if np.any(nrm < EPS_SPEED):
            raise DegenerateCommand("commanded velocity vector vanishes")
        w1 = vec / nrm[:, None]
        return np.sum(vec * w1, axis=1)[:, None] * w1
    return f


def simulate_tt_kinematic(curve, p0, k_p=0.1, dt=0.05):
    """Integrate the ideal-autopilot TT loop from t = 0 to exactly t = T (one or many runs)."""
    P0 = np.atleast_2d(np.asarray(p0, dtype=float))[:, :2]
    f = tt_kinematic_rhs_batch(curve, k_p)
    n = int(round(curve.T / dt))
    X = np.empty((n + 1, len(P0), 2))
    X[0] = P0
    for k in range(n):
        X[k + 1] = rk4(f, k * dt, X[k], dt)
    t = np.arange(n + 1) * dt
    t[-1] = curve.T
    pd, _ = _eval_batch(curve, t)
    e = pd[:, None, :] - X
    out = {"t": t, "state": X, "e_p": e, "V": 0.5 * np.sum(e**2, axis=-1)}
    if np.ndim(p0) == 1:
        out.update({k: out[k][:, 0] for k in ("state", "e_p", "V")})
    out["rhs"] = tt_kinematic_rhs(curve, k_p)
    return out


# --- file format ------------------------------------------------------------

PATH_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "order", "T", "control_points"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": 1},
        "name": {"type": "string"},
        "comment": {"type": "string"},
        "kind": {"enum": ["path", "trajectory"]},
        "order": {"type": "integer", "minimum": 1},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "control_points": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            "minItems": 2,
        },
        "depth_profile": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    },
}


@dataclass(frozen=True)
class PathSpec:
    curve: BernsteinCurve
    depth: BernsteinCurve | None = None
    kind: str = "path"

    def z_ref(self, tau: float) -> float | None:
        if self.depth is None:
            return None
        return float(self.depth(min(max(tau, 0.0), self.depth.T))[0])


def path_from_dict(doc: dict, source: str = "<path>") -> PathSpec:
    issues = schema_issues(doc, PATH_SCHEMA, source)
    if not issues and len(doc["control_points"]) != doc["order"] + 1:
        issues.append((source, "$.control_points", f"order {doc['order']} needs {doc['order'] + 1} control points"))
    if issues:
        raise ValidationError(issues)
    try:
        curve = BernsteinCurve(np.array(doc["control_points"], dtype=float), float(doc["T"]))
    except DegenerateTangent as exc:
        raise ValidationError([(source, "$.control_points", str(exc))]) from None
    depth = None
    if "depth_profile" in doc:
        z = np.array(doc["depth_profile"], dtype=float)
        if len(z) == 1:
            z = np.repeat(z, 2)
        depth = BernsteinCurve(z, float(doc["T"]), check_regular=False)
    return PathSpec(curve, depth, doc.get("kind", "path"))


def load_path(path) -> PathSpec:
    return path_from_dict(load_json(path), str(path))
