"""Scenario loading, closed-loop co-simulation, logs and summary metrics."""
from __future__ import annotations

import copy
import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import G, __version__
from .autopilot import ActuatorLimits, AutopilotGains, allocate, apply_limits, pd_commands
from .errors import DegenerateCommand, SimulationError, ValidationError
from .guidance import (PathSpec, load_path, pf_error, pf_gamma_rate, pf_orientation_cmd,
                       transport_frame, tt_commands, tt_error)
from .hydro_model import (ActuatorState, CoefficientSet, hydrodynamic_breakdown, load_coefficients,
                          load_json, schema_issues, self_propulsion_advance_ratio)
from .hydrostatics import BuoyancyProperties, WaveParams, hydrostatic_restoring, mesh_buoyancy, wave_excess_loads
from .l1_adaptive import L1Controller
from .mesh import HullMesh, bb2_hull, read_mesh
from .rigid_body import (MassProperties, VehicleState, assemble_mass_matrix, coupling_split, euler_rates,
                         finalize_state, rk4, rotation_matrix, wrap_angle)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
BUILTIN_MESHES = {"bb2_procedural": bb2_hull}

_num = {"type": "number"}
_vec = lambda n: {"type": "array", "items": _num, "minItems": n, "maxItems": n}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "coefficients", "initial_state", "controller", "dt", "duration"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "comment": {"type": "string"},
        "coefficients": {"type": "string"},
        "mesh": {"type": ["string", "null"]},
        "waves": {
            "type": "object", "additionalProperties": False,
            "properties": {"amplitude": {"type": "number", "minimum": 0},
                           "wavenumber": {"type": "number", "exclusiveMinimum": 0},
                           "frequency": {"type": ["number", "null"]},
                           "deep_water": {"type": "boolean"}},
        },
        "initial_state": {
            "type": "object", "additionalProperties": False,
            "properties": {"position": _vec(3), "attitude_deg": _vec(3), "velocity": _vec(6)},
        },
        "controller": {
            "type": "object", "additionalProperties": False, "required": ["mode"],
            "properties": {
                "mode": {"enum": ["setpoint", "pf", "tt", "open_loop"]},
                "z": _num, "psi_deg": _num, "psi_rate_deg": _num, "speed": {"type": "number", "minimum": 0},
                "path": {"type": "string"},
                "d": {"type": "number", "exclusiveMinimum": 0},
                "k_gamma": {"type": "number", "exclusiveMinimum": 0},
                "k_p": {"type": "number", "exclusiveMinimum": 0},
                "gamma0": {"type": "number", "minimum": 0},
                "v_min": _num, "v_max": _num,
                "end": {"enum": ["stop", "cruise"]},
                "deflections_deg": _vec(5),
            },
        },
        "autopilot": {
            "type": "object", "additionalProperties": False,
            "properties": {"gains_units": {"enum": ["deg", "rad"]},
                           "k_pz": {"type": "number", "minimum": 0}, "k_dz": {"type": "number", "minimum": 0},
                           "k_ppsi": {"type": "number", "minimum": 0}, "k_dpsi": {"type": "number", "minimum": 0},
                           "delta_max_deg": {"type": "number", "exclusiveMinimum": 0},
                           "rate_max_deg": {"type": "number", "exclusiveMinimum": 0}},
        },
        "propulsion": {
            "type": "object", "additionalProperties": False,
            "properties": {"mode": {"enum": ["fixed", "speed_hold"]}, "n": _num,
                           "k_u": {"type": "number", "minimum": 0}},
        },
        "l1": {
            "type": "object", "additionalProperties": False,
            "properties": {"enabled": {"type": "boolean"},
                           "omega_n": {"type": "number", "exclusiveMinimum": 0},
                           "zeta": {"type": "number", "exclusiveMinimum": 0},
                           "omega_c_ratio": {"type": "number", "exclusiveMinimum": 0},
                           "Ts": {"type": "number", "exclusiveMinimum": 0},
                           "Q": {"type": ["array", "null"]}},
        },
        "disturbances": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "suction": {"type": "object", "additionalProperties": False, "required": ["depth"],
                            "properties": {"depth": {"type": "array", "items": _num, "minItems": 2},
                                           "Z": {"type": "array", "items": _num},
                                           "M": {"type": "array", "items": _num}}},
                "bias": _vec(6),
                "sensor_noise": {"type": "object", "additionalProperties": False,
                                 "properties": {"psi_deg": {"type": "number", "minimum": 0},
                                                "z": {"type": "number", "minimum": 0}}},
            },
        },
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "output": {"type": "object"},
    },
}


@dataclass
class SuctionTable:
    depth: np.ndarray
    Z: np.ndarray
    M: np.ndarray

    def __call__(self, d: float) -> np.ndarray:
        out = np.zeros(6)
        if d > self.depth[-1]:
            return out
        out[2] = np.interp(d, self.depth, self.Z)
        out[4] = np.interp(d, self.depth, self.M)
        return out


@dataclass
class Scenario:
    name: str
    doc: dict
    source: str
    coefficients: CoefficientSet
    mass: MassProperties
    buoyancy: BuoyancyProperties
    weight: float
    mesh: HullMesh | None
    waves: WaveParams
    initial: VehicleState
    mode: str
    controller: dict
    path: PathSpec | None
    gains: AutopilotGains
    limits: ActuatorLimits
    propulsion: dict
    l1: dict
    suction: SuctionTable | None
    bias: np.ndarray
    noise: tuple
    dt: float
    duration: float
    Ts: float
    seed: int
    file_hashes: dict = field(default_factory=dict)

    @property
    def l1_enabled(self) -> bool:
        return bool(self.l1.get("enabled", False))

    def config_hash(self) -> str:
        blob = json.dumps({"scenario": self.doc, "files": self.file_hashes}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _sha(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def apply_overrides(doc: dict, l1: bool | None = None, seed: int | None = None) -> dict:
    doc = copy.deepcopy(doc)
    if l1 is not None:
        doc.setdefault("l1", {})["enabled"] = bool(l1)
    if seed is not None:
        doc["seed"] = int(seed)
    return doc


def scenario_from_dict(doc: dict, source: str = "<scenario>", base_dir=None) -> Scenario:
    """Validate a scenario document and every artifact it references; all-or-nothing."""
    base = Path(base_dir) if base_dir is not None else Path(".")
    issues = schema_issues(doc, SCENARIO_SCHEMA, source)
    if issues:
        raise ValidationError(issues)
    hashes = {}

    def resolve(rel):
        p = Path(rel)
        return p if p.is_absolute() else base / p

    def guard(fn, where):
        try:
            return fn()
        except ValidationError as exc:
            issues.extend(exc.issues)
        except (OSError, ValueError) as exc:
            issues.append((source, where, f"{type(exc).__name__}: {exc}"))
        return None

    dt, duration = float(doc["dt"]), float(doc["duration"])
    l1 = {"enabled": False, "omega_n": 0.08, "zeta": 1.0, "omega_c_ratio": 1.5, "Ts": 0.1, "Q": None}
    l1.update(doc.get("l1", {}))
    Ts = float(l1["Ts"])
    ratio = Ts / dt
    if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0) or round(ratio) < 1:
        issues.append((source, "$.l1.Ts", f"Ts={Ts} is not an integer multiple of dt={dt}"))

    cpath = resolve(doc["coefficients"])
    if not cpath.exists():
        issues.append((source, "$.coefficients", f"file not found: {cpath}"))
        cs = None
    else:
        cs = guard(lambda: load_coefficients(cpath), "$.coefficients")
        hashes["coefficients"] = _sha(cpath)
    if cs is not None and cs.mass is None:
        issues.append((str(cpath), "$.mass", "scenario runs need a mass block"))

    mesh = None
    mname = doc.get("mesh")
    if mname:
        if mname in BUILTIN_MESHES:
            mesh = guard(BUILTIN_MESHES[mname], "$.mesh")
            hashes["mesh"] = mname
        else:
            mp_ = resolve(mname)
            if not mp_.exists():
                issues.append((source, "$.mesh", f"file not found: {mp_}"))
            else:
                mesh = guard(lambda: read_mesh(mp_), "$.mesh")
                hashes["mesh"] = _sha(mp_)

    waves = guard(lambda: WaveParams(**doc.get("waves", {})), "$.waves") or WaveParams()

    ctrl = dict(doc["controller"])
    mode = ctrl["mode"]
    path = None
    if mode in ("pf", "tt"):
        if "path" not in ctrl:
            issues.append((source, "$.controller.path", f"mode {mode!r} needs a path file"))
        else:
            pp = resolve(ctrl["path"])
            if not pp.exists():
                issues.append((source, "$.controller.path", f"file not found: {pp}"))
            else:
                path = guard(lambda: load_path(pp), "$.controller.path")
                hashes["path"] = _sha(pp)
    ctrl.setdefault("d", 50.0)
    ctrl.setdefault("k_gamma", 1.0)
    ctrl.setdefault("k_p", 0.1)
    ctrl.setdefault("end", "stop")
    ctrl.setdefault("gamma0", 0.0)
    ctrl.setdefault("psi_rate_deg", 0.0)

    ap = {"gains_units": "deg", "k_pz": 3.0, "k_dz": 3.0, "k_ppsi": 3.0, "k_dpsi": 12.2,
          "delta_max_deg": 30.0, "rate_max_deg": 10.0}
    ap.update(doc.get("autopilot", {}))
    if ap["gains_units"] == "deg":
        gains = AutopilotGains.from_degrees(ap["k_pz"], ap["k_dz"], ap["k_ppsi"], ap["k_dpsi"])
    else:
        gains = AutopilotGains(ap["k_pz"], ap["k_dz"], ap["k_ppsi"], ap["k_dpsi"])
    limits = ActuatorLimits(np.deg2rad(ap["delta_max_deg"]), np.deg2rad(ap["rate_max_deg"]))

    prop = {"mode": "speed_hold", "n": 0.0, "k_u": 0.5}
    prop.update(doc.get("propulsion", {}))

    dist = doc.get("disturbances", {})
    suction = None
    if "suction" in dist:
        sd = dist["suction"]
        d = np.asarray(sd["depth"], float)
        Z = np.asarray(sd.get("Z", np.zeros(len(d))), float)
        Mm = np.asarray(sd.get("M", np.zeros(len(d))), float)
        if np.any(np.diff(d) <= 0):
            issues.append((source, "$.disturbances.suction.depth", "depth grid must be strictly increasing"))
        elif len(Z) != len(d) or len(Mm) != len(d):
            issues.append((source, "$.disturbances.suction", "Z/M arrays must match the depth grid"))
        else:
            suction = SuctionTable(d, Z, Mm)
    bias = np.asarray(dist.get("bias", np.zeros(6)), float)
    sn = dist.get("sensor_noise", {})
    noise = (np.deg2rad(sn.get("psi_deg", 0.0)), float(sn.get("z", 0.0)))

    ini = doc["initial_state"]
    initial = VehicleState(ini.get("position", [0, 0, 0]), np.deg2rad(ini.get("attitude_deg", [0, 0, 0])),
                           ini.get("velocity", [0] * 6))
    if abs(initial.attitude[1]) >= np.pi / 2 - 1e-3:
        issues.append((source, "$.initial_state.attitude_deg", "pitch too close to +/-90 deg"))

    if issues:
        raise ValidationError(issues)

    mp = cs.mass
    if mesh is not None:
        bp = mesh_buoyancy(mesh)
        mp = mp.with_mass(bp.B / G)  # neutral trim: weight equals integrated buoyancy
    else:
        bp = cs.buoyancy if cs.buoyancy is not None else BuoyancyProperties(mp.m * G, mp.cg)
    return Scenario(doc.get("name", Path(source).stem), doc, source, cs, mp, bp, mp.m * G, mesh, waves, initial,
                    mode, ctrl, path, gains, limits, prop, l1, suction, bias, noise, dt, duration, Ts,
                    int(doc.get("seed", 0)), hashes)


def load_scenario(path, l1: bool | None = None, seed: int | None = None) -> Scenario:
    path = Path(path)
    doc = apply_overrides(load_json(path), l1, seed)
    return scenario_from_dict(doc, str(path), path.parent)


# ---------------------------------------------------------------------------
# log

STATE_COLS = ["x", "y", "z", "phi", "theta", "psi", "u", "v", "w", "p", "q", "r"]
FORCE_GROUPS = ["hs", "hd", "cs", "prop", "wave", "dist", "total"]
AXES = ["X", "Y", "Z", "K", "M", "N"]
LOG_COLUMNS = (
    ["t"] + STATE_COLS
    + ["gamma", "gamma_dot", "err_1", "err_2", "cross_track",
       "psi_c", "v_c", "z_c", "psi_ref", "z_ref", "psi_ad", "z_ad", "psi_meas",
       "sigma_1", "sigma_2", "sigma_3", "sigma_4",
       "delta_1", "delta_2", "delta_3", "delta_4", "delta_5", "delta_V", "delta_H", "n_prop"]
    + [f"F_{g}_{a}" for g in FORCE_GROUPS for a in AXES]
)


@dataclass
class TimeSeriesLog:
    columns: list
    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def __len__(self) -> int:
        return len(self.data)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.data:
                fh.write(",".join(format(v, ".17g") for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "TimeSeriesLog":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path}: empty log")
        cols = rows[0]
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(cols))
        return cls(cols, data)


# ---------------------------------------------------------------------------
# closed loop


@dataclass
class _Plant:
    sc: Scenario
    M: np.ndarray

    def loads(self, t, x, act):
        sc = self.sc
        st = VehicleState.from_array(x[:12])
        depth = -x[2]
        hs = hydrostatic_restoring(sc.mass, sc.buoyancy, st.attitude, weight=sc.weight)
        hd, cs_, pr, A = hydrodynamic_breakdown(sc.coefficients, st.velocity, act, depth)
        if sc.mesh is not None and sc.waves.amplitude > 0:
            wv = wave_excess_loads(sc.mesh, st.position, st.attitude, t, sc.waves)
        else:
            wv = np.zeros(6)
        dist = sc.bias.copy()
        if sc.suction is not None:
            dist += sc.suction(depth)
        return (hs, hd, cs_, pr, wv, dist), A

    def accelerations(self, x, total, A):
        s = x[6:12]
        b_vel, _ = coupling_split(self.sc.mass, s)
        return np.linalg.solve(self.M - A, total - b_vel)


def _horizontal_velocity(x):
    R = rotation_matrix(*x[3:6])
    return (R @ x[6:9])[:2]


def _flow_direction(x):
    vh = _horizontal_velocity(x)
    v = float(np.hypot(vh[0], vh[1]))
    if v < 1e-6:
        return 0.0, np.array([np.cos(x[5]), np.sin(x[5])])
    return v, vh / v


def _prop_feedforward(sc: Scenario):
    cs = sc.coefficients
    mask = (cs.quad_axis == 0) & (cs.quad_j == 0) & (cs.quad_k == 0)
    d = -float(np.sum(cs.quad_value[mask]))
    if d <= 0 or cs.prop.diameter <= 0:
        return 0.0
    try:
        J = self_propulsion_advance_ratio(cs, d)
    except ValueError:
        return 0.0
    return 1.0 / (J * cs.prop.diameter)


def run(sc: Scenario) -> TimeSeriesLog:
    """Deterministic closed-loop simulation of one scenario."""
    dt = sc.dt
    ctrl = sc.controller
    mode = sc.mode
    curve = sc.path.curve if sc.path is not None else None
    end_stop = ctrl["end"] == "stop"
    rng = np.random.default_rng(sc.seed)
    plant = _Plant(sc, assemble_mass_matrix(sc.mass))

    duration = sc.duration
    if mode == "tt" and end_stop:
        duration = min(duration, curve.T)
    n_steps = int(round(duration / dt))
    ratio = int(round(sc.Ts / dt))

    x = np.concatenate([sc.initial.as_array(), [float(ctrl["gamma0"]) if mode == "pf" else 0.0]])
    deltas = np.zeros(5)
    n_per_speed = _prop_feedforward(sc)
    n_max = sc.coefficients.prop.n_max
    psi_rate = np.deg2rad(ctrl["psi_rate_deg"])
    psi0 = np.deg2rad(ctrl.get("psi_deg", np.rad2deg(x[5])))
    z_sp = ctrl.get("z", x[2])
    speed_sp = ctrl.get("speed", float(np.hypot(*x[6:8])))
    v_min, v_max = ctrl.get("v_min", 0.0), ctrl.get("v_max", np.inf)

    l1 = None
    if sc.l1_enabled:
        l1 = L1Controller.design(sc.l1["omega_n"], sc.l1["zeta"], sc.l1["omega_c_ratio"], sc.Ts,
                                 None if sc.l1["Q"] is None else np.asarray(sc.l1["Q"], float))
    psi_unwrap, psi_prev = x[5], x[5]
    psi_c_unwrap = psi_c_prev = None
    u_ad = None
    sigma = np.zeros(4)
    last_cmd = (x[5], speed_sp)
    rows = []
    termination = "duration"

    for k in range(n_steps + 1):
        t = k * dt
        psi_unwrap += wrap_angle(x[5] - psi_prev)
        psi_prev = x[5]
        psi_meas = psi_unwrap + (rng.normal(0.0, sc.noise[0]) if sc.noise[0] > 0 else 0.0)
        z_meas = x[2] + (rng.normal(0.0, sc.noise[1]) if sc.noise[1] > 0 else 0.0)

        gamma, gdot, err, xtrack = x[12], 0.0, (0.0, 0.0), 0.0
        z_c = z_sp
        psidot_ff = 0.0
        at_end = False
        if mode == "pf":
            v, w1 = _flow_direction(x)
            fr, pd = transport_frame(curve, gamma), curve(gamma)
            xt, yt = pf_error(x[:2], gamma, curve, fr, pd)
            _, psi_c = pf_orientation_cmd(gamma, curve, yt, ctrl["d"], fr)
            gdot = pf_gamma_rate(x[:2], gamma, curve, v, w1, ctrl["k_gamma"], fr, pd)
            err, xtrack = (xt, yt), yt
            v_c = ctrl.get("speed", speed_sp)
            if sc.path.depth is not None:
                z_c = sc.path.z_ref(gamma)
            at_end = gamma >= curve.T - 1e-9
        elif mode == "tt":
            tc = min(t, curve.T)
            e = tt_error(x[:2], tc, curve)
            v, w1 = _flow_direction(x)
            try:
                v_c, _, psi_c = tt_commands(e, tc, curve, ctrl["k_p"], w1, v_min, v_max)
            except DegenerateCommand:
                psi_c, v_c = last_cmd
            fr = transport_frame(curve, tc)
            err, xtrack = (e[0], e[1]), float(-e @ fr.t2)
            if sc.path.depth is not None:
                z_c = sc.path.z_ref(tc)
            at_end = t >= curve.T - 1e-9
            if t > curve.T:
                psi_c, v_c = last_cmd
        elif mode == "setpoint":
            psi_c = psi0 + psi_rate * t
            psidot_ff = psi_rate
            v_c = speed_sp
        else:
            psi_c, v_c = x[5], speed_sp
        last_cmd = (psi_c, v_c)

        if psi_c_unwrap is None:
            psi_c_unwrap = psi_unwrap + wrap_angle(psi_c - psi_unwrap)
        else:
            psi_c_unwrap += wrap_angle(psi_c - psi_c_prev)
        psi_c_prev = psi_c
        u_ref = np.array([psi_c_unwrap, z_c])

        if l1 is not None:
            if k == 0:
                l1.reset(np.array([psi_meas, z_meas]))
            if k % ratio == 0:
                u_ad = l1.step(np.array([psi_meas, z_meas]), u_ref)
                sigma = l1.state.sigma.copy()
        else:
            u_ad = u_ref

        if mode == "open_loop":
            dV = dH = 0.0
            cmd = np.deg2rad(np.asarray(ctrl.get("deflections_deg", [0.0] * 5), float))
        else:
            st = VehicleState([x[0], x[1], z_meas], x[3:6], x[6:12])
            dV, dH = pd_commands(u_ad[1], 0.0, u_ad[0], psidot_ff, st, sc.gains, psi=psi_meas)
            cmd = allocate(dV, dH)
        deltas = apply_limits(cmd, deltas, dt, sc.limits)

        if sc.propulsion["mode"] == "fixed":
            n_prop = float(sc.propulsion["n"])
        else:
            n_prop = n_per_speed * v_c + sc.propulsion["k_u"] * (v_c - x[6])
        n_prop = float(np.clip(n_prop, -n_max, n_max))
        act = ActuatorState(deltas, n_prop)

        comps, A = plant.loads(t, x, act)
        total = np.sum(comps, axis=0)
        rows.append(np.concatenate([
            [t], x[:12],
            [gamma, gdot, err[0], err[1], xtrack, psi_c, v_c, z_c, u_ref[0], u_ref[1], u_ad[0], u_ad[1], psi_meas],
            sigma, deltas, [dV, dH, n_prop], np.concatenate(comps), total,
        ]))
        if k == n_steps:
            if at_end and end_stop:
                termination = "end_of_trajectory" if mode == "tt" else "end_of_path"
            break
        if at_end and end_stop:
            termination = "end_of_path" if mode == "pf" else "end_of_trajectory"
            break

        k_gamma = ctrl["k_gamma"]

        def f(tt, xx, _first=(x, total, A)):
            if xx is _first[0]:
                tot, AA = _first[1], _first[2]
            else:
                cc, AA = plant.loads(tt, xx, act)
                tot = np.sum(cc, axis=0)
            R = rotation_matrix(*xx[3:6])
            ned = R @ xx[6:9]
            att_rate = euler_rates(xx[3:6], xx[9:12])
            sdot = plant.accelerations(xx, tot, AA)
            g_rate = 0.0
            if mode == "pf":
                vv, ww = _flow_direction(xx)
                g = min(max(xx[12], 0.0), curve.T)
                g_rate = pf_gamma_rate(xx[:2], g, curve, vv, ww, k_gamma)
            return np.concatenate([[ned[0], ned[1], -ned[2]], att_rate, sdot, [g_rate]])

        try:
            xn = rk4(f, t, x, dt)
            xn[:12] = finalize_state(xn[:12])
        except SimulationError as exc:
            raise type(exc)(f"t={t + dt:.6f}: {exc}") from None
        if mode == "pf":
            xn[12] = min(max(xn[12], 0.0), curve.T)
        x = xn

    data = np.array(rows)
    meta = {"scenario": sc.name, "dt": dt, "termination": termination, "t_end": float(data[-1, 0]),
            "mode": mode, "l1": sc.l1_enabled, "config_hash": sc.config_hash()}
    return TimeSeriesLog(list(LOG_COLUMNS), data, meta)


# ---------------------------------------------------------------------------
# metrics


def _rms(a) -> float:
    a = np.asarray(a, float)
    a = a[np.isfinite(a)]
    return float(np.sqrt(np.mean(a**2))) if a.size else 0.0


def _max_abs(a) -> float:
    a = np.asarray(a, float)
    a = a[np.isfinite(a)]
    return float(np.max(np.abs(a))) if a.size else 0.0


def settling_time(t, err, band: float) -> float:
    """First time after which |err| stays within ``band``; inf if it never settles."""
    outside = np.nonzero(np.abs(err) > band)[0]
    if outside.size == 0:
        return float(t[0])
    if outside[-1] == len(err) - 1:
        return float("inf")
    return float(t[outside[-1] + 1])


def metrics(lg: TimeSeriesLog, delta_max: float = np.deg2rad(30.0), depth_band: float = 0.5) -> dict:
    t = lg["t"]
    depth_err = lg["z"] - lg["z_c"]
    heading_err = wrap_angle(lg["psi_c"] - lg["psi"])
    deltas = np.column_stack([lg[f"delta_{i}"] for i in range(1, 6)])
    sat = np.any(np.abs(deltas) >= delta_max * (1 - 1e-9), axis=1)
    e1, e2 = lg["err_1"], lg["err_2"]
    err_norm = np.hypot(e1, e2)
    finite = np.isfinite(err_norm)
    out = {
        "n_rows": int(len(t)),
        "t_end": float(t[-1]) if len(t) else 0.0,
        "cross_track_rms": _rms(lg["cross_track"]),
        "cross_track_max": _max_abs(lg["cross_track"]),
        "depth_error_rms": _rms(depth_err),
        "depth_error_max": _max_abs(depth_err),
        "depth_error_final": float(depth_err[-1]) if len(t) else 0.0,
        "heading_error_rms": _rms(heading_err),
        "depth_settling_time": settling_time(t, depth_err, depth_band) if len(t) else 0.0,
        "saturation_duty_cycle": float(np.mean(sat)) if len(t) else 0.0,
        "position_error_max": float(np.max(err_norm[finite])) if finite.any() else 0.0,
        "position_error_argmax_t": float(t[finite][np.argmax(err_norm[finite])]) if finite.any() else 0.0,
    }
    gd = lg["gamma_dot"]
    if np.any(gd != 0):
        out.update({"gamma_dot_min": float(gd.min()), "gamma_dot_max": float(gd.max()),
                    "gamma_dot_mean": float(gd.mean()), "gamma_dot_argmin_t": float(t[np.argmin(gd)])})
    return out


def normalized_position_error(lg: TimeSeriesLog) -> np.ndarray:
    e = np.hypot(lg["err_1"], lg["err_2"])
    m = np.nanmax(e) if np.any(np.isfinite(e)) else 0.0
    return e / m if m > 0 else e


def manifest(sc: Scenario, lg: TimeSeriesLog) -> dict:
    import platform

    import scipy

    return {
        "scenario": sc.name,
        "source": sc.source,
        "config_hash": sc.config_hash(),
        "files": sc.file_hashes,
        "termination": lg.meta.get("termination"),
        "rows": len(lg),
        "versions": {"bb2sim": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }
