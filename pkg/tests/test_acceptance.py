"""End-to-end acceptance criteria; each test records a PASS/FAIL line in the terminal summary."""
import json
import time

import numpy as np
import pytest

import conftest
from bb2sim import G, RHO
from bb2sim.autopilot import ALLOCATION, allocate, recover_commands
from bb2sim.guidance import (BernsteinCurve, bernstein_eval, load_path, pf_error, pf_kinematic_rhs,
                             pf_lyapunov_rate, simulate_pf_kinematic, simulate_tt_kinematic, tt_error,
                             tt_kinematic_rhs)
from bb2sim.hydrostatics import CALM, integrate_wave_loads
from bb2sim.l1_adaptive import (L1Controller, L1State, ReferenceModel, adaptation_step, build_adaptation,
                                build_reference_model, predictor_step)
from bb2sim.mesh import icosphere
from bb2sim.rigid_body import MassProperties, VehicleState, kinetic_energy, rk4, rk4_step
from bb2sim.sim_engine import load_scenario, run, scenario_from_dict

from conftest import DATA, SCENARIOS, model_loop

BEND = BernsteinCurve(np.array([[0, 0], [1500, 0], [2500, 800], [4000, 1000]], dtype=float), 1000.0)
V_FLOOR = 1e-2  # ||p_T|| below which position roundoff dominates the five-point V-dot stencil


def record(key, ok, detail):
    conftest.ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, detail


def stencil(g, h=1e-2):
    return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h)


def disk_offsets(rng, n, r_max):
    r = r_max * np.sqrt(rng.uniform(0, 1, n))
    a = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


# ---------------------------------------------------------------------------

def test_criterion_1_allocation_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    pairs = rng.uniform(-np.deg2rad(30), np.deg2rad(30), (1000, 2))
    worst_fwd, worst_inv, exact_v, exact_h = 0.0, 0.0, True, 0
    for dV, dH in pairs:
        d = allocate(dV, dH)
        ref = np.array([-dV + dH, -dV - dH, dV - dH, dV + dH, dV])
        scale = np.spacing(max(abs(dV), abs(dH)))
        worst_fwd = max(worst_fwd, np.abs(d - ref).max() / scale, np.abs(d - ALLOCATION @ [dV, dH]).max() / scale)
        v, h = recover_commands(d)
        exact_v &= v == dV
        exact_h += h == dH
        worst_inv = max(worst_inv, abs(h - dH) / scale)
    grid = rng.integers(-2**20, 2**20, (1000, 2)) * 2.0**-20
    grid_exact = all(recover_commands(allocate(a, b)) == (a, b) for a, b in grid)
    elapsed = time.perf_counter() - t0
    ok = worst_fwd == 0 and exact_v and worst_inv <= 1.0 and grid_exact and elapsed < 1.0
    record(1, ok, f"forward max err {worst_fwd:g} ulp; delta_5 == delta_V on all; (d1-d2)/2 == delta_H bitwise on "
                  f"{exact_h}/1000 random doubles (max {worst_inv:g} ulp) and 1000/1000 dyadic pairs; "
                  f"{elapsed:.3f} s")


def test_criterion_2_buoyancy_oracle():
    t0 = time.perf_counter()
    B = RHO * G * 4.0 / 3.0 * np.pi
    errs = []
    for sub in (4, 5):
        F = integrate_wave_loads(icosphere(sub), [0, 0, -10], [0, 0, 0], 0.0, CALM)
        errs.append(abs(-F[2] - B) / B)
    order = np.log2(errs[0] / errs[1])
    elapsed = time.perf_counter() - t0
    n_tri = icosphere(4).n_elements
    ok = errs[0] < 5e-3 and order > 1.9 and elapsed < 10.0
    record(2, ok, f"{n_tri} triangles: rel err {errs[0]:.3e}; refined {errs[1]:.3e}; observed order {order:.3f}; "
                  f"{elapsed:.2f} s")


def test_criterion_3_pf_lyapunov_decrease():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    v, d, kg, g0 = 2.5, 50.0, 1.0, 150.0
    p0 = BEND(g0) + disk_offsets(rng, 20, 200.0)
    out = simulate_pf_kinematic(BEND, p0, g0, v, d, kg, dt=0.05, duration=300.0)
    V, pT = out["V"], out["p_T"]
    dV = np.diff(V, axis=0)
    monotone = bool(np.all(dV < 0))
    final = np.linalg.norm(pT[-1], axis=1).max()
    f = pf_kinematic_rhs(BEND, v, d, kg)
    worst, checked = 0.0, 0
    for j in range(20):
        for k in np.linspace(0, len(out["t"]) - 1, 40).astype(int):
            x = out["state"][k, j]
            if np.linalg.norm(pT[k, j]) < V_FLOOR:
                continue
            fx = f(0.0, x)
            Vf = lambda a: 0.5 * np.sum(pf_error(x[:2] + a * fx[:2], x[2] + a * fx[2], BEND)**2)
            ref = pf_lyapunov_rate(*pT[k, j], v, d, kg)
            worst = max(worst, abs(stencil(Vf) / ref - 1))
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = monotone and final < 1.0 and worst < 1e-6 and elapsed < 30.0
    record(3, ok, f"20 runs: V strictly decreasing={monotone}; max ||p_T(300 s)|| {final:.2e} m; "
                  f"V-dot rel err {worst:.1e} over {checked} states; {elapsed:.1f} s")


def test_criterion_4_tt_lyapunov_decrease():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    k_p, T = 0.1, 400.0
    c = BernsteinCurve(BEND.points, T)
    out = simulate_tt_kinematic(c, c(0.0) + disk_offsets(rng, 20, 200.0), k_p)
    t, e = out["t"], out["e_p"]
    en = np.linalg.norm(e, axis=-1)
    after = en[t >= 300.0].max()
    f = tt_kinematic_rhs(c, k_p)
    worst, checked = 0.0, 0
    for j in range(20):
        for k in np.linspace(1, len(t) - 5, 40).astype(int):  # keep t +/- 2h inside [0, T]
            x, tk = out["state"][k, j], t[k]
            if en[k, j] < V_FLOOR:
                continue
            fx = f(tk, x)
            Vf = lambda a: 0.5 * np.sum(tt_error(x + a * fx, tk + a, c)**2)
            worst = max(worst, abs(stencil(Vf) / (-k_p * en[k, j]**2) - 1))
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and after < 1.0 and t[-1] == T and elapsed < 30.0
    record(4, ok, f"20 runs: V-dot rel err {worst:.1e} over {checked} states; max ||e_p|| for t >= 300 s "
                  f"{after:.2e} m; final t = {float(t[-1])!r} (T = {T}); {elapsed:.1f} s")


def test_criterion_5_l1_transparency_and_rejection():
    t0 = time.perf_counter()
    step = lambda t: np.array([0.3, -15.0])
    ctrl = L1Controller.design(0.08, 1.0, 1.5, 0.1)
    _, y, ym = model_loop(ctrl, step, 500.0)
    transparency = np.abs(y - ym).max()
    f0 = np.array([0.0, 0.0, 0.0, 2e-3])
    _, y_pd, ym = model_loop(L1Controller.design(), step, 800.0, f0=f0, augment=False)
    _, y_l1, _ = model_loop(L1Controller.design(), step, 800.0, f0=f0)
    e_pd, e_l1 = abs(y_pd[-1, 1] - ym[-1, 1]), abs(y_l1[-1, 1] - ym[-1, 1])
    elapsed = time.perf_counter() - t0
    ok = ctrl.fr.omega_c == pytest.approx(0.12) and transparency < 1e-3 and e_pd >= 5 * e_l1 and elapsed < 60
    record(5, ok, f"omega_c {ctrl.fr.omega_c:.3f}; ||y - y_m||inf {transparency:.1e}; steady depth error "
                  f"unaugmented {e_pd:.4f} vs L1 {e_l1:.2e} (ratio {e_pd / max(e_l1, 1e-300):.3g}); {elapsed:.1f} s")


def test_criterion_6_sampled_data_exactness():
    rng = np.random.default_rng(6)
    model = build_reference_model()
    worst = 0.0
    for Ts in (0.1, 0.5):
        am = build_adaptation(model, None, Ts)
        for _ in range(5):
            x0, u, sig = rng.normal(size=4), rng.normal(size=2), rng.normal(size=4) * 0.01
            x1, _ = predictor_step(L1State(x0, np.zeros(4), sig, np.zeros(2)), am, model, u)
            ref, n = x0.copy(), 2000
            b = model.B @ u + sig
            for k in range(n):
                ref = rk4(lambda t, x: model.A @ x + b, 0.0, ref, Ts / n)
            worst = max(worst, np.abs(x1 - ref).max())
    scalar = ReferenceModel(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]))
    worst_ad = 0.0
    for Ts in (0.01, 0.1, 1.0):
        am = build_adaptation(scalar, [[2.0]], Ts)
        for e in rng.normal(size=20) * 10:
            ref = -e * np.exp(-Ts) / (1 - np.exp(-Ts))
            worst_ad = max(worst_ad, abs(adaptation_step(am, [e], [0.0])[0] - ref) / abs(ref))
    ok = worst < 1e-9 and worst_ad < 1e-12
    record(6, ok, f"predictor vs fine RK4 max abs err {worst:.1e}; scalar adaptation rel err {worst_ad:.1e}")


# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def reference_runs():
    t0 = time.perf_counter()
    logs = {p.stem: run(load_scenario(p)) for p in sorted(SCENARIOS.glob("*.json"))}
    return logs, time.perf_counter() - t0


def circle_fit(x, y):
    """Algebraic least-squares circle; returns centre and radius."""
    A = np.column_stack([2 * x, 2 * y, np.ones_like(x)])
    (cx, cy, c), *_ = np.linalg.lstsq(A, x**2 + y**2, rcond=None)
    return cx, cy, np.sqrt(c + cx**2 + cy**2)


def final_revolution(lg):
    t, psi = lg["t"], np.unwrap(lg["psi"])
    start = np.searchsorted(psi, psi[-1] - 2 * np.pi)
    x, y = lg["x"][start:], lg["y"][start:]
    cx, cy, R = circle_fit(x, y)
    r = np.hypot(x - cx, y - cy)
    return R, (r.max() - r.min()) / R, t[start]


def test_criterion_7_qualitative_reproduction(reference_runs):
    logs, elapsed = reference_runs
    lines, ok = [], True
    # (a) depth keeping near the surface
    pd_, l1 = logs["depth_keeping_pd"], logs["depth_keeping_l1"]
    tail = lambda lg: (lg["t"] >= lg["t"][-1] - 100.0)
    off_pd = np.abs(pd_["z"][tail(pd_)] + 15.0)
    off_l1 = np.abs(l1["z"][tail(l1)] + 15.0)
    a_ok = off_pd.min() > 0.5 and off_l1.max() < 0.5
    lines.append(f"(a) last 100 s |z+15|: PD {off_pd.min():.3f}..{off_pd.max():.3f} m, "
                 f"L1 max {off_l1.max():.2e} m")
    # (b) turning circles
    for name in ("turning_circle_100m", "turning_circle_15m"):
        R, drift, ts = final_revolution(logs[name])
        ok_b = drift < 0.02 and logs[name]["t"][-1] - ts < 400.0
        lines.append(f"(b) {name}: R {R:.1f} m, final-revolution radius drift {100 * drift:.3f}%")
        a_ok &= ok_b
    # (c) canyon: PF finishes first; gamma-rate dip at the sharp turn
    pf, tt = logs["canyon_pf"], logs["canyon_tt"]
    curve = load_path(DATA / "paths" / "canyon.json").curve
    tau = np.linspace(0, curve.T, 5001)
    d1 = np.array([bernstein_eval(curve.derivative, s) for s in tau])
    d2 = np.array([bernstein_eval(curve.derivative.derivative, s) for s in tau])
    kappa = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / np.hypot(*d1.T)**3
    bend = tau[np.argmax(kappa)]
    inside = pf["gamma"] < curve.T - 1e-9
    gd = np.where(inside, pf["gamma_dot"], np.inf)
    k = int(np.argmin(gd))
    dip = gd[k] / np.median(pf["gamma_dot"][inside])
    c_ok = (pf.meta["termination"] == "end_of_path" and tt.meta["t_end"] == curve.T
            and pf.meta["t_end"] < tt.meta["t_end"] and abs(pf["gamma"][k] - bend) < 30.0 and dip < 0.85)
    lines.append(f"(c) PF ends {pf.meta['t_end']:.1f} s, TT ends {tt.meta['t_end']:.1f} s; gamma-dot min "
                 f"{dip:.2f} x median at gamma {pf['gamma'][k]:.1f} (max curvature at {bend:.1f})")
    ok = a_ok and c_ok and elapsed < 300.0
    record(7, ok, "; ".join(lines) + f"; {elapsed:.0f} s")


def test_criterion_8_rigid_body_conservation():
    mp = MassProperties(1000.0, cg=(0.3, -0.1, 0.2), gyration=(1.0, 2.5, 3.0), Ixy=20.0, Ixz=-15.0, Iyz=5.0)
    s = VehicleState([0, 0, -50], [0.1, -0.2, 0.3], [1.0, -0.5, 0.3, 0.4, -0.3, 0.2])
    E0 = kinetic_energy(mp, s.velocity)
    for k in range(1200):
        s = rk4_step(s, lambda t, st: np.zeros(6), 0.05, mp, t=k * 0.05)
    dE = abs(kinetic_energy(mp, s.velocity) / E0 - 1)

    def err(dt):
        x = np.array([1.0, 0.0])
        for k in range(int(round(2.0 / dt))):
            x = rk4(lambda t, x: np.array([x[1], -x[0]]), k * dt, x, dt)
        return abs(x[0] - np.cos(2.0))

    order = np.log2(err(0.1) / err(0.05))
    record(8, dE < 1e-5 and order >= 3.8, f"60 s free tumble rel energy drift {dE:.1e}; RK4 order {order:.3f}")


def test_criterion_9_determinism(reference_runs, tmp_path):
    logs, _ = reference_runs
    same = []
    for p in sorted(SCENARIOS.glob("*.json")):
        logs[p.stem].to_csv(tmp_path / "a.csv")
        doc = json.loads(p.read_text())
        if p.stem == "depth_keeping_l1":
            sc = load_scenario(p)  # one full-length rerun
        else:
            doc["duration"] = 60.0
            sc = scenario_from_dict(doc, str(p), p.parent)
            run(sc).to_csv(tmp_path / "a.csv")
        run(sc).to_csv(tmp_path / "b.csv")
        same.append((tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes())
    record(9, all(same), f"{sum(same)}/{len(same)} scenarios byte-identical on rerun")
