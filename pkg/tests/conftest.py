import json
from pathlib import Path

import numpy as np
import pytest

import bb2sim

DATA = Path(bb2sim.__file__).parent / "data"
SCENARIOS = DATA / "scenarios"

# acceptance criterion -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"CRITERION {key}: {'PASS' if ok else 'FAIL'}  {detail}")


def write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=1))
    return Path(path)


def zero_coefficients(**overrides):
    """Dimensional coefficient document with no hydrodynamic loads at all."""
    doc = {
        "schema_version": 1,
        "name": "zero",
        "units": {"system": "dimensional"},
        "origin": {"description": "centre of gravity"},
        "mass": {"mass": 1000.0, "cg": [0.0, 0.0, 0.0], "gyration": [1.0, 2.0, 2.0]},
        "buoyancy": {"B": "neutral", "cb": [0.0, 0.0, 0.0]},
        "quad_terms": [],
        "added_mass": [],
        "surfaces": {"terms": []},
        "propeller": {"diameter": 1.0, "kt": [0.0], "kq": [0.0]},
    }
    doc.update(overrides)
    return doc


def coast_scenario(coeff_file="coeffs.json", **overrides):
    doc = {
        "schema_version": 1,
        "name": "coast",
        "coefficients": coeff_file,
        "initial_state": {"position": [0.0, 0.0, -20.0], "velocity": [2.0, 0, 0, 0, 0, 0]},
        "controller": {"mode": "setpoint"},
        "autopilot": {"k_pz": 0.0, "k_dz": 0.0, "k_ppsi": 0.0, "k_dpsi": 0.0},
        "propulsion": {"mode": "fixed", "n": 0.0},
        "dt": 0.05,
        "duration": 10.0,
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def coast_dir(tmp_path):
    write_json(tmp_path / "coeffs.json", zero_coefficients())
    write_json(tmp_path / "coast.json", coast_scenario())
    return tmp_path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def model_loop(ctrl, u_ref, duration, dt=0.05, f0=None, augment=True, record=None):
    """Plant identical to the reference model M(s), optionally with a constant state disturbance f0.

    The plant is advanced with an exact ZOH step of length dt and the controller runs every
    Ts = k dt. With ``augment=False`` the reference is fed straight through (the unaugmented loop).
    Returns (t, y, y_m) where y_m is the disturbance-free response of M(s) to u_ref.
    """
    from scipy import linalg

    model = ctrl.model
    n = model.n
    ratio = int(round(ctrl.am.Ts / dt))
    E = linalg.expm(np.block([[model.A, np.eye(n)], [np.zeros((n, 2 * n))]]) * dt)
    Ad, Gd = E[:n, :n], E[:n, n:]
    f0 = np.zeros(n) if f0 is None else np.asarray(f0, float)
    x = np.zeros(n)
    xm = np.zeros(n)
    steps = int(round(duration / dt))
    t = np.arange(steps + 1) * dt
    y, ym = np.zeros((steps + 1, model.m)), np.zeros((steps + 1, model.m))
    ctrl.reset(model.C @ x)
    u = np.zeros(model.m)
    for k in range(steps + 1):
        y[k], ym[k] = model.C @ x, model.C @ xm
        r = np.asarray(u_ref(t[k]), float)
        if k % ratio == 0:
            u = ctrl.step(y[k], r) if augment else model.K_g @ r
            if record is not None:
                record(ctrl)
        x = Ad @ x + Gd @ (model.B @ u + f0)
        xm = Ad @ xm + Gd @ (model.B @ (model.K_g @ r))
    return t, y, ym
