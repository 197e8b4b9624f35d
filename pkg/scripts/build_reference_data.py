"""Regenerate the bundled reference coefficients, canyon path and scenario files.

    python3 scripts/build_reference_data.py
"""
import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "bb2sim" / "data"
L = 70.2

# stern-plane sign patterns matching the allocation matrix columns
S_V = (-1, -1, 1, 1)
S_H = (1, -1, -1, 1)


def reference_coefficients():
    quad = [
        ("X", "u", "u", -0.0012, True),
        ("Y", "u", "v", -0.028, False), ("Y", "u", "r", 0.006, False), ("Y", "v", "v", -0.03, True),
        ("Z", "u", "w", -0.05, False), ("Z", "u", "q", -0.007, False), ("Z", "w", "w", -0.03, True),
        ("K", "u", "p", -1e-4, False),
        ("M", "u", "w", 0.0035, False), ("M", "u", "q", -0.024, False), ("M", "q", "q", -0.002, True),
        ("N", "u", "v", -0.005, False), ("N", "u", "r", -0.005, False), ("N", "r", "r", -0.002, True),
    ]
    added = [("X", "u", -0.0008), ("Y", "v", -0.024), ("Z", "w", -0.024), ("K", "p", -1e-5),
             ("M", "q", -0.0011), ("N", "r", -0.0011)]
    terms = []
    for l in range(4):
        terms += [
            {"surface": l + 1, "axis": "Z", "value": S_V[l] * 0.0008 / 4},
            {"surface": l + 1, "axis": "M", "value": S_V[l] * 0.00036 / 4},
            {"surface": l + 1, "axis": "Y", "value": S_H[l] * -0.0133 / 4},
            {"surface": l + 1, "axis": "N", "value": S_H[l] * 0.006 / 4},
        ]
    terms += [{"surface": 5, "axis": "Z", "value": -0.02}, {"surface": 5, "axis": "M", "value": 0.0028}]
    return {
        "schema_version": 1,
        "name": "reference_bb2",
        "comment": ("REFERENCE SET, NOT VALIDATED. Physically plausible values for a 70 m, "
                    "4440 m^3 submarine; not derived from CFD or model tests."),
        "units": {"system": "prime", "length": L, "rho": 1025.0},
        "origin": {"description": "centre of the procedural hull volume", "x_from_nose": 35.1},
        "mass": {"displacement_volume": 4440.0, "cg": [0.0, 0.0, 0.0443], "gyration": [3.433, 17.6, 17.522]},
        "buoyancy": {"B": "neutral", "cb": [0.0, 0.0, -0.436]},
        "quad_terms": [{"axis": a, "vars": [j, k], "value": v, "signed": s} for a, j, k, v, s in quad],
        "added_mass": [{"axis": a, "var": v, "value": c} for a, v, c in added],
        "surfaces": {"deflection_law": "linear", "delta_max_deg": 30.0, "terms": terms},
        "propeller": {"diameter": 5.0, "kt": [0.4, -0.3], "kq": [0.05, -0.03], "j_range": [0.0, 1.3],
                      "n_max": 3.0, "torque_sign": -1},
    }


# frozen output of scripts/design_canyon_path.py (order 24, 40 m bend, near-uniform speed)
CANYON_POINTS = [[0.0, 0.0], [86.25, 0.0], [163.56, -26.32], [274.38, 10.43],
           [356.66, 67.74], [390.66, 40.95], [460.23, -75.06], [621.67, -162.78],
           [804.73, -112.28], [883.56, 63.25], [815.15, 251.97], [680.45, 361.61],
           [598.53, 396.4], [618.86, 426.56], [695.66, 504.53], [749.73, 620.87],
           [743.87, 732.03], [703.41, 814.36], [676.57, 882.82], [683.37, 962.64],
           [703.35, 1055.99], [708.36, 1146.05], [699.46, 1228.07], [700.0, 1314.0],
           [700.0, 1400.0]]


def canyon_path():
    return {
        "schema_version": 1,
        "name": "synthetic_canyon",
        "comment": "Synthetic canyon-style thalweg: 700 m leg, tight left bend, 1400 m leg; about 4.1 m/s nominal.",
        "kind": "trajectory",
        "order": len(CANYON_POINTS) - 1,
        "T": 500.0,
        "control_points": CANYON_POINTS,
        "depth_profile": [-60.0],
    }


SUCTION = {"depth": [0.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0],
           "Z": [-4.0e5, -3.0e5, -2.25e5, -1.5e5, -1.0e5, -0.3e5, 0.0],
           "M": [0.0] * 7}


def scenarios():
    base = {"schema_version": 1, "coefficients": "../reference_bb2.json", "dt": 0.05, "seed": 0}
    out = {}
    for tag, on in (("pd", False), ("l1", True)):
        out[f"depth_keeping_{tag}"] = {
            **base, "name": f"depth_keeping_{tag}",
            "comment": "Near-surface depth keeping at -15 m with surface suction.",
            "initial_state": {"position": [0, 0, -15], "attitude_deg": [0, 0, 0], "velocity": [4.1, 0, 0, 0, 0, 0]},
            "controller": {"mode": "setpoint", "z": -15.0, "psi_deg": 0.0, "speed": 4.1},
            "l1": {"enabled": on},
            "disturbances": {"suction": SUCTION},
            "duration": 600.0,
        }
    for depth in (100, 15):
        out[f"turning_circle_{depth}m"] = {
            **base, "name": f"turning_circle_{depth}m",
            "comment": f"Constant heading-rate turn at {depth} m depth.",
            "initial_state": {"position": [0, 0, -depth], "attitude_deg": [0, 0, 0],
                              "velocity": [4.1, 0, 0, 0, 0, 0]},
            "controller": {"mode": "setpoint", "z": -float(depth), "psi_deg": 0.0, "psi_rate_deg": 1.0,
                           "speed": 4.1},
            "l1": {"enabled": True},
            "disturbances": {"suction": SUCTION} if depth < 40 else {},
            "duration": 900.0,
        }
    for mode in ("pf", "tt"):
        out[f"canyon_{mode}"] = {
            **base, "name": f"canyon_{mode}",
            "comment": "Synthetic canyon path; PF at about 10 kts, TT with T = 500 s.",
            "initial_state": {"position": [0, -30, -60], "attitude_deg": [0, 0, 0],
                              "velocity": [5.14, 0, 0, 0, 0, 0]},
            "controller": {"mode": mode, "path": "../paths/canyon.json", "speed": 5.14, "d": 50.0,
                           "k_gamma": 1.0, "k_p": 0.1, "v_min": 1.0, "v_max": 8.0, "end": "stop"},
            "l1": {"enabled": True},
            "duration": 600.0,
        }
    return out


def dump(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")


def main():
    dump(DATA / "reference_bb2.json", reference_coefficients())
    dump(DATA / "paths" / "canyon.json", canyon_path())
    for name, doc in scenarios().items():
        dump(DATA / "scenarios" / f"{name}.json", doc)
    print(f"wrote reference data under {DATA}")


if __name__ == "__main__":
    main()
