"""Fit the synthetic canyon thalweg: an order-24 Bernstein curve on [0, 500] s.

Target: a 700 m eastward leg, a 40 m-radius left bend, and a 1400 m northward leg,
traversed at a nearly uniform parametric speed. The fit minimizes the distance to
the target shape plus the speed spread, with a small second-difference penalty
on the control polygon. End tangents are pinned to the legs.

    python3 scripts/design_canyon_path.py > points.json
"""
import json

import numpy as np
from scipy.optimize import least_squares

from bb2sim.guidance import bernstein_basis

T = 500.0


def distance_to_target(Q, L1, L2, R):
    a = L1 - R
    x, y = Q[:, 0], Q[:, 1]
    d1 = np.hypot(x - np.clip(x, 0, a), y)
    d2 = np.hypot(x - L1, y - np.clip(y, R, L2))
    ang = np.arctan2(y - R, x - a)
    d3 = np.where((ang >= -np.pi / 2) & (ang <= 0), np.abs(np.hypot(x - a, y - R) - R), np.inf)
    return np.minimum(np.minimum(d1, d2), d3)


def design(N=24, L1=700.0, L2=1400.0, R=40.0, w_speed=40.0, w_smooth=0.3, n=600):
    length = (L1 - R) + (L2 - R) + np.pi / 2 * R
    v0 = length / T
    u = np.linspace(0.0, 1.0, n)
    B = bernstein_basis(N, u)
    Bd = N * (bernstein_basis(N - 1, u) @ np.diff(np.eye(N + 1), axis=0)) / T
    s = np.linspace(0.0, L1 + L2, N + 1)
    P0 = np.array([[min(si, L1), max(si - L1, 0.0)] for si in s])

    def unpack(z):
        P = P0.copy()
        P[1, 0] = z[0]
        P[2:-2] = z[1:-1].reshape(-1, 2)
        P[-2, 1] = z[-1]
        return P

    def residuals(z):
        P = unpack(z)
        speed = np.linalg.norm(Bd @ P, axis=1)
        return np.concatenate([distance_to_target(B @ P, L1, L2, R), w_speed * (speed - v0),
                               w_smooth * np.diff(P, 2, axis=0).ravel()])

    z0 = np.concatenate([[P0[1, 0]], P0[2:-2].ravel(), [P0[-2, 1]]])
    sol = least_squares(residuals, z0, method="trf", max_nfev=300)
    return unpack(sol.x)


if __name__ == "__main__":
    print(json.dumps(np.round(design(), 2).tolist()))
