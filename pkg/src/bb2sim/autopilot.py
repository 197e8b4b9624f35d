"""PD depth/heading autopilot, X-plane + sail allocation and actuator limits."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .rigid_body import VehicleState, kinematics, wrap_angle

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AutopilotGains:
    """Gains in radians of plane deflection per metre / radian of error."""
    k_pz: float = np.deg2rad(3.0)
    k_dz: float = np.deg2rad(3.0)
    k_ppsi: float = 3.0
    k_dpsi: float = 12.2

    def __post_init__(self):
        if min(self.k_pz, self.k_dz, self.k_ppsi, self.k_dpsi) < 0:
            raise ValueError("autopilot gains must be non-negative")

    @classmethod
    def from_degrees(cls, k_pz, k_dz, k_ppsi, k_dpsi) -> "AutopilotGains":
        """Depth gains given in deg/m and deg/(m/s); heading gains in deg/deg and deg/(deg/s)."""
        return cls(np.deg2rad(k_pz), np.deg2rad(k_dz), float(k_ppsi), float(k_dpsi))


@dataclass(frozen=True)
class ActuatorLimits:
    delta_max: float = np.deg2rad(30.0)
    rate_max: float = np.deg2rad(10.0)

    def __post_init__(self):
        if not (self.delta_max > 0 and self.rate_max > 0):
            raise ValueError("actuator limits must be positive")


def pd_commands(z_ref: float, zdot_ref: float, psi_ref: float, psidot_ref: float,
                state: VehicleState, gains: AutopilotGains = AutopilotGains(), psi=None):
    """Vertical and horizontal commands (delta_V, delta_H) from depth and heading errors.

    Rates come from the kinematics; ``psi`` may override the measured heading
    (e.g. with an unwrapped value) since only the wrapped error is used.
    """
    pos_rate, att_rate = kinematics(state)
    z, zdot = state.position[2], pos_rate[2]
    heading = state.attitude[2] if psi is None else psi
    delta_V = gains.k_pz * (z_ref - z) + gains.k_dz * (zdot_ref - zdot)
    delta_H = gains.k_ppsi * wrap_angle(psi_ref - heading) + gains.k_dpsi * (psidot_ref - att_rate[2])
    return float(delta_V), float(delta_H)


ALLOCATION = np.array([
    [-1.0, 1.0],   # lower starboard
    [-1.0, -1.0],  # upper starboard
    [1.0, -1.0],   # upper port
    [1.0, 1.0],    # lower port
    [1.0, 0.0],    # sail
])


def allocate(delta_V: float, delta_H: float) -> np.ndarray:
    return ALLOCATION @ np.array([delta_V, delta_H], dtype=float)


def recover_commands(deltas) -> tuple[float, float]:
    """Inverse of :func:`allocate`: delta_V from the sail plane, delta_H from the starboard pair."""
    d = np.asarray(deltas, dtype=float)
    return float(d[4]), float((d[0] - d[1]) / 2.0)


def apply_limits(cmd, prev, dt: float, limits: ActuatorLimits = ActuatorLimits()) -> np.ndarray:
    """Clamp plane deflections to +/- delta_max and to rate_max * dt per step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    cmd = np.asarray(cmd, dtype=float)
    prev = np.asarray(prev, dtype=float)
    mag = np.clip(cmd, -limits.delta_max, limits.delta_max)
    step = limits.rate_max * dt
    out = np.clip(mag, prev - step, prev + step)
    if log.isEnabledFor(logging.DEBUG) and np.any(out != cmd):
        log.debug("plane command clamped: %s -> %s", cmd, out)
    return out
