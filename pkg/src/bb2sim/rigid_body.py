"""Rigid-body equations of motion in the body frame and a fixed-step RK4 integrator.

Frames: the body frame is x forward, y starboard, z down. The inertial position is
stored as (x, y, z) with z positive *up* (depth below the calm surface is -z); the
horizontal axes follow the usual north/east convention so that heading psi is
measured from +x toward +y. Euler angles use the ZYX (yaw-pitch-roll) sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GimbalLock, NonFiniteState, SingularMassMatrix

GIMBAL_MARGIN = 1e-3
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class MassProperties:
    m: float
    cg: tuple = (0.0, 0.0, 0.0)
    gyration: tuple = (1.0, 1.0, 1.0)
    Ixy: float = 0.0
    Ixz: float = 0.0
    Iyz: float = 0.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if len(self.cg) != 3 or len(self.gyration) != 3:
            raise ValueError("cg and gyration must have three components")
        if any(not r > 0 for r in self.gyration):
            raise ValueError(f"gyration radii must be positive, got {self.gyration}")
        object.__setattr__(self, "cg", tuple(float(c) for c in self.cg))
        object.__setattr__(self, "gyration", tuple(float(r) for r in self.gyration))
        # inertia about the CG (parallel-axis theorem) must be positive definite
        r = np.array(self.cg)
        I_cg = self.inertia - self.m * (r @ r * np.eye(3) - np.outer(r, r))
        if np.linalg.eigvalsh(I_cg).min() <= 0:
            raise ValueError("inertia about the centre of gravity is not positive definite")

    @property
    def inertia(self) -> np.ndarray:
        rx, ry, rz = self.gyration
        m = self.m
        return np.array([
            [m * rx**2, -self.Ixy, -self.Ixz],
            [-self.Ixy, m * ry**2, -self.Iyz],
            [-self.Ixz, -self.Iyz, m * rz**2],
        ])

    def with_mass(self, m: float) -> "MassProperties":
        return MassProperties(m, self.cg, self.gyration, self.Ixy, self.Ixz, self.Iyz)


@dataclass(frozen=True)
class VehicleState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "attitude", np.asarray(self.attitude, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(6))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.position, self.attitude, self.velocity])

    @classmethod
    def from_array(cls, x) -> "VehicleState":
        x = np.asarray(x, dtype=float)
        return cls(x[0:3], x[3:6], x[6:12])

    @property
    def depth(self) -> float:
        return -float(self.position[2])


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if np.ndim(w) == 0 else w


def rotation_matrix(phi: float, theta: float, psi: float) -> np.ndarray:
    """Body-to-NED rotation for ZYX Euler angles."""
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    return np.array([
        [cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf],
        [sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf],
        [-st, ct * sf, ct * cf],
    ])


def body_to_inertial_points(position, attitude, r_body):
    """Map body-frame points (n, 3) to inertial (x, y, z-up) coordinates."""
    R = rotation_matrix(*attitude)
    ned = np.asarray(r_body) @ R.T
    out = ned + np.array([position[0], position[1], -position[2]])
    out[..., 2] *= -1.0
    return out


def assemble_mass_matrix(mp: MassProperties) -> np.ndarray:
    m = mp.m
    xg, yg, zg = mp.cg
    M = np.zeros((6, 6))
    M[:3, :3] = m * np.eye(3)
    S = np.array([
        [0.0, m * zg, -m * yg],
        [-m * zg, 0.0, m * xg],
        [m * yg, -m * xg, 0.0],
    ])
    M[:3, 3:] = S
    M[3:, :3] = S.T
    M[3:, 3:] = mp.inertia
    return M


def coupling_split(mp: MassProperties, s) -> tuple[np.ndarray, np.ndarray]:
    """Split the non-inertial coupling vector into velocity products and acceleration terms.

    Returns ``(b_vel, B_acc)`` with ``b = b_vel + B_acc @ s_dot``.
    """
    u, v, w, p, q, r = s
    m = mp.m
    xg, yg, zg = mp.cg
    omega = np.array([p, q, r])
    # omega x (I omega): equals (Izz-Iyy)qr, (Ixx-Izz)rp, (Iyy-Ixx)pq when the products vanish
    gyro = np.cross(omega, mp.inertia @ omega)
    b_vel = np.array([
        m * (w * q - v * r - xg * (q * q + r * r) + yg * p * q + zg * p * r),
        m * (u * r - w * p - yg * (r * r + p * p) + zg * q * r + xg * q * p),
        m * (v * p - u * q - zg * (p * p + q * q) + xg * r * p + yg * r * q),
        gyro[0] + m * (yg * (-u * q + v * p) - zg * (-w * p + u * r)),
        gyro[1] + m * (zg * (-v * r + w * q) - xg * (-u * q + v * p)),
        gyro[2] + m * (xg * (-w * p + u * r) - yg * (-v * r + w * q)),
    ])
    B = np.zeros((6, 6))
    B[0, 5], B[0, 4] = -m * yg, m * zg
    B[1, 3], B[1, 5] = -m * zg, m * xg
    B[2, 4], B[2, 3] = -m * xg, m * yg
    B[3, 2], B[3, 1] = m * yg, -m * zg
    B[4, 0], B[4, 2] = m * zg, -m * xg
    B[5, 1], B[5, 0] = m * xg, -m * yg
    return b_vel, B


def solve_accelerations(M_eff, rhs) -> np.ndarray:
    M_eff = np.asarray(M_eff, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    cond = np.linalg.cond(M_eff)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMassMatrix(f"effective mass matrix condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}")
    return np.linalg.solve(M_eff, rhs)


def euler_rates(attitude, omega) -> np.ndarray:
    phi, theta, _ = attitude
    if abs(theta) >= np.pi / 2 - GIMBAL_MARGIN:
        raise GimbalLock(f"pitch {theta:.6f} rad too close to +/-pi/2")
    p, q, r = omega
    sf, cf = np.sin(phi), np.cos(phi)
    ct, tt = np.cos(theta), np.tan(theta)
    return np.array([
        p + (q * sf + r * cf) * tt,
        q * cf - r * sf,
        (q * sf + r * cf) / ct,
    ])


def kinematics(state: VehicleState) -> tuple[np.ndarray, np.ndarray]:
    """Return (position rate in x, y, z-up; Euler-angle rates)."""
    R = rotation_matrix(*state.attitude)
    ned_rate = R @ state.velocity[:3]
    pos_rate = np.array([ned_rate[0], ned_rate[1], -ned_rate[2]])
    return pos_rate, euler_rates(state.attitude, state.velocity[3:])


def state_derivative(x, force, M_eff, b_vel) -> np.ndarray:
    """12-state derivative for a given total external load and effective mass matrix."""
    st = VehicleState.from_array(x)
    pos_rate, att_rate = kinematics(st)
    sdot = solve_accelerations(M_eff, np.asarray(force) - b_vel)
    return np.concatenate([pos_rate, att_rate, sdot])


def rk4(f, t: float, x, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of x' = f(t, x)."""
    k1 = f(t, x)
    k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def finalize_state(x) -> np.ndarray:
    """Check finiteness and the gimbal guard, then wrap the Euler angles."""
    x = np.array(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteState("state contains NaN or Inf")
    if abs(x[4]) >= np.pi / 2 - GIMBAL_MARGIN:
        raise GimbalLock(f"pitch {x[4]:.6f} rad too close to +/-pi/2")
    x[3:6] = wrap_angle(x[3:6])
    return x


def rk4_step(state: VehicleState, force_fn, dt: float, mp: MassProperties,
             t: float = 0.0, added_mass=None) -> VehicleState:
    """Advance the full 12-state rigid-body system by one RK4 step.

    ``force_fn(t, state)`` returns the total external body-frame load. The
    acceleration terms of the coupling vector coincide with the CG block of the
    mass matrix, so only the velocity products enter the right-hand side.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    M = assemble_mass_matrix(mp)
    if added_mass is not None:
        M = M - np.asarray(added_mass)

    def f(tt, x):
        st = VehicleState.from_array(x)
        b_vel, _ = coupling_split(mp, st.velocity)
        return state_derivative(x, force_fn(tt, st), M, b_vel)

    return VehicleState.from_array(finalize_state(rk4(f, t, state.as_array(), dt)))


def kinetic_energy(mp: MassProperties, s) -> float:
    s = np.asarray(s, dtype=float)
    return 0.5 * float(s @ assemble_mass_matrix(mp) @ s)
