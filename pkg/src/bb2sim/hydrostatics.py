"""Hydrostatic restoring loads and wave pressure loads integrated over a hull mesh."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import G, RHO
from .mesh import HullMesh
from .rigid_body import MassProperties, body_to_inertial_points, rotation_matrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WaveParams:
    amplitude: float = 0.0
    wavenumber: float = 0.01
    frequency: float | None = None
    deep_water: bool = True

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("wave amplitude must be >= 0")
        if not self.wavenumber > 0:
            raise ValueError("wave number must be > 0")
        if self.frequency is None:
            if not self.deep_water:
                raise ValueError("wave frequency required when the dispersion flag is off")
            object.__setattr__(self, "frequency", float(np.sqrt(G * self.wavenumber)))
        elif self.deep_water:
            w2 = G * self.wavenumber
            if abs(self.frequency**2 - w2) > 1e-9 * w2:
                raise ValueError(f"deep-water dispersion violated: omega^2={self.frequency**2}, g*k={w2}")

    def elevation(self, x, t):
        return self.amplitude * np.sin(self.wavenumber * np.asarray(x) - self.frequency * t)


CALM = WaveParams(0.0)


@dataclass(frozen=True)
class BuoyancyProperties:
    B: float
    cb: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.B < 0:
            raise ValueError("buoyancy must be >= 0")
        object.__setattr__(self, "cb", tuple(float(c) for c in self.cb))


def wave_pressure(point, t: float, wp: WaveParams, rho: float = RHO, g: float = G):
    """Pressure of a progressive deep-water regular wave at inertial point(s) (x, y, z-up)."""
    point = np.asarray(point, dtype=float)
    x, z = point[..., 0], point[..., 2]
    return -rho * g * z + rho * g * wp.amplitude * np.exp(wp.wavenumber * z) * np.sin(wp.wavenumber * x - wp.frequency * t)


def integrate_pressure(mesh: HullMesh, position, attitude, pressure_fn) -> np.ndarray:
    """Body-frame force and moment of a pressure field over a closed mesh.

    ``pressure_fn`` maps inertial points of shape (..., 3) to pressures. Each element
    is integrated with the three-point edge-midpoint rule; moments are taken about
    the body origin with one cross product per Gauss point.
    """
    gp = mesh.gauss_points  # (nt, 3, 3) body frame
    pts = body_to_inertial_points(position, attitude, gp.reshape(-1, 3)).reshape(gp.shape)
    p = pressure_fn(pts)  # (nt, 3)
    A = mesh.area_vectors
    force = -(p.sum(axis=1)[:, None] * A).sum(axis=0) / 3.0
    rp = (gp * p[:, :, None]).sum(axis=1)  # r12 p12 + r23 p23 + r31 p31
    moment = -np.cross(rp, A).sum(axis=0) / 3.0
    return np.concatenate([force, moment])


def _clamped(wp: WaveParams, t: float, rho: float, g: float):
    def fn(pts):
        p = wave_pressure(pts, t, wp, rho, g)
        dry = pts[..., 2] > wp.elevation(pts[..., 0], t)
        if np.any(dry):
            log.debug("clamped pressure at %d Gauss points above the free surface", int(dry.sum()))
            p = np.where(dry, 0.0, p)
        return p
    return fn


def integrate_wave_loads(mesh: HullMesh, position, attitude, t: float, wp: WaveParams,
                         rho: float = RHO, g: float = G) -> np.ndarray:
    """Total pressure load (hydrostatic + wave) from the regular-wave pressure field."""
    return integrate_pressure(mesh, position, attitude, _clamped(wp, t, rho, g))


def wave_excess_loads(mesh: HullMesh, position, attitude, t: float, wp: WaveParams,
                      rho: float = RHO, g: float = G) -> np.ndarray:
    """Wave-induced part only: full field minus the calm-water field (both clamped)."""
    if wp.amplitude == 0.0:
        return np.zeros(6)
    calm = WaveParams(0.0, wp.wavenumber, wp.frequency, wp.deep_water)
    return (integrate_wave_loads(mesh, position, attitude, t, wp, rho, g)
            - integrate_wave_loads(mesh, position, attitude, t, calm, rho, g))


def mesh_buoyancy(mesh: HullMesh, rho: float = RHO, g: float = G) -> BuoyancyProperties:
    """Fully submerged buoyancy and centre of buoyancy of a closed mesh."""
    return BuoyancyProperties(rho * g * mesh.signed_volume(), tuple(mesh.centroid()))


def hydrostatic_restoring(mp: MassProperties, bp: BuoyancyProperties, attitude, g: float = G,
                          weight: float | None = None, literal: bool = False) -> np.ndarray:
    """Restoring force and moment of weight W = m g at the CG and buoyancy B at the CB.

    Rows 1-4 follow the standard submarine form. In the pitch and yaw rows the
    default signs of the z_G and x_G terms are the ones that follow from the point
    loads (G below B restores pitch); ``literal=True`` flips those two terms to the
    alternative printed layout.
    """
    phi, theta = attitude[0], attitude[1]
    W = mp.m * g if weight is None else weight
    B = bp.B
    xg, yg, zg = mp.cg
    xb, yb, zb = bp.cb
    st, ct = np.sin(theta), np.cos(theta)
    sf, cf = np.sin(phi), np.cos(phi)
    zm = zg * W - zb * B
    xm = xg * W - xb * B
    ym = yg * W - yb * B
    sgn = -1.0 if literal else 1.0
    return np.array([
        -(W - B) * st,
        (W - B) * ct * sf,
        (W - B) * ct * cf,
        ym * ct * cf - zm * ct * sf,
        -sgn * zm * st - xm * ct * cf,
        ym * st + sgn * xm * ct * sf,
    ])


def gravity_buoyancy_vector(mp: MassProperties, bp: BuoyancyProperties, attitude, g: float = G) -> np.ndarray:
    """Independent check of the restoring vector from point loads W (at G) and B (at B).

    Kept separate from :func:`hydrostatic_restoring` for use as a test oracle.
    """
    R = rotation_matrix(*attitude)
    down = R.T @ np.array([0.0, 0.0, 1.0])
    fw = mp.m * g * down
    fb = -bp.B * down
    return np.concatenate([fw + fb, np.cross(mp.cg, fw) + np.cross(bp.cb, fb)])
