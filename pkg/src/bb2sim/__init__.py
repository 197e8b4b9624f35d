"""Reduced-order 6DoF submarine simulator with guidance and L1 adaptive control."""

__version__ = "0.1.0"

RHO = 1025.0  # seawater density [kg/m^3]
G = 9.81  # gravitational acceleration [m/s^2]
