"""Gaussian-beam optical dipole trap: potential, depth and trap frequencies.

The trap is an ideal focused Gaussian beam.  Depth is specified through the
measured radial frequency rather than a polarizability calculation, since
the frequency is the directly measured quantity.  The potential is negative
(bound) everywhere with minimum -U0 at the focus; ``depth`` stores U0 > 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CONSTANTS, khz_to_angular, angular_to_khz


@dataclass(frozen=True)
class TrapGeometry:
    """Focused Gaussian-beam trap with derived harmonic frequencies.

    ``rayleigh_range``, ``omega_radial`` and ``omega_axial`` are derived
    from (wavelength, waist, depth, mass) at construction and are verified
    to stay consistent with the primary fields.
    """

    wavelength: float = 851e-9
    waist: float = 1.1e-6
    depth: float = 0.0                       # U0 > 0, joules
    mass: float = CONSTANTS.mass_rb87
    rayleigh_range: float = 0.0
    omega_radial: float = 0.0
    omega_axial: float = 0.0

    def __post_init__(self):
        if min(self.wavelength, self.waist, self.depth, self.mass) <= 0:
            raise ValueError("wavelength, waist, depth and mass must be > 0")
        zr = np.pi * self.waist**2 / self.wavelength
        om_r = np.sqrt(4.0 * self.depth / (self.mass * self.waist**2))
        om_z = np.sqrt(2.0 * self.depth / (self.mass * zr**2))
        for name, value in (("rayleigh_range", zr), ("omega_radial", om_r),
                            ("omega_axial", om_z)):
            stored = getattr(self, name)
            if stored == 0.0:
                object.__setattr__(self, name, value)
            elif abs(stored / value - 1.0) > 1e-12:
                raise ValueError(f"{name} inconsistent with waist/depth/mass")

    @classmethod
    def from_radial_frequency(cls, omega_radial: float, waist: float = 1.1e-6,
                              wavelength: float = 851e-9,
                              mass: float = CONSTANTS.mass_rb87) -> "TrapGeometry":
        depth = depth_from_radial_frequency(omega_radial, waist, mass)
        return cls(wavelength=wavelength, waist=waist, depth=depth, mass=mass)

    def to_config(self) -> dict:
        """Lab-unit dict (nm, um, mK, kHz ordinary frequency) for JSON configs."""
        return {
            "wavelength_nm": self.wavelength * 1e9,
            "waist_um": self.waist * 1e6,
            "depth_mk": self.depth / CONSTANTS.kb * 1e3,
            "omega_radial_khz": angular_to_khz(self.omega_radial),
            "omega_axial_khz": angular_to_khz(self.omega_axial),
        }

    @classmethod
    def from_config(cls, cfg: dict, mass: float = CONSTANTS.mass_rb87) -> "TrapGeometry":
        trap = cls(wavelength=cfg["wavelength_nm"] * 1e-9,
                   waist=cfg["waist_um"] * 1e-6,
                   depth=cfg["depth_mk"] * 1e-3 * CONSTANTS.kb,
                   mass=mass)
        for key, stored in (("omega_radial_khz", trap.omega_radial),
                            ("omega_axial_khz", trap.omega_axial)):
            if key in cfg and abs(khz_to_angular(cfg[key]) / stored - 1.0) > 1e-9:
                raise ValueError(f"config {key} inconsistent with depth/waist")
        return trap


def depth_from_radial_frequency(omega_radial: float, waist: float,
                                mass: float) -> float:
    """Harmonic-expansion depth U0 = m w0^2 omega_r^2 / 4 (joules)."""
    if min(omega_radial, waist, mass) <= 0:
        raise ValueError("omega_radial, waist and mass must be > 0")
    return mass * waist**2 * omega_radial**2 / 4.0


def trap_frequencies(geometry: TrapGeometry, mass: float | None = None):
    """(omega_radial, omega_axial) from the harmonic expansion of the focus."""
    m = geometry.mass if mass is None else mass
    om_r = np.sqrt(4.0 * geometry.depth / (m * geometry.waist**2))
    om_z = np.sqrt(2.0 * geometry.depth / (m * geometry.rayleigh_range**2))
    return om_r, om_z


def potential(geometry: TrapGeometry, position) -> float | np.ndarray:
    """Optical potential U(r, z) <= 0 of the ideal Gaussian beam (joules).

    ``position`` is a 3-vector (x, y, z) with z along the beam, or an
    (..., 3) array of such vectors.
    """
    pos = np.asarray(position, dtype=float)
    x, y, z = pos[..., 0], pos[..., 1], pos[..., 2]
    expand = 1.0 + (z / geometry.rayleigh_range) ** 2
    w2 = geometry.waist**2 * expand
    u = -geometry.depth * np.exp(-2.0 * (x**2 + y**2) / w2) / expand
    return float(u) if pos.ndim == 1 else u
