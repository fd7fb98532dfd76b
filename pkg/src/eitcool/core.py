"""Shared domain types, physical constants and unit conversions.

All frequencies are stored internally as *angular* frequencies in rad/s.
Ordinary frequencies (MHz, kHz) appear only at the boundaries -- the CLI,
config files and CSV artifacts -- and are converted by 2*pi on the way in
and out.  This removes the most common factor-of-2*pi mistake in this
domain.
"""
from __future__ import annotations

import dataclasses
import io
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

SPECTRUM_KINDS = ("analytic_rate", "obe_rate", "photon_counts")


def mhz_to_angular(f_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/s."""
    return TWO_PI * 1e6 * f_mhz


def khz_to_angular(f_khz: float) -> float:
    """Ordinary frequency in kHz -> angular frequency in rad/s."""
    return TWO_PI * 1e3 * f_khz


def angular_to_mhz(omega):
    """Angular frequency in rad/s -> ordinary frequency in MHz."""
    return np.asarray(omega) / (TWO_PI * 1e6) if np.ndim(omega) else omega / (TWO_PI * 1e6)


def angular_to_khz(omega):
    """Angular frequency in rad/s -> ordinary frequency in kHz."""
    return np.asarray(omega) / (TWO_PI * 1e3) if np.ndim(omega) else omega / (TWO_PI * 1e3)


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants in SI units (CODATA values, non-tunable).

    ``gamma_d2`` is the natural linewidth of the Rb87 D2 line kept at full
    precision 2*pi x 6.07 MHz; rounded variants belong in display code, not
    here.  Every constant can be overridden per scenario through the config
    layer.
    """

    hbar: float = 1.054571817e-34          # J s
    kb: float = 1.380649e-23               # J/K (exact)
    mass_rb87: float = 1.44316e-25         # kg
    gamma_d2: float = TWO_PI * 6.07e6      # rad/s
    wavelength_d2: float = 780.24e-9       # m

    def __post_init__(self):
        for name in ("hbar", "kb", "mass_rb87", "gamma_d2", "wavelength_d2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


CONSTANTS = PhysicalConstants()


def saturation_to_rabi(s: float, gamma: float) -> float:
    """Rabi frequency Omega = gamma*sqrt(s/2) for saturation s = 2*Omega^2/gamma^2."""
    if s < 0:
        raise ValueError(f"saturation must be >= 0, got {s}")
    return gamma * np.sqrt(s / 2.0)


def rabi_to_saturation(omega: float, gamma: float) -> float:
    """Saturation s = 2*Omega^2/gamma^2."""
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return 2.0 * omega**2 / gamma**2


@dataclass(frozen=True)
class LambdaParams:
    """Drive and decay parameters of a three-level Lambda system.

    The probe couples |g> to |e> with Rabi frequency ``omega_p`` and
    detuning ``delta_p``; the coupling beam couples |g'> to |e> with
    ``omega_c`` and ``delta_c``.  The excited state decays at total rate
    ``gamma``, split between the two ground states by the branching
    fractions; any remainder 1 - branch_g - branch_gp leaks out of the
    three-level system.

    All rates and detunings are angular frequencies in rad/s.  Instances
    are immutable and safe to share between workers.
    """

    omega_p: float
    omega_c: float
    delta_p: float
    delta_c: float
    gamma: float = CONSTANTS.gamma_d2
    branch_g: float = 0.5
    branch_gp: float = 0.5

    def __post_init__(self):
        if self.omega_p < 0 or self.omega_c < 0:
            raise ValueError("Rabi frequencies must be >= 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.branch_g < 0 or self.branch_gp < 0:
            raise ValueError("branching fractions must be >= 0")
        if self.branch_g + self.branch_gp > 1.0 + 1e-12:
            raise ValueError("branch_g + branch_gp must not exceed 1")

    @classmethod
    def from_saturations(cls, s_p: float, s_c: float, delta_p: float,
                         delta_c: float, gamma: float = CONSTANTS.gamma_d2,
                         **kwargs) -> "LambdaParams":
        return cls(omega_p=saturation_to_rabi(s_p, gamma),
                   omega_c=saturation_to_rabi(s_c, gamma),
                   delta_p=delta_p, delta_c=delta_c, gamma=gamma, **kwargs)

    @property
    def probe_saturation(self) -> float:
        return rabi_to_saturation(self.omega_p, self.gamma)

    @property
    def coupling_saturation(self) -> float:
        return rabi_to_saturation(self.omega_c, self.gamma)

    @property
    def branch_leak(self) -> float:
        return max(0.0, 1.0 - self.branch_g - self.branch_gp)

    def replace(self, **changes) -> "LambdaParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Spectrum:
    """A sampled excitation spectrum over a probe-detuning grid.

    ``delta_p`` is strictly increasing (rad/s); ``values`` are dimensionless
    normalized rates or photon counts depending on ``kind``.
    """

    delta_p: np.ndarray
    values: np.ndarray
    kind: str = "analytic_rate"

    def __post_init__(self):
        object.__setattr__(self, "delta_p", np.asarray(self.delta_p, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.kind not in SPECTRUM_KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.delta_p.ndim != 1 or self.delta_p.size == 0:
            raise ValueError("delta_p must be a non-empty 1-d grid")
        if self.delta_p.shape != self.values.shape:
            raise ValueError("delta_p and values must have matching shapes")
        if self.delta_p.size > 1 and not np.all(np.diff(self.delta_p) > 0):
            raise ValueError("delta_p must be strictly increasing")
        if np.any(self.values < -1e-12):
            raise ValueError("spectrum values must be >= 0")

    def __len__(self) -> int:
        return self.delta_p.size

    def to_csv(self, path_or_buf, header_lines=()) -> None:
        """Write ``delta_p_mhz,value`` rows; detunings as ordinary MHz."""
        close = False
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            buf = open(path_or_buf, "w")
            close = True
        else:
            buf = path_or_buf
        try:
            for line in header_lines:
                buf.write(f"# {line}\n")
            buf.write(f"# kind: {self.kind}\n")
            buf.write("delta_p_mhz,value\n")
            for d, v in zip(self.delta_p, self.values):
                buf.write(f"{angular_to_mhz(d):.9f},{v:.12g}\n")
        finally:
            if close:
                buf.close()

    @classmethod
    def from_csv(cls, path_or_buf) -> "Spectrum":
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            with open(path_or_buf) as fh:
                text = fh.read()
        else:
            text = path_or_buf.read()
        kind = "analytic_rate"
        rows = []
        for line in io.StringIO(text):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("kind:"):
                    kind = body.split(":", 1)[1].strip()
                continue
            if line.startswith("delta_p_mhz"):
                continue
            d, v = line.split(",")
            rows.append((mhz_to_angular(float(d)), float(v)))
        if not rows:
            raise ValueError("no data rows in spectrum CSV")
        arr = np.array(rows)
        return cls(delta_p=arr[:, 0], values=arr[:, 1], kind=kind)
