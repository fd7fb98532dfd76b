"""Sideband cooling in the Lamb-Dicke regime of an optical dipole trap.

The motional coupling enters through the Lamb-Dicke parameter
eta = |k_p - k_c| cos(phi) a0 of the two-photon process.  Heating and
cooling coefficients follow the standard rate-equation picture,

    A_-/+ = eta^2 * [ W(+/-omega_trap) + alpha_tilde * W(0) ],

where W(nu) is the steady-state scattering rate with the probe detuning
offset by nu (the +omega_trap sideband feeds the cooling coefficient A_-)
and alpha_tilde weights the carrier recoil diffusion (2/5 for a dipole
emission pattern).

W is evaluated from the stationary optical Bloch equations at the actual
drive strengths (``probe_response="exact"``).  The ``"linear"`` variant
evaluates the response to lowest order in the probe intensity instead,
which is the classic weak-probe rate equation; the two differ strongly once
the probe saturates the narrow dressed resonance.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._obe_kernels import scattering_rates
from .core import CONSTANTS, LambdaParams
from .errors import HeatingError, HeatingWarning, LambDickeWarning

#: Carrier diffusion weight for a dipole emission pattern.
ALPHA_DIPOLE = 2.0 / 5.0

#: eta above which the Lamb-Dicke expansion is flagged as unreliable.
LAMB_DICKE_WARN_THRESHOLD = 0.3

#: Probe scaling used for the linear-response evaluation of W.
_LINEAR_PROBE_FACTOR = 1e-3


@dataclass(frozen=True)
class BeamGeometry:
    """Probe/coupling wave vectors (rad/m) and the unit axis of a motional mode."""

    k_probe: tuple
    k_coupling: tuple
    axis: tuple

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError("motional axis must be normalized to 1")
        object.__setattr__(self, "k_probe", tuple(float(v) for v in self.k_probe))
        object.__setattr__(self, "k_coupling", tuple(float(v) for v in self.k_coupling))
        object.__setattr__(self, "axis", tuple(axis))


@dataclass(frozen=True)
class MotionalMode:
    """A harmonic motional mode with its Lamb-Dicke coupling."""

    omega_trap: float
    mass: float
    eta: float
    n_bar: float = 0.0

    def __post_init__(self):
        if self.omega_trap <= 0 or self.mass <= 0:
            raise ValueError("omega_trap and mass must be > 0")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")
        if self.n_bar < 0:
            raise ValueError("n_bar must be >= 0")
        if self.eta >= LAMB_DICKE_WARN_THRESHOLD:
            warnings.warn(
                f"eta = {self.eta:.2f} is outside the Lamb-Dicke regime; "
                "rate-equation results are indicative only",
                LambDickeWarning, stacklevel=2)


@dataclass(frozen=True)
class SidebandRates:
    """Heating (a_plus) and cooling (a_minus) rate coefficients in 1/s."""

    a_plus: float
    a_minus: float

    def __post_init__(self):
        if self.a_plus < -1e-12 or self.a_minus < -1e-12:
            raise ValueError("rate coefficients must be >= 0")


def ground_state_size(omega_trap: float, mass: float) -> float:
    """Harmonic-oscillator ground-state size a0 = sqrt(hbar/(2 m omega))."""
    if omega_trap <= 0 or mass <= 0:
        raise ValueError("omega_trap and mass must be > 0")
    return np.sqrt(CONSTANTS.hbar / (2.0 * mass * omega_trap))


def lamb_dicke(geometry: BeamGeometry, omega_trap: float, mass: float) -> float:
    """eta = |k_p - k_c| |cos(phi)| a0 along the mode axis (dimensionless)."""
    dk = np.asarray(geometry.k_probe) - np.asarray(geometry.k_coupling)
    norm = np.linalg.norm(dk)
    if norm == 0.0:
        return 0.0
    cos_phi = np.dot(dk, geometry.axis) / norm
    return float(norm * abs(cos_phi) * ground_state_size(omega_trap, mass))


def orthogonal_beam_geometry(mode_axis: str = "radial",
                             wavelength: float = CONSTANTS.wavelength_d2) -> BeamGeometry:
    """Probe straight down, coupling along the trap (z) axis.

    With both beams on the same optical line, |k_p - k_c| = sqrt(2) k and the
    x (radial, vertical) and z (axial) mode axes each sit at 45 degrees to
    k_p - k_c, so eta reduces to k * a0 for either mode.  The y radial mode
    is uncoupled in this geometry.
    """
    k = 2.0 * np.pi / wavelength
    axes = {"radial": (1.0, 0.0, 0.0), "axial": (0.0, 0.0, 1.0)}
    try:
        axis = axes[mode_axis]
    except KeyError:
        raise ValueError(f"mode_axis must be one of {sorted(axes)}") from None
    return BeamGeometry(k_probe=(-k, 0.0, 0.0), k_coupling=(0.0, 0.0, k), axis=axis)


def scattering_rate_at_offsets(params: LambdaParams, offsets,
                               probe_response: str = "exact") -> np.ndarray:
    """W(nu): steady-state scattering rate with the probe detuning offset by nu.

    ``"exact"`` solves the Bloch equations at the given probe strength;
    ``"linear"`` evaluates the lowest-order response in omega_p^2 (computed
    at a vanishing probe and rescaled to the actual intensity).
    """
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    dps = params.delta_p + offsets
    if probe_response == "exact":
        return scattering_rates(dps, params.omega_p, params.omega_c,
                                params.delta_c, params.gamma,
                                params.branch_g, params.branch_gp)
    if probe_response == "linear":
        tiny = _LINEAR_PROBE_FACTOR * max(params.omega_c, params.gamma)
        rates = scattering_rates(dps, tiny, params.omega_c, params.delta_c,
                                 params.gamma, params.branch_g, params.branch_gp)
        return rates * (params.omega_p / tiny) ** 2
    raise ValueError(f"unknown probe_response {probe_response!r}")


def sideband_rates(params: LambdaParams, mode: MotionalMode,
                   alpha_tilde: float = ALPHA_DIPOLE,
                   probe_response: str = "exact") -> SidebandRates:
    """Rate-equation coefficients A+/- for the given motional mode."""
    if params.omega_p == 0 and params.omega_c == 0:
        raise ValueError("sideband rates require the two-photon drive on")
    if mode.eta == 0.0:
        return SidebandRates(a_plus=0.0, a_minus=0.0)
    w_minus, w_carrier, w_plus = scattering_rate_at_offsets(
        params, (-mode.omega_trap, 0.0, +mode.omega_trap), probe_response)
    eta2 = mode.eta**2
    return SidebandRates(
        a_plus=eta2 * (max(w_minus, 0.0) + alpha_tilde * max(w_carrier, 0.0)),
        a_minus=eta2 * (max(w_plus, 0.0) + alpha_tilde * max(w_carrier, 0.0)))


def cooling_rate(rates: SidebandRates) -> float:
    """Net phonon relaxation rate A- - A+ (negative means heating)."""
    return rates.a_minus - rates.a_plus


def steady_state_phonon(rates: SidebandRates) -> float:
    """Stationary mean phonon number A+ / (A- - A+)."""
    w = cooling_rate(rates)
    if w <= 0:
        raise HeatingError(
            f"A- = {rates.a_minus:.4g} <= A+ = {rates.a_plus:.4g}: no steady state")
    return rates.a_plus / w


def phonon_dynamics(rates: SidebandRates, n0: float, t) -> float | np.ndarray:
    """Mean phonon number n(t) from dn/dt = -(A- - A+) n + A+.

    Closed form n(t) = n_ss + (n0 - n_ss) exp(-W t) with W = A- - A+; the
    same expression continues to the exponential-growth branch for W < 0,
    which is flagged with a :class:`HeatingWarning`.
    """
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    w = cooling_rate(rates)
    if w == 0.0:
        out = n0 + rates.a_plus * t
    else:
        if w < 0:
            warnings.warn("A+ >= A-: phonon number grows exponentially",
                          HeatingWarning, stacklevel=2)
        n_ss = rates.a_plus / w
        out = n_ss + (n0 - n_ss) * np.exp(-w * t)
    return float(out) if out.ndim == 0 else out


def optimal_coupling_rabi(omega_trap: float, delta_c: float) -> float:
    """Coupling Rabi frequency placing the dressed-state shift at omega_trap.

    Inverts delta = omega_c^2/(4 delta_c): omega_c = sqrt(4 delta_c omega_trap).
    """
    if omega_trap <= 0 or delta_c <= 0:
        raise ValueError("omega_trap and delta_c must be > 0")
    return float(np.sqrt(4.0 * delta_c * omega_trap))


def phonon_to_temperature(n_bar: float, omega_trap: float) -> float:
    """Temperature of a thermal mode with mean occupation n_bar (kelvin)."""
    if n_bar < 0:
        raise ValueError("n_bar must be >= 0")
    if omega_trap <= 0:
        raise ValueError("omega_trap must be > 0")
    if n_bar == 0:
        return 0.0
    return CONSTANTS.hbar * omega_trap / (CONSTANTS.kb * np.log1p(1.0 / n_bar))


def temperature_to_phonon(temperature: float, omega_trap: float) -> float:
    """Thermal occupation n_bar = 1/(exp(hbar omega / kB T) - 1)."""
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if omega_trap <= 0:
        raise ValueError("omega_trap must be > 0")
    if temperature == 0:
        return 0.0
    x = CONSTANTS.hbar * omega_trap / (CONSTANTS.kb * temperature)
    return 1.0 / np.expm1(x)


@dataclass(frozen=True)
class CoolingMap:
    """Grid of stationary phonon numbers over (delta_p, delta_c).

    ``n_ss[i, j]`` corresponds to (delta_p_grid[i], delta_c_grid[j]) and is
    NaN where the cell heats; ``rate[i, j]`` always stores A- - A+ so heating
    cells carry their (negative) rate instead of a fake temperature.
    """

    delta_p_grid: np.ndarray
    delta_c_grid: np.ndarray
    n_ss: np.ndarray
    rate: np.ndarray

    @property
    def heating(self) -> np.ndarray:
        return self.rate <= 0

    def to_csv(self, path, header_lines=()) -> None:
        """First row: delta_c grid (MHz); first column: delta_p grid (MHz);
        cells hold n_ss or the token ``HEAT:<rate_per_s>``."""
        from .core import angular_to_mhz
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("," + ",".join(f"{angular_to_mhz(d):.9f}" for d in self.delta_c_grid) + "\n")
            for i, dp in enumerate(self.delta_p_grid):
                cells = []
                for j in range(self.delta_c_grid.size):
                    if self.rate[i, j] <= 0:
                        cells.append(f"HEAT:{self.rate[i, j]:.6g}")
                    else:
                        cells.append(f"{self.n_ss[i, j]:.8g}")
                fh.write(f"{angular_to_mhz(dp):.9f}," + ",".join(cells) + "\n")


def cooling_map(delta_p_grid, delta_c_grid, params: LambdaParams,
                mode: MotionalMode, alpha_tilde: float = ALPHA_DIPOLE,
                probe_response: str = "exact") -> CoolingMap:
    """Stationary phonon number (or heating rate) over a detuning grid."""
    dps = np.asarray(delta_p_grid, dtype=float)
    dcs = np.asarray(delta_c_grid, dtype=float)
    for grid in (dps, dcs):
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("detuning grids must be strictly increasing")
    n_ss = np.full((dps.size, dcs.size), np.nan)
    rate = np.empty((dps.size, dcs.size))
    eta2 = mode.eta**2
    if eta2 == 0.0:
        return CoolingMap(dps, dcs, n_ss, np.zeros_like(rate))
    for j, dc in enumerate(dcs):
        p = params.replace(delta_p=0.0, delta_c=dc)
        # one batched solve per column: [dp - w, dp, dp + w] for every dp
        stacked = np.concatenate([dps - mode.omega_trap, dps, dps + mode.omega_trap])
        w_minus, w_carrier, w_plus = np.split(
            scattering_rate_at_offsets(p, stacked, probe_response), 3)
        a_plus = eta2 * (np.maximum(w_minus, 0.0) + alpha_tilde * np.maximum(w_carrier, 0.0))
        a_minus = eta2 * (np.maximum(w_plus, 0.0) + alpha_tilde * np.maximum(w_carrier, 0.0))
        rate[:, j] = a_minus - a_plus
        cool = rate[:, j] > 0
        n_ss[cool, j] = a_plus[cool] / rate[cool, j]
    return CoolingMap(dps, dcs, n_ss, rate)
