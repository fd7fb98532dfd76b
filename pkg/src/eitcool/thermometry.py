"""Monte-Carlo release-recapture thermometry and temperature inversion.

A thermal atom is sampled from the harmonic approximation of the trap
(measured frequencies), released for an interval tau of ballistic flight
with gravity, and counted as recaptured when its total energy in the full
Gaussian potential is negative.  Temperature is inferred by chi-square
matching of a measured recapture curve against simulated curves over a
temperature grid, refined by parabolic interpolation.

All randomness is counter-keyed by (seed, tau index, trial index), so
curves are bit-reproducible for a fixed seed regardless of execution order
or worker count.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ._mc_kernels import recapture_count
from .core import CONSTANTS
from .errors import GridEdgeError
from .rng import CounterRNG, derive_key
from .trap import TrapGeometry, potential

#: Beam axis is horizontal (z); gravity points along the -x radial axis.
DEFAULT_GRAVITY = (-9.81, 0.0, 0.0)


@dataclass(frozen=True)
class AtomState:
    """Classical phase-space point of the atom."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        if self.position.shape != (3,) or self.velocity.shape != (3,):
            raise ValueError("position and velocity must be 3-vectors")
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))):
            raise ValueError("state components must be finite")


@dataclass(frozen=True)
class RecaptureCurve:
    """Recapture probabilities over release intervals, with trial counts."""

    tau: np.ndarray                  # release intervals, s, strictly increasing
    p_recapture: np.ndarray
    n_trials: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=float))
        object.__setattr__(self, "p_recapture", np.asarray(self.p_recapture, dtype=float))
        object.__setattr__(self, "n_trials", np.asarray(self.n_trials, dtype=int))
        if self.tau.size == 0:
            raise ValueError("recapture curve must have at least one entry")
        if self.tau.size > 1 and not np.all(np.diff(self.tau) > 0):
            raise ValueError("release intervals must be strictly increasing")
        if np.any((self.p_recapture < 0) | (self.p_recapture > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        if np.any(self.n_trials < 1):
            raise ValueError("trial counts must be positive")

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(self.p_recapture * (1 - self.p_recapture) / self.n_trials)

    def to_csv(self, path_or_buf, header_lines=()) -> None:
        close = False
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            buf = open(path_or_buf, "w")
            close = True
        else:
            buf = path_or_buf
        try:
            for line in header_lines:
                buf.write(f"# {line}\n")
            for key, value in sorted(self.metadata.items()):
                buf.write(f"# {key}: {value}\n")
            buf.write("tau_us,p_recapture,n_trials,stderr\n")
            for t, p, n, s in zip(self.tau, self.p_recapture, self.n_trials, self.stderr):
                buf.write(f"{t * 1e6:.12g},{p:.8f},{n},{s:.8f}\n")
        finally:
            if close:
                buf.close()

    @classmethod
    def from_csv(cls, path_or_buf) -> "RecaptureCurve":
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            with open(path_or_buf) as fh:
                text = fh.read()
        else:
            text = path_or_buf.read()
        meta, rows = {}, []
        for line in io.StringIO(text):
            line = line.strip()
            if not line or line.startswith("tau_us"):
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, value = body.split(":", 1)
                    meta[key.strip()] = value.strip()
                continue
            parts = line.split(",")
            rows.append((float(parts[0]) * 1e-6, float(parts[1]), int(parts[2])))
        arr = np.array(rows)
        return cls(tau=arr[:, 0], p_recapture=arr[:, 1],
                   n_trials=arr[:, 2].astype(int), metadata=meta)


@dataclass(frozen=True)
class TemperatureEstimate:
    """Best-fit temperature with its 1-sigma width from delta(chi2) = 1."""

    temperature: float
    sigma: float
    chi2: float
    dof: int

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def _thermal_sigmas(temperature, trap, frequencies):
    om_r, om_z = frequencies
    sig_v = np.sqrt(CONSTANTS.kb * temperature / trap.mass)
    return sig_v / om_r, sig_v / om_r, sig_v / om_z, sig_v


def sample_thermal_state(temperature: float, trap: TrapGeometry,
                         frequencies, rng: CounterRNG) -> AtomState:
    """Draw one atom from the harmonic thermal ensemble.

    Position variances are kB T/(m omega_i^2) per axis using the supplied
    (radial, axial) frequencies; velocity variances are kB T/m.  T = 0
    returns the origin at rest.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return AtomState(np.zeros(3), np.zeros(3))
    sig_x, sig_y, sig_z, sig_v = _thermal_sigmas(temperature, trap, frequencies)
    draws = rng.normals(6)
    return AtomState(position=draws[:3] * np.array([sig_x, sig_y, sig_z]),
                     velocity=draws[3:] * sig_v)


def release_recapture_trial(state: AtomState, tau: float, trap: TrapGeometry,
                            gravity=DEFAULT_GRAVITY) -> bool:
    """Ballistic flight for tau, then the energy bound test E < 0."""
    if tau < 0:
        raise ValueError("release interval must be >= 0")
    g = np.asarray(gravity, dtype=float)
    pos = state.position + state.velocity * tau + 0.5 * g * tau**2
    vel = state.velocity + g * tau
    energy = 0.5 * trap.mass * np.dot(vel, vel) + potential(trap, pos)
    return bool(energy < 0.0)


def recapture_curve(temperature: float, taus, n_trials: int, trap: TrapGeometry,
                    seed: int, frequencies=None,
                    gravity=DEFAULT_GRAVITY) -> RecaptureCurve:
    """Monte-Carlo recapture curve; bit-deterministic for a fixed seed.

    ``frequencies`` are the (radial, axial) sampling frequencies and default
    to the trap's derived values; pass the measured ones when they differ
    from the ideal-Gaussian prediction.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    taus = np.asarray(taus, dtype=float)
    if frequencies is None:
        frequencies = (trap.omega_radial, trap.omega_axial)
    sigmas = _thermal_sigmas(temperature, trap, frequencies) if temperature > 0 \
        else (0.0, 0.0, 0.0, 0.0)
    trap_tuple = (trap.waist, trap.rayleigh_range, trap.depth, trap.mass)
    probs = np.empty(taus.size)
    for j, tau in enumerate(taus):
        key = derive_key(seed, j)
        probs[j] = recapture_count(key, n_trials, sigmas, tau, gravity,
                                   trap_tuple) / n_trials
    return RecaptureCurve(
        tau=taus, p_recapture=probs,
        n_trials=np.full(taus.size, n_trials, dtype=int),
        metadata={"temperature_uk": temperature * 1e6, "seed": seed,
                  "waist_um": trap.waist * 1e6,
                  "depth_mk": trap.depth / CONSTANTS.kb * 1e3})


def curve_chi2(measured: RecaptureCurve, simulated: RecaptureCurve) -> float:
    """Binomial-weighted chi-square between two recapture curves.

    Uses the pooled success probability per point for the variance, which
    keeps chi2 ~ dof even where probabilities saturate near 0 or 1.
    """
    if measured.tau.shape != simulated.tau.shape or \
            not np.allclose(measured.tau, simulated.tau):
        raise ValueError("curves must share the same release intervals")
    nm = measured.n_trials.astype(float)
    ns = simulated.n_trials.astype(float)
    pooled = (measured.p_recapture * nm + simulated.p_recapture * ns) / (nm + ns)
    floor = 0.5 / np.minimum(nm, ns)
    pooled = np.clip(pooled, floor, 1.0 - floor)
    var = pooled * (1.0 - pooled) * (1.0 / nm + 1.0 / ns)
    return float(np.sum((measured.p_recapture - simulated.p_recapture) ** 2 / var))


def infer_temperature(measured: RecaptureCurve, trap: TrapGeometry, t_grid,
                      n_trials: int, seed: int, frequencies=None,
                      gravity=DEFAULT_GRAVITY) -> TemperatureEstimate:
    """Invert a recapture curve to a temperature by chi-square matching.

    Simulates a curve at every grid temperature with common random numbers
    (same seed for each), locates the chi-square minimum and refines it by
    parabolic interpolation; sigma follows from delta(chi2) = 1.  A minimum
    on the grid edge raises :class:`GridEdgeError` asking for a wider grid.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 3:
        raise ValueError("temperature grid needs at least three points")
    if not np.all(np.diff(t_grid) > 0):
        raise ValueError("temperature grid must be strictly increasing")
    chi2 = np.array([
        curve_chi2(measured, recapture_curve(t, measured.tau, n_trials, trap,
                                             seed, frequencies, gravity))
        for t in t_grid])
    k = int(np.argmin(chi2))
    if k == 0 or k == t_grid.size - 1:
        raise GridEdgeError(
            f"chi-square minimum at grid edge T = {t_grid[k] * 1e6:.3g} uK; "
            "widen the temperature grid")
    x0, x1, x2 = t_grid[k - 1:k + 2]
    c0, c1, c2 = chi2[k - 1:k + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (c1 - c0) + x1 * (c0 - c2) + x0 * (c2 - c1)) / denom
    b = (x2**2 * (c0 - c1) + x1**2 * (c2 - c0) + x0**2 * (c1 - c2)) / denom
    if a <= 0:  # numerically flat valley: fall back to the grid minimum
        t_best, sigma, chi2_best = x1, float(np.diff(t_grid).mean()), c1
    else:
        t_best = -b / (2 * a)
        t_best = min(max(t_best, x0), x2)
        chi2_best = c1 - a * (x1 - t_best) ** 2
        sigma = 1.0 / np.sqrt(a)
    return TemperatureEstimate(temperature=float(t_best), sigma=float(sigma),
                               chi2=float(chi2_best), dof=int(measured.tau.size))
