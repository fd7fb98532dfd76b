"""Lindblad-form optical Bloch equations for the driven three-level system.

Density matrices are plain 3x3 complex arrays over the basis (g, e, g');
the generator acts on the column-major vectorization (rho_ij at index
i + 3j), so generator entries are reproducible bit-for-bit from the
construction written here.
"""
from __future__ import annotations

import warnings

import numpy as np

from . import _obe_kernels
from .core import LambdaParams, Spectrum
from .errors import IntegrationInstabilityError, LeakWarning, NonUniqueSteadyStateError

_TRACE_ROW = np.zeros(9, dtype=complex)
_TRACE_ROW[[0, 4, 8]] = 1.0


def hamiltonian(params: LambdaParams) -> np.ndarray:
    """Hermitian drive Hamiltonian (rad/s) in the two-field rotating frame."""
    return _obe_kernels._hamiltonian_real(
        params.omega_p, params.omega_c, params.delta_p, params.delta_c).astype(complex)


def build_liouvillian(params: LambdaParams) -> np.ndarray:
    """9x9 generator of d(vec rho)/dt, column-major vectorization.

    Includes the coherent drive, spontaneous decay gamma split by the
    branching fractions into e->g and e->g' collapse channels, and -- when
    branch_g + branch_gp < 1 -- a leak channel that removes population from
    the traced space.
    """
    return _obe_kernels._liouvillian_dense(
        params.omega_p, params.omega_c, params.delta_p, params.delta_c,
        params.gamma, params.branch_g, params.branch_gp)


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(9, order="F")


def unvectorize(vec: np.ndarray) -> np.ndarray:
    return np.asarray(vec, dtype=complex).reshape(3, 3, order="F")


def density_matrix_errors(rho, trace_expected=1.0):
    """Return (hermiticity, trace, negativity) deviations of a candidate state."""
    rho = np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = float(abs(np.trace(rho).real - trace_expected) + abs(np.trace(rho).imag))
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    neg = float(max(0.0, -eigs.min()))
    return herm, tr, neg


def assert_density_matrix(rho, herm_tol=1e-10, trace_tol=1e-10, neg_tol=1e-9):
    herm, tr, neg = density_matrix_errors(rho)
    if herm > herm_tol:
        raise ValueError(f"not Hermitian: deviation {herm:.2e}")
    if tr > trace_tol:
        raise ValueError(f"trace differs from 1 by {tr:.2e}")
    if neg > neg_tol:
        raise ValueError(f"negative eigenvalue {-neg:.2e}")


def steady_state(params: LambdaParams) -> np.ndarray:
    """Stationary density matrix, normalized to unit trace.

    Solves the null space of the generator with the trace constraint
    replacing the d(rho_gg)/dt row.  A degenerate null space (for example
    both drives off) raises :class:`NonUniqueSteadyStateError` naming the
    degeneracy.  With a leak channel the generator is no longer singular;
    the slowest-decaying eigenmode is returned instead, normalized to unit
    trace, and the leak rate is reported through a :class:`LeakWarning`.
    """
    lv = build_liouvillian(params)
    scale = np.linalg.norm(lv)

    if params.branch_leak > 1e-12:
        return _quasi_steady_state(lv, params)

    a = lv.copy()
    a[0] = _TRACE_ROW
    b = np.zeros(9, dtype=complex)
    b[0] = 1.0
    try:
        vec = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        vec = None
    if vec is not None:
        residual = np.linalg.norm(lv @ vec)
        if residual <= 1e-10 * scale * np.linalg.norm(vec):
            return _finalize_state(vec)

    # Row replacement failed: inspect the null space directly.
    _, svals, vt = np.linalg.svd(lv)
    null_dim = int(np.sum(svals <= 1e-12 * svals[0]))
    if null_dim != 1:
        raise NonUniqueSteadyStateError(
            f"generator null space has dimension {null_dim}; the drive does not "
            "single out a stationary state (e.g. omega_p = omega_c = 0)")
    vec = vt[-1].conj()
    tr = vec[[0, 4, 8]].sum()
    if abs(tr) < 1e-12:
        raise NonUniqueSteadyStateError("null vector is traceless; no physical steady state")
    return _finalize_state(vec / tr)


def _quasi_steady_state(lv, params):
    vals, vecs = np.linalg.eig(lv)
    slow = int(np.argmax(vals.real))
    vec = vecs[:, slow]
    tr = vec[[0, 4, 8]].sum()
    if abs(tr) < 1e-12:
        raise NonUniqueSteadyStateError(
            "slowest eigenmode is traceless; no quasi-steady state with a leak")
    warnings.warn(
        f"population leaks at {params.branch_leak * params.gamma:.3e} rad/s "
        f"(quasi-steady decay {-vals[slow].real:.3e} 1/s); returning the "
        "normalized slowest eigenmode", LeakWarning, stacklevel=3)
    return _finalize_state(vec / tr)


def _finalize_state(vec):
    rho = unvectorize(vec)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def scattering_rate(rho: np.ndarray, params: LambdaParams) -> float:
    """Photon scattering rate gamma * rho_ee (1/s)."""
    return float(params.gamma * np.asarray(rho)[1, 1].real)


def time_evolve(rho0: np.ndarray, params: LambdaParams, t: float,
                dt_max: float = np.inf) -> np.ndarray:
    """Propagate d(rho)/dt = L rho with a fixed-step 4th-order integrator.

    The step is capped at min(dt_max, 0.05/gamma); trace (for unit branch
    sum) and hermiticity are preserved to integrator accuracy.
    """
    if t < 0:
        raise ValueError("propagation time must be >= 0")
    rho0 = np.asarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy()
    lv = build_liouvillian(params)
    step_cap = min(dt_max, 0.05 / params.gamma)
    nstep = max(1, int(np.ceil(t / step_cap)))
    dt = t / nstep
    v = vectorize(rho0)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(nstep):
            k1 = lv @ v
            k2 = lv @ (v + 0.5 * dt * k1)
            k3 = lv @ (v + 0.5 * dt * k2)
            k4 = lv @ (v + dt * k3)
            v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(v.view(float))):
                raise IntegrationInstabilityError(
                    f"non-finite state during propagation (dt={dt:.3e} s); "
                    "reduce dt_max")
    rho = unvectorize(v)
    return 0.5 * (rho + rho.conj().T)


def scattering_spectrum(scan, params: LambdaParams) -> np.ndarray:
    """Raw steady-state scattering rates (1/s) over a probe-detuning grid."""
    grid = np.asarray(scan, dtype=float)
    return _obe_kernels.scattering_rates(
        grid, params.omega_p, params.omega_c, params.delta_c,
        params.gamma, params.branch_g, params.branch_gp)


def estimate_asymptote(values: np.ndarray, fraction: float = 0.05) -> float:
    """Mean of the outermost ``fraction`` of grid points from each end."""
    values = np.asarray(values)
    k = max(1, round(fraction * values.size))
    return float(np.concatenate([values[:k], values[-k:]]).mean())


def excitation_spectrum_obe(scan, params: LambdaParams,
                            asymptote: float | None = None) -> Spectrum:
    """Steady-state excitation spectrum normalized by its far-detuned asymptote.

    When ``asymptote`` is None it is estimated from the outermost 5% of grid
    points at each end, which assumes the grid extends symmetrically well
    past the dressed resonances.  Pass an explicit value when sampling a
    narrow window around the dip.
    """
    grid = np.asarray(scan, dtype=float)
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("detuning grid must be strictly increasing")
    rates = scattering_spectrum(grid, params)
    if asymptote is None:
        asymptote = estimate_asymptote(rates)
    if asymptote <= 0:
        raise ValueError("cannot normalize: non-positive asymptote estimate")
    return Spectrum(delta_p=grid, values=np.maximum(rates / asymptote, 0.0),
                    kind="obe_rate")
