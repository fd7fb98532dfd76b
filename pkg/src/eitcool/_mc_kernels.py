"""Release-recapture trial batches: the Monte-Carlo hot loop.

Each trial draws a thermal initial state from counter-keyed random numbers,
propagates a ballistic flight and applies the energy bound test against the
Gaussian trap.  The numba path runs a scalar loop per trial; the numpy
fallback vectorizes the identical arithmetic over the trial index.  Both
consume the same keyed draws, so a fixed (seed, tau index, trial index)
produces the same initial state on either backend.
"""
import numpy as np

from ._backend import USE_NUMBA, jit_kernel
from .rng import _GOLDEN, _MASK, _TRIAL_MULT, _mix64_array

# uint64 constants pre-wrapped for numba (int literals above int64 overflow
# the compiler's literal handling)
_U_GOLDEN = np.uint64(_GOLDEN)
_U_TRIAL = np.uint64(_TRIAL_MULT)
_U_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U_M2 = np.uint64(0x94D049BB133111EB)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)


def _mix64_scalar_py(z):
    z = z + _U_GOLDEN
    z = (z ^ (z >> _U30)) * _U_M1
    z = (z ^ (z >> _U27)) * _U_M2
    return z ^ (z >> _U31)


def _unit_scalar_py(base, draw):
    h = _mix64_scalar(base ^ (np.uint64(draw) * _U_GOLDEN))
    return (np.float64(h >> _U11) + 1.0) * 2.0**-53


def _recapture_count_numpy(key, n_trials,
                           sig_x, sig_y, sig_z, sig_v,
                           tau, gx, gy, gz,
                           waist2, zr2, depth, mass):
    trials = np.arange(n_trials, dtype=np.uint64)
    base = _mix64_array(np.uint64(key) ^ (trials * _U_TRIAL))

    def unit(draw):
        h = _mix64_array(base ^ np.uint64((draw * _GOLDEN) & _MASK))
        return ((h >> _U11).astype(np.float64) + 1.0) * 2.0**-53

    def pair(first_draw):
        r = np.sqrt(-2.0 * np.log(unit(first_draw)))
        theta = 2.0 * np.pi * unit(first_draw + 1)
        return r * np.cos(theta), r * np.sin(theta)

    n0, n1 = pair(0)
    n2, n3 = pair(2)
    n4, n5 = pair(4)
    vx = sig_v * n3
    vy = sig_v * n4
    vz = sig_v * n5
    x = sig_x * n0 + vx * tau + 0.5 * gx * tau * tau
    y = sig_y * n1 + vy * tau + 0.5 * gy * tau * tau
    z = sig_z * n2 + vz * tau + 0.5 * gz * tau * tau
    vx = vx + gx * tau
    vy = vy + gy * tau
    vz = vz + gz * tau
    expand = 1.0 + z * z / zr2
    pot = -depth * np.exp(-2.0 * (x * x + y * y) / (waist2 * expand)) / expand
    energy = 0.5 * mass * (vx * vx + vy * vy + vz * vz) + pot
    return int(np.count_nonzero(energy < 0.0))


def _recapture_count_loop(key, n_trials,
                          sig_x, sig_y, sig_z, sig_v,
                          tau, gx, gy, gz,
                          waist2, zr2, depth, mass):
    count = 0
    for trial in range(n_trials):
        base = _mix64_scalar(np.uint64(key) ^ (np.uint64(trial) * _U_TRIAL))
        n_buf = np.empty(6)
        for k in range(3):
            u1 = _unit_scalar(base, 2 * k)
            u2 = _unit_scalar(base, 2 * k + 1)
            r = np.sqrt(-2.0 * np.log(u1))
            theta = 2.0 * np.pi * u2
            n_buf[2 * k] = r * np.cos(theta)
            n_buf[2 * k + 1] = r * np.sin(theta)
        vx = sig_v * n_buf[3]
        vy = sig_v * n_buf[4]
        vz = sig_v * n_buf[5]
        x = sig_x * n_buf[0] + vx * tau + 0.5 * gx * tau * tau
        y = sig_y * n_buf[1] + vy * tau + 0.5 * gy * tau * tau
        z = sig_z * n_buf[2] + vz * tau + 0.5 * gz * tau * tau
        vx += gx * tau
        vy += gy * tau
        vz += gz * tau
        expand = 1.0 + z * z / zr2
        pot = -depth * np.exp(-2.0 * (x * x + y * y) / (waist2 * expand)) / expand
        energy = 0.5 * mass * (vx * vx + vy * vy + vz * vz) + pot
        if energy < 0.0:
            count += 1
    return count


if USE_NUMBA:
    _mix64_scalar = jit_kernel(_mix64_scalar_py)
    _unit_scalar = jit_kernel(_unit_scalar_py)
    _recapture_count_impl = jit_kernel(_recapture_count_loop)
else:
    _mix64_scalar = _mix64_scalar_py
    _unit_scalar = _unit_scalar_py
    _recapture_count_impl = _recapture_count_numpy


def recapture_count(key, n_trials, sigmas, tau, gravity, trap) -> int:
    """Number of recaptured trials for one release interval.

    ``sigmas`` = (sig_x, sig_y, sig_z, sig_v) thermal standard deviations;
    ``trap`` = (waist, rayleigh_range, depth, mass).  Deterministic in
    (key, trial index) independent of execution order.
    """
    sig_x, sig_y, sig_z, sig_v = sigmas
    gx, gy, gz = gravity
    waist, zr, depth, mass = trap
    return int(_recapture_count_impl(
        np.uint64(key), int(n_trials),
        float(sig_x), float(sig_y), float(sig_z), float(sig_v),
        float(tau), float(gx), float(gy), float(gz),
        float(waist) ** 2, float(zr) ** 2, float(depth), float(mass)))
