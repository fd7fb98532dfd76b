"""Batched steady-state solves of the three-level optical Bloch equations.

One 9x9 complex linear solve per probe detuning.  This is the hot loop
behind excitation spectra, sideband rates and the cooling map, so the
point-loop is compiled with numba; the fallback builds the generators as a
stacked array and lets LAPACK solve them in one batched call.

Both paths use the identical construction: the density matrix is vectorized
column-major (rho_ij at index i + 3j), the generator row for d(rho_gg)/dt is
replaced by the trace constraint, and the scattering rate is gamma * rho_ee.
"""
import numpy as np

from ._backend import USE_NUMBA, jit_kernel


def _hamiltonian_real(omega_p, omega_c, delta_p, delta_c):
    return np.array(
        [[delta_c - delta_p, omega_p / 2, 0.0],
         [omega_p / 2, delta_c, omega_c / 2],
         [0.0, omega_c / 2, 0.0]])


def _liouvillian_dense(omega_p, omega_c, delta_p, delta_c, gamma, bg, bgp):
    """Reference 9x9 generator (numpy path), column-major vectorization."""
    h = _hamiltonian_real(omega_p, omega_c, delta_p, delta_c).astype(complex)
    eye = np.eye(3, dtype=complex)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    # decay channels e->g and e->g'; the anti-commutator carries the full
    # gamma so that branch_g+branch_gp < 1 leaks population out of the trace
    c1 = np.zeros((3, 3), dtype=complex)
    c1[0, 1] = np.sqrt(bg * gamma)
    c2 = np.zeros((3, 3), dtype=complex)
    c2[2, 1] = np.sqrt(bgp * gamma)
    for c in (c1, c2):
        lv += np.kron(c.conj(), c)
    proj_e = np.zeros((3, 3), dtype=complex)
    proj_e[1, 1] = gamma
    lv += -0.5 * (np.kron(eye, proj_e) + np.kron(proj_e.T, eye))
    return lv


def _rates_numpy(delta_ps, omega_p, omega_c, delta_c, gamma, bg, bgp):
    n = delta_ps.shape[0]
    base = _liouvillian_dense(omega_p, omega_c, 0.0, delta_c, gamma, bg, bgp)
    # delta_p enters only through H[0,0] = delta_c - delta_p
    dh = np.zeros((3, 3))
    dh[0, 0] = -1.0
    eye = np.eye(3)
    slope = -1j * (np.kron(eye, dh) - np.kron(dh.T, eye)).astype(complex)
    mats = base[None, :, :] + delta_ps[:, None, None] * slope[None, :, :]
    mats[:, 0, :] = 0.0
    mats[:, 0, [0, 4, 8]] = 1.0
    rhs = np.zeros((n, 9), dtype=complex)
    rhs[:, 0] = 1.0
    sol = np.linalg.solve(mats, rhs[..., None])[..., 0]
    return gamma * sol[:, 4].real


def _rates_loop(delta_ps, omega_p, omega_c, delta_c, gamma, bg, bgp):
    n = delta_ps.shape[0]
    rates = np.empty(n)
    h = np.zeros((3, 3))
    h[0, 1] = omega_p / 2
    h[1, 0] = omega_p / 2
    h[1, 2] = omega_c / 2
    h[2, 1] = omega_c / 2
    h[1, 1] = delta_c
    rhs = np.zeros(9, dtype=np.complex128)
    rhs[0] = 1.0
    for idx in range(n):
        h[0, 0] = delta_c - delta_ps[idx]
        lv = np.zeros((9, 9), dtype=np.complex128)
        for i in range(3):
            for j in range(3):
                row = i + 3 * j
                for k in range(3):
                    lv[row, k + 3 * j] += -1j * h[i, k]   # -i H rho
                    lv[row, i + 3 * k] += 1j * h[k, j]    # +i rho H
        lv[0, 4] += bg * gamma                            # e->g refill
        lv[8, 4] += bgp * gamma                           # e->g' refill
        for j in range(3):
            lv[1 + 3 * j, 1 + 3 * j] += -0.5 * gamma      # {|e><e|, rho}
            lv[j + 3, j + 3] += -0.5 * gamma
        lv[0, :] = 0.0
        lv[0, 0] = 1.0
        lv[0, 4] = 1.0
        lv[0, 8] = 1.0
        sol = np.linalg.solve(lv, rhs)
        rates[idx] = gamma * sol[4].real
    return rates


if USE_NUMBA:
    _rates_impl = jit_kernel(_rates_loop)
else:
    _rates_impl = _rates_numpy


def scattering_rates(delta_ps, omega_p, omega_c, delta_c, gamma, bg, bgp):
    """Steady-state scattering rates gamma*rho_ee over a probe-detuning array."""
    delta_ps = np.ascontiguousarray(delta_ps, dtype=np.float64)
    return _rates_impl(delta_ps, float(omega_p), float(omega_c),
                       float(delta_c), float(gamma), float(bg), float(bgp))
