"""Nonlinear least squares and the two concrete fitters used by the pipelines.

``least_squares`` is a damped (Levenberg-Marquardt) Gauss-Newton solver with
central-difference Jacobians; one code path serves every model, and the
gradient-orthogonality of the returned optimum is a tested invariant.  On
top of it sit the asymmetric-resonance (Fano) lineshape fit and the
exponential cooling-curve fit, plus Poisson photon-count synthesis for
closure tests.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import Spectrum, angular_to_mhz
from .errors import DegenerateFitError, FitConvergenceError

_JACOBIAN_REL_STEP = 1e-6
_CHI2_RTOL = 1e-10
_MAX_ITER = 200


@dataclass(frozen=True)
class FitResult:
    params: np.ndarray
    covariance: np.ndarray
    chi2: float
    dof: int

    @property
    def errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


def _numeric_jacobian(model, x, params):
    n = params.size
    jac = np.empty((x.size, n))
    for i in range(n):
        step = _JACOBIAN_REL_STEP * max(abs(params[i]), 1e-30)
        up = params.copy()
        dn = params.copy()
        up[i] += step
        dn[i] -= step
        jac[:, i] = (model(x, up) - model(x, dn)) / (2.0 * step)
    return jac


def least_squares(model, x, y, sigma, init, max_iter=_MAX_ITER) -> FitResult:
    """Minimize sum(((y - model(x, p)) / sigma)^2) from the given start.

    Converges when the relative chi-square decrease of an accepted step
    falls below 1e-10.  Raises :class:`DegenerateFitError` when the normal
    equations are singular (a parameter the model ignores) and
    :class:`FitConvergenceError` -- carrying the last iterate -- when the
    iteration limit is hit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), y.shape)
    params = np.array(init, dtype=float)
    if y.size < params.size:
        raise ValueError("need at least as many data points as parameters")
    if np.any(sigma <= 0):
        raise ValueError("sigmas must be > 0")

    def chi2_of(p):
        r = (y - model(x, p)) / sigma
        return float(r @ r)

    chi2 = chi2_of(params)
    if not np.isfinite(chi2):
        raise ValueError("initial parameters give a non-finite chi-square")
    lam = 1e-3
    for _ in range(max_iter):
        jac = _numeric_jacobian(model, x, params) / sigma[:, None]
        resid = (y - model(x, params)) / sigma
        jtj = jac.T @ jac
        jtr = jac.T @ resid
        diag = np.diag(jtj).copy()
        if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
            bad = int(np.argmin(diag))
            raise DegenerateFitError(
                f"model does not depend on parameter {bad} at the current point")
        accepted = False
        for _ in range(50):
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), jtr)
            except np.linalg.LinAlgError:
                raise DegenerateFitError("singular normal equations") from None
            trial = params + step
            chi2_trial = chi2_of(trial)
            if np.isfinite(chi2_trial) and chi2_trial <= chi2:
                drop = chi2 - chi2_trial
                params, chi2 = trial, chi2_trial
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                break
            lam *= 10.0
            if lam > 1e12:
                break
        if not accepted or drop <= _CHI2_RTOL * max(chi2, 1e-300):
            cov = _covariance(jtj)
            return FitResult(params=params, covariance=cov, chi2=chi2,
                             dof=max(y.size - params.size, 0))
    cov = _covariance(jtj)
    raise FitConvergenceError(
        f"no convergence after {max_iter} iterations (chi2 = {chi2:.4g})",
        last_result=FitResult(params=params, covariance=cov, chi2=chi2,
                              dof=max(y.size - params.size, 0)))


def _covariance(jtj):
    try:
        return np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        raise DegenerateFitError("singular normal equations at optimum") from None


# --- Fano lineshape fitting -------------------------------------------------

@dataclass(frozen=True)
class FanoFit:
    """Fitted asymmetric resonance: offset + amplitude * fano(delta_p).

    Frequencies in rad/s; ``covariance`` is ordered as
    (delta_c_center, delta_shift, gamma_plus, amplitude, offset).
    """

    delta_c_center: float
    delta_shift: float
    gamma_plus: float
    amplitude: float
    offset: float
    covariance: np.ndarray
    chi2: float
    dof: int
    weighting: str = field(default="uniform", compare=False)

    def __post_init__(self):
        if self.gamma_plus <= 0:
            raise ValueError("gamma_plus must be > 0")
        if self.amplitude < 0 or self.offset < 0:
            raise ValueError("amplitude and offset must be >= 0")

    @property
    def errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def to_json(self) -> str:
        err = self.errors
        return json.dumps({
            "model": "fano",
            "parameters": {
                "delta_c_center_mhz": angular_to_mhz(self.delta_c_center),
                "delta_shift_khz": self.delta_shift / (2e3 * np.pi),
                "gamma_plus_khz": self.gamma_plus / (2e3 * np.pi),
                "amplitude": self.amplitude,
                "offset": self.offset,
            },
            "errors": {
                "delta_c_center_mhz": angular_to_mhz(err[0]),
                "delta_shift_khz": err[1] / (2e3 * np.pi),
                "gamma_plus_khz": err[2] / (2e3 * np.pi),
                "amplitude": err[3],
                "offset": err[4],
            },
            "chi2": self.chi2,
            "dof": self.dof,
            "weighting": self.weighting,
        }, indent=2)


def _fano_model(delta_p, p):
    center, shift, gplus, amplitude, offset = p
    gplus = abs(gplus)
    if gplus == 0:
        gplus = 1e-300
    q = 2.0 * shift / gplus
    eps = 2.0 * (delta_p - center - shift) / gplus
    return offset + amplitude * (q + eps) ** 2 / (1.0 + eps**2)


def fano_initial_guess(spectrum: Spectrum):
    """Documented auto-initialization: center from the minimum, width from
    twice the dip-peak separation, amplitude from the asymptote."""
    x = spectrum.delta_p
    v = spectrum.values
    imin = int(np.argmin(v))
    imax = int(np.argmax(v))
    center = x[imin]
    sep = x[imax] - x[imin]
    if sep == 0:
        sep = (x[-1] - x[0]) / 10.0
    offset = max(float(v.min()), 0.0)
    k = max(1, v.size // 20)
    asym = float(np.concatenate([v[:k], v[-k:]]).mean())
    amplitude = max(asym - offset, 1e-12)
    return np.array([center, sep, 2.0 * abs(sep), amplitude, offset])


def fit_fano(data: Spectrum, init_hint=None) -> FanoFit:
    """Fit offset + amplitude * fano(delta_p; center, shift, gamma_plus).

    Photon-count spectra are weighted with Poisson sigmas (sqrt of counts,
    floored at one count); rate spectra use uniform weights.
    """
    if len(data) < 10:
        raise ValueError("need at least 10 points spanning the dip and peak")
    if data.kind == "photon_counts":
        sigma = np.sqrt(np.maximum(data.values, 1.0))
        weighting = "poisson"
    else:
        sigma = np.ones_like(data.values)
        weighting = "uniform"
    init = np.array(init_hint, dtype=float) if init_hint is not None \
        else fano_initial_guess(data)
    res = least_squares(_fano_model, data.delta_p, data.values, sigma, init)
    center, shift, gplus, amplitude, offset = res.params
    return FanoFit(delta_c_center=center, delta_shift=shift,
                   gamma_plus=abs(gplus), amplitude=max(amplitude, 0.0),
                   offset=max(offset, 0.0), covariance=res.covariance,
                   chi2=res.chi2, dof=res.dof, weighting=weighting)


def fano_fit_curve(fit: FanoFit, delta_p):
    """Evaluate a fitted lineshape on a grid."""
    p = np.array([fit.delta_c_center, fit.delta_shift, fit.gamma_plus,
                  fit.amplitude, fit.offset])
    return _fano_model(np.asarray(delta_p, dtype=float), p)


# --- exponential cooling-curve fitting --------------------------------------

@dataclass(frozen=True)
class ExpFit:
    """Fitted relaxation T(t) = t_final + (t_initial - t_final) exp(-t/tau)."""

    tau_cool: float
    t_final: float
    t_initial: float
    covariance: np.ndarray
    chi2: float
    dof: int

    def __post_init__(self):
        if self.tau_cool <= 0:
            raise ValueError("tau_cool must be > 0")

    @property
    def errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def to_json(self) -> str:
        err = self.errors
        return json.dumps({
            "model": "exponential",
            "parameters": {"tau_cool_ms": self.tau_cool * 1e3,
                           "t_final_uk": self.t_final * 1e6,
                           "t_initial_uk": self.t_initial * 1e6},
            "errors": {"tau_cool_ms": err[0] * 1e3,
                       "t_final_uk": err[1] * 1e6,
                       "t_initial_uk": err[2] * 1e6},
            "chi2": self.chi2,
            "dof": self.dof,
        }, indent=2)


def _exp_model(t, p):
    tau, t_final, t_initial = p
    tau = max(abs(tau), 1e-300)
    return t_final + (t_initial - t_final) * np.exp(-t / tau)


def fit_exponential(times, temperatures, sigma=None) -> ExpFit:
    """Fit an exponential relaxation to (time, temperature) samples."""
    t = np.asarray(times, dtype=float)
    temp = np.asarray(temperatures, dtype=float)
    if t.size < 4:
        raise ValueError("need at least 4 samples")
    if sigma is None:
        sigma = np.ones_like(temp)
    span = t[-1] - t[0]
    init = np.array([span / 3.0 if span > 0 else 1.0, temp[-1], temp[0]])
    res = least_squares(_exp_model, t, temp, sigma, init)
    tau, t_final, t_initial = res.params
    return ExpFit(tau_cool=abs(tau), t_final=t_final, t_initial=t_initial,
                  covariance=res.covariance, chi2=res.chi2, dof=res.dof)


# --- photon-count synthesis ---------------------------------------------------

def simulate_photon_counts(spectrum: Spectrum, rate_scale: float,
                           duration_per_point: float, background: float,
                           seed: int) -> Spectrum:
    """Poisson photon counts with mean (rate_scale*value + background)*duration."""
    if rate_scale < 0 or background < 0 or duration_per_point < 0:
        raise ValueError("rates and duration must be >= 0")
    means = (rate_scale * spectrum.values + background) * duration_per_point
    counts = np.random.default_rng(seed).poisson(means).astype(float)
    return Spectrum(delta_p=spectrum.delta_p, values=counts, kind="photon_counts")
