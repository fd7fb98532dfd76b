import json

import numpy as np
import pytest

from eitcool import CONSTANTS, LambdaParams
from eitcool.core import Spectrum, khz_to_angular, mhz_to_angular
from eitcool.errors import DegenerateFitError
from eitcool.fit import (ExpFit, FanoFit, _fano_model, fano_fit_curve,
                         fit_exponential, fit_fano, least_squares,
                         simulate_photon_counts)
from eitcool.presets import multi_lambda_components
from eitcool.spectra import (dressed_probe_corrected, fano_spectrum,
                             multi_lambda_spectrum)

GAMMA = CONSTANTS.gamma_d2


def spectroscopy_grid(params, span_mhz=1.2, points=161):
    return np.linspace(params.delta_c - mhz_to_angular(span_mhz),
                       params.delta_c + mhz_to_angular(span_mhz), points)


class TestLeastSquares:
    def test_linear_exact(self):
        x = np.linspace(0, 10, 20)
        y = 3.0 * x - 7.0
        res = least_squares(lambda x, p: p[0] * x + p[1], x, y,
                            np.ones_like(y), [1.0, 0.0])
        np.testing.assert_allclose(res.params, [3.0, -7.0], rtol=1e-12)
        assert res.chi2 == pytest.approx(0.0, abs=1e-18)

    def test_quadratic_pull_calibration(self):
        # repeated fits with known noise: pulls are standard-normal and the
        # reported covariance matches the observed parameter spread
        rng = np.random.default_rng(19)
        x = np.linspace(-2, 3, 40)
        truth = np.array([1.5, -0.8, 0.3])
        sigma = 0.05
        model = lambda x, p: p[0] * x**2 + p[1] * x + p[2]
        pulls, spreads = [], []
        for _ in range(100):
            y = model(x, truth) + rng.normal(0, sigma, x.size)
            res = least_squares(model, x, y, sigma, [1.0, 0.0, 0.0])
            pulls.append((res.params - truth) / res.errors)
            spreads.append(res.params)
        pulls = np.array(pulls)
        assert np.abs(pulls.mean(axis=0)).max() < 0.35
        assert np.all((pulls.std(axis=0) > 0.7) & (pulls.std(axis=0) < 1.35))
        observed = np.array(spreads).std(axis=0)
        reported = least_squares(model, x, model(x, truth) + rng.normal(0, sigma, x.size),
                                 sigma, [1.0, 0.0, 0.0]).errors
        np.testing.assert_allclose(observed, reported, rtol=0.3)

    def test_unused_parameter_is_degenerate(self):
        x = np.linspace(0, 1, 10)
        with pytest.raises(DegenerateFitError):
            least_squares(lambda x, p: p[0] * x + 0.0 * p[1], x, x,
                          np.ones_like(x), [1.0, 1.0])

    def test_more_parameters_than_points_rejected(self):
        with pytest.raises(ValueError):
            least_squares(lambda x, p: p[0] + p[1] * x, np.array([1.0]),
                          np.array([1.0]), np.array([1.0]), [0.0, 0.0])

    def test_gradient_orthogonality_at_optimum(self):
        # numeric chi-square gradient vanishes at the returned parameters
        rng = np.random.default_rng(3)
        x = np.linspace(0, 5, 30)
        model = lambda x, p: p[0] * np.exp(-x / p[1]) + p[2]
        truth = np.array([2.0, 1.3, 0.4])
        y = model(x, truth) + rng.normal(0, 0.01, x.size)
        res = least_squares(model, x, y, 0.01, [1.5, 1.0, 0.0])

        def chi2(p):
            r = (y - model(x, p)) / 0.01
            return r @ r

        grad = []
        for i in range(3):
            step = 1e-7 * max(abs(res.params[i]), 1.0)
            up, dn = res.params.copy(), res.params.copy()
            up[i] += step
            dn[i] -= step
            grad.append((chi2(up) - chi2(dn)) / (2 * step) * res.params[i])
        assert np.abs(grad).max() < 1e-6 * max(res.chi2, 1.0) * 1e3


class TestFanoFit:
    def test_noiseless_closure(self, spectroscopy_params):
        p = spectroscopy_params
        d = dressed_probe_corrected(p)
        data = fano_spectrum(spectroscopy_grid(p), p)
        fit = fit_fano(data)
        assert fit.delta_shift == pytest.approx(d.delta_shift, rel=1e-6)
        assert fit.gamma_plus == pytest.approx(d.gamma_plus, rel=1e-6)
        assert fit.delta_c_center == pytest.approx(p.delta_c, abs=1e-6 * abs(p.delta_c))
        assert fit.amplitude == pytest.approx(1.0, rel=1e-6)
        assert fit.offset == pytest.approx(0.0, abs=1e-6)

    def test_poisson_closure_statistics(self, spectroscopy_params):
        # detection-statistics run: background plus scaled profile, counts
        # drawn per point; injected width recovered within 2 sigma in >= 90%
        p = spectroscopy_params
        d = dressed_probe_corrected(p)
        clean = fano_spectrum(spectroscopy_grid(p), p)
        hits = 0
        for rep in range(100):
            counts = simulate_photon_counts(clean, rate_scale=1000.0,
                                            duration_per_point=9.0,
                                            background=300.0, seed=5000 + rep)
            fit = fit_fano(counts)
            err = fit.errors[2]
            if abs(fit.gamma_plus - d.gamma_plus) <= 2 * err:
                hits += 1
        assert hits >= 90

    def test_overlapping_resonances_broaden_single_fit(self, spectroscopy_params):
        components = multi_lambda_components(spectroscopy_params)
        widths = [dressed_probe_corrected(q).gamma_plus for _, q in components]
        grid = spectroscopy_grid(spectroscopy_params, span_mhz=2.0, points=401)
        blended = multi_lambda_spectrum(components, grid)
        fit = fit_fano(blended)
        assert fit.gamma_plus > max(widths)

    def test_requires_enough_points(self, spectroscopy_params):
        data = fano_spectrum(spectroscopy_grid(spectroscopy_params, points=8),
                             spectroscopy_params)
        with pytest.raises(ValueError):
            fit_fano(data)

    def test_json_serialization(self, spectroscopy_params):
        data = fano_spectrum(spectroscopy_grid(spectroscopy_params), spectroscopy_params)
        fit = fit_fano(data)
        payload = json.loads(fit.to_json())
        assert payload["model"] == "fano"
        assert payload["weighting"] == "uniform"
        assert payload["parameters"]["gamma_plus_khz"] == pytest.approx(
            fit.gamma_plus / khz_to_angular(1.0), rel=1e-9)
        assert set(payload["errors"]) == set(payload["parameters"])

    def test_fit_curve_reproduces_model(self, spectroscopy_params):
        data = fano_spectrum(spectroscopy_grid(spectroscopy_params), spectroscopy_params)
        fit = fit_fano(data)
        np.testing.assert_allclose(fano_fit_curve(fit, data.delta_p), data.values,
                                   atol=1e-6)


class TestExponentialFit:
    def test_noiseless_closure(self):
        times = np.linspace(0, 20e-3, 12)
        truth = ExpFit(tau_cool=2.1e-3, t_final=5.9e-6, t_initial=14.7e-6,
                       covariance=np.eye(3), chi2=0.0, dof=9)
        temps = truth.t_final + (truth.t_initial - truth.t_final) * np.exp(-times / truth.tau_cool)
        fit = fit_exponential(times, temps)
        assert fit.tau_cool == pytest.approx(2.1e-3, rel=1e-8)
        assert fit.t_final == pytest.approx(5.9e-6, rel=1e-8)
        assert fit.t_initial == pytest.approx(14.7e-6, rel=1e-8)

    def test_constant_data_degenerate(self):
        times = np.linspace(0, 10e-3, 8)
        with pytest.raises(DegenerateFitError):
            fit_exponential(times, np.full(times.size, 7e-6))

    def test_noisy_calibration(self):
        rng = np.random.default_rng(23)
        times = np.linspace(0, 20e-3, 10)
        clean = 5.9e-6 + (14.7e-6 - 5.9e-6) * np.exp(-times / 2.1e-3)
        good = 0
        for _ in range(100):
            noisy = clean * (1 + rng.normal(0, 0.05, times.size))
            fit = fit_exponential(times, noisy, sigma=0.05 * clean)
            if abs(fit.tau_cool - 2.1e-3) / 2.1e-3 < 0.3:
                good += 1
        assert good >= 90

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_exponential([0, 1e-3, 2e-3], [3e-6, 2e-6, 1e-6])

    def test_json(self):
        times = np.linspace(0, 20e-3, 12)
        temps = 5.9e-6 + 8.8e-6 * np.exp(-times / 2.1e-3)
        payload = json.loads(fit_exponential(times, temps).to_json())
        assert payload["parameters"]["tau_cool_ms"] == pytest.approx(2.1, rel=1e-6)


class TestPhotonCounts:
    def test_zero_everything(self):
        clean = Spectrum(delta_p=np.linspace(0, 1, 5), values=np.zeros(5))
        counts = simulate_photon_counts(clean, 100.0, 1.0, 0.0, seed=1)
        np.testing.assert_array_equal(counts.values, np.zeros(5))
        assert counts.kind == "photon_counts"

    def test_background_mean(self):
        # 300 events/s for 3 ms: 0.9 counts per point on average
        clean = Spectrum(delta_p=np.linspace(0, 1, 3000), values=np.zeros(3000))
        counts = simulate_photon_counts(clean, 0.0, 3e-3, 300.0, seed=2)
        assert counts.values.mean() == pytest.approx(0.9, rel=0.05)

    def test_linear_in_duration(self):
        clean = Spectrum(delta_p=np.linspace(0, 1, 4000),
                         values=np.ones(4000))
        short = simulate_photon_counts(clean, 500.0, 1e-3, 100.0, seed=3)
        long = simulate_photon_counts(clean, 500.0, 2e-3, 100.0, seed=4)
        assert long.values.mean() == pytest.approx(2 * short.values.mean(), rel=0.02)

    def test_determinism(self):
        clean = Spectrum(delta_p=np.linspace(0, 1, 50), values=np.ones(50))
        a = simulate_photon_counts(clean, 100.0, 1e-2, 10.0, seed=5)
        b = simulate_photon_counts(clean, 100.0, 1e-2, 10.0, seed=5)
        np.testing.assert_array_equal(a.values, b.values)
