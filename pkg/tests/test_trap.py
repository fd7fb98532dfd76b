import numpy as np
import pytest

from eitcool import CONSTANTS, TrapGeometry, depth_from_radial_frequency, potential, trap_frequencies
from eitcool.core import khz_to_angular

M = CONSTANTS.mass_rb87
KB = CONSTANTS.kb


class TestDepthAndFrequencies:
    def test_depth_anchor(self):
        # 73 kHz radial frequency in a 1.1 um waist corresponds to ~0.665 mK
        depth = depth_from_radial_frequency(khz_to_angular(73.0), 1.1e-6, M)
        assert depth / KB == pytest.approx(0.6652e-3, rel=1e-3)

    def test_depth_quadratic_in_frequency(self):
        d1 = depth_from_radial_frequency(khz_to_angular(73.0), 1.1e-6, M)
        d2 = depth_from_radial_frequency(khz_to_angular(146.0), 1.1e-6, M)
        assert d2 == pytest.approx(4 * d1, rel=1e-12)

    def test_round_trip_radial_frequency(self, reference_trap):
        om_r, _ = trap_frequencies(reference_trap)
        assert om_r == pytest.approx(khz_to_angular(73.0), rel=1e-12)

    def test_ideal_axial_frequency(self, reference_trap):
        # ideal-Gaussian prediction is 12.7 kHz, above the measured 10 kHz;
        # the gap is a property of the real apparatus, not of this model
        _, om_z = trap_frequencies(reference_trap)
        assert om_z == pytest.approx(khz_to_angular(12.71), rel=1e-3)

    def test_frequency_ratio_identity(self, reference_trap):
        om_r, om_z = trap_frequencies(reference_trap)
        expected = np.sqrt(2) * reference_trap.rayleigh_range / reference_trap.waist
        assert om_r / om_z == pytest.approx(expected, rel=1e-12)

    def test_rayleigh_range(self, reference_trap):
        assert reference_trap.rayleigh_range == pytest.approx(4.4666e-6, rel=1e-4)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            depth_from_radial_frequency(0.0, 1e-6, M)
        with pytest.raises(ValueError):
            TrapGeometry(depth=-1e-27)

    def test_inconsistent_derived_fields_rejected(self, reference_trap):
        with pytest.raises(ValueError):
            TrapGeometry(wavelength=reference_trap.wavelength,
                         waist=reference_trap.waist, depth=reference_trap.depth,
                         omega_radial=2 * reference_trap.omega_radial)


class TestPotential:
    def test_origin_is_minus_depth(self, reference_trap):
        assert potential(reference_trap, (0.0, 0.0, 0.0)) == -reference_trap.depth

    def test_vanishes_far_away(self, reference_trap):
        assert potential(reference_trap, (50e-6, 0.0, 0.0)) == pytest.approx(0.0, abs=1e-40)
        assert abs(potential(reference_trap, (0.0, 0.0, 1e-3))) < 1e-4 * reference_trap.depth

    def test_nonpositive_and_monotone_in_radius(self, reference_trap):
        radii = np.linspace(0, 5e-6, 200)
        pos = np.zeros((radii.size, 3))
        pos[:, 0] = radii
        pos[:, 2] = 2e-6
        values = potential(reference_trap, pos)
        assert np.all(values <= 0)
        assert np.all(np.diff(values) >= 0)

    def test_harmonic_expansion(self, reference_trap):
        # quadratic expansion reproduces the harmonic energies within 1%
        # for displacements up to 5% of the waist
        om_r, om_z = trap_frequencies(reference_trap)
        for direction, omega in (((1.0, 0.0, 0.0), om_r), ((0.0, 0.0, 1.0), om_z)):
            scale = reference_trap.waist if direction[0] else reference_trap.rayleigh_range
            r = 0.05 * reference_trap.waist
            u = potential(reference_trap, tuple(r * d for d in direction))
            harmonic = 0.5 * M * omega**2 * r**2
            assert u + reference_trap.depth == pytest.approx(harmonic, rel=0.01)


class TestConfigRoundTrip:
    def test_json_config_round_trip(self, reference_trap):
        cfg = reference_trap.to_config()
        back = TrapGeometry.from_config(cfg)
        assert back.depth == pytest.approx(reference_trap.depth, rel=1e-12)
        assert back.omega_radial == pytest.approx(reference_trap.omega_radial, rel=1e-12)
        assert back.omega_axial == pytest.approx(reference_trap.omega_axial, rel=1e-12)

    def test_inconsistent_config_rejected(self, reference_trap):
        cfg = reference_trap.to_config()
        cfg["omega_radial_khz"] *= 1.5
        with pytest.raises(ValueError):
            TrapGeometry.from_config(cfg)
