import numpy as np
import pytest

from eitcool import CONSTANTS, LambdaParams, TrapGeometry
from eitcool.core import khz_to_angular, mhz_to_angular

GAMMA = CONSTANTS.gamma_d2


@pytest.fixture
def spectroscopy_params() -> LambdaParams:
    """Coupling 1.4 gamma at -80 MHz, probe at saturation 1."""
    return LambdaParams.from_saturations(
        s_p=1.0, s_c=2 * 1.4**2, delta_p=mhz_to_angular(-80.0),
        delta_c=mhz_to_angular(-80.0))


@pytest.fixture
def cooling_params() -> LambdaParams:
    """Optimal cooling drive: coupling 5.06 MHz, probe 2.0 MHz, +94.5 MHz."""
    return LambdaParams(omega_p=mhz_to_angular(2.0), omega_c=mhz_to_angular(5.06),
                        delta_p=mhz_to_angular(94.5), delta_c=mhz_to_angular(94.5))


@pytest.fixture
def reference_trap() -> TrapGeometry:
    """851 nm beam at 1.1 um waist, depth set by the 73 kHz radial frequency."""
    return TrapGeometry.from_radial_frequency(khz_to_angular(73.0))


@pytest.fixture
def measured_frequencies():
    """Measured (radial, axial) sampling frequencies."""
    return khz_to_angular(73.0), khz_to_angular(10.0)


def antidiagonal_cells(n: int):
    """Index pairs of each anti-diagonal (i + j = const) of an n x n grid."""
    for total in range(2 * n - 1):
        cells = [(i, total - i) for i in range(n) if 0 <= total - i < n]
        if len(cells) >= 3:
            yield cells
