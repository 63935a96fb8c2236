import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bubbledates import BubbleDgpSpec, estimation, model


def case1_spec(a=2.0, sample_size=200, sigma=6.79):
    return BubbleDgpSpec(
        sample_size=sample_size, a=a, alpha=1.0, b=a, beta=1.0,
        lambda_e=0.3, lambda_c=0.5, lambda_r=0.7, sigma=sigma, y0=100.0,
    )


@pytest.fixture(scope="session")
def spec_case1():
    return case1_spec()


@pytest.fixture(scope="session")
def series_case1_zero_noise(spec_case1):
    return model.simulate(spec_case1, innovations=np.zeros(200))


@pytest.fixture(scope="session")
def noisy_rep():
    """One healthy fixed-seed Case-1 draw (a=4) with its true-break fit."""
    spec = case1_spec(a=4.0)
    series = model.simulate(spec, np.random.default_rng([9, 0]))
    breaks = spec.break_dates()
    fit = estimation.fit_regimes(series, breaks)
    assert fit.phi_a_hat > 1 > fit.phi_b_hat > 0
    return spec, series, breaks, fit
