import math

import numpy as np
import pytest
from scipy.integrate import quad

from centrafit.models import ExponentialModel, exponential_inverse, get_model

MODEL = ExponentialModel()
THETAS = [0.3, 1.0, 4.0]


@pytest.mark.parametrize("theta", THETAS)
def test_density_integrates_to_one(theta):
    mass, _ = quad(lambda x: math.exp(MODEL.log_pdf(x, theta)), 0, np.inf)
    assert mass == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("theta", THETAS)
def test_score_matches_log_pdf_differences(theta):
    x = np.array([0.0, 0.3, 1.0, 5.0])
    h = 1e-6 * max(1.0, abs(theta))
    fd = (MODEL.log_pdf(x, theta + h) - MODEL.log_pdf(x, theta - h)) / (2 * h)
    np.testing.assert_allclose(MODEL.score(x, theta), fd, rtol=1e-6)


@pytest.mark.parametrize("theta", THETAS)
def test_score_prime_matches_score_differences(theta):
    x = np.array([0.0, 0.3, 1.0, 5.0])
    h = 1e-6 * max(1.0, abs(theta))
    fd = (MODEL.score(x, theta + h) - MODEL.score(x, theta - h)) / (2 * h)
    np.testing.assert_allclose(MODEL.score_prime(x, theta), fd, rtol=1e-6)


def test_log_pdf_outside_support():
    assert MODEL.log_pdf(-0.5, 1.0) == -np.inf


def test_log_pdf_broadcasts_over_grids():
    x = np.array([[0.5, 1.0, 2.0]])
    theta = np.array([[0.5], [2.0]])
    lp = MODEL.log_pdf(x, theta)
    assert lp.shape == (2, 3)
    assert lp[1, 0] == pytest.approx(math.log(2.0) - 2.0 * 0.5)


class TestInverse:
    def test_mode(self):
        assert exponential_inverse(2.0, 2.0) == [0.0]

    def test_unit_rate(self):
        assert exponential_inverse(math.exp(-1), 1.0) == pytest.approx([1.0])

    def test_hand_solved(self):
        # theta=2, p=0.5: 2 exp(-2x) = 0.5 -> x = ln(4)/2
        (x,) = exponential_inverse(0.5, 2.0)
        assert x == pytest.approx(math.log(4.0) / 2.0)

    def test_out_of_range(self):
        assert exponential_inverse(1.5, 1.0) == []
        assert exponential_inverse(0.0, 1.0) == []
        assert exponential_inverse(-0.1, 1.0) == []

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            exponential_inverse(0.5, 0.0)

    @pytest.mark.parametrize("theta", THETAS)
    def test_round_trip(self, theta):
        for frac in [1e-6, 0.01, 0.5, 0.99, 1.0]:
            p = frac * theta
            (x,) = MODEL.inverse(p, theta)
            assert float(MODEL.log_pdf(x, theta)) == pytest.approx(
                math.log(p), abs=1e-10
            )

    @pytest.mark.parametrize("theta", THETAS)
    def test_density_bounded_by_rate(self, theta):
        x = np.linspace(0, 20, 200)
        h = np.exp(MODEL.log_pdf(x, theta))
        assert np.all(h <= theta)
        assert h[0] == pytest.approx(theta)
        assert np.all(h[1:] < theta)


def test_registry():
    assert isinstance(get_model("exponential"), ExponentialModel)
    with pytest.raises(ValueError):
        get_model("gaussian")
