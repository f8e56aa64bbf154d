import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.special import eval_genlaguerre, factorial

from KerrFVR.special import hermite_functions, laguerre_functions


@pytest.mark.parametrize("k", [0, 1, 3])
def test_laguerre_functions_match_scipy(k):
    x = np.linspace(0.0, 12.0, 25)
    ell = laguerre_functions(8, k, x)
    for n in range(9):
        expected = (np.sqrt(factorial(n) / factorial(n + k)) * x ** (k / 2.0)
                    * np.exp(-x / 2.0) * eval_genlaguerre(n, k, x))
        np.testing.assert_allclose(ell[n], expected, atol=1e-12)


def test_laguerre_functions_stay_finite_at_high_order():
    """Factorial ratios overflow long before these orders"""
    ell = laguerre_functions(200, 150, np.array([0.0, 50.0, 400.0]))
    assert np.all(np.isfinite(ell))
    assert np.max(np.abs(ell)) <= 1.0 + 1e-9


def test_hermite_functions_orthonormal():
    x = np.linspace(-12.0, 12.0, 2001)
    psi = hermite_functions(20, x)
    gram = trapezoid(psi[:, None, :] * psi[None, :, :], x, axis=-1)
    np.testing.assert_allclose(gram, np.eye(21), atol=1e-10)
