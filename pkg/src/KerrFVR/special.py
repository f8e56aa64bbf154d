"""Scaled Laguerre and Hermite functions evaluated by three-term recurrences.

Factorial ratios overflow long before the truncations used for the Kerr state
(n ~ 60), so the normalisation is folded into the recurrence and the starting
values are built in log form.
"""
import numpy as np
from scipy.special import gammaln


def laguerre_functions(n_max: int, k: int, x: np.ndarray) -> np.ndarray:
    """Normalised Laguerre functions l_n^k(x) for n = 0..n_max.

    l_n^k(x) = sqrt(n!/(n+k)!) x^(k/2) exp(-x/2) L_n^k(x), x >= 0, returned with
    shape (n_max + 1,) + x.shape. They satisfy

        sqrt(n (n+k)) l_n = (2n - 1 + k - x) l_{n-1} - sqrt((n-1)(n-1+k)) l_{n-2}
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    with np.errstate(divide="ignore"):
        log_x = np.log(x)
    if k == 0:
        log_start = -0.5 * x
    else:
        log_start = 0.5 * k * log_x - 0.5 * x - 0.5 * gammaln(k + 1.0)
    out[0] = np.exp(log_start)
    if n_max == 0:
        return out
    out[1] = out[0] * (1.0 + k - x) / np.sqrt(1.0 + k)
    for n in range(2, n_max + 1):
        out[n] = ((2 * n - 1 + k - x) * out[n - 1]
                  - np.sqrt((n - 1.0) * (n - 1.0 + k)) * out[n - 2]) / np.sqrt(n * (n + k))
    return out


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions <x|n>, n = 0..n_max (hbar = m = omega = 1)"""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max == 0:
        return out
    out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(2, n_max + 1):
        out[n] = np.sqrt(2.0 / n) * x * out[n - 1] - np.sqrt((n - 1.0) / n) * out[n - 2]
    return out
