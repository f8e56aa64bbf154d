class DomainError(ValueError):
    """Input lies outside the domain of a dynamical quantity"""


class UnsupportedStateError(ValueError):
    """State description that has no closed form in this package"""


class TruncationError(ValueError):
    """Fock truncation leaves more norm outside the basis than allowed"""

    def __init__(self, truncation: int, tail: float, tolerance: float):
        self.truncation = truncation
        self.tail = tail
        self.tolerance = tolerance
        super().__init__(
            f"Fock truncation N={truncation} leaves tail mass {tail:.3e} "
            f"(allowed {tolerance:.1e}); increase the truncation."
        )


class GridMismatchError(ValueError):
    """Two fields sampled on different grids were combined"""


class DegenerateNormalizationError(ValueError):
    """Field integral too small to rescale to unit norm"""


class ConfigError(ValueError):
    """Invalid run configuration"""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class GridFileError(ValueError):
    """Grid file that cannot be read"""


class ConvergenceError(RuntimeError):
    """Quadrature did not converge at one or more nodes"""

    def __init__(self, message: str, n_failed: int = 0):
        self.n_failed = n_failed
        super().__init__(message)
