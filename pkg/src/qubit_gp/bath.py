"""Lorentzian bosonic bath at zero temperature.

The spectral density is a Lorentzian of width ``width`` centered at the
qubit frequency ``omega0``, with coupling strength ``coupling``:

    J(w) = (1/pi) * coupling^2 * width / ((omega0 - w)^2 + width^2)

Under the Weisskopf-Wigner extension of the spectral integral the bath
correlation function is a single decaying exponential,

    <B(t) B(0)> = coupling^2 * exp(-(width + i*omega0) * t),   t >= 0.

Everything in this package is expressed in units of ``omega0`` (times in
1/omega0), so the default ``omega0 = 1.0`` is the unit choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["BathParams", "CorrelationFunction"]


@dataclass(frozen=True)
class BathParams:
    """Bath parameters: coupling strength W and spectral width lambda.

    ``coupling`` may be zero (exact unitary limit); ``width`` must be
    positive.  The bath correlation time is ``1/width``; compared with
    the system period ``2*pi/omega0`` this separates the Markovian
    (``width >= omega0``) from the non-Markovian regime.
    """

    coupling: float
    width: float
    omega0: float = 1.0

    def __post_init__(self) -> None:
        if not (self.coupling >= 0.0 and math.isfinite(self.coupling)):
            raise ValueError(f"coupling must be >= 0 and finite, got {self.coupling}")
        if not (self.width > 0.0 and math.isfinite(self.width)):
            raise ValueError(f"width must be > 0 and finite, got {self.width}")
        if not (self.omega0 > 0.0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be > 0 and finite, got {self.omega0}")

    @property
    def period(self) -> float:
        """System period T = 2*pi/omega0, the evolution time for phases."""
        return 2.0 * math.pi / self.omega0

    @property
    def correlation_time(self) -> float:
        return 1.0 / self.width

    @property
    def is_markovian(self) -> bool:
        """Correlation time short against the system period (width >= omega0)."""
        return self.width >= self.omega0

    def spectral_density(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return (self.coupling**2 * self.width / math.pi) / (
            (self.omega0 - w) ** 2 + self.width**2
        )

    def correlation(self) -> "CorrelationFunction":
        return CorrelationFunction(
            amplitude=self.coupling**2,
            exponents=(
                complex(self.width, -self.omega0),
                complex(self.width, +self.omega0),
            ),
        )


@dataclass(frozen=True)
class CorrelationFunction:
    """Two-exponent form of the bath correlation function.

    ``value(t) = amplitude * exp(-exponents[1] * t)`` for t >= 0; the
    conjugate pair of exponents (width -/+ i*omega0) is what the real and
    imaginary parts decompose over, and is exactly the decay-rate vector
    of the auxiliary hierarchy.
    """

    amplitude: float
    exponents: tuple[complex, complex]

    def value(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.amplitude * np.exp(-self.exponents[1] * t)

    def real_coefficients(self) -> tuple[complex, complex]:
        """Weights of exp(-exponents[k] t) in Re C(t)."""
        return (0.5 * self.amplitude, 0.5 * self.amplitude)

    def imag_coefficients(self) -> tuple[complex, complex]:
        """Weights of exp(-exponents[k] t) in Im C(t) (pure imaginary pair)."""
        return (0.5j * self.amplitude, -0.5j * self.amplitude)
