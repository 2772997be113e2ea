"""Odd Jacobi theta function in a log-scaled representation.

theta1(z|tau) = 2 * sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) z),  q = e^{i pi tau}

Only purely imaginary tau is supported.  Arguments with large imaginary part
are reduced into the fundamental strip |Im z| <= pi*Im(tau)/2 using
theta1(z + pi*tau) = -q^{-1} e^{-2iz} theta1(z), so the result is carried as a
(log-magnitude, phase) pair that never overflows.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

_TWO_PI = 2.0 * math.pi
_MAX_TERMS = 64
_REL_TOL = 1e-16
# After reduction, arguments this close to the theta zero at the origin are
# treated as exact zeros.  Lattice arguments that hit a zero of theta1 do so
# exactly in rational arithmetic but pick up ~1e-16 rounding in floats; all
# legitimately nonzero lattice arguments stay at least O(pi/N1) away.
_ZERO_SNAP = 1e-12


def _wrap_phase(phase: float) -> float:
    """Reduce a phase to (-pi, pi]."""
    p = math.fmod(phase, _TWO_PI)
    if p > math.pi:
        p -= _TWO_PI
    elif p <= -math.pi:
        p += _TWO_PI
    return p


@dataclass(frozen=True)
class LogAmplitude:
    """Complex amplitude as (natural log of modulus, phase in (-pi, pi]).

    log_mag = -inf encodes an exact zero.
    """

    log_mag: float
    phase: float

    @staticmethod
    def zero() -> "LogAmplitude":
        return LogAmplitude(-math.inf, 0.0)

    @staticmethod
    def from_complex(value: complex) -> "LogAmplitude":
        if value == 0:
            return LogAmplitude.zero()
        return LogAmplitude(math.log(abs(value)), cmath.phase(value))

    @staticmethod
    def from_log(log_value: complex) -> "LogAmplitude":
        return LogAmplitude(log_value.real, _wrap_phase(log_value.imag))

    @property
    def is_zero(self) -> bool:
        return self.log_mag == -math.inf

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0.0 + 0.0j
        return cmath.exp(complex(self.log_mag, self.phase))

    def __mul__(self, other: "LogAmplitude") -> "LogAmplitude":
        if self.is_zero or other.is_zero:
            return LogAmplitude.zero()
        return LogAmplitude(
            self.log_mag + other.log_mag, _wrap_phase(self.phase + other.phase)
        )

    def __truediv__(self, other: "LogAmplitude") -> "LogAmplitude":
        if other.is_zero:
            raise ZeroDivisionError("division by an exact-zero amplitude")
        if self.is_zero:
            return LogAmplitude.zero()
        return LogAmplitude(
            self.log_mag - other.log_mag, _wrap_phase(self.phase - other.phase)
        )

    def scaled_power(self, k: int) -> "LogAmplitude":
        if self.is_zero:
            return LogAmplitude.zero()
        return LogAmplitude(k * self.log_mag, _wrap_phase(k * self.phase))


def log_theta1(z: complex, tau: complex) -> LogAmplitude:
    """theta1(z|tau) for purely imaginary tau with Im(tau) > 0."""
    t = tau.imag
    if t <= 0.0:
        raise ValueError(f"Im(tau) must be positive, got tau={tau}")
    if abs(tau.real) > 1e-14:
        raise ValueError(f"only purely imaginary tau is supported, got tau={tau}")
    z = complex(z)

    # Quasi-periodicity: theta1(z' + m*pi*tau) = (-1)^m q^{-m^2} e^{-2imz'} theta1(z').
    m = round(z.imag / (math.pi * t))
    zp = z - 1j * m * math.pi * t
    # Periodicity: theta1(z'' + k*pi) = (-1)^k theta1(z'').
    k = round(zp.real / math.pi)
    zp = zp - k * math.pi

    if abs(zp) < _ZERO_SNAP:
        return LogAmplitude.zero()

    log_q = -math.pi * t  # q = e^{i pi tau} is real and positive here
    # Stop on the envelope 2 q^{(n+1/2)^2} cosh((2n+1) Im z'), not on the term
    # itself: sin((2n+1) z') can vanish exactly at rational multiples of pi
    # (e.g. z' = pi/3, n = 1) and a zero term must not end the sum early.
    abs_im = abs(zp.imag)
    series = 0.0 + 0.0j
    sign = 1.0
    for n in range(_MAX_TERMS):
        half = n + 0.5
        series += 2.0 * sign * math.exp(log_q * half * half) * cmath.sin((2 * n + 1) * zp)
        sign = -sign
        envelope = 2.0 * math.exp(log_q * (half + 1.0) ** 2 + (2 * n + 3) * abs_im)
        if n >= 1 and envelope < _REL_TOL * abs(series):
            break

    if series == 0:
        return LogAmplitude.zero()

    log_mag = math.log(abs(series)) + m * m * math.pi * t + 2.0 * m * zp.imag
    phase = cmath.phase(series) + (m + k) * math.pi - 2.0 * m * zp.real
    return LogAmplitude(log_mag, _wrap_phase(phase))


def log_theta1_sq(z: complex, tau: complex) -> LogAmplitude:
    """Square of theta1: doubled log-magnitude, doubled phase mod 2*pi."""
    return log_theta1(z, tau).scaled_power(2)
