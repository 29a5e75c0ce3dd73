"""Rectangular detection windows evaluated in exact integer time.

Times are signed integers in microseconds. A detection window is a shifted
rectangular pulse whose value is 1 strictly inside its support, 1/2 on the
two edges and 0 elsewhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from fractions import Fraction

from .errors import DomainError

Time = int  # microseconds

US_PER_S = 1_000_000
_US = Decimal(US_PER_S)


class PulseLevel(enum.Enum):
    """The three values a rectangular pulse can take."""

    ZERO = 0
    HALF = 1
    ONE = 2

    @property
    def halves(self) -> int:
        """Level expressed in units of 1/2."""
        return self.value

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.value, 2)

    def __float__(self) -> float:
        return self.value / 2

    def __str__(self) -> str:
        return {0: "0", 1: "1/2", 2: "1"}[self.value]


def rect(t: Time, T: Time) -> PulseLevel:
    """Unit rectangle of width ``T`` centred on zero, evaluated at ``t``.

    ``|t/T| = 1/2`` is tested as ``2|t| == T`` so no division happens.
    """
    if T <= 0:
        raise DomainError(f"rect width must be positive, got {T} us")
    twice = 2 * abs(t)
    if twice < T:
        return PulseLevel.ONE
    if twice == T:
        return PulseLevel.HALF
    return PulseLevel.ZERO


@dataclass(frozen=True, order=True)
class RectPulse:
    """One detection window: centre and (even, positive) duration in us."""

    center: Time
    duration: Time

    def __post_init__(self) -> None:
        if not isinstance(self.center, int) or not isinstance(self.duration, int):
            raise DomainError("pulse center and duration must be integer microseconds")
        if self.duration <= 0:
            raise DomainError(f"pulse duration must be positive, got {self.duration} us")
        if self.duration % 2:
            raise DomainError(
                f"pulse duration must be an even number of microseconds, got {self.duration}"
            )

    @classmethod
    def from_window(cls, start: Time, end: Time) -> RectPulse:
        if end <= start:
            raise DomainError(f"window end ({end} us) must be after start ({start} us)")
        if (end - start) % 2:
            raise DomainError(
                f"window [{start}, {end}] us has odd duration; the centre would not be "
                "a whole microsecond"
            )
        return cls(center=(start + end) // 2, duration=end - start)

    @property
    def start(self) -> Time:
        return self.center - self.duration // 2

    @property
    def end(self) -> Time:
        return self.center + self.duration // 2

    def shifted(self, delta: Time) -> RectPulse:
        return RectPulse(self.center + delta, self.duration)


def pulse_value(p: RectPulse, t: Time) -> PulseLevel:
    return rect(t - p.center, p.duration)


def pulse_value_doubled(p: RectPulse, t2: int) -> PulseLevel:
    """Pulse value at time ``t2 / 2`` us, for evaluating at half-microsecond midpoints."""
    return rect(t2 - 2 * p.center, 2 * p.duration)


def pulse_support(p: RectPulse) -> tuple[Time, Time]:
    return (p.start, p.end)


def pulse_breakpoints(p: RectPulse) -> list[Time]:
    return [p.start, p.end]


def seconds_to_us(value: object, *, exact: bool = True) -> Time:
    """Convert decimal seconds to integer microseconds.

    With ``exact=True`` values that carry more than six fractional digits are
    rejected. Otherwise they are rounded half away from zero.
    Floats go through ``repr`` so ``0.1`` means 100000 us, not its binary
    approximation.
    """
    if isinstance(value, bool):
        raise DomainError(f"not a time value: {value!r}")
    try:
        if isinstance(value, float):
            dec = Decimal(repr(value))
        else:
            dec = Decimal(str(value).strip())
    except InvalidOperation:
        raise DomainError(f"not a decimal number of seconds: {value!r}") from None
    if not dec.is_finite():
        raise DomainError(f"time must be finite, got {value!r}")
    scaled = dec * _US
    whole = scaled.to_integral_value(rounding=ROUND_HALF_UP)
    if exact and whole != scaled:
        raise DomainError(f"{value} s has sub-microsecond precision")
    return int(whole)


def us_to_seconds(t: Time) -> Decimal:
    """Exact decimal seconds for ``t`` us, without trailing zeros."""
    dec = (Decimal(t) / _US).normalize()
    # normalize() turns 100 into 1E+2
    if dec == dec.to_integral_value():
        return dec.quantize(Decimal(1))
    return dec


def format_seconds(t: Time) -> str:
    return str(us_to_seconds(t))
