"""Exact currency amounts in integer micro-units, and the GP ratio type."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_FLOOR, Decimal, InvalidOperation
from functools import total_ordering
from typing import Union

MICROS_PER_UNIT = 1_000_000
_QUANTUM = Decimal("0.000001")

Number = Union[int, str, Decimal]


def to_decimal(value: Number | float) -> Decimal:
    """Convert without the binary-float trap (``Decimal(0.1)`` is not 0.1)."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    try:
        return Decimal(str(value))
    except InvalidOperation:
        raise ValueError(f"not a decimal number: {value!r}") from None


@total_ordering
@dataclass(frozen=True, slots=True)
class Money:
    """A currency amount held as an integer count of micro-units.

    Signed so that profit can be represented; balances, fees and rewards are
    checked for non-negativity where they are produced.
    """

    micros: int

    def __post_init__(self) -> None:
        if not isinstance(self.micros, int) or isinstance(self.micros, bool):
            raise TypeError(f"Money needs integer micro-units, got {self.micros!r}")

    @classmethod
    def of(cls, amount: Number | float) -> Money:
        """Parse a currency amount (``"1.25"``, ``Decimal``) rounding down to a micro-unit."""
        d = to_decimal(amount)
        return cls(int((d * MICROS_PER_UNIT).to_integral_value(rounding=ROUND_FLOOR)))

    @classmethod
    def zero(cls) -> Money:
        return cls(0)

    def to_decimal(self) -> Decimal:
        return (Decimal(self.micros) / MICROS_PER_UNIT).quantize(_QUANTUM)

    def __str__(self) -> str:
        return str(self.to_decimal())

    def __repr__(self) -> str:
        return f"Money({self})"

    def __add__(self, other: Money) -> Money:
        if not isinstance(other, Money):
            return NotImplemented
        return Money(self.micros + other.micros)

    def __sub__(self, other: Money) -> Money:
        if not isinstance(other, Money):
            return NotImplemented
        return Money(self.micros - other.micros)

    def __neg__(self) -> Money:
        return Money(-self.micros)

    def __mul__(self, k: int) -> Money:
        if not isinstance(k, int) or isinstance(k, bool):
            return NotImplemented
        return Money(self.micros * k)

    __rmul__ = __mul__

    def __lt__(self, other: Money) -> bool:
        if not isinstance(other, Money):
            return NotImplemented
        return self.micros < other.micros

    def scale_down(self, fraction: Decimal) -> Money:
        """``self * fraction`` rounded down to a micro-unit (exact)."""
        v = Decimal(self.micros) * fraction
        return Money(int(v.to_integral_value(rounding=ROUND_FLOOR)))

    def to_json(self) -> dict:
        return {"micros": self.micros, "display": str(self)}


@dataclass(frozen=True, slots=True)
class Ratio:
    """Common ratio of the reward progression, strictly inside (0, 1).

    Held as a ``Decimal`` so that values like 0.9695 are exact.
    """

    value: Decimal

    def __post_init__(self) -> None:
        v = to_decimal(self.value)
        object.__setattr__(self, "value", v)
        if not (0 < v < 1):
            raise ValueError(f"ratio must lie strictly in (0, 1), got {v}")

    @classmethod
    def of(cls, value: Number | float) -> Ratio:
        return cls(to_decimal(value))

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return str(self.value)
