"""Geometric reward schedules.

Rewards run ``a, a*x, a*x**2, ...`` with ``a = pool * (1 - x)`` so the infinite
sum equals the pool. A schedule stays viable while the next reward is strictly
greater than its floor; the number of viable rewards is the capacity.

Terms are evaluated in decimal arithmetic at ``PRECISION`` significant digits
and rounded down to a micro-unit only when paid or compared. The Case-1
boundary (reward 37 clears 1.00 by about 5e-5) needs far less than that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from decimal import ROUND_FLOOR, Context, Decimal

from .money import Money, Ratio, to_decimal

PRECISION = 40
_CTX = Context(prec=PRECISION)


class NoViableSchedule(ValueError):
    """No ratio gives even one reward above the floor."""


def _floor_micros(v: Decimal) -> int:
    return int(v.to_integral_value(rounding=ROUND_FLOOR))


def gp_first_term(pool: Money, x: Ratio) -> Money:
    """First reward ``pool * (1 - x)``, rounded down."""
    if pool.micros < 0:
        raise ValueError("pool must be non-negative")
    return pool.scale_down(1 - x.value)


def _term(a: Money, x: Ratio, k: int) -> Decimal:
    # unrounded reward k in micro-units
    return _CTX.multiply(Decimal(a.micros), _CTX.power(x.value, k - 1))


@lru_cache(maxsize=1 << 16)
def reward_at(a: Money, x: Ratio, k: int) -> Money:
    """Reward paid to the k-th winner (1-based): ``a * x**(k-1)`` rounded down."""
    if k < 1:
        raise ValueError(f"winner index must be >= 1, got {k}")
    return Money(_floor_micros(_term(a, x, k)))


def max_winners(pool: Money, x: Ratio, floor: Money) -> int:
    """Largest n whose reward ``a * x**(n-1)`` (rounded) is strictly above ``floor``.

    Closed form ``ceil(ln(a / floor) / -ln x)``, then nudged by direct evaluation
    at the boundary so float error in the logs cannot move the answer.
    """
    if floor.micros <= 0:
        raise ValueError("floor must be positive (capacity would be infinite)")
    a = gp_first_term(pool, x)
    if a <= floor:
        return 0
    q = math.log(a.micros / floor.micros) / -math.log(float(x))
    n = max(1, math.ceil(q))
    while n > 1 and reward_at(a, x, n) <= floor:
        n -= 1
    while reward_at(a, x, n + 1) > floor:
        n += 1
    return n


@dataclass(frozen=True)
class RewardSchedule:
    first_term: Money
    ratio: Ratio
    floor: Money
    capacity: int
    normalizing_pool: Money

    @classmethod
    def from_pool(cls, pool: Money, x: Ratio, floor: Money) -> RewardSchedule:
        return cls(
            first_term=gp_first_term(pool, x),
            ratio=x,
            floor=floor,
            capacity=max_winners(pool, x, floor),
            normalizing_pool=pool,
        )

    def reward(self, k: int) -> Money:
        return reward_at(self.first_term, self.ratio, k)

    def rewards(self) -> list[Money]:
        return [self.reward(k) for k in range(1, self.capacity + 1)]

    def total(self, n: int | None = None) -> Money:
        return schedule_sum(self, self.capacity if n is None else n)


def nth_reward(schedule: RewardSchedule, k: int) -> Money:
    return schedule.reward(k)


def schedule_sum(schedule: RewardSchedule, n: int) -> Money:
    """Sum of the first n unrounded terms, rounded down once at the end."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return Money(0)
    x = schedule.ratio.value
    a = Decimal(schedule.first_term.micros)
    s = _CTX.divide(_CTX.multiply(a, 1 - _CTX.power(x, n)), 1 - x)
    return Money(_floor_micros(s))


@dataclass(frozen=True)
class OptimalRatio:
    ratio: Ratio
    capacity: int
    plateau: tuple[Decimal, ...]  # every grid point reaching ``capacity``, ascending


def ratio_grid(grid_step: float | str | Decimal) -> list[Decimal]:
    """Grid points ``step, 2*step, ...`` strictly below ``1 - step`` inclusive."""
    step = to_decimal(grid_step)
    if not (0 < step <= Decimal("0.001")):
        raise ValueError(f"grid_step must lie in (0, 1e-3], got {step}")
    count = int((1 / step).to_integral_value(rounding=ROUND_FLOOR))
    return [step * i for i in range(1, count) if step * i <= 1 - step]


def optimal_ratio(pool: Money, floor: Money, grid_step: float | str | Decimal = "0.0001") -> OptimalRatio:
    """Scan the ratio grid for the largest capacity.

    Ties go to the smallest ratio, which pays the largest first reward for the
    same number of winners.
    """
    if floor.micros <= 0:
        raise ValueError("floor must be positive")
    grid = ratio_grid(grid_step)
    if pool <= floor:
        raise NoViableSchedule(f"pool {pool} does not exceed floor {floor}")
    best = 0
    plateau: list[Decimal] = []
    for xv in grid:
        n = max_winners(pool, Ratio(xv), floor)
        if n > best:
            best, plateau = n, [xv]
        elif n == best and n > 0:
            plateau.append(xv)
    if best == 0:
        raise NoViableSchedule(f"no grid ratio pays a first reward above {floor}")
    return OptimalRatio(Ratio(plateau[0]), best, tuple(plateau))
