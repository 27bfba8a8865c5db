"""Quiz mechanism parameters and their strict (de)serialization."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Mapping

from .money import Money, Ratio, to_decimal
from .schedule import NoViableSchedule, RewardSchedule
from .threshold import ControllerSettings

DEFAULT_USER_COST_PCT = Decimal("0.001")
DEFAULT_HOSTING_PCT = Decimal("0.05")


class ConfigError(ValueError):
    """A parameter violates a constraint; ``field`` is a dotted path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class Case(str, enum.Enum):
    CASE1 = "case1"  # fixed pool, house keeps the whole fee
    CASE2 = "case2"  # part of each fee feeds the pool
    CASE3 = "case3"  # case2 plus the adaptive threshold


@dataclass(frozen=True)
class QuizConfig:
    ipp: Money
    fee: Money
    cp: Decimal
    ratio: Ratio
    case: Case
    controller: ControllerSettings = field(default_factory=ControllerSettings)
    user_cost: Money | None = None
    hosting_cost: Money | None = None
    registration_cap: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "cp", to_decimal(self.cp))
        object.__setattr__(self, "case", Case(self.case))
        if self.ipp.micros <= 0:
            raise ConfigError("config.ipp", "must be positive")
        if self.fee.micros <= 0:
            raise ConfigError("config.fee", "must be positive")
        if not (0 < self.cp <= 1):
            raise ConfigError("config.cp", "must lie in (0,1]")
        if self.case is Case.CASE1 and self.cp != 1:
            raise ConfigError("config.cp", "case1 keeps the entire fee, cp must equal 1")
        if self.case is not Case.CASE1 and self.cp >= 1:
            raise ConfigError("config.cp", f"{self.case.value} feeds the pool, cp must be < 1")
        if self.user_cost is None:
            object.__setattr__(self, "user_cost", self.ipp.scale_down(DEFAULT_USER_COST_PCT))
        if self.hosting_cost is None:
            object.__setattr__(self, "hosting_cost", self.ipp.scale_down(DEFAULT_HOSTING_PCT))
        if self.user_cost.micros < 0:
            raise ConfigError("config.user_cost", "must be non-negative")
        if self.hosting_cost.micros < 0:
            raise ConfigError("config.hosting_cost", "must be non-negative")
        if self.registration_cap is not None and self.registration_cap < 1:
            raise ConfigError("config.registration_cap", "must be a positive integer")

    @property
    def adaptive(self) -> bool:
        return self.case is Case.CASE3

    @property
    def floor(self) -> Money:
        """Viability floor: the fee in Case 1, the retained share ``cp * fee`` otherwise."""
        if self.case is Case.CASE1:
            return self.fee
        return self.fee.scale_down(self.cp)

    @property
    def injection(self) -> Money:
        """Share of each fee added to the pool; the house keeps the rest."""
        return self.fee - self.fee.scale_down(self.cp)

    def replace(self, **changes: Any) -> QuizConfig:
        data = to_dict(self)
        data.update(changes)
        return parse_config(data)


def build_schedule(config: QuizConfig) -> RewardSchedule:
    schedule = RewardSchedule.from_pool(config.ipp, config.ratio, config.floor)
    if schedule.capacity == 0:
        raise NoViableSchedule(
            f"first reward {schedule.first_term} does not exceed floor {schedule.floor}"
        )
    return schedule


# --- serialization ---------------------------------------------------------

_CONFIG_KEYS = {
    "case", "ipp", "fee", "cp", "ratio", "controller",
    "user_cost", "hosting_cost", "registration_cap",
}
_CONTROLLER_KEYS = {"t0", "sf", "s_target", "window", "t_min", "t_max"}


def parse_money(value: Any, path: str) -> Money:
    """Integer micro-units, or a decimal string in currency units."""
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(path, "money must be integer micro-units or a decimal string")
    if isinstance(value, int):
        m = Money(value)
    else:
        try:
            d = to_decimal(value)
        except ValueError:
            raise ConfigError(path, f"not a decimal amount: {value!r}") from None
        if d != d.quantize(Decimal("0.000001")):
            raise ConfigError(path, "finer than one micro-unit")
        m = Money.of(d)
    if m.micros < 0:
        raise ConfigError(path, "must be non-negative")
    return m


def parse_fraction(value: Any, path: str, *, lo: float = 0.0, hi: float = 1.0) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(path, "must be a number")
    try:
        v = float(value)
    except ValueError:
        raise ConfigError(path, f"not a number: {value!r}") from None
    if not (lo <= v <= hi):
        raise ConfigError(path, f"must lie in [{lo:g},{hi:g}]")
    return v


def _decimal(value: Any, path: str) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(path, "must be a number")
    try:
        return to_decimal(value)
    except ValueError:
        raise ConfigError(path, f"not a number: {value!r}") from None


def _reject_unknown(data: Mapping, allowed: set[str], path: str) -> None:
    if not isinstance(data, Mapping):
        raise ConfigError(path, "must be an object")
    extra = sorted(set(data) - allowed)
    if extra:
        raise ConfigError(f"{path}.{extra[0]}", "unknown field")


def parse_controller(data: Mapping, path: str = "config.controller") -> ControllerSettings:
    _reject_unknown(data, _CONTROLLER_KEYS, path)
    kw: dict[str, Any] = {}
    for key in ("t0", "s_target", "t_min", "t_max"):
        if key in data:
            kw[key] = parse_fraction(data[key], f"{path}.{key}")
    if "t0" in kw and kw["t0"] == 0:
        raise ConfigError(f"{path}.t0", "must lie in (0,1]")
    if "sf" in data:
        kw["sf"] = parse_fraction(data["sf"], f"{path}.sf", hi=float("inf"))
    if "window" in data:
        w = data["window"]
        if isinstance(w, bool) or not isinstance(w, int) or w < 1:
            raise ConfigError(f"{path}.window", "must be a positive integer")
        kw["window"] = w
    try:
        return ControllerSettings(**kw)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_config(data: Mapping, path: str = "config") -> QuizConfig:
    _reject_unknown(data, _CONFIG_KEYS, path)
    for key in ("case", "ipp", "fee", "ratio"):
        if key not in data:
            raise ConfigError(f"{path}.{key}", "required")
    try:
        case = Case(str(data["case"]).lower())
    except ValueError:
        raise ConfigError(f"{path}.case", "must be one of case1, case2, case3") from None
    cp = _decimal(data.get("cp", "1" if case is Case.CASE1 else "0.75"), f"{path}.cp")
    if not (0 < cp <= 1):
        raise ConfigError(f"{path}.cp", "must lie in (0,1]")
    try:
        ratio = Ratio(_decimal(data["ratio"], f"{path}.ratio"))
    except ValueError:
        raise ConfigError(f"{path}.ratio", "must lie in (0,1)") from None
    cap = data.get("registration_cap")
    if cap is not None and (isinstance(cap, bool) or not isinstance(cap, int) or cap < 1):
        raise ConfigError(f"{path}.registration_cap", "must be a positive integer or null")
    kw: dict[str, Any] = {}
    for key in ("user_cost", "hosting_cost"):
        if data.get(key) is not None:
            kw[key] = parse_money(data[key], f"{path}.{key}")
    cfg = QuizConfig(
        ipp=parse_money(data["ipp"], f"{path}.ipp"),
        fee=parse_money(data["fee"], f"{path}.fee"),
        cp=cp,
        ratio=ratio,
        case=case,
        controller=parse_controller(data.get("controller", {}), f"{path}.controller"),
        registration_cap=cap,
        **kw,
    )
    if cfg.ipp.micros == 0:
        raise ConfigError(f"{path}.ipp", "must be positive")
    return cfg


def to_dict(config: QuizConfig) -> dict:
    c = config.controller
    return {
        "case": config.case.value,
        "ipp": config.ipp.micros,
        "fee": config.fee.micros,
        "cp": str(config.cp),
        "ratio": str(config.ratio.value),
        "controller": {
            "t0": c.t0, "sf": c.sf, "s_target": c.s_target,
            "window": c.window, "t_min": c.t_min, "t_max": c.t_max,
        },
        "user_cost": config.user_cost.micros,
        "hosting_cost": config.hosting_cost.micros,
        "registration_cap": config.registration_cap,
    }
