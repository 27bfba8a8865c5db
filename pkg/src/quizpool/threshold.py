"""Self-correcting win threshold (Case 3).

Outcomes are collected in tumbling windows of ``window`` attempts. When a
window fills, its success rate ``s`` sets the next threshold

    t = clamp(t0 + sf * (s - s_target), t_min, t_max)

so a run of too many winners makes the quiz harder. Each update starts from
``t0``, not from the previous ``t``. All quantities are fractions in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ControllerSettings:
    t0: float = 0.70
    sf: float = 0.10
    s_target: float = 0.20
    window: int = 5
    t_min: float = 0.60
    t_max: float = 0.95

    def __post_init__(self) -> None:
        if not (0 < self.t0 <= 1):
            raise ValueError(f"t0: must lie in (0,1], got {self.t0}")
        if self.sf < 0:
            raise ValueError(f"sf: must be non-negative, got {self.sf}")
        if not (0 <= self.s_target <= 1):
            raise ValueError(f"s_target: must lie in [0,1], got {self.s_target}")
        if self.window < 1:
            raise ValueError(f"window: must be a positive integer, got {self.window}")
        if not (0 <= self.t_min <= self.t0 <= self.t_max <= 1):
            raise ValueError(
                f"t_min/t0/t_max: need 0 <= t_min <= t0 <= t_max <= 1, "
                f"got {self.t_min}, {self.t0}, {self.t_max}"
            )


@dataclass
class ThresholdController:
    settings: ControllerSettings = field(default_factory=ControllerSettings)
    t: float = field(init=False)
    pending: list[bool] = field(default_factory=list)
    updates: int = 0

    def __post_init__(self) -> None:
        self.t = self.settings.t0

    @property
    def window_full(self) -> bool:
        return len(self.pending) >= self.settings.window

    def target_for(self, s: float) -> float:
        """Threshold the controller would set for window success rate ``s``."""
        if not (0 <= s <= 1):
            raise ValueError(f"success rate must lie in [0,1], got {s}")
        cfg = self.settings
        raw = cfg.t0 + cfg.sf * (s - cfg.s_target)
        return min(max(raw, cfg.t_min), cfg.t_max)

    def update_threshold(self, s: float) -> float:
        self.t = self.target_for(s)
        self.updates += 1
        return self.t

    def window_rate(self) -> float:
        return sum(self.pending) / self.settings.window

    def record_outcome(self, won: bool) -> bool:
        """Add one attempt; returns True when this closed a window and moved ``t``."""
        self.pending.append(bool(won))
        if not self.window_full:
            return False
        self.update_threshold(self.window_rate())
        self.pending.clear()
        return True
