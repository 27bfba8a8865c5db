"""Single-quiz state machine.

Every mutation goes through :meth:`Quiz.apply`, which takes an :class:`Event`
and checks it against the current state. Commands (``register``,
``submit_score``) decide which events happen and then apply them, so a quiz
rebuilt with :func:`replay` from its log is identical to the original.

Money flows: the house funds ``ipp`` up front and takes back whatever is left
in the pool at the end, so profit is fees - payouts - user costs - hosting.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, fields
from typing import Iterable

from .config import QuizConfig, build_schedule, parse_config, to_dict
from .events import CorruptLog, Event
from .money import Money
from .schedule import RewardSchedule
from .threshold import ThresholdController


class QuizError(Exception):
    pass


class QuizClosedError(QuizError):
    pass


class CapReachedError(QuizError):
    pass


class NotRegisteredError(QuizError):
    pass


class InvalidTransition(QuizError):
    def __init__(self, message: str, seq: int | None = None):
        super().__init__(f"seq {seq}: {message}" if seq is not None else message)
        self.seq = seq


class Status(str, enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


class CloseReason(str, enum.Enum):
    FLOOR_REACHED = "FloorReached"  # next reward would not exceed the floor
    POOL_EXHAUSTED = "PoolExhausted"  # pool cannot cover the next reward


@dataclass
class Ledger:
    fees_collected: Money = Money(0)
    house_retained: Money = Money(0)
    injected_to_pool: Money = Money(0)
    payouts: Money = Money(0)
    user_costs: Money = Money(0)
    hosting_cost: Money = Money(0)

    def as_micros(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name).micros for f in fields(self)}

    def profit(self) -> Money:
        return self.fees_collected - self.payouts - self.user_costs - self.hosting_cost


@dataclass(frozen=True)
class Outcome:
    won: bool
    reward: Money | None = None
    winner_index: int | None = None


class Quiz:
    """Live state of one quiz (pool balance, winner index, threshold, ledger)."""

    def __init__(self) -> None:
        self.config: QuizConfig | None = None
        self.schedule: RewardSchedule | None = None
        self.pool = Money(0)
        self.next_winner_index = 1
        self.controller: ThresholdController | None = None
        self.status = Status.OPEN
        self.close_reason: CloseReason | None = None
        self.registration_count = 0
        self.ledger = Ledger()
        self.events: list[Event] = []
        self._unsubmitted: Counter[str] = Counter()
        self._owed: str | None = None  # winner awaiting their RewardPaid

    # -- queries -----------------------------------------------------------

    @property
    def threshold(self) -> float:
        return self.controller.t

    @property
    def winners(self) -> int:
        return self.next_winner_index - 1

    @property
    def seq(self) -> int:
        return len(self.events)

    def next_reward(self) -> Money:
        return self.schedule.reward(self.next_winner_index)

    def is_open(self) -> bool:
        return self.status is Status.OPEN

    def profit(self) -> Money:
        return self.ledger.profit()

    def snapshot(self) -> dict:
        """Everything that defines the state, as plain comparable data."""
        ctl = self.controller
        return {
            "config": to_dict(self.config) if self.config else None,
            "pool": self.pool.micros,
            "next_winner_index": self.next_winner_index,
            "threshold": ctl.t if ctl else None,
            "pending_outcomes": list(ctl.pending) if ctl else None,
            "threshold_updates": ctl.updates if ctl else None,
            "status": self.status.value,
            "close_reason": self.close_reason.value if self.close_reason else None,
            "registration_count": self.registration_count,
            "ledger": self.ledger.as_micros(),
            "unsubmitted": dict(sorted(self._unsubmitted.items())),
            "seq": self.seq,
        }

    # -- commands ----------------------------------------------------------

    def _emit(self, kind: str, **payload) -> Event:
        ev = Event(self.seq + 1, kind, payload)
        self.apply(ev)
        return ev

    def register(self, player_id: str) -> None:
        self._require_open()
        cap = self.config.registration_cap
        if cap is not None and self.registration_count >= cap:
            raise CapReachedError(f"registration cap {cap} reached")
        self._emit("Registered", player_id=player_id)

    def submit_score(self, player_id: str, score: float) -> Outcome:
        self._require_open()
        if self._unsubmitted[player_id] <= 0:
            raise NotRegisteredError(f"player {player_id!r} has no unused registration")
        if not (0.0 <= score <= 1.0):
            raise ValueError(f"score must lie in [0,1], got {score}")
        won = score > self.threshold
        self._emit("ScoreSubmitted", player_id=player_id, score=score)
        outcome = Outcome(False)
        if won:
            index = self.next_winner_index
            amount = self.next_reward()
            self._emit("RewardPaid", player_id=player_id, amount=amount.micros, winner_index=index)
            outcome = Outcome(True, amount, index)
        ctl = self.controller
        if self.config.adaptive and ctl.window_full:
            self._emit("ThresholdUpdated", t=ctl.target_for(ctl.window_rate()))
        reason = self._closure_due()
        if reason is not None:
            self._emit("QuizClosed", reason=reason.value)
        return outcome

    def _require_open(self) -> None:
        if self.config is None:
            raise QuizError("quiz not created")
        if self.status is Status.CLOSED:
            raise QuizClosedError(f"quiz closed ({self.close_reason.value})")

    def _closure_due(self) -> CloseReason | None:
        nxt = self.next_reward()
        if nxt <= self.schedule.floor:
            return CloseReason.FLOOR_REACHED
        if self.pool < nxt:
            return CloseReason.POOL_EXHAUSTED
        return None

    # -- event application -------------------------------------------------

    def apply(self, ev: Event) -> None:
        expected = self.seq + 1
        if ev.seq != expected:
            if ev.seq > expected:
                raise CorruptLog(f"CorruptLog: missing seq {expected}", expected)
            raise CorruptLog(f"CorruptLog: seq {ev.seq} out of order (expected {expected})", ev.seq)
        if self.config is None and ev.kind != "QuizCreated":
            raise InvalidTransition("log must start with QuizCreated", ev.seq)
        if self._owed is not None and ev.kind != "RewardPaid":
            raise InvalidTransition(f"{ev.kind} while a reward is owed to {self._owed!r}", ev.seq)
        handler = getattr(self, f"_on_{ev.kind}")
        try:
            handler(ev.payload)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, CorruptLog):
                raise
            raise InvalidTransition(f"bad {ev.kind} payload: {exc}", ev.seq) from None
        except QuizError as exc:
            raise InvalidTransition(f"{ev.kind}: {exc}", ev.seq) from None
        self.events.append(ev)

    def _on_QuizCreated(self, p: dict) -> None:
        if self.config is not None:
            raise QuizError("quiz already created")
        config = parse_config(p["config"])
        schedule = build_schedule(config)
        self.config = config
        self.schedule = schedule
        self.pool = config.ipp
        self.controller = ThresholdController(config.controller)
        self.ledger.hosting_cost = config.hosting_cost

    def _on_Registered(self, p: dict) -> None:
        self._require_open()
        cap = self.config.registration_cap
        if cap is not None and self.registration_count >= cap:
            raise CapReachedError(f"registration cap {cap} reached")
        cfg = self.config
        inject = cfg.injection
        led = self.ledger
        led.fees_collected += cfg.fee
        led.injected_to_pool += inject
        led.house_retained += cfg.fee - inject
        led.user_costs += cfg.user_cost
        self.pool += inject
        self.registration_count += 1
        self._unsubmitted[str(p["player_id"])] += 1

    def _on_ScoreSubmitted(self, p: dict) -> None:
        self._require_open()
        pid = str(p["player_id"])
        score = p["score"]
        if isinstance(score, bool) or not isinstance(score, (int, float)) or not (0 <= score <= 1):
            raise ValueError(f"score must lie in [0,1], got {score!r}")
        if self._unsubmitted[pid] <= 0:
            raise NotRegisteredError(f"player {pid!r} has no unused registration")
        if self.config.adaptive and self.controller.window_full:
            raise QuizError("threshold update pending")
        self._unsubmitted[pid] -= 1
        if self._unsubmitted[pid] == 0:
            del self._unsubmitted[pid]
        won = score > self.threshold
        if self.config.adaptive:
            self.controller.pending.append(won)
        if won:
            self._owed = pid

    def _on_RewardPaid(self, p: dict) -> None:
        self._require_open()
        pid = str(p["player_id"])
        if self._owed != pid:
            raise QuizError(f"no reward owed to {pid!r}")
        index, amount = p["winner_index"], Money(p["amount"])
        if index != self.next_winner_index:
            raise QuizError(f"winner_index {index}, expected {self.next_winner_index}")
        due = self.next_reward()
        if amount != due:
            raise QuizError(f"amount {amount}, schedule pays {due}")
        if amount <= self.schedule.floor or amount > self.pool:
            raise QuizError(f"reward {amount} not payable (floor {self.schedule.floor}, pool {self.pool})")
        self.pool -= amount
        self.ledger.payouts += amount
        self.next_winner_index += 1
        self._owed = None

    def _on_ThresholdUpdated(self, p: dict) -> None:
        self._require_open()
        ctl = self.controller
        if not (self.config.adaptive and ctl.window_full):
            raise QuizError("no completed outcome window")
        t = ctl.target_for(ctl.window_rate())
        if p["t"] != t:
            raise QuizError(f"threshold {p['t']!r}, controller gives {t!r}")
        ctl.update_threshold(ctl.window_rate())
        ctl.pending.clear()

    def _on_QuizClosed(self, p: dict) -> None:
        self._require_open()
        reason = CloseReason(p["reason"])
        if self._closure_due() is not reason:
            raise QuizError(f"closure reason {reason.value} does not hold")
        self.status = Status.CLOSED
        self.close_reason = reason


def create_quiz(config: QuizConfig) -> Quiz:
    build_schedule(config)  # raise NoViableSchedule here rather than as a bad transition
    quiz = Quiz()
    quiz._emit("QuizCreated", config=to_dict(config))
    return quiz


def quiz_open(quiz: Quiz) -> bool:
    return quiz.is_open()


def profit(quiz: Quiz) -> Money:
    return quiz.profit()


def replay(events: Iterable[Event]) -> Quiz:
    quiz = Quiz()
    for ev in events:
        quiz.apply(ev)
    if quiz.config is None:
        raise CorruptLog("CorruptLog: empty log", 1)
    if quiz._owed is not None:
        raise CorruptLog(f"CorruptLog: missing seq {quiz.seq + 1} (RewardPaid)", quiz.seq + 1)
    return quiz
