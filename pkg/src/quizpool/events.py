"""Quiz events and their JSON Lines encoding."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, TextIO

KINDS = (
    "QuizCreated",
    "Registered",
    "ScoreSubmitted",
    "RewardPaid",
    "ThresholdUpdated",
    "QuizClosed",
)


class CorruptLog(ValueError):
    def __init__(self, message: str, seq: int | None = None):
        super().__init__(message)
        self.seq = seq


@dataclass(frozen=True)
class Event:
    """One state transition. Money in ``payload`` is integer micro-units."""

    seq: int
    kind: str
    payload: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise CorruptLog(f"unknown event kind {self.kind!r}", self.seq)

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> Event:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptLog(f"malformed event line: {exc}") from None
        if not isinstance(obj, dict) or set(obj) != {"seq", "kind", "payload"}:
            raise CorruptLog(f"event must have exactly seq, kind, payload: {line.strip()[:80]}")
        seq = obj["seq"]
        if isinstance(seq, bool) or not isinstance(seq, int):
            raise CorruptLog(f"seq must be an integer: {seq!r}")
        if not isinstance(obj["payload"], dict):
            raise CorruptLog("payload must be an object", seq)
        return cls(seq, obj["kind"], obj["payload"])


def write_jsonl(events: Iterable[Event], fh: TextIO) -> None:
    for ev in events:
        fh.write(ev.to_json())
        fh.write("\n")


def read_jsonl(fh: TextIO) -> Iterator[Event]:
    for line in fh:
        if line.strip():
            yield Event.from_json(line)


def dumps(events: Iterable[Event]) -> str:
    return "".join(ev.to_json() + "\n" for ev in events)


def loads(text: str) -> list[Event]:
    return [Event.from_json(line) for line in text.splitlines() if line.strip()]
