"""Command line: ``quizpool {schedule,optimize,simulate,sweep,replay}``.

Exit codes: 0 success, 1 runtime failure (no viable schedule, corrupt log),
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Sequence

from .config import Case, ConfigError, QuizConfig, build_schedule
from .engine import InvalidTransition, replay
from .events import CorruptLog, read_jsonl, write_jsonl
from .money import Money, Ratio
from .scenario import ScenarioError, canonical_json, parse_scenario, report_header
from .schedule import NoViableSchedule, optimal_ratio
from .simulator import SEED_MASK, simulate_quiz, summarize, sweep, grid_product, trial_seeds


class UsageError(Exception):
    pass


def _money(text: str) -> Money:
    try:
        m = Money.of(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an amount: {text!r}") from None
    if m.micros < 0:
        raise argparse.ArgumentTypeError("amount must be non-negative")
    return m


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not (0 <= v <= SEED_MASK):
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _config(args: argparse.Namespace, ratio: str = "0.5") -> QuizConfig:
    case = Case(args.case)
    cp = args.cp if args.cp is not None else ("1" if case is Case.CASE1 else "0.75")
    try:
        cp = Decimal(cp)
    except InvalidOperation:
        raise ConfigError("cp", f"not a number: {args.cp!r}") from None
    return QuizConfig(
        ipp=args.pool, fee=args.fee, cp=cp,
        ratio=Ratio.of(getattr(args, "ratio", None) or ratio), case=case,
    )


def _emit(obj: Any, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands ---------------------------------------------------------------

def cmd_schedule(args: argparse.Namespace) -> int:
    config = _config(args)
    schedule = build_schedule(config)
    rewards = schedule.rewards()
    total = schedule.total()
    if args.json:
        _emit({
            "case": config.case.value,
            "pool": config.ipp.to_json(),
            "fee": config.fee.to_json(),
            "ratio": str(config.ratio),
            "floor": schedule.floor.to_json(),
            "first_term": schedule.first_term.to_json(),
            "capacity": schedule.capacity,
            "sum": total.to_json(),
            "rewards": [{"k": k, **r.to_json()} for k, r in enumerate(rewards, 1)],
        }, None)
        return 0
    print(f"{'k':>5}  {'reward':>14}")
    for k, r in enumerate(rewards, 1):
        print(f"{k:>5}  {str(r):>14}")
    print(f"capacity: {schedule.capacity}")
    print(f"sum:      {total}")
    print(f"floor:    {schedule.floor}")
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    config = _config(args)
    result = optimal_ratio(config.ipp, config.floor, args.grid_step)
    plateau = result.plateau
    out = {
        "case": config.case.value,
        "floor": config.floor.to_json(),
        "grid_step": args.grid_step,
        "ratio": str(result.ratio),
        "capacity": result.capacity,
        "plateau": {"lo": str(plateau[0]), "hi": str(plateau[-1]), "points": len(plateau)},
    }
    if args.json:
        _emit(out, None)
    else:
        print(f"x* = {result.ratio}  n* = {result.capacity}")
        print(f"plateau: {plateau[0]} .. {plateau[-1]} ({len(plateau)} grid points)")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = parse_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if args.trials is not None:
        scenario = replace(scenario, trials=args.trials)
    reports = []
    for i, seed in enumerate(trial_seeds(scenario)):
        quiz, report = simulate_quiz(scenario, seed)
        if i == 0 and args.events:
            with open(args.events, "w") as fh:
                write_jsonl(quiz.events, fh)
        reports.append(report)
    summary = summarize(reports)
    doc = report_header(scenario, scenario.seed)
    doc["reports"] = [r.to_dict() for r in reports]
    doc["summary"] = summary.to_dict()
    _emit(doc, args.out)
    return 0


def _param_values(spec: str) -> tuple[str, list[Any]]:
    name, sep, rng = spec.partition("=")
    if not sep or not name:
        raise UsageError(f"--param expects NAME=LO:HI:STEP or NAME=V1,V2, got {spec!r}")
    try:
        if ":" in rng:
            lo, hi, step = (Decimal(p) for p in rng.split(":"))
            if step <= 0 or hi < lo:
                raise UsageError(f"--param {name}: need step > 0 and hi >= lo")
            values, v = [], lo
            while v <= hi:
                values.append(v)
                v += step
            return name, values
        out: list[Any] = []
        for part in rng.split(","):
            try:
                out.append(Decimal(part))
            except InvalidOperation:
                out.append(part)
        return name, out
    except (InvalidOperation, ValueError):
        raise UsageError(f"--param {name}: bad range {rng!r}") from None


_STAT_FIELDS = (("winners", "winners"), ("registrations", "registrations"), ("profit", "profit_micros"))


def cmd_sweep(args: argparse.Namespace) -> int:
    scenario = parse_scenario(args.scenario)
    axes = dict(_param_values(p) for p in args.param)
    rows = sweep(scenario, grid_product(axes), workers=args.workers)
    header = list(axes) + ["capacity"]
    for _, label in _STAT_FIELDS:
        header += [f"{label}_{s}" for s in ("mean", "std", "min", "max")]
    header += ["profit_mean", "error"]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            line = [str(row.params[k]) for k in axes]
            if row.summary is None:
                line += [""] * (len(header) - len(line) - 1) + [row.error]
            else:
                line.append(row.capacity)
                for attr, _ in _STAT_FIELDS:
                    st = getattr(row.summary, attr)
                    line += [repr(st.mean), repr(st.std), repr(st.min), repr(st.max)]
                line += [str(Money(round(row.summary.profit.mean))), ""]
            w.writerow(line)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    with open(args.log) as fh:
        quiz = replay(read_jsonl(fh))
    snap = quiz.snapshot()
    out = {
        "events": quiz.seq,
        "status": snap["status"],
        "close_reason": snap["close_reason"],
        "pool": quiz.pool.to_json(),
        "winners": quiz.winners,
        "registrations": quiz.registration_count,
        "threshold": quiz.threshold,
        "ledger": {k: Money(v).to_json() for k, v in snap["ledger"].items()},
        "profit": quiz.profit().to_json(),
    }
    print(canonical_json(out) if args.compact else json.dumps(out, indent=2, sort_keys=True))
    return 0


# --- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quizpool", description="Quiz prize-pool reward mechanism tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def mechanism_args(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--pool", type=_money, default=Money.of("100"), help="initial prize pool")
        sp.add_argument("--fee", type=_money, default=Money.of("1"), help="registration fee")
        sp.add_argument("--case", choices=[c.value for c in Case], default="case1")
        sp.add_argument("--cp", default=None, help="fraction of the fee kept by the house")
        sp.add_argument("--json", action="store_true")

    sp = sub.add_parser("schedule", help="print the reward schedule")
    mechanism_args(sp)
    sp.add_argument("--ratio", default="0.9695")
    sp.set_defaults(func=cmd_schedule)

    sp = sub.add_parser("optimize", help="grid-search the ratio with the most winners")
    mechanism_args(sp)
    sp.add_argument("--grid-step", default="0.0001")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("simulate", help="run a scenario and write a JSON report")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--seed", type=_seed, default=None)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--events", default=None, help="write the first trial's event log (JSON Lines)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="run a scenario over a parameter grid, CSV out")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--param", action="append", required=True, metavar="NAME=LO:HI:STEP")
    sp.add_argument("--out", default=None)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("replay", help="rebuild a quiz from its JSON Lines event log")
    sp.add_argument("log")
    sp.add_argument("--compact", action="store_true")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except (ScenarioError, ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoViableSchedule as exc:
        print(f"error: no viable schedule: {exc}", file=sys.stderr)
        return 1
    except (CorruptLog, InvalidTransition) as exc:
        msg = str(exc)
        if not msg.startswith("CorruptLog"):
            msg = f"{type(exc).__name__}: {msg}"
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
