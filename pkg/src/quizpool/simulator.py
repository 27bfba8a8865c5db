"""Seeded Monte Carlo runs of the quiz engine.

Randomness comes from numpy's PCG64 bit generator, one stream per trial,
seeded with ``scenario.seed + trial_index`` (mod 2**64). PCG64 streams are
stable across platforms, so reports are reproducible byte for byte.
"""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_FLOOR, Context, Decimal
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .config import ConfigError, QuizConfig, parse_config, to_dict
from .engine import CapReachedError, Quiz, create_quiz
from .money import Money, Ratio
from .schedule import NoViableSchedule

SEED_MASK = 2**64 - 1


# --- populations -------------------------------------------------------------

@dataclass(frozen=True)
class FixedScore:
    value: float

    def __post_init__(self) -> None:
        if not (0 <= self.value <= 1):
            raise ConfigError("population.value", "must lie in [0,1]")

    def draw(self, rng: np.random.Generator, threshold: float) -> float:
        return self.value


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (0 <= self.lo <= self.hi <= 1):
            raise ConfigError("population.lo/hi", "need 0 <= lo <= hi <= 1")

    def draw(self, rng: np.random.Generator, threshold: float) -> float:
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal scores clipped into [0, 1]."""

    mean: float
    stddev: float

    def __post_init__(self) -> None:
        if self.stddev < 0:
            raise ConfigError("population.stddev", "must be non-negative")

    def draw(self, rng: np.random.Generator, threshold: float) -> float:
        return min(1.0, max(0.0, float(rng.normal(self.mean, self.stddev))))


@dataclass(frozen=True)
class Bernoulli:
    """Wins with probability ``p_win`` whatever the threshold.

    Scores land just above or below the current threshold, so the mechanism is
    exercised without depending on the shape of a score distribution.
    """

    p_win: float
    epsilon: float = 0.01

    def __post_init__(self) -> None:
        if not (0 <= self.p_win <= 1):
            raise ConfigError("population.p_win", "must lie in [0,1]")
        if not (0 < self.epsilon <= 0.5):
            raise ConfigError("population.epsilon", "must lie in (0,0.5]")

    def draw(self, rng: np.random.Generator, threshold: float) -> float:
        if rng.random() < self.p_win:
            return min(1.0, threshold + self.epsilon)
        return max(0.0, threshold - self.epsilon)


PopulationModel = FixedScore | Uniform | TruncatedNormal | Bernoulli

_POPULATIONS: dict[str, tuple[type, tuple[str, ...]]] = {
    "fixed": (FixedScore, ("value",)),
    "uniform": (Uniform, ("lo", "hi")),
    "truncated_normal": (TruncatedNormal, ("mean", "stddev")),
    "bernoulli": (Bernoulli, ("p_win", "epsilon")),
}


def parse_population(data: Mapping, path: str = "population") -> PopulationModel:
    if not isinstance(data, Mapping):
        raise ConfigError(path, "must be an object")
    kind = data.get("kind")
    if kind not in _POPULATIONS:
        raise ConfigError(f"{path}.kind", f"must be one of {', '.join(_POPULATIONS)}")
    cls, fields_ = _POPULATIONS[kind]
    extra = sorted(set(data) - {"kind", *fields_})
    if extra:
        raise ConfigError(f"{path}.{extra[0]}", "unknown field")
    kw = {}
    for name in fields_:
        if name not in data:
            continue
        v = data[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}.{name}", "must be a number")
        kw[name] = float(v)
    try:
        return cls(**kw)
    except TypeError as exc:
        raise ConfigError(path, f"missing parameter ({exc})") from None


def population_to_dict(pop: PopulationModel) -> dict:
    for kind, (cls, fields_) in _POPULATIONS.items():
        if type(pop) is cls:
            return {"kind": kind, **{f: getattr(pop, f) for f in fields_}}
    raise TypeError(f"unknown population {pop!r}")


# --- scenario and reports ------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    config: QuizConfig
    population: PopulationModel
    num_players: int
    seed: int = 0
    trials: int = 1

    def __post_init__(self) -> None:
        if isinstance(self.num_players, bool) or not isinstance(self.num_players, int) or self.num_players < 1:
            raise ConfigError("simulation.num_players", "must be a positive integer")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("simulation.trials", "must be a positive integer")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not (0 <= self.seed <= SEED_MASK):
            raise ConfigError("simulation.seed", "must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "config": to_dict(self.config),
            "population": population_to_dict(self.population),
            "simulation": {"num_players": self.num_players, "seed": self.seed, "trials": self.trials},
        }


@dataclass(frozen=True)
class SimReport:
    seed: int
    registrations: int
    winners: int
    capacity: int
    total_payout: Money
    profit: Money
    final_pool: Money
    min_pool: Money
    closure_reason: str  # FloorReached, PoolExhausted, CapReached or PlayersExhausted
    threshold_trajectory: tuple[tuple[int, float], ...]

    @property
    def success_rate(self) -> float:
        return self.winners / self.registrations if self.registrations else 0.0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "registrations": self.registrations,
            "winners": self.winners,
            "capacity": self.capacity,
            "total_payout": self.total_payout.to_json(),
            "profit": self.profit.to_json(),
            "final_pool": self.final_pool.to_json(),
            "min_pool": self.min_pool.to_json(),
            "closure_reason": self.closure_reason,
            "threshold_trajectory": [list(p) for p in self.threshold_trajectory],
        }


def simulate_quiz(scenario: Scenario, seed: int | None = None) -> tuple[Quiz, SimReport]:
    """One run; returns the final quiz (with its event log) and the report."""
    seed = scenario.seed if seed is None else seed
    rng = np.random.Generator(np.random.PCG64(seed))
    quiz = create_quiz(scenario.config)
    trajectory = [(quiz.seq, quiz.threshold)]
    min_pool = quiz.pool
    reason = "PlayersExhausted"
    for i in range(scenario.num_players):
        pid = f"p{i + 1}"
        try:
            quiz.register(pid)
        except CapReachedError:
            reason = "CapReached"
            break
        t_before = quiz.controller.updates
        quiz.submit_score(pid, scenario.population.draw(rng, quiz.threshold))
        if quiz.controller.updates != t_before:
            seq = next(e.seq for e in reversed(quiz.events) if e.kind == "ThresholdUpdated")
            trajectory.append((seq, quiz.threshold))
        min_pool = min(min_pool, quiz.pool)
        if not quiz.is_open():
            reason = quiz.close_reason.value
            break
    report = SimReport(
        seed=seed,
        registrations=quiz.registration_count,
        winners=quiz.winners,
        capacity=quiz.schedule.capacity,
        total_payout=quiz.ledger.payouts,
        profit=quiz.profit(),
        final_pool=quiz.pool,
        min_pool=min_pool,
        closure_reason=reason,
        threshold_trajectory=tuple(trajectory),
    )
    return quiz, report


def run_simulation(scenario: Scenario, seed: int | None = None) -> SimReport:
    return simulate_quiz(scenario, seed)[1]


# --- trials --------------------------------------------------------------------

@dataclass(frozen=True)
class Stats:
    mean: float
    std: float
    min: float
    max: float

    @classmethod
    def of(cls, values: Sequence[float]) -> Stats:
        return cls(statistics.fmean(values), statistics.pstdev(values), min(values), max(values))


@dataclass(frozen=True)
class TrialSummary:
    seeds: tuple[int, ...]
    reports: tuple[SimReport, ...]
    winners: Stats
    registrations: Stats
    total_payout: Stats  # micro-units
    profit: Stats  # micro-units

    def to_dict(self) -> dict:
        def st(s: Stats) -> dict:
            return {"mean": s.mean, "std": s.std, "min": s.min, "max": s.max}

        return {
            "trials": len(self.reports),
            "seeds": list(self.seeds),
            "winners": st(self.winners),
            "registrations": st(self.registrations),
            "total_payout_micros": st(self.total_payout),
            "profit_micros": st(self.profit),
        }


def trial_seeds(scenario: Scenario) -> list[int]:
    return [(scenario.seed + i) & SEED_MASK for i in range(scenario.trials)]


def summarize(reports: Sequence[SimReport]) -> TrialSummary:
    return TrialSummary(
        seeds=tuple(r.seed for r in reports),
        reports=tuple(reports),
        winners=Stats.of([r.winners for r in reports]),
        registrations=Stats.of([r.registrations for r in reports]),
        total_payout=Stats.of([r.total_payout.micros for r in reports]),
        profit=Stats.of([r.profit.micros for r in reports]),
    )


def run_trials(scenario: Scenario, workers: int = 1) -> TrialSummary:
    """Run ``scenario.trials`` independent runs; results are ordered by trial index."""
    seeds = trial_seeds(scenario)
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_simulation, [scenario] * len(seeds), seeds))
    else:
        reports = [run_simulation(scenario, s) for s in seeds]
    return summarize(reports)


# --- brute-force capacity ---------------------------------------------------

_ORACLE_CTX = Context(prec=60)


def empirical_max_winners(pool: Money, x: Ratio | float | str, floor: Money) -> int:
    """Pay rewards one by one while each (rounded) exceeds ``floor`` and the pool covers it.

    Term-by-term enumeration with a running product; shares no code with the
    closed-form solver it is used to check.
    """
    if floor.micros <= 0:
        raise ValueError("floor must be positive")
    xv = x.value if isinstance(x, Ratio) else Decimal(str(x))
    term = _ORACLE_CTX.multiply(Decimal(pool.micros), 1 - xv)
    term = term.to_integral_value(rounding=ROUND_FLOOR)  # first reward, whole micros
    left = pool.micros
    count = 0
    while True:
        paid = int(term.to_integral_value(rounding=ROUND_FLOOR))
        if paid <= floor.micros or paid > left:
            return count
        left -= paid
        count += 1
        term = _ORACLE_CTX.multiply(term, xv)


# --- sweeps ----------------------------------------------------------------

_CONTROLLER_PARAMS = {"t0", "sf", "s_target", "window", "t_min", "t_max"}
_SIM_PARAMS = {"num_players", "seed", "trials"}


@dataclass(frozen=True)
class SweepRow:
    params: dict[str, Any]
    capacity: int | None = None
    summary: TrialSummary | None = None
    error: str | None = None


def apply_overrides(scenario: Scenario, params: Mapping[str, Any]) -> Scenario:
    cfg = to_dict(scenario.config)
    pop = population_to_dict(scenario.population)
    sim = {"num_players": scenario.num_players, "seed": scenario.seed, "trials": scenario.trials}
    for name, value in params.items():
        if name in _CONTROLLER_PARAMS:
            cfg["controller"][name] = int(value) if name == "window" else float(value)
        elif name in _SIM_PARAMS:
            sim[name] = int(value)
        elif name in cfg:
            cfg[name] = value if isinstance(value, str) else str(value)
        elif name in pop and name != "kind":
            pop[name] = float(value)
        else:
            raise ConfigError(name, "not a sweepable parameter")
    return Scenario(parse_config(cfg), parse_population(pop), **sim)


def sweep(scenario: Scenario, grid: Iterable[Mapping[str, Any]], workers: int = 1) -> list[SweepRow]:
    """One row per grid point, in grid order; bad points give an error row."""
    rows = []
    for params in grid:
        params = dict(params)
        try:
            sc = apply_overrides(scenario, params)
            summary = run_trials(sc, workers)
        except (ConfigError, NoViableSchedule) as exc:
            rows.append(SweepRow(params, error=str(exc)))
            continue
        rows.append(SweepRow(params, summary.reports[0].capacity, summary))
    return rows


def grid_product(axes: Mapping[str, Sequence[Any]]) -> list[dict[str, Any]]:
    """Cartesian product of parameter axes; the first axis varies slowest."""
    points: list[dict[str, Any]] = [{}]
    for name, values in axes.items():
        points = [{**p, name: v} for p in points for v in values]
    return points


def default_scenario(num_players: int, seed: int = 0, trials: int = 1) -> Scenario:
    """The stock self-correcting quiz: ipp 100, fee 1, cp 0.75, ratio 0.9695."""
    config = QuizConfig(
        ipp=Money.of("100"), fee=Money.of("1"), cp=Decimal("0.75"),
        ratio=Ratio.of("0.9695"), case="case3",
    )
    return Scenario(config, DEFAULT_POPULATION, num_players, seed, trials)


DEFAULT_POPULATION: PopulationModel = Uniform(0.0, 0.875)  # P(score > 0.70) = 0.2 at t0
