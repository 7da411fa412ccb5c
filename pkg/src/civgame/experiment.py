"""Simulation loop, metric binning, and multi-trial aggregation.

A "step" is one turn: a single player's move, or one vote move in the
sovereign variant. Rewards are integer points throughout so that the sum
paid out by the environment can be compared exactly against the binned
collective score.
"""

from __future__ import annotations

import csv
import hashlib
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .agents import (
    AgentKind,
    AgentMode,
    Hyperparams,
    QTable,
    epsilon_at,
    ola_broadcast,
    q_update,
    select_action,
)
from .game import (
    Action,
    GameState,
    RewardConfig,
    encode_state,
    initial_state,
    is_invasion,
    legal_actions,
    reward,
    transition,
)
from .sovereign import (
    VotePhase,
    consume_flag,
    sovereign_legal_actions,
    sovereign_transition,
    sovereign_reward,
)

NUM_ACTIONS = len(Action)


class Variant(Enum):
    BASE = "base"
    SOVEREIGN = "sovereign"


@dataclass(frozen=True)
class RunConfig:
    size: int = 4
    players: int = 4
    total_steps: int = 250_000
    bin_size: int = 2_500
    trials: int = 3
    agent_kinds: tuple[AgentKind, ...] = (AgentKind.HQLEARNER,) * 4
    rewards: RewardConfig = field(default_factory=RewardConfig)
    hp: Hyperparams = field(default_factory=Hyperparams)
    seed: int = 1
    variant: Variant = Variant.SOVEREIGN
    workers: int = 1

    def __post_init__(self) -> None:
        if self.total_steps % self.bin_size != 0:
            raise ValueError("bin_size must divide total_steps")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.agent_kinds) != self.players:
            raise ValueError(
                f"need {self.players} agent kinds, got {len(self.agent_kinds)}"
            )
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True, slots=True)
class MoveRecord:
    """One ordinary turn; invaded_sample >= 0 marks a CI sampling point."""

    step: int
    player: int
    key: bytes
    action: Action
    reward: int
    invasion: bool
    invaded_sample: int = -1


@dataclass(frozen=True, slots=True)
class VoteRecord:
    """One vote move: every player casts a ballot and is paid at once."""

    step: int
    key: bytes
    ballots: tuple[Action, ...]
    rewards: tuple[int, ...]
    success: bool
    invaded_sample: int


@dataclass
class MetricsBin:
    bin_start: int
    bin_size: int
    players: int
    cs_sum: int = 0
    invasions: int = 0
    successful_defers: int = 0
    action_counts: list[list[int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.action_counts:
            self.action_counts = [[0] * NUM_ACTIONS for _ in range(self.players)]

    @property
    def cs_avg(self) -> float:
        return self.cs_sum / self.bin_size

    def fold(self, record: MoveRecord | VoteRecord) -> None:
        if isinstance(record, MoveRecord):
            self.cs_sum += record.reward
            self.action_counts[record.player][record.action] += 1
            if record.invaded_sample >= 0:
                self.invasions += record.invaded_sample
        else:
            self.cs_sum += sum(record.rewards)
            self.invasions += record.invaded_sample
            self.successful_defers += record.success
            for player, ballot in enumerate(record.ballots):
                self.action_counts[player][ballot] += 1


def bin_metrics(
    records: Sequence[MoveRecord | VoteRecord],
    players: int,
    bin_size: int,
    bin_start: int = 0,
) -> MetricsBin:
    """Fold one bin's worth of trace records into a MetricsBin."""
    if len(records) != bin_size:
        raise ValueError(f"expected {bin_size} records, got {len(records)}")
    b = MetricsBin(bin_start=bin_start, bin_size=bin_size, players=players)
    for record in records:
        b.fold(record)
    return b


def action_breakdown(
    records: Sequence[MoveRecord | VoteRecord], player: int, bin_size: int
) -> list[list[int]]:
    """Per-bin counts of the six actions taken by one player."""
    bins: list[list[int]] = []
    for start in range(0, len(records), bin_size):
        counts = [0] * NUM_ACTIONS
        for record in records[start : start + bin_size]:
            if isinstance(record, MoveRecord):
                if record.player == player:
                    counts[record.action] += 1
            else:
                counts[record.ballots[player]] += 1
        bins.append(counts)
    return bins


@dataclass
class AgentSetup:
    """Per-seat runner wiring; `table=None` with a learning kind means fresh."""

    mode: AgentMode
    table: QTable | None = None
    learn: bool = True
    fixed_eps: float | None = None

    @classmethod
    def for_kind(cls, kind: AgentKind) -> "AgentSetup":
        return cls(mode=AgentMode.for_kind(kind))


@dataclass
class RunResult:
    bins: list[MetricsBin]
    total_reward: int
    rewards_per_player: list[int]
    moves_per_player: list[int]
    invasions_per_player: list[int]
    final_eps: float
    tables: list[QTable | None] | None = None
    trace: list[MoveRecord | VoteRecord] | None = None


def stream_seed(trial_seed: int, label: str) -> int:
    """Stable per-stream seed, independent of platform hash randomization."""
    digest = hashlib.sha256(f"{trial_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def agent_rng(trial_seed: int, player: int) -> random.Random:
    return random.Random(stream_seed(trial_seed, f"agent:{player}"))


def run_game(
    cfg: RunConfig,
    trial_seed: int,
    setups: Sequence[AgentSetup] | None = None,
    keep_trace: bool = False,
    keep_tables: bool = False,
) -> RunResult:
    """Play total_steps turns and fold metrics into bins.

    Each step: the mover (or every voter) picks an action epsilon-greedily
    from its own table, the environment transitions, and Q-updates plus
    broadcasts are applied according to each seat's mode.
    """
    p, hp, rc = cfg.players, cfg.hp, cfg.rewards
    sovereign = cfg.variant is Variant.SOVEREIGN
    if setups is None:
        setups = [AgentSetup.for_kind(k) for k in cfg.agent_kinds]

    rngs = [agent_rng(trial_seed, i) for i in range(p)]
    tables: list[QTable | None] = []
    for i, setup in enumerate(setups):
        if setup.table is not None:
            table = setup.table
            table.rng = rngs[i]
        elif setup.mode.learns:
            table = QTable(rngs[i])
        else:
            table = None
        tables.append(table)

    recv_tables = [
        tables[i] if setups[i].mode.ola and setups[i].learn else None
        for i in range(p)
    ]
    any_receiver = any(t is not None for t in recv_tables)

    state = initial_state(cfg.size, cfg.players)
    phase = VotePhase.open()
    key = encode_state(state)

    num_bins = cfg.total_steps // cfg.bin_size
    bins = [
        MetricsBin(bin_start=k * cfg.bin_size, bin_size=cfg.bin_size, players=p)
        for k in range(num_bins)
    ]
    trace: list[MoveRecord | VoteRecord] | None = [] if keep_trace else None
    total_reward = 0
    rewards_per_player = [0] * p
    moves_per_player = [0] * p
    invasions_per_player = [0] * p

    def choose(i: int, legal: list[Action], t: int) -> Action:
        setup = setups[i]
        rng = rngs[i]
        if setup.mode.kind is AgentKind.RANDOM:
            return legal[rng.randrange(len(legal))]
        eps = setup.fixed_eps
        if eps is None:
            eps = epsilon_at(t, hp)
        return select_action(tables[i], key, legal, eps, rng)

    for t in range(cfg.total_steps):
        b = bins[t // cfg.bin_size]
        if sovereign and state.move == p:
            ci = sum(state.invaded)
            ballots = tuple(
                choose(i, legal_actions(state, i) + [Action.DEFER], t)
                for i in range(p)
            )
            voted, phase = sovereign_transition(state, ballots, phase)
            success = voted.flag == 1
            payouts = tuple(sovereign_reward(voted, ballots[i], rc) for i in range(p))
            state = consume_flag(voted)
            next_key = encode_state(state)
            legal_next = sovereign_legal_actions(state, state.move, phase)
            for i in range(p):
                setup = setups[i]
                # vote payouts cause a Q-update only for sovereign-aware
                # learners: on success everyone updates as if it had
                # deferred, on failure only the duped defer voters learn
                # the penalty
                if setup.learn and setup.mode.sovereign_update:
                    if success or ballots[i] == Action.DEFER:
                        q_update(
                            tables[i], key, Action.DEFER, payouts[i],
                            next_key, legal_next, hp,
                        )
            paid = sum(payouts)
            total_reward += paid
            b.cs_sum += paid
            b.invasions += ci
            b.successful_defers += success
            for i in range(p):
                b.action_counts[i][ballots[i]] += 1
                rewards_per_player[i] += payouts[i]
                moves_per_player[i] += 1
            if trace is not None:
                trace.append(
                    VoteRecord(t, key, ballots, payouts, success, ci)
                )
            key = next_key
            continue

        i = state.move
        ci = sum(state.invaded) if not sovereign and i == 0 else -1
        if sovereign:
            legal = sovereign_legal_actions(state, i, phase)
        else:
            legal = legal_actions(state, i)
        action = choose(i, legal, t)
        r = reward(state, action, rc)
        invasion = is_invasion(state, action)
        pre_state = state
        if sovereign:
            state, phase = sovereign_transition(state, action, phase)
        else:
            state = transition(state, action)
        next_key = encode_state(state)

        setup = setups[i]
        if setup.learn and setup.mode.learns:
            if not sovereign:
                legal_next = legal_actions(state, state.move)
            elif state.move == p:
                # next turn is the vote; the max ranges over the updating
                # agent's own ballot options there
                legal_next = legal_actions(state, i) + [Action.DEFER]
            else:
                legal_next = sovereign_legal_actions(state, state.move, phase)
            delta = q_update(tables[i], key, action, r, next_key, legal_next, hp)
            if setup.mode.ola and any_receiver:
                ola_broadcast(recv_tables, pre_state, action, delta, i, hp)

        total_reward += r
        rewards_per_player[i] += r
        moves_per_player[i] += 1
        invasions_per_player[i] += invasion
        b.cs_sum += r
        b.action_counts[i][action] += 1
        if ci >= 0:
            b.invasions += ci
        if trace is not None:
            trace.append(MoveRecord(t, i, key, action, r, invasion, ci))
        key = next_key

    return RunResult(
        bins=bins,
        total_reward=total_reward,
        rewards_per_player=rewards_per_player,
        moves_per_player=moves_per_player,
        invasions_per_player=invasions_per_player,
        final_eps=epsilon_at(cfg.total_steps, hp),
        tables=tables if keep_tables else None,
        trace=trace,
    )


AGGREGATED_METRICS = ("cs_sum", "cs_avg", "invasions", "successful_defers")


@dataclass
class TrialSummary:
    """Per-trial bin series plus per-bin median/min/max across trials."""

    config: RunConfig
    trials: list[list[MetricsBin]]
    aggregates: dict[str, list[tuple[float, float, float]]] = field(
        default_factory=dict
    )

    def __post_init__(self) -> None:
        starts = {tuple(b.bin_start for b in series) for series in self.trials}
        if len(starts) != 1:
            raise ValueError("trials disagree on bin boundaries")
        if not self.aggregates:
            for name in AGGREGATED_METRICS:
                per_bin = []
                for k in range(len(self.trials[0])):
                    values = [getattr(series[k], name) for series in self.trials]
                    per_bin.append(
                        (statistics.median(values), min(values), max(values))
                    )
                self.aggregates[name] = per_bin

    @property
    def bin_starts(self) -> list[int]:
        return [b.bin_start for b in self.trials[0]]


def trial_seed(master_seed: int, trial: int) -> int:
    return master_seed + trial


def _run_trial_bins(args: tuple[RunConfig, int]) -> list[MetricsBin]:
    cfg, k = args
    return run_game(cfg, trial_seed(cfg.seed, k)).bins


def run_trials(cfg: RunConfig) -> TrialSummary:
    """Run cfg.trials seeded trials, in processes when cfg.workers > 1."""
    jobs = [(cfg, k) for k in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            series = list(pool.map(_run_trial_bins, jobs))
    else:
        series = [_run_trial_bins(job) for job in jobs]
    return TrialSummary(config=cfg, trials=series)


LEARNING_CURVE_HEADER = [
    "trial", "bin_start", "cs_sum", "cs_avg", "invasions", "successful_defers",
]
ACTIONS_HEADER = [
    "trial", "bin_start", "player",
    "up", "down", "left", "right", "stay", "defer",
]


def write_learning_curve(summary: TrialSummary, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(LEARNING_CURVE_HEADER)
        for trial, series in enumerate(summary.trials):
            for b in series:
                w.writerow(
                    [trial, b.bin_start, b.cs_sum, b.cs_avg,
                     b.invasions, b.successful_defers]
                )


def write_actions(summary: TrialSummary, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(ACTIONS_HEADER)
        for trial, series in enumerate(summary.trials):
            for b in series:
                for player in range(summary.config.players):
                    w.writerow(
                        [trial, b.bin_start, player, *b.action_counts[player]]
                    )


def read_learning_curve(path: str) -> list[dict]:
    """Parse learning_curve.csv back into typed rows (round-trip safe)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != LEARNING_CURVE_HEADER:
            raise ValueError(f"unexpected header in {path}: {reader.fieldnames}")
        for row in reader:
            rows.append(
                {
                    "trial": int(row["trial"]),
                    "bin_start": int(row["bin_start"]),
                    "cs_sum": int(row["cs_sum"]),
                    "cs_avg": float(row["cs_avg"]),
                    "invasions": int(row["invasions"]),
                    "successful_defers": int(row["successful_defers"]),
                }
            )
    return rows


def read_actions(path: str) -> list[dict]:
    """Parse actions.csv back into typed rows (round-trip safe)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != ACTIONS_HEADER:
            raise ValueError(f"unexpected header in {path}: {reader.fieldnames}")
        for row in reader:
            rows.append({k: int(v) for k, v in row.items()})
    return rows
