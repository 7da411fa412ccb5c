"""Empirical matrix-game extraction and social dilemma classification.

Trained policies are first classed as cooperative or defecting by their
invasion rate (invasions per hundred moves). Frozen policy pairs then
play out the three matchups (coop vs coop, coop vs defect, defect vs
defect); the long-term per-step payoffs fill the R/P/S/T cells, and the
fear (P - S) and greed (T - R) incentives decide what kind of one-shot
game is embedded in the full environment.
"""

from __future__ import annotations

import csv

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .agents import AgentKind, AgentMode, Hyperparams, QTable
from .experiment import (
    AgentSetup,
    MoveRecord,
    RunConfig,
    Variant,
    VoteRecord,
    run_game,
    stream_seed,
)
from .game import RewardConfig


class InsufficientDataError(ValueError):
    """A trace is too short to yield a meaningful behavior metric."""


class PolicyClassificationError(ValueError):
    """A matchup input policy does not fall in the required class."""


class PolicyClass(Enum):
    COOPERATIVE = "cooperative"
    DEFECTING = "defecting"
    NEITHER = "neither"


class DilemmaClass(Enum):
    STAG_HUNT = "StagHunt"
    PRISONERS_DILEMMA = "PrisonersDilemma"
    NOT_SOCIAL_DILEMMA = "NotSocialDilemma"
    OTHER_DILEMMA = "OtherDilemma"


@dataclass(frozen=True)
class Thresholds:
    """Invasions-per-100-moves cutoffs splitting policies into classes."""

    alpha_c: float = 5.0
    alpha_d: float = 15.0

    def __post_init__(self) -> None:
        if not self.alpha_c < self.alpha_d:
            raise ValueError("alpha_c must be below alpha_d")


def alpha_from_counts(invasions: int, moves: int) -> float:
    if moves < 100:
        raise InsufficientDataError(f"need >= 100 moves, got {moves}")
    return 100.0 * invasions / moves


def social_metric(
    trace: Sequence[MoveRecord | VoteRecord], player: int
) -> float:
    """Invasions committed per hundred moves taken, over a trace."""
    moves = 0
    invasions = 0
    for record in trace:
        if isinstance(record, MoveRecord):
            if record.player == player:
                moves += 1
                invasions += record.invasion
        else:
            moves += 1  # the player's ballot counts as a move
    return alpha_from_counts(invasions, moves)


def classify_policy(alpha: float, thresholds: Thresholds) -> PolicyClass:
    if alpha < thresholds.alpha_c:
        return PolicyClass.COOPERATIVE
    if alpha > thresholds.alpha_d:
        return PolicyClass.DEFECTING
    return PolicyClass.NEITHER


@dataclass(frozen=True)
class PayoffMatrix:
    """Empirical R/P/S/T with derived incentives and classification."""

    R: float
    P: float
    S: float
    T: float
    fear: float
    greed: float
    coop_preferred: bool  # R > P
    exploit_resistant: bool  # R > S
    efficient: bool  # 2R > T + S
    classification: DilemmaClass

    @classmethod
    def from_payoffs(cls, R: float, P: float, S: float, T: float) -> "PayoffMatrix":
        fear = P - S
        greed = T - R
        coop_preferred = R > P
        exploit_resistant = R > S
        efficient = 2 * R > T + S
        if not (coop_preferred and exploit_resistant and efficient):
            classification = DilemmaClass.NOT_SOCIAL_DILEMMA
        elif fear > 0 and greed > 0:
            classification = DilemmaClass.PRISONERS_DILEMMA
        elif fear > 0:
            classification = DilemmaClass.STAG_HUNT
        elif greed > 0:
            classification = DilemmaClass.OTHER_DILEMMA
        else:
            classification = DilemmaClass.NOT_SOCIAL_DILEMMA
        return cls(
            R=R, P=P, S=S, T=T, fear=fear, greed=greed,
            coop_preferred=coop_preferred,
            exploit_resistant=exploit_resistant,
            efficient=efficient,
            classification=classification,
        )


def fear_greed(m: PayoffMatrix) -> tuple[float, float]:
    """Recompute (fear, greed) = (P - S, T - R) from the stored payoffs."""
    return m.P - m.S, m.T - m.R


def long_term_payoff(
    trace: Sequence[MoveRecord | VoteRecord],
    player: int,
    steps: int,
    gamma: float | None = None,
) -> float:
    """Cumulative reward of `player` divided by the step count.

    Undiscounted by default; pass gamma for the discounted variant
    (still divided by steps, for scale).
    """
    total = 0.0
    if gamma is None:
        for record in trace:
            if isinstance(record, MoveRecord):
                if record.player == player:
                    total += record.reward
            else:
                total += record.rewards[player]
    else:
        for record in trace:
            if isinstance(record, MoveRecord):
                r = record.reward if record.player == player else 0
            else:
                r = record.rewards[player]
            if r:
                total += gamma**record.step * r
    return total / steps


@dataclass
class TrainedPolicy:
    """Seat-bound frozen tables plus the behavior stats that classify them."""

    kind: AgentKind
    tables: list[QTable]
    final_eps: float
    alpha: float


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs for the train/classify/matchup pipeline.

    The cooperative policy is an hq pair trained to convergence on the
    sovereign variant. The defecting policy is a plain Q pair frozen
    early, in the pre-convergence war regime of the base game: left to
    train long enough, independent Q-learners on this board settle into
    peaceful farming and stop classifying as defectors.
    """

    size: int = 4
    players: int = 2
    train_steps: int = 250_000
    defect_train_steps: int = 20_000
    match_steps: int = 100_000
    match_trials: int = 15
    eval_steps: int = 20_000
    match_variant: Variant = Variant.BASE
    rewards: RewardConfig = field(default_factory=RewardConfig)
    hp: Hyperparams = field(default_factory=Hyperparams)
    thresholds: Thresholds = field(default_factory=Thresholds)
    seed: int = 1

    def __post_init__(self) -> None:
        if self.players < 2:
            raise ValueError("matchups need at least 2 players")


def _frozen_setups(
    tables: Sequence[QTable], eps_by_seat: Sequence[float]
) -> list[AgentSetup]:
    return [
        AgentSetup(
            mode=AgentMode(kind=AgentKind.QLEARNER, ola=False, sovereign_update=False),
            table=table.copy(),
            learn=False,
            fixed_eps=eps,
        )
        for table, eps in zip(tables, eps_by_seat)
    ]


def _match_config(cfg: AnalysisConfig, steps: int, variant: Variant) -> RunConfig:
    return RunConfig(
        size=cfg.size,
        players=cfg.players,
        total_steps=steps,
        bin_size=steps,
        trials=1,
        agent_kinds=(AgentKind.QLEARNER,) * cfg.players,
        rewards=cfg.rewards,
        hp=cfg.hp,
        seed=cfg.seed,
        variant=variant,
    )


def play_matchup(
    cfg: AnalysisConfig,
    tables: Sequence[QTable],
    eps_by_seat: Sequence[float],
    steps: int,
    seed: int,
    variant: Variant | None = None,
) -> tuple[list[float], list[int], list[int]]:
    """Frozen-policy play; returns (per-seat payoff/step, invasions, moves)."""
    run_cfg = _match_config(cfg, steps, variant or cfg.match_variant)
    result = run_game(run_cfg, seed, setups=_frozen_setups(tables, eps_by_seat))
    payoffs = [total / steps for total in result.rewards_per_player]
    return payoffs, result.invasions_per_player, result.moves_per_player


def native_variant(kind: AgentKind) -> Variant:
    """The environment a kind is trained and behavior-classified in: the
    sovereign game for hq learners (their mechanisms live in the vote),
    the plain base game for everything else."""
    return Variant.SOVEREIGN if kind is AgentKind.HQLEARNER else Variant.BASE


def train_policy(
    cfg: AnalysisConfig,
    kind: AgentKind,
    steps: int | None = None,
    variant: Variant | None = None,
) -> TrainedPolicy:
    """Self-play training, then a frozen self-play evaluation of the
    invasion rate in the same (native) environment."""
    variant = variant or native_variant(kind)
    if steps is None:
        steps = (
            cfg.train_steps if kind is AgentKind.HQLEARNER
            else cfg.defect_train_steps
        )
    run_cfg = RunConfig(
        size=cfg.size,
        players=cfg.players,
        total_steps=steps,
        bin_size=steps,
        trials=1,
        agent_kinds=(kind,) * cfg.players,
        rewards=cfg.rewards,
        hp=cfg.hp,
        seed=cfg.seed,
        variant=variant,
    )
    result = run_game(
        run_cfg, stream_seed(cfg.seed, f"train:{kind.value}"), keep_tables=True
    )
    tables = [t for t in result.tables if t is not None]
    final_eps = result.final_eps
    _, invasions, moves = play_matchup(
        cfg,
        tables,
        [final_eps] * cfg.players,
        cfg.eval_steps,
        stream_seed(cfg.seed, f"eval:{kind.value}"),
        variant=variant,
    )
    alpha = alpha_from_counts(sum(invasions), sum(moves))
    return TrainedPolicy(kind=kind, tables=tables, final_eps=final_eps, alpha=alpha)


MatchupFn = Callable[[Sequence[QTable], Sequence[float], int], list[float]]


@dataclass
class AnalysisResult:
    coop_alpha: float
    defect_alpha: float
    per_trial: list[PayoffMatrix]
    aggregate: PayoffMatrix
    stag_hunt_fraction: float


def run_payoff_trials(
    cfg: AnalysisConfig,
    coop: TrainedPolicy,
    defect: TrainedPolicy,
    matchup_fn: MatchupFn | None = None,
) -> AnalysisResult:
    """The three matchups, match_trials times; mixed runs both seatings.

    Tables are seat-bound (a state encodes who starts in which corner),
    so each table only ever plays in the seat it was trained in.
    """
    coop_class = classify_policy(coop.alpha, cfg.thresholds)
    defect_class = classify_policy(defect.alpha, cfg.thresholds)
    if coop_class is not PolicyClass.COOPERATIVE:
        raise PolicyClassificationError(
            f"cooperative input has alpha={coop.alpha:.3f} ({coop_class.value})"
        )
    if defect_class is not PolicyClass.DEFECTING:
        raise PolicyClassificationError(
            f"defecting input has alpha={defect.alpha:.3f} ({defect_class.value})"
        )

    if matchup_fn is None:
        def matchup_fn(tables, eps_by_seat, seed):
            payoffs, _, _ = play_matchup(
                cfg, tables, eps_by_seat, cfg.match_steps, seed
            )
            return payoffs

    eps_c, eps_d = coop.final_eps, defect.final_eps
    p = cfg.players
    half = p // 2  # seats 0..half-1 vs half..p-1, then swapped
    per_trial = []
    for k in range(cfg.match_trials):
        seed = stream_seed(cfg.seed, f"match:{k}")
        cc = matchup_fn(coop.tables, [eps_c] * p, stream_seed(seed, "cc"))
        dd = matchup_fn(defect.tables, [eps_d] * p, stream_seed(seed, "dd"))
        cd = matchup_fn(
            coop.tables[:half] + defect.tables[half:],
            [eps_c] * half + [eps_d] * (p - half),
            stream_seed(seed, "cd"),
        )
        dc = matchup_fn(
            defect.tables[:half] + coop.tables[half:],
            [eps_d] * half + [eps_c] * (p - half),
            stream_seed(seed, "dc"),
        )
        # across the two seatings each policy is observed once per seat
        R = sum(cc) / p
        P = sum(dd) / p
        S = (sum(cd[:half]) + sum(dc[half:])) / p
        T = (sum(dc[:half]) + sum(cd[half:])) / p
        per_trial.append(PayoffMatrix.from_payoffs(R, P, S, T))

    n = len(per_trial)
    aggregate = PayoffMatrix.from_payoffs(
        sum(m.R for m in per_trial) / n,
        sum(m.P for m in per_trial) / n,
        sum(m.S for m in per_trial) / n,
        sum(m.T for m in per_trial) / n,
    )
    stag = sum(
        m.classification is DilemmaClass.STAG_HUNT for m in per_trial
    ) / n
    return AnalysisResult(
        coop_alpha=coop.alpha,
        defect_alpha=defect.alpha,
        per_trial=per_trial,
        aggregate=aggregate,
        stag_hunt_fraction=stag,
    )


def payoff_matrix(
    coop: TrainedPolicy,
    defect: TrainedPolicy,
    cfg: AnalysisConfig,
    matchup_fn: MatchupFn | None = None,
) -> PayoffMatrix:
    """Trial-averaged payoff matrix for a cooperative/defecting policy pair."""
    return run_payoff_trials(cfg, coop, defect, matchup_fn).aggregate


def run_analysis(cfg: AnalysisConfig) -> AnalysisResult:
    """Full pipeline: train both policies, classify, and run the matchups."""
    coop = train_policy(cfg, AgentKind.HQLEARNER)
    defect = train_policy(cfg, AgentKind.QLEARNER)
    return run_payoff_trials(cfg, coop, defect)


MATRIX_HEADER = ["trial", "R", "P", "S", "T", "fear", "greed", "classification"]


def write_matrix_csv(result: AnalysisResult, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(MATRIX_HEADER)
        for k, m in enumerate(result.per_trial):
            w.writerow(
                [k, m.R, m.P, m.S, m.T, m.fear, m.greed, m.classification.value]
            )
        a = result.aggregate
        w.writerow(
            ["aggregate", a.R, a.P, a.S, a.T, a.fear, a.greed,
             result.stag_hunt_fraction]
        )
