"""Sovereign variant: the vote move, defer mechanics, and vote rewards.

The move counter gains an extra value m = p, on which all players cast a
ballot simultaneously. A strict majority of DEFER ballots installs the
sovereign for one cycle: everyone is forced to defer (stay put and farm)
for the next p turns and everyone collects the vote bonus. A failed vote
removes DEFER until the next vote and fines the players who were duped
into deferring.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

from .game import (
    Action,
    GameState,
    IllegalActionError,
    RewardConfig,
    apply_move,
    legal_actions,
)


class PhaseKind(Enum):
    OPEN = "open"
    FORCED_DEFER = "forced_defer"
    SUPPRESSED = "suppressed"


@dataclass(frozen=True, slots=True)
class VotePhase:
    """Between-vote bookkeeping: whether defer is forced, absent, or open."""

    kind: PhaseKind
    remaining: int = 0

    @classmethod
    def open(cls) -> "VotePhase":
        return cls(PhaseKind.OPEN)

    @classmethod
    def forced(cls, remaining: int) -> "VotePhase":
        if remaining < 1:
            raise ValueError("forced-defer phase needs at least one turn")
        return cls(PhaseKind.FORCED_DEFER, remaining)

    @classmethod
    def suppressed(cls) -> "VotePhase":
        return cls(PhaseKind.SUPPRESSED)


def is_vote_move(state: GameState) -> bool:
    return state.move == state.players


def vote_count(ballots: Sequence[Action]) -> int:
    return sum(1 for a in ballots if a == Action.DEFER)


def vote_succeeds(ballots: Sequence[Action], players: int) -> bool:
    """Strict majority: more than half of all seats must defer."""
    return vote_count(ballots) * 2 > players


def sovereign_legal_actions(
    state: GameState, player: int, phase: VotePhase
) -> list[Action]:
    """Legal set in the sovereign variant.

    At the vote move the ballot is the base set plus DEFER (a forced or
    suppressed phase has always expired by then). On ordinary moves a
    forced phase allows only DEFER and a suppressed phase the base set.
    """
    if is_vote_move(state):
        return legal_actions(state, player) + [Action.DEFER]
    if phase.kind is PhaseKind.FORCED_DEFER:
        return [Action.DEFER]
    return legal_actions(state, player)


def _advance(move: int, players: int) -> int:
    return (move + 1) % (players + 1)


def sovereign_transition(
    state: GameState,
    action_or_ballots: Action | Sequence[Action],
    phase: VotePhase,
) -> tuple[GameState, VotePhase]:
    """Piecewise transition: ballots at the vote move, one action otherwise.

    A vote leaves the board and invaded flags untouched, sets the
    sovereign flag to +1/-1, and resets the move to player 0. The flag
    only carries the outcome to the payout step; consume_flag zeroes it
    once the rewards have been disbursed. DEFER on an ordinary move keeps
    the mover in place and farms.
    """
    p = state.players
    if is_vote_move(state):
        if isinstance(action_or_ballots, Action):
            raise IllegalActionError("vote move requires a full ballot")
        ballots = list(action_or_ballots)
        if len(ballots) != p:
            raise IllegalActionError(
                f"ballot must have {p} entries, got {len(ballots)}"
            )
        if vote_succeeds(ballots, p):
            return replace(state, flag=1, move=0), VotePhase.forced(p)
        return replace(state, flag=-1, move=0), VotePhase.suppressed()

    if not isinstance(action_or_ballots, Action):
        raise IllegalActionError("ordinary move takes a single action")
    action = action_or_ballots
    if action not in sovereign_legal_actions(state, state.move, phase):
        raise IllegalActionError(
            f"{action.name} is not legal for player {state.move}"
        )

    next_move = _advance(state.move, p)
    if action == Action.DEFER:
        invaded = list(state.invaded)
        invaded[state.move] = False
        next_state = replace(state, invaded=tuple(invaded), move=next_move)
    else:
        board, invaded, _ = apply_move(state, action)
        next_state = replace(state, board=board, invaded=invaded, move=next_move)

    if phase.kind is PhaseKind.FORCED_DEFER:
        next_phase = (
            VotePhase.open()
            if phase.remaining <= 1
            else VotePhase.forced(phase.remaining - 1)
        )
    elif phase.kind is PhaseKind.SUPPRESSED and next_move == p:
        next_phase = VotePhase.open()  # suppression lasts until the next vote
    else:
        next_phase = phase
    return next_state, next_phase


def consume_flag(state: GameState) -> GameState:
    """Zero the sovereign flag once the vote payouts have been made."""
    return replace(state, flag=0) if state.flag else state


def sovereign_reward(state: GameState, action: Action, cfg: RewardConfig) -> int:
    """Per-player vote payout, read off the freshly set sovereign flag.

    Success pays the bonus to everyone, defer ballot or not; failure
    fines only the defer voters. Paid once, at the vote move itself.
    """
    if state.flag == 1:
        return cfg.vote_bonus
    if state.flag == -1 and action == Action.DEFER:
        return cfg.vote_penalty
    return 0
