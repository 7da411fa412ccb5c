"""Base Civilization Game: board state, legality, transition, and reward.

The game is a turn-based gridworld. Each player occupies one cell and
paints the cell it leaves with its own territory marker. Moving onto
another player's territory is an invasion: the invader takes the cell
and the victim's invaded flag is raised until the victim's next turn,
when the invasion penalty is collected. Farming (just moving around on
or near your own land) pays one point per owned cell on your turn.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import IntEnum


class IllegalActionError(ValueError):
    """An action was applied in a state where it is not legal."""


class Action(IntEnum):
    """Canonical action order; DEFER exists only in the sovereign variant."""

    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    STAY = 4
    DEFER = 5


# Board cell codes, one byte per cell.
UNOWNED = 0
_TERR_BASE = 1  # territory of player i -> 1 + i
_OCC_BASE = 5  # player i standing on a cell -> 5 + i
MAX_PLAYERS = 4


def territory_cell(player: int) -> int:
    return _TERR_BASE + player


def occupied_cell(player: int) -> int:
    return _OCC_BASE + player


def is_territory(cell: int) -> bool:
    return _TERR_BASE <= cell < _TERR_BASE + MAX_PLAYERS


def is_occupied(cell: int) -> bool:
    return cell >= _OCC_BASE


def cell_owner(cell: int) -> int:
    """Owner of a territory or occupied cell (undefined for UNOWNED)."""
    return cell - _OCC_BASE if cell >= _OCC_BASE else cell - _TERR_BASE


@dataclass(frozen=True, slots=True)
class GameState:
    """Full Markov state: board, invaded flags, move counter, sovereign flag.

    board is one byte per cell, row-major. flag is 0 in the base game and
    transiently +1/-1 inside a sovereign vote step.
    """

    board: bytes
    invaded: tuple[bool, ...]
    move: int
    flag: int
    size: int
    players: int

    def position(self, player: int) -> int:
        return self.board.index(_OCC_BASE + player)

    def territory_count(self, player: int) -> int:
        return self.board.count(_TERR_BASE + player)


@dataclass(frozen=True)
class RewardConfig:
    """Point values for invasions and (sovereign variant) vote outcomes."""

    invasion_bonus: int = 10
    invasion_penalty: int = -25
    vote_bonus: int = 15
    vote_penalty: int = -10

    def __post_init__(self) -> None:
        if not (self.invasion_penalty < 0 <= self.invasion_bonus):
            raise ValueError(
                "invasion_penalty must be negative and invasion_bonus non-negative"
            )
        if not self.fear_condition_holds():
            # reward sweeps vary this deliberately, so warn instead of reject
            warnings.warn(
                "invasion bonus is not outweighed by the invasion penalty; "
                "the fear incentive is absent",
                stacklevel=2,
            )

    def fear_condition_holds(self) -> bool:
        """True when being invaded hurts more than invading pays."""
        return abs(self.invasion_penalty) > self.invasion_bonus


def corner_cells(size: int, players: int) -> tuple[int, ...]:
    """Start corners in seat order: TL, TR, BL, BR; diagonal for 2 players."""
    b = size
    if players == 2:
        return (0, b * b - 1)
    return (0, b - 1, b * (b - 1), b * b - 1)[:players]


def initial_state(size: int, players: int) -> GameState:
    if size < 2:
        raise ValueError(f"board size must be >= 2, got {size}")
    if not 1 <= players <= MAX_PLAYERS:
        raise ValueError(f"player count must be in 1..{MAX_PLAYERS}, got {players}")
    board = bytearray(size * size)
    for i, cell in enumerate(corner_cells(size, players)):
        board[cell] = _OCC_BASE + i
    return GameState(
        board=bytes(board),
        invaded=(False,) * players,
        move=0,
        flag=0,
        size=size,
        players=players,
    )


def move_dest(location: int, action: Action, size: int) -> int:
    """Destination index for a movement action; no bounds checking here."""
    if action == Action.UP:
        return location - size
    if action == Action.DOWN:
        return location + size
    if action == Action.LEFT:
        return location - 1
    if action == Action.RIGHT:
        return location + 1
    if action == Action.STAY:
        return location
    raise ValueError(f"{action.name} is not a board movement")


def legal_actions(state: GameState, player: int) -> list[Action]:
    """Movement actions that stay on the board and avoid other players.

    Left/right are additionally illegal at the row edges even when the
    index arithmetic stays in range (no row wrap). STAY is a fallback
    only: legal exactly when nothing else is.
    """
    board = state.board
    b = state.size
    loc = board.index(_OCC_BASE + player)
    col = loc % b
    acts = []
    if loc >= b and not is_occupied(board[loc - b]):
        acts.append(Action.UP)
    if loc < b * (b - 1) and not is_occupied(board[loc + b]):
        acts.append(Action.DOWN)
    if col != 0 and not is_occupied(board[loc - 1]):
        acts.append(Action.LEFT)
    if col != b - 1 and not is_occupied(board[loc + 1]):
        acts.append(Action.RIGHT)
    if not acts:
        acts.append(Action.STAY)
    return acts


def apply_move(
    state: GameState, action: Action
) -> tuple[bytes, tuple[bool, ...], bool]:
    """Board mechanics shared by both variants, for the mover state.move.

    Returns (new board, new invaded flags, invasion committed). Applies:
    relocate the mover, raise the victim's flag on invasion, paint the
    vacated cell (unless STAY), and clear the mover's own flag.
    """
    mover = state.move
    board = bytearray(state.board)
    invaded = list(state.invaded)
    committed = False
    if action != Action.STAY:
        loc = state.board.index(_OCC_BASE + mover)
        dest = move_dest(loc, action, state.size)
        dest_cell = board[dest]
        if is_territory(dest_cell) and cell_owner(dest_cell) != mover:
            invaded[cell_owner(dest_cell)] = True
            committed = True
        board[dest] = _OCC_BASE + mover
        board[loc] = _TERR_BASE + mover
    invaded[mover] = False
    return bytes(board), tuple(invaded), committed


def transition(state: GameState, action: Action) -> GameState:
    """Deterministic base-game transition for the mover state.move."""
    if action == Action.DEFER or action not in legal_actions(state, state.move):
        raise IllegalActionError(
            f"{action.name} is not legal for player {state.move}"
        )
    board, invaded, _ = apply_move(state, action)
    return replace(
        state,
        board=board,
        invaded=invaded,
        move=(state.move + 1) % state.players,
    )


def is_invasion(state: GameState, action: Action) -> bool:
    """Whether the mover's action lands on another player's territory."""
    if action in (Action.STAY, Action.DEFER):
        return False
    mover = state.move
    dest = move_dest(state.board.index(_OCC_BASE + mover), action, state.size)
    cell = state.board[dest]
    return is_territory(cell) and cell_owner(cell) != mover


def reward(
    state: GameState, action: Action, cfg: RewardConfig, player: int | None = None
) -> int:
    """Mover's reward for taking `action` from the pre-transition state.

    Farming pays one point per Territory cell (the occupied cell itself
    does not count), invading pays the bonus, and a raised invaded flag
    costs the penalty. A DEFER (sovereign forced turn) farms only.
    Asking about a non-mover always yields 0.
    """
    mover = state.move
    if player is not None and player != mover:
        return 0
    terr = state.board.count(_TERR_BASE + mover)
    if action == Action.DEFER:
        return terr
    r = terr
    if is_invasion(state, action):
        r += cfg.invasion_bonus
    if state.invaded[mover]:
        r += cfg.invasion_penalty
    return r


def count_states(size: int, players: int) -> int:
    """Closed-form state count b²!/(b²-p)! · bp(b-1) · 2p · p.

    Exact integer arithmetic; this is the nominal size of the base
    3-component state space, not the reachable-set size.
    """
    b, p = size, players
    if p > b * b:
        raise ValueError("more players than cells")
    placements = math.factorial(b * b) // math.factorial(b * b - p)
    return placements * (b * p * (b - 1)) * (2 * p) * p


def encode_state(state: GameState) -> bytes:
    """Canonical injective byte encoding, stable across runs and platforms."""
    return (
        bytes((state.size, state.players))
        + state.board
        + bytes(map(int, state.invaded))
        + bytes((state.move, state.flag + 1))
    )
