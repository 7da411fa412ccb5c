"""Tabular Q-learning, the random baseline, and update broadcasting.

Each learner keeps its own lazily populated Q-table keyed by encoded
states. A learner with broadcasting enabled shares the scalar increment
of every update it makes; the other players blend that increment into
their own tables at the position-swapped "in their shoes" state, so a
lesson learned by one player is felt by all of them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import IO, Iterable, Sequence

from .game import Action, GameState, encode_state, occupied_cell

NUM_ACTIONS = len(Action)


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 0.5
    gamma: float = 0.99
    eps0: float = 0.9
    eps_decay: float = 0.9999

    def __post_init__(self) -> None:
        for name in ("alpha", "gamma", "eps0", "eps_decay"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


class AgentKind(Enum):
    QLEARNER = "qlearner"
    HQLEARNER = "hqlearner"
    RANDOM = "random"


@dataclass(frozen=True)
class AgentMode:
    """Per-seat learning switches derived from the agent kind."""

    kind: AgentKind
    ola: bool
    sovereign_update: bool

    @classmethod
    def for_kind(cls, kind: AgentKind) -> "AgentMode":
        hq = kind is AgentKind.HQLEARNER
        return cls(kind=kind, ola=hq, sovereign_update=hq)

    @property
    def learns(self) -> bool:
        return self.kind is not AgentKind.RANDOM


def epsilon_at(t: int, hp: Hyperparams) -> float:
    """Annealed exploration probability eps0 * decay^t, no floor."""
    return hp.eps0 * hp.eps_decay**t


class QTable:
    """Map from encoded state to one value per action, lazily initialized.

    Fresh rows start at zero (optionally at uniform noise in
    +-init_spread, drawn from the agent's own stream), so entries that
    were never reinforced stay exact ties and the uniform tie-breaking in
    select_action keeps unlearned choices stochastic. `write_log`, when
    set to a list, records (key, action, old, new) for every learning
    write.
    """

    def __init__(self, rng: random.Random, init_spread: float = 0.0):
        self.rng = rng
        self.init_spread = init_spread
        self.rows: dict[bytes, list[float]] = {}
        self.writes = 0
        self.write_log: list | None = None

    def row(self, key: bytes) -> list[float]:
        row = self.rows.get(key)
        if row is None:
            if self.init_spread:
                u = self.rng.uniform
                s = self.init_spread
                row = [u(-s, s) for _ in range(NUM_ACTIONS)]
            else:
                row = [0.0] * NUM_ACTIONS
            self.rows[key] = row
        return row

    def value(self, key: bytes, action: Action) -> float:
        return self.row(key)[action]

    def set(self, key: bytes, action: Action, value: float) -> None:
        self.row(key)[action] = value

    def best_value(self, key: bytes, legal: Sequence[Action]) -> float:
        row = self.row(key)
        return max(row[a] for a in legal)

    def blend(self, key: bytes, action: Action, delta: float, alpha: float) -> None:
        """Core table write: Q <- (1 - alpha) * Q + delta."""
        row = self.row(key)
        old = row[action]
        new = (1.0 - alpha) * old + delta
        row[action] = new
        self.writes += 1
        if self.write_log is not None:
            self.write_log.append((key, action, old, new, delta))

    def copy(self) -> "QTable":
        """Independent copy sharing nothing mutable (rng state included)."""
        dup = QTable(random.Random(), init_spread=self.init_spread)
        dup.rng.setstate(self.rng.getstate())
        dup.rows = {k: row[:] for k, row in self.rows.items()}
        return dup

    def __len__(self) -> int:
        return len(self.rows)


def select_action(
    q: QTable,
    state_or_key: GameState | bytes,
    legal: Sequence[Action],
    eps: float,
    rng: random.Random,
) -> Action:
    """Epsilon-greedy over the legal set, uniform tie-breaking on exploit."""
    if not legal:
        raise ValueError("legal action set is empty")
    if rng.random() < eps:
        return legal[rng.randrange(len(legal))]
    key = state_or_key if isinstance(state_or_key, bytes) else encode_state(state_or_key)
    row = q.row(key)
    best = max(row[a] for a in legal)
    ties = [a for a in legal if row[a] == best]
    return ties[0] if len(ties) == 1 else ties[rng.randrange(len(ties))]


def q_update(
    q: QTable,
    s_key: bytes,
    action: Action,
    r: float,
    s_next_key: bytes,
    legal_next: Sequence[Action],
    hp: Hyperparams,
) -> float:
    """Bellman update Q <- (1-a)Q + a(r + g max Q(s',.)); returns the increment."""
    delta = hp.alpha * (r + hp.gamma * q.best_value(s_next_key, legal_next))
    q.blend(s_key, action, delta, hp.alpha)
    return delta


def ola_state(state: GameState, observer: int, mover: int) -> GameState:
    """Alternate-reality state putting `observer` in the mover's shoes.

    Board positions and invaded flags of the two players are swapped and
    the move is set to the observer; territory and everything else stay.
    """
    if observer == mover:
        raise ValueError("observer and mover must differ")
    board = bytearray(state.board)
    li = state.board.index(occupied_cell(observer))
    lm = state.board.index(occupied_cell(mover))
    board[li], board[lm] = occupied_cell(mover), occupied_cell(observer)
    invaded = list(state.invaded)
    invaded[observer], invaded[mover] = invaded[mover], invaded[observer]
    return replace(state, board=bytes(board), invaded=tuple(invaded), move=observer)


def ola_broadcast(
    tables: Sequence[QTable | None],
    state: GameState,
    action: Action,
    delta: float,
    mover: int,
    hp: Hyperparams,
) -> None:
    """Blend the mover's update increment into every other player's table.

    Each observer's write lands at the swap-constructed state, with the
    mover's delta verbatim (not recomputed). Entries of `tables` that are
    None (broadcasting disabled for that seat) are skipped.
    """
    for i, table in enumerate(tables):
        if i == mover or table is None:
            continue
        table.blend(encode_state(ola_state(state, i, mover)), action, delta, hp.alpha)


def dump_qtable(q: QTable, fp: IO[str] | None = None) -> str:
    """Serialize as `state-key-hex<TAB>action<TAB>value` lines, sorted."""
    lines = []
    for key, row in q.rows.items():
        hexkey = key.hex()
        for a in Action:
            lines.append(f"{hexkey}\t{a.name.lower()}\t{row[a]:.17g}")
    lines.sort()
    text = "\n".join(lines) + ("\n" if lines else "")
    if fp is not None:
        fp.write(text)
    return text


def load_qtable(lines: Iterable[str] | IO[str], rng: random.Random) -> QTable:
    """Parse dump_qtable output; `rng` serves future lazy initialization."""
    by_name = {a.name.lower(): a for a in Action}
    q = QTable(rng)
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        hexkey, name, value = line.split("\t")
        key = bytes.fromhex(hexkey)
        row = q.rows.setdefault(key, [0.0] * NUM_ACTIONS)
        row[by_name[name]] = float(value)
    return q
