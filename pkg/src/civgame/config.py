"""Flat key=value config files driving the CLI.

One `key=value` pair per line, `#` starts a comment, blank lines are
ok. Unknown keys are a hard error; missing keys take the documented
defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .agents import AgentKind, Hyperparams
from .experiment import RunConfig, Variant
from .game import RewardConfig
from .matrix import AnalysisConfig, Thresholds


class ConfigError(ValueError):
    """Bad config file content; carries the offending line when known."""

    def __init__(self, message: str, line_no: int | None = None, line: str = ""):
        self.line_no = line_no
        self.line = line
        if line_no is not None:
            message = f"line {line_no}: {message}: {line!r}"
        super().__init__(message)


def _parse_variant(text: str) -> Variant:
    try:
        return Variant(text)
    except ValueError:
        raise ValueError(f"variant must be one of base|sovereign, got {text!r}")


def _parse_agent(text: str) -> AgentKind:
    try:
        return AgentKind(text)
    except ValueError:
        names = "|".join(k.value for k in AgentKind)
        raise ValueError(f"agent kind must be one of {names}, got {text!r}")


# key -> (parser, default)
SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    "board_size": (int, 4),
    "players": (int, 4),
    "total_steps": (int, 250_000),
    "bin": (int, 2_500),
    "trials": (int, 3),
    "seed": (int, 1),
    "variant": (_parse_variant, Variant.SOVEREIGN),
    "agent0": (_parse_agent, AgentKind.HQLEARNER),
    "agent1": (_parse_agent, AgentKind.HQLEARNER),
    "agent2": (_parse_agent, AgentKind.HQLEARNER),
    "agent3": (_parse_agent, AgentKind.HQLEARNER),
    "invasion_bonus": (int, 10),
    "invasion_penalty": (int, -25),
    "vote_bonus": (int, 15),
    "vote_penalty": (int, -10),
    "alpha": (float, 0.5),
    "gamma": (float, 0.99),
    "eps0": (float, 0.9),
    "eps_decay": (float, 0.9999),
    "alpha_c": (float, 5.0),
    "alpha_d": (float, 15.0),
    "workers": (int, 1),
    # matrix-analysis pipeline
    "train_steps": (int, 250_000),
    "defect_train_steps": (int, 20_000),
    "match_steps": (int, 100_000),
    "match_trials": (int, 15),
    "eval_steps": (int, 20_000),
    "match_players": (int, 2),
    "match_variant": (_parse_variant, Variant.BASE),
}


def parse_config(path: str | None) -> dict[str, Any]:
    """Read a config file into a fully defaulted settings dict."""
    settings = {key: default for key, (_, default) in SCHEMA.items()}
    if path is None:
        return settings
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("expected key=value", line_no, raw.rstrip("\n"))
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}", line_no, raw.rstrip("\n"))
            parser, _ = SCHEMA[key]
            try:
                settings[key] = parser(value)
            except ValueError as exc:
                raise ConfigError(str(exc), line_no, raw.rstrip("\n"))
    return settings


@dataclass(frozen=True)
class ResolvedConfig:
    settings: dict[str, Any]

    def run_config(self) -> RunConfig:
        s = self.settings
        kinds = tuple(s[f"agent{i}"] for i in range(s["players"]))
        return RunConfig(
            size=s["board_size"],
            players=s["players"],
            total_steps=s["total_steps"],
            bin_size=s["bin"],
            trials=s["trials"],
            agent_kinds=kinds,
            rewards=self.reward_config(),
            hp=self.hyperparams(),
            seed=s["seed"],
            variant=s["variant"],
            workers=s["workers"],
        )

    def reward_config(self) -> RewardConfig:
        s = self.settings
        return RewardConfig(
            invasion_bonus=s["invasion_bonus"],
            invasion_penalty=s["invasion_penalty"],
            vote_bonus=s["vote_bonus"],
            vote_penalty=s["vote_penalty"],
        )

    def hyperparams(self) -> Hyperparams:
        s = self.settings
        return Hyperparams(
            alpha=s["alpha"], gamma=s["gamma"],
            eps0=s["eps0"], eps_decay=s["eps_decay"],
        )

    def analysis_config(self) -> AnalysisConfig:
        s = self.settings
        return AnalysisConfig(
            size=s["board_size"],
            players=s["match_players"],
            train_steps=s["train_steps"],
            defect_train_steps=s["defect_train_steps"],
            match_steps=s["match_steps"],
            match_trials=s["match_trials"],
            eval_steps=s["eval_steps"],
            match_variant=s["match_variant"],
            rewards=self.reward_config(),
            hp=self.hyperparams(),
            thresholds=Thresholds(alpha_c=s["alpha_c"], alpha_d=s["alpha_d"]),
            seed=s["seed"],
        )

    def manifest(self) -> str:
        """Deterministic key=value dump of the resolved settings."""
        lines = []
        for key in sorted(self.settings):
            value = self.settings[key]
            if isinstance(value, (Variant, AgentKind)):
                value = value.value
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


def load_config(path: str | None, seed_override: int | None = None) -> ResolvedConfig:
    settings = parse_config(path)
    if seed_override is not None:
        settings["seed"] = seed_override
    return ResolvedConfig(settings)
