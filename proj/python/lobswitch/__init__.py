"""Optimal switching for a trader facing a limit order book with a dark pool."""

from ._core import (
    Config,
    ConfigError,
    MissingFileError,
    Policy,
    __version__,
    admissible_controls,
    cash_flow,
    evaluate,
    fair_premium,
    grid_size,
    main,
    oracle_check,
    relative_advantage,
    shares_traded,
    simulate_book,
    solve,
    terminal_reward,
)

__all__ = [
    "Config",
    "ConfigError",
    "MissingFileError",
    "Policy",
    "admissible_controls",
    "cash_flow",
    "evaluate",
    "fair_premium",
    "grid_size",
    "main",
    "oracle_check",
    "relative_advantage",
    "shares_traded",
    "simulate_book",
    "solve",
    "terminal_reward",
]
