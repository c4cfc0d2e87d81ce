"""Radial ground states of NLS-type equations.

Configs are dicts laid out like the "config" block of an artifact; missing
sections and keys take their defaults.
"""

import copy

from ._gstate import (
    ConvergenceError,
    DegeneracyError,
    ValidationError,
    config_hash,
    continue_branch,
    default_config,
    format_version,
    mass_curve,
    run_cli,
    solve,
    verify,
)


def make_config(**sections):
    """Defaults with the given sections merged in, e.g.
    make_config(problem={"p": 3}, grid={"n": 2048})."""
    cfg = default_config()
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key] = {**cfg[key], **copy.deepcopy(value)}
        else:
            cfg[key] = value
    return cfg


__all__ = [
    "ConvergenceError",
    "DegeneracyError",
    "ValidationError",
    "config_hash",
    "continue_branch",
    "default_config",
    "format_version",
    "make_config",
    "mass_curve",
    "run_cli",
    "solve",
    "verify",
]
