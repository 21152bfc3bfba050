"""Run configuration: caps for the bounded computations.

Flags win over environment variables, which win over the defaults.
Environment overrides: BRIESKORN_JET_CAP, BRIESKORN_GRADED_WINDOW,
BRIESKORN_TRUNC_ORDER.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from .errors import InputError

_ENV_PREFIX = "BRIESKORN_"


@dataclass(frozen=True)
class RunConfig:
    jet_cap: int = 24
    graded_window: Optional[int] = None  # None: derived from the input
    trunc_order: int = 16
    output_format: str = "text"
    seed: int = 0

    def __post_init__(self):
        if self.jet_cap < 4:
            raise InputError("jet cap must be at least 4")
        if self.graded_window is not None and self.graded_window < 1:
            raise InputError("graded window must be at least 1")
        if self.trunc_order < 2:
            raise InputError("truncation order must be at least 2")
        if self.output_format not in ("text", "json"):
            raise InputError("output format must be 'text' or 'json'")


def _env_int(name: str) -> Optional[int]:
    raw = os.environ.get(_ENV_PREFIX + name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"environment variable {_ENV_PREFIX + name} must be an integer") from exc


def config_from_env_and_args(
    jet_cap: Optional[int] = None,
    graded_window: Optional[int] = None,
    trunc_order: Optional[int] = None,
    output_format: Optional[str] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    defaults = RunConfig()
    return RunConfig(
        jet_cap=jet_cap if jet_cap is not None else (_env_int("JET_CAP") or defaults.jet_cap),
        graded_window=graded_window
        if graded_window is not None
        else _env_int("GRADED_WINDOW"),
        trunc_order=trunc_order
        if trunc_order is not None
        else (_env_int("TRUNC_ORDER") or defaults.trunc_order),
        output_format=output_format or defaults.output_format,
        seed=seed if seed is not None else defaults.seed,
    )
