from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, NamedTuple

import numpy as np

from pncsim.config import settings

CheckUpdate = Literal["direct", "fft", "ems"]


@dataclass(frozen=True)
class DecoderConfig:
    max_iter: int = field(default_factory=lambda: settings.max_iter)
    check_update: CheckUpdate = "fft"
    # EMS list size; None keeps the whole alphabet
    n_m: int | None = None
    damping: float = 1.0
    early_stop: bool = True
    ems_floor_offset: float = field(default_factory=lambda: settings.ems_floor_offset)
    ems_offset: float = field(default_factory=lambda: settings.ems_offset)

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.check_update not in ("direct", "fft", "ems"):
            raise ValueError(f"unknown check update {self.check_update!r}")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if self.n_m is not None and self.n_m < 1:
            raise ValueError(f"n_m must be >= 1, got {self.n_m}")
        if self.ems_floor_offset < 0:
            raise ValueError("ems_floor_offset must be non-negative")

    def with_iterations(self, max_iter: int) -> DecoderConfig:
        return replace(self, max_iter=max_iter)

    def list_size(self, theta: int) -> int:
        n_m = theta if self.n_m is None else self.n_m
        if n_m > theta:
            raise ValueError(f"n_m={n_m} exceeds the message alphabet size {theta}")
        return n_m


class DecodeResult(NamedTuple):
    """Hard decision, convergence flag, iterations run, and soft posterior.

    The posterior is a per-position LLR vector for the binary decoder and a
    (n, size) probability array for the nonbinary ones.
    """

    hard: np.ndarray
    converged: bool
    iterations: int
    posterior: np.ndarray
