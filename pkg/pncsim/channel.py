"""Multiple-access phase: two users superimposed at the relay under AWGN or
block Rayleigh fading.

SNR is the per-user symbol SNR Es/N0 with Es = 1, and the relay knows the
channel coefficients exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]


def rng_from(seed: Seed) -> np.random.Generator:
    """Counter-based generator, so derived seeds give independent streams."""
    return np.random.Generator(np.random.Philox(seed))


def frame_seed(master_seed: int, snr_index: int, frame_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, snr_index, frame_index])


@dataclass(frozen=True)
class ChannelModel:
    kind: Literal["awgn", "block-rayleigh"] = "awgn"
    blocks: int = 1
    # Extra attenuation of user 2, in dB
    imbalance_db: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("awgn", "block-rayleigh"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.blocks < 1:
            raise ValueError(f"blocks must be >= 1, got {self.blocks}")

    @property
    def n_blocks(self) -> int:
        return 1 if self.kind == "awgn" else self.blocks


def block_sizes(n: int, blocks: int) -> np.ndarray:
    """Contiguous near-equal partition; the first n % blocks blocks are one longer."""
    base, extra = divmod(n, blocks)
    return np.array([base + (i < extra) for i in range(blocks)], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h1_blocks: np.ndarray
    h2_blocks: np.ndarray
    sizes: np.ndarray
    noise_var: float | None = None

    @property
    def n(self) -> int:
        return int(self.sizes.sum())

    @property
    def h1(self) -> np.ndarray:
        return np.repeat(self.h1_blocks, self.sizes)

    @property
    def h2(self) -> np.ndarray:
        return np.repeat(self.h2_blocks, self.sizes)

    def block_slices(self) -> list[slice]:
        edges = np.concatenate([[0], np.cumsum(self.sizes)])
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def snr_to_noise_var(snr_db: float) -> float:
    if not np.isfinite(snr_db):
        raise ValueError(f"SNR must be finite, got {snr_db}")
    return float(10.0 ** (-snr_db / 10.0))


def draw_realization(
    model: ChannelModel, n: int, seed: Seed, noise_var: float | None = None
) -> ChannelRealization:
    sizes = block_sizes(n, model.n_blocks)
    scale = 10.0 ** (-model.imbalance_db / 20.0)
    if model.kind == "awgn":
        h1 = np.ones(1, dtype=complex)
        h2 = np.full(1, scale, dtype=complex)
    else:
        rng = rng_from(seed)
        draws = rng.standard_normal((2, model.blocks, 2)) / np.sqrt(2.0)
        h = draws[..., 0] + 1j * draws[..., 1]
        h1, h2 = h[0], h[1] * scale
    return ChannelRealization(h1, h2, sizes, noise_var)


def transmit_mac(
    x1: np.ndarray,
    x2: np.ndarray,
    realization: ChannelRealization,
    noise_var: float,
    seed: Seed,
) -> np.ndarray:
    """y = h1*x1 + h2*x2 + n with circular complex noise of total variance noise_var."""
    x1 = np.asarray(x1, dtype=complex)
    x2 = np.asarray(x2, dtype=complex)
    if x1.shape != x2.shape:
        raise ValueError(f"user signals differ in length: {x1.shape} vs {x2.shape}")
    if x1.shape != (realization.n,):
        raise ValueError(f"realization covers {realization.n} symbols, got {x1.shape}")
    y = realization.h1 * x1 + realization.h2 * x2
    if noise_var > 0:
        rng = rng_from(seed)
        sigma = np.sqrt(noise_var / 2.0)
        y = y + sigma * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y
