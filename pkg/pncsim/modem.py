"""User constellations: Gray-labelled M-PSK and (non-)uniform M-PAM.

Every point carries a symbol label (an alphabet element) and a bit label.
PSK points carry GF(2^r) symbols whose bits are the symbol itself, so the
XOR of bit labels is field addition. PAM points carry Z_M symbols in natural
amplitude order and Gray bit labels, so the mod-M map acts on amplitude
indices while BICM receivers still see Gray bits.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

logger = logging.getLogger(__name__)

MAX_ORDER = 16


def gray_code(bits: int) -> np.ndarray:
    """Binary-reflected Gray sequence of the given width."""
    i = np.arange(1 << bits, dtype=np.int64)
    return i ^ (i >> 1)


def _order_bits(M: int) -> int:
    if M < 2 or M > MAX_ORDER or M & (M - 1):
        raise ValueError(f"constellation order must be a power of 2 in [2, {MAX_ORDER}], got {M}")
    return int(math.log2(M))


@dataclass(frozen=True, eq=False)
class Constellation:
    kind: Literal["psk", "pam"]
    points: np.ndarray
    symbol_labels: np.ndarray
    rotation: float = 0.0
    spacings: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        M = len(self.points)
        if sorted(self.symbol_labels.tolist()) != list(range(M)):
            raise ValueError("symbol labels must be a bijection onto the alphabet")

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))

    @cached_property
    def bits_of_symbol(self) -> np.ndarray:
        """Bit label of every symbol value."""
        symbols = np.arange(self.order)
        if self.kind == "psk":
            return symbols
        return gray_code(self.bits_per_symbol)[symbols]

    @cached_property
    def bit_labels(self) -> np.ndarray:
        """Bit label per point, in point order."""
        return self.bits_of_symbol[self.symbol_labels]

    @cached_property
    def symbol_of_bits(self) -> np.ndarray:
        inverse = np.empty(self.order, dtype=np.int64)
        inverse[self.bits_of_symbol] = np.arange(self.order)
        return inverse

    @cached_property
    def point_of_symbol(self) -> np.ndarray:
        table = np.empty(self.order, dtype=complex)
        table[self.symbol_labels] = self.points
        return table

    @cached_property
    def bit_matrix(self) -> np.ndarray:
        """bit_matrix[s, j] is bit j (MSB first) of symbol s's label."""
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return (self.bits_of_symbol[:, None] >> shifts) & 1

    @property
    def energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def bits_to_symbols(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64).reshape(-1, self.bits_per_symbol)
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        return self.symbol_of_bits[bits @ weights]

    def symbols_to_bits(self, symbols: np.ndarray) -> np.ndarray:
        return self.bit_matrix[np.asarray(symbols, dtype=np.int64)].reshape(-1)


def _snap(points: np.ndarray) -> np.ndarray:
    re = np.where(np.abs(points.real) < 1e-15, 0.0, points.real)
    im = np.where(np.abs(points.imag) < 1e-15, 0.0, points.imag)
    return re + 1j * im


def psk_gray(M: int, rotation: float = 0.0) -> Constellation:
    bits = _order_bits(M)
    k = np.arange(M)
    points = _snap(np.exp(1j * (2 * np.pi * k / M + rotation)))
    return Constellation("psk", points, gray_code(bits), rotation=float(rotation))


def pam(M: int, spacings: Sequence[float] | None = None) -> Constellation:
    """Real amplitudes with the given gaps, zero mean and unit average energy."""
    _order_bits(M)
    gaps = np.ones(M - 1) if spacings is None else np.asarray(spacings, dtype=float)
    if gaps.shape != (M - 1,):
        raise ValueError(f"{M}-PAM needs {M - 1} spacings, got {len(gaps)}")
    if np.any(gaps <= 0):
        raise ValueError("PAM spacings must be positive")
    levels = np.concatenate([[0.0], np.cumsum(gaps)])
    levels -= levels.mean()
    levels /= np.sqrt(np.mean(levels**2))
    return Constellation(
        "pam", levels.astype(complex), np.arange(M), spacings=tuple(gaps.tolist())
    )


def relabel(c: Constellation, permutation: Sequence[int]) -> Constellation:
    """The point labelled s becomes labelled permutation[s]; points stay put."""
    perm = np.asarray(permutation, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(c.order)):
        raise ValueError("relabel permutation must be a bijection on the alphabet")
    return Constellation(c.kind, c.points.copy(), perm[c.symbol_labels], c.rotation, c.spacings)


def modulate(symbols: np.ndarray, c: Constellation) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= c.order):
        raise ValueError(f"symbols outside the {c.order}-ary alphabet")
    return c.point_of_symbol[symbols]


def demodulate_nearest(samples: np.ndarray, c: Constellation) -> np.ndarray:
    """Minimum-distance symbol decisions."""
    samples = np.asarray(samples)
    nearest = np.argmin(np.abs(samples[..., None] - c.points), axis=-1)
    return c.symbol_labels[nearest]


def write_constellation_csv(c: Constellation, path: str | Path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "re", "im", "symbol", "bits"])
            for i, point in enumerate(c.points):
                writer.writerow([
                    i,
                    repr(float(point.real)),
                    repr(float(point.imag)),
                    int(c.symbol_labels[i]),
                    format(int(c.bit_labels[i]), f"0{c.bits_per_symbol}b"),
                ])
    except OSError as exc:
        raise OSError(f"cannot write constellation to {path}: {exc}") from exc
    logger.info("Wrote %d-point %s constellation to %s", c.order, c.kind.upper(), path)
