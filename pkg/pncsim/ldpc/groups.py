"""Message alphabets for nonbinary belief propagation.

A :class:`MessageGroup` is the additive group a check node convolves over,
together with the action of a parity-check entry on it. The base group is the
code alphabet itself; the pair group is its direct product with itself, where
an entry h acts coordinate-wise, h.(a, b) = (h.a, h.b), and pair (s1, s2) is
flattened to s1*M + s2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from pncsim.algebra import AlphabetSpec


@dataclass
class OpCounter:
    """Multiply-accumulate tally for check-node updates."""

    direct: int = 0
    transform: int = 0
    pointwise: int = 0
    checks: int = 0

    @property
    def total(self) -> int:
        return self.direct + self.transform + self.pointwise

    def per_check(self) -> float:
        return self.total / self.checks if self.checks else 0.0


@dataclass(frozen=True)
class MessageGroup:
    alphabet: AlphabetSpec
    dims: int = 1

    @classmethod
    def base(cls, alphabet: AlphabetSpec) -> MessageGroup:
        return cls(alphabet, 1)

    @classmethod
    def pair(cls, alphabet: AlphabetSpec) -> MessageGroup:
        return cls(alphabet, 2)

    @property
    def size(self) -> int:
        return self.alphabet.size**self.dims

    @cached_property
    def _coords(self) -> tuple[np.ndarray, ...]:
        idx = np.arange(self.size)
        if self.dims == 1:
            return (idx,)
        m = self.alphabet.size
        return idx // m, idx % m

    def _compose(self, *coords: np.ndarray) -> np.ndarray:
        if self.dims == 1:
            return coords[0]
        return coords[0] * self.alphabet.size + coords[1]

    @cached_property
    def neg(self) -> np.ndarray:
        return self._compose(*(self.alphabet.neg_table[c] for c in self._coords))

    @cached_property
    def add_table(self) -> np.ndarray:
        add = self.alphabet.add_table
        grids = [add[c[:, None], c[None, :]] for c in self._coords]
        return self._compose(*grids)

    @cached_property
    def sub_table(self) -> np.ndarray:
        """sub_table[s, a] = s - a in the group."""
        sub = self.alphabet.sub_table
        grids = [sub[c[:, None], c[None, :]] for c in self._coords]
        return self._compose(*grids)

    @cached_property
    def action(self) -> np.ndarray:
        """action[h, x] = h.x for every alphabet element h."""
        mul = self.alphabet.mul_table
        rows = [self._compose(*(mul[h][c] for c in self._coords)) for h in range(self.alphabet.size)]
        return np.stack(rows)

    @cached_property
    def inverse_action(self) -> np.ndarray:
        """inverse_action[h, z] = x with h.x = z, defined for units h."""
        inv = np.zeros_like(self.action)
        for h in np.flatnonzero(self.alphabet.unit_mask):
            inv[h, self.action[h]] = np.arange(self.size)
        return inv

    @cached_property
    def identity(self) -> np.ndarray:
        delta = np.zeros(self.size)
        delta[0] = 1.0
        return delta

    # -- transforms ---------------------------------------------------------

    @property
    def transform_cost(self) -> int:
        """Butterfly operations of one forward or inverse transform."""
        return int(self.size * math.log2(self.size))

    def _split(self, x: np.ndarray) -> np.ndarray:
        if self.dims == 1:
            return x
        m = self.alphabet.size
        return x.reshape(*x.shape[:-1], m, m)

    def _merge(self, x: np.ndarray) -> np.ndarray:
        if self.dims == 1:
            return x
        return x.reshape(*x.shape[:-2], self.size)

    def transform(self, messages: np.ndarray) -> np.ndarray:
        """Walsh-Hadamard (fields) or DFT mod M (rings) along every coordinate."""
        x = self._split(np.asarray(messages))
        axes = tuple(range(-self.dims, 0))
        if self.alphabet.is_field:
            for axis in axes:
                x = _walsh_hadamard(x, axis)
            return self._merge(x)
        return self._merge(np.fft.fftn(x, axes=axes))

    def inverse_transform(self, spectrum: np.ndarray) -> np.ndarray:
        x = self._split(np.asarray(spectrum))
        axes = tuple(range(-self.dims, 0))
        if self.alphabet.is_field:
            for axis in axes:
                x = _walsh_hadamard(x, axis) / self.alphabet.size
            return self._merge(x)
        return self._merge(np.fft.ifftn(x, axes=axes).real)

    def convolve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Direct O(size^2) group convolution, out[s] = sum_a A[a] B[s - a]."""
        return np.einsum("...a,...sa->...s", a, b[..., self.sub_table])


def _walsh_hadamard(x: np.ndarray, axis: int) -> np.ndarray:
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    lead, n = x.shape[:-1], x.shape[-1]
    h = 1
    while h < n:
        y = x.reshape(*lead, n // (2 * h), 2, h)
        a, b = y[..., 0, :], y[..., 1, :]
        x = np.stack((a + b, a - b), axis=-2).reshape(*lead, n)
        h *= 2
    return np.moveaxis(x, -1, axis)


__all__ = ["MessageGroup", "OpCounter"]
