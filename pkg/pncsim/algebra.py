"""Exact arithmetic over GF(2^r) and the integer ring Z_M.

Scalar work goes through :class:`Element`; the decoders and demappers use the
vectorized lookup tables of :class:`AlphabetSpec` directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from pncsim.errors import AlphabetMismatchError, DomainError

logger = logging.getLogger(__name__)

# Bit r is the leading term; x^2+x+1 for GF(4) and x^3+x+1 for GF(8)
DEFAULT_PRIMITIVE_POLYS: dict[int, int] = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
}

MAX_FIELD_BITS = 8


def _gf2_mod(a: int, b: int) -> int:
    """Remainder of polynomial division over GF(2)."""
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def _gf2_mulmod(a: int, b: int, poly: int, r: int) -> int:
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> r:
            a ^= poly
    return result


def is_irreducible(poly: int) -> bool:
    """Exhaustive factor check, fine for degrees up to 8."""
    degree = poly.bit_length() - 1
    if degree < 1:
        return False
    for divisor in range(2, 1 << (degree // 2 + 1)):
        if _gf2_mod(poly, divisor) == 0:
            return False
    return True


@dataclass(frozen=True)
class AlphabetSpec:
    """GF(2^r) with a primitive polynomial, or the ring Z_M."""

    kind: Literal["field", "ring"]
    r: int = 0
    primitive_poly: int = 0
    modulus: int = 0

    def __post_init__(self) -> None:
        if self.kind == "field":
            if not 1 <= self.r <= MAX_FIELD_BITS:
                raise ValueError(f"field needs 1 <= r <= {MAX_FIELD_BITS}, got r={self.r}")
            if self.primitive_poly.bit_length() - 1 != self.r:
                raise ValueError(
                    f"polynomial {self.primitive_poly:#b} does not have degree {self.r}"
                )
            if not is_irreducible(self.primitive_poly):
                raise ValueError(f"polynomial {self.primitive_poly:#b} is reducible over GF(2)")
        elif self.kind == "ring":
            if self.modulus < 2:
                raise ValueError(f"ring modulus must be >= 2, got {self.modulus}")
        else:
            raise ValueError(f"unknown alphabet kind {self.kind!r}")

    @classmethod
    def field(cls, r: int, primitive_poly: int | None = None) -> AlphabetSpec:
        if primitive_poly is None:
            if r not in DEFAULT_PRIMITIVE_POLYS:
                raise ValueError(f"no default polynomial for r={r}")
            primitive_poly = DEFAULT_PRIMITIVE_POLYS[r]
        return cls(kind="field", r=r, primitive_poly=primitive_poly)

    @classmethod
    def ring(cls, modulus: int) -> AlphabetSpec:
        return cls(kind="ring", modulus=modulus)

    @classmethod
    def binary(cls) -> AlphabetSpec:
        return cls.field(1)

    @property
    def size(self) -> int:
        return 1 << self.r if self.kind == "field" else self.modulus

    @property
    def is_field(self) -> bool:
        return self.kind == "field"

    @property
    def is_binary(self) -> bool:
        return self.size == 2

    @property
    def bits_per_symbol(self) -> int:
        return max(1, math.ceil(math.log2(self.size)))

    def __str__(self) -> str:
        if self.is_field:
            return f"GF({self.size})"
        return f"Z_{self.modulus}"

    def __call__(self, value: int) -> Element:
        return Element(int(value), self)

    @property
    def zero(self) -> Element:
        return Element(0, self)

    @property
    def one(self) -> Element:
        return Element(1, self)

    # -- lookup tables ------------------------------------------------------

    @cached_property
    def _exp_log(self) -> tuple[np.ndarray, np.ndarray]:
        q = self.size
        order = q - 1
        for g in range(1, q):
            powers = [1]
            while len(powers) <= order:
                nxt = _gf2_mulmod(powers[-1], g, self.primitive_poly, self.r)
                if nxt == 1:
                    break
                powers.append(nxt)
            if len(powers) == order:
                break
        else:  # pragma: no cover - an irreducible polynomial always has a generator
            raise DomainError(f"no multiplicative generator found in {self}")
        exp = np.array(powers + powers, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        log[exp[:order]] = np.arange(order)
        logger.debug("Built log/antilog tables for %s with generator %d", self, g)
        return exp, log

    @cached_property
    def add_table(self) -> np.ndarray:
        v = np.arange(self.size, dtype=np.int64)
        if self.is_field:
            return v[:, None] ^ v[None, :]
        return (v[:, None] + v[None, :]) % self.modulus

    @cached_property
    def mul_table(self) -> np.ndarray:
        q = self.size
        v = np.arange(q, dtype=np.int64)
        if not self.is_field:
            return (v[:, None] * v[None, :]) % self.modulus
        exp, log = self._exp_log
        table = np.zeros((q, q), dtype=np.int64)
        nz = v[1:]
        table[1:, 1:] = exp[log[nz][:, None] + log[nz][None, :]]
        return table

    @cached_property
    def neg_table(self) -> np.ndarray:
        v = np.arange(self.size, dtype=np.int64)
        if self.is_field:
            return v
        return (-v) % self.modulus

    @cached_property
    def sub_table(self) -> np.ndarray:
        """sub_table[s, a] = s - a."""
        return self.add_table[:, self.neg_table]

    @cached_property
    def unit_mask(self) -> np.ndarray:
        if self.is_field:
            mask = np.ones(self.size, dtype=bool)
            mask[0] = False
            return mask
        return np.array([math.gcd(v, self.modulus) == 1 for v in range(self.size)])

    @cached_property
    def inv_table(self) -> np.ndarray:
        """Multiplicative inverse per element, -1 for non-units."""
        inv = np.full(self.size, -1, dtype=np.int64)
        for u in np.flatnonzero(self.unit_mask):
            inv[u] = int(np.flatnonzero(self.mul_table[u] == 1)[0])
        return inv

    def sum(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        """Group sum of alphabet values along one axis."""
        values = np.asarray(values, dtype=np.int64)
        if self.is_field:
            return np.bitwise_xor.reduce(values, axis=axis)
        return values.sum(axis=axis) % self.modulus

    def contains(self, values: np.ndarray) -> bool:
        values = np.asarray(values)
        return bool(np.all((values >= 0) & (values < self.size)))


@dataclass(frozen=True)
class Element:
    value: int
    alphabet: AlphabetSpec

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.alphabet.size:
            raise ValueError(f"{self.value} is not an element of {self.alphabet}")

    def __add__(self, other: Element) -> Element:
        return add(self, other)

    def __mul__(self, other: Element) -> Element:
        return mul(self, other)

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.alphabet}({self.value})"

    @property
    def is_unit(self) -> bool:
        return bool(self.alphabet.unit_mask[self.value])


def _check_same(a: Element, b: Element) -> AlphabetSpec:
    if a.alphabet != b.alphabet:
        raise AlphabetMismatchError(f"cannot combine {a!r} and {b!r}")
    return a.alphabet


def add(a: Element, b: Element) -> Element:
    alphabet = _check_same(a, b)
    return Element(int(alphabet.add_table[a.value, b.value]), alphabet)


def mul(a: Element, b: Element) -> Element:
    alphabet = _check_same(a, b)
    return Element(int(alphabet.mul_table[a.value, b.value]), alphabet)


def units(alphabet: AlphabetSpec) -> list[Element]:
    """Multiplicative units in ascending order (all nonzero elements of a field)."""
    return [Element(int(v), alphabet) for v in np.flatnonzero(alphabet.unit_mask)]


def invert(u: Element) -> Element:
    inverse = int(u.alphabet.inv_table[u.value])
    if inverse < 0:
        raise DomainError(f"{u!r} is not a unit of {u.alphabet}")
    return Element(inverse, u.alphabet)
