from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from pncsim.algebra import AlphabetSpec, Element, units
from pncsim.errors import AlphabetMismatchError, DomainError


@dataclass(frozen=True)
class NcMap:
    """The network-coding map (s1, s2) -> a*s1 + b*s2 over one alphabet.

    Coefficients are stored as integers. Non-unit coefficients are allowed so
    that infeasible maps can be inspected; recovery refuses them.
    """

    alphabet: AlphabetSpec
    a: int = 1
    b: int = 1

    def __post_init__(self) -> None:
        for name, value in (("a", self.a), ("b", self.b)):
            if not 0 <= value < self.alphabet.size:
                raise ValueError(f"coefficient {name}={value} is not in {self.alphabet}")

    @classmethod
    def xor(cls, r: int) -> NcMap:
        return cls(AlphabetSpec.field(r), 1, 1)

    @property
    def coefficients(self) -> tuple[int, int]:
        return self.a, self.b

    @property
    def has_unit_coefficients(self) -> bool:
        return bool(self.alphabet.unit_mask[self.a] and self.alphabet.unit_mask[self.b])

    def apply(self, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
        al = self.alphabet
        return al.add_table[al.mul_table[self.a, np.asarray(s1)], al.mul_table[self.b, np.asarray(s2)]]

    def __str__(self) -> str:
        return f"({self.a},{self.b}) over {self.alphabet}"


def nc_map(m: NcMap, s1: Element | int, s2: Element | int) -> Element:
    values = [int(s) for s in (s1, s2)]
    for s in (s1, s2):
        if isinstance(s, Element) and s.alphabet != m.alphabet:
            raise AlphabetMismatchError(f"{s!r} is not an element of {m.alphabet}")
    return Element(int(m.apply(values[0], values[1])), m.alphabet)


def unit_pairs(alphabet: AlphabetSpec) -> list[tuple[int, int]]:
    """Every (a, b) with both coefficients units, in lexicographic order."""
    values = [u.value for u in units(alphabet)]
    return [(a, b) for a in values for b in values]


def check_exclusive_law(m: NcMap) -> bool:
    """Fixing either argument, the map must be injective in the other."""
    q = m.alphabet.size
    v = np.arange(q)
    table = m.apply(v[:, None], v[None, :])
    rows_ok = all(len(np.unique(table[i, :])) == q for i in range(q))
    cols_ok = all(len(np.unique(table[:, j])) == q for j in range(q))
    return rows_ok and cols_ok


def broadcast_recover(
    self_msg: np.ndarray,
    nc_msg: np.ndarray,
    m: NcMap,
    which_user: Literal[1, 2],
) -> np.ndarray:
    """Partner's message from one's own message and the relay broadcast.

    ``which_user`` is the user doing the recovery: user 1 solves for s2,
    user 2 solves for s1.
    """
    if which_user not in (1, 2):
        raise ValueError(f"which_user must be 1 or 2, got {which_user}")
    if not m.has_unit_coefficients:
        raise DomainError(f"map {m} has a non-unit coefficient; recovery is not unique")
    al = m.alphabet
    own_coef, other_coef = (m.a, m.b) if which_user == 1 else (m.b, m.a)
    residual = al.add_table[np.asarray(nc_msg), al.neg_table[al.mul_table[own_coef, np.asarray(self_msg)]]]
    return al.mul_table[al.inv_table[other_coef], residual]
