"""The relay's view of the constellation pair: the set of points h1*x1 + h2*x2,
which transmission pairs land on each, and what that means for NC mapping.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from pncsim.algebra import AlphabetSpec
from pncsim.config import settings
from pncsim.modem import Constellation
from pncsim.pnc.mapping import NcMap, check_exclusive_law, unit_pairs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuperimposedEntry:
    point: complex
    pairs: tuple[tuple[int, int], ...]
    nc_symbols: frozenset[int]


@dataclass(frozen=True, eq=False)
class SuperimposedSet:
    """Pairs are indexed by symbol values, pair (s1, s2) at s1*M + s2.

    ``nc_map`` None means the bitwise XOR of the users' bit labels, the map
    XOR-CD decodes.
    """

    constellations: tuple[Constellation, Constellation]
    h1: complex
    h2: complex
    tolerance: float
    nc_map: NcMap | None
    pair_points: np.ndarray
    entry_of_pair: np.ndarray

    @property
    def order(self) -> int:
        return self.constellations[0].order

    @cached_property
    def sym_a(self) -> np.ndarray:
        return np.arange(self.order**2) // self.order

    @cached_property
    def sym_b(self) -> np.ndarray:
        return np.arange(self.order**2) % self.order

    @cached_property
    def xor_bits(self) -> np.ndarray:
        """Bitwise XOR of the users' bit labels, per pair."""
        ca, cb = self.constellations
        return ca.bits_of_symbol[self.sym_a] ^ cb.bits_of_symbol[self.sym_b]

    @cached_property
    def xor_bit_matrix(self) -> np.ndarray:
        r = self.constellations[0].bits_per_symbol
        shifts = np.arange(r - 1, -1, -1)
        return (self.xor_bits[:, None] >> shifts) & 1

    def nc_values(self, nc_map: NcMap | None = None) -> np.ndarray:
        if nc_map is None:
            return self.xor_bits
        return nc_map.apply(self.sym_a, self.sym_b)

    @property
    def n_entries(self) -> int:
        return int(self.entry_of_pair.max()) + 1

    @cached_property
    def entries(self) -> list[SuperimposedEntry]:
        nc = self.nc_values(self.nc_map)
        out = []
        for e in range(self.n_entries):
            members = np.flatnonzero(self.entry_of_pair == e)
            out.append(
                SuperimposedEntry(
                    point=complex(self.pair_points[members[0]]),
                    pairs=tuple((int(self.sym_a[p]), int(self.sym_b[p])) for p in members),
                    nc_symbols=frozenset(int(v) for v in nc[members]),
                )
            )
        return out


@dataclass(frozen=True)
class AmbiguityReport:
    is_exclusive: bool
    ambiguous_entries: tuple[int, ...]
    unique_pair: bool

    @property
    def is_ambiguous(self) -> bool:
        return bool(self.ambiguous_entries)


def pair_points(ca: Constellation, cb: Constellation, h1: complex, h2: complex) -> np.ndarray:
    return (h1 * ca.point_of_symbol[:, None] + h2 * cb.point_of_symbol[None, :]).reshape(-1)


def build_superimposed_set(
    ca: Constellation,
    cb: Constellation,
    h1: complex = 1.0,
    h2: complex = 1.0,
    tolerance: float | None = None,
    nc_map: NcMap | None = None,
) -> SuperimposedSet:
    """Enumerate the M^2 pairs and merge points closer than ``tolerance``."""
    if ca.order != cb.order:
        raise ValueError(f"users need equal orders, got {ca.order} and {cb.order}")
    tolerance = settings.merge_tolerance if tolerance is None else tolerance
    points = pair_points(ca, cb, h1, h2)
    xy = np.column_stack([points.real, points.imag])
    close = cKDTree(xy).query_pairs(tolerance, output_type="ndarray")
    graph = coo_matrix(
        (np.ones(len(close)), (close[:, 0], close[:, 1])) if len(close) else ([], ([], [])),
        shape=(len(points), len(points)),
    )
    _, labels = connected_components(graph, directed=False)
    # Renumber entries by their first pair so the order is deterministic
    _, first = np.unique(labels, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return SuperimposedSet(
        constellations=(ca, cb),
        h1=complex(h1),
        h2=complex(h2),
        tolerance=tolerance,
        nc_map=nc_map,
        pair_points=points,
        entry_of_pair=rank[labels],
    )


def detect_ambiguity(sset: SuperimposedSet, nc_map: NcMap | None = None) -> AmbiguityReport:
    nc = sset.nc_values(nc_map)
    ambiguous = []
    unique_pair = True
    for e in range(sset.n_entries):
        members = np.flatnonzero(sset.entry_of_pair == e)
        if len(members) > 1:
            unique_pair = False
        if len(np.unique(nc[members])) > 1:
            ambiguous.append(e)
    exclusive = True if nc_map is None else check_exclusive_law(nc_map)
    return AmbiguityReport(exclusive, tuple(ambiguous), unique_pair)


def effective_min_distance(points: np.ndarray, nc: np.ndarray) -> float:
    """Smallest distance between points whose NC symbols differ."""
    differ = nc[:, None] != nc[None, :]
    if not differ.any():
        return float("inf")
    dist = np.abs(points[:, None] - points[None, :])
    return float(dist[differ].min())


def select_coefficients(
    ca: Constellation,
    cb: Constellation,
    h1: complex,
    h2: complex,
    alphabet: AlphabetSpec,
) -> NcMap:
    """Unit pair maximizing the effective minimum distance; ties go to the
    lexicographically smallest pair."""
    points = pair_points(ca, cb, h1, h2)
    s1 = np.arange(ca.order**2) // ca.order
    s2 = np.arange(ca.order**2) % ca.order
    best, best_dist = None, -1.0
    for a, b in unit_pairs(alphabet):
        candidate = NcMap(alphabet, a, b)
        dist = effective_min_distance(points, candidate.apply(s1, s2))
        if dist > best_dist * (1.0 + 1e-9) + 1e-15:
            best, best_dist = candidate, dist
    logger.debug("Selected coefficients %s, effective distance %.6g", best, best_dist)
    return best


def write_superimposed_csv(sset: SuperimposedSet, path: str | Path) -> AmbiguityReport:
    """One row per merged point: location, generating pairs, NC symbols."""
    path = Path(path)
    report = detect_ambiguity(sset, sset.nc_map)
    ambiguous = set(report.ambiguous_entries)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["entry", "re", "im", "pairs", "nc_symbols", "ambiguous"])
            for i, entry in enumerate(sset.entries):
                writer.writerow([
                    i,
                    repr(entry.point.real),
                    repr(entry.point.imag),
                    ";".join(f"{a}-{b}" for a, b in entry.pairs),
                    ";".join(str(v) for v in sorted(entry.nc_symbols)),
                    int(i in ambiguous),
                ])
    except OSError as exc:
        raise OSError(f"cannot write superimposed set to {path}: {exc}") from exc
    logger.info(
        "Wrote %d-entry superimposed set to %s (exclusive=%s, ambiguous=%d, unique_pair=%s)",
        sset.n_entries, path, report.is_exclusive, len(report.ambiguous_entries), report.unique_pair,
    )
    return report
