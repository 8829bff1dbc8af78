from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from numba import njit
from scipy import sparse

from pncsim.algebra import AlphabetSpec
from pncsim.config import settings
from pncsim.errors import ConstructionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EncoderPlan:
    """Reduced row-echelon form of H restricted to unit pivots.

    Parity symbol i sits at ``pivot_cols[i]`` and equals minus the combination
    ``reduced[i]`` of the non-pivot symbols. Non-pivot positions beyond the
    ``k`` information positions (redundant checks) are held at zero.
    """

    pivot_cols: np.ndarray
    nonpivot_cols: np.ndarray
    info_cols: np.ndarray
    reduced: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """Regular LDPC code with alphabet-valued parity-check entries.

    Row i of H has nonzero entries ``check_vals[i]`` at columns
    ``check_vars[i]``. Edges are numbered row-major, edge ``i*dc + t``.
    """

    n: int
    k: int
    alphabet: AlphabetSpec
    check_vars: np.ndarray
    check_vals: np.ndarray
    encoder_plan: EncoderPlan
    seed: int | None = None

    @property
    def m(self) -> int:
        return self.check_vars.shape[0]

    @property
    def dc(self) -> int:
        return self.check_vars.shape[1]

    @cached_property
    def dv(self) -> int:
        return int(self.var_edges.shape[1])

    @property
    def rate(self) -> float:
        return self.k / self.n

    @cached_property
    def edge_vars(self) -> np.ndarray:
        return self.check_vars.reshape(-1)

    @cached_property
    def edge_vals(self) -> np.ndarray:
        return self.check_vals.reshape(-1)

    @cached_property
    def var_edges(self) -> np.ndarray:
        """Edge indices per variable node, shape (n, dv)."""
        order = np.argsort(self.edge_vars, kind="stable")
        degrees = np.bincount(self.edge_vars, minlength=self.n)
        if degrees.min() != degrees.max():
            raise ConstructionError("column degrees are not regular")
        return order.reshape(self.n, int(degrees[0]))

    def to_sparse(self) -> sparse.csr_matrix:
        rows = np.repeat(np.arange(self.m), self.dc)
        return sparse.csr_matrix(
            (self.edge_vals, (rows, self.edge_vars)), shape=(self.m, self.n), dtype=np.int64
        )

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    @cached_property
    def girth_at_least_6(self) -> bool:
        incidence = self.to_sparse().astype(bool).astype(np.int64)
        overlap = (incidence.T @ incidence).tolil()
        overlap.setdiag(0)
        return overlap.tocsr().max() <= 1

    @classmethod
    def from_checks(
        cls,
        check_vars: np.ndarray,
        check_vals: np.ndarray,
        alphabet: AlphabetSpec,
        n: int,
        k: int | None = None,
        seed: int | None = None,
    ) -> LdpcCode:
        check_vars = np.asarray(check_vars, dtype=np.int64)
        check_vals = np.asarray(check_vals, dtype=np.int64)
        m = check_vars.shape[0]
        k = n - m if k is None else k
        plan = build_encoder_plan(check_vars, check_vals, alphabet, n, k)
        if plan is None:
            raise ConstructionError(
                f"parity-check matrix over {alphabet} cannot be reduced with unit pivots"
            )
        return cls(n, k, alphabet, check_vars, check_vals, plan, seed)


# -- progressive edge growth ----------------------------------------------


@njit(cache=True)
def _peg_place(n, m, dv, dc, seed):
    np.random.seed(seed)
    var_adj = np.full((n, dv), -1, np.int64)
    chk_adj = np.full((m, dc), -1, np.int64)
    chk_deg = np.zeros(m, np.int64)
    depth = np.empty(m, np.int64)
    frontier = np.empty(m, np.int64)
    nxt = np.empty(m, np.int64)
    short_cycles = 0
    for j in range(n):
        for t in range(dv):
            depth[:] = -1
            n_front = 0
            for u in range(t):
                depth[var_adj[j, u]] = 0
                frontier[n_front] = var_adj[j, u]
                n_front += 1
            # -1 selects among unreached checks, otherwise the level to pick from
            target = -1
            level = 0
            if t > 0:
                while True:
                    n_next = 0
                    for f in range(n_front):
                        c = frontier[f]
                        for a in range(chk_deg[c]):
                            v = chk_adj[c, a]
                            if v == j:
                                continue
                            for b in range(dv):
                                c2 = var_adj[v, b]
                                if c2 >= 0 and depth[c2] < 0:
                                    depth[c2] = level + 1
                                    nxt[n_next] = c2
                                    n_next += 1
                    if n_next == 0:
                        break
                    remaining = 0
                    for c in range(m):
                        if depth[c] < 0 and chk_deg[c] < dc:
                            remaining += 1
                    if remaining == 0:
                        target = level + 1
                        break
                    level += 1
                    for f in range(n_next):
                        frontier[f] = nxt[f]
                    n_front = n_next
            best = -1
            best_deg = dc
            ties = 0
            for c in range(m):
                if chk_deg[c] >= dc:
                    continue
                if target < 0:
                    if depth[c] >= 0:
                        continue
                elif depth[c] != target:
                    continue
                d = chk_deg[c]
                if d < best_deg:
                    best_deg = d
                    best = c
                    ties = 1
                elif d == best_deg:
                    ties += 1
                    if np.random.random() * ties < 1.0:
                        best = c
            if best < 0:
                return var_adj, chk_adj, -1
            if target == 1:
                short_cycles += 1
            var_adj[j, t] = best
            chk_adj[best, chk_deg[best]] = j
            chk_deg[best] += 1
    return var_adj, chk_adj, short_cycles


def girth6_feasible(n: int, m: int, dv: int) -> bool:
    """Counting bound: every pair of checks may share at most one variable."""
    return n * math.comb(dv, 2) <= math.comb(m, 2)


# -- encoder ----------------------------------------------------------------


@njit(cache=True)
def _row_reduce(mat, add, mul, neg, inv, unit):
    m, n = mat.shape
    pivot_col = np.full(m, -1, np.int64)
    for i in range(m):
        col = -1
        nonzero = False
        for j in range(n - 1, -1, -1):
            v = mat[i, j]
            if v != 0:
                nonzero = True
                if unit[v]:
                    col = j
                    break
        if col < 0:
            if nonzero:
                return pivot_col, False
            continue
        f = inv[mat[i, col]]
        for j in range(n):
            mat[i, j] = mul[f, mat[i, j]]
        for r in range(m):
            if r == i:
                continue
            c = mat[r, col]
            if c == 0:
                continue
            g = neg[c]
            for j in range(n):
                if mat[i, j] != 0:
                    mat[r, j] = add[mat[r, j], mul[g, mat[i, j]]]
        pivot_col[i] = col
    return pivot_col, True


def build_encoder_plan(
    check_vars: np.ndarray,
    check_vals: np.ndarray,
    alphabet: AlphabetSpec,
    n: int,
    k: int,
) -> EncoderPlan | None:
    """Eliminate H with unit pivots; None when a row gets stuck on non-units."""
    m = check_vars.shape[0]
    mat = np.zeros((m, n), dtype=np.int64)
    mat[np.repeat(np.arange(m), check_vars.shape[1]), check_vars.reshape(-1)] = check_vals.reshape(-1)
    pivot_of_row, ok = _row_reduce(
        mat,
        alphabet.add_table,
        alphabet.mul_table,
        alphabet.neg_table,
        alphabet.inv_table,
        alphabet.unit_mask,
    )
    if not ok:
        return None
    rows = np.flatnonzero(pivot_of_row >= 0)
    pivot_cols = pivot_of_row[rows]
    nonpivot = np.setdiff1d(np.arange(n), pivot_cols)
    if len(nonpivot) < k:
        raise ConstructionError(f"code dimension {len(nonpivot)} is below k={k}")
    if len(rows) < m:
        logger.debug("Parity-check matrix has %d redundant rows", m - len(rows))
    return EncoderPlan(
        pivot_cols=pivot_cols,
        nonpivot_cols=nonpivot,
        info_cols=nonpivot[:k],
        reduced=mat[np.ix_(rows, nonpivot)],
    )


# -- public operations ------------------------------------------------------


def construct_regular(
    n: int,
    k: int,
    dv: int,
    dc: int,
    alphabet: AlphabetSpec,
    seed: int,
    retries: int | None = None,
) -> LdpcCode:
    """Seeded progressive-edge-growth construction of a regular (dv, dc) code.

    Entries are drawn uniformly from the units of the alphabet. Girth 6 is
    sought whenever the counting bound allows it; when every attempt still
    leaves a 4-cycle the search is repeated with 4-cycles allowed.
    """
    m = n - k
    if not (0 < k < n and dv >= 1 and dc >= 2):
        raise ConstructionError(f"invalid code parameters n={n} k={k} dv={dv} dc={dc}")
    if n * dv != m * dc:
        raise ConstructionError(f"degree equation fails: {n}*{dv} != {m}*{dc}")
    if dc > n or dv > m:
        raise ConstructionError(f"degrees dv={dv}, dc={dc} do not fit a {m}x{n} matrix")

    retries = settings.construction_retries if retries is None else retries
    want_girth6 = girth6_feasible(n, m, dv)
    if not want_girth6:
        logger.warning(
            "Girth 6 is impossible for n=%d m=%d dv=%d; allowing 4-cycles", n, m, dv
        )
    unit_values = np.flatnonzero(alphabet.unit_mask)

    for girth6 in (True, False) if want_girth6 else (False,):
        if not girth6 and want_girth6:
            logger.warning(
                "No girth-6 (%d,%d) code for n=%d m=%d in %d attempts; allowing 4-cycles",
                dv, dc, n, m, retries,
            )
        for attempt in range(retries):
            state = np.random.SeedSequence([seed, attempt])
            peg_seed = int(state.generate_state(1)[0])
            var_adj, chk_adj, short_cycles = _peg_place(n, m, dv, dc, peg_seed)
            if short_cycles < 0:
                logger.debug("PEG attempt %d ran out of checks", attempt)
                continue
            if girth6 and short_cycles > 0:
                logger.debug("PEG attempt %d produced %d 4-cycles", attempt, short_cycles)
                continue
            rng = np.random.default_rng(state)
            check_vals = unit_values[rng.integers(len(unit_values), size=chk_adj.shape)]
            plan = build_encoder_plan(chk_adj, check_vals, alphabet, n, k)
            if plan is None:
                logger.debug("Attempt %d is not encodable over %s", attempt, alphabet)
                continue
            code = LdpcCode(n, k, alphabet, chk_adj, check_vals, plan, seed)
            logger.info(
                "Constructed (%d,%d) regular (%d,%d) code over %s, rank %d, after %d attempt(s)",
                n, k, dv, dc, alphabet, plan.rank, attempt + 1,
            )
            return code

    raise ConstructionError(
        f"no valid ({n},{k}) ({dv},{dc}) code over {alphabet} after {retries} attempts"
    )


def encode(code: LdpcCode, info: np.ndarray) -> np.ndarray:
    info = np.asarray(info, dtype=np.int64)
    if info.shape != (code.k,):
        raise ValueError(f"expected {code.k} information symbols, got shape {info.shape}")
    if not code.alphabet.contains(info):
        raise ValueError(f"information symbols outside {code.alphabet}")
    alphabet = code.alphabet
    plan = code.encoder_plan
    word = np.zeros(code.n, dtype=np.int64)
    word[plan.info_cols] = info
    free = word[plan.nonpivot_cols]
    combo = alphabet.sum(alphabet.mul_table[plan.reduced, free[None, :]], axis=1)
    word[plan.pivot_cols] = alphabet.neg_table[combo]
    assert not syndrome(code, word).any(), "encoder plan produced a non-codeword"
    return word


def syndrome(code: LdpcCode, word: np.ndarray) -> np.ndarray:
    word = np.asarray(word, dtype=np.int64)
    if word.shape[-1] != code.n:
        raise ValueError(f"expected words of length {code.n}, got {word.shape[-1]}")
    terms = code.alphabet.mul_table[code.check_vals, word[..., code.check_vars]]
    return code.alphabet.sum(terms, axis=-1)


def information(code: LdpcCode, word: np.ndarray) -> np.ndarray:
    """Systematic part of a codeword."""
    return np.asarray(word)[..., code.encoder_plan.info_cols]


# -- alist I/O ----------------------------------------------------------------


def write_alist(code: LdpcCode, path: str | Path) -> None:
    """Nonbinary alist: sizes, degrees, then (index, value) pairs per column and row."""
    path = Path(path)
    lines = [
        f"{code.n} {code.m} {code.alphabet.size}",
        f"{code.dv} {code.dc}",
        " ".join([str(code.dv)] * code.n),
        " ".join([str(code.dc)] * code.m),
    ]
    rows_of_edge = np.repeat(np.arange(code.m), code.dc)
    for j in range(code.n):
        edges = code.var_edges[j]
        lines.append(" ".join(f"{rows_of_edge[e] + 1} {code.edge_vals[e]}" for e in edges))
    for i in range(code.m):
        lines.append(
            " ".join(f"{c + 1} {v}" for c, v in zip(code.check_vars[i], code.check_vals[i]))
        )
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write alist file {path}: {exc}") from exc
    logger.info("Wrote parity-check matrix to %s", path)


def read_alist(path: str | Path, alphabet: AlphabetSpec, k: int | None = None) -> LdpcCode:
    path = Path(path)
    try:
        tokens = [line.split() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    except OSError as exc:
        raise OSError(f"cannot read alist file {path}: {exc}") from exc
    try:
        n, m, q = (int(t) for t in tokens[0])
        dv, dc = (int(t) for t in tokens[1])
        col_degrees = [int(t) for t in tokens[2]]
        row_degrees = [int(t) for t in tokens[3]]
        row_lines = tokens[4 + n : 4 + n + m]
        check_vars = np.array([[int(t) - 1 for t in line[0::2]] for line in row_lines])
        check_vals = np.array([[int(t) for t in line[1::2]] for line in row_lines])
    except (ValueError, IndexError) as exc:
        raise ConstructionError(f"malformed alist file {path}: {exc}") from exc
    if q != alphabet.size:
        raise ConstructionError(f"{path} is over an alphabet of size {q}, expected {alphabet}")
    if set(col_degrees) != {dv} or set(row_degrees) != {dc} or check_vars.shape != (m, dc):
        raise ConstructionError(f"{path} does not describe a regular ({dv},{dc}) code")
    if not alphabet.unit_mask[check_vals].all():
        raise ConstructionError(f"{path} has entries that are not units of {alphabet}")
    return LdpcCode.from_checks(check_vars, check_vals, alphabet, n, k)
