"""Nonbinary sum-product decoding: C-SPA over the code alphabet and G-SPA over
the pair alphabet of two users sharing one code.

Check nodes work on the permuted ("z") domain, z = h.x, where the parity
constraint is a plain group sum. Three check-node updates are offered:
direct convolution, transform-domain products (Walsh-Hadamard or DFT along
each coordinate), and truncated max-plus (EMS) in the log domain.
"""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np
from numba import njit

from pncsim.config import settings
from pncsim.ldpc.binary import leave_one_out_product
from pncsim.ldpc.code import LdpcCode, syndrome
from pncsim.ldpc.decoder import DecodeResult, DecoderConfig
from pncsim.ldpc.groups import MessageGroup, OpCounter

logger = logging.getLogger(__name__)

_TINY = 1e-300
_LOG_FLOOR = -700.0


def normalize(probs: np.ndarray) -> np.ndarray:
    """Rows summing to one; rows with no mass become uniform."""
    probs = np.maximum(probs, 0.0)
    total = probs.sum(axis=-1, keepdims=True)
    bad = ~(np.isfinite(total) & (total > 0))
    if bad.any():
        probs = np.where(bad, 1.0, probs)
        total = np.where(bad, probs.shape[-1], total)
    return probs / total


# -- check-node updates (z domain, leave-one-out, negation applied) ------------


def check_update_direct(
    group: MessageGroup, messages: np.ndarray, counter: OpCounter | None = None
) -> np.ndarray:
    """Forward-backward direct convolutions, O(dc * size^2) per check."""
    messages = np.asarray(messages, dtype=float)
    dc = messages.shape[-2]
    fwd = [messages[..., 0, :]]
    for t in range(1, dc - 1):
        fwd.append(group.convolve(fwd[-1], messages[..., t, :]))
    bwd = [messages[..., dc - 1, :]]
    for t in range(dc - 2, 0, -1):
        bwd.insert(0, group.convolve(messages[..., t, :], bwd[0]))
    # fwd[t] combines inputs 0..t, bwd[t-1] combines inputs t..dc-1
    out = [bwd[0]]
    for t in range(1, dc - 1):
        out.append(group.convolve(fwd[t - 1], bwd[t]))
    out.append(fwd[dc - 2])
    result = np.stack(out, axis=-2)[..., group.neg]
    if counter is not None:
        checks = int(np.prod(messages.shape[:-2]))
        counter.checks += checks
        counter.direct += checks * 3 * max(dc - 2, 0) * group.size**2
    return normalize(result)


def check_update_fft(
    group: MessageGroup, messages: np.ndarray, counter: OpCounter | None = None
) -> np.ndarray:
    """Products in the transform domain, O(dc * size * log2(size)) per check."""
    messages = np.asarray(messages, dtype=float)
    dc = messages.shape[-2]
    spectrum = group.transform(messages)
    others = np.moveaxis(leave_one_out_product(np.moveaxis(spectrum, -2, -1)), -1, -2)
    result = np.maximum(group.inverse_transform(others).real, _TINY)[..., group.neg]
    if counter is not None:
        checks = int(np.prod(messages.shape[:-2]))
        counter.checks += checks
        counter.transform += checks * 2 * dc * group.transform_cost
        counter.pointwise += checks * 3 * dc * group.size
    return normalize(result)


def gspa_check_update_2dfft(
    group: MessageGroup, messages: np.ndarray, counter: OpCounter | None = None
) -> np.ndarray:
    """Pair-alphabet check update with a transform along each pair coordinate."""
    if group.dims != 2:
        raise ValueError("2D transform update needs the pair message group")
    return check_update_fft(group, messages, counter)


@njit(cache=True)
def _truncate(msg, n_m, floor_offset):
    q = msg.shape[0]
    if n_m >= q:
        return msg.copy()
    order = np.argsort(-msg, kind="mergesort")
    out = np.full(q, msg[order[n_m - 1]] - floor_offset)
    for i in range(n_m):
        out[order[i]] = msg[order[i]]
    return out


@njit(cache=True)
def _max_plus(a, b, add, n_m, floor_offset):
    q = a.shape[0]
    a_order = np.argsort(-a, kind="mergesort")
    b_order = np.argsort(-b, kind="mergesort")
    keep = min(n_m, q)
    a_floor = -np.inf
    b_floor = -np.inf
    if keep < q:
        a_floor = a[a_order[keep - 1]] - floor_offset
        b_floor = b[b_order[keep - 1]] - floor_offset
    # Any output is at least the best entry of one side plus the floor of the other
    base = max(a[a_order[0]] + b_floor, a_floor + b[b_order[0]])
    out = np.full(q, base)
    for i in range(keep):
        ai = a_order[i]
        for j in range(keep):
            bj = b_order[j]
            s = add[ai, bj]
            v = a[ai] + b[bj]
            if v > out[s]:
                out[s] = v
    return out - out.max()


@njit(cache=True)
def _ems_checks(log_msgs, add, neg, n_m, floor_offset, offset):
    n_checks, dc, q = log_msgs.shape
    out = np.empty_like(log_msgs)
    trunc = np.empty((dc, q))
    fwd = np.empty((dc, q))
    bwd = np.empty((dc, q))
    for c in range(n_checks):
        for t in range(dc):
            trunc[t] = _truncate(log_msgs[c, t], n_m, floor_offset)
        fwd[0] = trunc[0]
        for t in range(1, dc - 1):
            fwd[t] = _max_plus(fwd[t - 1], trunc[t], add, n_m, floor_offset)
        bwd[dc - 1] = trunc[dc - 1]
        for t in range(dc - 2, 0, -1):
            bwd[t] = _max_plus(trunc[t], bwd[t + 1], add, n_m, floor_offset)
        for t in range(dc):
            if t == 0:
                row = bwd[1]
            elif t == dc - 1:
                row = fwd[dc - 2]
            else:
                row = _max_plus(fwd[t - 1], bwd[t + 1], add, n_m, floor_offset)
            top = row.max()
            for z in range(q):
                v = row[neg[z]] - top + offset
                out[c, t, z] = v if v < 0.0 else 0.0
    return out


def gspa_check_update_ems(
    group: MessageGroup,
    log_messages: np.ndarray,
    n_m: int,
    floor_offset: float | None = None,
    offset: float | None = None,
) -> np.ndarray:
    """Extended min-sum check update on max-zero log messages.

    Each message keeps its n_m most reliable entries; the rest sit
    ``floor_offset`` below the n_m-th value. Outputs are raised by the
    compensation ``offset`` and clipped so the maximum is 0.
    """
    floor_offset = settings.ems_floor_offset if floor_offset is None else floor_offset
    offset = settings.ems_offset if offset is None else offset
    if not 1 <= n_m <= group.size:
        raise ValueError(f"n_m must lie in [1, {group.size}], got {n_m}")
    log_messages = np.asarray(log_messages, dtype=float)
    shape = log_messages.shape
    flat = np.ascontiguousarray(log_messages.reshape(-1, shape[-2], shape[-1]))
    flat = np.maximum(flat - flat.max(axis=-1, keepdims=True), _LOG_FLOOR)
    out = _ems_checks(flat, group.add_table, group.neg, n_m, float(floor_offset), float(offset))
    return out.reshape(shape)


def _check_update(
    group: MessageGroup, messages: np.ndarray, cfg: DecoderConfig, counter: OpCounter | None
) -> np.ndarray:
    if cfg.check_update == "direct":
        return check_update_direct(group, messages, counter)
    if cfg.check_update == "fft":
        return check_update_fft(group, messages, counter)
    logs = np.log(np.maximum(messages, _TINY))
    out = gspa_check_update_ems(
        group, logs, cfg.list_size(group.size), cfg.ems_floor_offset, cfg.ems_offset
    )
    return normalize(np.exp(out))


# -- belief propagation ------------------------------------------------------


def _assert_normalized(probs: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(probs)):
        raise AssertionError(f"{what}: non-finite message entries")
    if not np.allclose(probs.sum(axis=-1), 1.0, rtol=0.0, atol=1e-9):
        raise AssertionError(f"{what}: messages are not normalized")


def _belief_propagation(
    group: MessageGroup,
    code: LdpcCode,
    beliefs: np.ndarray,
    cfg: DecoderConfig,
    is_valid: Callable[[np.ndarray], bool],
    counter: OpCounter | None,
) -> DecodeResult:
    q = group.size
    beliefs = np.asarray(beliefs, dtype=float)
    if beliefs.shape != (code.n, q):
        raise ValueError(f"expected beliefs of shape {(code.n, q)}, got {beliefs.shape}")
    priors = normalize(beliefs)

    act = group.action[code.edge_vals]
    inv_act = group.inverse_action[code.edge_vals]
    var_edges = code.var_edges
    to_check = priors[code.edge_vars]
    to_var = np.full_like(to_check, 1.0 / q)
    posterior = priors
    hard = np.argmax(posterior, axis=1)
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iter + 1):
        permuted = np.take_along_axis(to_check, inv_act, axis=1).reshape(code.m, code.dc, q)
        update = _check_update(group, permuted, cfg, counter).reshape(-1, q)
        update = np.take_along_axis(update, act, axis=1)
        if cfg.damping < 1.0:
            update = normalize(cfg.damping * update + (1.0 - cfg.damping) * to_var)
        to_var = update

        incoming = to_var[var_edges]
        posterior = normalize(priors * np.prod(incoming, axis=1))
        others = np.moveaxis(leave_one_out_product(np.moveaxis(incoming, 1, -1)), -1, 1)
        to_check[var_edges] = normalize(priors[:, None, :] * others)
        if settings.debug_checks:
            _assert_normalized(to_var, "check-to-variable")
            _assert_normalized(to_check, "variable-to-check")

        hard = np.argmax(posterior, axis=1)
        if cfg.early_stop and is_valid(hard):
            converged = True
            break
    else:
        converged = is_valid(hard)

    logger.debug(
        "BP over %d-ary messages: converged=%s after %d iterations", q, converged, iterations
    )
    return DecodeResult(hard, converged, iterations, posterior)


def decode_cspa(
    beliefs: np.ndarray,
    code: LdpcCode,
    cfg: DecoderConfig,
    counter: OpCounter | None = None,
) -> DecodeResult:
    """Conventional sum-product over the code alphabet; ties go to the lowest symbol."""
    group = MessageGroup.base(code.alphabet)
    return _belief_propagation(
        group, code, beliefs, cfg, lambda hard: not syndrome(code, hard).any(), counter
    )


def split_pairs(pairs: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.asarray(pairs)
    return pairs // size, pairs % size


def decode_gspa(
    pair_beliefs: np.ndarray,
    code: LdpcCode,
    cfg: DecoderConfig,
    counter: OpCounter | None = None,
) -> DecodeResult:
    """Generalized sum-product over the M^2-ary pair alphabet.

    A pair vector is valid when both coordinate streams are codewords.
    """
    group = MessageGroup.pair(code.alphabet)

    def both_valid(hard: np.ndarray) -> bool:
        first, second = split_pairs(hard, code.alphabet.size)
        return not syndrome(code, first).any() and not syndrome(code, second).any()

    return _belief_propagation(group, code, pair_beliefs, cfg, both_valid, counter)
