from __future__ import annotations

import logging

import numpy as np

from pncsim.ldpc.code import LdpcCode, syndrome
from pncsim.ldpc.decoder import DecodeResult, DecoderConfig

logger = logging.getLogger(__name__)

LLR_CLIP = 50.0
_TANH_CLIP = 1.0 - 1e-15


def leave_one_out_product(values: np.ndarray) -> np.ndarray:
    """Product of every entry but one along the last axis."""
    ones = np.ones_like(values[..., :1])
    fwd = np.cumprod(np.concatenate([ones, values[..., :-1]], axis=-1), axis=-1)
    bwd = np.cumprod(np.concatenate([ones, values[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return fwd * bwd


def decode_binary_spa(bit_llrs: np.ndarray, code: LdpcCode, cfg: DecoderConfig) -> DecodeResult:
    """Flooding sum-product over GF(2) with the tanh rule.

    LLRs are log P(0)/P(1). A position whose posterior LLR is exactly zero
    counts as erased, and an erased word never reports convergence.
    """
    if not code.alphabet.is_binary:
        raise ValueError(f"binary SPA needs a GF(2) code, got {code.alphabet}")
    llr = np.clip(np.asarray(bit_llrs, dtype=float), -LLR_CLIP, LLR_CLIP)
    if llr.shape != (code.n,):
        raise ValueError(f"expected {code.n} LLRs, got shape {llr.shape}")

    edge_vars, var_edges = code.edge_vars, code.var_edges
    to_check = llr[edge_vars]
    to_var = np.zeros_like(to_check)
    totals = llr.copy()
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iter + 1):
        t = np.tanh(to_check.reshape(code.m, code.dc) / 2.0)
        others = np.clip(leave_one_out_product(t), -_TANH_CLIP, _TANH_CLIP)
        update = 2.0 * np.arctanh(others).reshape(-1)
        to_var = update if cfg.damping == 1.0 else cfg.damping * update + (1.0 - cfg.damping) * to_var
        totals = llr + to_var[var_edges].sum(axis=1)
        to_check = totals[edge_vars] - to_var
        if cfg.early_stop and _is_codeword(code, totals):
            converged = True
            break
    else:
        converged = _is_codeword(code, totals)

    hard = (totals < 0).astype(np.int64)
    logger.debug("Binary SPA: converged=%s after %d iterations", converged, iterations)
    return DecodeResult(hard, converged, iterations, totals)


def _is_codeword(code: LdpcCode, totals: np.ndarray) -> bool:
    if not np.all(totals != 0):
        return False
    return not syndrome(code, (totals < 0).astype(np.int64)).any()
