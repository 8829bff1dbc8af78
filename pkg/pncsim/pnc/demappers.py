"""Soft demappers at the relay.

All likelihoods are log(exp(-|y - point|^2 / N0)) over the M^2 transmission
pairs of a superimposed set, combined with logsumexp so that nothing
underflows before the final normalization. Bit LLRs are log P(0)/P(1),
ordered MSB first within each symbol.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from pncsim.errors import DomainError
from pncsim.modem import Constellation
from pncsim.pnc.mapping import NcMap
from pncsim.pnc.superimposed import SuperimposedSet, detect_ambiguity

LLR_CLIP = 50.0
NOISE_FLOOR = 1e-12


def pair_loglik(y: np.ndarray, sset: SuperimposedSet, noise_var: float) -> np.ndarray:
    """(N, M^2) pair log-likelihoods; rows too far from every point are flat."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    n0 = max(float(noise_var), NOISE_FLOOR)
    with np.errstate(over="ignore", invalid="ignore"):
        ll = -np.abs(y[:, None] - sset.pair_points[None, :]) ** 2 / n0
    lost = ~np.isfinite(ll.max(axis=1))
    if lost.any():
        ll[lost] = 0.0
    return ll


def _softmax(logp: np.ndarray) -> np.ndarray:
    logp = logp - logp.max(axis=-1, keepdims=True)
    p = np.exp(logp)
    return p / p.sum(axis=-1, keepdims=True)


def _group_logsumexp(ll: np.ndarray, labels: np.ndarray, size: int) -> np.ndarray:
    """out[:, v] = logsumexp of ll over the columns labelled v."""
    out = np.full((ll.shape[0], size), -np.inf)
    for v in range(size):
        cols = labels == v
        if cols.any():
            out[:, v] = logsumexp(ll[:, cols], axis=1)
    return out


def _bit_llrs(ll: np.ndarray, bit_matrix: np.ndarray) -> np.ndarray:
    """ll is (N, P); bit_matrix[p, j] is the bit j carried by column p."""
    n_bits = bit_matrix.shape[1]
    llr = np.empty((ll.shape[0], n_bits))
    with np.errstate(invalid="ignore"):
        for j in range(n_bits):
            zero = bit_matrix[:, j] == 0
            llr[:, j] = logsumexp(ll[:, zero], axis=1) - logsumexp(ll[:, ~zero], axis=1)
    return np.nan_to_num(llr, nan=0.0, posinf=LLR_CLIP, neginf=-LLR_CLIP)


def _bit_log_probs(llrs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log P(bit=0), log P(bit=1) from LLRs."""
    return -np.logaddexp(0.0, -llrs), -np.logaddexp(0.0, llrs)


def bit_llrs_to_symbol_logprob(llrs: np.ndarray, constellation: Constellation) -> np.ndarray:
    """(N, M) symbol log-probabilities from independent per-bit LLRs."""
    r = constellation.bits_per_symbol
    llrs = np.clip(np.asarray(llrs, dtype=float).reshape(-1, r), -LLR_CLIP, LLR_CLIP)
    log0, log1 = _bit_log_probs(llrs)
    bits = constellation.bit_matrix
    # (N, 1, r) against (1, M, r)
    return np.where(bits[None, :, :] == 0, log0[:, None, :], log1[:, None, :]).sum(axis=-1)


def demap_xor_bit_llr(
    y: np.ndarray,
    sset: SuperimposedSet,
    noise_var: float,
    prior_llr: np.ndarray | None = None,
) -> np.ndarray:
    """Extrinsic LLRs of the XOR of the users' bit labels, flattened per symbol.

    ``prior_llr`` holds a-priori LLRs of the XOR bits in the same layout;
    pairs are weighted by the prior of their XOR label and each output has
    its own prior removed.
    """
    report = detect_ambiguity(sset, None)
    if report.is_ambiguous:
        raise DomainError(
            f"XOR mapping is ambiguous on {len(report.ambiguous_entries)} superimposed points"
        )
    ll = pair_loglik(y, sset, noise_var)
    bits = sset.xor_bit_matrix
    r = bits.shape[1]
    if prior_llr is None:
        return np.clip(_bit_llrs(ll, bits), -LLR_CLIP, LLR_CLIP).reshape(-1)

    prior = np.clip(np.asarray(prior_llr, dtype=float).reshape(-1, r), -LLR_CLIP, LLR_CLIP)
    if prior.shape[0] != ll.shape[0]:
        raise ValueError(f"prior covers {prior.shape[0]} symbols, samples cover {ll.shape[0]}")
    log0, log1 = _bit_log_probs(prior)
    weights = np.where(bits[None, :, :] == 0, log0[:, None, :], log1[:, None, :]).sum(axis=-1)
    full = _bit_llrs(ll + weights, bits)
    return np.clip(full - prior, -LLR_CLIP, LLR_CLIP).reshape(-1)


def demap_nc_symbol_prob(
    y: np.ndarray, sset: SuperimposedSet, nc_map: NcMap | None, noise_var: float
) -> np.ndarray:
    """(N, M) posterior of the NC symbol; ``nc_map`` None means XOR of bit labels."""
    ll = pair_loglik(y, sset, noise_var)
    per_symbol = _group_logsumexp(ll, sset.nc_values(nc_map), sset.order)
    return _softmax(per_symbol)


def demap_pair_prob(y: np.ndarray, sset: SuperimposedSet, noise_var: float) -> np.ndarray:
    """(N, M^2) posterior of the transmission pair, pair (s1, s2) at s1*M + s2."""
    return _softmax(pair_loglik(y, sset, noise_var))


def _require_unique_pair(sset: SuperimposedSet) -> None:
    if not detect_ambiguity(sset, None).unique_pair:
        raise DomainError(
            f"{sset.n_entries} superimposed points for {sset.order**2} pairs; "
            "multiuser detection needs a unique-pair design"
        )


def _prior_rows(prior: np.ndarray | None, n: int, order: int) -> np.ndarray:
    if prior is None:
        return np.zeros((n, order))
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (n, order):
        raise ValueError(f"expected a prior of shape {(n, order)}, got {prior.shape}")
    return prior


def _user_pair_logliks(
    y: np.ndarray,
    sset: SuperimposedSet,
    noise_var: float,
    prior_a: np.ndarray | None,
    prior_b: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Pair log-likelihoods seen by each user: weighted by the partner's prior only."""
    _require_unique_pair(sset)
    ll = pair_loglik(y, sset, noise_var)
    pa = _prior_rows(prior_a, ll.shape[0], sset.order)
    pb = _prior_rows(prior_b, ll.shape[0], sset.order)
    for_a = ll + pb[:, sset.sym_b]
    for_b = ll + pa[:, sset.sym_a]
    return for_a, for_b


def demap_user_bit_llr(
    y: np.ndarray,
    sset: SuperimposedSet,
    noise_var: float,
    prior_a: np.ndarray | None = None,
    prior_b: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Each user's bit LLRs from the superimposed signal.

    Priors are (N, M) symbol log-probabilities (uniform when absent). A user's
    output marginalizes over the partner weighted by the partner's prior and
    never includes its own prior, so both outputs are extrinsic.
    """
    for_a, for_b = _user_pair_logliks(y, sset, noise_var, prior_a, prior_b)
    ca, cb = sset.constellations
    llr_a = _bit_llrs(for_a, ca.bit_matrix[sset.sym_a])
    llr_b = _bit_llrs(for_b, cb.bit_matrix[sset.sym_b])
    return (
        np.clip(llr_a, -LLR_CLIP, LLR_CLIP).reshape(-1),
        np.clip(llr_b, -LLR_CLIP, LLR_CLIP).reshape(-1),
    )


def demap_user_symbol_prob(
    y: np.ndarray,
    sset: SuperimposedSet,
    noise_var: float,
    prior_a: np.ndarray | None = None,
    prior_b: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Each user's (N, M) symbol posterior, extrinsic in the same sense."""
    for_a, for_b = _user_pair_logliks(y, sset, noise_var, prior_a, prior_b)
    prob_a = _softmax(_group_logsumexp(for_a, sset.sym_a, sset.order))
    prob_b = _softmax(_group_logsumexp(for_b, sset.sym_b, sset.order))
    return prob_a, prob_b
