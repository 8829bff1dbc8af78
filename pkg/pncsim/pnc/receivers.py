"""The six relay receivers.

Every receiver takes the relay samples of one codeword, the shared code, the
two user constellations, the channel realization and the noise variance, and
returns a ``RelayDecision``. Binary schemes carry log2(M) code bits per
symbol, MSB first; nonbinary schemes carry one code symbol per channel use.
Under block fading the demappers run once per block with that block's
superimposed set; a single NC map serves the whole codeword.
"""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Literal, NamedTuple, Sequence

import numpy as np

from pncsim.channel import ChannelRealization
from pncsim.config import settings
from pncsim.ldpc import DecoderConfig, LdpcCode, decode_binary_spa, decode_cspa, decode_gspa
from pncsim.ldpc.decoder import CheckUpdate
from pncsim.ldpc.nonbinary import normalize, split_pairs
from pncsim.modem import Constellation
from pncsim.pnc.demappers import (
    LLR_CLIP,
    bit_llrs_to_symbol_logprob,
    demap_nc_symbol_prob,
    demap_pair_prob,
    demap_user_bit_llr,
    demap_user_symbol_prob,
    demap_xor_bit_llr,
)
from pncsim.pnc.mapping import NcMap, unit_pairs
from pncsim.pnc.superimposed import SuperimposedSet, build_superimposed_set, select_coefficients

logger = logging.getLogger(__name__)

Constellations = tuple[Constellation, Constellation]


class RelayDecision(NamedTuple):
    """What the relay would broadcast, plus diagnostics.

    ``nc`` holds code bits for binary schemes (XOR of the users' codewords)
    and code symbols for nonbinary ones; ``nc_map`` is None for XOR.
    """

    nc: np.ndarray
    converged: bool
    iterations: int
    nc_map: NcMap | None = None
    attempts: int = 1
    users: tuple[np.ndarray, np.ndarray] | None = None


def block_sets(
    constellations: Constellations, realization: ChannelRealization
) -> list[tuple[slice, SuperimposedSet]]:
    ca, cb = constellations
    return [
        (sl, build_superimposed_set(ca, cb, h1, h2))
        for sl, h1, h2 in zip(
            realization.block_slices(), realization.h1_blocks, realization.h2_blocks
        )
    ]


def _per_block(y: np.ndarray, sets: Sequence[tuple[slice, SuperimposedSet]], demap) -> np.ndarray:
    return np.concatenate([demap(y[sl], sset) for sl, sset in sets], axis=0)


def _check_binary(code: LdpcCode, constellations: Constellations, y: np.ndarray) -> None:
    if not code.alphabet.is_binary:
        raise ValueError(f"binary receivers need a GF(2) code, got {code.alphabet}")
    r = constellations[0].bits_per_symbol
    if code.n != r * len(y):
        raise ValueError(f"{len(y)} symbols carry {r * len(y)} bits, code length is {code.n}")


def _check_nonbinary(code: LdpcCode, constellations: Constellations, y: np.ndarray) -> None:
    if code.alphabet.size != constellations[0].order:
        raise ValueError(
            f"code over {code.alphabet} does not match a {constellations[0].order}-ary constellation"
        )
    if code.n != len(y):
        raise ValueError(f"code length {code.n} does not match {len(y)} samples")


def selected_map(
    constellations: Constellations, realization: ChannelRealization, code: LdpcCode
) -> NcMap:
    """Coefficients chosen from the first block's channel coefficients."""
    ca, cb = constellations
    return select_coefficients(
        ca, cb, realization.h1_blocks[0], realization.h2_blocks[0], code.alphabet
    )


# -- binary (BICM) receivers ---------------------------------------------------


def _xor_llrs(y, sets, noise_var, prior_llr=None) -> np.ndarray:
    if prior_llr is None:
        return _per_block(y, sets, lambda yb, s: demap_xor_bit_llr(yb, s, noise_var))
    r = sets[0][1].constellations[0].bits_per_symbol
    prior = prior_llr.reshape(-1, r)
    return np.concatenate(
        [demap_xor_bit_llr(y[sl], s, noise_var, prior[sl]) for sl, s in sets]
    )


def receive_xor_cd(
    y: np.ndarray,
    code: LdpcCode,
    constellations: Constellations,
    realization: ChannelRealization,
    noise_var: float,
    cfg: DecoderConfig,
) -> RelayDecision:
    """Demap XOR-bit LLRs symbol by symbol, then one binary SPA decode."""
    _check_binary(code, constellations, y)
    sets = block_sets(constellations, realization)
    result = decode_binary_spa(_xor_llrs(y, sets, noise_var), code, cfg)
    return RelayDecision(result.hard, result.converged, result.iterations)


def receive_iterative_xor_cd(
    y: np.ndarray,
    code: LdpcCode,
    constellations: Constellations,
    realization: ChannelRealization,
    noise_var: float,
    cfg: DecoderConfig,
    outer_iters: int | None = None,
    inner_iters: int | None = None,
) -> RelayDecision:
    """XOR-CD with extrinsic feedback from the decoder into the demapper.

    Each outer pass restarts the decoder for ``inner_iters`` iterations on
    the freshly demapped LLRs; the pass stops early once a codeword is found.
    """
    outer_iters = settings.outer_iters if outer_iters is None else outer_iters
    inner_iters = settings.inner_iters if inner_iters is None else inner_iters
    if outer_iters < 1 or inner_iters < 1:
        raise ValueError("outer and inner iteration counts must be >= 1")
    _check_binary(code, constellations, y)
    sets = block_sets(constellations, realization)
    inner = cfg.with_iterations(inner_iters)

    prior = None
    total = 0
    for _ in range(outer_iters):
        demapped = _xor_llrs(y, sets, noise_var, prior)
        result = decode_binary_spa(demapped, code, inner)
        total += result.iterations
        if result.converged:
            break
        prior = np.clip(result.posterior - demapped, -LLR_CLIP, LLR_CLIP)
    return RelayDecision(result.hard, result.converged, total)


def receive_mud_xor(
    y: np.ndarray,
    code: LdpcCode,
    constellations: Constellations,
    realization: ChannelRealization,
    noise_var: float,
    cfg: DecoderConfig,
    iterative: bool = False,
    exchange_rounds: int | None = None,
) -> RelayDecision:
    """Decode both users, then XOR the decoded codewords.

    With ``iterative`` the two decoders exchange extrinsic information
    through the demapper for up to ``exchange_rounds`` extra rounds.
    """
    _check_binary(code, constellations, y)
    rounds = settings.mud_exchange_rounds if exchange_rounds is None else exchange_rounds
    ca, cb = constellations
    sets = block_sets(constellations, realization)

    def demap(prior_a, prior_b):
        parts = [
            demap_user_bit_llr(
                y[sl], s, noise_var,
                None if prior_a is None else prior_a[sl],
                None if prior_b is None else prior_b[sl],
            )
            for sl, s in sets
        ]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    llr_a, llr_b = demap(None, None)
    res_a = decode_binary_spa(llr_a, code, cfg)
    res_b = decode_binary_spa(llr_b, code, cfg)
    iterations = max(res_a.iterations, res_b.iterations)
    if iterative:
        for _ in range(rounds):
            if res_a.converged and res_b.converged:
                break
            prior_a = bit_llrs_to_symbol_logprob(res_a.posterior - llr_a, ca)
            prior_b = bit_llrs_to_symbol_logprob(res_b.posterior - llr_b, cb)
            llr_a, llr_b = demap(prior_a, prior_b)
            res_a = decode_binary_spa(llr_a, code, cfg)
            res_b = decode_binary_spa(llr_b, code, cfg)
            iterations += max(res_a.iterations, res_b.iterations)

    return RelayDecision(
        res_a.hard ^ res_b.hard,
        res_a.converged and res_b.converged,
        iterations,
        users=(res_a.hard, res_b.hard),
    )


# -- nonbinary (CM) receivers --------------------------------------------------


def coefficient_candidates(
    selected: NcMap, strategy: Literal["selected", "all_pairs"]
) -> list[NcMap]:
    pairs = unit_pairs(selected.alphabet)
    if strategy == "all_pairs":
        return [NcMap(selected.alphabet, a, b) for a, b in pairs]
    if strategy != "selected":
        raise ValueError(f"unknown coefficient strategy {strategy!r}")
    rest = [NcMap(selected.alphabet, a, b) for a, b in pairs if (a, b) != selected.coefficients]
    return [selected, *rest]


def receive_nc_cd(
    y: np.ndarray,
    code: LdpcCode,
    constellations: Constellations,
    realization: ChannelRealization,
    noise_var: float,
    cfg: DecoderConfig,
    strategy: Literal["selected", "all_pairs"] = "selected",
) -> RelayDecision:
    """Decode the NC codeword directly with C-SPA, trying coefficient pairs in
    turn until one decodes to a zero syndrome."""
    _check_nonbinary(code, constellations, y)
    sets = block_sets(constellations, realization)
    selected = selected_map(constellations, realization, code)
    candidates = coefficient_candidates(selected, strategy)

    fallback = None
    total = 0
    for attempt, candidate in enumerate(candidates, start=1):
        beliefs = _per_block(
            y, sets, lambda yb, s, m=candidate: demap_nc_symbol_prob(yb, s, m, noise_var)
        )
        result = decode_cspa(beliefs, code, cfg)
        total += result.iterations
        logger.debug(
            "NC-CD attempt %d with %s: converged=%s", attempt, candidate, result.converged
        )
        if result.converged:
            return RelayDecision(result.hard, True, total, candidate, attempt)
        if candidate == selected:
            fallback = result
    return RelayDecision(fallback.hard, False, total, selected, len(candidates))


def receive_cd_nc(
    y: np.ndarray,
    code: LdpcCode,
    constellations: Constellations,
    realization: ChannelRealization,
    noise_var: float,
    cfg: DecoderConfig,
    check_update: CheckUpdate | None = None,
) -> RelayDecision:
    """G-SPA over the pair alphabet, then map the most likely pair per position."""
    _check_nonbinary(code, constellations, y)
    if check_update is not None:
        cfg = replace(cfg, check_update=check_update)
    sets = block_sets(constellations, realization)
    beliefs = _per_block(y, sets, lambda yb, s: demap_pair_prob(yb, s, noise_var))
    result = decode_gspa(beliefs, code, cfg)
    s1, s2 = split_pairs(result.hard, code.alphabet.size)
    nc_map = selected_map(constellations, realization, code)
    return RelayDecision(nc_map.apply(s1, s2), result.converged, result.iterations, nc_map, 1, (s1, s2))


def receive_mud_nc(
    y: np.ndarray,
    code: LdpcCode,
    constellations: Constellations,
    realization: ChannelRealization,
    noise_var: float,
    cfg: DecoderConfig,
    iterative: bool = False,
    exchange_rounds: int | None = None,
) -> RelayDecision:
    """Decode both users with C-SPA, then apply the selected NC map."""
    _check_nonbinary(code, constellations, y)
    rounds = settings.mud_exchange_rounds if exchange_rounds is None else exchange_rounds
    sets = block_sets(constellations, realization)

    def demap(prior_a, prior_b):
        parts = [
            demap_user_symbol_prob(
                y[sl], s, noise_var,
                None if prior_a is None else prior_a[sl],
                None if prior_b is None else prior_b[sl],
            )
            for sl, s in sets
        ]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    bel_a, bel_b = demap(None, None)
    res_a = decode_cspa(bel_a, code, cfg)
    res_b = decode_cspa(bel_b, code, cfg)
    iterations = max(res_a.iterations, res_b.iterations)
    if iterative:
        for _ in range(rounds):
            if res_a.converged and res_b.converged:
                break
            prior_a = _extrinsic_logprob(res_a.posterior, bel_a)
            prior_b = _extrinsic_logprob(res_b.posterior, bel_b)
            bel_a, bel_b = demap(prior_a, prior_b)
            res_a = decode_cspa(bel_a, code, cfg)
            res_b = decode_cspa(bel_b, code, cfg)
            iterations += max(res_a.iterations, res_b.iterations)

    nc_map = selected_map(constellations, realization, code)
    return RelayDecision(
        nc_map.apply(res_a.hard, res_b.hard),
        res_a.converged and res_b.converged,
        iterations,
        nc_map,
        1,
        (res_a.hard, res_b.hard),
    )


def _extrinsic_logprob(posterior: np.ndarray, channel: np.ndarray) -> np.ndarray:
    """Decoder posterior with the channel belief divided out, in the log domain."""
    tiny = 1e-300
    ext = normalize(np.maximum(posterior, tiny) / np.maximum(channel, tiny))
    return np.log(np.maximum(ext, tiny))
