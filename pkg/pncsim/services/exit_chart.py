"""Transfer curves of the XOR demapper for iterative XOR-CD.

A-priori LLRs are modelled as consistent Gaussian with variance sigma^2 and
mean sigma^2/2, so their mutual information with the bits is J(sigma).
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from pncsim.channel import ChannelModel, draw_realization, rng_from, snr_to_noise_var, transmit_mac
from pncsim.modem import Constellation, modulate
from pncsim.pnc.demappers import demap_xor_bit_llr
from pncsim.pnc.superimposed import build_superimposed_set

logger = logging.getLogger(__name__)

# Curve-fit constants of the J-function approximation
_H1, _H2, _H3 = 0.3073, 0.8935, 1.1064
_SIGMA_MAX = 100.0


class TransferPoint(NamedTuple):
    ia: float
    ie: float


def j_function(sigma: float) -> float:
    sigma = float(sigma)
    if sigma <= 0.0:
        return 0.0
    return float((1.0 - 2.0 ** (-_H1 * sigma ** (2.0 * _H2))) ** _H3)


def inverse_j_function(mi: float) -> float:
    if not 0.0 <= mi <= 1.0:
        raise ValueError(f"mutual information must lie in [0, 1], got {mi}")
    if mi == 0.0:
        return 0.0
    if mi >= j_function(_SIGMA_MAX):
        return _SIGMA_MAX
    return float(brentq(lambda s: j_function(s) - mi, 0.0, _SIGMA_MAX, xtol=1e-12))


def mutual_information(llrs: np.ndarray, bits: np.ndarray) -> float:
    """Time-average estimate of I(bit; LLR) for LLRs defined as log P(0)/P(1)."""
    llrs = np.asarray(llrs, dtype=float)
    signs = 1.0 - 2.0 * np.asarray(bits, dtype=float)
    return float(1.0 - np.mean(np.logaddexp(0.0, -signs * llrs)) / np.log(2.0))


def gaussian_priors(bits: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    signs = 1.0 - 2.0 * np.asarray(bits, dtype=float)
    return signs * sigma**2 / 2.0 + sigma * rng.standard_normal(signs.shape)


def demapper_transfer(
    constellations: tuple[Constellation, Constellation],
    snr_db: float,
    ia_grid: Sequence[float],
    n_symbols: int = 20000,
    seed: int = 0,
    imbalance_db: float = 0.0,
) -> list[TransferPoint]:
    """(I_A, I_E) of the XOR demapper on AWGN for each a-priori information level."""
    ca, cb = constellations
    model = ChannelModel("awgn", imbalance_db=imbalance_db)
    noise_var = snr_to_noise_var(snr_db)
    sym_seed, noise_seed, prior_seed = np.random.SeedSequence(seed).spawn(3)

    rng = rng_from(sym_seed)
    s1 = rng.integers(0, ca.order, size=n_symbols)
    s2 = rng.integers(0, cb.order, size=n_symbols)
    realization = draw_realization(model, n_symbols, seed, noise_var)
    y = transmit_mac(modulate(s1, ca), modulate(s2, cb), realization, noise_var, noise_seed)
    sset = build_superimposed_set(ca, cb, realization.h1_blocks[0], realization.h2_blocks[0])
    xor_bits = (ca.bit_matrix[s1] ^ cb.bit_matrix[s2]).reshape(-1)

    prior_rng = rng_from(prior_seed)
    points = []
    for ia in ia_grid:
        sigma = inverse_j_function(float(ia))
        prior = gaussian_priors(xor_bits, sigma, prior_rng) if sigma > 0 else None
        extrinsic = demap_xor_bit_llr(y, sset, noise_var, prior)
        points.append(TransferPoint(float(ia), mutual_information(extrinsic, xor_bits)))
    logger.info("Demapper transfer at %.2f dB over %d a-priori levels", snr_db, len(points))
    return points


def write_transfer_csv(points: Sequence[TransferPoint], path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["ia", "ie"])
            for p in points:
                writer.writerow([
                    np.format_float_positional(p.ia, unique=True, trim="0"),
                    np.format_float_positional(p.ie, unique=True, trim="0"),
                ])
    except OSError as exc:
        raise OSError(f"cannot write transfer curve to {path}: {exc}") from exc
    logger.info("Wrote %d transfer points to %s", len(points), path)
    return path
