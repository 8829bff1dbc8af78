"""Self-checks behind ``python -m pncsim verify``.

Each check compares a production routine against a brute-force oracle or a
closed-form count on toy instances and returns a CheckResult; nothing here
raises on a failed comparison.
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import Callable, NamedTuple

import numpy as np

from pncsim.algebra import AlphabetSpec
from pncsim.channel import rng_from
from pncsim.ldpc import MessageGroup, OpCounter, check_update_direct, check_update_fft
from pncsim.modem import pam, psk_gray
from pncsim.pnc import (
    NcMap,
    broadcast_recover,
    build_superimposed_set,
    check_exclusive_law,
    demap_nc_symbol_prob,
    demap_pair_prob,
    detect_ambiguity,
)
from pncsim.services.simulation import BINARY_SCHEMES, make_config, run_point

logger = logging.getLogger(__name__)

ROTATION_8PSK = math.pi / 8


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _alphabets(max_size: int = 8) -> list[AlphabetSpec]:
    fields = [AlphabetSpec.field(r) for r in range(1, 4) if 2**r <= max_size]
    rings = [AlphabetSpec.ring(M) for M in (2, 3, 4, 6, 8) if M <= max_size]
    return fields + rings


def exclusive_law_brute_force(m: NcMap) -> bool:
    q = m.alphabet.size
    for s, t, u in itertools.product(range(q), repeat=3):
        if t != u and (m.apply(t, s) == m.apply(u, s) or m.apply(s, t) == m.apply(s, u)):
            return False
    return True


def check_exclusive_law_oracle() -> CheckResult:
    mismatches = 0
    maps = 0
    for alphabet in _alphabets():
        for a, b in itertools.product(range(alphabet.size), repeat=2):
            m = NcMap(alphabet, a, b)
            maps += 1
            if check_exclusive_law(m) != exclusive_law_brute_force(m):
                mismatches += 1
            if m.has_unit_coefficients and not check_exclusive_law(m):
                mismatches += 1
    return CheckResult("exclusive-law", mismatches == 0, f"{maps} maps, {mismatches} mismatches")


def check_superimposed_counts() -> CheckResult:
    same = build_superimposed_set(psk_gray(8), psk_gray(8))
    rotated = build_superimposed_set(psk_gray(8), psk_gray(8, ROTATION_8PSK))
    bpsk = build_superimposed_set(psk_gray(2), psk_gray(2))
    counts = (rotated.n_entries, same.n_entries, bpsk.n_entries)
    same_report = detect_ambiguity(same, None)
    rotated_report = detect_ambiguity(rotated, None)
    passed = (
        counts == (64, 33, 3)
        and not same_report.is_ambiguous
        and not same_report.unique_pair
        and rotated_report.unique_pair
    )
    return CheckResult(
        "superimposed-counts",
        passed,
        f"entries rotated/same/bpsk = {counts}, same-set XOR ambiguous={same_report.is_ambiguous}",
    )


def check_transform_equivalence(messages: int = 10_000, dc: int = 4, seed: int = 7) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for alphabet in (AlphabetSpec.field(1), AlphabetSpec.field(2), AlphabetSpec.field(3),
                     AlphabetSpec.ring(4)):
        for group in (MessageGroup.base(alphabet), MessageGroup.pair(alphabet)):
            checks = max(1, messages // dc)
            msgs = rng.random((checks, dc, group.size)) + 1e-3
            msgs /= msgs.sum(axis=-1, keepdims=True)
            direct = check_update_direct(group, msgs)
            fft = check_update_fft(group, msgs)
            worst = max(worst, float(np.max(np.abs(direct - fft) / np.maximum(np.abs(direct), 1e-300))))
    return CheckResult(
        "transform-equivalence",
        worst <= 1e-9,
        f"{messages} messages per group, max relative deviation {worst:.3e}",
    )


def check_complexity_scaling(dc: int = 6) -> CheckResult:
    """Direct/transform op ratio against theta^2 / (theta log2 theta)."""
    details = []
    passed = True
    for M in (4, 8):
        group = MessageGroup.pair(AlphabetSpec.field(int(math.log2(M))))
        msgs = np.full((1, dc, group.size), 1.0 / group.size)
        direct, fft = OpCounter(), OpCounter()
        check_update_direct(group, msgs, direct)
        check_update_fft(group, msgs, fft)
        theta = group.size
        normalized = (direct.per_check() / fft.per_check()) / (theta / math.log2(theta))
        passed &= 0.5 <= normalized <= 2.0
        details.append(f"theta={theta}: {normalized:.2f}")
    return CheckResult("complexity-scaling", passed, ", ".join(details))


def check_demapper_oracle(samples: int = 200, seed: int = 11) -> CheckResult:
    rng = rng_from(seed)
    ca, cb = pam(4), pam(4, [1.0, 1.5, 1.0])
    h1, h2 = 0.9 + 0.2j, -0.4 + 0.7j
    sset = build_superimposed_set(ca, cb, h1, h2)
    m = NcMap(AlphabetSpec.ring(4), 1, 3)
    noise_var = 0.5
    y = rng.standard_normal(samples) + 1j * rng.standard_normal(samples)

    pairs = list(itertools.product(range(4), repeat=2))
    like = np.array([
        [np.exp(-abs(v - (h1 * ca.point_of_symbol[s1] + h2 * cb.point_of_symbol[s2])) ** 2 / noise_var)
         for s1, s2 in pairs]
        for v in y
    ])
    pair_oracle = like / like.sum(axis=1, keepdims=True)
    nc_oracle = np.zeros((samples, 4))
    for p, (s1, s2) in enumerate(pairs):
        nc_oracle[:, int(m.apply(s1, s2))] += pair_oracle[:, p]

    ok = np.allclose(demap_pair_prob(y, sset, noise_var), pair_oracle, rtol=1e-9, atol=1e-15)
    ok &= np.allclose(demap_nc_symbol_prob(y, sset, m, noise_var), nc_oracle, rtol=1e-9, atol=1e-15)
    return CheckResult("demapper-oracle", bool(ok), f"{samples} samples against Bayes enumeration")


def _noiseless_options(scheme: str, pairs: int) -> dict:
    if scheme in BINARY_SCHEMES:
        code = {"n": 24, "k": 12, "dv": 2, "dc": 4, "seed": 3}
        modulation = {"kind": "psk", "order": 8, "rotation_b": ROTATION_8PSK}
        channel = {"kind": "awgn"}
    else:
        code = {"n": 8, "k": 4, "dv": 2, "dc": 4, "seed": 3}
        modulation = {"kind": "pam", "order": 4}
        channel = {"kind": "block-rayleigh", "blocks": 2}
    return {
        "scheme": scheme,
        "code": code,
        "modulation": modulation,
        "channel": channel,
        "snr_grid": [0.0],
        "noiseless": True,
        "stopping": {"min_frame_errors": 1, "max_frames": pairs},
        "decoder": {"max_iter": 20},
        "reproducible": True,
    }


def check_noiseless_receivers(pairs: int = 100) -> CheckResult:
    failed = []
    for scheme in ("xor-cd", "iter-xor-cd", "mud-xor", "nc-cd", "cd-nc", "mud-nc"):
        point = run_point(make_config(**_noiseless_options(scheme, pairs)), 0.0)
        if point.frame_errors:
            failed.append(scheme)
    return CheckResult(
        "noiseless-receivers",
        not failed,
        f"all six exact over {pairs} pairs" if not failed else f"failed: {failed}",
    )


def check_broadcast_recovery(trials: int = 100, seed: int = 5) -> CheckResult:
    rng = rng_from(seed)
    bad = 0
    for alphabet in (AlphabetSpec.ring(4), AlphabetSpec.field(3)):
        for a, b in itertools.product(np.flatnonzero(alphabet.unit_mask), repeat=2):
            m = NcMap(alphabet, int(a), int(b))
            s1 = rng.integers(0, alphabet.size, size=trials)
            s2 = rng.integers(0, alphabet.size, size=trials)
            nc = m.apply(s1, s2)
            bad += int(np.any(broadcast_recover(s1, nc, m, 1) != s2))
            bad += int(np.any(broadcast_recover(s2, nc, m, 2) != s1))
    return CheckResult("broadcast-recovery", bad == 0, f"{bad} failing maps")


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "exclusive-law": check_exclusive_law_oracle,
    "superimposed-counts": check_superimposed_counts,
    "transform-equivalence": check_transform_equivalence,
    "complexity-scaling": check_complexity_scaling,
    "demapper-oracle": check_demapper_oracle,
    "broadcast-recovery": check_broadcast_recovery,
    "noiseless-receivers": check_noiseless_receivers,
}


def run_verification(names: list[str] | None = None) -> list[CheckResult]:
    selected = list(CHECKS) if not names else names
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    results = []
    for name in selected:
        result = CHECKS[name]()
        log = logger.info if result.passed else logger.error
        log("%s: %s (%s)", name, "ok" if result.passed else "FAILED", result.detail)
        results.append(result)
    return results
