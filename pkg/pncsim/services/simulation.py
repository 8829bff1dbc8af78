"""Monte Carlo link simulation of the multiple-access phase.

A frame draws two messages, encodes both with the shared code, modulates,
superimposes them at the relay and runs one relay receiver. Errors are
counted on the information part of the NC codeword, against the NC map of
the two true codewords.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from pncsim.algebra import AlphabetSpec
from pncsim.channel import (
    ChannelModel,
    ChannelRealization,
    draw_realization,
    frame_seed,
    rng_from,
    snr_to_noise_var,
    transmit_mac,
)
from pncsim.config import settings
from pncsim.errors import ConfigError
from pncsim.ldpc import DecoderConfig, LdpcCode, construct_regular, encode, information
from pncsim.ldpc.decoder import CheckUpdate
from pncsim.modem import Constellation, modulate, pam, psk_gray
from pncsim.pnc import (
    RelayDecision,
    build_superimposed_set,
    detect_ambiguity,
    receive_cd_nc,
    receive_iterative_xor_cd,
    receive_mud_nc,
    receive_mud_xor,
    receive_nc_cd,
    receive_xor_cd,
)
from pncsim.services.results import PointResult, SweepResult

logger = logging.getLogger(__name__)

Scheme = Literal["xor-cd", "iter-xor-cd", "mud-xor", "nc-cd", "cd-nc", "mud-nc"]
BINARY_SCHEMES = frozenset({"xor-cd", "iter-xor-cd", "mud-xor"})
MUD_SCHEMES = frozenset({"mud-xor", "mud-nc"})


class ModulationConfig(BaseModel):
    kind: Literal["psk", "pam"] = "psk"
    order: int = 8
    rotation_a: float = 0.0
    rotation_b: float = 0.0
    spacings_a: list[float] | None = None
    spacings_b: list[float] | None = None


class CodeConfig(BaseModel):
    n: int = Field(default_factory=lambda: settings.code_n)
    k: int = Field(default_factory=lambda: settings.code_k)
    dv: int = Field(default_factory=lambda: settings.code_dv)
    dc: int = Field(default_factory=lambda: settings.code_dc)
    seed: int = Field(default_factory=lambda: settings.code_seed)
    alphabet: Literal["auto", "binary", "field", "ring"] = "auto"


class ChannelConfig(BaseModel):
    kind: Literal["awgn", "block-rayleigh"] = "awgn"
    blocks: int = 1
    imbalance_db: float = 0.0


class StoppingConfig(BaseModel):
    min_frame_errors: int = Field(default_factory=lambda: settings.min_frame_errors)
    max_frames: int = Field(default_factory=lambda: settings.max_frames)


class DecoderOptions(BaseModel):
    max_iter: int = Field(default_factory=lambda: settings.max_iter)
    check_update: CheckUpdate = "fft"
    n_m: int | None = None
    outer_iters: int = Field(default_factory=lambda: settings.outer_iters)
    inner_iters: int = Field(default_factory=lambda: settings.inner_iters)
    coefficients: Literal["selected", "all_pairs"] = "selected"
    iterative_mud: bool = False


class SimulationConfig(BaseModel):
    scheme: Scheme
    modulation: ModulationConfig = Field(default_factory=ModulationConfig)
    code: CodeConfig = Field(default_factory=CodeConfig)
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    snr_grid: list[float]
    stopping: StoppingConfig = Field(default_factory=StoppingConfig)
    decoder: DecoderOptions = Field(default_factory=DecoderOptions)
    master_seed: int = Field(default_factory=lambda: settings.master_seed)
    noiseless: bool = False
    # Execution only; excluded from the config hash
    workers: int = Field(default_factory=lambda: settings.workers)
    reproducible: bool = False

    @property
    def is_binary_scheme(self) -> bool:
        return self.scheme in BINARY_SCHEMES

    def alphabet(self) -> AlphabetSpec:
        """Code alphabet after resolving ``auto``."""
        kind = self.code.alphabet
        M = self.modulation.order
        if kind == "auto":
            if self.is_binary_scheme:
                kind = "binary"
            else:
                kind = "field" if self.modulation.kind == "psk" else "ring"
        if kind == "binary":
            return AlphabetSpec.binary()
        if kind == "field":
            return AlphabetSpec.field(M.bit_length() - 1)
        return AlphabetSpec.ring(M)

    def constellations(self) -> tuple[Constellation, Constellation]:
        mod = self.modulation
        if mod.kind == "psk":
            return psk_gray(mod.order, mod.rotation_a), psk_gray(mod.order, mod.rotation_b)
        return pam(mod.order, mod.spacings_a), pam(mod.order, mod.spacings_b)

    def channel_model(self) -> ChannelModel:
        ch = self.channel
        return ChannelModel(ch.kind, ch.blocks, ch.imbalance_db)

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(
            max_iter=self.decoder.max_iter,
            check_update=self.decoder.check_update,
            n_m=self.decoder.n_m,
        )

    def bits_per_info_symbol(self) -> int:
        return 1 if self.is_binary_scheme else self.alphabet().bits_per_symbol

    def config_hash(self) -> str:
        payload = self.model_dump(mode="json", exclude={"workers", "reproducible"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @model_validator(mode="after")
    def _check_consistency(self) -> SimulationConfig:
        mod, code = self.modulation, self.code
        if mod.order < 2 or mod.order > 16 or mod.order & (mod.order - 1):
            raise ConfigError(f"modulation order must be a power of 2 in [2, 16], got {mod.order}")
        if mod.kind == "psk" and (mod.spacings_a or mod.spacings_b):
            raise ConfigError("PAM spacings were given for a PSK constellation")
        if not self.snr_grid:
            raise ConfigError("the SNR grid is empty")
        if self.stopping.min_frame_errors < 1 or self.stopping.max_frames < 1:
            raise ConfigError("min_frame_errors and max_frames must be >= 1")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.channel.blocks < 1:
            raise ConfigError(f"blocks must be >= 1, got {self.channel.blocks}")
        if self.decoder.outer_iters < 1 or self.decoder.inner_iters < 1:
            raise ConfigError("outer and inner iteration counts must be >= 1")
        if not 0 < code.k < code.n or code.n * code.dv != (code.n - code.k) * code.dc:
            raise ConfigError(
                f"no regular ({code.dv},{code.dc}) code with n={code.n}, k={code.k}"
            )

        if self.is_binary_scheme:
            if code.alphabet not in ("auto", "binary"):
                raise ConfigError(f"scheme {self.scheme} needs a binary code, not a {code.alphabet} code")
            r = mod.order.bit_length() - 1
            if code.n % r:
                raise ConfigError(f"code length {code.n} is not a multiple of {r} bits per symbol")
        else:
            if code.alphabet == "binary" and mod.order != 2:
                raise ConfigError(
                    f"scheme {self.scheme} needs a {mod.order}-ary code, not a binary one"
                )
        if self.decoder.n_m is not None:
            theta = mod.order**2 if self.scheme == "cd-nc" else mod.order
            if not 1 <= self.decoder.n_m <= theta:
                raise ConfigError(f"n_m must lie in [1, {theta}], got {self.decoder.n_m}")
        if self.channel.kind == "awgn":
            self._check_awgn_design()
        return self

    def _check_awgn_design(self) -> None:
        """With fixed coefficients the superimposed set is known up front."""
        ca, cb = self.constellations()
        scale = 10.0 ** (-self.channel.imbalance_db / 20.0)
        report = detect_ambiguity(build_superimposed_set(ca, cb, 1.0, scale), None)
        if self.scheme in MUD_SCHEMES and not report.unique_pair:
            raise ConfigError(
                f"scheme {self.scheme} needs every superimposed point to identify its pair; "
                "rotate or respace the second constellation"
            )
        if self.scheme in ("xor-cd", "iter-xor-cd") and report.is_ambiguous:
            raise ConfigError("the constellation pair is ambiguous under the XOR map")


def make_config(**options) -> SimulationConfig:
    """Build a config, reporting every validation failure as ConfigError."""
    try:
        return SimulationConfig(**options)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


@lru_cache(maxsize=8)
def _cached_code(n: int, k: int, dv: int, dc: int, alphabet: AlphabetSpec, seed: int) -> LdpcCode:
    return construct_regular(n, k, dv, dc, alphabet, seed)


def build_code(config: SimulationConfig) -> LdpcCode:
    c = config.code
    return _cached_code(c.n, c.k, c.dv, c.dc, config.alphabet(), c.seed)


class FrameOutcome(NamedTuple):
    bit_errors: int
    frame_error: bool
    iterations: int


def popcount(values: np.ndarray) -> int:
    as_bytes = np.asarray(values, dtype=np.int64).astype(np.uint8)
    return int(np.unpackbits(as_bytes).sum())


def relay_receive(
    config: SimulationConfig,
    y: np.ndarray,
    code: LdpcCode,
    constellations: tuple[Constellation, Constellation],
    realization: ChannelRealization,
    noise_var: float,
) -> RelayDecision:
    cfg = config.decoder_config()
    args = (y, code, constellations, realization, noise_var, cfg)
    opts = config.decoder
    if config.scheme == "xor-cd":
        return receive_xor_cd(*args)
    if config.scheme == "iter-xor-cd":
        return receive_iterative_xor_cd(*args, opts.outer_iters, opts.inner_iters)
    if config.scheme == "mud-xor":
        return receive_mud_xor(*args, iterative=opts.iterative_mud)
    if config.scheme == "nc-cd":
        return receive_nc_cd(*args, strategy=opts.coefficients)
    if config.scheme == "cd-nc":
        return receive_cd_nc(*args)
    return receive_mud_nc(*args, iterative=opts.iterative_mud)


def simulate_frame(
    config: SimulationConfig,
    code: LdpcCode,
    constellations: tuple[Constellation, Constellation],
    noise_var: float,
    seed: np.random.SeedSequence,
) -> FrameOutcome:
    message_seed, channel_seed, noise_seed = seed.spawn(3)
    rng = rng_from(message_seed)
    q = code.alphabet.size
    c1 = encode(code, rng.integers(0, q, size=code.k))
    c2 = encode(code, rng.integers(0, q, size=code.k))

    ca, cb = constellations
    if config.is_binary_scheme:
        s1, s2 = ca.bits_to_symbols(c1), cb.bits_to_symbols(c2)
    else:
        s1, s2 = c1, c2
    x1, x2 = modulate(s1, ca), modulate(s2, cb)
    realization = draw_realization(config.channel_model(), len(x1), channel_seed, noise_var)
    y = transmit_mac(x1, x2, realization, noise_var, noise_seed)

    decision = relay_receive(config, y, code, constellations, realization, noise_var)
    truth = c1 ^ c2 if decision.nc_map is None else decision.nc_map.apply(c1, c2)
    diff = information(code, truth) ^ information(code, decision.nc)
    bit_errors = popcount(diff)
    return FrameOutcome(bit_errors, bit_errors > 0, decision.iterations)


def run_point(
    config: SimulationConfig,
    snr_db: float,
    snr_index: int = 0,
    code: LdpcCode | None = None,
) -> PointResult:
    """Simulate frames at one SNR until the stopping rule fires.

    Frames are evaluated in parallel chunks but consumed in frame order, so
    the stopping frame and the totals do not depend on the worker count.
    """
    code = build_code(config) if code is None else code
    constellations = config.constellations()
    noise_var = 0.0 if config.noiseless else snr_to_noise_var(snr_db)
    stop = config.stopping
    chunk = max(1, config.workers * settings.frame_batch)

    started = time.perf_counter()
    frames = bit_errors = frame_errors = iterations = 0
    done = False

    def one(frame_index: int) -> FrameOutcome:
        seed = frame_seed(config.master_seed, snr_index, frame_index)
        return simulate_frame(config, code, constellations, noise_var, seed)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        next_frame = 0
        while not done:
            count = min(chunk, stop.max_frames - next_frame)
            outcomes = pool.map(one, range(next_frame, next_frame + count))
            next_frame += count
            for outcome in outcomes:
                frames += 1
                bit_errors += outcome.bit_errors
                frame_errors += int(outcome.frame_error)
                iterations += outcome.iterations
                if frame_errors >= stop.min_frame_errors or frames >= stop.max_frames:
                    done = True
                    break

    seconds = 0.0 if config.reproducible else time.perf_counter() - started
    info_bits = frames * code.k * config.bits_per_info_symbol()
    point = PointResult(
        snr_db=float(snr_db),
        frames=frames,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        ber=bit_errors / info_bits,
        fer=frame_errors / frames,
        mean_iters=iterations / frames,
        seconds=seconds,
    )
    logger.info(
        "%s at %.2f dB: %d frames, BER %.3e, FER %.3e, %.1f iterations",
        config.scheme, snr_db, frames, point.ber, point.fer, point.mean_iters,
    )
    if frame_errors == frames and frames >= stop.min_frame_errors:
        logger.warning("Every frame failed at %.2f dB", snr_db)
    return point


def run_sweep(config: SimulationConfig) -> SweepResult:
    code = build_code(config)
    result = SweepResult(config_hash=config.config_hash(), master_seed=config.master_seed)
    logger.info(
        "Sweep %s over %d SNR points (config %s)",
        config.scheme, len(config.snr_grid), result.config_hash[:12],
    )
    for index, snr_db in enumerate(config.snr_grid):
        result.points.append(run_point(config, snr_db, index, code))
    logger.info("Sweep %s finished", config.scheme)
    return result
