from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path

import numpy as np

from pncsim import db
from pncsim.algebra import AlphabetSpec
from pncsim.config import settings
from pncsim.errors import ConfigError
from pncsim.modem import pam, psk_gray, write_constellation_csv
from pncsim.pnc import NcMap, build_superimposed_set, select_coefficients, write_superimposed_csv
from pncsim.services.exit_chart import demapper_transfer, write_transfer_csv
from pncsim.services.results import write_csv, write_sidecar
from pncsim.services.simulation import SimulationConfig, make_config, run_sweep
from pncsim.services.verify import CHECKS, run_verification

logging.basicConfig(
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)

SCHEMES = ("xor-cd", "iter-xor-cd", "mud-xor", "nc-cd", "cd-nc", "mud-nc")


def parse_snr(text: str) -> list[float]:
    """``start:stop:step`` (stop included), a comma list, or one value."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step == 0 or (stop - start) * step < 0:
                raise ValueError
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 10) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid SNR grid {text!r}") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_modulation_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mod", choices=("psk", "pam"), default="psk")
    p.add_argument("--M", type=int, default=8, dest="order")
    p.add_argument("--rotation-b", type=float, default=0.0, help="rotation of user B's PSK, radians")
    p.add_argument("--spacings", type=parse_floats, default=None,
                   help="gaps between user B's PAM levels, comma separated")
    p.add_argument("--imbalance-db", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pncsim", description="Channel-coded physical-layer network coding at the relay"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a BER/FER sweep")
    run.add_argument("--scheme", choices=SCHEMES, required=True)
    _add_modulation_args(run)
    run.add_argument("--alphabet", choices=("auto", "binary", "field", "ring"), default="auto")
    run.add_argument("--code-n", type=int, default=settings.code_n)
    run.add_argument("--code-k", type=int, default=settings.code_k)
    run.add_argument("--dv", type=int, default=settings.code_dv)
    run.add_argument("--dc", type=int, default=settings.code_dc)
    run.add_argument("--code-seed", type=int, default=settings.code_seed)
    run.add_argument("--channel", choices=("awgn", "block-rayleigh"), default="awgn")
    run.add_argument("--blocks", type=int, default=4)
    run.add_argument("--snr", type=parse_snr, required=True, help="start:stop:step in dB")
    run.add_argument("--min-frame-errors", type=int, default=settings.min_frame_errors)
    run.add_argument("--max-frames", type=int, default=settings.max_frames)
    run.add_argument("--max-iters", type=int, default=settings.max_iter)
    run.add_argument("--outer-iters", type=int, default=settings.outer_iters)
    run.add_argument("--inner-iters", type=int, default=settings.inner_iters)
    run.add_argument("--check-update", choices=("direct", "fft", "ems"), default="fft")
    run.add_argument("--nm", type=int, default=None, help="EMS list size")
    run.add_argument("--coefficients", choices=("selected", "all_pairs"), default="selected")
    run.add_argument("--iterative-mud", action="store_true")
    run.add_argument("--seed", type=int, default=settings.master_seed)
    run.add_argument("--noiseless", action="store_true", help="skip the noise (debug)")
    run.add_argument("--workers", type=int, default=settings.workers)
    run.add_argument("--reproducible", action="store_true", help="write 0 in the seconds column")
    run.add_argument("--record", action="store_true", help="store the sweep in the ledger")
    run.add_argument("--out", type=Path, default=None)
    run.set_defaults(handler=cmd_run)

    inspect = sub.add_parser("inspect-constellation", help="dump the superimposed set")
    _add_modulation_args(inspect)
    inspect.add_argument("--h1", type=complex, default=1 + 0j)
    inspect.add_argument("--h2", type=complex, default=1 + 0j)
    inspect.add_argument("--tolerance", type=float, default=settings.merge_tolerance)
    inspect.add_argument("--coefficients", type=str, default=None,
                         help="NC map a,b; XOR for PSK and the selected pair for PAM if omitted")
    inspect.add_argument("--dump-constellations", action="store_true")
    inspect.add_argument("--out", type=Path, default=None)
    inspect.set_defaults(handler=cmd_inspect)

    verify = sub.add_parser("verify", help="run the oracle and property checks")
    verify.add_argument("--check", action="append", choices=sorted(CHECKS), default=None)
    verify.set_defaults(handler=cmd_verify)

    exit_curve = sub.add_parser("exit-curve", help="XOR demapper transfer curve")
    _add_modulation_args(exit_curve)
    exit_curve.add_argument("--snr", type=float, required=True)
    exit_curve.add_argument("--points", type=int, default=11)
    exit_curve.add_argument("--symbols", type=int, default=20000)
    exit_curve.add_argument("--seed", type=int, default=settings.master_seed)
    exit_curve.add_argument("--out", type=Path, default=None)
    exit_curve.set_defaults(handler=cmd_exit_curve)

    history = sub.add_parser("history", help="list recorded sweeps")
    history.add_argument("--limit", type=int, default=20)
    history.add_argument("--run", type=int, default=None, help="print one run's points")
    history.set_defaults(handler=cmd_history)

    return parser


def config_from_args(args: argparse.Namespace) -> SimulationConfig:
    spacings = {"spacings_b": args.spacings} if args.mod == "pam" and args.spacings else {}
    if args.mod == "psk" and args.spacings:
        raise ConfigError("--spacings applies to PAM only")
    return make_config(
        scheme=args.scheme,
        modulation={"kind": args.mod, "order": args.order, "rotation_b": args.rotation_b, **spacings},
        code={
            "n": args.code_n, "k": args.code_k, "dv": args.dv, "dc": args.dc,
            "seed": args.code_seed, "alphabet": args.alphabet,
        },
        channel={"kind": args.channel, "blocks": args.blocks, "imbalance_db": args.imbalance_db},
        snr_grid=args.snr,
        stopping={"min_frame_errors": args.min_frame_errors, "max_frames": args.max_frames},
        decoder={
            "max_iter": args.max_iters, "check_update": args.check_update, "n_m": args.nm,
            "outer_iters": args.outer_iters, "inner_iters": args.inner_iters,
            "coefficients": args.coefficients, "iterative_mud": args.iterative_mud,
        },
        master_seed=args.seed,
        noiseless=args.noiseless,
        workers=args.workers,
        reproducible=args.reproducible,
    )


async def _record(result, config: dict) -> int:
    await db.init_db()
    try:
        return await db.record_sweep(result, config)
    finally:
        await db.close_db()


def cmd_run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    result = run_sweep(config)
    out = args.out or settings.ensure_results_dir() / f"{config.scheme}-{result.config_hash[:10]}.csv"
    write_csv(result, out)
    resolved = config.model_dump(mode="json")
    write_sidecar(out, resolved, result)
    if args.record:
        run_id = asyncio.run(_record(result, resolved))
        print(f"recorded run {run_id}")
    print(out)
    return 0


def _user_constellations(args: argparse.Namespace):
    if args.mod == "psk":
        if args.spacings:
            raise ConfigError("--spacings applies to PAM only")
        return psk_gray(args.order), psk_gray(args.order, args.rotation_b)
    return pam(args.order), pam(args.order, args.spacings)


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        ca, cb = _user_constellations(args)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    h2 = args.h2 * 10.0 ** (-args.imbalance_db / 20.0)
    if args.coefficients:
        alphabet = (
            AlphabetSpec.field(ca.bits_per_symbol) if args.mod == "psk" else AlphabetSpec.ring(ca.order)
        )
        try:
            a, b = (int(v) for v in args.coefficients.split(","))
            nc_map = NcMap(alphabet, a, b)
        except ValueError as exc:
            raise ConfigError(f"bad --coefficients {args.coefficients!r}: {exc}") from exc
    elif args.mod == "pam":
        nc_map = select_coefficients(ca, cb, args.h1, h2, AlphabetSpec.ring(ca.order))
    else:
        nc_map = None

    sset = build_superimposed_set(ca, cb, args.h1, h2, args.tolerance, nc_map)
    out = args.out or settings.ensure_results_dir() / f"superimposed-{args.mod}{args.order}.csv"
    report = write_superimposed_csv(sset, out)
    if args.dump_constellations:
        write_constellation_csv(ca, out.with_name(out.stem + "-user-a.csv"))
        write_constellation_csv(cb, out.with_name(out.stem + "-user-b.csv"))
    print(
        f"{sset.n_entries} entries, map {nc_map or 'XOR'}, exclusive={report.is_exclusive}, "
        f"ambiguous={len(report.ambiguous_entries)}, unique_pair={report.unique_pair}"
    )
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_verification(args.check)
    for r in results:
        print(f"{'ok    ' if r.passed else 'FAILED'} {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def cmd_exit_curve(args: argparse.Namespace) -> int:
    if args.points < 2:
        raise ConfigError("--points must be at least 2")
    try:
        constellations = _user_constellations(args)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    grid = np.linspace(0.0, 0.999, args.points)
    points = demapper_transfer(
        constellations, args.snr, grid, args.symbols, args.seed, args.imbalance_db
    )
    out = args.out or settings.ensure_results_dir() / f"exit-{args.mod}{args.order}-{args.snr:g}dB.csv"
    write_transfer_csv(points, out)
    print(out)
    return 0


async def _history(limit: int, run_id: int | None) -> int:
    await db.init_db()
    try:
        if run_id is None:
            for run in await db.list_runs(limit):
                print(
                    f"{run['id']:>5}  {run['created_at']}  {run['scheme']:<12} "
                    f"seed={run['master_seed']}  points={run['n_points']}  {run['config_hash'][:12]}"
                )
            return 0
        if await db.get_run(run_id) is None:
            logger.error("No recorded run %d", run_id)
            return 1
        print("snr_db,frames,bit_errors,frame_errors,ber,fer,mean_iters,seconds")
        for p in await db.get_points(run_id):
            print(
                f"{p.snr_db},{p.frames},{p.bit_errors},{p.frame_errors},"
                f"{p.ber},{p.fer},{p.mean_iters},{p.seconds}"
            )
        return 0
    finally:
        await db.close_db()


def cmd_history(args: argparse.Namespace) -> int:
    return asyncio.run(_history(args.limit, args.run))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        return 2
    except Exception:
        logger.exception("Command %s failed", args.command)
        return 1


if __name__ == "__main__":
    sys.exit(main())
