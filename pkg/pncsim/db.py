from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import aiosqlite

from pncsim.config import settings
from pncsim.services.results import PointResult, SweepResult

logger = logging.getLogger(__name__)

_db: aiosqlite.Connection | None = None


async def get_db() -> aiosqlite.Connection:
    global _db
    if _db is None:
        Path(settings.db_path).parent.mkdir(parents=True, exist_ok=True)
        _db = await aiosqlite.connect(str(settings.db_path))
        _db.row_factory = aiosqlite.Row
    return _db


async def close_db() -> None:
    global _db
    if _db is not None:
        await _db.close()
        _db = None


async def init_db() -> None:
    db = await get_db()
    await db.executescript(
        """
        CREATE TABLE IF NOT EXISTS runs (
            id              INTEGER PRIMARY KEY AUTOINCREMENT,
            created_at      TEXT    NOT NULL DEFAULT (datetime('now')),
            config_hash     TEXT    NOT NULL,
            master_seed     INTEGER NOT NULL,
            scheme          TEXT    NOT NULL,
            config_json     TEXT    NOT NULL
        );

        CREATE TABLE IF NOT EXISTS points (
            id              INTEGER PRIMARY KEY AUTOINCREMENT,
            run_id          INTEGER NOT NULL REFERENCES runs(id),
            snr_db          REAL    NOT NULL,
            frames          INTEGER NOT NULL,
            bit_errors      INTEGER NOT NULL,
            frame_errors    INTEGER NOT NULL,
            ber             REAL    NOT NULL,
            fer             REAL    NOT NULL,
            mean_iters      REAL    NOT NULL,
            seconds         REAL    NOT NULL
        );

        CREATE INDEX IF NOT EXISTS idx_points_run ON points(run_id, snr_db);
        CREATE INDEX IF NOT EXISTS idx_runs_hash ON runs(config_hash);
        """
    )
    await db.commit()


async def record_sweep(result: SweepResult, config: dict[str, Any]) -> int:
    """Store a finished sweep and its points; returns the run id."""
    db = await get_db()
    cursor = await db.execute(
        """
        INSERT INTO runs (config_hash, master_seed, scheme, config_json)
        VALUES (?, ?, ?, ?)
        """,
        (
            result.config_hash,
            result.master_seed,
            config.get("scheme", ""),
            json.dumps(config, sort_keys=True),
        ),
    )
    run_id = cursor.lastrowid
    await db.executemany(
        """
        INSERT INTO points
            (run_id, snr_db, frames, bit_errors, frame_errors, ber, fer, mean_iters, seconds)
        VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
        """,
        [
            (
                run_id, p.snr_db, p.frames, p.bit_errors, p.frame_errors,
                p.ber, p.fer, p.mean_iters, p.seconds,
            )
            for p in result.points
        ],
    )
    await db.commit()
    logger.info("Recorded run %d (%s, %d points)", run_id, result.config_hash[:12], len(result))
    return run_id


async def list_runs(limit: int = 20) -> list[dict[str, Any]]:
    db = await get_db()
    async with db.execute(
        """
        SELECT r.id, r.created_at, r.config_hash, r.master_seed, r.scheme,
               COUNT(p.id) AS n_points
        FROM runs r
        LEFT JOIN points p ON p.run_id = r.id
        GROUP BY r.id
        ORDER BY r.id DESC
        LIMIT ?
        """,
        (limit,),
    ) as cursor:
        rows = await cursor.fetchall()
    return [dict(row) for row in rows]


async def get_run(run_id: int) -> dict[str, Any] | None:
    db = await get_db()
    async with db.execute("SELECT * FROM runs WHERE id = ?", (run_id,)) as cursor:
        row = await cursor.fetchone()
    return dict(row) if row else None


async def get_points(run_id: int) -> list[PointResult]:
    db = await get_db()
    async with db.execute(
        """
        SELECT snr_db, frames, bit_errors, frame_errors, ber, fer, mean_iters, seconds
        FROM points WHERE run_id = ? ORDER BY id
        """,
        (run_id,),
    ) as cursor:
        rows = await cursor.fetchall()
    return [PointResult(**dict(row)) for row in rows]
