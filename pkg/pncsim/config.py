from __future__ import annotations

from pathlib import Path

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    log_level: str = "INFO"

    db_path: Path = Path("./data/pncsim.sqlite3")
    results_dir: Path = Path("./results")

    master_seed: int = 2019
    workers: int = 1
    # Frames handed to the pool per dispatch, per worker
    frame_batch: int = 8

    # Short default code; long-frame benchmarks use k=1032
    code_n: int = 408
    code_k: int = 204
    code_dv: int = 3
    code_dc: int = 6
    code_seed: int = 1
    construction_retries: int = 20

    max_iter: int = 150
    outer_iters: int = 6
    inner_iters: int = 25
    mud_exchange_rounds: int = 3

    min_frame_errors: int = 30
    max_frames: int = 2000

    merge_tolerance: float = 1e-9
    ems_floor_offset: float = 2.0
    ems_offset: float = 0.0

    # Assert message normalization on every decoder iteration
    debug_checks: bool = False

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "env_prefix": "PNCSIM_",
    }

    def ensure_results_dir(self) -> Path:
        self.results_dir.mkdir(parents=True, exist_ok=True)
        return self.results_dir


settings = Settings()
