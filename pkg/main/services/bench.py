"""
Composite path against dense-bias path: metered extra matrix bytes (exact,
deterministic) and wall time per token (best of `repeats`).
"""

import time

import numpy as np

from main.engines.attention import (
    AllocationMeter,
    goat_head_forward,
    goat_head_reference,
    random_head_params,
)
from main.enums import AttentionPath
from main.libs.log import get_logger
from main.libs.reports import write_csv
from main.schemas.attention import BenchRecord
from main.schemas.config import BenchConfig
from main.schemas.prior import GoatHeadConfig


logger = get_logger(__name__)

BENCH_FILE = "bench.csv"
BENCH_COLUMNS = ("L", "path", "bytes", "ns_per_token")

PATHS = {
    AttentionPath.COMPOSITE: goat_head_forward,
    AttentionPath.DENSE: goat_head_reference,
}


def bench_length(
    length: int,
    cfg: GoatHeadConfig,
    rng: np.random.Generator,
    repeats: int = 3,
) -> list[BenchRecord]:
    params = random_head_params(rng, cfg.d_h, cfg, l_ref=max(length, 1))
    hidden = rng.normal(size=(length, cfg.d_h))
    records = []
    for path, forward in PATHS.items():
        meter = AllocationMeter()
        forward(hidden, params, cfg, meter=meter)
        best = float("inf")
        for _ in range(repeats):
            started = time.perf_counter_ns()
            forward(hidden, params, cfg)
            best = min(best, time.perf_counter_ns() - started)
        records.append(
            BenchRecord(
                L=length,
                path=path,
                bytes=meter.total,
                ns_per_token=best / length,
            ),
        )
    return records


def run_bench(cfg: BenchConfig) -> list[BenchRecord]:
    head = GoatHeadConfig(d_h=cfg.d_h, R=cfg.R)
    rng = np.random.default_rng(cfg.seed)
    records = []
    for length in cfg.lengths:
        records.extend(bench_length(length, head, rng, cfg.repeats))
        logger.info(
            "Bench length done",
            data={"L": length}
            | {r.path.value: r.bytes for r in records[-len(PATHS) :]},
        )
    write_csv(cfg.output_dir / BENCH_FILE, records, BENCH_COLUMNS)
    return records
