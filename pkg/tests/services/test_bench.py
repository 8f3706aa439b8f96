import csv

import numpy as np

from main.engines.attention import goat_head_forward, goat_head_reference
from main.engines.attention import random_head_params
from main.enums import AttentionPath
from main.schemas.config import BenchConfig
from main.schemas.prior import GoatHeadConfig
from main.services.bench import bench_length, run_bench


HEAD = GoatHeadConfig(d_h=16, R=2)


def _bytes(records) -> dict[AttentionPath, int]:
    return {record.path: record.bytes for record in records}


def test_dense_over_composite_ratio(rng):
    length = 1024
    metered = _bytes(bench_length(length, HEAD, rng, repeats=1))
    assert metered[AttentionPath.DENSE] == length * length * 8
    assert metered[AttentionPath.COMPOSITE] == 2 * length * HEAD.d_p * 8
    ratio = metered[AttentionPath.DENSE] / metered[AttentionPath.COMPOSITE]
    assert ratio == length / (2 * HEAD.d_p)


def test_doubling_length_quadruples_dense_bytes(rng):
    short = _bytes(bench_length(512, HEAD, rng, repeats=1))
    long = _bytes(bench_length(1024, HEAD, rng, repeats=1))
    assert long[AttentionPath.DENSE] == 4 * short[AttentionPath.DENSE]
    assert long[AttentionPath.COMPOSITE] == 2 * short[AttentionPath.COMPOSITE]


def test_single_token_paths_agree(rng):
    params = random_head_params(rng, HEAD.d_h, HEAD)
    hidden = rng.normal(size=(1, HEAD.d_h))
    np.testing.assert_allclose(
        goat_head_forward(hidden, params, HEAD),
        goat_head_reference(hidden, params, HEAD),
    )


def test_run_bench_writes_csv(tmp_path):
    cfg = BenchConfig(lengths=[1, 8, 16], d_h=16, R=2, repeats=1, output_dir=tmp_path)
    records = run_bench(cfg)
    assert len(records) == 6

    with (tmp_path / "bench.csv").open() as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == ["L", "path", "bytes", "ns_per_token"]
    assert [(int(r["L"]), r["path"]) for r in rows[:2]] == [
        (1, "composite"),
        (1, "dense"),
    ]
    assert all(float(r["ns_per_token"]) > 0 for r in rows)


def test_bench_bytes_are_reproducible(tmp_path):
    cfg = BenchConfig(lengths=[32], d_h=16, R=2, repeats=1, output_dir=tmp_path)
    assert _bytes(run_bench(cfg)) == _bytes(run_bench(cfg))
