import csv
import json

import numpy as np
import pytest

from main.engines.toy_lm import prior_argmax_hits
from main.commons.exceptions import ConfigError
from main.enums import HeadVariant
from main.schemas.config import TrainToyConfig
from main.services.toy_runner import (
    paired_extrapolation,
    run_toy,
    trained_decompositions,
)


@pytest.fixture
def tiny_run(tmp_path) -> TrainToyConfig:
    return TrainToyConfig(
        vocab_size=8,
        seq_len=8,
        layers=1,
        d_model=16,
        d_h=8,
        R=1,
        steps=4,
        batch_size=2,
        warmup_steps=1,
        eval_lengths=[8, 16],
        eval_sequences=4,
        checkpoint_every=2,
        output_dir=tmp_path,
    )


def test_run_writes_every_artifact(tiny_run, tmp_path):
    run = run_toy(tiny_run)
    assert len(run.losses) == 4
    assert json.loads(run.checkpoint.read_text())["step"] == 4
    assert (tmp_path / "checkpoint_2.json").is_file()
    assert (tmp_path / "checkpoint_4.json").is_file()

    with (tmp_path / "loss.csv").open() as f:
        rows = list(csv.DictReader(f))
    assert [int(row["step"]) for row in rows] == [0, 1, 2, 3]

    with (tmp_path / "eval.csv").open() as f:
        rows = list(csv.DictReader(f))
    assert [int(row["length"]) for row in rows] == [8, 16]
    assert set(rows[0]) == {"length", "accuracy", "copy_accuracy", "copy_hit_rate"}


def test_reruns_write_identical_reports(tiny_run, tmp_path):
    run_toy(tiny_run)
    first = {name: (tmp_path / name).read_bytes() for name in ("loss.csv", "eval.csv")}
    run_toy(tiny_run)
    for name, content in first.items():
        assert (tmp_path / name).read_bytes() == content


def test_short_eval_lengths_fail_before_any_artifact(tmp_path):
    with pytest.raises(ConfigError) as exc:
        TrainToyConfig(seq_len=128, steps=2, eval_lengths=[64], output_dir=tmp_path)
    assert exc.value.error_data == {"lengths": [64], "seq_len": 128}
    assert not (tmp_path / "checkpoint.json").exists()


def test_default_eval_lengths_scale_with_seq_len():
    assert TrainToyConfig(seq_len=16).eval_lengths == [16, 32, 64]
    assert TrainToyConfig().eval_lengths == [64, 128, 256]
    with pytest.raises(ConfigError):
        TrainToyConfig(eval_lengths=[])


@pytest.mark.slow
def test_trained_prior_recovers_copy_structure(tmp_path):
    decompositions = trained_decompositions(TrainToyConfig(output_dir=tmp_path))
    structured = [
        d
        for d in decompositions
        if prior_argmax_hits(d.induced_prior) >= 0.9 and np.argmax(d.sink) == 0
    ]
    assert structured


@pytest.mark.slow
def test_goat_extrapolates_better_than_absolute_positions(tmp_path):
    cfg = TrainToyConfig(output_dir=tmp_path)
    outcomes = paired_extrapolation(cfg, seeds=[0, 1, 2], baseline=HeadVariant.ABSOLUTE)
    for outcome in outcomes:
        assert outcome.goat_retention >= 0.9
        assert outcome.goat_retention > outcome.baseline_retention
