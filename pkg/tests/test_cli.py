import json

import pytest

from main import cli
from main.engines.toy_lm import build_model, save_checkpoint
from main.engines.toy_lm.gradcheck import GRADCHECK_CONFIG
from main.schemas.theory import CheckResult


def test_verify_single_suite(tmp_path, capsys):
    assert cli.main(["verify", "--suite", "collapse", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert {entry["check_name"] for entry in report} == {
        "collapse.bounds",
        "collapse.zero_range_is_prior",
        "collapse.sink_mass_curve",
    }
    assert all(entry["failures"] == 0 for entry in report)
    assert "collapse: 10103 cases, 0 failures" in capsys.readouterr().out


def test_verify_unknown_suite(tmp_path):
    assert cli.main(["verify", "--suite", "nosuch", "--out", str(tmp_path)]) == 2


def test_verify_failure_exit_code(tmp_path, mocker):
    mocker.patch(
        "main.cli.run_suites",
        return_value=[
            CheckResult(
                check_name="eot.oracle_match",
                cases=3,
                failures=1,
                max_violation=1.0,
            ),
        ],
    )
    assert cli.main(["verify", "--suite", "eot", "--out", str(tmp_path)]) == 1
    assert (tmp_path / "verify_report.json").is_file()


def test_flags_override_config_file(tmp_path, mocker):
    run_suites = mocker.patch("main.cli.run_suites", return_value=[])
    settings = tmp_path / "goat.conf"
    settings.write_text(
        "# settings\nsuite = eot, rank\nseed = 3\ngradcheck_seeds = 2\n",
    )
    code = cli.main(
        ["verify", "--config", str(settings), "--seed", "9", "--out", str(tmp_path)],
    )
    assert code == 0
    suites, seed, gradcheck_seeds = run_suites.call_args.args
    assert [suite.value for suite in suites] == ["eot", "rank"]
    assert (seed, gradcheck_seeds) == (9, 2)


@pytest.mark.parametrize(
    "content",
    ["suite = eot\nfast = yes\n", "not a setting\n"],
)
def test_bad_config_file(tmp_path, content):
    settings = tmp_path / "goat.conf"
    settings.write_text(content)
    assert cli.main(["verify", "--config", str(settings), "--out", str(tmp_path)]) == 2


def test_missing_config_file(tmp_path):
    code = cli.main(["verify", "--config", str(tmp_path / "none.conf")])
    assert code == 2


def test_dump_prior_missing_checkpoint(tmp_path):
    code = cli.main(
        [
            "dump-prior",
            "--checkpoint",
            str(tmp_path / "none.json"),
            "--out",
            str(tmp_path),
        ],
    )
    assert code == 2


def test_dump_prior_requires_checkpoint(tmp_path):
    assert cli.main(["dump-prior", "--out", str(tmp_path)]) == 2


def test_dump_prior(tmp_path):
    checkpoint = save_checkpoint(build_model(GRADCHECK_CONFIG), tmp_path / "m.json", 0)
    out = tmp_path / "panels"
    code = cli.main(
        ["dump-prior", "--checkpoint", str(checkpoint), "--L", "8", "--out", str(out)],
    )
    assert code == 0
    assert (out / "induced_prior.pgm").read_bytes().startswith(b"P5\n8 8\n255\n")


def test_bench(tmp_path):
    code = cli.main(
        ["bench", "--L", "4,8", "--d-h", "16", "--R", "2", "--repeats", "1"]
        + ["--out", str(tmp_path)],
    )
    assert code == 0
    lines = (tmp_path / "bench.csv").read_text().splitlines()
    assert lines[0] == "L,path,bytes,ns_per_token"
    assert len(lines) == 5


def test_train_toy_divergence_exit_code(tmp_path, mocker):
    from main.commons.exceptions import DivergenceError

    diverged = DivergenceError(error_data={"step": 3})
    mocker.patch("main.cli.run_toy", side_effect=diverged)
    assert cli.main(["train-toy", "--steps", "5", "--out", str(tmp_path)]) == 1


def test_train_toy_flags(tmp_path, mocker):
    run_toy = mocker.patch("main.cli.run_toy")
    code = cli.main(
        [
            "train-toy",
            "--steps",
            "7",
            "--variant",
            "alibi",
            "--eval-lengths",
            "64,256",
            "--out",
            str(tmp_path),
        ],
    )
    assert code == 0
    (cfg,) = run_toy.call_args.args
    assert (cfg.steps, cfg.variant.value, cfg.eval_lengths) == (7, "alibi", [64, 256])
    assert cfg.output_dir == tmp_path


def test_train_toy_bad_variant(tmp_path):
    assert cli.main(["train-toy", "--variant", "nope", "--out", str(tmp_path)]) == 2


def test_train_toy_eval_lengths_follow_seq_len(tmp_path, mocker):
    run_toy = mocker.patch("main.cli.run_toy")
    code = cli.main(["train-toy", "--seq-len", "128", "--out", str(tmp_path)])
    assert code == 0
    (cfg,) = run_toy.call_args.args
    assert cfg.eval_lengths == [128, 256, 512]


def test_train_toy_rejects_short_eval_lengths_before_training(tmp_path, mocker):
    run_toy = mocker.patch("main.cli.run_toy")
    argv = ["train-toy", "--seq-len", "128", "--eval-lengths", "64,256"]
    assert cli.main([*argv, "--out", str(tmp_path)]) == 2
    run_toy.assert_not_called()
