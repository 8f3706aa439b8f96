"""
`goat` command: verify | train-toy | dump-prior | bench | serve.

Settings come from model defaults, then `--config FILE`, then flags. Every
`BaseError` ends the process with its `exit_code`.
"""

import argparse
import sys
from collections import defaultdict
from pathlib import Path

import uvicorn

from main.commons.exceptions import BaseError, ExitCode, VerificationFailed
from main.libs.log import get_logger
from main.libs.reports import write_json
from main.schemas.config import (
    BenchConfig,
    DumpPriorConfig,
    TrainToyConfig,
    VerifyConfig,
    load_run_config,
)
from main.services.bench import run_bench
from main.services.prior_dump import dump_prior
from main.services.toy_runner import run_toy
from main.services.verifier import run_suites


logger = get_logger(__name__)

REPORT_FILE = "verify_report.json"


def _overrides(args: argparse.Namespace, *names: str) -> dict:
    values = {"seed": args.seed, "output_dir": args.out}
    values.update({name: getattr(args, name) for name in names})
    return values


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = load_run_config(
        VerifyConfig,
        args.config,
        _overrides(args, "suite", "gradcheck_seeds"),
    )
    results = run_suites(cfg.suite, cfg.seed, cfg.gradcheck_seeds)
    write_json(cfg.output_dir / REPORT_FILE, results)

    per_suite: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for result in results:
        totals = per_suite[result.check_name.split(".", 1)[0]]
        totals[0] += result.cases
        totals[1] += result.failures
    for suite, (cases, failures) in per_suite.items():
        sys.stdout.write(f"{suite}: {cases} cases, {failures} failures\n")

    failed = [result.check_name for result in results if result.failures]
    if failed:
        raise VerificationFailed(error_data={"checks": failed})
    return ExitCode.OK


def cmd_train_toy(args: argparse.Namespace) -> int:
    cfg = load_run_config(
        TrainToyConfig,
        args.config,
        _overrides(args, "steps", "variant", "seq_len", "eval_lengths"),
    )
    run = run_toy(cfg)
    sys.stdout.write(f"checkpoint: {run.checkpoint}\n")
    return ExitCode.OK


def cmd_dump_prior(args: argparse.Namespace) -> int:
    cfg = load_run_config(
        DumpPriorConfig,
        args.config,
        _overrides(args, "checkpoint", "head", "layer", "length"),
    )
    dump_prior(cfg)
    return ExitCode.OK


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = load_run_config(
        BenchConfig,
        args.config,
        _overrides(args, "lengths", "d_h", "R", "repeats"),
    )
    run_bench(cfg)
    return ExitCode.OK


def cmd_serve(args: argparse.Namespace) -> int:
    uvicorn.run("main:app", host=args.host, port=args.port, reload=False)
    return ExitCode.OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value settings file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path, help="output directory")

    parser = argparse.ArgumentParser(prog="goat")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[common])
    verify.add_argument("--suite", help="comma-separated suite names")
    verify.add_argument("--gradcheck-seeds", dest="gradcheck_seeds", type=int)
    verify.set_defaults(handler=cmd_verify)

    train_toy = commands.add_parser("train-toy", parents=[common])
    train_toy.add_argument("--steps", type=int)
    train_toy.add_argument("--variant")
    train_toy.add_argument("--seq-len", dest="seq_len", type=int)
    train_toy.add_argument("--eval-lengths", dest="eval_lengths")
    train_toy.set_defaults(handler=cmd_train_toy)

    prior = commands.add_parser("dump-prior", parents=[common])
    prior.add_argument("--checkpoint", type=Path)
    prior.add_argument("--head", type=int)
    prior.add_argument("--layer", type=int)
    prior.add_argument("--L", dest="length", type=int)
    prior.set_defaults(handler=cmd_dump_prior)

    bench = commands.add_parser("bench", parents=[common])
    bench.add_argument("--L", dest="lengths", help="comma-separated lengths")
    bench.add_argument("--d-h", dest="d_h", type=int)
    bench.add_argument("--R", type=int)
    bench.add_argument("--repeats", type=int)
    bench.set_defaults(handler=cmd_bench)

    serve = commands.add_parser("serve")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=5001)
    serve.set_defaults(handler=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except BaseError as e:
        logger.error(
            e.error_message,
            data={"error_data": e.error_data, "error_code": e.error_code},
        )
        return e.exit_code


def run() -> None:
    sys.exit(main())
