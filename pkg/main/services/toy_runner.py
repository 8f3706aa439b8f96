from dataclasses import dataclass
from pathlib import Path

from main.engines.toy_lm import (
    build_model,
    eval_extrapolation,
    save_checkpoint,
    train,
)
from main.engines.toy_lm.decomposition import extract_prior_decomposition
from main.engines.toy_lm.evaluation import retention
from main.enums import HeadVariant
from main.libs.log import get_logger, log_elapsed
from main.libs.reports import write_csv
from main.schemas.config import TrainToyConfig
from main.schemas.toy import ExtrapolationPoint, PriorDecomposition


logger = get_logger(__name__)

CHECKPOINT_FILE = "checkpoint.json"
LOSS_FILE = "loss.csv"
EVAL_FILE = "eval.csv"
EVAL_COLUMNS = ("length", "accuracy", "copy_accuracy", "copy_hit_rate")


@dataclass
class ToyRun:
    checkpoint: Path
    losses: list[float]
    points: list[ExtrapolationPoint]


def run_toy(cfg: TrainToyConfig) -> ToyRun:
    """Train, write the final and periodic checkpoints, the loss trace and
    the extrapolation table under `cfg.output_dir`."""
    task = cfg.task_spec()
    model = build_model(cfg.toy_model_config())

    with log_elapsed(logger, "Toy model trained", {"variant": cfg.variant}) as info:
        result = train(model, task, cfg.steps, checkpoint_every=cfg.checkpoint_every)
        info["final_loss"] = result.losses[-1]

    for step, state in result.checkpoints:
        snapshot = build_model(model.config)
        snapshot.load_state_dict(state)
        path = cfg.output_dir / f"checkpoint_{step}.json"
        save_checkpoint(snapshot, path, step, task)
    checkpoint = save_checkpoint(
        model,
        cfg.output_dir / CHECKPOINT_FILE,
        cfg.steps,
        task,
    )

    write_csv(
        cfg.output_dir / LOSS_FILE,
        ({"step": step, "loss": loss} for step, loss in enumerate(result.losses)),
        ("step", "loss"),
    )
    points = eval_extrapolation(model, task, cfg.eval_lengths, cfg.eval_sequences)
    write_csv(cfg.output_dir / EVAL_FILE, points, EVAL_COLUMNS)
    return ToyRun(checkpoint=checkpoint, losses=result.losses, points=points)


@dataclass
class PairedOutcome:
    seed: int
    goat_retention: float
    baseline_retention: float


def paired_extrapolation(
    cfg: TrainToyConfig,
    seeds: list[int],
    factor: int = 4,
    baseline: HeadVariant = HeadVariant.ABSOLUTE,
) -> list[PairedOutcome]:
    """GOAT against a baseline variant, same seeds and data, retention of
    copy accuracy at `factor` times the training length."""
    lengths = [cfg.seq_len, factor * cfg.seq_len]
    outcomes = []
    for seed in seeds:
        retained = {}
        for variant in (HeadVariant.GOAT, baseline):
            run_cfg = cfg.model_copy(update={"seed": seed, "variant": variant})
            model = build_model(run_cfg.toy_model_config())
            task = run_cfg.task_spec()
            train(model, task, run_cfg.steps)
            points = eval_extrapolation(model, task, lengths, run_cfg.eval_sequences)
            retained[variant] = retention(points, lengths[-1])
        outcomes.append(
            PairedOutcome(
                seed=seed,
                goat_retention=retained[HeadVariant.GOAT],
                baseline_retention=retained[baseline],
            ),
        )
        logger.info("Paired extrapolation", data=vars(outcomes[-1]))
    return outcomes


def trained_decompositions(
    cfg: TrainToyConfig,
    layer: int = 0,
) -> list[PriorDecomposition]:
    """Train a model and decompose the prior of every head of `layer` on the
    training length."""
    model = build_model(cfg.toy_model_config())
    train(model, cfg.task_spec(), cfg.steps)
    return [
        extract_prior_decomposition(model, head, cfg.seq_len, layer)
        for head in range(cfg.heads)
    ]
