from concurrent.futures import ThreadPoolExecutor

import numpy as np
import torch

from main._config import config
from main.commons.exceptions import DomainError
from main.enums import TokenSource
from main.libs.log import get_logger
from main.schemas.toy import ExtrapolationPoint, ToyTaskSpec

from .data import sample_copy_mixture
from .model import ToyLM


logger = get_logger(__name__)


def score_predictions(
    predictions: np.ndarray,
    tokens: np.ndarray,
    sources: np.ndarray,
) -> tuple[float, float, float]:
    """Overall accuracy, accuracy on copy targets, and the share of copy
    targets where the prediction is one of the two copy candidates."""
    targets = tokens[:, 1:]
    copy = sources[:, 1:] != TokenSource.NOISE
    correct = predictions == targets
    candidate = (predictions == tokens[:, :1]) | (predictions == tokens[:, :-1])
    return (
        float(correct.mean()),
        float(correct[copy].mean()) if copy.any() else 0.0,
        float(candidate[copy].mean()) if copy.any() else 0.0,
    )


def _evaluate_length(
    model: ToyLM,
    spec: ToyTaskSpec,
    length: int,
    n_sequences: int,
) -> ExtrapolationPoint:
    # one generator per length, so results do not depend on thread order
    rng = np.random.default_rng([spec.seed, length])
    tokens, sources = sample_copy_mixture(spec, n_sequences, rng, seq_len=length)
    with torch.no_grad():
        logits = model(torch.from_numpy(tokens)).logits
    predictions = logits[:, :-1].argmax(dim=-1).numpy()
    accuracy, copy_accuracy, copy_hit_rate = score_predictions(
        predictions,
        tokens,
        sources,
    )
    return ExtrapolationPoint(
        length=length,
        accuracy=accuracy,
        copy_accuracy=copy_accuracy,
        copy_hit_rate=copy_hit_rate,
    )


def eval_extrapolation(
    model: ToyLM,
    spec: ToyTaskSpec,
    lengths: list[int],
    n_sequences: int = 128,
) -> list[ExtrapolationPoint]:
    """Next-token accuracy per evaluation length, in the order given."""
    short = [length for length in lengths if length < spec.seq_len]
    if short:
        raise DomainError(
            "Evaluation lengths must be at least the training length",
            error_data={"lengths": short, "seq_len": spec.seq_len},
        )
    model.eval()
    with ThreadPoolExecutor(max_workers=config.GOAT_THREADS) as pool:
        points = list(
            pool.map(
                lambda length: _evaluate_length(model, spec, length, n_sequences),
                lengths,
            ),
        )
    logger.info(
        "Extrapolation evaluated",
        data={p.length: round(p.copy_accuracy, 4) for p in points},
    )
    return points


def retention(points: list[ExtrapolationPoint], length: int) -> float:
    """Copy accuracy at `length` relative to the shortest evaluated length."""
    by_length = {point.length: point for point in points}
    base = by_length[min(by_length)].copy_accuracy
    if length not in by_length or base == 0:
        raise DomainError(
            "Retention needs the length evaluated and a non-zero base accuracy",
            error_data={"length": length, "base": base},
        )
    return by_length[length].copy_accuracy / base
