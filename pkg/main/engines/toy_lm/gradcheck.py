import numpy as np
import torch

from main.libs.log import get_logger
from main.schemas.prior import GoatHeadConfig
from main.schemas.toy import GradCheckReport, ToyModelConfig, ToyTaskSpec

from .data import gen_copy_mixture
from .model import ToyLM, backward, build_model, next_token_loss


logger = get_logger(__name__)

FD_STEP = 1e-4
# below this magnitude gradients are compared in absolute terms
RELATIVE_FLOOR = 1e-2
GRADCHECK_TOLERANCE = 1e-5

GRADCHECK_CONFIG = ToyModelConfig(
    layers=2,
    heads=2,
    d_model=16,
    head=GoatHeadConfig(d_h=8, R=2),
    vocab_size=8,
    sink_hidden=4,
    sink_features=4,
    l_ref=8,
)


def _loss(model: ToyLM, tokens: torch.Tensor) -> float:
    return next_token_loss(model(tokens).logits, tokens).item()


def relative_error(
    analytic: float,
    numeric: float,
    floor: float = RELATIVE_FLOOR,
) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def randomize_priors(
    model: ToyLM,
    rng: np.random.Generator,
    scale: float = 0.5,
) -> None:
    """Move every prior parameter off its zero start."""
    with torch.no_grad():
        for prior in model.priors():
            for param in prior.parameters():
                values = rng.normal(scale=scale, size=tuple(param.shape))
                param.copy_(torch.as_tensor(values, dtype=param.dtype))


def randomize_weights(model: ToyLM, rng: np.random.Generator) -> None:
    """Unit-scale embeddings and 1/sqrt(fan_in) matrices; priors and 1-D
    parameters keep their values."""
    with torch.no_grad():
        for name, param in model.named_parameters():
            if ".priors." in name or param.ndim < 2:
                continue
            scale = 1.0 if "embedding" in name else param.shape[-1] ** -0.5
            values = rng.normal(scale=scale, size=tuple(param.shape))
            param.copy_(torch.as_tensor(values, dtype=param.dtype))


def gradient_check(
    model: ToyLM,
    tokens: torch.Tensor,
    step: float = FD_STEP,
    seed: int = 0,
) -> GradCheckReport:
    """Central differences over every parameter entry; the model should be
    in double precision."""
    analytic = backward(model, tokens)
    per_parameter: dict[str, float] = {}
    entries = 0

    with torch.no_grad():
        for name, param in model.named_parameters():
            flat = param.data.view(-1)
            grad = analytic[name].view(-1)
            worst = 0.0
            for index in range(flat.numel()):
                original = float(flat[index])
                flat[index] = original + step
                plus = _loss(model, tokens)
                flat[index] = original - step
                minus = _loss(model, tokens)
                flat[index] = original
                numeric = (plus - minus) / (2 * step)
                worst = max(worst, relative_error(float(grad[index]), numeric))
            per_parameter[name] = worst
            entries += flat.numel()

    worst_parameter = max(per_parameter, key=per_parameter.__getitem__)
    report = GradCheckReport(
        seed=seed,
        entries=entries,
        max_relative_error=per_parameter[worst_parameter],
        worst_parameter=worst_parameter,
        per_parameter=per_parameter,
    )
    logger.info(
        "Gradient check finished",
        data={
            "seed": seed,
            "entries": entries,
            "max_relative_error": report.max_relative_error,
            "worst_parameter": worst_parameter,
        },
    )
    return report


def seeded_gradient_check(
    seed: int,
    cfg: ToyModelConfig = GRADCHECK_CONFIG,
    batch: int = 2,
    seq_len: int = 8,
) -> GradCheckReport:
    """Double-precision model with O(1) weights and random priors on a small
    copy-mixture batch."""
    model = build_model(cfg.model_copy(update={"seed": seed})).double()
    rng = np.random.default_rng(seed)
    randomize_weights(model, rng)
    randomize_priors(model, rng)
    task = ToyTaskSpec(vocab_size=cfg.vocab_size, seq_len=seq_len, seed=seed)
    tokens = torch.from_numpy(gen_copy_mixture(task, batch))
    return gradient_check(model, tokens, seed=seed)
