import math
from dataclasses import dataclass, field

import numpy as np
import torch

from main._config import config
from main.commons.exceptions import DivergenceError
from main.libs.log import get_logger
from main.schemas.toy import OptimizerConfig, ToyTaskSpec

from .data import sample_copy_mixture
from .model import ToyLM, next_token_loss


logger = get_logger(__name__)


@dataclass
class TrainResult:
    model: ToyLM
    losses: list[float] = field(default_factory=list)
    # (step, state_dict copy) every `checkpoint_every` steps
    checkpoints: list[tuple[int, dict[str, torch.Tensor]]] = field(default_factory=list)


def lr_multiplier(step: int, total_steps: int, opt: OptimizerConfig) -> float:
    """Linear warmup, then cosine decay to `min_lr_ratio` of the peak."""
    if step < opt.warmup_steps:
        return (step + 1) / opt.warmup_steps
    decay_steps = max(total_steps - opt.warmup_steps, 1)
    progress = min((step - opt.warmup_steps) / decay_steps, 1.0)
    cosine = 0.5 * (1 + math.cos(math.pi * progress))
    return opt.min_lr_ratio + (1 - opt.min_lr_ratio) * cosine


def build_optimizer(model: ToyLM, opt: OptimizerConfig) -> torch.optim.AdamW:
    """AdamW with weight decay on weight matrices only; prior parameters,
    biases and norms are not decayed."""
    decay, no_decay = [], []
    for name, param in model.named_parameters():
        if param.ndim >= 2 and ".priors." not in name:
            decay.append(param)
        else:
            no_decay.append(param)
    return torch.optim.AdamW(
        [
            {"params": decay, "weight_decay": opt.weight_decay},
            {"params": no_decay, "weight_decay": 0.0},
        ],
        lr=opt.learning_rate,
        betas=(opt.beta1, opt.beta2),
        eps=opt.eps,
    )


def train(
    model: ToyLM,
    spec: ToyTaskSpec,
    steps: int,
    checkpoint_every: int | None = None,
    log_every: int = 100,
) -> TrainResult:
    """Deterministic given the model's initial state and `spec.seed`.

    Raises DivergenceError carrying the step index as soon as the loss is
    not finite.
    """
    opt = model.config.optimizer
    torch.set_num_threads(config.GOAT_THREADS)
    torch.manual_seed(model.config.seed)
    rng = np.random.default_rng(spec.seed)

    optimizer = build_optimizer(model, opt)
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer,
        lambda step: lr_multiplier(step, steps, opt),
    )
    result = TrainResult(model=model)

    model.train()
    for step in range(steps):
        tokens, _ = sample_copy_mixture(spec, opt.batch_size, rng)
        batch = torch.from_numpy(tokens)
        loss = next_token_loss(model(batch).logits, batch)
        if not torch.isfinite(loss):
            raise DivergenceError(
                error_data={"step": step, "loss": loss.item()},
            )

        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), opt.clip_norm)
        optimizer.step()
        scheduler.step()

        result.losses.append(loss.item())
        if log_every and (step % log_every == 0 or step == steps - 1):
            logger.info(
                "Training step",
                data={
                    "step": step,
                    "loss": round(result.losses[-1], 6),
                    "lr": scheduler.get_last_lr()[0],
                },
            )
        if checkpoint_every and (step + 1) % checkpoint_every == 0:
            state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            result.checkpoints.append((step + 1, state))

    model.eval()
    return result
