"""
Pre-norm decoder-only language model whose attention heads carry a GOAT
log-prior inside their query/key vectors.

Every head variant shares the block structure; only the positional
mechanism differs:

- ``goat``: spectral relative prior plus key-only sink bias (slope + MLP),
- ``alibi``: key-linear slope only,
- ``absolute``: learned position embeddings added to the token embeddings,
- ``rope``: rotary position embedding of queries and keys.
"""

import math
from dataclasses import dataclass, field

import torch
import torch.nn.functional as F
from torch import nn

from main.commons.exceptions import DomainError
from main.engines.prior import (
    DEFAULT_OMEGA_MAX,
    DEFAULT_OMEGA_MIN,
    geometric_frequencies,
    sink_wavelengths,
)
from main.enums import HeadVariant, PriorInit
from main.schemas.prior import SinkBiasParams, SpectralPriorParams
from main.schemas.toy import ToyModelConfig


INIT_STD = 0.02
ROPE_BASE = 10_000.0


def _interleave(first: torch.Tensor, second: torch.Tensor) -> torch.Tensor:
    stacked = torch.stack([first, second], dim=-1)
    return stacked.reshape(*first.shape[:-1], 2 * first.shape[-1])


class GoatPrior(nn.Module):
    """Learnable log-prior of one head.

    Frequencies and sink wavelengths are fixed buffers; alpha, beta, the
    slope and the sink MLP are trained. All start at zero output, i.e. a
    uniform prior.
    """

    def __init__(self, rank: int, cfg: ToyModelConfig, use_mlp: bool = True):
        super().__init__()
        frequencies = geometric_frequencies(
            rank,
            cfg.omega_min or DEFAULT_OMEGA_MIN,
            cfg.omega_max or DEFAULT_OMEGA_MAX,
        )
        self.l_ref = cfg.l_ref
        self.feature_count = cfg.sink_features if use_mlp else 0
        hidden = cfg.sink_hidden if use_mlp else 0

        dtype = torch.get_default_dtype()
        self.register_buffer(
            "frequencies",
            torch.tensor(frequencies, dtype=dtype),
            persistent=False,
        )
        self.register_buffer(
            "wavelengths",
            torch.tensor(sink_wavelengths(self.feature_count, self.l_ref), dtype=dtype),
            persistent=False,
        )
        self.alpha = nn.Parameter(torch.zeros(rank))
        self.beta = nn.Parameter(torch.zeros(rank))
        self.slope = nn.Parameter(torch.zeros(()))

        self.sink_mlp: nn.Sequential | None = None
        if hidden > 0:
            output = nn.Linear(hidden, 1)
            nn.init.zeros_(output.weight)
            nn.init.zeros_(output.bias)
            self.sink_mlp = nn.Sequential(
                nn.Linear(self.feature_count + 1, hidden),
                nn.Tanh(),
                output,
            )

    def _phases(self, positions: torch.Tensor) -> torch.Tensor:
        return positions[:, None] * self.frequencies

    def query_lanes(self, positions: torch.Tensor) -> torch.Tensor:
        phase = self._phases(positions)
        cos, sin = torch.cos(phase), torch.sin(phase)
        return _interleave(
            self.alpha * cos + self.beta * sin,
            self.alpha * sin - self.beta * cos,
        )

    def key_lanes(self, positions: torch.Tensor) -> torch.Tensor:
        phase = self._phases(positions)
        return _interleave(torch.cos(phase), torch.sin(phase))

    def sink_features(self, positions: torch.Tensor) -> torch.Tensor:
        phase = positions[:, None] * (2 * math.pi / self.wavelengths)
        sinusoids = _interleave(torch.sin(phase), torch.cos(phase))
        return torch.cat([sinusoids, (positions / self.l_ref)[:, None]], dim=-1)

    def sink(self, positions: torch.Tensor) -> torch.Tensor:
        bias = self.slope * positions / self.l_ref
        if self.sink_mlp is not None:
            bias = bias + self.sink_mlp(self.sink_features(positions)).squeeze(-1)
        return bias

    @torch.no_grad()
    def set_recency(self, decay: float) -> None:
        """Key-linear start u(j) = decay * j."""
        self.slope.fill_(decay * self.l_ref)

    def to_params(self) -> tuple[SpectralPriorParams, SinkBiasParams]:
        def as_numpy(tensor: torch.Tensor):
            return tensor.detach().double().cpu().numpy()

        spectral = SpectralPriorParams(
            frequencies=as_numpy(self.frequencies),
            alpha=as_numpy(self.alpha),
            beta=as_numpy(self.beta),
        )
        if self.sink_mlp is None:
            sink = SinkBiasParams.zeros(l_ref=self.l_ref, hidden=0, feature_count=0)
            slope = self.slope.detach().item()
            return spectral, sink.model_copy(update={"slope": slope})

        hidden_layer, _, output = self.sink_mlp
        sink = SinkBiasParams(
            slope=self.slope.detach().item(),
            mlp_w1=as_numpy(hidden_layer.weight),
            mlp_b1=as_numpy(hidden_layer.bias),
            mlp_w2=as_numpy(output.weight[0]),
            mlp_b2=output.bias[0].detach().item(),
            feature_count=self.feature_count,
            l_ref=self.l_ref,
        )
        return spectral, sink


def apply_rotary(x: torch.Tensor, positions: torch.Tensor) -> torch.Tensor:
    """Rotate consecutive lane pairs of `x` (..., L, d) by position."""
    width = x.shape[-1]
    inverse = ROPE_BASE ** (
        -torch.arange(0, width, 2, dtype=x.dtype, device=x.device) / width
    )
    phase = positions[:, None] * inverse
    cos, sin = torch.cos(phase), torch.sin(phase)
    even, odd = x[..., ::2], x[..., 1::2]
    return _interleave(even * cos - odd * sin, even * sin + odd * cos)


class GoatAttention(nn.Module):
    def __init__(self, cfg: ToyModelConfig):
        super().__init__()
        self.variant = cfg.variant
        self.heads = cfg.heads
        self.d_h = cfg.head.d_h

        self.priors: nn.ModuleList | None = None
        self.d_c = self.d_h
        if cfg.variant in (HeadVariant.GOAT, HeadVariant.ALIBI):
            goat = cfg.variant == HeadVariant.GOAT
            rank = cfg.head.R if goat else 0
            self.d_c = self.d_h - (2 * rank + 2)
            if self.d_c < 1:
                raise DomainError(
                    "Positional lanes leave no content lanes",
                    error_data={"d_h": self.d_h, "R": rank},
                )
            self.priors = nn.ModuleList(
                GoatPrior(rank, cfg, use_mlp=goat) for _ in range(cfg.heads)
            )

        self.w_q = nn.Linear(cfg.d_model, cfg.heads * self.d_c, bias=False)
        self.w_k = nn.Linear(cfg.d_model, cfg.heads * self.d_c, bias=False)
        self.w_v = nn.Linear(cfg.d_model, cfg.heads * self.d_h, bias=False)
        self.w_o = nn.Linear(cfg.heads * self.d_h, cfg.d_model, bias=False)

    def _split(self, x: torch.Tensor, width: int) -> torch.Tensor:
        batch, length, _ = x.shape
        return x.view(batch, length, self.heads, width).transpose(1, 2)

    def _compose(
        self,
        q: torch.Tensor,
        k: torch.Tensor,
        positions: torch.Tensor,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Composite q' = [q_c sqrt(d_h/d_c), q_rel sqrt(d_h), sqrt(d_h), 0]
        and k' = [k_c, k_rel, u, 0], so that q'.k' / sqrt(d_h) equals
        q_c.k_c / sqrt(d_c) plus the log-prior."""
        assert self.priors is not None
        q_rel = torch.stack([prior.query_lanes(positions) for prior in self.priors])
        k_rel = torch.stack([prior.key_lanes(positions) for prior in self.priors])
        sink = torch.stack([prior.sink(positions) for prior in self.priors])

        batch = q.shape[0]
        root = math.sqrt(self.d_h)
        ones = torch.full_like(sink, root)[..., None]
        zeros = torch.zeros_like(ones)
        q_pos = torch.cat([q_rel * root, ones, zeros], dim=-1)
        k_pos = torch.cat([k_rel, sink[..., None], zeros], dim=-1)
        queries = torch.cat(
            [q * math.sqrt(self.d_h / self.d_c), q_pos.expand(batch, -1, -1, -1)],
            dim=-1,
        )
        keys = torch.cat([k, k_pos.expand(batch, -1, -1, -1)], dim=-1)
        return queries, keys

    def forward(
        self,
        x: torch.Tensor,
        return_weights: bool = False,
    ) -> tuple[torch.Tensor, torch.Tensor | None]:
        batch, length, _ = x.shape
        q = self._split(self.w_q(x), self.d_c)
        k = self._split(self.w_k(x), self.d_c)
        v = self._split(self.w_v(x), self.d_h)
        positions = torch.arange(length, dtype=x.dtype, device=x.device)

        if self.priors is not None:
            q, k = self._compose(q, k, positions)
        elif self.variant == HeadVariant.ROPE:
            q, k = apply_rotary(q, positions), apply_rotary(k, positions)

        weights = None
        if return_weights:
            logits = q @ k.transpose(-2, -1) / math.sqrt(q.shape[-1])
            future = torch.ones(length, length, dtype=torch.bool, device=x.device)
            logits = logits.masked_fill(future.triu(1), float("-inf"))
            weights = torch.softmax(logits, dim=-1)
            out = weights @ v
        else:
            out = F.scaled_dot_product_attention(q, k, v, is_causal=True)

        out = out.transpose(1, 2).reshape(batch, length, self.heads * self.d_h)
        return self.w_o(out), weights


class DecoderBlock(nn.Module):
    def __init__(self, cfg: ToyModelConfig):
        super().__init__()
        self.attn_norm = nn.LayerNorm(cfg.d_model)
        self.attn = GoatAttention(cfg)
        self.mlp_norm = nn.LayerNorm(cfg.d_model)
        self.mlp = nn.Sequential(
            nn.Linear(cfg.d_model, 4 * cfg.d_model),
            nn.GELU(),
            nn.Linear(4 * cfg.d_model, cfg.d_model),
        )

    def forward(
        self,
        x: torch.Tensor,
        return_weights: bool = False,
    ) -> tuple[torch.Tensor, torch.Tensor | None]:
        attended, weights = self.attn(self.attn_norm(x), return_weights)
        x = x + attended
        return x + self.mlp(self.mlp_norm(x)), weights


@dataclass
class ForwardPass:
    logits: torch.Tensor
    # per layer (B, heads, L, L); empty unless requested
    attention: list[torch.Tensor] = field(default_factory=list)


class ToyLM(nn.Module):
    def __init__(self, cfg: ToyModelConfig):
        super().__init__()
        self.config = cfg
        self.token_embedding = nn.Embedding(cfg.vocab_size, cfg.d_model)
        self.position_embedding: nn.Embedding | None = None
        if cfg.variant == HeadVariant.ABSOLUTE:
            self.position_embedding = nn.Embedding(cfg.max_positions, cfg.d_model)
        self.blocks = nn.ModuleList(DecoderBlock(cfg) for _ in range(cfg.layers))
        self.final_norm = nn.LayerNorm(cfg.d_model)
        self.lm_head = nn.Linear(cfg.d_model, cfg.vocab_size)
        self._init_weights()

    def _init_weights(self) -> None:
        with torch.no_grad():
            for name, param in self.named_parameters():
                if ".priors." in name:
                    continue
                if param.ndim >= 2:
                    nn.init.normal_(param, std=INIT_STD)
                elif name.endswith("bias"):
                    nn.init.zeros_(param)

        if self.config.prior_init == PriorInit.ALIBI:
            for prior in self.priors():
                prior.set_recency(self.config.recency_decay)

    def priors(self) -> list[GoatPrior]:
        return [
            prior
            for block in self.blocks
            if block.attn.priors is not None
            for prior in block.attn.priors
        ]

    def _check_tokens(self, tokens: torch.Tensor) -> None:
        if tokens.ndim != 2:
            raise DomainError(
                "Tokens must be a (batch, length) matrix",
                error_data={"shape": list(tokens.shape)},
            )
        if tokens.numel() and (
            tokens.min() < 0 or tokens.max() >= self.config.vocab_size
        ):
            raise DomainError(
                "Token ids out of vocabulary",
                error_data={"vocab_size": self.config.vocab_size},
            )
        if (
            self.position_embedding is not None
            and tokens.shape[1] > self.config.max_positions
        ):
            raise DomainError(
                "Sequence longer than the learned position table",
                error_data={
                    "length": tokens.shape[1],
                    "max_positions": self.config.max_positions,
                },
            )

    def forward(
        self,
        tokens: torch.Tensor,
        return_weights: bool = False,
    ) -> ForwardPass:
        self._check_tokens(tokens)
        x = self.token_embedding(tokens)
        if self.position_embedding is not None:
            positions = torch.arange(tokens.shape[1], device=tokens.device)
            x = x + self.position_embedding(positions)

        attention = []
        for block in self.blocks:
            x, weights = block(x, return_weights)
            if weights is not None:
                attention.append(weights)
        return ForwardPass(logits=self.lm_head(self.final_norm(x)), attention=attention)


def build_model(cfg: ToyModelConfig) -> ToyLM:
    """Model initialised deterministically from `cfg.seed`."""
    torch.manual_seed(cfg.seed)
    return ToyLM(cfg)


def forward(model: ToyLM, tokens: torch.Tensor) -> ForwardPass:
    return model(tokens, return_weights=True)


def next_token_loss(
    logits: torch.Tensor,
    tokens: torch.Tensor,
    targets: torch.Tensor | None = None,
) -> torch.Tensor:
    """Mean cross-entropy of predictions at positions 0..L-2 against tokens
    1..L-1; position 0 has no target."""
    if targets is None:
        targets = tokens[:, 1:]
    predictions = logits[:, :-1]
    if targets.shape != predictions.shape[:-1]:
        raise DomainError(
            "Targets must align with the next-token predictions",
            error_data={
                "targets": list(targets.shape),
                "predictions": list(predictions.shape[:-1]),
            },
        )
    return F.cross_entropy(
        predictions.reshape(-1, predictions.shape[-1]),
        targets.reshape(-1),
    )


def backward(
    model: ToyLM,
    tokens: torch.Tensor,
    targets: torch.Tensor | None = None,
) -> dict[str, torch.Tensor]:
    """Gradients of the mean next-token cross-entropy for every parameter."""
    model.zero_grad(set_to_none=True)
    loss = next_token_loss(model(tokens).logits, tokens, targets)
    loss.backward()
    return {
        name: (
            param.grad.detach().clone()
            if param.grad is not None
            else torch.zeros_like(param)
        )
        for name, param in model.named_parameters()
    }


def attention_weights(model: ToyLM, tokens: torch.Tensor, layer: int) -> torch.Tensor:
    if not 0 <= layer < len(model.blocks):
        raise DomainError(
            "Layer index out of range",
            error_data={"layer": layer, "layers": len(model.blocks)},
        )
    with torch.no_grad():
        return model(tokens, return_weights=True).attention[layer]
