"""
Reference scaled dot-product attention over GOAT composite vectors.

`sdpa` is the product path: the prior rides inside q' and k', so nothing of
size L x L is allocated besides the logits an unfused kernel needs anyway.
`explicit_bias_attention` adds a dense L x L log-prior to content logits; it
is O(L^2) in memory and exists to cross-check the composite path.
"""

from dataclasses import dataclass, field

import numpy as np

from main.commons.exceptions import DomainError
from main.schemas.attention import AttentionBatch, GoatBlockParams, GoatHeadParams
from main.schemas.prior import GoatHeadConfig, SinkBiasParams, SpectralPriorParams

from .prior import compose_key, compose_query, geometric_frequencies, log_prior_matrix


@dataclass
class AllocationMeter:
    """Tally of matrix payload bytes a forward path allocates on top of the
    content projections and logits."""

    records: dict[str, int] = field(default_factory=dict)

    def track(self, name: str, array: np.ndarray) -> None:
        self.records[name] = self.records.get(name, 0) + int(array.nbytes)

    @property
    def total(self) -> int:
        return sum(self.records.values())


def masked_softmax_rows(logits: np.ndarray, causal: bool) -> np.ndarray:
    if causal:
        admissible = np.tril(np.ones(logits.shape, dtype=bool))
        logits = np.where(admissible, logits, -np.inf)
    row_max = logits.max(axis=-1, keepdims=True)
    if not np.all(np.isfinite(row_max)):
        raise DomainError("A query row has no admissible key")
    weights = np.exp(logits - row_max)
    return weights / weights.sum(axis=-1, keepdims=True)


def _attend(
    queries: np.ndarray,
    keys: np.ndarray,
    values: np.ndarray,
    causal: bool,
) -> tuple[np.ndarray, np.ndarray]:
    scale = np.sqrt(queries.shape[-1]).astype(queries.dtype)
    weights = masked_softmax_rows(queries @ keys.T / scale, causal)
    return weights @ values, weights


def sdpa(batch: AttentionBatch) -> tuple[np.ndarray, np.ndarray]:
    return _attend(batch.queries, batch.keys, batch.values, batch.causal)


def explicit_bias_attention(
    q_c,
    k_c,
    values,
    bias,
    causal: bool = True,
    meter: AllocationMeter | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    q_c, k_c, values, bias = (np.asarray(a) for a in (q_c, k_c, values, bias))
    length = q_c.shape[0]
    shapes_ok = (
        q_c.ndim == k_c.ndim == values.ndim == 2
        and q_c.shape[1] == k_c.shape[1]
        and k_c.shape[0] == values.shape[0] == length
        and bias.shape == (length, length)
    )
    if not shapes_ok:
        raise DomainError(
            "Inconsistent shapes for explicit-bias attention",
            error_data={
                "q_c": list(q_c.shape),
                "k_c": list(k_c.shape),
                "values": list(values.shape),
                "bias": list(bias.shape),
            },
        )
    if meter is not None:
        meter.track("bias", bias)

    scale = np.sqrt(q_c.shape[1]).astype(q_c.dtype)
    weights = masked_softmax_rows(q_c @ k_c.T / scale + bias, causal)
    return weights @ values, weights


def _project(hidden, params: GoatHeadParams, cfg: GoatHeadConfig):
    hidden = np.asarray(hidden, dtype=np.float64)
    if hidden.ndim != 2:
        raise DomainError("Hidden states must be an L x d_model matrix")
    params.check(cfg, hidden.shape[1])
    return hidden @ params.w_q, hidden @ params.w_k, hidden @ params.w_v


def composite_vectors(
    hidden,
    params: GoatHeadParams,
    cfg: GoatHeadConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    q_c, k_c, values = _project(hidden, params, cfg)
    positions = np.arange(q_c.shape[0])
    queries = compose_query(q_c, positions, params.spectral, cfg)
    keys = compose_key(k_c, positions, params.spectral, params.sink, cfg)
    return queries, keys, values


def goat_head_forward(
    hidden,
    params: GoatHeadParams,
    cfg: GoatHeadConfig,
    dtype=np.float64,
    meter: AllocationMeter | None = None,
) -> np.ndarray:
    """Single GOAT head: composite q'/k' through an unmodified SDPA."""
    queries, keys, values = composite_vectors(hidden, params, cfg)
    if meter is not None:
        meter.track("q_positional", queries[:, cfg.d_c :])
        meter.track("k_positional", keys[:, cfg.d_c :])
    outputs, _ = _attend(
        queries.astype(dtype),
        keys.astype(dtype),
        values.astype(dtype),
        cfg.causal,
    )
    return outputs


def goat_head_reference(
    hidden,
    params: GoatHeadParams,
    cfg: GoatHeadConfig,
    dtype=np.float64,
    meter: AllocationMeter | None = None,
) -> np.ndarray:
    """The same head through content logits plus a dense log-prior matrix."""
    q_c, k_c, values = _project(hidden, params, cfg)
    bias = log_prior_matrix(q_c.shape[0], params.spectral, params.sink)
    outputs, _ = explicit_bias_attention(
        q_c.astype(dtype),
        k_c.astype(dtype),
        values.astype(dtype),
        bias.astype(dtype),
        cfg.causal,
        meter=meter,
    )
    return outputs


def goat_attention_forward(
    hidden,
    block: GoatBlockParams,
    cfg: GoatHeadConfig,
) -> np.ndarray:
    """Multi-head block: heads side by side, mixed by the output projection."""
    heads = [goat_head_forward(hidden, head, cfg) for head in block.heads]
    concatenated = np.concatenate(heads, axis=-1)
    if block.w_o.shape[0] != concatenated.shape[-1]:
        raise DomainError(
            "Output projection does not match the concatenated heads",
            error_data={
                "w_o": list(block.w_o.shape),
                "heads_width": concatenated.shape[-1],
            },
        )
    return concatenated @ block.w_o


def random_head_params(
    rng: np.random.Generator,
    d_model: int,
    cfg: GoatHeadConfig,
    l_ref: int = 1024,
    sink_hidden: int = 16,
    zero_prior: bool = False,
) -> GoatHeadParams:
    scale = 1.0 / np.sqrt(d_model)
    frequencies = geometric_frequencies(cfg.R)
    if zero_prior:
        spectral = SpectralPriorParams.zeros(frequencies)
        sink = SinkBiasParams.zeros(l_ref=l_ref, hidden=sink_hidden)
    else:
        spectral = SpectralPriorParams(
            frequencies=frequencies,
            alpha=rng.normal(size=cfg.R),
            beta=rng.normal(size=cfg.R),
        )
        sink = SinkBiasParams.random(rng, l_ref=l_ref, hidden=sink_hidden)
    return GoatHeadParams(
        w_q=rng.normal(scale=scale, size=(d_model, cfg.d_c)),
        w_k=rng.normal(scale=scale, size=(d_model, cfg.d_c)),
        w_v=rng.normal(scale=scale, size=(d_model, cfg.d_h)),
        spectral=spectral,
        sink=sink,
    )
