import numpy as np

from main.commons.exceptions import DomainError
from main.engines.attention import masked_softmax_rows
from main.engines.prior import relative_log_prior_matrix, sink_bias, sink_bias_matrix
from main.schemas.toy import PriorDecomposition

from .model import GoatPrior, ToyLM


def head_prior(model: ToyLM, head: int, layer: int = 0) -> GoatPrior:
    if not 0 <= layer < len(model.blocks):
        raise DomainError(
            "Layer index out of range",
            error_data={"layer": layer, "layers": len(model.blocks)},
        )
    priors = model.blocks[layer].attn.priors
    if priors is None:
        raise DomainError(
            "Head variant carries no learned prior",
            error_data={"variant": model.config.variant},
        )
    if not 0 <= head < len(priors):
        raise DomainError(
            "Head index out of range",
            error_data={"head": head, "heads": len(priors)},
        )
    return priors[head]


def decompose_prior(spectral, sink, length: int) -> PriorDecomposition:
    k_rel = relative_log_prior_matrix(length, spectral)
    k_sink = sink_bias_matrix(length, sink)
    total = k_rel + k_sink
    return PriorDecomposition(
        sink=sink_bias(np.arange(length), sink),
        k_sink=k_sink,
        k_rel=k_rel,
        # row shifts leave the softmax unchanged
        k_total_centered=total - total.mean(axis=1, keepdims=True),
        induced_prior=masked_softmax_rows(total, causal=True),
    )


def extract_prior_decomposition(
    model: ToyLM,
    head: int,
    length: int,
    layer: int = 0,
) -> PriorDecomposition:
    """Sink, relative, centred and induced causal prior of one head on an
    L x L grid, evaluated in double precision from the learned parameters."""
    if length < 1:
        raise DomainError("L must be positive", error_data={"L": length})
    spectral, sink = head_prior(model, head, layer).to_params()
    return decompose_prior(spectral, sink, length)


def prior_argmax_hits(induced_prior: np.ndarray, start: int = 8) -> float:
    """Share of rows i >= start whose argmax is the first key or key i-1."""
    rows = np.arange(start, induced_prior.shape[0])
    if rows.size == 0:
        raise DomainError("No rows past the start index", error_data={"start": start})
    argmax = induced_prior[rows].argmax(axis=1)
    return float(np.mean((argmax == 0) | (argmax == rows - 1)))
