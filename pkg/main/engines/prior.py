"""
The GOAT log-prior K_ij = K_rel(i - j) + u(j).

K_rel is a truncated Fourier series in the displacement i - j. Through the
angle-difference identities it factorises exactly into <q_rel(i), k_rel(j)>,
where k_rel(j) is the Fourier feature of j and q_rel(i) its rotation by the
spectral weights. u(j) is a key-only bias broadcast over every query row.
Composite vectors carry both components through an unmodified SDPA call.
"""

import numpy as np
import pydantic

from main.commons.exceptions import DomainError, validation_details
from main.schemas.prior import (
    GoatHeadConfig,
    PriorDocument,
    SinkBiasParams,
    SpectralPriorParams,
)


DEFAULT_OMEGA_MIN = 2 * np.pi / 4096
DEFAULT_OMEGA_MAX = np.pi


def geometric_frequencies(
    R: int,
    omega_min: float = DEFAULT_OMEGA_MIN,
    omega_max: float = DEFAULT_OMEGA_MAX,
) -> np.ndarray:
    if R < 0:
        raise DomainError("R must be non-negative", error_data={"R": R})
    if not 0 < omega_min < omega_max <= np.pi:
        raise DomainError(
            "Frequencies must satisfy 0 < omega_min < omega_max <= pi",
            error_data={"omega_min": omega_min, "omega_max": omega_max},
        )
    if R == 0:
        return np.empty(0)
    if R == 1:
        return np.array([omega_min])
    return np.geomspace(omega_min, omega_max, R)


def _phases(positions, frequencies: np.ndarray) -> np.ndarray:
    return np.multiply.outer(np.asarray(positions, dtype=np.float64), frequencies)


def _interleave(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    # (..., R) x 2 -> (..., 2R) as [first_0, second_0, first_1, second_1, ...]
    stacked = np.stack([first, second], axis=-1)
    return stacked.reshape(*first.shape[:-1], 2 * first.shape[-1])


def relative_log_prior(i, j, params: SpectralPriorParams):
    # integer displacement first: the value depends on (i, j) only through i - j
    displacement = np.subtract(i, j)
    phase = _phases(displacement, params.frequencies)
    value = (params.alpha * np.cos(phase) + params.beta * np.sin(phase)).sum(axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def fourier_key(j, frequencies) -> np.ndarray:
    phase = _phases(j, np.asarray(frequencies, dtype=np.float64))
    return _interleave(np.cos(phase), np.sin(phase))


def spectral_rotate_query(i, params: SpectralPriorParams) -> np.ndarray:
    phase = _phases(i, params.frequencies)
    cos, sin = np.cos(phase), np.sin(phase)
    alpha, beta = params.alpha, params.beta
    return _interleave(alpha * cos + beta * sin, alpha * sin - beta * cos)


def sink_wavelengths(feature_count: int, l_ref: int) -> np.ndarray:
    pairs = feature_count // 2
    if pairs == 0:
        return np.empty(0)
    return np.geomspace(4.0, max(2.0 * l_ref, 8.0), pairs)


def sink_features(j, feature_count: int, l_ref: int) -> np.ndarray:
    """Sinusoids of j at geometric wavelengths plus the scalar j / l_ref."""
    positions = np.asarray(j, dtype=np.float64)
    phase = _phases(positions, 2 * np.pi / sink_wavelengths(feature_count, l_ref))
    sinusoids = _interleave(np.sin(phase), np.cos(phase))
    return np.concatenate([sinusoids, (positions / l_ref)[..., None]], axis=-1)


def sink_bias(j, params: SinkBiasParams):
    if np.any(np.asarray(j) < 0):
        raise DomainError("Key positions must be non-negative")
    features = sink_features(j, params.feature_count, params.l_ref)
    hidden = np.tanh(features @ params.mlp_w1.T + params.mlp_b1)
    linear = params.slope * features[..., -1]
    value = linear + hidden @ params.mlp_w2 + params.mlp_b2
    return float(value) if np.ndim(value) == 0 else value


def _check_head(spectral: SpectralPriorParams, cfg: GoatHeadConfig) -> None:
    if spectral.rank != cfg.R:
        raise DomainError(
            "Spectral rank does not match the head configuration",
            error_data={"spectral_R": spectral.rank, "cfg_R": cfg.R},
        )


def _check_content(vectors: np.ndarray, cfg: GoatHeadConfig, name: str) -> None:
    if vectors.shape[-1:] != (cfg.d_c,):
        raise DomainError(
            f"{name} must have d_c = {cfg.d_c} content lanes",
            error_data={"shape": list(vectors.shape), "d_c": cfg.d_c},
        )


def compose_query(
    q_c,
    i,
    spectral: SpectralPriorParams,
    cfg: GoatHeadConfig,
) -> np.ndarray:
    """[q_c sqrt(d_h/d_c), q_rel sqrt(d_h), sqrt(d_h), 0]"""
    q_c = np.asarray(q_c, dtype=np.float64)
    _check_content(q_c, cfg, "q_c")
    _check_head(spectral, cfg)
    batch_shape = q_c.shape[:-1]
    root = np.sqrt(cfg.d_h)
    q_rel = np.broadcast_to(
        spectral_rotate_query(i, spectral),
        (*batch_shape, 2 * cfg.R),
    )
    return np.concatenate(
        [
            q_c * np.sqrt(cfg.d_h / cfg.d_c),
            q_rel * root,
            np.full((*batch_shape, 1), root),
            np.zeros((*batch_shape, 1)),
        ],
        axis=-1,
    )


def compose_key(
    k_c,
    j,
    spectral: SpectralPriorParams,
    sink: SinkBiasParams,
    cfg: GoatHeadConfig,
) -> np.ndarray:
    """[k_c, k_rel, u(j), 0]"""
    k_c = np.asarray(k_c, dtype=np.float64)
    _check_content(k_c, cfg, "k_c")
    _check_head(spectral, cfg)
    batch_shape = k_c.shape[:-1]
    k_rel = np.broadcast_to(
        fourier_key(j, spectral.frequencies),
        (*batch_shape, 2 * cfg.R),
    )
    u = np.broadcast_to(sink_bias(j, sink), batch_shape)
    return np.concatenate(
        [k_c, k_rel, np.asarray(u)[..., None], np.zeros((*batch_shape, 1))],
        axis=-1,
    )


def compose_vectors(
    q_c,
    k_c,
    i,
    j,
    spectral: SpectralPriorParams,
    sink: SinkBiasParams,
    cfg: GoatHeadConfig,
) -> tuple[np.ndarray, np.ndarray]:
    return (
        compose_query(q_c, i, spectral, cfg),
        compose_key(k_c, j, spectral, sink, cfg),
    )


def relative_log_prior_matrix(length: int, spectral: SpectralPriorParams) -> np.ndarray:
    positions = np.arange(length)
    return relative_log_prior(positions[:, None], positions[None, :], spectral)


def sink_bias_matrix(length: int, sink: SinkBiasParams) -> np.ndarray:
    u = np.asarray(sink_bias(np.arange(length), sink))
    return np.broadcast_to(u, (length, length)).copy()


def log_prior_matrix(
    length: int,
    spectral: SpectralPriorParams,
    sink: SinkBiasParams,
) -> np.ndarray:
    return relative_log_prior_matrix(length, spectral) + sink_bias_matrix(length, sink)


def dump_prior_params(spectral: SpectralPriorParams, sink: SinkBiasParams) -> str:
    document = PriorDocument(
        frequencies=spectral.frequencies.tolist(),
        alpha=spectral.alpha.tolist(),
        beta=spectral.beta.tolist(),
        slope=sink.slope,
        mlp_w1=sink.mlp_w1.tolist(),
        mlp_b1=sink.mlp_b1.tolist(),
        mlp_w2=sink.mlp_w2.tolist(),
        mlp_b2=sink.mlp_b2,
        feature_count=sink.feature_count,
        l_ref=sink.l_ref,
    )
    return document.model_dump_json(indent=2)


def prior_params_from_document(
    document: PriorDocument,
) -> tuple[SpectralPriorParams, SinkBiasParams]:
    spectral = SpectralPriorParams(
        frequencies=document.frequencies,
        alpha=document.alpha,
        beta=document.beta,
    )
    # reshape so an empty hidden layer still yields a (0, F + 1) matrix
    try:
        w1 = np.array(document.mlp_w1, dtype=np.float64).reshape(
            len(document.mlp_b1),
            document.feature_count + 1,
        )
    except ValueError as e:
        raise DomainError(
            "mlp_w1 must be a hidden x (feature_count + 1) matrix",
            error_data={
                "hidden": len(document.mlp_b1),
                "feature_count": document.feature_count,
            },
        ) from e
    sink = SinkBiasParams(
        slope=document.slope,
        mlp_w1=w1,
        mlp_b1=document.mlp_b1,
        mlp_w2=document.mlp_w2,
        mlp_b2=document.mlp_b2,
        feature_count=document.feature_count,
        l_ref=document.l_ref,
    )
    return spectral, sink


def load_prior_params(text: str) -> tuple[SpectralPriorParams, SinkBiasParams]:
    try:
        document = PriorDocument.model_validate_json(text)
    except pydantic.ValidationError as e:
        raise DomainError(
            "Malformed prior document",
            error_data={"errors": validation_details(e)},
        ) from e
    return prior_params_from_document(document)
