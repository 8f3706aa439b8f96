import json
import math

import numpy as np
import pytest

from main.commons.exceptions import DomainError
from main.engines.prior import (
    compose_key,
    compose_query,
    dump_prior_params,
    fourier_key,
    geometric_frequencies,
    load_prior_params,
    log_prior_matrix,
    relative_log_prior,
    relative_log_prior_matrix,
    sink_bias,
    sink_bias_matrix,
    sink_features,
    spectral_rotate_query,
)
from main.schemas.prior import GoatHeadConfig, SinkBiasParams, SpectralPriorParams


def _spectral(rng, rank: int) -> SpectralPriorParams:
    return SpectralPriorParams(
        frequencies=geometric_frequencies(rank),
        alpha=rng.normal(size=rank),
        beta=rng.normal(size=rank),
    )


def test_geometric_frequencies_endpoints():
    frequencies = geometric_frequencies(4, 0.01, math.pi)
    assert frequencies[0] == pytest.approx(0.01)
    assert frequencies[-1] == pytest.approx(math.pi)
    assert np.all(np.diff(frequencies) > 0)
    assert geometric_frequencies(0).size == 0
    assert geometric_frequencies(1, 0.5).tolist() == [0.5]


@pytest.mark.parametrize(
    "args",
    [(-1,), (2, 0.0, 1.0), (2, 1.0, 0.5), (2, 0.1, 4.0)],
)
def test_geometric_frequencies_rejects_bad_ranges(args):
    with pytest.raises(DomainError):
        geometric_frequencies(*args)


def test_relative_prior_depends_only_on_displacement(rng):
    spectral = _spectral(rng, 4)
    assert relative_log_prior(10, 3, spectral) == relative_log_prior(107, 100, spectral)


def test_zero_rank_prior_is_zero():
    spectral = SpectralPriorParams.zeros(np.empty(0))
    assert relative_log_prior(5, 2, spectral) == 0.0
    assert spectral_rotate_query(5, spectral).shape == (0,)


def test_single_frequency_value():
    spectral = SpectralPriorParams(frequencies=[0.5], alpha=[2.0], beta=[-1.0])
    expected = 2.0 * math.cos(1.5) - math.sin(1.5)
    assert relative_log_prior(4, 1, spectral) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("rank", [1, 4, 8])
def test_spectral_factorization_exhaustive(rng, rank):
    spectral = _spectral(rng, rank)
    positions = np.arange(256)
    products = spectral_rotate_query(positions, spectral) @ fourier_key(
        positions,
        spectral.frequencies,
    ).T
    np.testing.assert_allclose(
        products,
        relative_log_prior_matrix(256, spectral),
        rtol=0,
        atol=1e-10,
    )


def test_fourier_key_lanes_are_interleaved():
    key = fourier_key(3, [0.25, 1.0])
    np.testing.assert_allclose(
        key,
        [math.cos(0.75), math.sin(0.75), math.cos(3.0), math.sin(3.0)],
    )


def test_sink_features_layout():
    features = sink_features(np.arange(5), 4, 16)
    assert features.shape == (5, 5)
    np.testing.assert_allclose(features[:, -1], np.arange(5) / 16)
    # the first wavelength is 4 positions
    np.testing.assert_allclose(features[:, 0], np.sin(2 * np.pi * np.arange(5) / 4))


def test_zero_sink_is_zero_everywhere():
    sink = SinkBiasParams.zeros(l_ref=64)
    np.testing.assert_array_equal(sink_bias(np.arange(100), sink), 0.0)


def test_alibi_init_is_key_linear():
    sink = SinkBiasParams.alibi_init(0.1, l_ref=32)
    np.testing.assert_allclose(sink_bias(np.arange(10), sink), 0.1 * np.arange(10))


def test_sink_bias_rejects_negative_positions():
    with pytest.raises(DomainError):
        sink_bias(-1, SinkBiasParams.zeros())


def test_sink_params_validation():
    with pytest.raises(DomainError):
        SinkBiasParams.zeros(feature_count=3)
    with pytest.raises(DomainError):
        SinkBiasParams(mlp_w1=np.zeros((2, 3)), mlp_b1=np.zeros(2), mlp_w2=np.zeros(3))


def test_spectral_params_validation():
    with pytest.raises(DomainError):
        SpectralPriorParams(frequencies=[0.2, 0.1], alpha=[0, 0], beta=[0, 0])
    with pytest.raises(DomainError):
        SpectralPriorParams(frequencies=[0.1, 0.2], alpha=[0], beta=[0, 0])
    with pytest.raises(DomainError):
        SpectralPriorParams(frequencies=[0.1], alpha=[math.nan], beta=[0])


def test_head_config_lanes():
    cfg = GoatHeadConfig(d_h=32, R=4)
    assert (cfg.d_p, cfg.d_c) == (10, 22)
    with pytest.raises(DomainError):
        GoatHeadConfig(d_h=10, R=4)


def test_composite_vectors_reproduce_logits(rng):
    cfg = GoatHeadConfig(d_h=16, R=3)
    spectral = _spectral(rng, 3)
    sink = SinkBiasParams.random(rng, l_ref=32, hidden=4)
    length = 20
    q_c = rng.normal(size=(length, cfg.d_c))
    k_c = rng.normal(size=(length, cfg.d_c))
    positions = np.arange(length)

    queries = compose_query(q_c, positions, spectral, cfg)
    keys = compose_key(k_c, positions, spectral, sink, cfg)
    assert queries.shape == keys.shape == (length, cfg.d_h)
    np.testing.assert_allclose(
        queries @ keys.T / math.sqrt(cfg.d_h),
        q_c @ k_c.T / math.sqrt(cfg.d_c) + log_prior_matrix(length, spectral, sink),
        rtol=0,
        atol=1e-10,
    )


def test_compose_rejects_mismatched_shapes(rng):
    cfg = GoatHeadConfig(d_h=16, R=3)
    with pytest.raises(DomainError):
        compose_query(np.zeros((4, cfg.d_c + 1)), np.arange(4), _spectral(rng, 3), cfg)
    with pytest.raises(DomainError):
        compose_query(np.zeros((4, cfg.d_c)), np.arange(4), _spectral(rng, 2), cfg)


def test_sink_matrix_is_row_broadcast(rng):
    sink = SinkBiasParams.random(rng, l_ref=16, hidden=3)
    matrix = sink_bias_matrix(6, sink)
    np.testing.assert_array_equal(matrix, np.tile(matrix[0], (6, 1)))


def test_prior_document_round_trip(rng):
    spectral = _spectral(rng, 2)
    sink = SinkBiasParams.random(rng, l_ref=128, hidden=3, feature_count=4)
    text = dump_prior_params(spectral, sink)
    assert set(json.loads(text)) >= {"frequencies", "alpha", "beta", "slope", "mlp_w1"}

    loaded_spectral, loaded_sink = load_prior_params(text)
    np.testing.assert_array_equal(loaded_spectral.alpha, spectral.alpha)
    np.testing.assert_array_equal(loaded_sink.mlp_w1, sink.mlp_w1)
    assert loaded_sink.l_ref == 128


def test_malformed_prior_document():
    with pytest.raises(DomainError):
        load_prior_params('{"frequencies": [0.1]}')


def test_sine_only_prior_is_antisymmetric(rng):
    spectral = SpectralPriorParams(
        frequencies=geometric_frequencies(4),
        alpha=np.zeros(4),
        beta=rng.normal(size=4),
    )
    for d in range(1, 40):
        assert relative_log_prior(d, 0, spectral) == pytest.approx(
            -relative_log_prior(0, d, spectral),
            abs=1e-12,
        )
