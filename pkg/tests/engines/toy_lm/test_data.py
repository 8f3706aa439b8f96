import numpy as np
import pytest

from main.commons.exceptions import DomainError
from main.engines.toy_lm import gen_copy_mixture, sample_copy_mixture
from main.enums import TokenSource
from main.schemas.toy import ToyTaskSpec


def test_noise_only_sequences_are_uniform():
    spec = ToyTaskSpec(vocab_size=8, seq_len=32, p_global=0, p_local=0, p_noise=1)
    tokens = gen_copy_mixture(spec, 2000)
    counts = np.bincount(tokens.ravel(), minlength=8)
    n = tokens.size
    sigma = np.sqrt(n * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - n / 8) <= 3 * sigma)


def test_global_only_copies_first_token():
    spec = ToyTaskSpec(p_global=1, p_local=0, p_noise=0)
    tokens = gen_copy_mixture(spec, 50)
    assert np.all(tokens == tokens[:, :1])


def test_local_only_gives_constant_sequences():
    spec = ToyTaskSpec(p_global=0, p_local=1, p_noise=0)
    tokens = gen_copy_mixture(spec, 50, seq_len=100)
    assert tokens.shape == (50, 100)
    assert np.all(tokens == tokens[:, :1])


def test_sources_match_tokens(rng):
    spec = ToyTaskSpec(vocab_size=16, seq_len=40)
    tokens, sources = sample_copy_mixture(spec, 64, rng)
    assert np.all(sources[:, 0] == TokenSource.NOISE)
    rows, cols = np.nonzero(sources == TokenSource.GLOBAL)
    assert np.all(tokens[rows, cols] == tokens[rows, 0])
    rows, cols = np.nonzero(sources == TokenSource.LOCAL)
    assert np.all(tokens[rows, cols] == tokens[rows, cols - 1])
    assert tokens.min() >= 0 and tokens.max() < 16


def test_generation_is_determined_by_seed():
    spec = ToyTaskSpec(seed=11)
    np.testing.assert_array_equal(gen_copy_mixture(spec, 8), gen_copy_mixture(spec, 8))
    other = spec.model_copy(update={"seed": 12})
    assert not np.array_equal(gen_copy_mixture(spec, 8), gen_copy_mixture(other, 8))


@pytest.mark.parametrize(
    "probabilities",
    [(0.5, 0.5, 0.5), (1.2, -0.1, -0.1), (0.3, 0.3, 0.3)],
)
def test_mixture_must_be_a_distribution(probabilities):
    p_global, p_local, p_noise = probabilities
    with pytest.raises(DomainError):
        ToyTaskSpec(p_global=p_global, p_local=p_local, p_noise=p_noise)
