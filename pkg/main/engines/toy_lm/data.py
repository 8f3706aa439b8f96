"""
Copy-mixture sequences: after a uniform first token, every position copies
token 0, copies its predecessor, or draws fresh noise.
"""

import numpy as np

from main.enums import TokenSource
from main.schemas.toy import ToyTaskSpec


def sample_copy_mixture(
    spec: ToyTaskSpec,
    n_sequences: int,
    rng: np.random.Generator,
    seq_len: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Token matrix and the matching matrix of `TokenSource` labels."""
    length = seq_len or spec.seq_len
    tokens = np.empty((n_sequences, length), dtype=np.int64)
    tokens[:, 0] = rng.integers(spec.vocab_size, size=n_sequences)
    sources = rng.choice(
        [TokenSource.GLOBAL, TokenSource.LOCAL, TokenSource.NOISE],
        size=(n_sequences, length),
        p=[spec.p_global, spec.p_local, spec.p_noise],
    ).astype(np.int64)
    sources[:, 0] = TokenSource.NOISE
    noise = rng.integers(spec.vocab_size, size=(n_sequences, length))

    for t in range(1, length):
        tokens[:, t] = np.select(
            [sources[:, t] == TokenSource.GLOBAL, sources[:, t] == TokenSource.LOCAL],
            [tokens[:, 0], tokens[:, t - 1]],
            default=noise[:, t],
        )
    return tokens, sources


def gen_copy_mixture(
    spec: ToyTaskSpec,
    n_sequences: int,
    seq_len: int | None = None,
) -> np.ndarray:
    """Sequences fully determined by `spec.seed`."""
    tokens, _ = sample_copy_mixture(
        spec,
        n_sequences,
        np.random.default_rng(spec.seed),
        seq_len=seq_len,
    )
    return tokens
