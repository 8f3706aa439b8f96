import pytest

from main.engines.toy_lm.gradcheck import GRADCHECK_CONFIG
from main.schemas.toy import OptimizerConfig, ToyModelConfig, ToyTaskSpec


@pytest.fixture
def tiny_config() -> ToyModelConfig:
    return GRADCHECK_CONFIG.model_copy(
        update={"optimizer": OptimizerConfig(batch_size=4, warmup_steps=2)},
    )


@pytest.fixture
def tiny_task() -> ToyTaskSpec:
    return ToyTaskSpec(vocab_size=8, seq_len=8, seed=3)
