import numpy as np
import pytest

from main.commons.exceptions import NotFound
from main.engines.toy_lm import build_model, save_checkpoint
from main.engines.toy_lm.gradcheck import GRADCHECK_CONFIG, randomize_priors
from main.schemas.config import DumpPriorConfig
from main.services.prior_dump import dump_prior


@pytest.fixture
def checkpoint(tmp_path, rng):
    model = build_model(GRADCHECK_CONFIG)
    randomize_priors(model, rng)
    return save_checkpoint(model, tmp_path / "model.json", 0)


def test_every_panel_is_written(checkpoint, tmp_path):
    out = tmp_path / "panels"
    cfg = DumpPriorConfig(checkpoint=checkpoint, length=12, output_dir=out)
    written = dump_prior(cfg)
    assert {path.name for path in written} == {
        f"{panel}.{ext}"
        for panel in ("k_sink", "k_rel", "k_centered", "induced_prior")
        for ext in ("csv", "pgm")
    }

    matrix = np.loadtxt(out / "induced_prior.csv", delimiter=",")
    assert matrix.shape == (12, 12)
    np.testing.assert_allclose(matrix.sum(axis=1), 1.0)

    image = (out / "k_rel.pgm").read_bytes()
    header = b"P5\n12 12\n255\n"
    assert image.startswith(header)
    pixels = np.frombuffer(image[len(header) :], dtype=np.uint8)
    assert pixels.size == 144
    assert pixels.min() == 0 and pixels.max() == 255


def test_second_layer_head(checkpoint, tmp_path):
    cfg = DumpPriorConfig(
        checkpoint=checkpoint,
        head=1,
        layer=1,
        length=4,
        output_dir=tmp_path,
    )
    assert len(dump_prior(cfg)) == 8


def test_missing_checkpoint(tmp_path):
    with pytest.raises(NotFound) as exc_info:
        dump_prior(
            DumpPriorConfig(checkpoint=tmp_path / "none.json", output_dir=tmp_path),
        )
    assert exc_info.value.exit_code == 2
