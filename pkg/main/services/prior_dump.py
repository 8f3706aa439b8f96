from pathlib import Path

from main.engines.toy_lm import extract_prior_decomposition, load_checkpoint
from main.enums import Panel
from main.libs.log import get_logger
from main.libs.reports import write_matrix_csv, write_pgm
from main.schemas.config import DumpPriorConfig
from main.schemas.toy import PriorDecomposition


logger = get_logger(__name__)


def panels(decomposition: PriorDecomposition) -> dict[Panel, object]:
    return {
        Panel.K_SINK: decomposition.k_sink,
        Panel.K_REL: decomposition.k_rel,
        Panel.K_CENTERED: decomposition.k_total_centered,
        Panel.INDUCED_PRIOR: decomposition.induced_prior,
    }


def dump_prior(cfg: DumpPriorConfig) -> list[Path]:
    """Write every panel of one head's prior as `<panel>.csv` and
    `<panel>.pgm`; returns the written paths."""
    model, _ = load_checkpoint(cfg.checkpoint)
    decomposition = extract_prior_decomposition(model, cfg.head, cfg.length, cfg.layer)

    written = []
    for panel, matrix in panels(decomposition).items():
        written.append(write_matrix_csv(cfg.output_dir / f"{panel.value}.csv", matrix))
        written.append(write_pgm(cfg.output_dir / f"{panel.value}.pgm", matrix))
    logger.info(
        "Prior panels written",
        data={
            "checkpoint": str(cfg.checkpoint),
            "head": cfg.head,
            "layer": cfg.layer,
            "L": cfg.length,
        },
    )
    return written
