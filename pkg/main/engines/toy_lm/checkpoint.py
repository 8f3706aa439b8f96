"""
JSON checkpoints: the model configuration echo plus every named parameter as
a shape and a flat row-major list of values. Fixed buffers (frequencies,
sink wavelengths) are rebuilt from the configuration on load.
"""

from pathlib import Path

import pydantic
import torch

from main.commons.exceptions import DomainError, NotFound, validation_details
from main.libs.log import get_logger
from main.schemas.toy import CheckpointDocument, ParameterArray, ToyTaskSpec

from .model import ToyLM


logger = get_logger(__name__)


def checkpoint_document(
    model: ToyLM,
    step: int,
    task: ToyTaskSpec | None = None,
) -> CheckpointDocument:
    return CheckpointDocument(
        step=step,
        config=model.config,
        task=task,
        parameters={
            name: ParameterArray(
                shape=list(param.shape),
                values=param.detach().double().reshape(-1).tolist(),
            )
            for name, param in model.state_dict().items()
        },
    )


def save_checkpoint(
    model: ToyLM,
    path: Path,
    step: int,
    task: ToyTaskSpec | None = None,
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    document = checkpoint_document(model, step, task)
    path.write_text(document.model_dump_json(indent=1), encoding="utf-8")
    logger.info("Checkpoint written", data={"path": str(path), "step": step})
    return path


def model_from_document(document: CheckpointDocument) -> ToyLM:
    model = ToyLM(document.config)
    state = model.state_dict()
    if set(state) != set(document.parameters):
        raise DomainError(
            "Checkpoint parameters do not match the configured model",
            error_data={
                "missing": sorted(set(state) - set(document.parameters)),
                "unexpected": sorted(set(document.parameters) - set(state)),
            },
        )
    loaded = {}
    for name, array in document.parameters.items():
        tensor = torch.tensor(array.values, dtype=state[name].dtype)
        expected = list(state[name].shape)
        if expected != array.shape or tensor.numel() != state[name].numel():
            raise DomainError(
                "Checkpoint parameter has the wrong shape",
                error_data={"name": name, "shape": array.shape},
            )
        loaded[name] = tensor.reshape(array.shape)
    model.load_state_dict(loaded)
    model.eval()
    return model


def load_checkpoint(path: Path) -> tuple[ToyLM, CheckpointDocument]:
    if not path.is_file():
        raise NotFound(
            "Checkpoint not found",
            error_data={"path": str(path)},
        )
    try:
        document = CheckpointDocument.model_validate_json(
            path.read_text(encoding="utf-8"),
        )
    except pydantic.ValidationError as e:
        raise DomainError(
            "Checkpoint is not a valid document",
            error_data={"path": str(path), "errors": validation_details(e)},
        ) from e
    return model_from_document(document), document
