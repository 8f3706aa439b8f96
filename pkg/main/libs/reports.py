import csv
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from main.commons.exceptions import DomainError
from main.libs.log import get_logger


logger = get_logger(__name__)


def _row(record: BaseModel | dict[str, Any]) -> dict[str, Any]:
    if isinstance(record, BaseModel):
        return record.model_dump(mode="json", by_alias=True)
    return record


def write_csv(
    path: Path,
    records: Iterable[BaseModel | dict[str, Any]],
    columns: Sequence[str],
) -> Path:
    """Header row then one line per record; floats use repr, so reruns with
    the same values are byte-identical."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for record in records:
            row = _row(record)
            writer.writerow({column: row[column] for column in columns})
    logger.info("CSV written", data={"path": str(path)})
    return path


def write_matrix_csv(path: Path, matrix: np.ndarray) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, matrix, delimiter=",", fmt="%.17g")
    return path


def write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json", by_alias=True)
    elif isinstance(payload, list):
        payload = [_row(item) for item in payload]
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    path.write_text(text, encoding="utf-8")
    logger.info("JSON written", data={"path": str(path)})
    return path


def to_gray(matrix: np.ndarray) -> np.ndarray:
    """Min-max normalise to 0..255; a constant matrix maps to 0."""
    matrix = np.nan_to_num(np.asarray(matrix, dtype=np.float64))
    low, high = matrix.min(), matrix.max()
    if high == low:
        return np.zeros(matrix.shape, dtype=np.uint8)
    scaled = (matrix - low) / (high - low) * 255.0
    return np.rint(scaled).astype(np.uint8)


def write_pgm(path: Path, matrix: np.ndarray) -> Path:
    """Binary greyscale (P5) image, row-major, max value 255."""
    gray = to_gray(matrix)
    if gray.ndim != 2:
        raise DomainError("A PGM image needs a 2-D matrix")
    height, width = gray.shape
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    path.write_bytes(header + np.ascontiguousarray(gray).tobytes())
    return path
