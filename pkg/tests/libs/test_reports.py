import json

import numpy as np
import pytest

from main.commons.exceptions import DomainError
from main.libs.reports import to_gray, write_csv, write_json, write_pgm


def test_gray_scale_is_min_max_normalised():
    gray = to_gray(np.array([[-1.0, 0.0], [1.0, 3.0]]))
    assert gray.dtype == np.uint8
    assert gray.tolist() == [[0, 64], [128, 255]]


def test_constant_matrix_is_black():
    assert to_gray(np.full((3, 3), 7.0)).max() == 0


def test_masked_entries_do_not_break_the_scale():
    gray = to_gray(np.array([[0.0, -np.inf], [1.0, 0.5]]))
    assert gray.shape == (2, 2)


def test_pgm_rejects_vectors(tmp_path):
    with pytest.raises(DomainError):
        write_pgm(tmp_path / "x.pgm", np.zeros(4))


def test_pgm_is_row_major(tmp_path):
    path = write_pgm(tmp_path / "x.pgm", np.array([[0.0, 1.0, 2.0]]))
    assert path.read_bytes() == b"P5\n3 1\n255\n" + bytes([0, 128, 255])


def test_csv_has_header_and_fixed_columns(tmp_path):
    path = write_csv(
        tmp_path / "t.csv",
        [{"a": 1, "b": 0.1, "c": "ignored"}, {"a": 2, "b": 1e-17, "c": None}],
        ("a", "b"),
    )
    assert path.read_text() == "a,b\n1,0.1\n2,1e-17\n"


def test_json_is_sorted(tmp_path):
    path = write_json(tmp_path / "r.json", {"b": 1, "a": [1, 2]})
    assert list(json.loads(path.read_text())) == ["a", "b"]
