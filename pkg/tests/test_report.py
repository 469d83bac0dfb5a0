import json
import math
import os

import numpy as np
import pandas as pd
import pytest

from src.constants import SCHEMA_VERSION
from src.error_handler import DomainError
from src.report import (
    HeatmapAxes,
    dumps_json,
    emit_heatmap,
    read_csv,
    save_json,
    write_csv,
)

AXES = HeatmapAxes("gamma", "phi", (0.0, 1.0), (0.0, 2 * math.pi), color_label="p")


def sample_frame() -> pd.DataFrame:
    return pd.DataFrame(
        {
            "id": [0, 1, 2],
            "p": [0.75, math.inf, 1.0 / 3.0],
            "inv_s": [64.0, 0.0, 0.1 + 0.2],
        }
    )


def test_csv_round_trip(tmp_path) -> None:
    path = os.path.join(tmp_path, "scan.csv")
    write_csv(sample_frame(), path, {"seed": 7, "lambda": [0.1, 0.0, 0.0]})
    frame, metadata = read_csv(path)

    assert metadata == {
        "schema_version": SCHEMA_VERSION,
        "seed": 7,
        "lambda": [0.1, 0.0, 0.0],
    }
    assert list(frame.columns) == ["id", "p", "inv_s"]
    assert math.isinf(frame["p"][1])
    assert frame["p"][2] == 1.0 / 3.0
    assert frame["inv_s"][2] == 0.1 + 0.2


def test_csv_is_byte_stable(tmp_path) -> None:
    first = os.path.join(tmp_path, "a.csv")
    second = os.path.join(tmp_path, "nested", "b.csv")
    write_csv(sample_frame(), first, {"seed": 1})
    write_csv(sample_frame(), second, {"seed": 1})
    with open(first, "rb") as a, open(second, "rb") as b:
        assert a.read() == b.read()


def test_json_infinities() -> None:
    data = {"p": math.inf, "values": np.array([1.0, -np.inf]), "n": np.int64(3)}
    assert json.loads(dumps_json(data)) == {"p": "inf", "values": [1.0, "-inf"], "n": 3}


def test_save_json(tmp_path) -> None:
    path = os.path.join(tmp_path, "out.json")
    save_json({"inv_s": 64.0, "singular": False}, path)
    with open(path, encoding="utf-8") as f:
        text = f.read()
    assert text.endswith("}\n")
    assert json.loads(text) == {"inv_s": 64.0, "singular": False}


def test_heatmap_single_cell(tmp_path) -> None:
    path = os.path.join(tmp_path, "cell.svg")
    emit_heatmap(np.array([[0.75]]), AXES, path, {"seed": 0})
    with open(path, encoding="utf-8") as f:
        text = f.read()
    assert text.startswith("<?xml")
    assert "<svg" in text


def test_heatmap_is_deterministic(tmp_path) -> None:
    values = np.array([[0.75, 1.0], [np.inf, 2.0]])
    paths = [os.path.join(tmp_path, f"{name}.svg") for name in ("a", "b")]
    for path in paths:
        emit_heatmap(values, AXES, path, {"seed": 0})
    with open(paths[0], "rb") as a, open(paths[1], "rb") as b:
        assert a.read() == b.read()


def test_heatmap_rejects_empty(tmp_path) -> None:
    with pytest.raises(DomainError, match="empty"):
        emit_heatmap(np.empty((0, 3)), AXES, os.path.join(tmp_path, "none.svg"))
