"""Tests for learning-curve sets."""

import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.errors import ContractError, GridMismatchError
from src.stats import CurveSet, check_shared_grid


def test_from_series_shapes():
    """One column per run."""
    curves = CurveSet.from_series("p", [10, 20, 30], [[0, 1, 2], [1, 2, 3]])

    assert curves.returns.shape == (3, 2)
    assert curves.run_count == 2


def test_csv_round_trip():
    """Long (step, run_id, return) tables convert both ways."""
    curves = CurveSet.from_series("p", [10, 20], [[0.5, 1.0], [0.25, 0.75]])
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "curves.csv"
        curves.to_frame().to_csv(path, index=False)

        loaded = CurveSet.from_csv(path, "p")

    assert np.array_equal(loaded.steps, curves.steps)
    assert np.allclose(loaded.returns, curves.returns)


def test_missing_evaluation_is_grid_error():
    """A run without a value at some step breaks the shared grid."""
    frame = pd.DataFrame({
        "step": [10, 20, 10],
        "run_id": [0, 0, 1],
        "return": [0.0, 1.0, 0.5],
    })

    with pytest.raises(GridMismatchError):
        CurveSet.from_frame(frame, "p")


def test_missing_columns_rejected():
    """The long format needs step, run_id and return."""
    with pytest.raises(ContractError):
        CurveSet.from_frame(pd.DataFrame({"step": [1], "value": [0.0]}), "p")


def test_validation():
    """Steps must increase and returns must be finite."""
    with pytest.raises(ContractError):
        CurveSet("p", [20, 10], np.zeros((2, 2)))
    with pytest.raises(ContractError):
        CurveSet("p", [10, 20], np.array([[0.0, np.nan], [0.0, 0.0]]))
    with pytest.raises(ContractError):
        CurveSet("p", [10, 20], np.zeros((3, 2)))


def test_trailing_mean_smoothing():
    """Each point averages the last ``window`` evaluations of its run."""
    curves = CurveSet.from_series("p", [1, 2, 3, 4], [[0.0, 2.0, 4.0, 6.0]])

    assert curves.smoothed(2).returns[:, 0].tolist() == [0.0, 1.0, 3.0, 5.0]
    assert curves.smoothed(1) is curves


def test_shared_grid_check():
    """Different step grids are rejected."""
    a = CurveSet.from_series("a", [1, 2], [[0.0, 0.0]])
    b = CurveSet.from_series("b", [1, 3], [[0.0, 0.0]])

    check_shared_grid(a, a)
    with pytest.raises(GridMismatchError):
        check_shared_grid(a, b)
