"""Shared fixtures; puts the repository root on sys.path"""
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT_DIR = Path(__file__).resolve().parent
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def small_sample(rng) -> np.ndarray:
    """24 x 2 normal sample with a location shift after row 10"""
    values = rng.standard_normal((24, 2))
    values[10:] += 3.0
    return values


@pytest.fixture
def tied_sample() -> np.ndarray:
    return np.array([
        [1.0, 2.0],
        [1.0, 1.0],
        [3.0, 2.0],
        [2.0, 5.0],
        [2.0, 5.0],
        [0.0, 4.0],
    ])


@pytest.fixture
def csv_file(tmp_path, rng):
    """Write a CSV with a date column and two numeric columns; returns its path"""
    def write(rows: int = 30, header: bool = True) -> Path:
        values = rng.standard_normal((rows, 2))
        dates = [f"1987-01-{i + 1:02d}" if i < 31 else f"1987-02-{i - 30:02d}" for i in range(rows)]
        lines = ["date,djia,nasdaq"] if header else []
        lines += [f"{d},{a:.6f},{b:.6f}" for d, (a, b) in zip(dates, values)]
        path = tmp_path / "returns.csv"
        path.write_text("\n".join(lines) + "\n")
        return path
    return write
