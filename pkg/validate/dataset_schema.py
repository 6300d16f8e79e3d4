#!/usr/bin/env python3
"""
Input Dataset Validator
Validates the CSV matrix handed to `copulabreak test` and the --breaks list
Collects every problem found instead of stopping at the first one
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from estimate.errors import SampleError
from estimate.types import SampleMatrix

DATE_NAMES = ["date", "datetime", "time", "day", "timestamp"]
MIN_ROWS = 4
MIN_COLUMNS = 2


@dataclass(frozen=True)
class InputDataset:
    """Numeric matrix of a CSV file, with its column names and optional date labels"""

    sample: SampleMatrix
    columns: Tuple[str, ...]
    dates: Optional[Tuple[str, ...]] = None
    path: str = ""

    @property
    def n(self) -> int:
        return self.sample.n

    def label(self, index: int) -> Optional[str]:
        """Calendar label of 1-based observation index, if the file has dates"""
        if self.dates is None or not 1 <= index <= len(self.dates):
            return None
        return self.dates[index - 1]


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def _is_date(text: str) -> bool:
    return pd.notna(pd.to_datetime(pd.Series([text]), errors="coerce")).all()


def _read_raw(file_path: str) -> Tuple[Optional[pd.DataFrame], List[str]]:
    try:
        raw = pd.read_csv(file_path, header=None, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        return None, [f"Input file '{file_path}' not found"]
    except pd.errors.EmptyDataError:
        return None, [f"Input file '{file_path}' is empty"]
    except pd.errors.ParserError as e:
        return None, [f"CSV is not rectangular: {str(e).strip()}"]
    return raw, []


def _date_index(header: Optional[List[str]], body: pd.DataFrame, date_column: Optional[str]) -> Tuple[Optional[int], List[str]]:
    if date_column is not None:
        if header is not None and date_column in header:
            return header.index(date_column), []
        if date_column.isdigit() and int(date_column) < body.shape[1]:
            return int(date_column), []
        return None, [f"Date column '{date_column}' not found"]

    if header is not None:
        for i, name in enumerate(header):
            if name.strip().lower() in DATE_NAMES:
                return i, []
    # first column entirely non-numeric but readable as dates
    first = body.iloc[:, 0]
    if len(first) and not any(_is_number(v) for v in first):
        parsed = pd.to_datetime(first, errors="coerce")
        if parsed.notna().all():
            return 0, []
    return None, []


def validate_dataset_file(file_path: str, date_column: Optional[str] = None) -> Tuple[bool, List[str], Optional[InputDataset]]:
    """
    Validate an input CSV

    Validation checks:
    1. File exists, parses and is rectangular
    2. Optional header row and optional date column are recognized
    3. Every remaining cell is a finite number
    4. At least 4 rows and 2 numeric columns

    Returns: (is_valid, list_of_errors, dataset or None)
    """
    raw, errors = _read_raw(file_path)
    if raw is None:
        return False, errors, None

    first_row = [str(v) for v in raw.iloc[0]]
    data_like = all(_is_number(v) for v in first_row[1:]) and (_is_number(first_row[0]) or _is_date(first_row[0]))
    has_header = not data_like
    header = first_row if has_header else None
    body = raw.iloc[1:] if has_header else raw
    body = body.reset_index(drop=True)

    date_idx, date_errors = _date_index(header, body, date_column)
    errors.extend(date_errors)

    numeric_idx = [i for i in range(body.shape[1]) if i != date_idx]
    names = [header[i] if header else f"X{i + 1}" for i in numeric_idx]
    values = np.empty((body.shape[0], len(numeric_idx)))
    for out_col, col in enumerate(numeric_idx):
        for row in range(body.shape[0]):
            cell = body.iat[row, col]
            if not _is_number(cell):
                errors.append(f"Row {row + 1 + int(has_header)}, column '{names[out_col]}': '{cell}' is not numeric")
                continue
            values[row, out_col] = float(cell)
            if not np.isfinite(values[row, out_col]):
                errors.append(f"Row {row + 1 + int(has_header)}, column '{names[out_col]}': value is not finite")

    if body.shape[0] < MIN_ROWS:
        errors.append(f"Need at least {MIN_ROWS} rows, got {body.shape[0]}")
    if len(numeric_idx) < MIN_COLUMNS:
        errors.append(f"Need at least {MIN_COLUMNS} numeric columns, got {len(numeric_idx)}")
    if errors:
        return False, errors, None

    dates = tuple(body.iloc[:, date_idx]) if date_idx is not None else None
    dataset = InputDataset(sample=SampleMatrix(values), columns=tuple(names), dates=dates, path=file_path)
    return True, [], dataset


def load_dataset(file_path: str, date_column: Optional[str] = None) -> InputDataset:
    """Parsed dataset, or SampleError listing every problem found"""
    is_valid, errors, dataset = validate_dataset_file(file_path, date_column)
    if not is_valid:
        raise SampleError("; ".join(errors))
    return dataset


def parse_breaks(text: Optional[str], n: int) -> Tuple[Tuple[int, ...], List[str]]:
    """
    Parse "--breaks i1,i2,..." (1-based observation indices)
    Returns: (breaks, list_of_errors); an empty or missing text means no break
    """
    if text is None or not text.strip():
        return (), []
    errors = []
    breaks = []
    for token in text.split(","):
        token = token.strip()
        if not token.lstrip("-").isdigit():
            errors.append(f"Break '{token}' is not an integer")
            continue
        breaks.append(int(token))

    seen = set()
    for m in breaks:
        if m in seen:
            errors.append(f"Break {m} is listed twice")
        seen.add(m)
        if not 1 <= m <= n - 1:
            errors.append(f"Break {m} outside [1, {n - 1}]")
    for prev, cur in zip(breaks, breaks[1:]):
        if cur < prev:
            errors.append(f"Breaks must be increasing, got {prev} then {cur}")
    return tuple(breaks), errors
