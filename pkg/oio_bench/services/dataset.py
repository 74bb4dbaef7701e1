"""
Demand CSV ingestion.

Format: UTF-8, comma-separated, one row per period and one column per
product, nonnegative decimals, optional single header row (detected by a
non-numeric first cell). Errors report 1-based file row numbers.
"""
import io
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
import logging

from oio_bench.core.config import settings
from oio_bench.core.exceptions import IngestionError
from oio_bench.services.demand import CsvDataset

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _resolve(path: PathLike) -> Path:
    resolved = Path(path)
    if not resolved.is_absolute() and settings.DATA_DIR and not resolved.exists():
        resolved = Path(settings.DATA_DIR) / resolved
    return resolved


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _read_text(path: Path) -> str:
    if not path.exists():
        raise IngestionError(f"Demand file not found: {path}")
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise IngestionError(f"Demand file is not valid UTF-8: {e}")


def _parse_matrix(text: str) -> np.ndarray:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines or not lines[0].strip():
        raise IngestionError("no periods")

    first_cell = lines[0].split(",")[0].strip()
    has_header = not _is_number(first_cell)
    offset = 2 if has_header else 1
    data_lines = lines[1:] if has_header else lines
    if not data_lines:
        raise IngestionError("no periods")

    width = len(data_lines[0].split(","))
    for i, line in enumerate(data_lines):
        cells = line.split(",")
        if len(cells) != width:
            raise IngestionError(f"expected {width} columns, found {len(cells)}", row=i + offset)

    frame = pd.read_csv(
        io.StringIO("\n".join(data_lines)),
        header=None,
        dtype=str,
        skip_blank_lines=False,
        keep_default_na=False,
    )
    raw = frame.apply(lambda column: column.str.strip())
    values = raw.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)

    # First offending cell in row-major order, per check
    checks = (
        (np.isnan(values), "non-numeric value"),
        (np.isinf(values), "non-finite value"),
        (values < 0, "negative demand"),
    )
    for mask, label in checks:
        if mask.any():
            i, j = (int(k) for k in np.argwhere(mask)[0])
            raise IngestionError(f"column {j + 1}: {label} '{raw.iat[i, j]}'", row=i + offset)
    return values


def load_csv(path: PathLike) -> CsvDataset:
    """
    Load a demand matrix from CSV.

    Args:
        path: file path (relative paths also tried under settings.DATA_DIR)

    Returns:
        CsvDataset with a T_max x n matrix

    Raises:
        IngestionError: missing file, empty file ("no periods"), ragged or
            malformed rows, negative values
    """
    resolved = _resolve(path)
    matrix = _parse_matrix(_read_text(resolved))
    logger.info(f"Loaded demand dataset {resolved}: T_max={matrix.shape[0]}, n={matrix.shape[1]}")
    return CsvDataset(matrix, path=str(resolved))


def load_prices(path: PathLike, n: Optional[int] = None) -> np.ndarray:
    """
    Load per-product average selling prices (single data row).

    Raises:
        IngestionError: on the same validation rules as ``load_csv`` or a
            product count different from ``n``
    """
    resolved = _resolve(path)
    matrix = _parse_matrix(_read_text(resolved))
    if matrix.shape[0] != 1:
        raise IngestionError(f"price file must contain exactly one data row, found {matrix.shape[0]}")
    prices = matrix[0]
    if n is not None and prices.size != n:
        raise IngestionError(f"price file has {prices.size} products, expected {n}")
    return prices
