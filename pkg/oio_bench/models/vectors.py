"""
Product vectors: length-n float64 arrays of per-product quantities.
"""
from typing import Optional, Sequence, Union

import numpy as np

from oio_bench.core.exceptions import ConfigurationError

VectorLike = Union[Sequence[float], np.ndarray, float]


def as_vector(
    values: VectorLike,
    n: Optional[int] = None,
    name: str = "vector",
    nonnegative: bool = False,
) -> np.ndarray:
    """
    Coerce input into a 1-D float64 product vector.

    Args:
        values: sequence, array or scalar (a scalar is broadcast when n is given)
        n: expected product count
        name: label used in error messages
        nonnegative: reject negative entries (demands and order-up-to levels)

    Returns:
        A fresh float64 array of length n

    Raises:
        ConfigurationError: on dimension mismatch, non-finite or negative entries
    """
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim == 0:
        if n is None:
            arr = arr.reshape(1)
        else:
            arr = np.full(n, float(arr))
    if arr.ndim != 1:
        raise ConfigurationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ConfigurationError(f"{name} must have at least one product")
    if n is not None and arr.size != n:
        raise ConfigurationError(f"{name} has length {arr.size}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    if nonnegative and np.any(arr < 0):
        raise ConfigurationError(f"{name} must be nonnegative, got {arr.tolist()}")
    return arr


def check_same_length(*vectors: np.ndarray, names: Optional[Sequence[str]] = None) -> int:
    """Return the common length of the vectors or raise ConfigurationError."""
    lengths = [len(v) for v in vectors]
    if len(set(lengths)) != 1:
        labels = names or [f"arg{i}" for i in range(len(vectors))]
        detail = ", ".join(f"{label}={length}" for label, length in zip(labels, lengths))
        raise ConfigurationError(f"Dimension mismatch: {detail}")
    return lengths[0]


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """Exact componentwise a ⪰ b."""
    return bool(np.all(a >= b))


def positive_part(v: np.ndarray) -> np.ndarray:
    return np.maximum(v, 0.0)
