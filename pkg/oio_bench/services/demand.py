"""
Demand sources and the stateful processes that emit d_t.

Implements:
- Declarative sources (serializable, shared across replications)
- Per-replication processes with independent per-product streams
- Poisson sampling by inversion below a rate threshold
- Non-degeneracy (rho, mu) parameters, closed form or estimated
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
import logging

from oio_bench.core.config import settings
from oio_bench.core.exceptions import ConfigurationError, DemandExhausted
from oio_bench.core.rng import ProductStreams, make_generator, replication_seed
from oio_bench.models.records import NonDegeneracyParams
from oio_bench.models.vectors import VectorLike, as_vector

logger = logging.getLogger(__name__)


class SourceKind(str, Enum):
    """Supported demand source variants."""
    DETERMINISTIC = "deterministic"
    IID_POISSON = "iid_poisson"
    UNIFORM_INTENSITY_POISSON = "uniform_intensity_poisson"
    CLIPPED_AR1 = "clipped_ar1"
    CSV = "csv"
    ADVERSARY_PROP1 = "adversary_prop1"
    ADVERSARY_PROP2 = "adversary_prop2"


class DemandProcess(ABC):
    """Stateful demand iterator owned by a single run."""

    n: int

    @abstractmethod
    def next_demand(self, t: int) -> np.ndarray:
        """
        Demand d_t of period t (1-based, called in increasing order).

        Raises:
            DemandExhausted: when a finite source has no period t
        """


class DemandSource(ABC):
    """Declarative description of a demand process."""

    kind: SourceKind
    n: int

    @abstractmethod
    def open(self, seed: int = 0, replication: int = 0) -> DemandProcess:
        """Start a fresh process for replication r (stream seed = seed + r)."""

    def uppd_params(self) -> Optional[NonDegeneracyParams]:
        """Closed-form (rho, mu) when computable, else None."""
        return None

    @property
    def length(self) -> Optional[int]:
        """Number of available periods for finite sources."""
        return None

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Serializable description for manifests."""


class _SequenceProcess(DemandProcess):
    """Replays a fixed T x n matrix, optionally cyclically."""

    def __init__(self, matrix: np.ndarray, cycle: bool):
        self.matrix = matrix
        self.n = matrix.shape[1]
        self.cycle = cycle

    def next_demand(self, t: int) -> np.ndarray:
        if t < 1:
            raise ConfigurationError(f"Periods are 1-based, got t={t}")
        rows = self.matrix.shape[0]
        if t > rows:
            if not self.cycle:
                raise DemandExhausted(f"Demand sequence has {rows} periods, requested t={t}")
            return self.matrix[(t - 1) % rows].copy()
        return self.matrix[t - 1].copy()


class Deterministic(DemandSource):
    """
    Fixed demand sequence.

    A sequence shorter than the horizon repeats cyclically unless
    ``cycle=False``; a single row therefore describes a constant demand.
    """

    kind = SourceKind.DETERMINISTIC

    def __init__(self, sequence: Any, cycle: bool = True):
        matrix = np.array(sequence, dtype=float, copy=True)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] == 0:
            raise ConfigurationError(f"Demand sequence must be a non-empty T x n matrix, got {matrix.shape}")
        if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
            raise ConfigurationError("Demand sequence must contain finite nonnegative values")
        self.matrix = matrix
        self.n = matrix.shape[1]
        self.cycle = cycle

    @classmethod
    def constant(cls, value: VectorLike, n: Optional[int] = None) -> "Deterministic":
        """Constant demand d_t = value for all t."""
        return cls(as_vector(value, n=n, name="constant demand", nonnegative=True).reshape(1, -1))

    def open(self, seed: int = 0, replication: int = 0) -> DemandProcess:
        return _SequenceProcess(self.matrix, self.cycle)

    def uppd_params(self) -> Optional[NonDegeneracyParams]:
        floor = float(self.matrix.min())
        if floor <= 0:
            return None
        return NonDegeneracyParams(rho=floor, mu=1.0)

    @property
    def length(self) -> Optional[int]:
        return None if self.cycle else int(self.matrix.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "periods": int(self.matrix.shape[0]),
            "n": self.n,
            "cycle": self.cycle,
        }


def _poisson_cdf_table(lam: np.ndarray) -> np.ndarray:
    """Per-product Poisson CDF rows, padded with 1.0, for inversion sampling."""
    top = int(np.ceil(lam.max() + 12.0 * np.sqrt(lam.max()) + 20.0)) if lam.size else 1
    k = np.arange(top + 1)
    table = np.empty((lam.size, top + 1))
    for i, rate in enumerate(lam):
        pmf = np.empty(top + 1)
        pmf[0] = np.exp(-rate)
        for j in range(1, top + 1):
            pmf[j] = pmf[j - 1] * rate / k[j]
        table[i] = np.minimum(np.cumsum(pmf), 1.0)
    return table


class _PoissonProcess(DemandProcess):
    """Independent Poisson demands; inversion for small rates, numpy sampler above."""

    def __init__(self, lam: np.ndarray, seed: int):
        self.n = lam.size
        self.lam = lam
        self.streams = ProductStreams(seed, self.n)
        threshold = settings.POISSON_INVERSION_MAX_RATE
        self._small = np.flatnonzero(lam <= threshold)
        self._large = np.flatnonzero(lam > threshold)
        self._cdf = _poisson_cdf_table(lam[self._small]) if self._small.size else None

    def next_demand(self, t: int) -> np.ndarray:
        if t < 1:
            raise ConfigurationError(f"Periods are 1-based, got t={t}")
        d = np.zeros(self.n)
        if self._cdf is not None:
            u = self.streams.uniforms()[self._small]
            d[self._small] = np.sum(u[:, np.newaxis] >= self._cdf, axis=1)
        if self._large.size:
            d[self._large] = self.streams.poisson_at(self._large, self.lam[self._large])
        return d


def _poisson_uppd(lam: np.ndarray) -> Optional[NonDegeneracyParams]:
    mu = float(np.prod(1.0 - np.exp(-lam)))
    if mu <= 0:
        return None
    return NonDegeneracyParams(rho=1.0, mu=mu)


class IIDPoisson(DemandSource):
    """I.i.d. Poisson demands with per-product intensities."""

    kind = SourceKind.IID_POISSON

    def __init__(self, intensities: VectorLike, n: Optional[int] = None):
        self.intensities = as_vector(intensities, n=n, name="Poisson intensities", nonnegative=True)
        self.n = self.intensities.size

    def open(self, seed: int = 0, replication: int = 0) -> DemandProcess:
        return _PoissonProcess(self.intensities, replication_seed(seed, replication))

    def uppd_params(self) -> Optional[NonDegeneracyParams]:
        return _poisson_uppd(self.intensities)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "intensities": self.intensities.tolist()}


class UniformIntensityPoisson(DemandSource):
    """
    Poisson demands whose intensities are drawn once from Uniform[low, high].

    The intensities come from ``meta_seed`` and are shared by every
    replication; only the demand draws depend on the replication seed.
    """

    kind = SourceKind.UNIFORM_INTENSITY_POISSON

    def __init__(self, n: int, low: float = 1.0, high: float = 2.0, meta_seed: int = 0):
        if n < 1:
            raise ConfigurationError(f"Product count must be >= 1, got {n}")
        if not 0 <= low <= high:
            raise ConfigurationError(f"Intensity range must satisfy 0 <= low <= high, got [{low}, {high}]")
        self.n = int(n)
        self.low = float(low)
        self.high = float(high)
        self.meta_seed = int(meta_seed)
        self._intensities = make_generator(self.meta_seed).uniform(self.low, self.high, self.n)

    def resolved_intensities(self) -> np.ndarray:
        """The per-product intensities actually used."""
        return self._intensities.copy()

    def open(self, seed: int = 0, replication: int = 0) -> DemandProcess:
        return _PoissonProcess(self._intensities, replication_seed(seed, replication))

    def uppd_params(self) -> Optional[NonDegeneracyParams]:
        return _poisson_uppd(self._intensities)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "intensity_range": [self.low, self.high],
            "meta_seed": self.meta_seed,
        }


class _AR1Process(DemandProcess):
    def __init__(self, source: "ClippedAR1", seed: int):
        self.n = source.n
        self.source = source
        self.streams = ProductStreams(seed, self.n)
        self.previous = source.mean.copy()

    def next_demand(self, t: int) -> np.ndarray:
        if t < 1:
            raise ConfigurationError(f"Periods are 1-based, got t={t}")
        src = self.source
        noise = self.streams.normals() if src.sigma > 0 else np.zeros(self.n)
        d = np.maximum(0.0, src.mean + src.phi * (self.previous - src.mean) + src.sigma * noise)
        self.previous = d
        return d.copy()


class ClippedAR1(DemandSource):
    """d_t = max(0, mean + phi (d_{t-1} - mean) + sigma eps_t) with d_0 = mean."""

    kind = SourceKind.CLIPPED_AR1

    def __init__(self, phi: float, sigma: float, mean: VectorLike, n: Optional[int] = None):
        if not -1.0 < phi < 1.0:
            raise ConfigurationError(f"AR coefficient phi must lie in (-1, 1), got {phi}")
        if sigma < 0:
            raise ConfigurationError(f"Noise scale sigma must be >= 0, got {sigma}")
        self.phi = float(phi)
        self.sigma = float(sigma)
        self.mean = as_vector(mean, n=n, name="AR mean level", nonnegative=True)
        self.n = self.mean.size

    def open(self, seed: int = 0, replication: int = 0) -> DemandProcess:
        return _AR1Process(self, replication_seed(seed, replication))

    def uppd_params(self) -> Optional[NonDegeneracyParams]:
        if self.sigma == 0 and float(self.mean.min()) > 0:
            return NonDegeneracyParams(rho=float(self.mean.min()), mu=1.0)
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "phi": self.phi,
            "sigma": self.sigma,
            "mean": self.mean.tolist(),
        }


class CsvDataset(Deterministic):
    """Recorded demand matrix (one row per period); finite, never cycles."""

    kind = SourceKind.CSV

    def __init__(self, matrix: np.ndarray, path: Optional[str] = None):
        super().__init__(matrix, cycle=False)
        self.path = path

    @property
    def shape(self):
        return self.matrix.shape

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "path": self.path,
            "periods": int(self.matrix.shape[0]),
            "n": self.n,
        }


class AdversaryProp1(Deterministic):
    """
    Constant bait demand until the replayed policy first orders stock, then zeros.

    Built by ``services.adversaries.adversary_prop1``; ``switch_period`` is the
    first period with a positive level under the bait (None if never).
    """

    kind = SourceKind.ADVERSARY_PROP1

    def __init__(self, bait: float, sequence: np.ndarray, switch_period: Optional[int]):
        super().__init__(sequence, cycle=False)
        self.bait = float(bait)
        self.switch_period = switch_period

    def uppd_params(self) -> Optional[NonDegeneracyParams]:
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "bait": self.bait,
            "periods": int(self.matrix.shape[0]),
            "switch_period": self.switch_period,
        }


class AdversaryProp2(Deterministic):
    """Summable positive demands d_t = ratio * y1 * 2^-t (single product)."""

    kind = SourceKind.ADVERSARY_PROP2

    def __init__(self, y1: float, budget_ratio: float, horizon: int):
        if not y1 > 0:
            raise ConfigurationError(f"Initial level y1 must be > 0, got {y1}")
        if not 0 < budget_ratio < 1:
            raise ConfigurationError(f"budget_ratio must lie in (0, 1), got {budget_ratio}")
        if horizon < 1:
            raise ConfigurationError(f"Horizon must be >= 1, got {horizon}")
        t = np.arange(1, horizon + 1, dtype=float)
        super().__init__((budget_ratio * y1 * np.exp2(-t)).reshape(-1, 1), cycle=False)
        self.y1 = float(y1)
        self.budget_ratio = float(budget_ratio)

    @property
    def regret_rate(self) -> float:
        """C = y1 (1 - ratio): every feasible run has R_T >= C T."""
        return self.y1 * (1.0 - self.budget_ratio)

    def uppd_params(self) -> Optional[NonDegeneracyParams]:
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "y1": self.y1,
            "budget_ratio": self.budget_ratio,
            "periods": int(self.matrix.shape[0]),
        }


def next_demand(process: DemandProcess, t: int) -> np.ndarray:
    """d_t from an opened process."""
    return process.next_demand(t)


def uppd_params(source: DemandSource) -> Optional[NonDegeneracyParams]:
    """(rho, mu) for sources with closed-form parameters, None when unknown."""
    params = source.uppd_params()
    if params is None:
        logger.debug(f"No closed-form non-degeneracy parameters for source '{source.kind.value}'")
    return params


def sample_matrix(source: DemandSource, T: int, seed: int = 0, replication: int = 0) -> np.ndarray:
    """Draw T periods from a fresh process as a T x n matrix."""
    process = source.open(seed, replication)
    return np.stack([process.next_demand(t) for t in range(1, T + 1)])


def estimate_uppd(samples: np.ndarray, rho: float) -> Optional[NonDegeneracyParams]:
    """
    Empirical mu for a given rho: frequency of periods with every product >= rho.

    Args:
        samples: T x n demand matrix
        rho: positive demand floor

    Returns:
        NonDegeneracyParams, or None when no period clears the floor
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples.reshape(-1, 1)
    if samples.shape[0] == 0:
        raise ConfigurationError("Cannot estimate non-degeneracy from zero samples")
    mu_hat = float(np.mean(np.all(samples >= rho, axis=1)))
    if mu_hat <= 0:
        logger.warning(f"No sampled period has all demands >= {rho}; mu unavailable")
        return None
    return NonDegeneracyParams(rho=rho, mu=mu_hat)
