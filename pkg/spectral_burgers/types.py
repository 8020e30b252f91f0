from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass(frozen=True, eq=False)
class SpectralVector:
    """Sine-basis coefficients a_1..a_M of v = sum a_n sqrt(2) sin(n pi x).

    Coefficients past M are zero, so vectors of different length compare equal
    when they agree after zero-padding. The array is copied and frozen.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectral coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, m: int) -> "SpectralVector":
        return cls(np.zeros(m))

    @classmethod
    def basis(cls, n: int, m: int | None = None, scale: float = 1.0) -> "SpectralVector":
        """scale * e_n, stored on max(n, m) modes."""
        if n < 1:
            raise ValueError(f"mode index must be >= 1, got {n}")
        arr = np.zeros(max(n, m or 0))
        arr[n - 1] = scale
        return cls(arr)

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def padded(self, m: int) -> np.ndarray:
        """Coefficients on exactly m modes (truncating or zero-padding)."""
        out = np.zeros(m)
        k = min(m, len(self))
        out[:k] = self.coeffs[:k]
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpectralVector):
            return NotImplemented
        m = max(len(self), len(other))
        return bool(np.array_equal(self.padded(m), other.padded(m)))

    __hash__ = None  # type: ignore[assignment]

    def _common(self, other: "SpectralVector") -> tuple[np.ndarray, np.ndarray]:
        m = max(len(self), len(other))
        return self.padded(m), other.padded(m)

    def __add__(self, other: "SpectralVector") -> "SpectralVector":
        a, b = self._common(other)
        return SpectralVector(a + b)

    def __sub__(self, other: "SpectralVector") -> "SpectralVector":
        a, b = self._common(other)
        return SpectralVector(a - b)

    def __mul__(self, scalar: float) -> "SpectralVector":
        return SpectralVector(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralVector":
        return SpectralVector(-self.coeffs)

    def dot(self, other: "SpectralVector") -> float:
        """H inner product."""
        k = min(len(self), len(other))
        return float(np.dot(self.coeffs[:k], other.coeffs[:k]))


@dataclass(frozen=True)
class SeriesBound:
    """Enclosure lower <= sum <= upper of a positive series."""

    lower: float
    upper: float
    terms: int

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def gap(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class BasisConstants:
    rho: float
    eig_sum: float
    eig_sum_bound: float
    deriv_ratio: float
    deriv_ratio_bound: float
    basis_sup: float


@dataclass(frozen=True)
class GrowthConstants:
    alpha: float
    K: float
    source: str
    certified: bool = True


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    lhs: float
    rhs: float
    slack: float
    detail: str = ""


@dataclass(frozen=True)
class ExtensionRatio:
    ratio: float
    lhs: float
    denominator: float


@dataclass(frozen=True)
class MonotonicityResult:
    check: CheckResult
    constant: float  # the certified substitute used on the RHS
    empirical_constant: float  # smallest C making this sample pass


@dataclass(frozen=True)
class Constant:
    name: str
    value: float
    source: str  # closed-form | derived-certified | estimated


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    mode: str
    parameters: dict[str, Any]
    constants: tuple[Constant, ...]
    rhs: float
    lhs: float
    passed: bool
    slack: float
    worst_time: float | None = None
    path_seed: int | None = None
    under_resolved: bool = False  # time step too coarse for the continuous-time bound to apply


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    intercept: float


@dataclass(frozen=True)
class RateReport:
    experiment: str
    ladder: tuple[int, ...]
    mean_errors: tuple[float, ...]
    median_errors: tuple[float, ...]
    path_seeds: tuple[int, ...]
    path_errors: tuple[tuple[float, ...], ...]
    slope: float
    stderr: float
    intercept: float
    per_path_slopes: tuple[float, ...]
    threshold: float
    threshold_source: str
    tolerance: float
    passed: bool
    degenerate: bool = False
    extras: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class MomentReport:
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    n_paths: int
    n_keep: int
    alpha: float
    gamma: float
    p: float
    stderr: float
    path_seeds: tuple[int, ...] = ()
    path_sups: tuple[float, ...] = ()
