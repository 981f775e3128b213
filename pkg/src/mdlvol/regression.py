"""Log-volumes and MDL bounds for isotropic, power-constrained linear
regression.

The model family is y = Xβ + ε with ‖β‖² ≤ P and ε ~ N(0, σ²I); its
information-manifold volume is (det XᵀX)^{1/2} · B^D(√P) / σ^D, which is
rank-deficient for D > N. The regularized variant shifts the Gram matrix by
α·I with α = D/SNR, and its design-ensemble mean ties directly to channel
capacity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .capacity import capacity_mc
from .errors import SingularError
from .numerics import RngStream, VolumeEstimate, log_det_psd, log_gamma


@dataclass(frozen=True)
class RegressionModelSpec:
    """Model family: D parameters, N samples, power constraint P, noise σ²."""

    d: int
    n: int
    power: float
    noise_var: float

    def __post_init__(self):
        if int(self.d) < 1 or int(self.n) < 1:
            raise ValueError(f"d and n must be positive integers, got d={self.d}, n={self.n}")
        if not self.power > 0.0:
            raise ValueError(f"power must be > 0, got {self.power}")
        if not self.noise_var > 0.0:
            raise ValueError(f"noise_var must be > 0, got {self.noise_var}")

    def snr(self) -> float:
        return self.power / self.noise_var

    def alpha(self) -> float:
        return self.d / self.snr()


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """N×D covariate matrix with provenance tracking."""

    entries: np.ndarray
    provenance: str = "external"

    def __post_init__(self):
        arr = np.ascontiguousarray(self.entries, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"design matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"design matrix needs at least one row and column, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("design matrix entries must be finite")
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @classmethod
    def gaussian(cls, n: int, d: int, rng: RngStream) -> "DesignMatrix":
        """Seeded standard-normal design."""
        entries = rng.generator().standard_normal((int(n), int(d)))
        return cls(entries, provenance=f"seeded-gaussian(seed={rng.seed},stream={rng.stream_id})")


def _check_dims(x: DesignMatrix, spec: RegressionModelSpec):
    if x.cols != spec.d or x.rows != spec.n:
        raise ValueError(
            f"design is {x.rows}x{x.cols} but spec says n={spec.n}, d={spec.d}")


def log_ball_volume(dim: int, radius: float) -> float:
    """log volume of the D-ball: (D/2)log π − log Γ(D/2+1) + D log R."""
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim}")
    if not radius > 0.0:
        raise ValueError(f"radius must be > 0, got {radius}")
    return (dim / 2.0) * np.log(np.pi) - log_gamma(dim / 2.0 + 1.0) + dim * np.log(radius)


def log_volume(x: DesignMatrix, spec: RegressionModelSpec) -> float:
    """Unregularized log-volume (1/2)log det XᵀX + log B^D(√P) − D log σ.

    Raises SingularError for D > N, where XᵀX is structurally rank
    deficient and the caller must switch to the regularized variant.
    """
    _check_dims(x, spec)
    if spec.d > spec.n:
        raise SingularError(
            f"XᵀX is rank deficient for d={spec.d} > n={spec.n}; "
            "use regularized_log_volume", pivot=0.0)
    half_logdet = 0.5 * log_det_psd(x.entries.T @ x.entries)
    return float(half_logdet + log_ball_volume(spec.d, np.sqrt(spec.power))
                 - spec.d * 0.5 * np.log(spec.noise_var))


def regularized_log_volume(x: DesignMatrix, spec: RegressionModelSpec) -> float:
    """Log-volume with the Gram matrix shifted by α·I, α = D/SNR; always finite."""
    _check_dims(x, spec)
    half_logdet = 0.5 * shifted_log_det(x, spec.alpha())
    return float(half_logdet + log_ball_volume(spec.d, np.sqrt(spec.power))
                 - spec.d * 0.5 * np.log(spec.noise_var))


def shifted_log_det(x: DesignMatrix, alpha: float) -> float:
    """f(α) = log det(α·I_D + XᵀX); nondecreasing in α."""
    if not alpha >= 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0.0 and x.cols > x.rows:
        raise SingularError(
            f"XᵀX is singular at alpha=0 for d={x.cols} > n={x.rows}", pivot=0.0)
    gram = x.entries.T @ x.entries
    if alpha:
        gram = gram + alpha * np.eye(x.cols)
    return log_det_psd(gram)


def mean_regularized_log_volume(spec: RegressionModelSpec, samples: int = 2000,
                                rng: RngStream | None = None,
                                threads=None) -> VolumeEstimate:
    """Design-ensemble mean of the regularized log-volume.

    E[log V_α] = C + log B^D(√P) − D log σ + (D/2) log α with C the channel
    capacity at SNR = P/σ², so the estimate is the capacity Monte Carlo
    shifted by a closed-form constant (stderr and bounds shift with it).
    """
    cap = capacity_mc(spec.d, spec.n, spec.snr(), samples=samples, rng=rng,
                      threads=threads)
    shift = (log_ball_volume(spec.d, np.sqrt(spec.power))
             - spec.d * 0.5 * np.log(spec.noise_var)
             + (spec.d / 2.0) * np.log(spec.alpha()))
    return VolumeEstimate(
        value=cap.value + shift,
        stderr=cap.stderr,
        samples=cap.samples,
        lower=cap.lower_bound + shift,
        upper=cap.upper_bound + shift,
    )


def classical_regime_bound(spec: RegressionModelSpec) -> float:
    """Upper bound (D/2)log N + log B^D(√P) − D log σ for the D ≤ N regime.

    Uses the N ≫ α approximation; warns when N < 10·α, where the dropped
    (D/2)log(1+α/N) term is not negligible.
    """
    if spec.d > spec.n:
        raise ValueError(f"classical-regime bound needs d <= n, got d={spec.d}, n={spec.n}")
    if spec.n < 10.0 * spec.alpha():
        warnings.warn(
            f"classical_regime_bound assumes n >> alpha but n={spec.n}, "
            f"alpha={spec.alpha():.3g}; the approximated bound may be loose or invalid",
            stacklevel=2)
    return float((spec.d / 2.0) * np.log(spec.n)
                 + log_ball_volume(spec.d, np.sqrt(spec.power))
                 - spec.d * 0.5 * np.log(spec.noise_var))


def modern_regime_bound(spec: RegressionModelSpec) -> float:
    """Upper bound (N/2)log(SNR+1) + log B^D(√P) − D log σ + (D/2)log α for D > N."""
    if spec.d <= spec.n:
        raise ValueError(f"modern-regime bound needs d > n, got d={spec.d}, n={spec.n}")
    return float((spec.n / 2.0) * np.log(spec.snr() + 1.0)
                 + log_ball_volume(spec.d, np.sqrt(spec.power))
                 - spec.d * 0.5 * np.log(spec.noise_var)
                 + (spec.d / 2.0) * np.log(spec.alpha()))


def mdl_upper_bound(spec: RegressionModelSpec) -> float:
    """MDL complexity upper bound for D > N:
    (D/2)log(N·D/(2πe)) + (N/2)log(SNR+1) + log B^D(1)."""
    if spec.d <= spec.n:
        raise ValueError(f"mdl upper bound needs d > n, got d={spec.d}, n={spec.n}")
    return float((spec.d / 2.0) * np.log(spec.n * spec.d / (2.0 * np.pi * np.e))
                 + (spec.n / 2.0) * np.log(spec.snr() + 1.0)
                 + log_ball_volume(spec.d, 1.0))


def sphere_packing_log_ratio(x: DesignMatrix, spec: RegressionModelSpec) -> float:
    """Signal-ellipsoid to noise-ball log-volume ratio:
    (1/2) log det(SNR · XXᵀ / D)."""
    _check_dims(x, spec)
    if x.rows > x.cols:
        raise SingularError(
            f"XXᵀ is singular for n={x.rows} > d={x.cols}", pivot=0.0)
    scaled = (spec.snr() / spec.d) * (x.entries @ x.entries.T)
    return 0.5 * log_det_psd(scaled)
