"""Channel capacity of the isotropic Gaussian linear channel.

C = E[(1/2) log det(I_N + (SNR/D) X Xᵀ)] with X an N×D standard-normal
design, estimated by Monte Carlo, together with the analytic digamma lower
bound, Jensen upper bound, high-SNR limit, and related closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .numerics import RngStream, batch_sizes, digamma, map_batches

# Below this SNR the high-SNR saturation limit is not informative and the
# estimate carries a warning flag.
LOW_SNR_THRESHOLD = 10.0


@dataclass(frozen=True)
class CapacityEstimate:
    """Monte Carlo capacity in nats plus analytic sandwich bounds."""

    value: float
    stderr: float
    samples: int
    lower_bound: float
    upper_bound: float
    low_snr: bool = False


def _check(d: int, n: int, snr: float) -> tuple[int, int, float]:
    d, n, snr = int(d), int(n), float(snr)
    if d < 1 or n < 1:
        raise ValueError(f"d and n must be positive integers, got d={d}, n={n}")
    if not snr > 0.0:
        raise ValueError(f"snr must be > 0, got {snr}")
    return d, n, snr


def capacity_mc(d, n, snr, samples: int = 2000, rng: RngStream | None = None,
                threads=None) -> CapacityEstimate:
    """Monte Carlo estimate of C over the standard-normal design ensemble.

    Draw layout is fixed (one substream per 4096-draw batch) and the
    reduction is in batch order, so the result is byte-identical for any
    thread count.
    """
    d, n, snr = _check(d, n, snr)
    samples = int(samples)
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if rng is None:
        rng = RngStream(0)
    scale = snr / d
    sizes = batch_sizes(samples)

    def worker(k):
        x = rng.generator(k).standard_normal((sizes[k], n, d))
        return _kernels.capacity_half_logdet(x, scale)

    stats = np.concatenate(map_batches(worker, len(sizes), threads))
    value = float(np.mean(stats))
    stderr = float(np.std(stats, ddof=1) / np.sqrt(samples))
    return CapacityEstimate(
        value=value,
        stderr=stderr,
        samples=samples,
        lower_bound=capacity_lower_bound(d, n, snr),
        upper_bound=capacity_upper_bound(d, n, snr),
        low_snr=snr < LOW_SNR_THRESHOLD,
    )


def capacity_upper_bound(d, n, snr) -> float:
    """Jensen upper bound: (D/2)log((N/D)snr+1) if D<=N else (N/2)log(snr+1)."""
    d, n, snr = _check(d, n, snr)
    if d <= n:
        return float((d / 2.0) * np.log((n / d) * snr + 1.0))
    return float((n / 2.0) * np.log(snr + 1.0))


def capacity_lower_bound(d, n, snr) -> float:
    """Digamma lower bound from the expected Wishart log-determinant."""
    d, n, snr = _check(d, n, snr)
    if d <= n:
        i = np.arange(1, d + 1)
        return float((d / 2.0) * np.log(2.0 * snr / d)
                     + 0.5 * np.sum(digamma((n - i + 1) / 2.0)))
    i = np.arange(1, n + 1)
    return float((n / 2.0) * np.log(2.0 * snr / d)
                 + 0.5 * np.sum(digamma((d - i + 1) / 2.0)))


def capacity_limit(n, snr) -> float:
    """Saturation limit (N/2) log snr as D -> inf; informative for snr >> 1."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not snr > 0.0:
        raise ValueError(f"snr must be > 0, got {snr}")
    return float((n / 2.0) * np.log(snr))


def expected_wishart_logdet(d, n) -> float:
    """E[log det XᵀX] for an n×d standard-normal X: Σ Ψ((n-i+1)/2) + d log 2."""
    d, n = int(d), int(n)
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    if n < d:
        raise ValueError(f"need n >= d for a nonsingular Wishart, got d={d}, n={n}")
    i = np.arange(1, d + 1)
    return float(np.sum(digamma((n - i + 1) / 2.0)) + d * np.log(2.0))


def awgn_packing_count(n, power, noise_var) -> float:
    """Log sphere-count ratio for the AWGN channel: (N/2) log(1 + P/σ²)."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if power < 0.0 or not noise_var > 0.0:
        raise ValueError(f"need power >= 0 and noise_var > 0, got {power}, {noise_var}")
    return float((n / 2.0) * np.log1p(power / noise_var))
