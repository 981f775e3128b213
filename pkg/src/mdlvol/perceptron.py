"""Log-volume of the stochastic sigmoid perceptron.

By symmetry the Fisher metric at weight norm w = ‖w‖ is the rank-1 update
(c1(w)·I + (c2(w)−c1(w))·e eᵀ)/σ² with c1 = E[f′(wξ)], c2 = E[ξ²f′(wξ)],
ξ ~ N(0,1) and f the logistic sigmoid, so det G = c1^{D−1} c2 / σ^{2D}.
The volume reduces to a 1-D radial integral, evaluated by trapezoid on a
log-spaced grid with the integrand kept in log domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import NonPositiveCoefficientError
from .numerics import RngStream, VolumeEstimate
from .regression import log_ball_volume

_STDERR_BLOCKS = 16


@dataclass(frozen=True)
class PerceptronSpec:
    """D inputs, observation noise σ², radial integration cutoff w_max."""

    d: int
    noise_var: float = 1.0
    w_max: float = 10.0
    activation: str = "sigmoid"

    def __post_init__(self):
        if int(self.d) < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if not self.noise_var > 0.0:
            raise ValueError(f"noise_var must be > 0, got {self.noise_var}")
        if not self.w_max > 0.0:
            raise ValueError(f"w_max must be > 0, got {self.w_max}")
        if self.activation != "sigmoid":
            raise ValueError(f"only sigmoid activation is supported, got {self.activation!r}")


def sigmoid_derivative(z):
    """f′(z) = f(z)(1−f(z)) for the logistic sigmoid, overflow-safe."""
    z = np.asarray(z, dtype=np.float64)
    a = np.exp(-np.abs(z))
    return a / (1.0 + a) ** 2


def c_coefficients(w: float, samples: int = 100000,
                   rng: RngStream | None = None) -> tuple[float, float]:
    """Monte Carlo (c1, c2) = (E[f′(wξ)], E[ξ²f′(wξ)]) at weight norm w."""
    if not w >= 0.0:
        raise ValueError(f"w must be >= 0, got {w}")
    samples = int(samples)
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if rng is None:
        rng = RngStream(0)
    xi = rng.generator().standard_normal(samples)
    fp = sigmoid_derivative(w * xi)
    return float(fp.mean()), float((xi * xi * fp).mean())


def metric_log_det(w: float, d: int, noise_var: float = 1.0,
                   samples: int = 100000, rng: RngStream | None = None) -> float:
    """log det G(w) = (D−1)·log c1 + log c2 − D·log σ² (rank-1 structure)."""
    d = int(d)
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    if not noise_var > 0.0:
        raise ValueError(f"noise_var must be > 0, got {noise_var}")
    c1, c2 = c_coefficients(w, samples=samples, rng=rng)
    if c1 <= 0.0 or c2 <= 0.0:
        raise NonPositiveCoefficientError(
            f"Monte Carlo coefficients not positive at w={w}: c1={c1}, c2={c2}")
    return float((d - 1) * np.log(c1) + np.log(c2) - d * np.log(noise_var))


def _radial_grid(w_max: float, grid_points: int) -> np.ndarray:
    # log-spaced positive part plus the exact w=0 endpoint
    positive = np.geomspace(w_max * 1e-3, w_max, int(grid_points))
    return np.concatenate(([0.0], positive))


def _log_trapezoid(log_f: np.ndarray, x: np.ndarray) -> float:
    dx = np.diff(x)
    seg = np.logaddexp(log_f[:-1], log_f[1:]) + np.log(dx / 2.0)
    return float(logsumexp(seg))


def _log_integrand(c1, c2, grid, d, radial_weight):
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 * ((d - 1) * np.log(c1) + np.log(c2))
        if radial_weight and d > 1:
            out = out + (d - 1) * np.log(grid)
    return out


def perceptron_log_volume(spec: PerceptronSpec, grid_points: int = 64,
                          samples: int = 100000, rng: RngStream | None = None,
                          radial_weight: bool = False) -> VolumeEstimate:
    """log V = log B^D(1) − D·log σ + log ∫₀^{w_max} √(c2·c1^{D−1}) dw.

    One ξ panel is shared across all grid points (common random numbers).
    `radial_weight=True` multiplies the integrand by w^{D−1} (surface-
    measure-weighted variant). The reported `upper` adds the crude tail
    bound integrand(w_max)·w_max to the integral; stderr comes from a
    16-block decomposition of the ξ panel.
    """
    grid_points = int(grid_points)
    if grid_points < 8:
        raise ValueError(f"grid_points must be >= 8, got {grid_points}")
    samples = int(samples)
    if samples < 2 * _STDERR_BLOCKS:
        raise ValueError(f"samples must be >= {2 * _STDERR_BLOCKS}, got {samples}")
    if rng is None:
        rng = RngStream(0)
    d = spec.d
    grid = _radial_grid(spec.w_max, grid_points)
    xi = rng.generator().standard_normal(samples)
    xi_blocks = np.array_split(xi, _STDERR_BLOCKS)

    n_grid = grid.size
    c1 = np.empty(n_grid)
    c2 = np.empty(n_grid)
    c1_blk = np.empty((_STDERR_BLOCKS, n_grid))
    c2_blk = np.empty((_STDERR_BLOCKS, n_grid))
    for gidx, w in enumerate(grid):
        fp = sigmoid_derivative(w * xi)
        wt = xi * xi * fp
        c1[gidx] = fp.mean()
        c2[gidx] = wt.mean()
        pos = 0
        for b, blk in enumerate(xi_blocks):
            size = blk.size
            c1_blk[b, gidx] = fp[pos : pos + size].mean()
            c2_blk[b, gidx] = wt[pos : pos + size].mean()
            pos += size
    if np.any(c1 <= 0.0) or np.any(c2 <= 0.0):
        w_bad = grid[np.argmax((c1 <= 0.0) | (c2 <= 0.0))]
        raise NonPositiveCoefficientError(
            f"Monte Carlo coefficient not positive at w={w_bad} "
            f"(w_max={spec.w_max} likely too large for {samples} samples)")

    log_f = _log_integrand(c1, c2, grid, d, radial_weight)
    log_integral = _log_trapezoid(log_f, grid)
    const = log_ball_volume(d, 1.0) - d * 0.5 * np.log(spec.noise_var)
    log_tail = log_f[-1] + np.log(spec.w_max)

    block_vals = np.empty(_STDERR_BLOCKS)
    for b in range(_STDERR_BLOCKS):
        blk_f = _log_integrand(c1_blk[b], c2_blk[b], grid, d, radial_weight)
        block_vals[b] = _log_trapezoid(blk_f, grid)
    finite = block_vals[np.isfinite(block_vals)]
    if finite.size < 2:
        raise NonPositiveCoefficientError(
            "too few usable stderr blocks; increase samples or reduce w_max")
    stderr = float(np.std(finite, ddof=1) / np.sqrt(finite.size))

    return VolumeEstimate(
        value=float(const + log_integral),
        stderr=stderr,
        samples=samples,
        lower=None,
        upper=float(const + np.logaddexp(log_integral, log_tail)),
    )
