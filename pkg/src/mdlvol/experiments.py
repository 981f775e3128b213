"""Deterministic double-descent experiments and artifact emission.

Ridge risk curves over nested design columns with contiguous-block k-fold
CV, the MDL score assembly, and writers for the CSV/SVG artifacts. Every
run is a pure function of (config, seed): fold permutations and data draws
come from addressed substreams, floats are written with 17 significant
digits, and the SVG writer is timestamp-free, so re-runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import SingularError
from .numerics import RngStream, _smallest_pivot

# Desk-scale dimension grid: log-ish spacing with extra density around the
# n=300 interpolation threshold (train size 270 at 10 folds). The last two
# points sit close together because the over-parameterized risk still drifts
# with d (bias ~ (1 - n/d)·‖β‖²), and tail comparisons read adjacent points.
DESK_D_GRID = (10, 25, 50, 100, 150, 200, 240, 260, 270, 280, 290,
               300, 310, 330, 360, 400, 450, 500, 580, 600)


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and sampling parameters for the ridge double-descent experiment."""

    n_values: tuple = (300,)
    alpha_values: tuple = (1e-2, 1.0, 1e2)
    d_grid: tuple = DESK_D_GRID
    d_true: int = 150
    beta_var: float = 0.25
    noise_var: float = 1.0
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "alpha_values", tuple(float(a) for a in self.alpha_values))
        object.__setattr__(self, "d_grid", tuple(int(d) for d in self.d_grid))
        if not self.n_values or min(self.n_values) < 1:
            raise ValueError(f"n_values must be positive integers, got {self.n_values}")
        if not self.alpha_values or min(self.alpha_values) <= 0.0:
            raise ValueError(f"alpha_values must be positive, got {self.alpha_values}")
        if not self.d_grid or min(self.d_grid) < 1:
            raise ValueError(f"d_grid must be positive integers, got {self.d_grid}")
        if any(b <= a for a, b in zip(self.d_grid, self.d_grid[1:])):
            raise ValueError(f"d_grid must be strictly ascending, got {self.d_grid}")
        if int(self.d_true) < 1:
            raise ValueError(f"d_true must be a positive integer, got {self.d_true}")
        if not self.beta_var > 0.0:
            raise ValueError(f"beta_var must be > 0, got {self.beta_var}")
        if self.noise_var < 0.0:
            raise ValueError(f"noise_var must be >= 0, got {self.noise_var}")
        if int(self.folds) < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if not self.d_grid[0] <= self.d_true <= self.d_grid[-1]:
            warnings.warn(
                f"d_true={self.d_true} lies outside the d_grid "
                f"[{self.d_grid[0]}, {self.d_grid[-1]}]", stacklevel=2)

    @classmethod
    def full_scale(cls, seed: int = 0) -> "ExperimentConfig":
        """Full grid: n in {300,600,900}, d log-spaced up to 2500. Slow."""
        grid = np.unique(np.rint(np.geomspace(1, 2500, 150)).astype(int))
        return cls(n_values=(300, 600, 900), d_grid=tuple(int(d) for d in grid),
                   seed=seed)


@dataclass(frozen=True)
class RiskRecord:
    n: int
    d: int
    alpha: float
    fold_count: int
    train_mse: float
    train_se: float
    test_mse: float
    test_se: float
    beta_norm_sq: float
    empirical_snr: float
    seed: int


RISK_COLUMNS = ("n", "d", "alpha", "fold_count", "train_mse", "train_se",
                "test_mse", "test_se", "beta_norm_sq", "empirical_snr", "seed")


@dataclass(frozen=True)
class RiskCurve:
    """Fold-averaged train/test risk and coefficient norms over the grid."""

    records: tuple

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        for r in self.records:
            if r.train_mse < 0 or r.test_mse < 0 or r.beta_norm_sq < 0:
                raise ValueError(f"negative risk in record {r}")

    def slice(self, n: int, alpha: float) -> list[RiskRecord]:
        """Records for one (n, alpha) curve, ordered by d."""
        out = [r for r in self.records if r.n == n and r.alpha == alpha]
        return sorted(out, key=lambda r: r.d)

    def argmax_d(self, n: int, alpha: float, field: str = "test_mse") -> int:
        recs = self.slice(n, alpha)
        if not recs:
            raise ValueError(f"no records for n={n}, alpha={alpha}")
        return max(recs, key=lambda r: getattr(r, field)).d


def generate_dataset(n: int, d_max: int, d_true: int, beta_var: float,
                     noise_var: float, rng: RngStream):
    """X (n×d_max) standard normal, β_true ~ N(0, beta_var) over the first
    d_true coordinates, y = X[:, :d_true]β + ε with ε ~ N(0, noise_var)."""
    n, d_max, d_true = int(n), int(d_max), int(d_true)
    if d_true > d_max:
        raise ValueError(f"d_true={d_true} exceeds d_max={d_max}")
    if noise_var < 0.0:
        raise ValueError(f"noise_var must be >= 0, got {noise_var}")
    g = rng.generator()
    x = g.standard_normal((n, d_max))
    beta_true = g.standard_normal(d_true) * np.sqrt(beta_var)
    eps = g.standard_normal(n) * np.sqrt(noise_var)
    y = x[:, :d_true] @ beta_true + eps
    return x, y, beta_true


def ridge_fit(x_sub: np.ndarray, y: np.ndarray, alpha: float) -> np.ndarray:
    """Solve (XᵀX + αI)β = Xᵀy; for d > n the equivalent n×n dual system
    β = Xᵀ(XXᵀ + αI)⁻¹y is solved instead."""
    x = np.asarray(x_sub, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError(f"shape mismatch: X is {x.shape}, y is {y.shape}")
    if not alpha >= 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    n, d = x.shape
    if d <= n:
        gram = x.T @ x
        if alpha:
            gram = gram + alpha * np.eye(d)
        try:
            factor = sla.cho_factor(gram, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            raise SingularError(
                f"XᵀX + {alpha}·I is singular ({n}x{d} design)",
                pivot=_smallest_pivot(gram)) from None
        return sla.cho_solve(factor, x.T @ y, check_finite=False)
    if alpha == 0.0:
        raise SingularError(
            f"XᵀX is singular at alpha=0 for d={d} > n={n}", pivot=0.0)
    gram = x @ x.T + alpha * np.eye(n)
    factor = sla.cho_factor(gram, lower=True, check_finite=False)
    return x.T @ sla.cho_solve(factor, y, check_finite=False)


def kfold_curve(config: ExperimentConfig) -> RiskCurve:
    """Contiguous-block k-fold CV over the (n, alpha, d) grid.

    One master X per n (fits at dimension d use its first d columns) and one
    fold permutation per n, shared across alpha and d so curves vary
    smoothly in d.
    """
    base = RngStream(config.seed)
    records = []
    for n in config.n_values:
        d_max = max(config.d_grid)
        x, y, beta_true = generate_dataset(
            n, d_max, config.d_true, config.beta_var, config.noise_var,
            base.child(0, n))
        emp_snr = (float(beta_true @ beta_true) / config.noise_var
                   if config.noise_var > 0 else np.inf)
        perm = base.child(1, n).generator().permutation(n)
        blocks = np.array_split(perm, config.folds)
        # metrics[(d, alpha)] = per-fold rows of (train_mse, test_mse, ||beta||^2)
        metrics = {(d, a): np.empty((config.folds, 3))
                   for d in config.d_grid for a in config.alpha_values}
        for f in range(config.folds):
            test_idx = blocks[f]
            train_idx = np.concatenate([blocks[m] for m in range(config.folds) if m != f])
            x_train, y_train = x[train_idx], y[train_idx]
            x_test, y_test = x[test_idx], y[test_idx]
            for d in config.d_grid:
                xtr = x_train[:, :d]
                xte = x_test[:, :d]
                for a in config.alpha_values:
                    beta = ridge_fit(xtr, y_train, a)
                    tr_res = xtr @ beta - y_train
                    te_res = xte @ beta - y_test
                    metrics[(d, a)][f] = (
                        float(tr_res @ tr_res) / len(y_train),
                        float(te_res @ te_res) / len(y_test),
                        float(beta @ beta),
                    )
        for a in config.alpha_values:
            for d in config.d_grid:
                m = metrics[(d, a)]
                means = m.mean(axis=0)
                ses = m.std(axis=0, ddof=1) / np.sqrt(config.folds)
                records.append(RiskRecord(
                    n=n, d=d, alpha=a, fold_count=config.folds,
                    train_mse=float(means[0]), train_se=float(ses[0]),
                    test_mse=float(means[1]), test_se=float(ses[1]),
                    beta_norm_sq=float(means[2]),
                    empirical_snr=emp_snr, seed=config.seed))
    return RiskCurve(tuple(records))


def mdl_score(neg_log_lik: float, d: int, n: int, log_volume: float) -> float:
    """Total code length: −log L̂ + (D/2)·log(N/(2πe)) + log V."""
    d, n = int(d), int(n)
    if d < 1 or n < 1:
        raise ValueError(f"d and n must be positive integers, got d={d}, n={n}")
    return float(neg_log_lik + (d / 2.0) * np.log(n / (2.0 * np.pi * np.e)) + log_volume)


# ---------------------------------------------------------------------------
# artifact emission

def _format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")  # +0.0 folds -0.0 into 0.0
    return str(v)


def write_csv(path, columns, rows) -> None:
    """CSV with \\n line endings and 17-significant-digit floats (lossless
    round trip)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def risk_rows(curve: RiskCurve):
    for r in curve.records:
        yield (r.n, r.d, r.alpha, r.fold_count, r.train_mse, r.train_se,
               r.test_mse, r.test_se, r.beta_norm_sq, r.empirical_snr, r.seed)


def read_risk_csv(path) -> RiskCurve:
    """Inverse of the risk-curve CSV writer (exact round trip)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != RISK_COLUMNS:
            raise ValueError(f"unexpected risk CSV header: {header}")
        records = []
        for row in reader:
            records.append(RiskRecord(
                n=int(row[0]), d=int(row[1]), alpha=float(row[2]),
                fold_count=int(row[3]), train_mse=float(row[4]),
                train_se=float(row[5]), test_mse=float(row[6]),
                test_se=float(row[7]), beta_norm_sq=float(row[8]),
                empirical_snr=float(row[9]), seed=int(row[10])))
    return RiskCurve(tuple(records))


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2")


def _svg_chart(series, title: str, xlabel: str, ylabel: str) -> str:
    """Minimal deterministic line chart: series = [(label, xs, ys), ...].

    Y switches to log10 when all values are positive and span > 3 decades.
    No timestamps, no ids, fixed float formatting.
    """
    width, height = 720, 480
    left, right, top, bottom = 70, 170, 40, 50
    plot_w, plot_h = width - left - right, height - top - bottom

    xs_all = np.concatenate([np.asarray(xs, float) for _, xs, _ in series])
    ys_all = np.concatenate([np.asarray(ys, float) for _, _, ys in series])
    ys_fin = ys_all[np.isfinite(ys_all)]
    if ys_fin.size == 0:
        raise ValueError("no finite y values to plot")
    log_y = bool(ys_fin.min() > 0 and ys_fin.max() / ys_fin.min() > 1e3)

    def ty(v):
        return np.log10(v) if log_y else v

    x_lo, x_hi = float(xs_all.min()), float(xs_all.max())
    y_lo, y_hi = float(ty(ys_fin).min()), float(ty(ys_fin).max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x):
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return top + (y_hi - ty(y)) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="24" font-family="sans-serif" font-size="15">{title}</text>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black" stroke-width="1"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        out.append(f'<text x="{px(xv):.2f}" y="{top + plot_h + 18}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="middle">{xv:.6g}</text>')
        label = 10.0 ** yv if log_y else yv
        out.append(f'<text x="{left - 6}" y="{top + plot_h - frac * plot_h + 4:.2f}" '
                   f'font-family="sans-serif" font-size="11" text-anchor="end">{label:.4g}</text>')
    ylab = f"{ylabel} (log scale)" if log_y else ylabel
    out.append(f'<text x="{left + plot_w / 2:.2f}" y="{height - 12}" font-family="sans-serif" '
               f'font-size="12" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="18" y="{top + plot_h / 2:.2f}" font-family="sans-serif" font-size="12" '
               f'text-anchor="middle" transform="rotate(-90 18 {top + plot_h / 2:.2f})">{ylab}</text>')
    for k, (label, xs, ys) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(
            f"{px(float(x)):.2f},{py(float(y)):.2f}"
            for x, y in zip(xs, ys) if np.isfinite(float(y)))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 16 + 16 * k
        out.append(f'<line x1="{left + plot_w + 10}" y1="{ly - 4}" x2="{left + plot_w + 34}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + plot_w + 40}" y="{ly}" font-family="sans-serif" '
                   f'font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, title: str, xlabel: str, ylabel: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_svg_chart(series, title, xlabel, ylabel))


def emit_results(data, path, format: str = "csv") -> None:
    """Write a RiskCurve or a (columns, rows) table as CSV or SVG.

    For SVG, a RiskCurve becomes one test-MSE polyline per (n, alpha) pair;
    a generic table uses its first column as x and draws one polyline per
    remaining numeric column.
    """
    if format == "csv":
        if isinstance(data, RiskCurve):
            write_csv(path, RISK_COLUMNS, risk_rows(data))
        else:
            columns, rows = data
            write_csv(path, columns, rows)
        return
    if format != "svg":
        raise ValueError(f"format must be 'csv' or 'svg', got {format!r}")
    if isinstance(data, RiskCurve):
        series = []
        pairs = sorted({(r.n, r.alpha) for r in data.records})
        for n, alpha in pairs:
            recs = data.slice(n, alpha)
            series.append((f"n={n}, alpha={alpha:g}",
                           [r.d for r in recs], [r.test_mse for r in recs]))
        write_svg(path, series, "test MSE vs model dimension", "d", "test MSE")
        return
    columns, rows = data
    rows = list(rows)
    numeric = [j for j in range(1, len(columns))
               if all(isinstance(r[j], (int, float, np.integer, np.floating))
                      for r in rows)]
    xs = [r[0] for r in rows]
    series = [(columns[j], xs, [r[j] for r in rows]) for j in numeric]
    write_svg(path, series, f"{columns[0]} sweep", str(columns[0]), "value")
