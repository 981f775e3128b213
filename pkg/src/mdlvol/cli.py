"""Command-line harness: every computation as a reproducible subcommand.

Each subcommand reads an optional JSON config (inline flags win), writes
CSV (and optional SVG) artifacts plus a run manifest into --out, and is
byte-identical on re-run with the same seed/config. Exit codes: 0 success,
2 argument/parse error, 3 I/O error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass

from . import __version__
from ._kernels import BACKEND
from .capacity import capacity_limit, capacity_mc
from .errors import MdlvolError
from .experiments import (
    ExperimentConfig,
    RiskCurve,
    emit_results,
    kfold_curve,
    mdl_score,
)
from .lattice import lattice_log_volume_mc, load_lattice, log_simplex_volume
from .numerics import RngStream
from .perceptron import PerceptronSpec, perceptron_log_volume
from .regression import (
    DesignMatrix,
    RegressionModelSpec,
    classical_regime_bound,
    log_volume,
    mdl_upper_bound,
    mean_regularized_log_volume,
    modern_regime_bound,
    regularized_log_volume,
    sphere_packing_log_ratio,
)


@dataclass(frozen=True)
class RunManifest:
    """Provenance record written alongside every artifact."""

    command: str
    config_echo: dict
    seed: int
    tool_version: str
    wall_time_ms: int


def _tool_version() -> str:
    return f"mdlvol-{__version__}"


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(tok) for tok in str(text).split(",") if tok.strip()]


def _float_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(tok) for tok in str(text).split(",") if tok.strip()]


def _str_list(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [tok.strip() for tok in str(text).split(",") if tok.strip()]


def _load_config(path) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    return cfg


def _pick(args, cfg: dict, name: str, default):
    """Flag value if given, else config entry, else default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in cfg:
        return cfg[name]
    return default


def _finish(args, command: str, config_echo: dict, seed: int,
            started: float, written: list[str]) -> int:
    manifest = RunManifest(
        command=command,
        config_echo=config_echo,
        seed=int(seed),
        tool_version=_tool_version(),
        wall_time_ms=int((time.perf_counter() - started) * 1000),
    )
    out_dir = args.out
    path = os.path.join(out_dir, f"{command}_manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dataclasses.asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not getattr(args, "quiet", False):
        for w in written + [path]:
            print(f"wrote {w}", file=sys.stderr)
    return 0


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_capacity(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    ds = _int_list(_pick(args, cfg, "d", [1]))
    ns = _int_list(_pick(args, cfg, "n", [1]))
    snrs = _float_list(_pick(args, cfg, "snr", [1.0]))
    samples = int(_pick(args, cfg, "samples", 2000))
    seed = int(_pick(args, cfg, "seed", 0))
    threads = args.threads
    base = RngStream(seed)
    columns = ("d", "n", "snr", "estimate", "stderr", "lower", "upper", "limit")
    rows = []
    for idx, (d, n, snr) in enumerate(
            (d, n, s) for d in ds for n in ns for s in snrs):
        est = capacity_mc(d, n, snr, samples=samples, rng=base.child(idx),
                          threads=threads)
        rows.append((d, n, snr, est.value, est.stderr, est.lower_bound,
                     est.upper_bound, capacity_limit(n, snr)))
    csv_path = _out_path(args, "capacity.csv")
    emit_results((columns, rows), csv_path, "csv")
    written = [csv_path]
    if args.svg:
        series = []
        for n in ns:
            for snr in snrs:
                pts = [(r[0], r[3]) for r in rows if r[1] == n and r[2] == snr]
                series.append((f"n={n}, snr={snr:g}",
                               [p[0] for p in pts], [p[1] for p in pts]))
        from .experiments import write_svg

        svg_path = _out_path(args, "capacity.svg")
        write_svg(svg_path, series, "channel capacity vs d", "d", "capacity (nats)")
        written.append(svg_path)
    echo = {"d": ds, "n": ns, "snr": snrs, "samples": samples, "seed": seed,
            "backend": BACKEND}
    return _finish(args, "capacity", echo, seed, started, written)


def cmd_regression_volume(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    ds = _int_list(_pick(args, cfg, "d", [2]))
    ns = _int_list(_pick(args, cfg, "n", [10]))
    power = float(_pick(args, cfg, "power", 1.0))
    noise_var = float(_pick(args, cfg, "noise_var", 1.0))
    samples = int(_pick(args, cfg, "samples", 2000))
    seed = int(_pick(args, cfg, "seed", 0))
    no_regularize = bool(_pick(args, cfg, "no_regularize", False))
    base = RngStream(seed)
    columns = ("d", "n", "power", "noise_var", "snr", "alpha", "log_volume",
               "regularized_log_volume", "mean_value", "mean_stderr",
               "mean_lower", "mean_upper", "regime_bound", "mdl_upper_bound",
               "sphere_packing_log_ratio")
    rows = []
    nan = float("nan")
    for idx, (d, n) in enumerate((d, n) for d in ds for n in ns):
        spec = RegressionModelSpec(d=d, n=n, power=power, noise_var=noise_var)
        sub = base.child(idx)
        x = DesignMatrix.gaussian(n, d, sub)
        if d <= n:
            lv = log_volume(x, spec)
        elif no_regularize:
            lv = log_volume(x, spec)  # raises SingularError -> exit 4
        else:
            lv = nan
        if no_regularize:
            reg = mean_val = mean_se = mean_lo = mean_hi = nan
        else:
            reg = regularized_log_volume(x, spec)
            est = mean_regularized_log_volume(spec, samples=samples,
                                              rng=sub.child(1),
                                              threads=args.threads)
            mean_val, mean_se = est.value, est.stderr
            mean_lo, mean_hi = est.lower, est.upper
        bound = classical_regime_bound(spec) if d <= n else modern_regime_bound(spec)
        mdl = mdl_upper_bound(spec) if d > n else nan
        packing = sphere_packing_log_ratio(x, spec) if n <= d else nan
        rows.append((d, n, power, noise_var, spec.snr(), spec.alpha(), lv, reg,
                     mean_val, mean_se, mean_lo, mean_hi, bound, mdl, packing))
    csv_path = _out_path(args, "regression_volume.csv")
    emit_results((columns, rows), csv_path, "csv")
    echo = {"d": ds, "n": ns, "power": power, "noise_var": noise_var,
            "samples": samples, "seed": seed, "no_regularize": no_regularize,
            "backend": BACKEND}
    return _finish(args, "regression_volume", echo, seed, started, [csv_path])


def cmd_lattice_volume(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    specs = _str_list(_pick(args, cfg, "lattice", ["bool:2"]))
    samples = int(_pick(args, cfg, "samples", 10000))
    seed = int(_pick(args, cfg, "seed", 0))
    base = RngStream(seed)
    columns = ("lattice", "size", "value", "stderr", "samples", "rejected",
               "lower", "upper", "log_simplex_volume")
    rows = []
    for idx, spec_str in enumerate(specs):
        lat = load_lattice(spec_str)
        est = lattice_log_volume_mc(lat, samples=samples, rng=base.child(idx),
                                    threads=args.threads)
        rows.append((spec_str, lat.size, est.value, est.stderr, est.samples,
                     est.rejected, est.lower, est.upper,
                     log_simplex_volume(lat.size)))
    csv_path = _out_path(args, "lattice_volume.csv")
    emit_results((columns, rows), csv_path, "csv")
    written = [csv_path]
    if args.svg:
        from .experiments import write_svg

        svg_path = _out_path(args, "lattice_volume.svg")
        series = [
            ("log volume", [r[1] for r in rows], [r[2] for r in rows]),
            ("lower", [r[1] for r in rows], [r[6] for r in rows]),
            ("upper", [r[1] for r in rows], [r[7] for r in rows]),
        ]
        write_svg(svg_path, series, "lattice log-volume vs size", "size", "log volume")
        written.append(svg_path)
    echo = {"lattice": specs, "samples": samples, "seed": seed, "backend": BACKEND}
    return _finish(args, "lattice_volume", echo, seed, started, written)


def cmd_perceptron_volume(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    ds = _int_list(_pick(args, cfg, "d", [2]))
    noise_var = float(_pick(args, cfg, "noise_var", 1.0))
    w_max = float(_pick(args, cfg, "w_max", 10.0))
    grid_points = int(_pick(args, cfg, "grid_points", 64))
    samples = int(_pick(args, cfg, "samples", 100000))
    radial = bool(_pick(args, cfg, "radial_weight", False))
    seed = int(_pick(args, cfg, "seed", 0))
    base = RngStream(seed)
    columns = ("d", "noise_var", "w_max", "grid_points", "samples", "value",
               "stderr", "upper")
    rows = []
    for idx, d in enumerate(ds):
        spec = PerceptronSpec(d=d, noise_var=noise_var, w_max=w_max)
        est = perceptron_log_volume(spec, grid_points=grid_points,
                                    samples=samples, rng=base.child(idx),
                                    radial_weight=radial)
        rows.append((d, noise_var, w_max, grid_points, samples, est.value,
                     est.stderr, est.upper))
    csv_path = _out_path(args, "perceptron_volume.csv")
    emit_results((columns, rows), csv_path, "csv")
    written = [csv_path]
    if args.svg:
        from .experiments import write_svg

        svg_path = _out_path(args, "perceptron_volume.svg")
        write_svg(svg_path, [("log volume", [r[0] for r in rows],
                              [r[5] for r in rows])],
                  "perceptron log-volume vs d", "d", "log volume")
        written.append(svg_path)
    echo = {"d": ds, "noise_var": noise_var, "w_max": w_max,
            "grid_points": grid_points, "samples": samples,
            "radial_weight": radial, "seed": seed, "backend": BACKEND}
    return _finish(args, "perceptron_volume", echo, seed, started, written)


def cmd_double_descent(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    seed = int(_pick(args, cfg, "seed", 0))
    full = bool(_pick(args, cfg, "full", False))
    defaults = ExperimentConfig.full_scale(seed) if full else ExperimentConfig(seed=seed)
    config = ExperimentConfig(
        n_values=_int_list(_pick(args, cfg, "n", defaults.n_values)),
        alpha_values=_float_list(_pick(args, cfg, "alpha", defaults.alpha_values)),
        d_grid=_int_list(_pick(args, cfg, "d_grid", defaults.d_grid)),
        d_true=int(_pick(args, cfg, "d_true", defaults.d_true)),
        beta_var=float(_pick(args, cfg, "beta_var", defaults.beta_var)),
        noise_var=float(_pick(args, cfg, "noise_var", defaults.noise_var)),
        folds=int(_pick(args, cfg, "folds", defaults.folds)),
        seed=seed,
    )
    curve = kfold_curve(config)
    csv_path = _out_path(args, "double_descent.csv")
    emit_results(curve, csv_path, "csv")
    written = [csv_path]
    if args.svg:
        svg_path = _out_path(args, "double_descent.svg")
        emit_results(curve, svg_path, "svg")
        written.append(svg_path)
    echo = {"n": list(config.n_values), "alpha": list(config.alpha_values),
            "d_grid": list(config.d_grid), "d_true": config.d_true,
            "beta_var": config.beta_var, "noise_var": config.noise_var,
            "folds": config.folds, "seed": seed, "full": full,
            "backend": BACKEND}
    return _finish(args, "double_descent", echo, seed, started, written)


def cmd_mdl_curve(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    max_n = int(_pick(args, cfg, "max_n", 4))
    data_size = int(_pick(args, cfg, "data_size", 10000))
    nlls = _float_list(_pick(args, cfg, "neg_log_lik", [0.0]))
    samples = int(_pick(args, cfg, "samples", 20000))
    seed = int(_pick(args, cfg, "seed", 0))
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    base = RngStream(seed)
    from .lattice import build_boolean_lattice

    uppers = []
    for k, n in enumerate(range(1, max_n + 1)):
        lat = build_boolean_lattice(n)
        est = lattice_log_volume_mc(lat, samples=samples, rng=base.child(k),
                                    threads=args.threads)
        uppers.append((f"bool:{n}", lat.size, est.upper))
    columns = ("lattice", "size", "neg_log_lik", "log_volume_upper", "mdl_score")
    rows = []
    for nll in nlls:
        for name, size, upper in uppers:
            rows.append((name, size, nll, upper,
                         mdl_score(nll, size, data_size, upper)))
    csv_path = _out_path(args, "mdl_curve.csv")
    emit_results((columns, rows), csv_path, "csv")
    written = [csv_path]
    if args.svg:
        from .experiments import write_svg

        series = [(f"neg_log_lik={nll:g}",
                   [r[1] for r in rows if r[2] == nll],
                   [r[4] for r in rows if r[2] == nll]) for nll in nlls]
        svg_path = _out_path(args, "mdl_curve.svg")
        write_svg(svg_path, series, "MDL score vs lattice size", "size (D)",
                  "MDL score (nats)")
        written.append(svg_path)
    echo = {"max_n": max_n, "data_size": data_size, "neg_log_lik": nlls,
            "samples": samples, "seed": seed, "backend": BACKEND}
    return _finish(args, "mdl_curve", echo, seed, started, written)


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="JSON config file; inline flags win")
    sub.add_argument("--out", required=True, help="output directory for artifacts")
    sub.add_argument("--seed", type=int, help="RNG seed (default 0)")
    sub.add_argument("--threads", type=int,
                     help="worker cap for Monte Carlo batches "
                          "(default: MDLVOL_THREADS or 1; results identical either way)")
    sub.add_argument("--svg", action="store_true", default=None,
                     help="also write an SVG chart")
    sub.add_argument("--quiet", action="store_true",
                     help="suppress progress lines on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdlvol",
        description="MDL code lengths and information-manifold log-volumes: "
                    "capacity, regression/lattice/perceptron volumes, and "
                    "double-descent experiment artifacts.")
    parser.add_argument("--version", action="version", version=_tool_version())
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("capacity", help="Monte Carlo channel capacity with bounds")
    p.add_argument("--d", help="parameter counts, comma list (default 1)")
    p.add_argument("--n", help="sample counts, comma list (default 1)")
    p.add_argument("--snr", help="signal-to-noise ratios, comma list (default 1)")
    p.add_argument("--samples", type=int, help="MC draws per cell (default 2000)")
    _add_common(p)
    p.set_defaults(func=cmd_capacity)

    p = subs.add_parser("regression-volume",
                        help="regression log-volumes, bounds, and packing ratios")
    p.add_argument("--d", help="parameter counts, comma list (default 2)")
    p.add_argument("--n", help="sample counts, comma list (default 10)")
    p.add_argument("--power", type=float, help="power constraint P (default 1)")
    p.add_argument("--noise-var", dest="noise_var", type=float,
                   help="noise variance (default 1)")
    p.add_argument("--samples", type=int, help="MC draws (default 2000)")
    p.add_argument("--no-regularize", dest="no_regularize", action="store_true",
                   default=None,
                   help="unregularized volume only; fails (exit 4) when d > n")
    _add_common(p)
    p.set_defaults(func=cmd_regression_volume)

    p = subs.add_parser("lattice-volume",
                        help="lattice log-volume MC with sandwich bounds")
    p.add_argument("--lattice",
                   help="comma list of lattice specs: bool:<n> or a JSON path "
                        "(default bool:2)")
    p.add_argument("--samples", type=int, help="MC draws (default 10000)")
    _add_common(p)
    p.set_defaults(func=cmd_lattice_volume)

    p = subs.add_parser("perceptron-volume",
                        help="stochastic sigmoid perceptron log-volume")
    p.add_argument("--d", help="input dimensions, comma list (default 2)")
    p.add_argument("--noise-var", dest="noise_var", type=float,
                   help="noise variance (default 1)")
    p.add_argument("--w-max", dest="w_max", type=float,
                   help="radial integration cutoff (default 10)")
    p.add_argument("--grid-points", dest="grid_points", type=int,
                   help="radial grid points (default 64)")
    p.add_argument("--samples", type=int, help="xi panel size (default 100000)")
    p.add_argument("--radial-weight", dest="radial_weight", action="store_true",
                   default=None, help="include the w^(D-1) surface factor")
    _add_common(p)
    p.set_defaults(func=cmd_perceptron_volume)

    p = subs.add_parser("double-descent",
                        help="ridge k-fold risk curves over the (n, alpha, d) grid")
    p.add_argument("--n", help="sample counts, comma list (default 300)")
    p.add_argument("--alpha", help="ridge constants, comma list (default 1e-2,1,1e2)")
    p.add_argument("--d-grid", dest="d_grid", help="model dimensions, comma list")
    p.add_argument("--d-true", dest="d_true", type=int,
                   help="true model dimension (default 150)")
    p.add_argument("--beta-var", dest="beta_var", type=float,
                   help="per-coordinate prior variance (default 0.25)")
    p.add_argument("--noise-var", dest="noise_var", type=float,
                   help="noise variance (default 1)")
    p.add_argument("--folds", type=int, help="CV folds (default 10)")
    p.add_argument("--full", action="store_true", default=None,
                   help="full-scale grid (n to 900, d to 2500); slow")
    _add_common(p)
    p.set_defaults(func=cmd_double_descent)

    p = subs.add_parser("mdl-curve",
                        help="MDL score over Boolean lattices (upper-bound volumes)")
    p.add_argument("--max-n", dest="max_n", type=int,
                   help="largest Boolean lattice exponent (default 4)")
    p.add_argument("--data-size", dest="data_size", type=int,
                   help="N in the (D/2)log(N/2pi e) term (default 10000)")
    p.add_argument("--neg-log-lik", dest="neg_log_lik",
                   help="fixed data-fit terms, comma list (default 0)")
    p.add_argument("--samples", type=int, help="MC draws per lattice (default 20000)")
    _add_common(p)
    p.set_defaults(func=cmd_mdl_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MdlvolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
