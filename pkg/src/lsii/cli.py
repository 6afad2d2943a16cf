"""Command-line surface: simulate | estimate | montecarlo | bootstrap | arch-test.

A single JSON config document drives each command; flat flags override
config keys.  Every command is a pure function of (config, input files,
seed): reruns are byte-identical, and results do not depend on
``--threads``.  CSV output uses ``.`` decimals, ``,`` separators, LF
line endings and 17-significant-digit floats; lines starting with ``#``
carry run metadata.

Exit codes: 0 success, 2 io-error, 3 parse-error, 4 degenerate-input,
5 study-failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .auxiliary import local_least_squares
from .bootstrap import LbbConfig, lbb_confidence_bands, lbb_window
from .diagnostics import arch_lm_test
from .errors import (
    ConvergenceFailure,
    DegenerateInputError,
    InvalidArgumentError,
    StudyFailure,
)
from .kernels import KERNEL_FAMILIES, KernelSpec, rule_of_thumb_bandwidth
from .lii import DEFAULT_GRID, LiiConfig, WeightMatrix, estimate_path
from .montecarlo import McDesign, run_study
from .processes import NoiseStream, Series
from . import montecarlo as mc

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_DEGENERATE = 4
EXIT_STUDY = 5

SIMULATE_MODELS = ("ls_ma1_a", "ls_ma1_b", "ls_ma1_c", "ls_sv")
ESTIMATE_MODELS = ("ls_ma1", "ls_ma1_a", "ls_ma1_b", "ls_ma1_c", "ls_sv", "ar1_identity")


class ConfigError(Exception):
    """Config document violates the schema."""


class CsvParseError(Exception):
    """Input CSV is malformed; message carries the offending line."""


# ---------------------------------------------------------------------------
# config schema
# ---------------------------------------------------------------------------

_SCHEMA = {
    "model": str,
    "T": int,
    "seed": int,
    "grid": (list, str),
    "kernel": {"family": str, "bandwidth": (int, float, str)},
    "lii": {
        "H": int,
        "sim_length": int,
        "tolerance": (int, float),
        "max_iterations": int,
        "restarts": int,
        "burnin": int,
        "coarse_points": int,
        "bounds": dict,
        "omega": list,
    },
    "bootstrap": {
        "block_size": int,
        "window_fraction": (int, float),
        "replications": int,
        "level": (int, float),
    },
    "montecarlo": {"replications": int},
    "input": str,
    "output": str,
    "threads": int,
    "lags": int,
    "demean": bool,
    "time_varying_mean": bool,
    "regressors": list,
}


def _check_section(obj, schema, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    for key, value in obj.items():
        if key not in schema:
            raise ConfigError(f"unknown config key {where}{key!r}")
        expected = schema[key]
        if isinstance(expected, dict):
            _check_section(value, expected, f"{where}{key}.")
        else:
            if isinstance(value, bool) and expected is not bool:
                raise ConfigError(f"config key {where}{key!r} has the wrong type")
            if value is not None and not isinstance(value, expected):
                raise ConfigError(f"config key {where}{key!r} has the wrong type")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    _check_section(cfg, _SCHEMA, "")
    return cfg


def _resolve_seed(args, cfg) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    if "seed" in cfg:
        return int(cfg["seed"])
    env = os.environ.get("LSII_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"LSII_SEED is not an integer: {env!r}") from None
    return 0


def _resolve_grid(args, cfg) -> np.ndarray:
    spec = getattr(args, "grid", None)
    if spec is None:
        spec = cfg.get("grid", "default")
    if isinstance(spec, str):
        if spec == "default":
            return DEFAULT_GRID.copy()
        try:
            values = [float(x) for x in spec.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse grid {spec!r}") from None
    else:
        values = [float(x) for x in spec]
    grid = np.asarray(values, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ConfigError("grid must be non-empty and strictly increasing")
    return grid


def _resolve_kernel(args, cfg, T: int) -> KernelSpec:
    kcfg = dict(cfg.get("kernel", {}))
    family = kcfg.get("family", "gaussian")
    if family not in KERNEL_FAMILIES:
        raise ConfigError(f"unknown kernel family {family!r}")
    bandwidth = getattr(args, "bandwidth", None)
    if bandwidth is None:
        bandwidth = kcfg.get("bandwidth", "rule_of_thumb")
    if isinstance(bandwidth, str):
        if bandwidth != "rule_of_thumb":
            try:
                bandwidth = float(bandwidth)
            except ValueError:
                raise ConfigError(f"cannot parse bandwidth {bandwidth!r}") from None
    if bandwidth == "rule_of_thumb":
        bandwidth = rule_of_thumb_bandwidth(T)
    if not bandwidth > 0.0:
        raise ConfigError(f"bandwidth must be positive, got {bandwidth}")
    return KernelSpec(family, float(bandwidth))


def _resolve_lii(args, cfg, grid: np.ndarray, seed: int) -> LiiConfig:
    lcfg = dict(cfg.get("lii", {}))
    if getattr(args, "H", None) is not None:
        lcfg["H"] = args.H
    bounds = lcfg.pop("bounds", None)
    if getattr(args, "bound", None):
        bounds = dict(bounds or {})
        for name, lo, hi in args.bound:
            bounds[name] = (float(lo), float(hi))
    if bounds is not None:
        bounds = {k: (float(v[0]), float(v[1])) for k, v in bounds.items()}
    omega = lcfg.pop("omega", None)
    if omega is not None:
        omega = WeightMatrix(np.asarray(omega, dtype=float))
    try:
        return LiiConfig(grid=grid, seed=seed, bounds=bounds, omega=omega, **lcfg)
    except (TypeError, InvalidArgumentError) as exc:
        raise ConfigError(f"bad lii settings: {exc}") from None


def _resolve_model(cfg, allowed) -> str:
    model = cfg.get("model")
    if model is None:
        raise ConfigError("config key 'model' is required for this command")
    if model not in allowed:
        raise ConfigError(f"model {model!r} not supported here; expected one of {allowed}")
    return model


def _estimation_model(model: str) -> str:
    return "ls_ma1" if model.startswith("ls_ma1") else model


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: str, meta, columns, rows) -> None:
    """Write metadata comments, a header, and rows with LF endings."""
    buf = io.StringIO()
    for key, value in meta:
        buf.write(f"# {key}={_fmt(value)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_input_csv(path: str, regressors=None):
    """Read the value column (plus named regressor columns) from a CSV.

    ``t`` and ``date`` columns are ignored.  A headerless single column
    is accepted as the value column.
    """
    regressors = list(regressors or [])
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        lines = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not lines:
        raise CsvParseError(f"{path}: empty input (line 1)")

    def _is_number(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header = lines[0]
    if all(_is_number(c) for c in header if c.strip()):
        if regressors:
            raise CsvParseError(f"{path}: regressor columns need a header row (line 1)")
        if len(header) != 1:
            raise CsvParseError(f"{path}: headerless input must have one column (line 1)")
        names = ["value"]
        body = lines
        offset = 1
    else:
        names = [c.strip() for c in header]
        body = lines[1:]
        offset = 2
    if "value" not in names:
        raise CsvParseError(f"{path}: no 'value' column in header (line 1)")
    missing = [r for r in regressors if r not in names]
    if missing:
        raise CsvParseError(f"{path}: missing regressor columns {missing} (line 1)")

    idx = {name: names.index(name) for name in ["value"] + regressors}
    values = np.empty(len(body))
    regs = np.empty((len(body), len(regressors)))
    for i, row in enumerate(body):
        if len(row) != len(names):
            raise CsvParseError(f"{path}: wrong field count (line {i + offset})")
        try:
            values[i] = float(row[idx["value"]])
            for j, r in enumerate(regressors):
                regs[i, j] = float(row[idx[r]])
        except ValueError:
            raise CsvParseError(f"{path}: non-numeric field (line {i + offset})") from None
    if not np.all(np.isfinite(values)) or not np.all(np.isfinite(regs)):
        raise CsvParseError(f"{path}: non-finite values in input")
    return values, regs


def _preprocess(values, regs, cfg, kernel: KernelSpec) -> Series:
    """Optional conditional-mean removal before estimation.

    With regressors, either a global OLS fit (intercept + regressors) or,
    under ``time_varying_mean``, a local least-squares fit evaluated at
    each t/T; with no regressors, ``demean`` subtracts the mean and
    ``time_varying_mean`` removes a local level.
    """
    T = values.size
    tv = bool(cfg.get("time_varying_mean", False))
    if regs.shape[1] > 0:
        x = np.column_stack([np.ones(T), regs])
    elif tv:
        x = np.ones((T, 1))
    else:
        if cfg.get("demean", False):
            return Series(values - values.mean())
        return Series(values)
    y = Series(values)
    if tv:
        fitted = np.empty(T)
        for t in range(1, T + 1):
            u = min(max(t / T, 1e-6), 1.0 - 1e-6)
            coef = local_least_squares(y, x, u, kernel)
            fitted[t - 1] = x[t - 1] @ coef
    else:
        coef, _, _, _ = np.linalg.lstsq(x, values, rcond=None)
        fitted = x @ coef
    return Series(values - fitted)


def _load_series(args, cfg, kernel_for=None):
    path = getattr(args, "input", None) or cfg.get("input")
    if path is None:
        raise ConfigError("an input CSV is required (flag --input or config 'input')")
    values, regs = read_input_csv(path, cfg.get("regressors"))
    kernel = kernel_for if kernel_for is not None else _resolve_kernel(args, cfg, values.size)
    return _preprocess(values, regs, cfg, kernel), kernel


def _out_path(args, cfg) -> str:
    path = getattr(args, "out", None) or cfg.get("output")
    if path is None:
        raise ConfigError("an output path is required (flag --out or config 'output')")
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    model = _resolve_model(cfg, SIMULATE_MODELS)
    if "T" not in cfg:
        raise ConfigError("config key 'T' is required for simulate")
    T = int(cfg["T"])
    seed = _resolve_seed(args, cfg)
    design = McDesign(model_kind=model, T=T, replications=1, seed=seed)
    series = mc._simulate_design_path(design, 0)
    out = _out_path(args, cfg)
    t = np.arange(1, T + 1)
    rows = [(int(ti), ti / T, v) for ti, v in zip(t, series.values)]
    write_csv(out, [("model", model), ("T", T), ("seed", seed)], ["t", "u", "value"], rows)
    print(f"seed={seed}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = load_config(args.config)
    model = _resolve_model(cfg, ESTIMATE_MODELS)
    est_model = _estimation_model(model)
    seed = _resolve_seed(args, cfg)
    grid = _resolve_grid(args, cfg)
    series, kernel = _load_series(args, cfg)
    if series.T < 50:
        raise DegenerateInputError(f"need T >= 50 observations, got {series.T}")
    config = _resolve_lii(args, cfg, grid, seed)
    fit = estimate_path(series, est_model, kernel, config)

    columns = (
        ["u"]
        + [f"theta_{n}" for n in fit.theta_names]
        + [f"rho_obs_{n}" for n in fit.rho_names]
        + ["objective", "converged"]
    )
    rows = []
    for p in fit.points:
        rows.append(
            [p.u]
            + [float(v) for v in p.theta_hat.values]
            + [float(v) for v in p.rho_obs]
            + [p.objective_value, bool(p.converged)]
        )
    meta = [
        ("model", model),
        ("T", series.T),
        ("seed", seed),
        ("kernel", kernel.family),
        ("bandwidth", kernel.bandwidth),
        ("H", config.H),
    ]
    if est_model == "ls_sv":
        path = fit.theta_path()
        for name in ("phi", "gamma_nu", "sigma"):
            meta.append((f"median_{name}", float(np.nanmedian(path.component(name)))))
    out = _out_path(args, cfg)
    write_csv(out, meta, columns, rows)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    cfg = load_config(args.config)
    model = _resolve_model(cfg, SIMULATE_MODELS)
    if "T" not in cfg:
        raise ConfigError("config key 'T' is required for montecarlo")
    T = int(cfg["T"])
    seed = _resolve_seed(args, cfg)
    grid = _resolve_grid(args, cfg)
    replications = int(cfg.get("montecarlo", {}).get("replications", 200))
    kernel = _resolve_kernel(args, cfg, T)
    lii = _resolve_lii(args, cfg, grid, seed)
    threads = args.threads or cfg.get("threads", 1)
    design = McDesign(
        model_kind=model, T=T, replications=replications, seed=seed,
        grid=grid, lii=lii, kernel=kernel,
    )
    out = _out_path(args, cfg)
    code = EXIT_OK
    try:
        summary = run_study(design, workers=int(threads))
    except StudyFailure as exc:
        summary = exc.partial
        print(f"study-failure: {exc}", file=sys.stderr)
        code = EXIT_STUDY
    rows = [
        (u, tr, a, b, c, bi, rm, summary.n_failures)
        for u, tr, a, b, c, bi, rm in zip(
            summary.grid, summary.truth, summary.q05, summary.q50,
            summary.q95, summary.bias, summary.rmse,
        )
    ]
    meta = [
        ("model", model), ("T", T), ("seed", seed),
        ("replications", replications),
        ("kernel", kernel.family), ("bandwidth", kernel.bandwidth),
        ("H", lii.H),
    ]
    write_csv(out, meta, ["u", "truth", "q05", "q50", "q95", "bias", "rmse", "n_fail"], rows)
    print(f"wrote {out}")
    return code


def cmd_bootstrap(args) -> int:
    cfg = load_config(args.config)
    model = _resolve_model(cfg, ESTIMATE_MODELS)
    est_model = _estimation_model(model)
    seed = _resolve_seed(args, cfg)
    grid = _resolve_grid(args, cfg)
    series, kernel = _load_series(args, cfg)
    config = _resolve_lii(args, cfg, grid, seed)
    bcfg = dict(cfg.get("bootstrap", {}))
    lbb = LbbConfig(seed=seed, **bcfg)
    headline = "xi" if est_model == "ls_sv" else "theta"

    def estimator(s: Series) -> np.ndarray:
        fit = estimate_path(s, est_model, kernel, config)
        vals = fit.component(headline)
        if not np.all(np.isfinite(vals)):
            raise ConvergenceFailure("estimation failed on this replication")
        return vals

    table = lbb_confidence_bands(series, estimator, lbb, grid=grid)
    window = lbb_window(series.T, lbb)
    meta = [
        ("model", model), ("T", series.T), ("seed", seed),
        ("block_size", lbb.block_size), ("window_fraction", lbb.window_fraction),
        ("replications", lbb.replications), ("level", lbb.level),
        ("tb", window.tb), ("q", window.q),
        ("kernel", kernel.family), ("bandwidth", kernel.bandwidth),
    ]
    rows = [
        (u, e, lo, hi, lbb.level, table.n_dropped)
        for u, e, lo, hi in zip(table.grid, table.estimate, table.lower, table.upper)
    ]
    out = _out_path(args, cfg)
    write_csv(out, meta, ["u", "estimate", "lo", "hi", "level", "n_dropped"], rows)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_arch_test(args) -> int:
    cfg = load_config(args.config)
    lags = args.lags if args.lags is not None else int(cfg.get("lags", 5))
    path = getattr(args, "input", None) or cfg.get("input")
    if path is None:
        raise ConfigError("an input CSV is required (flag --input or config 'input')")
    values, regs = read_input_csv(path, cfg.get("regressors"))
    kernel = KernelSpec("gaussian", rule_of_thumb_bandwidth(values.size))
    series = _preprocess(values, regs, cfg, kernel)
    result = arch_lm_test(series, lags=lags)
    print(f"statistic={_fmt(result.statistic)}")
    print(f"dof={result.dof}")
    print(f"pvalue={_fmt(result.pvalue)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsii",
        description="Local indirect inference for locally stationary time-series models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", help="JSON config path")
        p.add_argument("--seed", type=int, help="seed override (else config, else $LSII_SEED)")
        p.add_argument("--threads", type=int, default=None, help="worker cap")
        if needs_out:
            p.add_argument("--out", help="output CSV path")

    p = sub.add_parser("simulate", help="simulate a named design to CSV")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="L-II estimation from an input CSV")
    common(p)
    p.add_argument("--input", help="input CSV with a 'value' column")
    p.add_argument("--grid", help="comma-separated grid of u values")
    p.add_argument("--bandwidth", help="bandwidth value or 'rule_of_thumb'")
    p.add_argument("--H", type=int, help="number of simulated paths")
    p.add_argument("--bound", nargs=3, action="append", metavar=("NAME", "LO", "HI"),
                   help="override a parameter box")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("montecarlo", help="replication study of a named design")
    common(p)
    p.add_argument("--grid", help="comma-separated grid of u values")
    p.add_argument("--bandwidth", help="bandwidth value or 'rule_of_thumb'")
    p.add_argument("--H", type=int, help="number of simulated paths")
    p.add_argument("--bound", nargs=3, action="append", metavar=("NAME", "LO", "HI"))
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("bootstrap", help="local block bootstrap bands around estimates")
    common(p)
    p.add_argument("--input", help="input CSV with a 'value' column")
    p.add_argument("--grid", help="comma-separated grid of u values")
    p.add_argument("--bandwidth", help="bandwidth value or 'rule_of_thumb'")
    p.add_argument("--H", type=int, help="number of simulated paths")
    p.add_argument("--bound", nargs=3, action="append", metavar=("NAME", "LO", "HI"))
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("arch-test", help="ARCH LM test on centered input")
    common(p, needs_out=False)
    p.add_argument("--input", help="input CSV with a 'value' column")
    p.add_argument("--lags", type=int, default=None, help="auxiliary regression lags")
    p.set_defaults(func=cmd_arch_test)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CsvParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateInputError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except StudyFailure as exc:
        print(f"study failure: {exc}", file=sys.stderr)
        return EXIT_STUDY
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
