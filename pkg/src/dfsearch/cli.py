"""Command-line harness: closed-form curves, simulation grids, Stein checks.

Three subcommands, each driven by a flat key=value config file:

  dfsearch curves      --config c.txt --out dir [--svg]
  dfsearch simulate    --config c.txt --out dir [--seed N] [--svg]
  dfsearch stein-check --config c.txt --out dir [--seed N]

Every run writes ``resolved-config.txt`` (all defaults filled in) next to
its outputs; re-running from that sidecar reproduces the CSVs byte for
byte.  Exit codes: 0 success, 2 config error, 3 capacity error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import closedform as cf
from .config import (
    Option,
    format_resolved,
    parse_choice,
    parse_float,
    parse_float_list,
    parse_int,
    parse_int_list,
    read_config,
    resolve_options,
)
from .errors import CapacityError, ConfigError, NumericalError
from .fitters import SUBSET_P_MAX, FitProcedure
from .model import DesignMatrix, RngSpec, SignalSpec, gen_block_design, gen_orthogonal_design
from .montecarlo import ExperimentGrid, estimate_df, run_grid
from .stein import function_library, stein_decompose_df, stein_lhs_univariate, stein_rhs_univariate
from .svgplot import svg_plot

__all__ = ["cmd_curves", "cmd_simulate", "cmd_stein_check", "main"]


def _csv_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _write_csv(path: str, schema: str, header, rows):
    lines = [f"# schema: {schema}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _parse_procedures(allowed):
    inner = parse_choice(*allowed)

    def parse(s: str):
        parts = tuple(p.strip() for p in s.split(",") if p.strip())
        if not parts:
            raise ConfigError("expected at least one procedure")
        seen = []
        for p in parts:
            inner(p)
            if p in seen:
                raise ConfigError(f"procedure {p!r} listed twice")
            seen.append(p)
        return tuple(seen)

    return parse


# ---------------------------------------------------------------------------
# curves: closed-form orthogonal-design tables
# ---------------------------------------------------------------------------

_CURVES_OPTIONS = [
    Option("regime", parse_choice("null", "sparse", "dense")),
    Option("p", parse_int, 100),
    Option("sigma", parse_float, 1.0),
    Option("rho", parse_float, 1.0),
    Option("sparsity", parse_int, 10),
    Option("lambda_min", parse_float, 0.0),
    Option("lambda_max", parse_float, 5.0),
    Option("lambda_count", parse_int, 201),
    Option("active_min", parse_float, 0.5),
    Option("active_max", parse_float, None),
    Option("active_count", parse_int, 50),
]


def _regime_coefficients(regime: str, p: int, rho: float, sparsity: int) -> np.ndarray:
    beta = np.zeros(p)
    if regime == "dense":
        beta[:] = rho
    elif regime == "sparse":
        if not 0 <= sparsity <= p:
            raise ConfigError(f"sparsity must lie in [0, {p}]")
        beta[:sparsity] = rho
    return beta


def cmd_curves(config: dict, out_dir: str, svg: bool = False) -> list:
    """Write closed-form df/sdf curve tables for the orthogonal case."""
    resolved = resolve_options(config, _CURVES_OPTIONS, "curves")
    p = resolved["p"]
    sigma = resolved["sigma"]
    if p < 1:
        raise ConfigError("p must be positive")
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    if resolved["active_max"] is None:
        resolved["active_max"] = float(p) - 0.5 if p > 1 else float(p)
    if resolved["lambda_count"] < 2 or resolved["active_count"] < 2:
        raise ConfigError("lambda_count and active_count must be at least 2")
    if not 0 <= resolved["lambda_min"] < resolved["lambda_max"]:
        raise ConfigError("need 0 <= lambda_min < lambda_max")
    if not 0 < resolved["active_min"] <= resolved["active_max"] <= p:
        raise ConfigError(f"need 0 < active_min <= active_max <= p={p}")

    xtmu = _regime_coefficients(resolved["regime"], p, resolved["rho"], resolved["sparsity"])
    lams = np.linspace(resolved["lambda_min"], resolved["lambda_max"], resolved["lambda_count"])
    targets = np.linspace(resolved["active_min"], resolved["active_max"], resolved["active_count"])

    header = ("lambda", "t", "expected_active", "df", "sdf")
    subset_rows = []
    lasso_rows = []
    for lam in lams:
        cp = cf.df_subset_orthogonal(xtmu, sigma, float(lam))
        subset_rows.append((cp.lam, cp.t, cp.expected_active, cp.df, cp.sdf))
        cl = cf.df_relaxed_lasso_orthogonal(xtmu, sigma, float(lam))
        lasso_rows.append((cl.lam, cl.t, cl.expected_active, cl.df, cl.sdf))

    by_active_rows = []
    for target in targets:
        t = cf.threshold_for_expected_active(xtmu, sigma, float(target))
        cp = cf.df_subset_orthogonal(xtmu, sigma, 0.5 * t * t)
        by_active_rows.append((cp.expected_active, t, 0.5 * t * t, t, cp.df, cp.sdf))

    os.makedirs(out_dir, exist_ok=True)
    paths = []

    def emit(name, schema, hdr, rows):
        path = os.path.join(out_dir, name)
        _write_csv(path, schema, hdr, rows)
        paths.append(path)

    emit("curves-subset.csv", "curves-v1", header, subset_rows)
    emit("curves-lasso.csv", "curves-v1", header, lasso_rows)
    emit(
        "curves-by-active.csv", "curves-by-active-v1",
        ("expected_active", "t", "lambda_subset", "lambda_lasso", "df", "sdf"),
        by_active_rows,
    )
    sidecar = os.path.join(out_dir, "resolved-config.txt")
    _write_text(sidecar, format_resolved(resolved, _CURVES_OPTIONS, "curves"))
    paths.append(sidecar)

    if svg:
        sub = np.array(subset_rows)
        svg_path = os.path.join(out_dir, "curves-subset.svg")
        _write_text(svg_path, svg_plot(
            [
                {"label": "df", "x": sub[:, 0], "y": sub[:, 3]},
                {"label": "sdf", "x": sub[:, 0], "y": sub[:, 4]},
                {"label": "expected active", "x": sub[:, 0], "y": sub[:, 2]},
            ],
            title=f"best subset, {resolved['regime']} signal, p={p}",
            xlabel="lambda", ylabel="degrees of freedom",
        ))
        paths.append(svg_path)
        ba = np.array(by_active_rows)
        svg_path = os.path.join(out_dir, "curves-by-active.svg")
        _write_text(svg_path, svg_plot(
            [{"label": "sdf", "x": ba[:, 0], "y": ba[:, 5]}],
            title=f"search cost vs selected size, {resolved['regime']} signal",
            xlabel="expected active-set size", ylabel="sdf",
        ))
        paths.append(svg_path)
    return paths


# ---------------------------------------------------------------------------
# simulate: Monte Carlo df/sdf grids
# ---------------------------------------------------------------------------

_SIM_PROCEDURES = ("lasso", "best-subset", "relaxed-lasso", "ridge")

_SIM_OPTIONS = [
    Option("procedures", _parse_procedures(_SIM_PROCEDURES),
           ("lasso", "best-subset", "relaxed-lasso")),
    Option("n", parse_int, 20),
    Option("p", parse_int, 10),
    Option("design", parse_choice("block", "orthogonal"), "block"),
    Option("block_sizes", parse_int_list, (4, 6)),
    Option("corr_low", parse_float, 0.6),
    Option("corr_high", parse_float, 0.9),
    Option("design_seed", parse_int, 7),
    Option("signal", parse_choice("null", "sparse", "dense"), "sparse"),
    Option("support", parse_int_list, (0, 1, 2, 3, 4)),
    Option("rho", parse_float, 1.0),
    Option("sigma", parse_float, 1.0),
    Option("lambda_grid", parse_float_list, None),
    Option("lambda_count", parse_int, 10),
    Option("reps", parse_int, 100),
    Option("seed", parse_int, 0),
]


def _build_design(resolved: dict) -> DesignMatrix:
    n, p = resolved["n"], resolved["p"]
    if resolved["design"] == "orthogonal":
        return gen_orthogonal_design(n, p)
    return gen_block_design(
        n, p, resolved["block_sizes"], resolved["corr_low"], resolved["corr_high"],
        RngSpec(seed=resolved["design_seed"], stream_id=0),
    )


def _build_signal(resolved: dict, design: DesignMatrix) -> SignalSpec:
    p = design.p
    beta = np.zeros(p)
    kind = resolved["signal"]
    if kind == "dense":
        beta[:] = resolved["rho"]
    elif kind == "sparse":
        support = resolved["support"]
        if any(j < 0 or j >= p for j in support):
            raise ConfigError(f"support indices must lie in [0, {p - 1}]")
        beta[list(support)] = resolved["rho"]
    return SignalSpec.from_coefficients(design, beta, resolved["sigma"])


def _auto_lambda_grid(design: DesignMatrix, signal: SignalSpec, count: int) -> tuple:
    """Log-spaced grid up to the smallest penalty that zeroes a noiseless
    fit; under a null signal that scale is set by the noise level instead."""
    lam_max = float(np.abs(design.values.T @ signal.mu).max())
    if lam_max <= 0:
        col_scale = float(np.sqrt((design.values ** 2).sum(axis=0)).max())
        lam_max = signal.sigma * np.sqrt(2.0 * np.log(design.p)) * col_scale
        if lam_max <= 0:
            lam_max = 1.0
    return tuple(float(v) for v in np.geomspace(0.01 * lam_max, lam_max, count))


def cmd_simulate(config: dict, out_dir: str, svg: bool = False) -> list:
    """Run the Monte Carlo df/sdf grid for each requested procedure."""
    resolved = resolve_options(config, _SIM_OPTIONS, "simulate")
    if "best-subset" in resolved["procedures"] and resolved["p"] > SUBSET_P_MAX:
        raise CapacityError(
            f"best-subset requested with p={resolved['p']} > {SUBSET_P_MAX}"
        )
    design = _build_design(resolved)
    signal = _build_signal(resolved, design)
    if resolved["lambda_grid"] is None:
        if resolved["lambda_count"] < 2:
            raise ConfigError("lambda_count must be at least 2")
        resolved["lambda_grid"] = _auto_lambda_grid(design, signal, resolved["lambda_count"])

    header = ("procedure", "lambda", "mean_active", "df_hat", "se", "sdf_hat", "sdf_se")
    rows = []
    tables = {}
    for kind in resolved["procedures"]:
        grid = ExperimentGrid(
            kind=kind,
            lambda_grid=resolved["lambda_grid"],
            design=design,
            signal=signal,
            reps=resolved["reps"],
            seed=resolved["seed"],
        )
        table = run_grid(grid)
        tables[kind] = table
        for r in table.rows:
            rows.append((kind, r.lam, r.mean_active, r.df, r.df_se, r.sdf, r.sdf_se))

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "simulate.csv")
    _write_csv(csv_path, "simulate-v1", header, rows)
    sidecar = os.path.join(out_dir, "resolved-config.txt")
    _write_text(sidecar, format_resolved(resolved, _SIM_OPTIONS, "simulate"))
    paths = [csv_path, sidecar]

    if svg:
        series = [
            {
                "label": kind,
                "x": tables[kind].column("mean_active"),
                "y": tables[kind].column("df"),
                "kind": "points",
            }
            for kind in resolved["procedures"]
        ]
        svg_path = os.path.join(out_dir, "simulate.svg")
        _write_text(svg_path, svg_plot(
            series,
            title=f"df vs selected size (n={design.n}, p={design.p}, "
                  f"reps={resolved['reps']})",
            xlabel="mean active-set size", ylabel="estimated df",
            diagonal=True,
        ))
        paths.append(svg_path)
    return paths


# ---------------------------------------------------------------------------
# stein-check: univariate identity report and df decompositions
# ---------------------------------------------------------------------------

_STEIN_PROCEDURES = (
    "hard-threshold", "soft-threshold", "lasso", "relaxed-lasso", "best-subset", "ridge",
)

_STEIN_OPTIONS = [
    Option("mode", parse_choice("library", "decompose", "both"), "both"),
    Option("mus", parse_float_list, (-2.0, 0.0, 3.0)),
    Option("sigmas", parse_float_list, (0.5, 1.0, 2.0)),
    Option("procedures", _parse_procedures(_STEIN_PROCEDURES),
           ("hard-threshold", "lasso", "best-subset", "relaxed-lasso")),
    Option("n", parse_int, 10),
    Option("p", parse_int, None),
    Option("design", parse_choice("orthogonal", "block"), "orthogonal"),
    Option("block_sizes", parse_int_list, ()),
    Option("corr_low", parse_float, 0.4),
    Option("corr_high", parse_float, 0.9),
    Option("design_seed", parse_int, 7),
    Option("signal", parse_choice("null", "sparse", "dense"), "null"),
    Option("support", parse_int_list, (0,)),
    Option("rho", parse_float, 1.0),
    Option("sigma", parse_float, 1.0),
    Option("lambda", parse_float, 0.5),
    Option("threshold", parse_float, 1.0),
    Option("reps", parse_int, 400),
    Option("grid_points", parse_int, 4096),
    Option("seed", parse_int, 0),
]


def _closed_form_df(kind: str, design: DesignMatrix, signal: SignalSpec, lam: float):
    """Exact df where a formula exists; None (blank CSV cell) otherwise."""
    if kind == "ridge":
        X = design.values
        G = X.T @ X + lam * np.eye(design.p)
        return float(np.trace(X @ np.linalg.solve(G, X.T)))
    if not design.orthogonal:
        return None
    xtmu = design.values.T @ signal.mu
    sigma = signal.sigma
    if kind == "hard-threshold":
        return cf.df_hard_threshold(xtmu, sigma, lam)
    if kind == "soft-threshold":
        return cf.expected_active_hard(xtmu, sigma, lam)
    if kind == "lasso":
        return cf.expected_active_hard(xtmu, sigma, lam)
    if kind == "best-subset":
        return cf.df_subset_orthogonal(xtmu, sigma, lam).df
    if kind == "relaxed-lasso":
        return cf.df_relaxed_lasso_orthogonal(xtmu, sigma, lam).df
    return None


def cmd_stein_check(config: dict, out_dir: str, svg: bool = False) -> list:
    """Univariate identity residuals and Monte Carlo df decompositions."""
    resolved = resolve_options(config, _STEIN_OPTIONS, "stein-check")
    if resolved["p"] is None:
        resolved["p"] = resolved["n"]
    if any(s <= 0 for s in resolved["sigmas"]):
        raise ConfigError("sigmas must be positive")

    os.makedirs(out_dir, exist_ok=True)
    paths = []

    if resolved["mode"] in ("library", "both"):
        rows = []
        for name, f in function_library():
            for mu in resolved["mus"]:
                for s in resolved["sigmas"]:
                    lhs = stein_lhs_univariate(f, mu, s)
                    rhs = stein_rhs_univariate(f, mu, s)
                    rows.append((f"{name} mu={mu:g} sigma={s:g}", lhs, rhs, abs(lhs - rhs)))
        path = os.path.join(out_dir, "stein-univariate.csv")
        _write_csv(path, "stein-univariate-v1", ("case", "lhs", "rhs", "residual"), rows)
        paths.append(path)

    if resolved["mode"] in ("decompose", "both"):
        if resolved["design"] == "orthogonal":
            design = gen_orthogonal_design(resolved["n"], resolved["p"])
        else:
            if not resolved["block_sizes"]:
                raise ConfigError("block design requires block_sizes")
            design = gen_block_design(
                resolved["n"], resolved["p"], resolved["block_sizes"],
                resolved["corr_low"], resolved["corr_high"],
                RngSpec(seed=resolved["design_seed"], stream_id=0),
            )
        signal = _build_signal(resolved, design)
        rows = []
        for kind in resolved["procedures"]:
            lam = resolved["threshold"] if kind.endswith("threshold") else resolved["lambda"]
            proc = FitProcedure(kind=kind, lam=lam, design=design)
            dec = stein_decompose_df(
                proc, signal, resolved["reps"], resolved["seed"],
                grid_points=resolved["grid_points"],
            )
            df = estimate_df(proc, signal, resolved["reps"], resolved["seed"] + 1)
            closed = _closed_form_df(kind, design, signal, lam)
            rows.append((
                kind, dec.divergence, dec.boundary, df.value,
                "" if closed is None else _csv_cell(closed),
                dec.total_se, df.std_error,
            ))
        path = os.path.join(out_dir, "stein-decompose.csv")
        _write_csv(
            path, "stein-decompose-v1",
            ("procedure", "divergence_term", "boundary_term", "df_hat",
             "closed_form_if_available", "decomposition_se", "df_se"),
            rows,
        )
        paths.append(path)

    sidecar = os.path.join(out_dir, "resolved-config.txt")
    _write_text(sidecar, format_resolved(resolved, _STEIN_OPTIONS, "stein-check"))
    paths.append(sidecar)
    return paths


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "curves": cmd_curves,
    "simulate": cmd_simulate,
    "stein-check": cmd_stein_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfsearch",
        description="Degrees of freedom and search cost of adaptive regression "
                    "procedures: closed-form curves, Monte Carlo grids, and "
                    "Stein identity checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("curves", "closed-form df/sdf curve tables (orthogonal design)"),
        ("simulate", "Monte Carlo df/sdf estimates over a tuning grid"),
        ("stein-check", "Stein identity residuals and df decompositions"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="key=value config file")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config's seed")
        sp.add_argument("--svg", action="store_true", help="also write SVG plots")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        raw = read_config(args.config)
        if args.seed is not None:
            raw["seed"] = str(args.seed)
        try:
            _COMMANDS[args.command](raw, args.out, svg=args.svg)
        except ValueError as err:
            raise ConfigError(str(err)) from err
    except ConfigError as err:
        print(f"dfsearch: config error: {err}", file=sys.stderr)
        return 2
    except CapacityError as err:
        print(f"dfsearch: capacity error: {err}", file=sys.stderr)
        return 3
    except NumericalError as err:
        print(f"dfsearch: numerical failure: {err}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
