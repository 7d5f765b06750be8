"""Command-line driver: ``fnls-decay {solve,kernel,decay,sweep,invariants}``.

Every run writes its CSV tables, ``summary.json``, ``plot.gp`` and PNG figures
into ``--out``. Failures exit nonzero and print a JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import report
from .diagnostics import (
    UnusableWindowError,
    default_window,
    invariants,
    limit_constants,
    profile_residual,
)
from .kernels import eval_kernels, kernel_tail_report
from .model import AdmissibilityError, ModelParams, classical_ground_state, validate
from .solver import (
    CollapseError,
    ConvergenceError,
    DivergenceError,
    SolverConfig,
    default_phase_slope,
    initial_guess,
    solve_profile,
)
from .spectral import ProfilePair, make_grid

SUBCOMMANDS = ("solve", "kernel", "decay", "sweep", "invariants")
MAX_N = 2 ** 20

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_DIVERGENCE, EXIT_FILESYSTEM = range(6)

DEFAULTS = {
    "s": 0.75, "sigma": 1.0, "lambda1": 1.0, "lambda2": 0.25, "classical": False,
    "L": None, "N": None,
    "tol_res": 1e-9, "tol_inc": 1e-10, "tol_m": 1e-10, "max_iter": 500, "alpha": None,
    "extrapolation": "none", "cycle_width": 6, "dealias": True,
    "seed": "gaussian", "phase": "linear", "phase_slope": None,
    "amplitude": 1.0, "width": 1.0,
    "window_lo": None, "window_hi": None,
    "oversample": 8, "out": "out", "figures": True,
    "s_values": [0.6, 0.75, 0.95], "L_values": [256, 512, 1024], "workers": 1,
    "profile": None,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    params: ModelParams
    L: float
    N: int
    solver: SolverConfig
    seed: dict
    window: tuple | None
    output_dir: Path
    oversample: int = 8
    figures: bool = True
    s_values: list = field(default_factory=list)
    L_values: list = field(default_factory=list)
    workers: int = 1
    profile: str | None = None


def default_N(L: float) -> int:
    """N = 16 L (spacing 1/8), even, at least 16, capped at 2**20."""
    n = int(round(16 * L))
    n += n % 2
    return max(16, min(MAX_N, n))


# -- config assembly -------------------------------------------------------

def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    text = str(text).strip()
    if not text:
        return []
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", help="JSON file mirroring the flags")
    common.add_argument("--s", type=float, default=S)
    common.add_argument("--sigma", type=float, default=S)
    common.add_argument("--lambda1", type=float, default=S)
    common.add_argument("--lambda2", type=float, default=S)
    common.add_argument("--classical", action="store_true", default=S,
                        help="admit s = 1 (classical NLS regression)")
    common.add_argument("--L", type=float, default=S,
                        help="half-length (solve/decay) or kernel evaluation length")
    common.add_argument("--N", type=int, default=S)
    common.add_argument("--tol-res", dest="tol_res", type=float, default=S)
    common.add_argument("--tol-inc", dest="tol_inc", type=float, default=S)
    common.add_argument("--tol-m", dest="tol_m", type=float, default=S)
    common.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    common.add_argument("--alpha", type=float, default=S)
    common.add_argument("--extrapolation", choices=["none", "mpe", "rre"], default=S)
    common.add_argument("--cycle-width", dest="cycle_width", type=int, default=S)
    common.add_argument("--no-dealias", dest="dealias", action="store_false", default=S)
    common.add_argument("--seed", choices=["gaussian", "sech"], default=S)
    common.add_argument("--phase", choices=["linear", "quadratic"], default=S)
    common.add_argument("--phase-slope", dest="phase_slope", type=float, default=S,
                        help="A in theta = A x (default from lambda2)")
    common.add_argument("--amplitude", type=float, default=S)
    common.add_argument("--width", type=float, default=S)
    common.add_argument("--window-lo", dest="window_lo", type=float, default=S)
    common.add_argument("--window-hi", dest="window_hi", type=float, default=S)
    common.add_argument("--oversample", type=int, default=S)
    common.add_argument("--out", default=S)
    common.add_argument("--no-figures", dest="figures", action="store_false", default=S)

    parser = argparse.ArgumentParser(
        prog="fnls-decay",
        description="Solitary waves of the fractional NLS and their algebraic decay.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("solve", parents=[common], help="compute a profile")
    sub.add_parser("kernel", parents=[common], help="kernels and tail constants")
    sub.add_parser("decay", parents=[common], help="profile plus tail analysis")
    sub.add_parser("invariants", parents=[common],
                   help="conserved quantities of a computed or supplied profile")
    sw = sub.add_parser("sweep", parents=[common], help="decay analysis over s x L")
    sw.add_argument("--s-values", dest="s_values", default=S, help="comma separated")
    sw.add_argument("--L-values", dest="L_values", default=S, help="comma separated")
    sw.add_argument("--workers", type=int, default=S)
    for name in ("invariants",):
        sub.choices[name].add_argument("--profile", default=S,
                                       help="profile.csv to analyse instead of solving")
    return parser


def _load_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    out = {}
    for k, v in data.items():
        key = k.replace("-", "_")
        if key not in DEFAULTS and key != "subcommand":
            raise ConfigError(f"unknown config key {k!r}")
        out[key] = v
    return out


def config_from_args(argv=None) -> RunConfig:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        raise ConfigError("could not parse command line") from exc
    flags = vars(ns)
    merged = dict(DEFAULTS)
    if flags.get("config"):
        merged.update(_load_file(flags["config"]))
    merged.update({k: v for k, v in flags.items() if k in DEFAULTS})
    return make_run_config(flags["subcommand"], merged)


def make_run_config(subcommand: str, opts: dict) -> RunConfig:
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    o = dict(DEFAULTS)
    o.update(opts)
    params = ModelParams(s=float(o["s"]), sigma=float(o["sigma"]), lambda1=float(o["lambda1"]),
                         lambda2=float(o["lambda2"]), classical=bool(o["classical"]))
    L = o["L"]
    if L is None:
        L = 512.0 if subcommand == "kernel" else 256.0
    L = float(L)
    N = int(o["N"]) if o["N"] is not None else default_N(L)
    try:
        solver = SolverConfig(alpha=o["alpha"], tol_inc=float(o["tol_inc"]),
                              tol_res=float(o["tol_res"]), tol_m=float(o["tol_m"]),
                              max_iter=int(o["max_iter"]), extrapolation=o["extrapolation"],
                              cycle_width=int(o["cycle_width"]), dealias=bool(o["dealias"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    seed = {"kind": o["seed"], "phase": o["phase"], "A": o["phase_slope"],
            "amplitude": float(o["amplitude"]), "width": float(o["width"])}
    window = None
    if o["window_lo"] is not None or o["window_hi"] is not None:
        lo = o["window_lo"] if o["window_lo"] is not None else 0.1 * L
        hi = o["window_hi"] if o["window_hi"] is not None else 0.4 * L
        window = (float(lo), float(hi))
    return RunConfig(
        subcommand=subcommand, params=params, L=L, N=N, solver=solver, seed=seed,
        window=window, output_dir=Path(o["out"]), oversample=int(o["oversample"]),
        figures=bool(o["figures"]), s_values=_float_list(o["s_values"]),
        L_values=_float_list(o["L_values"]), workers=int(o["workers"]),
        profile=o["profile"],
    )


# -- pipelines ------------------------------------------------------------

def _solve(cfg: RunConfig, params: ModelParams):
    try:
        grid = make_grid(cfg.L, cfg.N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    A = cfg.seed["A"]
    if A is None:
        A = default_phase_slope(params)
    guess = initial_guess(grid, kind=cfg.seed["kind"], amplitude=cfg.seed["amplitude"],
                          width=cfg.seed["width"], phase=cfg.seed["phase"], A=A)
    try:
        z, trace = solve_profile(params, grid, cfg.solver, guess)
    except (ConvergenceError, DivergenceError, CollapseError) as exc:
        if exc.trace is not None:
            cfg.output_dir.mkdir(parents=True, exist_ok=True)
            exc.trace.write_csv(cfg.output_dir / "trace.csv")
        raise
    return grid, z, trace


def _solve_summary(cfg, params, grid, z, trace):
    pad = cfg.solver.pad_for(params.sigma)
    res_l2, res_sup = profile_residual(params, grid, z, pad=pad)
    I1, I2, H = invariants(grid, params.s, params.sigma, z)
    out = {
        "subcommand": cfg.subcommand,
        "params": {"s": params.s, "sigma": params.sigma, "lambda1": params.lambda1,
                   "lambda2": params.lambda2, "classical": params.classical},
        "grid": {"L": grid.L, "N": grid.N, "h": grid.h},
        "solver": {"extrapolation": cfg.solver.extrapolation,
                   "alpha": cfg.solver.alpha_for(params.sigma),
                   "dealias_factor": pad, "seed": cfg.seed},
        "iterations": len(trace),
        "converged": trace.converged,
        "m": trace.last.m_nu,
        "residual": trace.last.residual,
        "increment": trace.last.increment,
        "res_l2": res_l2, "res_sup": res_sup,
        "I1": I1, "I2": I2, "H": H,
    }
    if params.s == 1.0 and params.lambda2 == 0.0:
        exact = classical_ground_state(params, grid.x)
        out["max_error_closed_form"] = float(abs(z.rho - exact).max())
    return out


def _write_solution(cfg, grid, z, trace):
    d = cfg.output_dir
    report.write_profile(d / "profile.csv", grid, z)
    trace.write_csv(d / "trace.csv")
    if cfg.figures:
        report.plot_trace(d / "trace.png", trace)


def run_solve(cfg: RunConfig, params: ModelParams) -> dict:
    grid, z, trace = _solve(cfg, params)
    _write_solution(cfg, grid, z, trace)
    return _solve_summary(cfg, params, grid, z, trace)


def run_decay(cfg: RunConfig, params: ModelParams) -> dict:
    grid, z, trace = _solve(cfg, params)
    _write_solution(cfg, grid, z, trace)
    summary = _solve_summary(cfg, params, grid, z, trace)
    window = cfg.window or default_window(grid)
    try:
        rep = limit_constants(params, grid, z, window, pad=cfg.solver.pad_for(params.sigma))
    except UnusableWindowError as exc:
        raise ConfigError(str(exc)) from exc
    report.write_decay(cfg.output_dir / "decay.csv", grid, z, params.s)
    summary.update({k: v for k, v in rep.as_dict().items()})
    if cfg.figures:
        report.plot_decay(cfg.output_dir / "decay.png", [(f"L={grid.L:g}", grid, z)], params.s,
                          title=f"s={params.s:g}, lambda2={params.lambda2:g}")
    return summary


def run_kernel(cfg: RunConfig, params: ModelParams) -> dict:
    Le = cfg.L
    samples = eval_kernels(params, L_eval=Le, M=default_N(Le) // 2, oversample=cfg.oversample)
    report.write_kernels(cfg.output_dir / "kernels.csv", samples, params.s)
    window = cfg.window or (0.1 * Le, 0.5 * Le)
    tail = kernel_tail_report(samples, params, window)
    if cfg.figures:
        report.plot_kernels(cfg.output_dir / "kernels.png", samples, params.s)
    return {
        "subcommand": "kernel",
        "params": {"s": params.s, "sigma": params.sigma, "lambda1": params.lambda1,
                   "lambda2": params.lambda2},
        "K1": samples.K1, "K2": samples.K2,
        "L_eval": samples.L_eval, "oversample": samples.oversample_factor,
        "window": list(tail.window),
        "median_dev_k11": tail.median_dev_k11, "median_dev_k12": tail.median_dev_k12,
        "k12_deviation_absolute": tail.absolute_k12,
    }


def run_invariants(cfg: RunConfig, params: ModelParams) -> dict:
    if cfg.profile:
        try:
            tab = report.read_table(cfg.profile)
        except (OSError, KeyError, IndexError) as exc:
            raise ConfigError(f"cannot read profile {cfg.profile}: {exc}") from exc
        x = tab["x"]
        N = len(x)
        L = -float(x[0])
        grid = make_grid(L, N)
        z = ProfilePair(tab["v"], tab["w"])
        pad = cfg.solver.pad_for(params.sigma)
        res_l2, res_sup = profile_residual(params, grid, z, pad=pad)
        I1, I2, H = invariants(grid, params.s, params.sigma, z)
        return {"subcommand": "invariants", "source": str(cfg.profile),
                "I1": I1, "I2": I2, "H": H, "res_l2": res_l2, "res_sup": res_sup}
    return run_solve(cfg, params)


def run(cfg: RunConfig) -> dict:
    """Execute one subcommand and write its artifacts; returns the summary."""
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    if cfg.subcommand == "sweep":
        rows = sweep(cfg, cfg.s_values, cfg.L_values)
        return {"subcommand": "sweep", "rows": rows}
    try:
        params = validate(cfg.params)
    except AdmissibilityError as exc:
        raise ConfigError(str(exc)) from exc
    handler = {"solve": run_solve, "decay": run_decay, "kernel": run_kernel,
               "invariants": run_invariants}[cfg.subcommand]
    summary = handler(cfg, params)
    report.write_summary(cfg.output_dir / "summary.json", summary)
    report.write_gnuplot(cfg.output_dir, params.s)
    return summary


def _sweep_row(job):
    cfg, s, L = job
    row = {"s": s, "L": L, "N": None, "status": "ok"}
    try:
        params = replace(cfg.params, s=s)
        sub = replace(cfg, subcommand="decay", params=params, L=L, N=default_N(L),
                      output_dir=cfg.output_dir / f"s{s:g}_L{L:g}", window=None)
        row["N"] = sub.N
        summary = run(sub)
        for k in ("slope", "slope_expected", "slope_stderr", "limit_v", "predicted_v",
                  "limit_w", "predicted_w", "C_bound", "iterations", "res_l2"):
            row[k] = summary[k]
    except Exception as exc:  # one bad row must not sink the sweep
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


SWEEP_COLUMNS = ["s", "L", "N", "status", "slope", "slope_expected", "slope_stderr",
                 "limit_v", "predicted_v", "limit_w", "predicted_w", "C_bound",
                 "iterations", "res_l2"]


def sweep(base: RunConfig, s_values, L_values) -> list:
    """Decay analysis for every (s, L); failures are recorded per row."""
    base.output_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(base, float(s), float(L)) for s in s_values for L in L_values]
    if base.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=base.workers) as ex:
            rows = list(ex.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    cols = [[r.get(c, "") if r.get(c) is not None else "" for r in rows] for c in SWEEP_COLUMNS]
    with open(base.output_dir / "sweep.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SWEEP_COLUMNS)
        for i in range(len(rows)):
            wr.writerow([c[i] if isinstance(c[i], str) else report._fmt(c[i]) for c in cols])
    report.write_summary(base.output_dir / "summary.json", {"subcommand": "sweep", "rows": rows})
    if base.figures:
        _sweep_figures(base, rows)
    if rows and all(r["status"] != "ok" for r in rows):
        raise SweepFailed("every sweep row failed")
    return rows


class SweepFailed(RuntimeError):
    pass


def _sweep_figures(base, rows):
    by_s = {}
    for r in rows:
        if r["status"] == "ok":
            by_s.setdefault(r["s"], []).append(r["L"])
    for s, Ls in by_s.items():
        curves = []
        for L in sorted(Ls):
            tab = report.read_table(base.output_dir / f"s{s:g}_L{L:g}" / "profile.csv")
            g = make_grid(L, len(tab["x"]))
            curves.append((f"L={L:g}", g, ProfilePair(tab["v"], tab["w"])))
        report.plot_decay(base.output_dir / f"decay_s{s:g}.png", curves, s,
                          title=f"s={s:g}, lambda2={base.params.lambda2:g}")


ERROR_CODES = (
    (ConfigError, EXIT_CONFIG),
    (AdmissibilityError, EXIT_CONFIG),
    (ConvergenceError, EXIT_NONCONVERGENCE),
    (DivergenceError, EXIT_DIVERGENCE),
    (CollapseError, EXIT_DIVERGENCE),
    (OSError, EXIT_FILESYSTEM),
)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        summary = run(cfg)
    except Exception as exc:
        code = EXIT_ERROR
        for cls, c in ERROR_CODES:
            if isinstance(exc, cls):
                code = c
                break
        print(json.dumps({"error_class": type(exc).__name__, "exit_code": code,
                          "message": str(exc)}), file=sys.stderr)
        return code
    brief = {k: v for k, v in summary.items() if isinstance(v, (int, float, str))}
    print(json.dumps(report._clean(brief), sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
