"""Command-line entry point.

Subcommands: ``tune``, ``forecast``, ``evaluate``, ``irf``, ``coherence``.
All settings live in a JSON config file; only ``--seed`` and ``--out`` can
override it (auditability).  Outputs are deterministic functions of (config,
input files, seed).  Exit codes: 0 success, 2 config error, 3 data error,
4 numerical failure; failures emit a machine-readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import _plots
from ._io import write_csv, write_json
from .comparison import (
    absolute_scaled_error,
    default_theta_grid,
    dm_multivariate,
    gw_unconditional,
    mcb,
    murphy_diff,
)
from .errors import BvarxError, ConfigError, DataError
from .forecast import SupportBounds, forecast_pipeline
from .local_projections import LpConfig, fit_nl_lp, irf_surface, select_lags_bic
from .metrics import metric_table
from .model import SzHyper, build_design, build_prior, posterior_update
from .panel import Panel, future_exog, load_panel, transform
from .tuning import GridSpec, grid_search
from .wavelet import significance

_HYPER_COLS = ("p", "lambda0", "lambda1", "lambda3", "lambda4", "lambda5", "mu5", "mu6")


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _section(cfg: dict, name: str) -> dict:
    if name not in cfg:
        raise ConfigError(f"config missing required section {name!r}")
    sec = cfg[name]
    if not isinstance(sec, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    return sec


def _build_panel(cfg: dict) -> Panel:
    data = _section(cfg, "data")
    if "paths" not in data or "schema" not in data:
        raise ConfigError("data section needs 'paths' and 'schema'")
    panel = load_panel(data["paths"], data["schema"])
    for col, op in data.get("transforms", []):
        panel = transform(panel, col, op)
    return panel


def _seed(cfg: dict, args) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        raise ConfigError("a seed is mandatory: set 'seed' in the config or pass --seed")
    if int(seed) != seed:
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    return int(seed)


def _out_dir(cfg: dict, args) -> str:
    out = args.out if args.out is not None else cfg.get("out", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _hyper_from_dict(d: dict) -> SzHyper:
    try:
        return SzHyper(**{k: d[k] for k in _HYPER_COLS})
    except KeyError as exc:
        raise ConfigError(f"hyper tuple missing field {exc.args[0]!r}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_tune(cfg: dict, out: str, seed: int) -> None:
    panel = _build_panel(cfg)
    sec = _section(cfg, "tune")
    if "horizon" not in sec:
        raise ConfigError("tune section needs 'horizon'")
    grid_cfg = sec.get("grid", {})
    if not isinstance(grid_cfg, dict):
        raise ConfigError("'grid' must be an object of per-dimension value lists")
    for dim, values in grid_cfg.items():
        if dim not in _HYPER_COLS:
            raise ConfigError(f"unknown grid dimension {dim!r}")
        if not values:
            raise ConfigError(f"grid dimension {dim!r} is empty")
    kwargs = {dim: tuple(vals) for dim, vals in grid_cfg.items()}
    grid = GridSpec(horizon=int(sec["horizon"]),
                    window=int(sec.get("window", 24)), **kwargs)
    result = grid_search(panel, grid, workers=int(cfg.get("workers", 1)))

    write_csv(
        os.path.join(out, "leaderboard.csv"),
        _HYPER_COLS + ("mrmse",),
        result.to_rows(),
    )
    write_json(os.path.join(out, "winner.json"), {
        "hyper": result.best.to_dict(),
        "score": result.score,
        "horizon": grid.horizon,
        "window": grid.window,
        "seed": seed,
    })


def _resolve_hyper(sec: dict) -> SzHyper:
    if "hyper" in sec:
        return _hyper_from_dict(sec["hyper"])
    if "winner" in sec:
        try:
            with open(sec["winner"]) as fh:
                return _hyper_from_dict(json.load(fh)["hyper"])
        except FileNotFoundError as exc:
            raise ConfigError(f"winner file not found: {sec['winner']}") from exc
        except (json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"winner file malformed: {exc}") from exc
    raise ConfigError("forecast section needs 'hyper' (inline tuple) or 'winner' (path)")


def cmd_forecast(cfg: dict, out: str, seed: int) -> None:
    panel = _build_panel(cfg)
    sec = _section(cfg, "forecast")
    if "horizon" not in sec:
        raise ConfigError("forecast section needs 'horizon'")
    H = int(sec["horizon"])
    hyper = _resolve_hyper(sec)
    train_end = int(sec.get("train_end", panel.T))
    if not 1 <= train_end <= panel.T:
        raise DataError(f"train_end={train_end} outside 1..{panel.T}")
    train = panel.rows(0, train_end)

    rng = np.random.default_rng(seed)
    design = build_design(train, hyper.p)
    prior = build_prior(train, hyper)
    post = posterior_update(prior, design)
    exog = future_exog(train, H) if train.k else None
    bounds = SupportBounds.from_mapping(sec.get("bounds", {}), train.endog_names)
    dist = forecast_pipeline(
        train, post, exog, H, rng,
        S=int(sec.get("draws", 1000)),
        gamma=float(sec.get("gamma", 0.50)),
        bounds=bounds,
        point_method=sec.get("point_method", "deterministic"),
        min_stable_frac=float(sec.get("min_stable_frac", 0.5)),
    )

    write_csv(
        os.path.join(out, "point.csv"),
        ("horizon",) + tuple(dist.names),
        [[h + 1] + [float(v) for v in dist.point[h]] for h in range(H)],
    )
    rows = []
    for j, name in enumerate(dist.names):
        for h in range(H):
            rows.append([
                name, h + 1,
                float(dist.lower[h, j]), float(dist.upper[h, j]),
                dist.gamma, float(dist.gamma_eff[h, j]), float(dist.rho[h, j]),
            ])
    write_csv(
        os.path.join(out, "intervals.csv"),
        ("variable", "horizon", "L", "U", "gamma", "gamma_eff", "rho"),
        rows,
    )
    _plots.fan_chart(dist, train.endog, os.path.join(out, "fan.svg"))


def _read_forecast_csv(path: str, names, H: int) -> np.ndarray:
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    except FileNotFoundError as exc:
        raise DataError(f"forecast file not found: {path}") from exc
    header = lines[0].split(",")
    if header != ["horizon"] + list(names):
        raise DataError(
            f"{path}: header {header} does not match expected variables {list(names)}"
        )
    body = lines[1:]
    if len(body) != H:
        raise DataError(f"{path}: expected {H} horizon rows, found {len(body)}")
    path_mat = np.empty((H, len(names)))
    for i, ln in enumerate(body):
        cells = ln.split(",")
        if int(float(cells[0])) != i + 1:
            raise DataError(f"{path}: horizons misaligned at row {i + 1}")
        path_mat[i] = [float(c) for c in cells[1:]]
    return path_mat


def cmd_evaluate(cfg: dict, out: str, seed: int) -> None:
    panel = _build_panel(cfg)
    sec = _section(cfg, "evaluate")
    for key in ("horizon", "train_end", "models"):
        if key not in sec:
            raise ConfigError(f"evaluate section needs {key!r}")
    H = int(sec["horizon"])
    train_end = int(sec["train_end"])
    if train_end + H > panel.T:
        raise DataError(
            f"evaluation window overruns data: train_end={train_end} + H={H} > T={panel.T}"
        )
    models = sec["models"]
    if not isinstance(models, dict) or len(models) < 2:
        raise ConfigError("'models' must map >= 2 model names to forecast files")

    names = panel.endog_names
    actual = panel.endog[train_end: train_end + H]
    insample = panel.endog[:train_end]
    paths = {model: _read_forecast_csv(fp, names, H) for model, fp in models.items()}
    model_names = list(paths)
    m = len(names)

    rows = metric_table(
        actual, paths, insample, names,
        seasonal_period=int(sec.get("seasonal_period", 1)),
        smape_mode=sec.get("smape_mode", "fraction"),
    )
    write_csv(
        os.path.join(out, "metrics.csv"),
        ("model", "variable", "rmse", "smape", "mase", "theil_u1", "mdape"),
        [[r["model"], r["variable"], r["rmse"], r["smape"], r["mase"],
          r["theil_u1"], r["mdape"]] for r in rows],
    )

    # per-time losses: absolute scaled error averaged across variables
    losses = np.empty((H, len(model_names)))
    for c, model in enumerate(model_names):
        ase = np.empty((H, m))
        for j in range(m):
            ase[:, j] = absolute_scaled_error(
                actual[:, j] - paths[model][:, j], insample[:, j],
                seasonal_period=int(sec.get("seasonal_period", 1)),
            )
        losses[:, c] = ase.mean(axis=1)

    dm = dm_multivariate(losses, q=int(sec.get("dm_q", 1)))
    gw = gw_unconditional(losses[:, [0]] - losses[:, 1:])
    tests = {
        "models": model_names,
        "loss": "absolute scaled error, averaged across variables",
        "dm": dm.to_dict(),
        "gw": gw.to_dict(),
    }
    if m >= 2:
        scores = np.array([[r["rmse"] for r in rows if r["variable"] == name]
                           for name in names])
        ranking = mcb(scores, alpha=float(sec.get("alpha_mcb", 0.05)),
                      names=model_names)
        tests["mcb"] = {
            "mean_ranks": {model: float(ranking.mean_ranks[i])
                           for i, model in enumerate(model_names)},
            "cd": ranking.cd,
            "alpha": ranking.alpha,
            "best": model_names[ranking.best],
            "datasets": "per-variable RMSE rows",
        }
    else:
        tests["mcb"] = None
    write_json(os.path.join(out, "tests.json"), tests)

    # Murphy diagram: first two models, series pooled variable-by-variable
    a_name, b_name = model_names[0], model_names[1]
    fA = paths[a_name].ravel(order="F")
    fB = paths[b_name].ravel(order="F")
    y = actual.ravel(order="F")
    murphy_cfg = sec.get("murphy", {})
    grid = default_theta_grid(y, n_points=int(murphy_cfg.get("points", 101)))
    curve = murphy_diff(
        fA, fB, y, grid,
        alpha=float(murphy_cfg.get("alpha", 0.5)),
        conf=float(murphy_cfg.get("conf", 0.90)),
    )
    write_csv(
        os.path.join(out, "murphy.csv"),
        ("theta", "diff", "lo", "hi"),
        [[float(curve.thetas[i]), float(curve.diff[i]),
          float(curve.band_lo[i]), float(curve.band_hi[i])]
         for i in range(curve.thetas.size)],
        comment=f"models: {a_name} minus {b_name}; alpha={curve.alpha_expectile}; "
                f"conf={curve.conf_level}; hac_lag={curve.lag}",
    )


def cmd_irf(cfg: dict, out: str, seed: int) -> None:
    panel = _build_panel(cfg)
    sec = _section(cfg, "irf")
    for key in ("shocks", "switch"):
        if key not in sec:
            raise ConfigError(f"irf section needs {key!r}")
    shock_names = list(sec["shocks"])
    if not shock_names:
        raise ConfigError("need at least one shock series")
    shocks = np.column_stack([panel.column(s) for s in shock_names])
    switch = panel.column(sec["switch"])

    if "p" in sec:
        p = int(sec["p"])
    elif "select_p_max" in sec:
        p = select_lags_bic(panel.endog, int(sec["select_p_max"]))
    else:
        p = 6
    lp_cfg = LpConfig(
        p=p,
        exog_lags=int(sec.get("exog_lags", 4)),
        gamma=float(sec.get("gamma", 3.0)),
        H=int(sec.get("horizon", 24)),
        trend=sec.get("trend", "none"),
        lag_switching=bool(sec.get("lag_switching", True)),
        conf=float(sec.get("conf", 0.95)),
        nw_lag=sec.get("nw_lag"),
    )
    fit = fit_nl_lp(panel.endog, shocks, switch, lp_cfg,
                    var_names=panel.endog_names, shock_names=shock_names)
    surface = irf_surface(fit)

    rows = []
    for i, var in enumerate(surface.var_names):
        for s, shock in enumerate(surface.shock_names):
            for r, regime in enumerate(surface.regimes):
                for h in range(lp_cfg.H + 1):
                    rows.append([
                        var, shock, regime, h,
                        float(surface.responses[i, s, r, h]),
                        float(surface.ci_lo[i, s, r, h]),
                        float(surface.ci_hi[i, s, r, h]),
                    ])
    meta = (f"gamma={lp_cfg.gamma} switch={sec['switch']} p={lp_cfg.p} "
            f"exog_lags={lp_cfg.exog_lags} trend={lp_cfg.trend} "
            f"lag_switching={lp_cfg.lag_switching} conf={lp_cfg.conf} "
            f"mu_c={fit.mu_c!r} sigma_c={fit.sigma_c!r}")
    write_csv(
        os.path.join(out, "irf.csv"),
        ("variable", "shock", "regime", "horizon", "point", "lo", "hi"),
        rows,
        comment=meta,
    )
    _plots.irf_grid(surface, os.path.join(out, "irf.svg"))


def cmd_coherence(cfg: dict, out: str, seed: int) -> None:
    panel = _build_panel(cfg)
    sec = _section(cfg, "coherence")
    for key in ("x", "y"):
        if key not in sec:
            raise ConfigError(f"coherence section needs {key!r}")
    x = panel.column(sec["x"])
    y = panel.column(sec["y"])
    rng = np.random.default_rng(seed)
    cmap = significance(
        x, y,
        B=int(sec.get("B", 1000)),
        rng=rng,
        dt=float(sec.get("dt", 1.0)),
        dj=float(sec.get("dj", 1.0 / 12.0)),
        alpha_fdr=float(sec.get("alpha_fdr", 0.10)),
    )
    reliable = cmap.in_coi
    rows = []
    for si in range(cmap.scales.size):
        for ti in range(cmap.times.size):
            rows.append([
                float(cmap.scales[si]), float(cmap.times[ti]),
                float(cmap.r2[si, ti]), float(cmap.phase[si, ti]),
                float(cmap.pvals[si, ti]), float(cmap.qvals_by[si, ti]),
                bool(cmap.mask_fdr[si, ti]), bool(reliable[si, ti]),
            ])
    write_csv(
        os.path.join(out, "coherence.csv"),
        ("scale", "time", "r2", "phase", "p", "q", "significant", "in_coi"),
        rows,
        comment=f"x={sec['x']} y={sec['y']} omega0={cmap.params['omega0']} "
                f"B={cmap.params['B']} alpha_fdr={cmap.params['alpha_fdr']}",
    )
    _plots.coherence_heatmap(cmap, os.path.join(out, "heatmap.svg"))


_COMMANDS = {
    "tune": cmd_tune,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
    "irf": cmd_irf,
    "coherence": cmd_coherence,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bvarx",
        description="Bayesian VARx forecasting, evaluation, impulse responses "
                    "and wavelet coherence from a JSON config.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None,
                       help="override the config output directory")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        seed = _seed(cfg, args)
        out = _out_dir(cfg, args)
        _COMMANDS[args.command](cfg, out, seed)
    except BvarxError as exc:
        payload = {
            "code": exc.exit_code,
            "module": exc.module,
            "message": str(exc),
        }
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
