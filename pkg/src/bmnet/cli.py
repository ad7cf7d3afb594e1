"""Command-line driver: simulate, evolve, theta, convergence, reproduce.

Every command is a deterministic function of (config, seed): reruns
produce byte-identical outputs.  CSV files use full-precision floats and
``\\n`` line endings; JSON files use UTF-8 with sorted keys.  Output
files are written atomically (temp then rename).  Exit codes: 0 success,
2 config or usage error, 3 runtime numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import engine
from .config import ExperimentConfig, config_to_text, load_config, parse_config_text
from .distributions import stationary_giga, theta_of_gamma
from .engine import simulate, strong_convergence_study
from .errors import ConfigError, DegenerateSampleError, PositivityError
from .fitting import FitReport
from .gof import GofReport, ks_pvalue_bootstrap

_DEFAULT_SIGMA2 = 0.05
_DEFAULT_J = 0.1
_DEFAULT_CONVERGENCE_DTS = [2.0 ** -k for k in range(4, 10)]

EVOLUTION_HEADER = ("t,family,alpha,beta,gamma,mu,s,gamma_hat,"
                    "alpha_gamma_hat,loglik,ks_stat,p_value,converged")


def _fmt(x) -> str:
    """Full-precision decimal text for a float; empty for missing."""
    if x is None:
        return ""
    return repr(float(x))


def _write_atomic(path, data: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_json(path, obj) -> None:
    _write_atomic(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_snapshot_csv(path, snapshot) -> None:
    """One row per agent: t,agent,w."""
    lines = ["t,agent,w"]
    t_txt = _fmt(snapshot.t)
    lines.extend(f"{t_txt},{i},{_fmt(w)}" for i, w in enumerate(snapshot.w))
    _write_atomic(path, "\n".join(lines) + "\n")


@dataclass(frozen=True)
class EvolutionRecord:
    """One (time, family) fitting outcome for the evolution table."""

    t: float
    family: str
    fit: FitReport | None
    gof: GofReport | None
    error: str = ""

    def to_row(self) -> str:
        alpha = beta = gamma = mu = s = None
        if self.fit is not None:
            p = self.fit.params
            if hasattr(p, "alpha"):
                alpha, beta, gamma = p.alpha, p.beta, p.gamma
            else:
                mu, s = p.mu, p.s
        cells = [
            _fmt(self.t), self.family, _fmt(alpha), _fmt(beta), _fmt(gamma),
            _fmt(mu), _fmt(s),
            _fmt(self.fit.gamma_hat if self.fit else None),
            _fmt(self.fit.alpha_gamma if self.fit else None),
            _fmt(self.fit.loglik if self.fit else None),
            _fmt(self.gof.ks_stat if self.gof else None),
            _fmt(self.gof.p_value if self.gof else None),
            "true" if (self.fit is not None and self.fit.converged) else "false",
        ]
        return ",".join(cells)


def evolution_records(config: ExperimentConfig, snapshots) -> list:
    """Fit and bootstrap every configured family at every fit time."""
    by_time = {}
    for snap in snapshots:
        by_time.setdefault(snap.t, snap)
    records = []
    for ti, t in enumerate(config.fit_times):
        samples = by_time[t].w
        for fi, family in enumerate(config.families):
            gof_seed = int(np.random.SeedSequence(
                [config.sim.seed, 7919, ti, fi]).generate_state(1)[0])
            try:
                gof = ks_pvalue_bootstrap(samples, family,
                                          config.bootstrap_b, gof_seed)
                records.append(EvolutionRecord(t=t, family=family,
                                               fit=gof.fit, gof=gof))
            except (DegenerateSampleError, ValueError) as exc:
                records.append(EvolutionRecord(t=t, family=family, fit=None,
                                               gof=None, error=str(exc)))
    return records


def write_evolution_csv(path, records) -> None:
    lines = [EVOLUTION_HEADER]
    lines.extend(r.to_row() for r in records)
    _write_atomic(path, "\n".join(lines) + "\n")


def write_histogram_csv(path, samples, n_bins: int = 50) -> None:
    """Log-spaced histogram with the bin edges recorded in the file."""
    x = np.asarray(samples, dtype=float)
    lo, hi = x.min() * 0.999, x.max() * 1.001
    edges = np.geomspace(lo, hi, n_bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    density = counts / (x.size * np.diff(edges))
    lines = ["bin_left,bin_right,count,density"]
    for k in range(n_bins):
        lines.append(f"{_fmt(edges[k])},{_fmt(edges[k + 1])},"
                     f"{counts[k]},{_fmt(density[k])}")
    _write_atomic(path, "\n".join(lines) + "\n")


def _snapshot_filename(t: float) -> str:
    return f"snapshot_t{_fmt(t)}.csv"


def _manifest(command: str, config: ExperimentConfig, outputs) -> dict:
    return {"command": command, "config": config.sections,
            "config_text": config_to_text(config), "outputs": sorted(outputs)}


def cmd_simulate(config_path, seed=None, out_dir=".") -> int:
    """Run one simulation; write one CSV per snapshot plus a manifest."""
    config = load_config(config_path, seed_override=seed)
    os.makedirs(out_dir, exist_ok=True)
    try:
        snapshots = simulate(config.sim)
    except PositivityError as err:
        for snap in err.snapshots:
            write_snapshot_csv(
                os.path.join(out_dir, _snapshot_filename(snap.t)), snap)
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    outputs = []
    for snap in snapshots:
        name = _snapshot_filename(snap.t)
        write_snapshot_csv(os.path.join(out_dir, name), snap)
        outputs.append(name)
    _write_json(os.path.join(out_dir, "manifest.json"),
                _manifest("simulate", config, outputs))
    return 0


def cmd_evolve(config_path, seed=None, out_dir=".") -> int:
    """Fit the configured families at each fit time; write evolution.csv."""
    config = load_config(config_path, seed_override=seed)
    if not config.families or not config.fit_times:
        raise ConfigError("evolve needs a [fit] section with families and fit_times")
    os.makedirs(out_dir, exist_ok=True)
    try:
        snapshots = simulate(config.sim)
    except PositivityError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    records = evolution_records(config, snapshots)
    write_evolution_csv(os.path.join(out_dir, "evolution.csv"), records)
    _write_json(os.path.join(out_dir, "manifest.json"),
                _manifest("evolve", config, ["evolution.csv"]))
    return 0


def cmd_theta(J: float = _DEFAULT_J, sigma2: float = _DEFAULT_SIGMA2,
              out_dir: str = ".") -> int:
    """Tabulate (gamma, theta, alpha, beta) on a 101-point grid over (0, 1]."""
    if J <= 0 or sigma2 <= 0:
        raise ConfigError(f"J and sigma2 must be positive, got J={J}, "
                          f"sigma2={sigma2}")
    os.makedirs(out_dir, exist_ok=True)
    lines = ["gamma,theta,alpha,beta"]
    for gamma in np.linspace(0.01, 1.0, 101):
        gamma = float(gamma)
        theta = theta_of_gamma(J, sigma2, gamma)
        p = stationary_giga(J, sigma2, gamma)
        lines.append(f"{_fmt(gamma)},{_fmt(theta)},{_fmt(p.alpha)},{_fmt(p.beta)}")
    _write_atomic(os.path.join(out_dir, "theta_table.csv"),
                  "\n".join(lines) + "\n")
    return 0


def cmd_convergence(scheme: str, dts=None, paths: int = 1000, seed: int = 0,
                    out_dir: str = ".") -> int:
    """Strong-order study against the exact uncoupled solution (J = 0)."""
    dts = list(dts) if dts else list(_DEFAULT_CONVERGENCE_DTS)
    if any(d <= 0 for d in dts):
        raise ConfigError(f"step sizes must be positive, got {dts}")
    try:
        result = strong_convergence_study(scheme, dts, paths, seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    os.makedirs(out_dir, exist_ok=True)
    _write_json(os.path.join(out_dir, f"convergence_{scheme}.json"), result)
    print(f"{scheme}: fitted slope {result['fitted_slope']:.3f}")
    return 0


# -- figure reproduction ----------------------------------------------------

FIGURE_DEFAULT_N = 10_000
FIGURE_DEFAULT_DT = 0.01


@dataclass(frozen=True)
class FigureRun:
    """One simulation in a figure-reproduction sweep."""

    label: str
    dynamics_lines: tuple
    scheme: str
    t_end: float
    times: tuple
    mode: str  # "histogram" | "evolution"


_HIST_TIMES = {1: (1.0, 2500.0), 2: (1.0, 500.0)}
_EVOLUTION_TIMES = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 150.0, 200.0,
                    300.0, 500.0)
_LONG_EVOLUTION_TIMES = _EVOLUTION_TIMES + (1000.0, 1500.0, 2500.0)


def build_figure_plan(figure: int) -> list:
    """The per-figure parameter sweeps, with the published parameter sets."""
    if figure == 1:
        return [FigureRun("regn_z0.01", ("kind = ring", "z = 0.01"),
                          engine.TAYLOR15, 2500.0, _HIST_TIMES[1], "histogram")]
    if figure == 2:
        return [FigureRun("rann_p0.003", ("kind = smallworld", "p_sw = 0.003"),
                          engine.MILSTEIN, 500.0, _HIST_TIMES[2], "histogram")]
    if figure == 3:
        return [FigureRun(f"regn_z{z:g}", ("kind = ring", f"z = {z!r}"),
                          engine.TAYLOR15, 2500.0, _LONG_EVOLUTION_TIMES,
                          "evolution")
                for z in (0.1, 0.01, 0.003)]
    if figure == 4:
        return [FigureRun(f"rann_p{p:g}", ("kind = smallworld", f"p_sw = {p!r}"),
                          engine.MILSTEIN, 500.0, _EVOLUTION_TIMES, "evolution")
                for p in (0.1, 0.003, 0.002, 0.001)]
    if figure == 5:
        return [FigureRun(f"eft_g{g:g}", ("kind = eft", f"gamma_eft = {g!r}"),
                          engine.MILSTEIN, 500.0, _EVOLUTION_TIMES, "evolution")
                for g in (0.8, 0.6, 0.5, 0.4)]
    raise ConfigError(f"unknown figure id {figure}; expected 1-5")


def _figure_config(run: FigureRun, N: int, dt: float, bootstrap_b: int,
                   seed: int, t_end=None, times=None) -> ExperimentConfig:
    t_end = t_end if t_end is not None else run.t_end
    times = tuple(times) if times is not None else tuple(
        t for t in run.times if t <= t_end)
    times_txt = ", ".join(repr(t) for t in times)
    text = "\n".join([
        "[model]",
        f"sigma2 = {_DEFAULT_SIGMA2!r}",
        f"J = {_DEFAULT_J!r}",
        "[dynamics]",
        *run.dynamics_lines,
        "[run]",
        f"N = {N}",
        f"dt = {dt!r}",
        f"t_end = {t_end!r}",
        f"snapshot_times = {times_txt}",
        f"scheme = {run.scheme}",
        "init = ones",
        f"seed = {seed}",
        "[fit]",
        "families = LN, IGa, GIGa",
        f"fit_times = {times_txt}",
        f"bootstrap_B = {bootstrap_b}",
    ])
    return parse_config_text(text, origin=f"<figure:{run.label}>")


def cmd_reproduce(figure: int, out_dir: str = ".", N: int = FIGURE_DEFAULT_N,
                  dt: float = FIGURE_DEFAULT_DT, bootstrap_b: int = 99,
                  seed: int = 0, t_end=None, times=None) -> int:
    """Re-run the published parameter sets and emit plot-ready tables.

    Figures 1-2 produce per-time histogram CSVs and a goodness-of-fit
    JSON; figures 3-5 produce one evolution CSV per parameter value.
    One realization per parameter set.
    """
    plan = build_figure_plan(figure)
    fig_dir = os.path.join(out_dir, f"fig{figure}")
    os.makedirs(fig_dir, exist_ok=True)
    outputs = []
    last_config = None
    for run in plan:
        config = _figure_config(run, N, dt, bootstrap_b, seed, t_end, times)
        last_config = config
        try:
            snapshots = simulate(config.sim)
        except PositivityError as err:
            print(f"numerical failure in {run.label}: {err}", file=sys.stderr)
            return 3
        records = evolution_records(config, snapshots)
        if run.mode == "histogram":
            for snap in snapshots:
                name = f"hist_{run.label}_t{_fmt(snap.t)}.csv"
                write_histogram_csv(os.path.join(fig_dir, name), snap.w)
                outputs.append(name)
            gof_name = f"gof_{run.label}.json"
            _write_json(os.path.join(fig_dir, gof_name),
                        {"runs": [
                            {"t": r.t, **(r.gof.to_json_dict() if r.gof else
                                          {"family": r.family, "error": r.error})}
                            for r in records]})
            outputs.append(gof_name)
        name = f"evolution_{run.label}.csv"
        write_evolution_csv(os.path.join(fig_dir, name), records)
        outputs.append(name)
    _write_json(os.path.join(fig_dir, "manifest.json"),
                _manifest(f"reproduce-{figure}", last_config, outputs))
    return 0


# -- argument parsing -------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmnet",
        description="Wealth-dynamics ensemble simulator and distribution fitter")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one ensemble, dump snapshots")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", default=".")

    p_evo = sub.add_parser("evolve", help="track fitted parameters over time")
    p_evo.add_argument("--config", required=True)
    p_evo.add_argument("--seed", type=int, default=None)
    p_evo.add_argument("--out", default=".")

    p_theta = sub.add_parser("theta", help="tabulate theta(gamma) and the "
                             "stationary parameters")
    p_theta.add_argument("--config", default=None,
                         help="optional config supplying [model] sigma2 and J")
    p_theta.add_argument("--J", type=float, default=None)
    p_theta.add_argument("--sigma2", type=float, default=None)
    p_theta.add_argument("--out", default=".")

    p_conv = sub.add_parser("convergence", help="strong-order study at J=0")
    p_conv.add_argument("--scheme", choices=list(engine.SCHEMES), required=True)
    p_conv.add_argument("--dts", default=None,
                        help="comma-separated step sizes (default 2^-4..2^-9)")
    p_conv.add_argument("--paths", type=int, default=1000)
    p_conv.add_argument("--seed", type=int, default=0)
    p_conv.add_argument("--out", default=".")

    p_rep = sub.add_parser("reproduce", help="rerun the published figures")
    p_rep.add_argument("figure", type=int, choices=[1, 2, 3, 4, 5])
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--out", default=".")
    p_rep.add_argument("--N", type=int, default=FIGURE_DEFAULT_N)
    p_rep.add_argument("--dt", type=float, default=FIGURE_DEFAULT_DT)
    p_rep.add_argument("--bootstrap", type=int, default=99)
    p_rep.add_argument("--t-end", type=float, default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, seed=args.seed, out_dir=args.out)
        if args.command == "evolve":
            return cmd_evolve(args.config, seed=args.seed, out_dir=args.out)
        if args.command == "theta":
            J, sigma2 = args.J, args.sigma2
            if args.config is not None:
                config = load_config(args.config)
                J = J if J is not None else config.sim.params.J
                sigma2 = sigma2 if sigma2 is not None else config.sim.params.sigma2
            return cmd_theta(J=J if J is not None else _DEFAULT_J,
                             sigma2=sigma2 if sigma2 is not None else _DEFAULT_SIGMA2,
                             out_dir=args.out)
        if args.command == "convergence":
            dts = ([float(v) for v in args.dts.split(",")]
                   if args.dts else None)
            return cmd_convergence(args.scheme, dts=dts, paths=args.paths,
                                   seed=args.seed, out_dir=args.out)
        if args.command == "reproduce":
            return cmd_reproduce(args.figure, out_dir=args.out, N=args.N,
                                 dt=args.dt, bootstrap_b=args.bootstrap,
                                 seed=args.seed, t_end=args.t_end)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PositivityError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
