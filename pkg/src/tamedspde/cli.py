"""Command-line experiment runner.

    tamedspde <experiment> --config FILE [--seed N] [--workers K] [--out DIR]

Flags override the config file.  Each run writes, under the output
directory: <experiment>.csv (schema-versioned '#' header line, 17
significant digits), <experiment>.json (summary), <experiment>.gp (a ready
gnuplot script over the CSV), a fit.json for rate studies, and
manifest.json embedding the fully resolved configuration and its hash.
CSV bytes depend only on the resolved configuration, never on the worker
count or the wall clock.

Exit codes: 0 success, 2 configuration error, 3 numeric failure (a tamed
trajectory leaving the finite range, reported with step and trajectory).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import EXPERIMENTS, ExperimentConfig, build_x0, parse_config
from .errors import ConfigurationError, TrajectoryOverflow
from .estimators import (FUNCTIONALS, contraction_rate, cost_curve,
                         ergodic_average, estimate_moment, weak_order_study)
from .integrators import simulate
from .noise import classify_regularity
from .nonlinearity import audit_assumptions

_CSV_VERSION = "tamedspde-csv v1"


@dataclass(frozen=True, eq=False)
class RunManifest:
    experiment: str
    version: str
    config_hash: str
    seed: int
    wall_time_s: float
    out_dir: str
    outputs: tuple
    warnings: tuple
    data: dict


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_csv(path: Path, experiment: str, columns, rows) -> None:
    lines = [f"# {_CSV_VERSION} experiment={experiment}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True)
                    + "\n", encoding="utf-8")


_GP_BODY = {
    "simulate": (
        'set xlabel "t"\nset ylabel "L2 norm"\n'
        'plot csv using 2:3 with dots title "paths"\n'),
    "moment-growth": (
        'set xlabel "t"\nset ylabel "moment estimate"\n'
        'plot csv using 1:2:3 with yerrorlines title "moment"\n'),
    "weak-order": (
        'set logscale xy\nset xlabel "dt"\nset ylabel "weak error"\n'
        'plot csv using 1:5 with linespoints title "error vs reference"\n'),
    "ergodic": (
        'set ylabel "estimate"\nset xrange [-0.5:1.5]\n'
        'plot csv using 0:2:3 with yerrorbars title "estimators"\n'),
    "contraction": (
        'set xlabel "path"\nset ylabel "decay rate"\n'
        'plot csv using 1:2 with points title "per-path rate"\n'),
    "cost-curve": (
        'set logscale xy\nset xlabel "eps"\nset ylabel "steps"\n'
        'plot csv using 1:4 with linespoints title "N(eps)"\n'),
    "audit": "# tabular report; nothing to plot\n",
}


def _write_gp(path: Path, experiment: str) -> None:
    header = (f"# gnuplot script for {experiment}.csv\n"
              'set datafile separator ","\n'
              "set key autotitle columnhead\n"
              f'csv = "{experiment}.csv"\n')
    path.write_text(header + _GP_BODY[experiment], encoding="utf-8")


# ---------------------------------------------------------------------------
# experiment dispatch: each returns (columns, rows, summary, extra_files)

def _run_simulate(cfg: ExperimentConfig):
    rows = []
    paths = []
    for i in range(cfg.n_paths):
        rec = simulate(cfg.scheme, trajectory_index=i)
        for t, l2, sup in zip(rec.times, rec.l2_norms, rec.sup_norms):
            rows.append((i, t, l2, sup))
        paths.append({"trajectory": i, "blowup_step": rec.blowup_step,
                      "final_l2": float(rec.l2_norms[-1])})
    n_blown = sum(1 for p in paths if p["blowup_step"] is not None)
    summary = {"paths": paths, "n_paths": cfg.n_paths,
               "blowup_fraction": n_blown / cfg.n_paths}
    return ("path", "t", "l2_norm", "sup_norm"), rows, summary, {}


def _run_moment_growth(cfg: ExperimentConfig):
    p = cfg.params
    study = estimate_moment(cfg.scheme, p["power"], p["norm"],
                            p["checkpoints"], cfg.n_paths, cfg.workers)
    rows = []
    if study.estimates is not None:
        for t, est in zip(study.checkpoints, study.estimates):
            rows.append((t, est.value, est.std_error))
    summary = {"power": study.power, "norm": study.norm,
               "n_paths": study.n_paths,
               "blowup_fraction": study.blowup_fraction,
               "checkpoints": list(study.checkpoints),
               "estimates": None if study.estimates is None else
               [{"t": t, "value": e.value, "std_error": e.std_error}
                for t, e in zip(study.checkpoints, study.estimates)]}
    return ("t", "estimate", "std_error"), rows, summary, {}


def _run_weak_order(cfg: ExperimentConfig):
    p = cfg.params
    study = weak_order_study(cfg.scheme, p["dt_list"],
                             FUNCTIONALS[p["functional"]],
                             cfg.resolved["discretization"]["horizon"],
                             cfg.n_paths, cfg.workers)
    rows = [(lv.dt, lv.n_steps, lv.mean, lv.std_error, lv.error,
             lv.error_std_error, lv.noise_dominated) for lv in study.levels]
    fit = None if study.fit is None else {
        "slope": study.fit.slope, "intercept": study.fit.intercept,
        "r_squared": study.fit.r_squared,
        "n_levels_used": len(study.fit.points)}
    summary = {"functional": study.functional, "horizon": study.horizon,
               "n_paths": study.n_paths,
               "noise_dominated": study.noise_dominated, "fit": fit}
    extra = {"fit.json": {"noise_dominated": study.noise_dominated,
                          "fit": fit}}
    return (("dt", "n_steps", "estimate", "std_error", "error_vs_ref",
             "error_std_error", "noise_dominated"), rows, summary, extra)


def _run_ergodic(cfg: ExperimentConfig):
    p = cfg.params
    study = ergodic_average(cfg.scheme, FUNCTIONALS[p["functional"]],
                            p["burn_in"],
                            cfg.resolved["discretization"]["horizon"],
                            cfg.n_paths, cfg.workers)
    rows = [("ensemble", study.ensemble.value, study.ensemble.std_error,
             study.ensemble.n_samples),
            ("time_average", study.time_average.value,
             study.time_average.std_error, study.time_average.n_samples)]
    summary = {"functional": study.functional, "horizon": study.horizon,
               "burn_in": study.burn_in, "n_paths": study.n_paths,
               "ensemble": {"value": study.ensemble.value,
                            "std_error": study.ensemble.std_error},
               "time_average": {"value": study.time_average.value,
                                "std_error": study.time_average.std_error}}
    return ("estimator", "value", "std_error", "n_samples"), rows, summary, {}


def _run_contraction(cfg: ExperimentConfig):
    p = cfg.params
    scheme = cfg.scheme
    x0_a = build_x0(p["x0_a"], scheme.n_modes, scheme.n_nodes)
    x0_b = build_x0(p["x0_b"], scheme.n_modes, scheme.n_nodes)
    study = contraction_rate(scheme, x0_a, x0_b, cfg.n_paths, cfg.workers)
    rows = [(i, r) for i, r in enumerate(study.per_path_rates)]
    summary = {"rate": study.rate, "ci_low": study.ci_low,
               "ci_high": study.ci_high, "n_paths": study.n_paths,
               "initial_distance": study.initial_distance}
    return ("path", "rate"), rows, summary, {}


def _run_cost_curve(cfg: ExperimentConfig):
    p = cfg.params
    regularity = p["regularity"]
    if regularity is None:
        regularity = classify_regularity(cfg.scheme.cov).exponent
    horizon_power = p["horizon_power"]
    if horizon_power is None:
        g = cfg.scheme.nl.growth_exponent
        horizon_power = int(round(3 * g * g))
    curve = cost_curve(p["alpha"], regularity, horizon_power, p["eps_list"],
                       p["horizon_scale"], p["accuracy_scale"])
    rows = [(pt.eps, pt.horizon, pt.dt, pt.n_steps, pt.bound_product)
            for pt in curve.points]
    products = [pt.bound_product for pt in curve.points]
    summary = {"alpha": curve.alpha, "regularity": curve.regularity,
               "horizon_power": curve.horizon_power,
               "horizon_scale": curve.horizon_scale,
               "accuracy_scale": curve.accuracy_scale,
               "bound_product_min": min(products),
               "bound_product_max": max(products)}
    return (("eps", "horizon", "dt", "n_steps", "bound_product"), rows,
            summary, {})


def _run_audit(cfg: ExperimentConfig):
    p = cfg.params
    nl = cfg.scheme.nl
    report = audit_assumptions(nl, (p["z_lo"], p["z_hi"]), p["samples"])
    try:
        reg = classify_regularity(cfg.scheme.cov)
        reg_dict = {"exponent": reg.exponent, "attained": reg.attained,
                    "trace_class": reg.trace_class}
    except ConfigurationError:
        reg_dict = None
    summary = {"nonlinearity": nl.name, "report": report.as_dict(),
               "declared_sup_fprime": nl.sup_fprime,
               "declared_growth_exponent": nl.growth_exponent,
               "certifies_second_moment": nl.certifies_second_moment,
               "certifies_all_moments": nl.certifies_all_moments,
               "note": nl.note, "noise_regularity": reg_dict}
    rows = [("nonlinearity", nl.name)]
    rows += [(k, v) for k, v in report.as_dict().items()]
    rows += [("certifies_second_moment", nl.certifies_second_moment),
             ("certifies_all_moments", nl.certifies_all_moments)]
    if reg_dict is not None:
        rows += [("noise_regularity_exponent", reg_dict["exponent"]),
                 ("noise_regularity_attained", reg_dict["attained"]),
                 ("noise_trace_class", reg_dict["trace_class"])]
    else:
        rows += [("noise_regularity_exponent", "unclassified")]

    print(f"audit: nonlinearity {nl.name} on "
          f"[{report.z_lo:g}, {report.z_hi:g}] ({report.n_samples} samples)")
    print(f"  sup f' = {report.sup_fprime:.6g}   "
          f"growth exponent fit = {report.growth_exponent_fit:.4g}   "
          f"bound constant = {report.bound_constant:.6g}")
    print(f"  second-moment condition: "
          f"{'ok' if report.second_moment_ok else 'NOT satisfied'}   "
          f"all-moments condition: "
          f"{'ok' if report.all_moments_ok else 'NOT satisfied'}")
    if nl.note:
        print(f"  note: {nl.note}")
    if reg_dict is None:
        print("  noise regularity: unclassified (explicit weights)")
    else:
        print(f"  noise smoothing exponent = {reg_dict['exponent']:g} "
              f"(attained: {reg_dict['attained']}, "
              f"trace class: {reg_dict['trace_class']})")
    return ("key", "value"), rows, summary, {}


_DISPATCH = {
    "simulate": _run_simulate,
    "moment-growth": _run_moment_growth,
    "weak-order": _run_weak_order,
    "ergodic": _run_ergodic,
    "contraction": _run_contraction,
    "cost-curve": _run_cost_curve,
    "audit": _run_audit,
}


def run(cfg: ExperimentConfig) -> RunManifest:
    """Execute one experiment and write its artifacts."""
    started = time.perf_counter()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    columns, rows, summary, extra = _DISPATCH[cfg.experiment](cfg)

    outputs = []
    if "csv" in cfg.formats:
        name = f"{cfg.experiment}.csv"
        _write_csv(out_dir / name, cfg.experiment, columns, rows)
        outputs.append(name)
    if "json" in cfg.formats:
        name = f"{cfg.experiment}.json"
        _write_json(out_dir / name, summary)
        outputs.append(name)
        for name, payload in extra.items():
            _write_json(out_dir / name, payload)
            outputs.append(name)
    if "gnuplot" in cfg.formats:
        name = f"{cfg.experiment}.gp"
        _write_gp(out_dir / name, cfg.experiment)
        outputs.append(name)

    # hash only what determines the output bytes: directory and worker
    # count are excluded, so equal hashes promise equal CSVs
    hashed = {k: v for k, v in cfg.resolved.items() if k != "output"}
    hashed["sampling"] = {k: v for k, v in cfg.resolved["sampling"].items()
                          if k != "workers"}
    config_json = json.dumps(_jsonable(hashed), sort_keys=True)
    manifest = RunManifest(
        experiment=cfg.experiment, version=__version__,
        config_hash=hashlib.sha256(config_json.encode()).hexdigest(),
        seed=cfg.scheme.seed,
        wall_time_s=time.perf_counter() - started,
        out_dir=str(out_dir), outputs=tuple(outputs),
        warnings=cfg.notes, data=summary)
    _write_json(out_dir / "manifest.json", {
        "artifact": "tamedspde", "version": manifest.version,
        "experiment": manifest.experiment,
        "config": cfg.resolved, "config_hash": manifest.config_hash,
        "seed": manifest.seed, "workers": cfg.workers,
        "wall_time_s": manifest.wall_time_s,
        "outputs": list(manifest.outputs),
        "warnings": list(manifest.warnings)})
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tamedspde",
        description="spectral simulator and experiment harness for a tamed "
                    "exponential Euler scheme")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="YAML config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)

    overrides = {"experiment": args.experiment}
    if args.seed is not None:
        overrides["sampling.seed"] = args.seed
    if args.workers is not None:
        overrides["sampling.workers"] = args.workers
    if args.out is not None:
        overrides["output.directory"] = args.out

    try:
        cfg = parse_config(args.config, overrides)
    except (ConfigurationError, OSError, yaml.YAMLError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        manifest = run(cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except TrajectoryOverflow as exc:
        where = []
        if exc.trajectory is not None:
            where.append(f"trajectory {exc.trajectory}")
        if exc.step is not None:
            where.append(f"state {exc.step}")
        suffix = f" ({', '.join(where)})" if where else ""
        print(f"numeric failure: {exc}{suffix}", file=sys.stderr)
        return 3
    for note in manifest.warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(f"{cfg.experiment}: wrote {', '.join(manifest.outputs)} "
          f"in {manifest.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
