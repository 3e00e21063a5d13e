"""Experiment configuration: a YAML file with nested sections, validated up
front, with every default recorded so a run's manifest can replay it.

Sections: experiment (name), model (nonlinearity, covariance, x0, grid
sizes), discretization (dt, horizon or step count, dt_max cap, taming,
noise mode), sampling (paths, seed, workers), output (directory, formats),
params (experiment-specific knobs).  Unknown keys anywhere are rejected by
name; nothing is silently ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from . import nonlinearity as nl_mod
from . import noise as noise_mod
from . import spectral
from .errors import ConfigurationError
from .estimators import FUNCTIONALS
from .integrators import SchemeConfig

EXPERIMENTS = ("simulate", "moment-growth", "weak-order", "ergodic",
               "contraction", "cost-curve", "audit")
FORMATS = ("csv", "json", "gnuplot")

_DEFAULT_EPS = tuple(2.0 ** -k for k in range(4, 21))


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A fully validated run description.

    resolved holds the config with every default filled in; manifests embed
    it, and feeding it back through parsing reproduces this object.
    """

    experiment: str
    scheme: SchemeConfig
    n_paths: int
    workers: int
    out_dir: str
    formats: tuple
    params: dict
    resolved: dict
    notes: tuple  # model warnings to surface in the manifest


def _require_mapping(obj, where: str) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigurationError(f"section '{where}' must be a mapping")
    return obj


def _check_keys(section: str, given: dict, allowed) -> None:
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigurationError(
            f"unknown key(s) {unknown} in section '{section}'; "
            f"allowed: {sorted(allowed)}")


def _as_spec(value, section: str) -> dict:
    """Accept 'name' as shorthand for {name: ...} / {kind: ...}."""
    if isinstance(value, str):
        return {"name": value} if section == "model.nonlinearity" else {"kind": value}
    return dict(_require_mapping(value, section))


def build_nonlinearity(spec) -> nl_mod.Nonlinearity:
    spec = _as_spec(spec, "model.nonlinearity")
    name = spec.pop("name", None)
    if name == "zero":
        _check_keys("model.nonlinearity", spec, ())
        return nl_mod.zero()
    if name == "linear":
        _check_keys("model.nonlinearity", spec, ("c",))
        return nl_mod.linear(float(spec.get("c", 1.0)))
    if name == "dissipative_cubic":
        _check_keys("model.nonlinearity", spec, ("c",))
        return nl_mod.dissipative_cubic(float(spec.get("c", 1.0)))
    if name == "allen_cahn":
        _check_keys("model.nonlinearity", spec, ("a",))
        return nl_mod.allen_cahn(float(spec.get("a", 1.0)))
    if name == "polynomial":
        _check_keys("model.nonlinearity", spec, ("coeffs",))
        if "coeffs" not in spec:
            raise ConfigurationError(
                "model.nonlinearity: polynomial needs a 'coeffs' list")
        return nl_mod.polynomial(spec["coeffs"])
    raise ConfigurationError(
        f"model.nonlinearity: unknown name {name!r}; choose from "
        "zero, linear, dissipative_cubic, allen_cahn, polynomial")


def build_covariance(spec, n_modes: int) -> noise_mod.CovarianceSpec:
    spec = _as_spec(spec, "model.covariance")
    kind = spec.pop("kind", None)
    if kind == "white":
        _check_keys("model.covariance", spec, ())
        return noise_mod.white(n_modes)
    if kind == "power_decay":
        _check_keys("model.covariance", spec, ("decay",))
        if "decay" not in spec:
            raise ConfigurationError(
                "model.covariance: power_decay needs a 'decay' value")
        return noise_mod.power_decay(n_modes, float(spec["decay"]))
    if kind == "explicit":
        _check_keys("model.covariance", spec, ("weights",))
        weights = spec.get("weights")
        if weights is None:
            raise ConfigurationError(
                "model.covariance: explicit needs a 'weights' list")
        cov = noise_mod.explicit_covariance(weights)
        if cov.n_modes != n_modes:
            raise ConfigurationError(
                f"model.covariance: {cov.n_modes} weights given "
                f"but n_modes={n_modes}")
        return cov
    raise ConfigurationError(
        f"model.covariance: unknown kind {kind!r}; choose from "
        "white, power_decay, explicit")


def build_x0(spec, n_modes: int, n_nodes: int) -> spectral.SpectralField:
    spec = _as_spec(spec, "model.x0")
    kind = spec.pop("kind", None)
    if kind == "zero":
        _check_keys("model.x0", spec, ())
        return spectral.zero_field(n_modes)
    if kind == "unit_mode":
        _check_keys("model.x0", spec, ("mode", "amplitude"))
        return spectral.unit_mode(n_modes, int(spec.get("mode", 1)),
                                  float(spec.get("amplitude", 1.0)))
    if kind == "multi_mode":
        _check_keys("model.x0", spec, ("amplitude", "rate"))
        return spectral.multi_mode(n_modes, float(spec.get("amplitude", 1.0)),
                                   float(spec.get("rate", 2.0)))
    if kind == "bump":
        _check_keys("model.x0", spec, ("center", "width", "amplitude"))
        return spectral.bump_profile(
            n_modes, n_nodes, float(spec.get("center", 0.5)),
            float(spec.get("width", 0.1)), float(spec.get("amplitude", 1.0)))
    raise ConfigurationError(
        f"model.x0: unknown kind {kind!r}; choose from "
        "zero, unit_mode, multi_mode, bump")


def _normalize_x0_spec(spec) -> dict:
    spec = _as_spec(spec, "model.x0")
    kind = spec.get("kind")
    defaults = {
        "zero": {},
        "unit_mode": {"mode": 1, "amplitude": 1.0},
        "multi_mode": {"amplitude": 1.0, "rate": 2.0},
        "bump": {"center": 0.5, "width": 0.1, "amplitude": 1.0},
    }
    if kind not in defaults:
        raise ConfigurationError(f"model.x0: unknown kind {kind!r}")
    out = {"kind": kind}
    out.update(defaults[kind])
    out.update(spec)
    return out


_PARAM_KEYS = {
    "simulate": (),
    "moment-growth": ("power", "norm", "checkpoints"),
    "weak-order": ("dt_list", "functional"),
    "ergodic": ("functional", "burn_in"),
    "contraction": ("x0_a", "x0_b"),
    "cost-curve": ("alpha", "regularity", "horizon_power", "eps_list",
                   "horizon_scale", "accuracy_scale"),
    "audit": ("z_lo", "z_hi", "samples"),
}


def _resolve_params(experiment: str, params: dict, disc: dict,
                    model: dict) -> dict:
    _check_keys("params", params, _PARAM_KEYS[experiment])
    out = dict(params)
    if experiment == "moment-growth":
        out.setdefault("power", 2)
        out.setdefault("norm", "l2")
        out.setdefault("checkpoints", [disc["n_steps"] * disc["dt"]])
        out["checkpoints"] = [float(t) for t in out["checkpoints"]]
        if int(out["power"]) < 1:
            raise ConfigurationError(
                f"params.power must be >= 1, got {out['power']}")
        out["power"] = int(out["power"])
        if out["norm"] not in ("l2", "sup"):
            raise ConfigurationError(
                f"params.norm must be 'l2' or 'sup', got {out['norm']!r}")
    elif experiment == "weak-order":
        if "dt_list" not in out:
            raise ConfigurationError("params.dt_list is required for weak-order")
        out["dt_list"] = [float(dt) for dt in out["dt_list"]]
        out.setdefault("functional", "exp_neg_l2sq")
    elif experiment == "ergodic":
        out.setdefault("functional", "l2_squared")
        out.setdefault("burn_in", disc["n_steps"] * disc["dt"] / 5.0)
        out["burn_in"] = float(out["burn_in"])
    elif experiment == "contraction":
        out["x0_a"] = _normalize_x0_spec(out.get("x0_a", model["x0"]))
        out["x0_b"] = _normalize_x0_spec(out.get("x0_b", "zero"))
    elif experiment == "cost-curve":
        if "alpha" not in out:
            raise ConfigurationError("params.alpha is required for cost-curve")
        out["alpha"] = float(out["alpha"])
        out.setdefault("regularity", None)
        out.setdefault("horizon_power", None)
        out["eps_list"] = [float(e) for e in out.get("eps_list", _DEFAULT_EPS)]
        out.setdefault("horizon_scale", 1.0)
        out.setdefault("accuracy_scale", 1.0)
        out["horizon_scale"] = float(out["horizon_scale"])
        out["accuracy_scale"] = float(out["accuracy_scale"])
    elif experiment == "audit":
        out.setdefault("z_lo", -10.0)
        out.setdefault("z_hi", 10.0)
        out.setdefault("samples", 2001)
        out["z_lo"] = float(out["z_lo"])
        out["z_hi"] = float(out["z_hi"])
        out["samples"] = int(out["samples"])
    if experiment in ("weak-order", "ergodic") and \
            out["functional"] not in FUNCTIONALS:
        raise ConfigurationError(
            f"params.functional: unknown name {out['functional']!r}; "
            f"choose from {sorted(FUNCTIONALS)}")
    return out


def parse_config(path: str, overrides: dict | None = None) -> ExperimentConfig:
    """Load, default-fill, and validate a config file.

    overrides maps dotted keys ('sampling.seed', 'sampling.workers',
    'output.directory', 'experiment') to values that win over the file, the
    way command-line flags should.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return resolve_config(_require_mapping(raw, "top level"), overrides)


def resolve_config(raw: dict, overrides: dict | None = None) -> ExperimentConfig:
    raw = dict(raw)
    _check_keys("top level", raw, ("experiment", "model", "discretization",
                                   "sampling", "output", "params"))
    overrides = dict(overrides or {})

    experiment = overrides.pop("experiment", None) or raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(
            f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")

    model = _require_mapping(raw.get("model"), "model")
    _check_keys("model", model, ("nonlinearity", "covariance", "x0",
                                 "n_modes", "n_nodes"))
    if "nonlinearity" not in model:
        raise ConfigurationError("model.nonlinearity is required")
    if "covariance" not in model:
        raise ConfigurationError("model.covariance is required")
    n_modes = int(model.get("n_modes", 64))
    n_nodes = int(model.get("n_nodes", 256))
    nl = build_nonlinearity(model["nonlinearity"])
    cov = build_covariance(model["covariance"], n_modes)
    x0_spec = _normalize_x0_spec(model.get("x0", "unit_mode"))
    x0 = build_x0(x0_spec, n_modes, n_nodes)

    disc = _require_mapping(raw.get("discretization"), "discretization")
    _check_keys("discretization", disc, ("dt", "dt_list", "horizon", "n_steps",
                                         "dt_max", "taming", "noise_mode"))
    dt_max = float(disc.get("dt_max", 0.5))
    taming = bool(disc.get("taming", True))
    noise_mode = str(disc.get("noise_mode", "increment"))
    params_raw = dict(_require_mapping(raw.get("params"), "params"))
    if "dt_list" in disc:
        if experiment != "weak-order":
            raise ConfigurationError(
                "discretization.dt_list only applies to the weak-order experiment")
        if "dt_list" in params_raw:
            raise ConfigurationError(
                "dt_list given in both discretization and params; pick one")
        params_raw["dt_list"] = disc["dt_list"]
    if experiment == "weak-order":
        # dt comes from the level list; the base dt is the coarsest level
        if "horizon" not in disc:
            raise ConfigurationError(
                "discretization.horizon is required for weak-order")
        horizon = float(disc["horizon"])
        if "dt_list" not in params_raw:
            raise ConfigurationError("params.dt_list is required for weak-order")
        dt = max(float(v) for v in params_raw["dt_list"])
        n_steps = round(horizon / dt)
    else:
        dt = float(disc.get("dt", 0.1))
        if "horizon" in disc and "n_steps" in disc:
            raise ConfigurationError(
                "give discretization.horizon or discretization.n_steps, not both")
        if "horizon" in disc:
            horizon = float(disc["horizon"])
            n_steps = round(horizon / dt)
            if n_steps < 1 or abs(n_steps * dt - horizon) > 1e-9 * horizon:
                raise ConfigurationError(
                    f"discretization.dt={dt} does not divide "
                    f"horizon={horizon} into whole steps")
        else:
            n_steps = int(disc.get("n_steps", 100))
    if not 0 < dt <= dt_max:
        raise ConfigurationError(
            f"discretization.dt={dt} must be in (0, dt_max={dt_max}]")

    sampling = _require_mapping(raw.get("sampling"), "sampling")
    _check_keys("sampling", sampling, ("n_paths", "seed", "workers"))
    n_paths = int(overrides.pop("sampling.n_paths", sampling.get("n_paths", 100)))
    seed = int(overrides.pop("sampling.seed", sampling.get("seed", 0)))
    workers = int(overrides.pop("sampling.workers", sampling.get("workers", 1)))
    if n_paths < 1:
        raise ConfigurationError(f"sampling.n_paths must be >= 1, got {n_paths}")
    if workers < 1:
        raise ConfigurationError(f"sampling.workers must be >= 1, got {workers}")

    output = _require_mapping(raw.get("output"), "output")
    _check_keys("output", output, ("directory", "formats"))
    out_dir = str(overrides.pop("output.directory",
                                output.get("directory", "out")))
    formats = tuple(output.get("formats", list(FORMATS)))
    for fmt in formats:
        if fmt not in FORMATS:
            raise ConfigurationError(
                f"output.formats: unknown format {fmt!r}; allowed: {FORMATS}")
    if overrides:
        raise ConfigurationError(f"unknown override(s): {sorted(overrides)}")

    disc_resolved = {"dt": dt, "n_steps": n_steps, "dt_max": dt_max,
                     "taming": taming, "noise_mode": noise_mode}
    if experiment in ("weak-order", "ergodic"):
        if "horizon" not in disc:
            raise ConfigurationError(
                f"discretization.horizon is required for {experiment}")
        disc_resolved["horizon"] = float(disc["horizon"])

    # serialized form: one of n_steps/horizon, so a manifest replays cleanly
    disc_out = {"dt_max": dt_max, "taming": taming, "noise_mode": noise_mode}
    if experiment == "weak-order":
        disc_out["horizon"] = disc_resolved["horizon"]
    elif "horizon" in disc:
        disc_out["dt"] = dt
        disc_out["horizon"] = float(disc["horizon"])
    else:
        disc_out["dt"] = dt
        disc_out["n_steps"] = n_steps

    params = _resolve_params(experiment, params_raw, disc_resolved,
                             {"x0": x0_spec})

    scheme = SchemeConfig(n_modes=n_modes, n_nodes=n_nodes, dt=dt,
                          n_steps=n_steps, cov=cov, nl=nl, x0=x0, seed=seed,
                          taming=taming, dt_max=dt_max, noise_mode=noise_mode)

    cov_spec = _as_spec(model["covariance"], "model.covariance")
    nl_spec = _as_spec(model["nonlinearity"], "model.nonlinearity")
    resolved = {
        "experiment": experiment,
        "model": {"nonlinearity": nl_spec, "covariance": cov_spec,
                  "x0": x0_spec, "n_modes": n_modes, "n_nodes": n_nodes},
        "discretization": disc_out,
        "sampling": {"n_paths": n_paths, "seed": seed, "workers": workers},
        "output": {"directory": out_dir, "formats": list(formats)},
        "params": params,
    }
    notes = (f"nonlinearity {nl.name}: {nl.note}",) if nl.note else ()
    return ExperimentConfig(experiment=experiment, scheme=scheme,
                            n_paths=n_paths, workers=workers, out_dir=out_dir,
                            formats=formats, params=params, resolved=resolved,
                            notes=notes)
