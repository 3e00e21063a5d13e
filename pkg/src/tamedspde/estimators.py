"""Monte Carlo experiment drivers: moments, weak order, ergodicity, cost.

The studies here turn batches of simulated paths into the quantities the
experiments report: norm moments along checkpoints, weak-error rate fits
against a common-random-number reference, ensemble and time averages of an
invariant law, synchronous-coupling contraction rates, and the step-count
schedule traded off against accuracy.

Paths are processed in fixed blocks of ``_PATH_BLOCK`` trajectories.  The
block partition depends only on the number of paths, every trajectory's
noise is addressed by its global index, and partial results are reduced in
block order, so the number of worker processes has no effect on any output
byte.  Worker entry points are module-level functions bound with
functools.partial to keep them picklable.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from . import rng
from .errors import ConfigurationError, TrajectoryOverflow
from .integrators import Engine, SchemeConfig
from .noise import increment_scale

_PATH_BLOCK = 1024


# ---------------------------------------------------------------------------
# result containers

@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo mean with its standard error."""

    value: float
    std_error: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigurationError(
                f"n_samples must be >= 1, got {self.n_samples}")
        if self.std_error < 0:
            raise ConfigurationError(
                f"std_error must be >= 0, got {self.std_error}")

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "MCEstimate":
        """Mean and std/sqrt(n); a single sample carries zero spread."""
        values = np.asarray(values, dtype=np.float64)
        n = values.size
        if n < 1:
            raise ConfigurationError("cannot estimate from zero samples")
        se = float(values.std(ddof=1) / math.sqrt(n)) if n >= 2 else 0.0
        return cls(value=float(values.mean()), std_error=se, n_samples=n)


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log error against log dt."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple  # ((log dt, log error), ...)


def fit_rate(dt_values, errors) -> RateFit:
    """Fit error ~ C * dt^slope through at least three positive points."""
    dt_values = np.asarray(dt_values, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if dt_values.shape != errors.shape or dt_values.ndim != 1:
        raise ConfigurationError("dt_values and errors must be matching 1-d arrays")
    if dt_values.size < 3:
        raise ConfigurationError(
            f"rate fit needs >= 3 points, got {dt_values.size}")
    if np.unique(dt_values).size != dt_values.size:
        raise ConfigurationError("dt values must be distinct for a rate fit")
    if np.any(dt_values <= 0) or np.any(errors <= 0):
        raise ConfigurationError("rate fit needs positive dt and error values")
    x = np.log(dt_values)
    y = np.log(errors)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float((resid ** 2).sum()) / ss_tot
    return RateFit(slope=float(slope), intercept=float(intercept),
                   r_squared=r2, points=tuple(zip(x.tolist(), y.tolist())))


@dataclass(frozen=True, eq=False)
class TestFunctional:
    """A scalar statistic of the state, tagged with its smoothness status.

    evaluate acts on coefficient arrays of shape (J,) or (J, B) and returns
    a scalar or (B,).  smooth means twice differentiable with bounded first
    and second derivatives, the hypothesis the weak-rate guarantee needs.
    """

    name: str
    evaluate: callable
    smooth: bool
    note: str = ""


def _phi_exp_neg_l2sq(x):
    return np.exp(-(x * x).sum(axis=0))


def _phi_tanh_mode1(x):
    return np.tanh(x[0])


def _phi_l2sq(x):
    return (x * x).sum(axis=0)


EXP_NEG_L2SQ = TestFunctional(
    name="exp_neg_l2sq", evaluate=_phi_exp_neg_l2sq, smooth=True,
    note="exp(-|x|^2), bounded with bounded derivatives")
BOUNDED_MODE1 = TestFunctional(
    name="bounded_mode1", evaluate=_phi_tanh_mode1, smooth=True,
    note="tanh of the first mode coefficient")
L2_SQUARED = TestFunctional(
    name="l2_squared", evaluate=_phi_l2sq, smooth=False,
    note="squared L2 norm; derivative unbounded, kept for its exact oracles")

FUNCTIONALS = {f.name: f for f in (EXP_NEG_L2SQ, BOUNDED_MODE1, L2_SQUARED)}


def _warn_if_rough(functional: TestFunctional) -> None:
    if not functional.smooth:
        warnings.warn(
            f"functional {functional.name!r} has no certified bounded first "
            "and second derivatives; the weak-rate guarantee does not cover it",
            stacklevel=3)


# ---------------------------------------------------------------------------
# block-parallel path engine

def _map_blocks(block_fn, n_paths: int, workers: int) -> list:
    """Apply block_fn(start, count) over the fixed block partition.

    Results come back in block order whether or not a pool is used; the
    partition depends only on n_paths.
    """
    if n_paths < 1:
        raise ConfigurationError(f"n_paths must be >= 1, got {n_paths}")
    starts = list(range(0, n_paths, _PATH_BLOCK))
    counts = [min(_PATH_BLOCK, n_paths - s) for s in starts]
    if workers <= 1 or len(starts) == 1:
        return [block_fn(s, c) for s, c in zip(starts, counts)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(block_fn, starts, counts))


def _evolve(cfg: SchemeConfig, start: int, count: int, on_state=None,
            allow_blowup: bool = False):
    """Run `count` trajectories with global indices start..start+count-1.

    on_state(state_index, states, engine) fires for the initial state and
    after every accepted step.  When allow_blowup is set, paths that leave
    the finite range freeze at their last finite state and their first bad
    step index is recorded; otherwise any non-finite value raises.
    Returns (final states (J, count), blowup step indices (count,), -1 = none).
    """
    engine = Engine(cfg)
    traj = np.arange(start, start + count, dtype=np.uint64)
    x = np.repeat(cfg.x0.coeffs[:, None], count, axis=1)
    blowup = np.full(count, -1, dtype=np.int64)
    if on_state is not None:
        on_state(0, x, engine)
    for n in range(cfg.n_steps):
        g = rng.normal_matrix(cfg.seed, traj, n, cfg.n_modes)
        x_new = engine.step(x, engine.noise_from_gaussians(g))
        finite = np.isfinite(x_new).all(axis=0)
        if not finite.all():
            if not allow_blowup:
                first = int(traj[int(np.argmin(finite))])
                raise TrajectoryOverflow(
                    f"trajectory {first} left the finite range at state {n + 1}",
                    step=n + 1, trajectory=first)
            newly = (~finite) & (blowup < 0)
            blowup[newly] = n + 1
            dead = blowup >= 0
            x_new[:, dead] = x[:, dead]
        x = x_new
        if on_state is not None:
            on_state(n + 1, x, engine)
    return x, blowup


# ---------------------------------------------------------------------------
# moment growth

@dataclass(frozen=True, eq=False)
class MomentStudy:
    """Norm moments along checkpoints, or the blow-up tally if paths died.

    estimates[k] approximates (E |X|^power)^(1/power) at checkpoints[k];
    it is None whenever blowup_fraction > 0, because a frozen exploded path
    has no meaningful norm to average.
    """

    checkpoints: tuple
    norm: str
    power: int
    n_paths: int
    blowup_fraction: float
    estimates: tuple | None


def _checkpoint_steps(cfg: SchemeConfig, checkpoints) -> list[int]:
    steps = []
    for t in checkpoints:
        s = round(t / cfg.dt)
        if not (0 <= s <= cfg.n_steps) or abs(s * cfg.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigurationError(
                f"checkpoint t={t} is not a grid time of dt={cfg.dt}, "
                f"n_steps={cfg.n_steps}")
        steps.append(s)
    return steps


def _moment_block(start, count, *, cfg, steps, norm):
    rows = {}
    for row, s in enumerate(steps):
        rows.setdefault(s, []).append(row)
    out = np.empty((len(steps), count))

    def on_state(idx, x, engine):
        if idx not in rows:
            return
        # frozen exploded paths overflow here; their rows are discarded anyway
        with np.errstate(over="ignore"):
            if norm == "l2":
                vals = np.sqrt((x * x).sum(axis=0))
            else:
                vals = np.abs(engine.basis @ x).max(axis=0)
        for row in rows[idx]:
            out[row] = vals

    _, blowup = _evolve(cfg, start, count, on_state,
                        allow_blowup=not cfg.taming)
    return out, blowup


def estimate_moment(cfg: SchemeConfig, power: int, norm: str, checkpoints,
                    n_paths: int, workers: int = 1) -> MomentStudy:
    """Monte Carlo (E |X|^power)^(1/power) at each checkpoint time.

    norm is "l2" (coefficient Parseval norm) or "sup" (max over collocation
    nodes).  Tamed runs treat any blow-up as a hard failure; untamed runs
    report the blow-up fraction and suppress the moment estimates.
    """
    if power < 1:
        raise ConfigurationError(f"power must be >= 1, got {power}")
    if norm not in ("l2", "sup"):
        raise ConfigurationError(f"norm must be 'l2' or 'sup', got {norm!r}")
    steps = _checkpoint_steps(cfg, checkpoints)
    parts = _map_blocks(partial(_moment_block, cfg=cfg, steps=steps, norm=norm),
                        n_paths, workers)
    values = np.concatenate([p[0] for p in parts], axis=1)
    blowup = np.concatenate([p[1] for p in parts])
    frac = float((blowup >= 0).mean())
    if frac > 0.0:
        return MomentStudy(checkpoints=tuple(checkpoints), norm=norm,
                           power=power, n_paths=n_paths,
                           blowup_fraction=frac, estimates=None)
    estimates = []
    for row in values ** power:
        raw = MCEstimate.from_samples(row)
        # delta method for the power-th root of the mean
        root = raw.value ** (1.0 / power)
        se = 0.0 if raw.value == 0.0 else \
            raw.std_error * root / (power * raw.value)
        estimates.append(MCEstimate(value=root, std_error=se,
                                    n_samples=raw.n_samples))
    return MomentStudy(checkpoints=tuple(checkpoints), norm=norm, power=power,
                       n_paths=n_paths, blowup_fraction=0.0,
                       estimates=tuple(estimates))


# ---------------------------------------------------------------------------
# weak order by common-random-number self-convergence

@dataclass(frozen=True)
class WeakOrderLevel:
    dt: float
    n_steps: int
    mean: float
    std_error: float
    error: float            # |mean - reference mean| via per-path coupling
    error_std_error: float  # std error of the coupled per-path difference
    noise_dominated: bool   # error within 2 SE of zero


@dataclass(frozen=True, eq=False)
class WeakOrderStudy:
    """Per-level functional means against the finest level, plus a rate fit.

    Levels run coarse to fine; the last one is the reference and never
    enters the fit.  fit is None when fewer than three levels carry an
    error visibly above the Monte Carlo noise floor; noise_dominated says
    so explicitly.
    """

    functional: str
    horizon: float
    n_paths: int
    levels: tuple
    fit: RateFit | None
    noise_dominated: bool


def aggregate_fine_increments(increments: np.ndarray, n_coarse: int) -> np.ndarray:
    """Sum consecutive fine increments into n_coarse coarse increments.

    The step axis comes first.  The coarse levels consume exactly these
    sums, which is the whole common-random-number coupling.
    """
    n_fine = increments.shape[0]
    if n_coarse < 1 or n_fine % n_coarse != 0:
        raise ConfigurationError(
            f"cannot aggregate {n_fine} fine steps into {n_coarse} coarse steps")
    r = n_fine // n_coarse
    return increments.reshape((n_coarse, r) + increments.shape[1:]).sum(axis=1)


def _weak_block(start, count, *, cfg, horizon, level_steps, functional):
    n_fine = level_steps[-1]
    dt_fine = horizon / n_fine
    traj = np.arange(start, start + count, dtype=np.uint64)
    scale = increment_scale(cfg.cov, dt_fine)[:, None]
    fine = np.empty((n_fine, cfg.n_modes, count))
    for j in range(n_fine):
        fine[j] = scale * rng.normal_matrix(cfg.seed, traj, j, cfg.n_modes)

    out = np.empty((len(level_steps), count))
    for li, n_level in enumerate(level_steps):
        level_cfg = replace(cfg, dt=horizon / n_level, n_steps=n_level)
        engine = Engine(level_cfg)
        increments = aggregate_fine_increments(fine, n_level)
        x = np.repeat(cfg.x0.coeffs[:, None], count, axis=1)
        for k in range(n_level):
            x = engine.step(x, increments[k])
            if not np.all(np.isfinite(x)):
                bad = int(traj[int(np.argmin(np.isfinite(x).all(axis=0)))])
                raise TrajectoryOverflow(
                    f"trajectory {bad} left the finite range at state {k + 1} "
                    f"of the dt={level_cfg.dt} level",
                    step=k + 1, trajectory=bad)
        out[li] = functional.evaluate(x)
    return out


def weak_order_study(cfg: SchemeConfig, dt_list, functional: TestFunctional,
                     horizon: float, n_paths: int,
                     workers: int = 1) -> WeakOrderStudy:
    """Self-convergence weak-error study with coupled noise across levels.

    Every level of dt_list must divide the horizon into whole steps and be
    an integer multiple of the finest level, whose paths serve as the
    reference.  Coarse increments are sums of the fine ones, so per-path
    differences estimate the weak error with far smaller variance than
    independent runs would.  Levels whose error is within 2 standard errors
    of zero are excluded from the fit as noise-dominated; if fewer than
    three levels survive, no fit is attempted and the study says so.
    """
    if horizon <= 0:
        raise ConfigurationError(f"horizon must be > 0, got {horizon}")
    if cfg.noise_mode != "increment":
        raise ConfigurationError(
            "weak_order_study couples plain increments across levels; "
            "noise_mode must be 'increment'")
    dts = [float(dt) for dt in dt_list]
    if len(set(dts)) != len(dts):
        raise ConfigurationError("dt_list entries must be distinct")
    if len(dts) < 3:
        raise ConfigurationError(f"need >= 3 levels, got {len(dts)}")
    dts = sorted(dts, reverse=True)
    if dts[-1] > dts[0] / 4:
        raise ConfigurationError(
            f"finest dt={dts[-1]} must be at least 4x smaller than "
            f"coarsest dt={dts[0]}")
    level_steps = []
    for dt in dts:
        n = round(horizon / dt)
        if n < 1 or abs(n * dt - horizon) > 1e-9 * horizon:
            raise ConfigurationError(
                f"dt={dt} does not divide horizon={horizon} into whole steps")
        level_steps.append(n)
    n_fine = level_steps[-1]
    for n in level_steps:
        if n_fine % n != 0:
            raise ConfigurationError(
                f"level with {n} steps does not nest in the finest level "
                f"({n_fine} steps); use dyadic or otherwise nested dt values")
    _warn_if_rough(functional)

    parts = _map_blocks(
        partial(_weak_block, cfg=cfg, horizon=horizon,
                level_steps=level_steps, functional=functional),
        n_paths, workers)
    phi = np.concatenate(parts, axis=1)          # (n_levels, n_paths)

    ref = phi[-1]
    levels = []
    for li, (dt, n) in enumerate(zip(dts, level_steps)):
        est = MCEstimate.from_samples(phi[li])
        diff = phi[li] - ref
        err = abs(float(diff.mean()))
        err_se = float(diff.std(ddof=1) / math.sqrt(diff.size)) if diff.size >= 2 else 0.0
        is_ref = li == len(dts) - 1
        levels.append(WeakOrderLevel(
            dt=dt, n_steps=n, mean=est.value, std_error=est.std_error,
            error=err, error_std_error=err_se,
            noise_dominated=(not is_ref) and err <= 2.0 * err_se))

    usable = [(lv.dt, lv.error) for lv in levels[:-1] if not lv.noise_dominated]
    if len(usable) >= 3:
        fit = fit_rate([u[0] for u in usable], [u[1] for u in usable])
        dominated = False
    else:
        fit = None
        dominated = True
    return WeakOrderStudy(functional=functional.name, horizon=horizon,
                          n_paths=n_paths, levels=tuple(levels), fit=fit,
                          noise_dominated=dominated)


# ---------------------------------------------------------------------------
# ergodic averages

@dataclass(frozen=True, eq=False)
class ErgodicStudy:
    """Ensemble average of phi at the horizon vs per-path time averages."""

    functional: str
    horizon: float
    burn_in: float
    n_paths: int
    ensemble: MCEstimate
    time_average: MCEstimate


def _ergodic_block(start, count, *, cfg, functional, first_step):
    sums = np.zeros(count)
    finals = np.empty(count)
    n_terms = cfg.n_steps - first_step + 1

    def on_state(idx, x, engine):
        if idx >= first_step:
            sums[:] += functional.evaluate(x)
        if idx == cfg.n_steps:
            finals[:] = functional.evaluate(x)

    _evolve(cfg, start, count, on_state, allow_blowup=False)
    return finals, sums / n_terms


def ergodic_average(cfg: SchemeConfig, functional: TestFunctional,
                    burn_in: float, horizon: float, n_paths: int,
                    workers: int = 1) -> ErgodicStudy:
    """Two estimators of the invariant mean of a functional.

    The ensemble estimate averages phi over paths at the horizon; the time
    average uses every grid state strictly after burn_in on each path, then
    averages across paths, with between-path spread as its standard error
    (autocorrelation within a path is absorbed there).  Blow-up anywhere is
    a hard failure: averages over truncated paths would estimate nothing.
    """
    if not 0.0 <= burn_in < horizon:
        raise ConfigurationError(
            f"burn_in={burn_in} must lie in [0, horizon={horizon})")
    n_steps = round(horizon / cfg.dt)
    if n_steps < 1 or abs(n_steps * cfg.dt - horizon) > 1e-9 * horizon:
        raise ConfigurationError(
            f"dt={cfg.dt} does not divide horizon={horizon} into whole steps")
    run_cfg = replace(cfg, n_steps=n_steps)
    first_step = int(math.floor(burn_in / cfg.dt + 1e-9)) + 1
    parts = _map_blocks(
        partial(_ergodic_block, cfg=run_cfg, functional=functional,
                first_step=first_step),
        n_paths, workers)
    finals = np.concatenate([p[0] for p in parts])
    path_means = np.concatenate([p[1] for p in parts])
    return ErgodicStudy(functional=functional.name, horizon=horizon,
                        burn_in=burn_in, n_paths=n_paths,
                        ensemble=MCEstimate.from_samples(finals),
                        time_average=MCEstimate.from_samples(path_means))


# ---------------------------------------------------------------------------
# contraction of synchronously coupled pairs

@dataclass(frozen=True, eq=False)
class ContractionStudy:
    """Fitted exponential decay rate of the coupled-pair L2 distance.

    rate is minus the mean per-path slope of log distance against time;
    (ci_low, ci_high) is a 95 percent normal interval across paths.  Paths
    whose distance underflows keep only their pre-underflow window.
    """

    rate: float
    ci_low: float
    ci_high: float
    n_paths: int
    initial_distance: float
    per_path_rates: np.ndarray


def _contraction_block(start, count, *, cfg, x0_a, x0_b):
    engine = Engine(cfg)
    traj = np.arange(start, start + count, dtype=np.uint64)
    xa = np.repeat(x0_a[:, None], count, axis=1)
    xb = np.repeat(x0_b[:, None], count, axis=1)
    dist = np.empty((cfg.n_steps + 1, count))
    dist[0] = np.sqrt(((xa - xb) ** 2).sum(axis=0))
    for n in range(cfg.n_steps):
        g = rng.normal_matrix(cfg.seed, traj, n, cfg.n_modes)
        noise = engine.noise_from_gaussians(g)
        xa = engine.step(xa, noise)
        xb = engine.step(xb, noise)
        ok = np.isfinite(xa).all(axis=0) & np.isfinite(xb).all(axis=0)
        if not ok.all():
            first = int(traj[int(np.argmin(ok))])
            raise TrajectoryOverflow(
                f"coupled trajectory {first} left the finite range at "
                f"state {n + 1}", step=n + 1, trajectory=first)
        dist[n + 1] = np.sqrt(((xa - xb) ** 2).sum(axis=0))

    # per-path window: stop at the first nonpositive or non-finite distance
    bad = (dist <= 0.0) | ~np.isfinite(dist)
    lengths = np.where(bad.any(axis=0), bad.argmax(axis=0), dist.shape[0])
    t = cfg.dt * np.arange(dist.shape[0])[:, None]
    mask = np.arange(dist.shape[0])[:, None] < lengths[None, :]
    y = np.where(mask, np.log(np.where(mask, dist, 1.0)), 0.0)
    w = mask.astype(np.float64)
    n_pts = w.sum(axis=0)
    t_mean = (w * t).sum(axis=0) / n_pts
    y_mean = (w * y).sum(axis=0) / n_pts
    t_c = np.where(mask, t - t_mean, 0.0)
    denom = (t_c * t_c).sum(axis=0)
    # single-point windows give denom 0; those paths are dropped upstream
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = (t_c * (y - y_mean)).sum(axis=0) / denom
    return slopes, n_pts


def contraction_rate(cfg: SchemeConfig, x0_a, x0_b, n_paths: int,
                     workers: int = 1) -> ContractionStudy:
    """Decay rate of the L2 distance between paths driven by shared noise."""
    a = np.asarray(x0_a.coeffs, dtype=np.float64)
    b = np.asarray(x0_b.coeffs, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ConfigurationError("contraction needs unbatched initial fields")
    if a.shape[0] != cfg.n_modes or b.shape[0] != cfg.n_modes:
        raise ConfigurationError("initial fields must have cfg.n_modes modes")
    if np.array_equal(a, b):
        raise ConfigurationError(
            "x0_a and x0_b coincide; the coupled distance is identically zero")
    if cfg.n_steps < 2:
        raise ConfigurationError("need n_steps >= 2 to fit a decay rate")
    parts = _map_blocks(
        partial(_contraction_block, cfg=cfg, x0_a=a, x0_b=b),
        n_paths, workers)
    slopes = np.concatenate([p[0] for p in parts])
    n_pts = np.concatenate([p[1] for p in parts])
    keep = n_pts >= 2
    if not keep.any():
        raise ConfigurationError(
            "every path's distance underflowed immediately; nothing to fit")
    rates = -slopes[keep]
    est = MCEstimate.from_samples(rates)
    half = 1.96 * est.std_error
    return ContractionStudy(
        rate=est.value, ci_low=est.value - half, ci_high=est.value + half,
        n_paths=int(keep.sum()),
        initial_distance=float(np.sqrt(((a - b) ** 2).sum())),
        per_path_rates=rates)


# ---------------------------------------------------------------------------
# taming headroom instrumentation

@dataclass(frozen=True)
class TamingReport:
    """Largest tamed drift contribution seen across all steps and paths."""

    max_drift_contribution: float
    n_paths: int
    n_steps: int


def _headroom_block(start, count, *, cfg):
    peak = np.zeros(1)

    def on_state(idx, x, engine):
        if idx == 0:
            return
        m = float(np.max(engine.last_drift_l2))
        if m > peak[0]:
            peak[0] = m

    _evolve(cfg, start, count, on_state, allow_blowup=False)
    return float(peak[0])


def taming_headroom(cfg: SchemeConfig, n_paths: int,
                    workers: int = 1) -> TamingReport:
    """Max over paths and steps of the tamed drift's L2 contribution.

    The scheme guarantees this stays below 1; the report shows how much
    margin a configuration actually has.
    """
    if not cfg.taming:
        raise ConfigurationError("taming_headroom needs a tamed configuration")
    parts = _map_blocks(partial(_headroom_block, cfg=cfg), n_paths, workers)
    return TamingReport(max_drift_contribution=max(parts),
                        n_paths=n_paths, n_steps=cfg.n_steps)


# ---------------------------------------------------------------------------
# per-mode statistics at the final time

@dataclass(frozen=True, eq=False)
class ModeStatistics:
    """Empirical mean and variance per mode at the final state."""

    mean: np.ndarray
    mean_std_error: np.ndarray
    variance: np.ndarray
    variance_std_error: np.ndarray
    n_paths: int


def _final_state_block(start, count, *, cfg):
    x, _ = _evolve(cfg, start, count, allow_blowup=False)
    return x


def final_mode_statistics(cfg: SchemeConfig, n_paths: int,
                          workers: int = 1) -> ModeStatistics:
    """Per-mode sample mean and variance of the final state across paths."""
    if n_paths < 2:
        raise ConfigurationError(f"need n_paths >= 2, got {n_paths}")
    parts = _map_blocks(partial(_final_state_block, cfg=cfg), n_paths, workers)
    finals = np.concatenate(parts, axis=1)       # (J, n_paths)
    mean = finals.mean(axis=1)
    centered = finals - mean[:, None]
    var = (centered * centered).sum(axis=1) / (n_paths - 1)
    mean_se = np.sqrt(var / n_paths)
    sq = centered * centered
    var_se = sq.std(axis=1, ddof=1) / math.sqrt(n_paths)
    return ModeStatistics(mean=mean, mean_std_error=mean_se, variance=var,
                          variance_std_error=var_se, n_paths=n_paths)


# ---------------------------------------------------------------------------
# cost curve

@dataclass(frozen=True)
class CostPoint:
    eps: float
    horizon: float
    dt: float
    n_steps: int
    bound_product: float  # n_steps * eps^(1/alpha)


@dataclass(frozen=True)
class CostCurve:
    """Step-count schedule reaching accuracy eps at an eps-dependent horizon.

    The horizon grows like horizon_scale * |log eps| and the step size
    solves horizon^horizon_power * dt^((alpha + regularity)/2) =
    accuracy_scale * eps, after which dt is nudged down so the horizon is a
    whole number of steps.  bound_product tracks n_steps * eps^(1/alpha),
    the quantity whose boundedness the cost claim asserts.
    """

    alpha: float
    regularity: float
    horizon_power: int
    horizon_scale: float
    accuracy_scale: float
    points: tuple


def cost_curve(alpha: float, regularity: float, horizon_power: int, eps_list,
               horizon_scale: float = 1.0,
               accuracy_scale: float = 1.0) -> CostCurve:
    """Evaluate the accuracy-vs-step-count schedule on a list of tolerances."""
    if not 0.0 < alpha < regularity:
        raise ConfigurationError(
            f"alpha={alpha} must lie in (0, regularity={regularity})")
    if horizon_power < 0:
        raise ConfigurationError(
            f"horizon_power must be >= 0, got {horizon_power}")
    if horizon_scale <= 0 or accuracy_scale <= 0:
        raise ConfigurationError("scales must be positive")
    points = []
    for eps in eps_list:
        eps = float(eps)
        if not 0.0 < eps < 1.0:
            raise ConfigurationError(f"eps must be in (0, 1), got {eps}")
        horizon = horizon_scale * abs(math.log(eps))
        dt_target = (accuracy_scale * eps / horizon ** horizon_power) \
            ** (2.0 / (alpha + regularity))
        n_steps = max(1, math.ceil(horizon / dt_target))
        dt = horizon / n_steps
        points.append(CostPoint(
            eps=eps, horizon=horizon, dt=dt, n_steps=n_steps,
            bound_product=n_steps * eps ** (1.0 / alpha)))
    return CostCurve(alpha=alpha, regularity=regularity,
                     horizon_power=horizon_power, horizon_scale=horizon_scale,
                     accuracy_scale=accuracy_scale, points=tuple(points))
