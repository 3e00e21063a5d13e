"""Time-stepping engines for the semilinear heat equation with additive noise.

Two explicit one-step maps share all their plumbing:

* tamed:    X_{n+1} = e^{dt A} X_n + P1 F(X_n) / (1 + dt ||F(X_n)||) + noise
* untamed:  X_{n+1} = e^{dt A} (X_n + dt F(X_n)) + noise

where A is the Dirichlet Laplacian, P1 is the per-mode factor
(1 - e^{-lambda dt}) / lambda, F is the pointwise reaction lift evaluated
pseudo-spectrally, and the taming denominator uses the node-quadrature L2
norm of f(X_n).  The untamed map is the baseline that loses moment bounds
for superlinear f; its blow-up is an expected, recorded outcome.  The tamed
drift contribution has L2 norm at most dt ||F|| / (1 + dt ||F||) < 1 at
every step, and the engine asserts that bound each time it steps.

Noise enters in one of two modes.  "increment" applies the semigroup to a
plain Q-Wiener increment, so the zero-drift scheme is exactly
decay * (X + dW); the grouping (sum first, then decay) is part of the
contract, because reproducing those paths bit for bit is how the zero-drift
reduction is checked.  "exact" adds the one-step stochastic convolution
integral after the decay, sampled with its exact variance; it removes the
noise-discretization bias from invariant-law experiments.

States are coefficient arrays of shape (J,) or (J, B); every operation here
is batch-transparent.  Randomness is addressed, never streamed: trajectory
b at step n always sees the same Gaussians regardless of batch or process
layout.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, TrajectoryOverflow
from .noise import (CovarianceSpec, NoiseStream, increment_scale,
                    stationary_step_scale)
from .nonlinearity import Nonlinearity
from .spectral import (SpectralField, phi1_factors, semigroup_factors,
                       sine_matrix)

_NOISE_MODES = ("increment", "exact")


@dataclass(frozen=True, eq=False)
class SchemeConfig:
    """Everything one trajectory needs: model, grid, step count, seed.

    dt must lie in (0, dt_max]; the cap is part of the configuration so a
    run can declare the step-size regime its claims are valid in.
    """

    n_modes: int
    n_nodes: int
    dt: float
    n_steps: int
    cov: CovarianceSpec
    nl: Nonlinearity
    x0: SpectralField
    seed: int = 0
    taming: bool = True
    dt_max: float = 0.5
    noise_mode: str = "increment"

    def __post_init__(self):
        if self.n_modes < 1:
            raise ConfigurationError(f"n_modes must be >= 1, got {self.n_modes}")
        if self.n_nodes < self.n_modes:
            raise ConfigurationError(
                f"n_nodes={self.n_nodes} must be >= n_modes={self.n_modes}")
        if self.dt_max <= 0:
            raise ConfigurationError(f"dt_max must be > 0, got {self.dt_max}")
        if not 0 < self.dt <= self.dt_max:
            raise ConfigurationError(
                f"dt={self.dt} must be in (0, dt_max={self.dt_max}]")
        if self.n_steps < 0:
            raise ConfigurationError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {self.seed}")
        if self.noise_mode not in _NOISE_MODES:
            raise ConfigurationError(
                f"noise_mode must be one of {_NOISE_MODES}, got {self.noise_mode!r}")
        if self.cov.n_modes != self.n_modes:
            raise ConfigurationError(
                f"covariance has {self.cov.n_modes} modes but n_modes={self.n_modes}")
        if self.x0.n_modes != self.n_modes:
            raise ConfigurationError(
                f"x0 has {self.x0.n_modes} modes but n_modes={self.n_modes}")

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Per-step norms of one path, truncated at blow-up when one occurs.

    blowup_step, when set, is the index of the first state that failed to
    stay finite; times and norms cover the finite states 0..blowup_step-1,
    and final_state is the last finite state.
    """

    times: np.ndarray
    l2_norms: np.ndarray
    sup_norms: np.ndarray
    final_state: SpectralField
    blowup_step: int | None = None


def _col(factors: np.ndarray, x: np.ndarray) -> np.ndarray:
    return factors if x.ndim == 1 else factors[:, None]


class Engine:
    """Precomputed one-step map for a fixed configuration.

    step() is pure apart from ``last_drift_l2``, which it refreshes with the
    L2 norm of the tamed drift contribution so instrumented runs can record
    the taming headroom without recomputing the transform.
    """

    def __init__(self, cfg: SchemeConfig):
        self.cfg = cfg
        self.dt = cfg.dt
        self.taming = cfg.taming
        self.noise_mode = cfg.noise_mode
        self.decay = semigroup_factors(cfg.n_modes, cfg.dt)
        self.gain = phi1_factors(cfg.n_modes, cfg.dt)
        self.basis = sine_matrix(cfg.n_modes, cfg.n_nodes)
        self.weight = 1.0 / (cfg.n_nodes + 1)
        self.sqrt_qdt = increment_scale(cfg.cov, cfg.dt)
        self.exact_scale = stationary_step_scale(cfg.cov, cfg.dt)
        self.f = cfg.nl.f
        # The zero reaction bypasses the transform entirely, which makes the
        # reduction to the pure noise recursion an identity, not a tolerance.
        self.zero_drift = cfg.nl.name == "zero"
        self.last_drift_l2 = 0.0

    def noise_from_gaussians(self, g: np.ndarray) -> np.ndarray:
        """Scale standard normals into this engine's noise term."""
        scale = self.sqrt_qdt if self.noise_mode == "increment" else self.exact_scale
        return _col(scale, g) * g

    def step(self, x: np.ndarray, noise: np.ndarray) -> np.ndarray:
        """One update of shape (J,) or (J, B) states; may return non-finite
        values for the untamed map, which callers must inspect."""
        decay = _col(self.decay, x)
        if self.zero_drift:
            self.last_drift_l2 = 0.0
            if self.noise_mode == "increment":
                return decay * (x + noise)
            return decay * x + noise

        with np.errstate(over="ignore", invalid="ignore"):
            fx = self.f(self.basis @ x)
            coeffs = (self.basis.T @ fx) * self.weight
            if self.taming:
                norm = np.sqrt((fx * fx).sum(axis=0) * self.weight)
                drift = _col(self.gain, x) * coeffs / (1.0 + self.dt * norm)
                drift_l2 = np.sqrt((drift * drift).sum(axis=0))
                # nan falls through to the caller's finiteness check instead
                assert not np.any(drift_l2 >= 1.0), "tamed drift contribution reached 1"
                self.last_drift_l2 = drift_l2
                if self.noise_mode == "increment":
                    return decay * (x + noise) + drift
                return decay * x + drift + noise
            if self.noise_mode == "increment":
                return decay * (x + self.dt * coeffs + noise)
            return decay * (x + self.dt * coeffs) + noise


def tamed_step(x: SpectralField, cfg: SchemeConfig, stream: NoiseStream) -> SpectralField:
    """One tamed update of a single field, drawing noise from the stream."""
    engine = Engine(replace(cfg, taming=True))
    noise = engine.noise_from_gaussians(stream.gaussians(cfg.n_modes))
    out = engine.step(x.coeffs, noise)
    if not np.all(np.isfinite(out)):
        raise TrajectoryOverflow("tamed step produced a non-finite state")
    return SpectralField(out)


def untamed_step(x: SpectralField, cfg: SchemeConfig, stream: NoiseStream) -> SpectralField:
    """One untamed update; raises TrajectoryOverflow on non-finite output,
    which batch drivers catch and record rather than propagate."""
    engine = Engine(replace(cfg, taming=False))
    noise = engine.noise_from_gaussians(stream.gaussians(cfg.n_modes))
    out = engine.step(x.coeffs, noise)
    if not np.all(np.isfinite(out)):
        raise TrajectoryOverflow("untamed step produced a non-finite state")
    return SpectralField(out)


def _record_arrays(cfg: SchemeConfig, states: list[np.ndarray],
                   blowup_step: int | None) -> TrajectoryRecord:
    basis = sine_matrix(cfg.n_modes, cfg.n_nodes)
    stacked = np.stack(states, axis=1)                    # (J, kept)
    times = cfg.dt * np.arange(stacked.shape[1])
    # norms of nearly-exploded finite states may overflow to inf; that is data
    with np.errstate(over="ignore"):
        l2 = np.sqrt((stacked * stacked).sum(axis=0))
        sup = np.abs(basis @ stacked).max(axis=0)
    return TrajectoryRecord(times=times, l2_norms=l2, sup_norms=sup,
                            final_state=SpectralField(stacked[:, -1]),
                            blowup_step=blowup_step)


def simulate(cfg: SchemeConfig, trajectory_index: int = 0) -> TrajectoryRecord:
    """Run one trajectory and record per-step norms.

    A non-finite state under taming is a hard failure (TrajectoryOverflow);
    without taming it truncates the record and sets blowup_step.
    """
    engine = Engine(cfg)
    stream = NoiseStream(cfg.seed, trajectory_index)
    x = cfg.x0.coeffs.copy()
    if x.ndim != 1:
        raise ConfigurationError("simulate runs one trajectory; x0 must be unbatched")
    states = [x]
    blowup_step = None
    for n in range(cfg.n_steps):
        stream.advance(n)
        noise = engine.noise_from_gaussians(stream.gaussians(cfg.n_modes))
        x = engine.step(x, noise)
        if not np.all(np.isfinite(x)):
            if cfg.taming:
                raise TrajectoryOverflow(
                    "tamed trajectory left the finite range",
                    step=n + 1, trajectory=trajectory_index)
            blowup_step = n + 1
            break
        states.append(x)
    return _record_arrays(cfg, states, blowup_step)


def simulate_coupled_pair(cfg: SchemeConfig, x0_a: SpectralField,
                          x0_b: SpectralField,
                          trajectory_index: int = 0) -> tuple[TrajectoryRecord, TrajectoryRecord]:
    """Two trajectories driven by the identical noise sequence.

    The difference process sees no noise at all, which is what turns the
    drift's one-sided slope bound into path-wise contraction.  If either
    path leaves the finite range (untamed runs only), both records truncate
    at that step.
    """
    if x0_a.n_modes != cfg.n_modes or x0_b.n_modes != cfg.n_modes:
        raise ConfigurationError("both initial fields must have cfg.n_modes modes")
    engine = Engine(cfg)
    stream = NoiseStream(cfg.seed, trajectory_index)
    xa = x0_a.coeffs.copy()
    xb = x0_b.coeffs.copy()
    if xa.ndim != 1 or xb.ndim != 1:
        raise ConfigurationError("coupled pair needs unbatched initial fields")
    states_a, states_b = [xa], [xb]
    blowup_step = None
    for n in range(cfg.n_steps):
        stream.advance(n)
        noise = engine.noise_from_gaussians(stream.gaussians(cfg.n_modes))
        xa = engine.step(xa, noise)
        xb = engine.step(xb, noise)
        finite = np.all(np.isfinite(xa)) and np.all(np.isfinite(xb))
        if not finite:
            if cfg.taming:
                raise TrajectoryOverflow(
                    "tamed coupled pair left the finite range",
                    step=n + 1, trajectory=trajectory_index)
            blowup_step = n + 1
            break
        states_a.append(xa)
        states_b.append(xb)
    return (_record_arrays(cfg, states_a, blowup_step),
            _record_arrays(cfg, states_b, blowup_step))
