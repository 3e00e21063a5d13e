"""Counter-based Gaussian sampling for reproducible parallel Monte Carlo.

Every draw is a pure function of (seed, trajectory, step, slot).  That buys
two properties the estimators rely on:

* a batch of trajectories can be split across any number of workers and the
  numbers never change, because nothing is sequential;
* time-step levels can be coupled exactly, since a coarse increment is
  defined as the sum of the fine increments it spans and both sides can
  regenerate the same fine draws on demand.

The word function is a chain of splitmix64 finalizer rounds, one per index
field.  Normals come from Box-Muller on two 53-bit uniforms, which keeps the
consumption per slot fixed (two words per normal, no rejection loop).
"""

from __future__ import annotations

import numpy as np

_SEED_SALT = np.uint64(0x9E3779B97F4A7C15)
_TRAJ_SALT = np.uint64(0xBF58476D1CE4E5B9)
_STEP_SALT = np.uint64(0x94D049BB133111EB)
_SLOT_SALT = np.uint64(0xD6E8FEB86659FD93)

_TWO_POW_MINUS_53 = 2.0 ** -53


def _mix(x):
    """splitmix64 output finalizer, elementwise on uint64 input."""
    z = x ^ (x >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def words(seed: int, trajectories, step: int, n_slots: int) -> np.ndarray:
    """Raw uint64 words, shape (n_slots, len(trajectories)).

    ``words(seed, t, step, n)[k, i]`` depends only on
    (seed, trajectories[i], step, k).
    """
    traj = np.asarray(trajectories, dtype=np.uint64)
    if traj.ndim != 1:
        raise ValueError("trajectories must be one dimensional")
    with np.errstate(over="ignore"):
        h = _mix(np.uint64(seed % (1 << 64)) ^ _SEED_SALT)
        h = _mix(h ^ (traj * _TRAJ_SALT))
        h = _mix(h ^ (np.uint64(step % (1 << 64)) * _STEP_SALT))
        slots = (np.arange(n_slots, dtype=np.uint64) * _SLOT_SALT)[:, None]
        return _mix(h[None, :] ^ slots)


def uniforms(seed: int, trajectories, step: int, n_slots: int) -> np.ndarray:
    """Uniform draws on (0, 1], shape (n_slots, len(trajectories))."""
    w = words(seed, trajectories, step, n_slots)
    # top 53 bits, shifted into (0, 1] so log() below is always finite
    return ((w >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_POW_MINUS_53


def normal_matrix(seed: int, trajectories, step: int, n_rows: int) -> np.ndarray:
    """Standard normals, shape (n_rows, len(trajectories)).

    Entry (j, i) is a pure function of (seed, trajectories[i], step, j).
    """
    u = uniforms(seed, trajectories, step, 2 * n_rows)
    radius = np.sqrt(-2.0 * np.log(u[0::2]))
    angle = (2.0 * np.pi) * u[1::2]
    return radius * np.cos(angle)
