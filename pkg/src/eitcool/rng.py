"""Counter-based splittable random numbers for reproducible parallel Monte Carlo.

Every draw is a pure function of a (key, trial, draw) address: ``key`` is
derived from the user seed and any stream indices, ``trial`` separates
Monte-Carlo trials and ``draw`` counts slots within a trial.  Trials can
therefore run in any order -- or be sharded across workers -- and still
produce bit-identical results.  The mixer is the standard 64-bit finalizer
used by splittable generators.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM_MULT = 0xD6E8FEB86659FD93
_TRIAL_MULT = 0xCA5A826395121157


def mix64(z: int) -> int:
    """Avalanche a 64-bit integer (scalar, Python ints)."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_key(seed: int, *indices: int) -> int:
    """Fold stream indices into a 64-bit key; splittable and order-sensitive."""
    key = mix64(seed & _MASK)
    for ix in indices:
        key = mix64(key ^ ((ix + 1) * _STREAM_MULT & _MASK))
    return key


def trial_base(key: int, trial: int) -> int:
    """Per-trial base state: mix64(key ^ trial * TRIAL_MULT)."""
    return mix64((key ^ (trial * _TRIAL_MULT)) & _MASK)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _to_unit(h: np.ndarray) -> np.ndarray:
    """uint64 -> double in (0, 1] (never 0, safe under log)."""
    return ((h >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def uniforms_for_trials(key: int, trials: np.ndarray, draw: int) -> np.ndarray:
    """Uniform doubles in (0, 1], one per trial, at a fixed draw slot."""
    base = _mix64_array(np.uint64(key) ^ (np.asarray(trials, dtype=np.uint64)
                                          * np.uint64(_TRIAL_MULT)))
    h = _mix64_array(base ^ np.uint64((draw * _GOLDEN) & _MASK))
    return _to_unit(h)


def uniforms_for_draws(key: int, trial: int, draws: np.ndarray) -> np.ndarray:
    """Uniform doubles in (0, 1] over consecutive draw slots of one trial."""
    base = np.uint64(trial_base(key, trial))
    mults = (np.asarray(draws, dtype=np.uint64) * np.uint64(_GOLDEN))
    return _to_unit(_mix64_array(base ^ mults))


def box_muller(u1: np.ndarray, u2: np.ndarray):
    """Two independent standard-normal arrays from uniform pairs."""
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta), r * np.sin(theta)


class CounterRNG:
    """Stateful view of one trial stream, advancing a draw counter.

    ``CounterRNG(seed, *stream)`` addresses trial 0 of the stream keyed by
    ``derive_key(seed, *stream)``; :meth:`for_trial` addresses an explicit
    (key, trial) pair, matching the layout the Monte-Carlo kernels use.
    """

    def __init__(self, seed: int, *stream: int):
        self.key = derive_key(seed, *stream)
        self.trial = 0
        self.counter = 0

    @classmethod
    def for_trial(cls, key: int, trial: int) -> "CounterRNG":
        rng = cls.__new__(cls)
        rng.key = key
        rng.trial = trial
        rng.counter = 0
        return rng

    def _slots(self, n: int) -> np.ndarray:
        slots = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        return slots

    def uniforms(self, n: int) -> np.ndarray:
        return uniforms_for_draws(self.key, self.trial, self._slots(n))

    def normals(self, n: int) -> np.ndarray:
        """Standard normals from Box-Muller pairs at draw slots (2k, 2k+1)."""
        pairs = (n + 1) // 2
        slots = self._slots(2 * pairs)
        a, b = box_muller(uniforms_for_draws(self.key, self.trial, slots[0::2]),
                          uniforms_for_draws(self.key, self.trial, slots[1::2]))
        return np.stack([a, b], axis=1).reshape(-1)[:n]
