"""Paths of dX = sum_i w_i (mu_i X dt + sigma_i X dW) with one shared Wiener process.

Because every component sees the same dW, the Euler step collapses to a
geometric Brownian step with drift sum(w mu) and volatility sum(w sigma).
The per-component closed form X0 sum_i w_i exp((mu_i - sigma_i^2 / 2) t +
sigma_i W_t) is offered for comparison; it solves each component's equation
separately and coincides with the Euler limit only for one component.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .core import TieredGaussianModel
from .serialization import format_columns


class PathWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SdeSpec:
    weights: tuple
    drifts: tuple
    vols: tuple
    x0: float
    dt: float
    steps: int

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        mu = tuple(float(v) for v in self.drifts)
        sig = tuple(float(v) for v in self.vols)
        if not (len(w) == len(mu) == len(sig) and w):
            raise ValueError("weights, drifts and vols need one entry per component")
        if any(s < 0 for s in sig):
            raise ValueError("vols must be >= 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if int(self.steps) < 1:
            raise ValueError("steps must be >= 1")
        if not self.x0 > 0:
            raise ValueError("x0 must be > 0")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "drifts", mu)
        object.__setattr__(self, "vols", sig)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def drift(self):
        return float(np.dot(self.weights, self.drifts))

    @property
    def vol(self):
        return float(np.dot(self.weights, self.vols))

    @property
    def horizon(self):
        return self.dt * self.steps

    @property
    def times(self):
        return np.arange(self.steps + 1) * self.dt


def sde_from_model(model: TieredGaussianModel, x0=1.0, dt=1.0, steps=1, normalize_weights=True):
    """Reuse a fitted model's (w, mu, sigma) as (weight, drift, diffusion).

    The two roles share symbols but not units; this identity mapping is an
    assumption. Weights are divided by their sum when ``normalize_weights``.
    """
    w = np.asarray(model.weights, float)
    if normalize_weights:
        w = w / w.sum()
    return SdeSpec(tuple(w), tuple(model.means), tuple(model.widths), x0, dt, steps)


@dataclass(frozen=True)
class SamplePath:
    times: np.ndarray
    values: np.ndarray
    negative_steps: int = 0

    def to_text(self, delimiter=","):
        return format_columns(["time", "value"], [self.times, self.values], 15, delimiter)


def _normals(seed, steps):
    return np.random.default_rng(seed).standard_normal(steps)


def simulate_euler(spec: SdeSpec, seed) -> SamplePath:
    """One Euler-Maruyama path; the same seed gives the same normals as the closed form."""
    z = _normals(seed, spec.steps)[None, :]
    vals = _kernels.euler_paths(spec.x0, spec.drift, spec.vol, spec.dt, z)[0]
    neg = int(np.sum(vals <= 0))
    if neg:
        warnings.warn(f"{neg} path value(s) at or below zero; dt may be too coarse", PathWarning)
    return SamplePath(spec.times, vals, neg)


def _check_weights(spec):
    if abs(sum(spec.weights) - 1.0) > 1e-12:
        raise ValueError("closed-form paths need weights summing to 1")


def closed_form_values(spec: SdeSpec, times, w_path, corrected=True):
    """Closed-form X(t) given the cumulative Wiener values ``w_path`` at ``times``."""
    t = np.asarray(times, float)[..., None]
    W = np.asarray(w_path, float)[..., None]
    w = np.asarray(spec.weights)
    mu = np.asarray(spec.drifts)
    sig = np.asarray(spec.vols)
    if corrected:
        return spec.x0 * np.sum(w * np.exp((mu - 0.5 * sig * sig) * t + sig * W), axis=-1)
    # literal form: the step size multiplies outside the exponential
    return spec.x0 * np.sum(w * np.exp(mu - 0.5 * sig * sig) * (spec.dt + sig * W), axis=-1)


def simulate_closed_form(spec: SdeSpec, times: Optional[Sequence[float]] = None, seed=0,
                         corrected=True) -> SamplePath:
    """Closed-form path on ``times`` (default: the Euler grid of ``spec``).

    On the default grid the Wiener increments are the ones
    :func:`simulate_euler` uses for the same seed.
    """
    if corrected:
        _check_weights(spec)
    if times is None:
        t = spec.times
    else:
        t = np.asarray(times, float)
        if t.size < 1 or t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must start at 0 and increase")
    z = _normals(seed, t.size - 1)
    W = np.concatenate([[0.0], np.cumsum(np.sqrt(np.diff(t)) * z)])
    return SamplePath(t, closed_form_values(spec, t, W, corrected))


def _path_seeds(seed, n_paths):
    return np.random.SeedSequence(seed).spawn(int(n_paths))


def simulate_ensemble(spec: SdeSpec, n_paths, seed, method="euler", corrected=True):
    """(n_paths, steps + 1) array of paths; path i uses the i-th spawned child seed."""
    seeds = _path_seeds(seed, n_paths)
    z = np.stack([_normals(s, spec.steps) for s in seeds])
    if method == "euler":
        return _kernels.euler_paths(spec.x0, spec.drift, spec.vol, spec.dt, z)
    if method == "closed":
        if corrected:
            _check_weights(spec)
        W = np.concatenate([np.zeros((z.shape[0], 1)), np.cumsum(math.sqrt(spec.dt) * z, axis=1)],
                           axis=1)
        return closed_form_values(spec, spec.times[None, :], W, corrected)
    raise ValueError(f"unknown method {method!r}")


def terminal_values(spec: SdeSpec, n_paths, seed, chunk=256, corrected=True):
    """Terminal Euler and closed-form values over an ensemble, sharing each path's increments.

    Paths are processed ``chunk`` at a time, so memory stays at
    chunk * steps regardless of ``n_paths``.
    """
    if corrected:
        _check_weights(spec)
    seeds = _path_seeds(seed, n_paths)
    euler = np.empty(len(seeds))
    closed = np.empty(len(seeds))
    sq = math.sqrt(spec.dt)
    for s in range(0, len(seeds), chunk):
        z = np.stack([_normals(q, spec.steps) for q in seeds[s:s + chunk]])
        euler[s:s + z.shape[0]] = _kernels.euler_paths(spec.x0, spec.drift, spec.vol, spec.dt,
                                                       z)[:, -1]
        closed[s:s + z.shape[0]] = closed_form_values(spec, spec.horizon, sq * z.sum(axis=1),
                                                      corrected)
    return euler, closed


def ensemble_to_text(times, paths, delimiter=","):
    paths = np.asarray(paths)
    n, k = paths.shape
    ids = np.repeat(np.arange(n), k)
    return format_columns(["path_id", "time", "value"], [ids, np.tile(times, n), paths.ravel()],
                          15, delimiter)


__all__ = [
    "PathWarning", "SdeSpec", "sde_from_model", "SamplePath", "simulate_euler",
    "closed_form_values", "simulate_closed_form", "simulate_ensemble", "terminal_values",
    "ensemble_to_text",
]
