"""Bandit environment: hidden parameter, sub-Gaussian noise, regret accounting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .polytope import Polyhedron, contains

NOISE_KINDS = ("gaussian", "uniform_bounded", "none")


@dataclass
class NoiseModel:
    """Reward noise. gaussian: N(0, R^2). uniform_bounded: U[-R, R], which is
    zero-mean and bounded on an interval of length 2R, hence R-sub-Gaussian.
    none: deterministic rewards."""

    kind: str = "gaussian"
    R: float = 1.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected {NOISE_KINDS}")
        if self.kind != "none" and self.R <= 0:
            raise ValueError("sub-Gaussian parameter R must be positive")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.normal(0.0, self.R, size=size)
        if self.kind == "uniform_bounded":
            return rng.uniform(-self.R, self.R, size=size)
        return np.zeros(size)


def run_stream(master_seed: int, run_index: int) -> np.random.Generator:
    """Per-run generator: PCG64 seeded by SeedSequence(master, spawn_key=(run,)).

    Distinct runs get statistically independent streams and any (seed, run)
    pair reproduces the same stream on every platform.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))
    return np.random.Generator(np.random.PCG64(ss))


class Environment:
    """Hidden theta plus noise; owns a mutable per-run random stream.

    Single-threaded by design: concurrent runs each get their own instance.
    """

    def __init__(self, theta, poly: Polyhedron, noise: NoiseModel, rng: np.random.Generator):
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size != poly.dim:
            raise ValueError(f"theta has dimension {theta.size}, arm set has {poly.dim}")
        if np.abs(theta).max() > 1.0 + 1e-12:
            raise ValueError(
                "theta must lie in [-1, 1]^N (scale by 1/max|theta_n| first)"
            )
        self.theta = theta
        self.poly = poly
        self.noise = noise
        self.rng = rng
        best = lp.simplex_maximize(theta, poly.A, poly.b)
        worst = lp.simplex_maximize(-theta, poly.A, poly.b)
        if not (best.ok and worst.ok):
            raise RuntimeError("could not optimize theta over the arm set")
        self.optimal_arm = best.point
        self.optimal_value = float(theta @ best.point)
        self.max_reward = max(abs(best.value), abs(-worst.value))  # R_m
        self._arm_means: dict[bytes, float] = {}

    def _mean_reward(self, x) -> float:
        # membership is validated once per distinct arm; policies replay the
        # same few arms millions of times
        x = np.asarray(x, dtype=float).ravel()
        key = x.tobytes()
        mean = self._arm_means.get(key)
        if mean is None:
            if not contains(self.poly, x):
                raise ValueError("arm lies outside the polyhedron")
            mean = float(self.theta @ x)
            self._arm_means[key] = mean
        return mean

    def pull(self, x) -> float:
        """Play arm x once; returns theta'x plus a fresh noise draw."""
        return float(self.pull_many(x, 1)[0])

    def pull_many(self, x, k: int) -> np.ndarray:
        """k consecutive pulls of the same arm (identical draws to k pulls)."""
        return self._mean_reward(x) + self.noise.draw(self.rng, k)

    def instantaneous_regret(self, x) -> float:
        """Pseudo-regret of a single play of x: optimal value minus theta'x."""
        return self.optimal_value - self._mean_reward(x)
