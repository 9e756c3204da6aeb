"""Component-wise parameter estimation from exploration rewards.

Three procedures share one accumulator: the origin-anchored sample mean, the
anchored difference-of-means, and the direct linear-system solve that covers
anchored exploration without separate anchor plays.
"""
from __future__ import annotations

import numpy as np

from .polytope import ExplorationBasis


class EstimatorError(Exception):
    pass


class ParameterEstimate:
    """Running per-axis reward sums and counts, plus anchor plays.

    Mutable, single-owner state: one policy instance drives one estimate.
    theta_hat holds the most recently computed estimate.
    """

    def __init__(self, n: int):
        self.n = n
        self.sums = np.zeros(n)
        self.counts = np.zeros(n, dtype=np.int64)
        self.anchor_sum = 0.0
        self.anchor_count = 0
        self.theta_hat: np.ndarray | None = None

    def update_axis(self, axis: int, reward: float) -> "ParameterEstimate":
        if not 0 <= axis < self.n:
            raise EstimatorError(f"axis {axis} out of range for {self.n} axes")
        self.sums[axis] += reward
        self.counts[axis] += 1
        return self

    def update_anchor(self, reward: float) -> "ParameterEstimate":
        self.anchor_sum += reward
        self.anchor_count += 1
        return self


def estimate_origin(est: ParameterEstimate, basis: ExplorationBasis) -> np.ndarray:
    """theta_hat[n] = sums[n] / (counts[n] * reach[n]).

    The per-axis sample mean of rewards from arm reach_n * e_n, divided by the
    reach; the play counts are whatever the schedule accumulated.
    """
    if np.any(est.counts < 1):
        raise EstimatorError("every axis needs at least one play")
    if np.abs(basis.anchor).max() > 0:
        raise EstimatorError("origin estimator requires an origin-anchored basis")
    est.theta_hat = est.sums / (est.counts * basis.reaches)
    return est.theta_hat


def estimate_difference(est: ParameterEstimate, basis: ExplorationBasis) -> np.ndarray:
    """theta_hat[n] = (mean reward of arm n - mean anchor reward) / reach[n]."""
    if est.anchor_count < 1:
        raise EstimatorError("difference estimator needs anchor plays")
    if np.any(est.counts < 1):
        raise EstimatorError("every axis needs at least one play")
    anchor_mean = est.anchor_sum / est.anchor_count
    est.theta_hat = (est.sums / est.counts - anchor_mean) / basis.reaches
    return est.theta_hat


def estimate_linear_system(
    mean_rewards, anchor, alphas, cond_limit: float = 1e12
) -> np.ndarray:
    """Solve (1 anchor' + diag(alphas)) theta = mean_rewards for theta.

    This is the defining system of the anchored estimator that skips separate
    anchor plays: the expected reward of arm anchor + alpha_n e_n is
    theta'anchor + alpha_n theta_n. Solved directly by elimination with
    partial pivoting rather than through a closed-form rank-one update.
    """
    r = np.asarray(mean_rewards, dtype=float).ravel()
    anchor = np.asarray(anchor, dtype=float).ravel()
    alphas = np.asarray(alphas, dtype=float).ravel()
    if not (r.size == anchor.size == alphas.size):
        raise EstimatorError("mean_rewards, anchor and alphas must share a length")
    if np.any(alphas == 0.0):
        raise EstimatorError("alphas must be nonzero")
    mat = np.outer(np.ones(r.size), anchor) + np.diag(alphas)
    if np.linalg.cond(mat) > cond_limit:
        raise EstimatorError("estimation system is numerically singular")
    return np.linalg.solve(mat, r)
