"""Jitted inner loops for the per-step baseline policies.

These are pure functions over the policies' state arrays; the policy classes
own all semantics. Kept separate so the hot paths stay readable and the
compiled code is cached across runs.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def ucb_normal_choose(counts, sums, sumsq, total_plays):
    """Returns (arm, forced, block) for the variance-scaled UCB step."""
    t = total_plays + 1
    if t > 1:
        need = int(math.ceil(8.0 * math.log(t)))
        if need < 1:
            need = 1
    else:
        need = 1
    best = -1
    best_count = 0
    for j in range(counts.size):
        if counts[j] < need and (best < 0 or counts[j] < best_count):
            best = j
            best_count = counts[j]
    if best >= 0:
        if best_count == 0:
            return best, 1, 1
        return best, 1, int(need - best_count)
    log_prev = math.log(t - 1)
    best = 0
    best_index = -np.inf
    for j in range(counts.size):
        n = counts[j]
        mean = sums[j] / n
        var = sumsq[j] - n * mean * mean
        if var < 0.0:
            var = 0.0
        denom = n - 1 if n > 1 else 1
        index = mean + math.sqrt(16.0 * (var / denom) * log_prev / n)
        if index > best_index:
            best_index = index
            best = j
    return best, 0, 1


@njit(cache=True)
def ridge_choose(values, widths, radius):
    best = 0
    best_index = -np.inf
    for i in range(values.size):
        w = widths[i]
        if w < 0.0:
            w = 0.0
        index = values[i] + radius * math.sqrt(w)
        if index > best_index:
            best_index = index
            best = i
    return best


@njit(cache=True)
def ridge_update(inv, vertices, bvec, values, widths, x, reward):
    """Rank-one update of V^-1 with per-vertex value/width caches.

    u_i = x_i' V^-1 x is read off the static vertex matrix, so the update is
    one matvec plus vector work. Returns ln(denom) for the determinant track.
    """
    n = x.size
    k = values.size
    wx = inv @ x
    s = 0.0
    wxb = 0.0
    for j in range(n):
        s += x[j] * wx[j]
        wxb += wx[j] * bvec[j]
    denom = 1.0 + s
    gain = (reward - wxb) / denom
    u = vertices @ wx
    for i in range(k):
        values[i] += u[i] * gain
        widths[i] -= u[i] * u[i] / denom
    for a in range(n):
        for b in range(n):
            inv[a, b] -= wx[a] * wx[b] / denom
        bvec[a] += reward * x[a]
    return math.log(denom)
