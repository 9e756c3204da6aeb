"""Dense two-phase simplex solver for small linear programs.

Maximizes c'x over {x : A_ub x <= b_ub, A_eq x = b_eq} with free variables,
using the standard nonnegative split x = u - v. Bland's smallest-index rule
makes the pivot sequence deterministic and cycle-free on degenerate inputs.
Optimal points are purified to basic solutions of the original system, so the
returned point is always a vertex of the feasible set.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

if TYPE_CHECKING:
    from .polytope import Polyhedron

# Pivot-eligibility threshold; feasibility/activity tolerance is 1e-9 to match
# the geometric tolerance policy used across the package.
PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"

_MAX_PIVOTS = 50_000


class SimplexError(RuntimeError):
    """Solver could not certify a result (numerical breakdown)."""


@dataclass
class LpProblem:
    """Maximize objective'x over a polyhedron, optionally with equality rows."""

    objective: np.ndarray
    poly: "Polyhedron"
    a_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None


@dataclass
class LpSolution:
    point: Optional[np.ndarray]
    value: float
    status: str
    active_set: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def maximize(problem: LpProblem) -> LpSolution:
    """Solve an LpProblem; deterministic (same input, same vertex)."""
    return simplex_maximize(
        problem.objective, problem.poly.A, problem.poly.b, problem.a_eq, problem.b_eq
    )


def simplex_maximize(c, a_ub, b_ub, a_eq=None, b_eq=None) -> LpSolution:
    """Maximize c'x s.t. a_ub x <= b_ub and a_eq x = b_eq, x free.

    Returns an optimal basic feasible solution (vertex) when one exists,
    otherwise a solution object with status "unbounded" or "infeasible".
    """
    c = np.asarray(c, dtype=float).ravel()
    a_ub = np.asarray(a_ub, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float).ravel()
    n = c.size
    if a_ub.ndim != 2 or a_ub.shape != (b_ub.size, n):
        raise ValueError(
            f"inequality system has shape {a_ub.shape}, expected ({b_ub.size}, {n})"
        )
    if a_eq is not None:
        a_eq = np.asarray(a_eq, dtype=float).reshape(-1, n)
        b_eq = np.asarray(b_eq, dtype=float).ravel()
        if a_eq.shape[0] != b_eq.size:
            raise ValueError("equality rows and right-hand sides disagree")
    m_ub = b_ub.size
    m_eq = 0 if a_eq is None else b_eq.size
    m = m_ub + m_eq

    # Standard form on z = [u, v, s] >= 0 with x = u - v.
    n_struct = 2 * n + m_ub
    body = np.zeros((m, n_struct))
    body[:m_ub, :n] = a_ub
    body[:m_ub, n : 2 * n] = -a_ub
    body[:m_ub, 2 * n :] = np.eye(m_ub)
    rhs = b_ub.copy()
    if m_eq:
        body[m_ub:, :n] = a_eq
        body[m_ub:, n : 2 * n] = -a_eq
        rhs = np.concatenate([rhs, b_eq])

    flip = rhs < 0
    body[flip] *= -1.0
    rhs[flip] = -rhs[flip]

    # Slack serves as initial basis only for unflipped inequality rows.
    needs_art = np.ones(m, dtype=bool)
    basis = np.full(m, -1, dtype=int)
    for i in range(m_ub):
        if not flip[i]:
            basis[i] = 2 * n + i
            needs_art[i] = False
    art_rows = np.where(needs_art)[0]
    n_art = art_rows.size
    tableau = np.hstack([body, np.zeros((m, n_art)), rhs[:, None]])
    for k, i in enumerate(art_rows):
        tableau[i, n_struct + k] = 1.0
        basis[i] = n_struct + k
    n_total = n_struct + n_art

    # Phase 1: drive the artificial variables to zero.
    if n_art:
        cost1 = np.zeros(n_total + 1)
        cost1[n_struct:n_total] = -1.0
        red = _reduced_costs(cost1, tableau, basis)
        status = _pivot_loop(tableau, basis, red, allowed=n_total)
        if status == UNBOUNDED:  # cannot happen: phase-1 objective is bounded
            raise SimplexError("phase 1 reported unbounded")
        # red[-1] accumulates the negated objective, i.e. the artificial mass.
        if red[-1] > FEAS_TOL:
            return LpSolution(None, float("nan"), INFEASIBLE, ())
        tableau, basis = _expel_artificials(tableau, basis, n_struct)

    # Phase 2: the actual objective, artificial columns barred from entering.
    cost2 = np.zeros(tableau.shape[1])
    cost2[:n] = c
    cost2[n : 2 * n] = -c
    red = _reduced_costs(cost2, tableau, basis)
    status = _pivot_loop(tableau, basis, red, allowed=n_struct)
    if status == UNBOUNDED:
        return LpSolution(None, float("nan"), UNBOUNDED, ())

    z = np.zeros(tableau.shape[1] - 1)
    z[basis] = tableau[:, -1]
    x = z[:n] - z[n : 2 * n]
    x, active = _purify_to_vertex(x, c, a_ub, b_ub, a_eq, b_eq)
    return LpSolution(x, float(c @ x), OPTIMAL, active)


def _reduced_costs(cost: np.ndarray, tableau: np.ndarray, basis: np.ndarray) -> np.ndarray:
    red = cost.copy()
    for i, j in enumerate(basis):
        if red[j] != 0.0:
            red -= red[j] * tableau[i]
    return red


def _pivot_loop(tableau, basis, red, allowed: int) -> str:
    """Bland's rule: smallest-index entering column, smallest basic leaving."""
    for _ in range(_MAX_PIVOTS):
        enter = -1
        for j in range(allowed):
            if red[j] > PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return OPTIMAL
        col = tableau[:, enter]
        pos = col > PIVOT_TOL
        if not pos.any():
            return UNBOUNDED
        ratios = np.full(col.shape, np.inf)
        ratios[pos] = tableau[pos, -1] / col[pos]
        best = ratios.min()
        tied = np.where(ratios <= best + 1e-12 * (1.0 + abs(best)))[0]
        leave = tied[np.argmin(basis[tied])]
        _pivot(tableau, red, leave, enter)
        basis[leave] = enter
    raise SimplexError("pivot limit exceeded")


def _pivot(tableau, red, row, col):
    tableau[row] /= tableau[row, col]
    piv = tableau[row]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, piv)
    red -= red[col] * piv


def _expel_artificials(tableau, basis, n_struct):
    """Pivot basic artificials onto structural columns; drop redundant rows."""
    keep = np.ones(tableau.shape[0], dtype=bool)
    for i in range(tableau.shape[0]):
        if basis[i] < n_struct:
            continue
        j = next(
            (k for k in range(n_struct) if abs(tableau[i, k]) > PIVOT_TOL), None
        )
        if j is None:
            keep[i] = False  # redundant constraint
            continue
        dummy = np.zeros(tableau.shape[1])
        _pivot(tableau, dummy, i, j)
        basis[i] = j
    return tableau[keep], basis[keep]


def _null_space(rows: np.ndarray, n: int) -> np.ndarray:
    if rows.size == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(rows.reshape(-1, n))
    tol = (s[0] if s.size else 0.0) * 1e-10 + 1e-13
    rank = int((s > tol).sum())
    return vt[rank:].T


def _purify_to_vertex(x, c, a_ub, b_ub, a_eq, b_eq):
    """Walk objective-neutral directions until n independent rows are active.

    The split-variable simplex can stop on a face interior (a vertex of the
    lifted problem that is not a vertex of the original system); at an optimum
    every feasible null direction of the active rows is objective-neutral, so
    sliding along one preserves the value while gaining an active row.
    """
    n = x.size
    eq_rows = a_eq if a_eq is not None else np.zeros((0, n))
    for _ in range(n + 2):
        resid = b_ub - a_ub @ x
        act = np.where(np.abs(resid) <= FEAS_TOL)[0]
        rows = np.vstack([eq_rows, a_ub[act]])
        if rows.shape[0] and _rank(rows) >= n:
            break
        null = _null_space(np.vstack([rows, c[None, :]]), n)
        if null.shape[1] == 0:
            # Rare: c independent of the active rows; ascend instead (can
            # only happen within tolerance noise of the optimum).
            null = _null_space(rows, n)
            if null.shape[1] == 0:
                break
            d = null[:, 0]
            if c @ d < 0:
                d = -d
        else:
            d = null[:, 0]
        nz = np.nonzero(np.abs(d) > 1e-12)[0]
        if nz.size == 0:
            break
        if d[nz[0]] < 0:
            d = -d
        t = _ray_length(x, d, a_ub, b_ub)
        if not np.isfinite(t):
            t = _ray_length(x, -d, a_ub, b_ub)
            if not np.isfinite(t):
                raise SimplexError("optimal face is unbounded; no vertex to report")
            d = -d
        if t <= 0.0:
            break
        x = x + t * d

    resid = b_ub - a_ub @ x
    act = np.where(np.abs(resid) <= FEAS_TOL)[0]
    snapped = _snap_to_active(x, act, a_ub, b_ub, eq_rows, b_eq)
    if snapped is not None:
        x = snapped
        act = np.where(np.abs(b_ub - a_ub @ x) <= FEAS_TOL)[0]
    return x, tuple(int(i) for i in act)


def _ray_length(x, d, a_ub, b_ub):
    speed = a_ub @ d
    ahead = speed > 1e-12
    if not ahead.any():
        return np.inf
    return float(((b_ub[ahead] - a_ub[ahead] @ x) / speed[ahead]).min())


def _rank(rows: np.ndarray) -> int:
    s = np.linalg.svd(rows, compute_uv=False)
    tol = (s[0] if s.size else 0.0) * 1e-10 + 1e-13
    return int((s > tol).sum())


def _snap_to_active(x, act, a_ub, b_ub, eq_rows, b_eq):
    """Re-solve the square active system so equal active sets give bit-equal
    vertices regardless of the pivot path taken to reach them."""
    n = x.size
    cand_rows = [eq_rows[i] for i in range(eq_rows.shape[0])] + [a_ub[i] for i in act]
    cand_rhs = ([] if b_eq is None else list(np.asarray(b_eq, dtype=float))) + [
        float(b_ub[i]) for i in act
    ]
    sel_rows, sel_rhs = [], []
    basis_q: list[np.ndarray] = []
    for row, val in zip(cand_rows, cand_rhs):
        r = row.astype(float).copy()
        for q in basis_q:
            r -= (r @ q) * q
        norm = np.linalg.norm(r)
        if norm > 1e-9 * max(1.0, np.linalg.norm(row)):
            basis_q.append(r / norm)
            sel_rows.append(row)
            sel_rhs.append(val)
            if len(sel_rows) == n:
                break
    if len(sel_rows) != n:
        return None
    try:
        pt = np.linalg.solve(np.array(sel_rows), np.array(sel_rhs))
    except np.linalg.LinAlgError:
        return None
    if np.max(a_ub @ pt - b_ub, initial=0.0) > 1e-7:
        return None
    return pt
