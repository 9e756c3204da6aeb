"""Bounded polyhedral arm sets and their geometry.

A Polyhedron is the set {x : A x <= b}. Construction verifies boundedness, so
every stored instance is a legitimate arm set; degenerate inputs fail loudly
with distinct errors. All predicates share one absolute tolerance (1e-9).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from . import lp

DEFAULT_TOL = 1e-9
DEDUP_TOL = 1e-7

# Guard rails for the brute-force vertex enumeration.
MAX_ENUM_DIM = 12
MAX_ENUM_COMBOS = 1_000_000


class PolytopeError(Exception):
    pass


class InfeasiblePolyhedronError(PolytopeError):
    """The constraint system has no solution at all."""


class UnboundedPolyhedronError(PolytopeError):
    """Some coordinate direction is unbounded."""


class DegenerateReachError(PolytopeError):
    """Anchor sits on (or outside) the boundary facing the requested axis."""


class DegenerateAnchorError(PolytopeError):
    """No interior point with positive reach in every axis direction."""


class TiedOptimumError(PolytopeError):
    """Two distinct vertices attain the maximum; the gap is zero."""


class VertexEnumerationError(PolytopeError):
    """Combinatorial blow-up guard tripped."""


@dataclass
class Polyhedron:
    """Arm set {x : A x <= b}; bounded by construction."""

    A: np.ndarray
    b: np.ndarray
    _vertex_cache: Optional["VertexSet"] = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).ravel()
        m, n = self.A.shape
        if m != self.b.size:
            raise ValueError(f"A has {m} rows but b has {self.b.size} entries")
        if n < 1:
            raise ValueError("polyhedron needs at least one dimension")
        if m < n + 1:
            raise UnboundedPolyhedronError(
                f"{m} halfspaces cannot bound {n}-dimensional space (need >= {n + 1})"
            )
        if not check_bounded(self.A, self.b):
            raise UnboundedPolyhedronError("polyhedron is unbounded")

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.A.shape[0]

    def vertex_set(self) -> "VertexSet":
        if self._vertex_cache is None:
            self._vertex_cache = enumerate_vertices(self)
        return self._vertex_cache


@dataclass
class ExplorationBasis:
    """Anchor plus the N boundary arms anchor + reach_n * e_n."""

    anchor: np.ndarray
    reaches: np.ndarray
    arms: np.ndarray  # shape (N, N); row n is the arm along axis n


@dataclass
class VertexSet:
    vertices: np.ndarray  # shape (V, N)
    values: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.vertices.shape[0]


def contains(poly: Polyhedron, x, tol: float = DEFAULT_TOL) -> bool:
    """True iff A x <= b + tol componentwise."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != poly.dim:
        raise ValueError(f"point has dimension {x.size}, polyhedron has {poly.dim}")
    return bool(np.all(poly.A @ x <= poly.b + tol))


def check_bounded(a, b) -> bool:
    """True iff max +-x_n over {A x <= b} is bounded for every axis n.

    Accepts the raw (A, b) system so that unbounded candidates, which can
    never become Polyhedron instances, can still be tested. Raises
    InfeasiblePolyhedronError if the system has no solution, which is a
    different defect than unboundedness.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    n = a.shape[1]
    for axis in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[axis] = sign
            sol = lp.simplex_maximize(c, a, b)
            if sol.status == lp.INFEASIBLE:
                raise InfeasiblePolyhedronError("constraint system is infeasible")
            if sol.status == lp.UNBOUNDED:
                return False
    return True


def axis_reach(poly: Polyhedron, anchor, n: int, tol: float = DEFAULT_TOL) -> float:
    """Largest z >= 0 with anchor + z e_n inside the polyhedron (ratio test)."""
    anchor = np.asarray(anchor, dtype=float).ravel()
    if not 0 <= n < poly.dim:
        raise ValueError(f"axis {n} out of range for dimension {poly.dim}")
    if not contains(poly, anchor, tol):
        raise DegenerateReachError("anchor lies outside the polyhedron")
    slack = poly.b - poly.A @ anchor
    rising = poly.A[:, n] > tol
    if not rising.any():
        # cannot happen for a bounded polyhedron; defensive
        raise UnboundedPolyhedronError(f"direction +e_{n} is unbounded")
    reach = float((slack[rising] / poly.A[rising, n]).min())
    if reach <= tol:
        raise DegenerateReachError(
            f"anchor sits on the boundary facing +e_{n} (reach {reach:.3e})"
        )
    return reach


def interior_anchor(poly: Polyhedron, tol: float = DEFAULT_TOL):
    """Anchor maximizing the smallest axis-aligned distance to the boundary.

    Solves, over (x, y, alpha):
        max alpha  s.t.  A x <= b,  y_i >= alpha,  A(x +- y_i e_i) <= b,
    with non-strict inequalities and a positivity post-check on alpha.
    Returns (anchor, reaches); reaches are the y_i of the optimum.
    """
    a, b = poly.A, poly.b
    m, n = a.shape
    nv = 2 * n + 1  # variables: x (n), y (n), alpha
    rows = [np.hstack([a, np.zeros((m, n + 1))])]
    rhs = [b]
    alpha_minus_y = np.zeros((n, nv))
    for i in range(n):
        alpha_minus_y[i, n + i] = -1.0
        alpha_minus_y[i, 2 * n] = 1.0
    rows.append(alpha_minus_y)
    rhs.append(np.zeros(n))
    for i in range(n):
        for sgn in (1.0, -1.0):
            block = np.hstack([a, np.zeros((m, n + 1))])
            block[:, n + i] = sgn * a[:, i]
            rows.append(block)
            rhs.append(b)
    sol = lp.simplex_maximize(
        np.eye(nv)[-1], np.vstack(rows), np.concatenate(rhs)
    )
    if sol.status != lp.OPTIMAL:
        raise DegenerateAnchorError(f"anchor program ended with status {sol.status}")
    alpha = sol.point[2 * n]
    if alpha <= tol:
        raise DegenerateAnchorError(
            f"no interior in all axis directions (alpha {alpha:.3e})"
        )
    return sol.point[:n].copy(), sol.point[n : 2 * n].copy()


def exploration_basis(
    poly: Polyhedron, use_origin: bool, tol: float = DEFAULT_TOL
) -> ExplorationBasis:
    """Build the exploration arm set: anchor + (maximal reach along e_n) e_n.

    With use_origin the anchor is 0 and each arm is the farthest feasible
    point along +e_n. Otherwise the anchor comes from interior_anchor and the
    anchor-program reaches are stretched out to the boundary.
    """
    n = poly.dim
    if use_origin:
        anchor = np.zeros(n)
        if not contains(poly, anchor, tol):
            raise DegenerateReachError("origin is not a member of the polyhedron")
    else:
        anchor, _ = interior_anchor(poly, tol)
    reaches = np.array([axis_reach(poly, anchor, k, tol) for k in range(n)])
    arms = anchor[None, :] + np.diag(reaches)
    return ExplorationBasis(anchor=anchor, reaches=reaches, arms=arms)


def enumerate_vertices(
    poly: Polyhedron, tol: float = DEFAULT_TOL, dedup_tol: float = DEDUP_TOL
) -> VertexSet:
    """All basic feasible solutions, deduplicated. Desk-scale oracle.

    Every N-subset of rows with a nonsingular submatrix is solved as an
    equality system; solutions feasible within tol are kept.
    """
    a, b = poly.A, poly.b
    m, n = a.shape
    n_combos = math.comb(m, n)
    if n > MAX_ENUM_DIM or n_combos > MAX_ENUM_COMBOS:
        raise VertexEnumerationError(
            f"enumeration guard: dim {n}, C({m},{n}) = {n_combos}"
        )
    combos = np.array(list(combinations(range(m), n)))
    subs = a[combos]
    with np.errstate(all="ignore"):
        dets = np.linalg.det(subs)
    scale = np.abs(subs).max(axis=(1, 2))
    nonsingular = np.abs(dets) > 1e-12 * np.maximum(scale, 1.0) ** n
    if not nonsingular.any():
        return VertexSet(vertices=np.zeros((0, n)))
    sols = np.linalg.solve(subs[nonsingular], b[combos[nonsingular]][..., None])[..., 0]
    feasible = sols[np.all(sols @ a.T <= b + tol, axis=1)]
    kept: list[np.ndarray] = []
    for v in feasible[np.lexsort(feasible.T[::-1])]:
        if not kept or np.max(np.abs(np.array(kept) - v), axis=1).min() > dedup_tol:
            kept.append(v)
    return VertexSet(vertices=np.array(kept) if kept else np.zeros((0, n)))


def gap(poly: Polyhedron, theta, tol: float = DEFAULT_TOL):
    """Gap between the best and second-best vertex under theta.

    Returns (delta, best, second). A tie for the best vertex (delta <= tol)
    raises TiedOptimumError; experiments require a strictly unique optimum.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    vs = poly.vertex_set()
    if len(vs) < 2:
        raise TiedOptimumError("need at least two distinct vertices")
    values = vs.vertices @ theta
    order = np.argsort(values)[::-1]
    best, second = vs.vertices[order[0]], vs.vertices[order[1]]
    delta = float(values[order[0]] - values[order[1]])
    if delta <= tol:
        raise TiedOptimumError(f"tied optimum (gap {delta:.3e})")
    return delta, best.copy(), second.copy()


def max_l1_norm(poly: Polyhedron) -> float:
    """h = max ||x||_1 over the polyhedron (attained at a vertex)."""
    vs = poly.vertex_set()
    return float(np.abs(vs.vertices).sum(axis=1).max())


# ---------------------------------------------------------------------------
# Generators and serialization


def hypercube(n: int, low: float = 0.0, high: float = 1.0) -> Polyhedron:
    """Axis-aligned cube {low <= x_i <= high}."""
    if high <= low:
        raise ValueError("high must exceed low")
    a = np.vstack([np.eye(n), -np.eye(n)])
    b = np.concatenate([np.full(n, high), np.full(n, -low)])
    return Polyhedron(a, b)


def standard_simplex(n: int, scale: float = 1.0) -> Polyhedron:
    """{x >= 0, sum x <= scale}."""
    a = np.vstack([-np.eye(n), np.ones((1, n))])
    b = np.concatenate([np.zeros(n), [scale]])
    return Polyhedron(a, b)


def random_polytope(
    n: int, m: int, seed: int, origin_interior: bool = True
) -> Polyhedron:
    """Random bounded polyhedron: a box plus random extra halfspaces.

    The 2n box rows guarantee boundedness; extra rows are random unit normals
    with positive offsets so the origin stays strictly interior. With
    origin_interior=False the whole set is translated by a random shift.
    """
    if m < 2 * n:
        raise ValueError(f"need m >= 2n rows for the bounding box (m={m}, n={n})")
    rng = np.random.default_rng(seed)
    half = rng.uniform(0.6, 1.6, size=2 * n)
    a = np.vstack([np.eye(n), -np.eye(n)])
    b = half.copy()
    extra = m - 2 * n
    if extra > 0:
        normals = rng.normal(size=(extra, n))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = rng.uniform(0.25, 1.2, size=extra)
        a = np.vstack([a, normals])
        b = np.concatenate([b, offsets])
    if not origin_interior:
        shift = rng.uniform(-2.0, 2.0, size=n)
        b = b + a @ shift
    return Polyhedron(a, b)


def load_polyhedron(path) -> Polyhedron:
    """Read {"A": [[...]], "b": [...]} from JSON; validates on construction."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "A" not in data or "b" not in data:
        raise ValueError(f"{path}: expected a JSON object with keys 'A' and 'b'")
    return Polyhedron(np.array(data["A"], dtype=float), np.array(data["b"], dtype=float))


def save_polyhedron(poly: Polyhedron, path) -> None:
    with open(path, "w") as fh:
        json.dump({"A": poly.A.tolist(), "b": poly.b.tolist()}, fh, indent=2)
        fh.write("\n")
