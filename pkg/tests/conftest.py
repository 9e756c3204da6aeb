import numpy as np
import pytest

from polybandits import Polyhedron, hypercube, random_polytope


@pytest.fixture
def unit_square() -> Polyhedron:
    return hypercube(2)


@pytest.fixture
def centered_square() -> Polyhedron:
    return hypercube(2, -1.0, 1.0)


@pytest.fixture
def unit_cube() -> Polyhedron:
    return hypercube(3)


@pytest.fixture
def triangle() -> Polyhedron:
    # {x >= 0, y >= 0, x + y <= 2}
    return Polyhedron([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 2.0])


def make_random_poly(seed: int, max_n: int = 5, max_m: int = 12, origin_interior=True):
    """Deterministic random instance family used across oracle checks."""
    n = 2 + seed % (max_n - 1)
    m = min(max_m, 2 * n + (seed % 3))
    return random_polytope(n, m, seed, origin_interior=origin_interior)


def bisection_reach(poly: Polyhedron, anchor, axis: int, iters: int = 200) -> float:
    """Line-search oracle for the axis reach, independent of the ratio test.

    Probes the exact boundary (zero membership slack) so the value is
    comparable to the ratio test at 1e-9."""
    from polybandits import contains

    anchor = np.asarray(anchor, dtype=float)
    step = np.zeros(poly.dim)
    step[axis] = 1.0
    hi = 1.0
    while contains(poly, anchor + hi * step, tol=0.0) and hi < 1e9:
        hi *= 2.0
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if contains(poly, anchor + mid * step, tol=0.0):
            lo = mid
        else:
            hi = mid
    return lo
