"""Stochastic linear bandits over bounded polyhedral arm sets.

Phased exploration/exploitation policies with component-wise estimation, a
self-contained simplex solver for the greedy step, optimism baselines, and a
seeded experiment harness for regret simulations.
"""

from .env import Environment, NoiseModel, run_stream
from .estimators import (
    ParameterEstimate,
    estimate_difference,
    estimate_linear_system,
    estimate_origin,
)
from .harness import (
    ExperimentConfig,
    RegretTrace,
    lower_bound_curve,
    run_experiment,
    summarize,
)
from .lp import LpProblem, LpSolution, maximize, simplex_maximize
from .policies import (
    Decision,
    ExtremalUcbPolicy,
    GeneralSeePolicy,
    ImprovedSee2Policy,
    LinUcbPolicy,
    PolicyState,
    PolyLinPolicy,
    See2Policy,
    SeePolicy,
    SelfNormalizedPolicy,
    make_policy,
)
from .polytope import (
    ExplorationBasis,
    Polyhedron,
    VertexSet,
    axis_reach,
    check_bounded,
    contains,
    enumerate_vertices,
    exploration_basis,
    gap,
    hypercube,
    interior_anchor,
    load_polyhedron,
    random_polytope,
    save_polyhedron,
    standard_simplex,
)

__version__ = "0.1.0"
