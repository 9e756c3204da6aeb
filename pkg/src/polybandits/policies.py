"""Sequential decision policies over polyhedral arm sets.

The phased policies alternate exploration intervals (fixed boundary arms fed
to a component-wise estimator) with exploitation intervals (a greedily
selected vertex played for a long block). Baseline index policies treat the
vertex set as a finite arm pool and emit one-step decisions.

Driver protocol: call next_decision(), play the arm block_length times, then
call observe(decision, rewards) with the block's rewards (rewards are only
required when decision.needs_reward). Policies never learn from exploitation
rewards; the harness may skip sampling them entirely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lp
from . import _kernels
from .estimators import ParameterEstimate, estimate_difference, estimate_origin
from .polytope import (
    DegenerateReachError,
    ExplorationBasis,
    Polyhedron,
    axis_reach,
    exploration_basis,
)

EXPLORE = "explore"
EXPLOIT = "exploit"

# Exploit blocks are clamped here to avoid overflow; the horizon truncates
# far earlier in any real run.
BLOCK_CAP = 2**62

ANCHOR = -1  # exploration-slot marker for the anchor arm


class PolicyError(Exception):
    pass


@dataclass(slots=True)
class Decision:
    """One block of identical plays. Exploit blocks of the phased policies
    carry needs_reward=False: their rewards are observed and discarded."""

    arm: np.ndarray
    phase_tag: str
    block_length: int
    needs_reward: bool = True


@dataclass
class PolicyState:
    """Cycle bookkeeping shared by the phased policies."""

    cycle: int
    phase: str
    phase_position: int
    start_cycle: int
    basis: ExplorationBasis
    estimate: ParameterEstimate
    epsilon: Optional[float] = None
    kappa: Optional[float] = None
    a_const: Optional[float] = None
    delta_hat: Optional[float] = None
    greedy_arm: Optional[np.ndarray] = None


def block_floor(exponent: float) -> int:
    """floor(2^exponent) with exact arithmetic at integer exponents."""
    if exponent >= 62:
        return BLOCK_CAP
    if float(exponent).is_integer():
        e = int(exponent)
        return 1 << e if e >= 0 else 0
    return int(math.floor(2.0**exponent))


class CyclePolicy:
    """Shared explore/estimate/exploit machinery for the phased policies.

    Subclasses define the exploration plan for a cycle, the estimator, and
    the exploitation block length.
    """

    name = "cycle"

    def __init__(self, poly: Polyhedron, basis: ExplorationBasis, start_cycle: int = 0):
        if start_cycle < 0:
            raise PolicyError("start_cycle must be nonnegative")
        self.poly = poly
        self.state = PolicyState(
            cycle=start_cycle,
            phase=EXPLORE,
            phase_position=0,
            start_cycle=start_cycle,
            basis=basis,
            estimate=ParameterEstimate(poly.dim),
        )
        self._plan: list[tuple[int, int]] = []
        self._pending: Optional[Decision] = None
        self._begin_cycle()

    # -- subclass hooks ------------------------------------------------
    def _exploration_plan(self, c: int) -> list[tuple[int, int]]:
        """List of (slot, plays); slot is an axis index or ANCHOR."""
        raise NotImplementedError

    def _estimate(self) -> np.ndarray:
        raise NotImplementedError

    def _exploit_length(self, c: int) -> int:
        raise NotImplementedError

    def _on_cycle_start(self) -> None:
        """Hook for policies that re-center exploration between cycles."""

    # -- driver protocol -----------------------------------------------
    def next_decision(self) -> Decision:
        if self._pending is None:
            self._pending = self._build_decision()
        return self._pending

    def observe(self, decision: Decision, rewards: Optional[np.ndarray] = None) -> None:
        if decision is not self._pending:
            raise PolicyError("observe() must receive the pending decision")
        st = self.state
        if decision.phase_tag == EXPLORE:
            if rewards is None or len(rewards) != decision.block_length:
                raise PolicyError("exploration block needs one reward per play")
            slot, _ = self._plan[st.phase_position]
            if slot == ANCHOR:
                for r in rewards:
                    st.estimate.update_anchor(float(r))
            else:
                for r in rewards:
                    st.estimate.update_axis(slot, float(r))
            st.phase_position += 1
            if st.phase_position == len(self._plan):
                st.phase = EXPLOIT
        else:
            st.cycle += 1
            st.phase = EXPLORE
            st.phase_position = 0
            self._begin_cycle()
        self._pending = None

    # -- internals -------------------------------------------------------
    def _begin_cycle(self) -> None:
        self._on_cycle_start()
        self._plan = self._exploration_plan(self.state.cycle)

    def _build_decision(self) -> Decision:
        st = self.state
        if st.phase == EXPLORE:
            slot, plays = self._plan[st.phase_position]
            arm = st.basis.anchor if slot == ANCHOR else st.basis.arms[slot]
            return Decision(arm=arm, phase_tag=EXPLORE, block_length=plays)
        theta_hat = self._estimate()
        sol = lp.simplex_maximize(theta_hat, self.poly.A, self.poly.b)
        if not sol.ok:
            raise PolicyError(f"greedy step failed with LP status {sol.status}")
        st.greedy_arm = sol.point
        length = max(1, self._exploit_length(st.cycle))
        return Decision(
            arm=st.greedy_arm, phase_tag=EXPLOIT, block_length=length, needs_reward=False
        )


class SeePolicy(CyclePolicy):
    """Explore each basis arm (2c+1) times, then exploit for
    floor(2^(c^2/(1+epsilon))) plays; epsilon > 0 trades exploration volume
    against exploitation length."""

    name = "see"

    def __init__(self, poly: Polyhedron, epsilon: float = 0.3, start_cycle: int = 0):
        if epsilon <= 0:
            raise PolicyError("epsilon must be positive")
        basis = exploration_basis(poly, use_origin=True)
        super().__init__(poly, basis, start_cycle)
        self.state.epsilon = epsilon

    def _exploration_plan(self, c):
        return [(n, 2 * c + 1) for n in range(self.poly.dim)]

    def _estimate(self):
        return estimate_origin(self.state.estimate, self.state.basis)

    def _exploit_length(self, c):
        return block_floor(c * c / (1.0 + self.state.epsilon))


class See2Policy(SeePolicy):
    """SEE with exploitation blocks of 2^c: shorter commitments, more cycles,
    faster concentration of realized regret."""

    name = "see2"

    def __init__(self, poly: Polyhedron, start_cycle: int = 0):
        super().__init__(poly, epsilon=1.0, start_cycle=start_cycle)
        self.state.epsilon = None

    def _exploit_length(self, c):
        return BLOCK_CAP if c >= 62 else 1 << c


class PolyLinPolicy(CyclePolicy):
    """One exploration play per arm per cycle; exploitation length adapts to
    the estimated gap through kappa(c) = a * delta_hat(c) / 2 with
    a = min_n reach_n^2 / R^2. Requires the sub-Gaussian parameter R."""

    name = "polylin"

    def __init__(self, poly: Polyhedron, R: float = 1.0, start_cycle: int = 1):
        if R <= 0:
            raise PolicyError("R must be positive")
        basis = exploration_basis(poly, use_origin=True)
        super().__init__(poly, basis, start_cycle)
        self.vertices = poly.vertex_set().vertices
        self.state.a_const = float((basis.reaches**2).min() / R**2)

    def _exploration_plan(self, c):
        return [(n, 1) for n in range(self.poly.dim)]

    def _estimate(self):
        return estimate_origin(self.state.estimate, self.state.basis)

    def _exploit_length(self, c):
        # Called once the greedy arm is fixed; the estimated gap against the
        # second-best vertex sets the adaptive exponent for this cycle.
        st = self.state
        values = self.vertices @ st.estimate.theta_hat
        best_val = float(st.estimate.theta_hat @ st.greedy_arm)
        others = np.abs(self.vertices - st.greedy_arm).max(axis=1) > 1e-9
        st.delta_hat = best_val - float(values[others].max())
        st.kappa = st.a_const * st.delta_hat / 2.0
        if st.delta_hat <= 0:  # tied estimate: no adaptive commitment
            return 1
        return max(1, block_floor(st.kappa * c))


class GeneralSeePolicy(CyclePolicy):
    """SEE for arm sets that need not contain the origin: exploration plays
    an interior anchor (2c+1 times) and the stretched arms around it, and the
    estimator averages reward differences against the anchor."""

    name = "general_see"

    def __init__(
        self,
        poly: Polyhedron,
        epsilon: float = 0.3,
        start_cycle: int = 0,
        exploit_schedule: str = "see",
    ):
        if epsilon <= 0:
            raise PolicyError("epsilon must be positive")
        if exploit_schedule not in ("see", "see2"):
            raise PolicyError("exploit_schedule must be 'see' or 'see2'")
        basis = exploration_basis(poly, use_origin=False)
        super().__init__(poly, basis, start_cycle)
        self.state.epsilon = epsilon
        self.exploit_schedule = exploit_schedule

    def _exploration_plan(self, c):
        return [(ANCHOR, 2 * c + 1)] + [(n, 2 * c + 1) for n in range(self.poly.dim)]

    def _estimate(self):
        return estimate_difference(self.state.estimate, self.state.basis)

    def _exploit_length(self, c):
        if self.exploit_schedule == "see2":
            return BLOCK_CAP if c >= 62 else 1 << c
        return block_floor(c * c / (1.0 + self.state.epsilon))


class ImprovedSee2Policy(GeneralSeePolicy):
    """SEE2 with adaptive exploration: each cycle re-centers the anchor at
    the previous greedy vertex shifted inward by lam toward the base anchor,
    so exploration arms hug the promising corner. The estimator restarts
    whenever the anchor actually moves (with lam=1 the anchor never moves and
    this is exactly the anchored SEE2)."""

    name = "improved_see2"

    def __init__(self, poly: Polyhedron, lam: float = 0.1, start_cycle: int = 0):
        if not 0.0 < lam <= 1.0:
            raise PolicyError("shift parameter lam must be in (0, 1]")
        self.lam = lam
        self.base_anchor: Optional[np.ndarray] = None
        super().__init__(poly, epsilon=1.0, start_cycle=start_cycle, exploit_schedule="see2")
        self.base_anchor = self.state.basis.anchor.copy()

    def _on_cycle_start(self):
        if self.base_anchor is None or self.state.greedy_arm is None:
            return
        target = self.state.greedy_arm + self.lam * (self.base_anchor - self.state.greedy_arm)
        try:
            basis = self._basis_at(target)
        except DegenerateReachError:
            basis = self._basis_at(self.base_anchor)
        if not np.array_equal(basis.anchor, self.state.basis.anchor):
            self.state.basis = basis
            self.state.estimate = ParameterEstimate(self.poly.dim)

    def _basis_at(self, anchor: np.ndarray) -> ExplorationBasis:
        reaches = np.array(
            [axis_reach(self.poly, anchor, n) for n in range(self.poly.dim)]
        )
        return ExplorationBasis(
            anchor=anchor.copy(), reaches=reaches, arms=anchor[None, :] + np.diag(reaches)
        )


# ---------------------------------------------------------------------------
# Baselines over the vertex set


class VertexIndexPolicy:
    """Base for index policies treating each vertex as an arm.

    Decisions are single plays except where a policy explicitly batches
    deterministic forced sampling; rewards are always consumed.
    """

    name = "vertex_index"

    def __init__(self, poly: Polyhedron):
        self.poly = poly
        self.vertices = poly.vertex_set().vertices
        self.n_arms = self.vertices.shape[0]
        if self.n_arms < 2:
            raise PolicyError("need at least two vertices")
        self.total_plays = 0
        self._pending: Optional[Decision] = None
        self._pending_arm: Optional[int] = None

    def next_decision(self) -> Decision:
        if self._pending is None:
            idx, tag, block = self._choose()
            self._pending_arm = idx
            self._pending = Decision(
                arm=self.vertices[idx], phase_tag=tag, block_length=block
            )
        return self._pending

    def observe(self, decision: Decision, rewards: Optional[np.ndarray] = None) -> None:
        if decision is not self._pending:
            raise PolicyError("observe() must receive the pending decision")
        if rewards is None or len(rewards) != decision.block_length:
            raise PolicyError("index policies need the reward of every play")
        self._update(self._pending_arm, np.asarray(rewards, dtype=float))
        self.total_plays += decision.block_length
        self._pending = None
        self._pending_arm = None

    def _choose(self) -> tuple[int, str, int]:
        raise NotImplementedError

    def _update(self, arm: int, rewards: np.ndarray) -> None:
        raise NotImplementedError


class ExtremalUcbPolicy(VertexIndexPolicy):
    """UCB for Gaussian-like rewards over the vertex pool.

    Any arm short of ceil(8 ln t) plays is sampled first (forced exploration,
    tagged explore; after the initial one-play-per-vertex pass, an
    under-sampled arm is topped up to its target in one block); otherwise the
    variance-scaled index picks the arm (tagged exploit). With zero noise the
    sample variances vanish and every index-chosen play is the best vertex.
    """

    name = "extremal_ucb"

    def __init__(self, poly: Polyhedron):
        super().__init__(poly)
        self.counts = np.zeros(self.n_arms, dtype=np.int64)
        self.sums = np.zeros(self.n_arms)
        self.sumsq = np.zeros(self.n_arms)

    def _choose(self):
        arm, forced, block = _kernels.ucb_normal_choose(
            self.counts, self.sums, self.sumsq, self.total_plays
        )
        return int(arm), EXPLORE if forced else EXPLOIT, int(block)

    def _update(self, arm, rewards):
        self.counts[arm] += rewards.size
        self.sums[arm] += float(rewards.sum())
        self.sumsq[arm] += float(rewards @ rewards)


class _RidgeIndexPolicy(VertexIndexPolicy):
    """Shared machinery for optimism with a ridge design matrix V.

    Keeps V^-1, the per-vertex values x'V^-1 b and widths x'V^-1 x, all
    refreshed in O(K N) per play through the rank-one update of V^-1.
    """

    def __init__(self, poly: Polyhedron, ridge: float = 1.0):
        super().__init__(poly)
        if ridge <= 0:
            raise PolicyError("ridge must be positive")
        self.ridge = ridge
        self.inv = np.eye(poly.dim) / ridge
        self.bvec = np.zeros(poly.dim)
        self.values = np.zeros(self.n_arms)
        self.widths = np.einsum("ij,jk,ik->i", self.vertices, self.inv, self.vertices)
        self.logdet = poly.dim * math.log(ridge)

    def _radius(self) -> float:
        raise NotImplementedError

    def _choose(self):
        return int(_kernels.ridge_choose(self.values, self.widths, self._radius())), EXPLOIT, 1

    def _update(self, arm, rewards):
        self.logdet += _kernels.ridge_update(
            self.inv, self.vertices, self.bvec, self.values, self.widths,
            self.vertices[arm], float(rewards[0]),
        )

    def confidence_width(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return self._radius() * math.sqrt(max(float(x @ self.inv @ x), 0.0))


class LinUcbPolicy(_RidgeIndexPolicy):
    """Ridge-regression UCB with a shared design matrix over all vertices.

    Index of vertex x is theta_hat'x + alpha * sqrt(x' V^-1 x) with
    alpha = 1 + sqrt(ln(2/delta)/2) unless overridden.
    """

    name = "linucb"

    def __init__(
        self,
        poly: Polyhedron,
        delta: float = 0.001,
        alpha: Optional[float] = None,
        ridge: float = 1.0,
    ):
        super().__init__(poly, ridge)
        if not 0 < delta < 1:
            raise PolicyError("delta must be in (0, 1)")
        self.alpha = alpha if alpha is not None else 1.0 + math.sqrt(math.log(2.0 / delta) / 2.0)

    def _radius(self) -> float:
        return self.alpha


class SelfNormalizedPolicy(_RidgeIndexPolicy):
    """Optimism with the self-normalized confidence radius, which needs the
    sub-Gaussian parameter R:
        beta_t = R * sqrt(2 ln(1/delta) + ln det(V_t) - N ln(ridge)) + sqrt(ridge) * S.
    """

    name = "selfnormalized"

    def __init__(
        self,
        poly: Polyhedron,
        R: float = 1.0,
        delta: float = 0.001,
        ridge: float = 1.0,
        s_bound: Optional[float] = None,
    ):
        super().__init__(poly, ridge)
        if R <= 0:
            raise PolicyError("R must be positive")
        if not 0 < delta < 1:
            raise PolicyError("delta must be in (0, 1)")
        self.R = R
        self.delta = delta
        self.s_bound = s_bound if s_bound is not None else math.sqrt(poly.dim)

    def beta(self) -> float:
        radius = 2.0 * math.log(1.0 / self.delta) + self.logdet - self.poly.dim * math.log(
            self.ridge
        )
        return self.R * math.sqrt(max(radius, 0.0)) + math.sqrt(self.ridge) * self.s_bound

    def _radius(self) -> float:
        return self.beta()


POLICY_KINDS = (
    "see",
    "see2",
    "polylin",
    "general_see",
    "improved_see2",
    "extremal_ucb",
    "linucb",
    "selfnormalized",
)


def make_policy(kind: str, poly: Polyhedron, params: Optional[dict] = None, noise_R: float = 1.0):
    """Construct a policy from a config-style (kind, params) pair."""
    p = dict(params or {})
    label = p.pop("label", kind)
    if kind == "see":
        pol = SeePolicy(poly, epsilon=p.pop("epsilon", 0.3), start_cycle=p.pop("start_cycle", 0))
    elif kind == "see2":
        pol = See2Policy(poly, start_cycle=p.pop("start_cycle", 0))
    elif kind == "polylin":
        pol = PolyLinPolicy(poly, R=p.pop("R", noise_R), start_cycle=p.pop("start_cycle", 1))
    elif kind == "general_see":
        pol = GeneralSeePolicy(
            poly,
            epsilon=p.pop("epsilon", 0.3),
            start_cycle=p.pop("start_cycle", 0),
            exploit_schedule=p.pop("exploit_schedule", "see"),
        )
    elif kind == "improved_see2":
        pol = ImprovedSee2Policy(poly, lam=p.pop("lam", 0.1), start_cycle=p.pop("start_cycle", 0))
    elif kind == "extremal_ucb":
        pol = ExtremalUcbPolicy(poly)
    elif kind == "linucb":
        pol = LinUcbPolicy(poly, delta=p.pop("delta", 0.001), alpha=p.pop("alpha", None))
    elif kind == "selfnormalized":
        pol = SelfNormalizedPolicy(
            poly, R=p.pop("R", noise_R), delta=p.pop("delta", 0.001)
        )
    else:
        raise PolicyError(f"unknown policy kind {kind!r}; expected one of {POLICY_KINDS}")
    if p:
        raise PolicyError(f"unused parameters for policy {kind!r}: {sorted(p)}")
    pol.label = label
    return pol
