"""Experiment orchestration: config, seeded runs, regret traces, persistence.

Runs are driven block-by-block: a block of identical plays contributes
block_length * instantaneous_regret to the cumulative pseudo-regret in O(1),
and checkpoints inside a block interpolate exactly because regret is linear
within it. Noise is only sampled where a policy (or the realized-regret log)
actually consumes rewards.
"""
from __future__ import annotations

import csv
import json
import math
import multiprocessing
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .env import Environment, NoiseModel, run_stream
from .policies import make_policy
from .polytope import (
    Polyhedron,
    gap,
    hypercube,
    load_polyhedron,
    random_polytope,
    standard_simplex,
)

# Reserved spawn key for drawing theta so it never collides with run streams.
THETA_STREAM_KEY = 2**31


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    polyhedron: dict
    theta: object  # explicit list or the string "uniform01"
    noise: dict
    policies: list
    horizon: int
    runs: int = 1
    seed: int = 0
    checkpoints: object = None  # explicit list or {"per_decade": k} or None
    realized_regret: bool = False
    lower_bound: bool = False
    parallel: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        required = ("polyhedron", "theta", "noise", "policies", "horizon")
        missing = [k for k in required if k not in data]
        if missing:
            raise ConfigError(f"config missing keys: {missing}")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def validate(self) -> None:
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError("horizon must be a positive integer")
        if not isinstance(self.runs, int) or self.runs < 1:
            raise ConfigError("runs must be a positive integer")
        if not isinstance(self.policies, list) or not self.policies:
            raise ConfigError("policies must be a nonempty list")
        for p in self.policies:
            if not isinstance(p, dict) or "kind" not in p:
                raise ConfigError("each policy entry needs a 'kind'")
        if isinstance(self.checkpoints, list):
            grid = self.checkpoints
            if any(not isinstance(t, int) or t < 1 for t in grid):
                raise ConfigError("checkpoints must be positive integers")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("checkpoint grid must be strictly increasing")
            if grid and grid[-1] > self.horizon:
                raise ConfigError("last checkpoint exceeds the horizon")
        if self.parallel < 1:
            raise ConfigError("parallel must be >= 1")

    def checkpoint_grid(self) -> np.ndarray:
        if isinstance(self.checkpoints, list):
            return np.asarray(self.checkpoints, dtype=np.int64)
        per_decade = 40
        if isinstance(self.checkpoints, dict):
            per_decade = int(self.checkpoints.get("per_decade", 40))
        return geometric_grid(self.horizon, per_decade)


@dataclass
class RegretTrace:
    policy: str
    run: int
    ts: list
    pseudo: list
    realized: Optional[list] = None


def geometric_grid(horizon: int, per_decade: int = 40) -> np.ndarray:
    """Roughly per_decade checkpoints per decade, always ending at horizon."""
    if horizon == 1:
        return np.array([1], dtype=np.int64)
    n_pts = int(math.ceil(per_decade * math.log10(horizon))) + 1
    raw = np.unique(np.round(10 ** np.linspace(0.0, math.log10(horizon), n_pts)))
    grid = raw[(raw >= 1) & (raw <= horizon)].astype(np.int64)
    if grid[-1] != horizon:
        grid = np.append(grid, horizon)
    return grid


def build_polyhedron(spec: dict) -> Polyhedron:
    if "file" in spec:
        return load_polyhedron(spec["file"])
    gen = spec.get("generator")
    if gen == "hypercube":
        return hypercube(spec["n"], spec.get("low", 0.0), spec.get("high", 1.0))
    if gen == "simplex":
        return standard_simplex(spec["n"], spec.get("scale", 1.0))
    if gen == "random":
        return random_polytope(
            spec["n"], spec["m"], spec["seed"], spec.get("origin_interior", True)
        )
    raise ConfigError(f"polyhedron spec needs 'file' or a known 'generator': {spec}")


def resolve_theta(theta_spec, poly: Polyhedron, seed: int) -> np.ndarray:
    if isinstance(theta_spec, str):
        if theta_spec != "uniform01":
            raise ConfigError(f"unknown theta spec {theta_spec!r}")
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(THETA_STREAM_KEY,))
        rng = np.random.Generator(np.random.PCG64(ss))
        return rng.random(poly.dim)
    theta = np.asarray(theta_spec, dtype=float).ravel()
    if theta.size != poly.dim:
        raise ConfigError(f"theta has {theta.size} entries, arm set has {poly.dim}")
    return theta


def drive_policy(policy, env: Environment, horizon: int, checkpoints, realized: bool) -> RegretTrace:
    """Run one policy against one environment for `horizon` steps."""
    grid = np.asarray(checkpoints, dtype=np.int64)
    pseudo_out: list[float] = []
    realized_out: list[float] = [] if realized else None
    t = 0
    cum = 0.0
    reward_total = 0.0
    cp = 0
    while t < horizon:
        decision = policy.next_decision()
        take = min(decision.block_length, horizon - t)
        inst = env.instantaneous_regret(decision.arm)
        rewards = None
        if decision.needs_reward or realized:
            rewards = env.pull_many(decision.arm, take)
        while cp < grid.size and grid[cp] <= t + take:
            k = int(grid[cp] - t)
            pseudo_out.append(cum + k * inst)
            if realized:
                realized_out.append(
                    grid[cp] * env.optimal_value - (reward_total + float(rewards[:k].sum()))
                )
            cp += 1
        cum += take * inst
        if rewards is not None:
            reward_total += float(rewards.sum())
        t += take
        if take < decision.block_length:
            break  # horizon cuts the block; the policy is not told
        policy.observe(decision, rewards if decision.needs_reward else None)
    return RegretTrace(
        policy=getattr(policy, "label", policy.name),
        run=-1,
        ts=[int(x) for x in grid],
        pseudo=pseudo_out,
        realized=realized_out,
    )


# Per-worker cache so parallel runs rebuild geometry once per (A, b) system.
_POLY_CACHE: dict = {}


def _cached_polyhedron(a_bytes, b_bytes, shape) -> Polyhedron:
    key = (a_bytes, b_bytes)
    if key not in _POLY_CACHE:
        a = np.frombuffer(a_bytes).reshape(shape)
        b = np.frombuffer(b_bytes)
        _POLY_CACHE[key] = Polyhedron(a.copy(), b.copy())
    return _POLY_CACHE[key]


def _run_job(args) -> RegretTrace:
    (a_bytes, b_bytes, shape, theta, noise_kind, noise_r, policy_cfg, run_idx,
     seed, horizon, grid, realized) = args
    poly = _cached_polyhedron(a_bytes, b_bytes, shape)
    noise = NoiseModel(kind=noise_kind, R=noise_r)
    env = Environment(theta, poly, noise, run_stream(seed, run_idx))
    cfg = dict(policy_cfg)
    kind = cfg.pop("kind")
    policy = make_policy(kind, poly, cfg, noise_R=noise.R if noise.kind != "none" else 1.0)
    trace = drive_policy(policy, env, horizon, grid, realized)
    trace.run = run_idx
    return trace


def run_experiment(config: ExperimentConfig) -> list[RegretTrace]:
    """All (policy, run) traces for a config; deterministic in the seed."""
    config.validate()
    poly = build_polyhedron(config.polyhedron)
    theta = resolve_theta(config.theta, poly, config.seed)
    gap(poly, theta)  # rejects tied optima before any run
    noise = NoiseModel(**config.noise)
    grid = config.checkpoint_grid()
    jobs = []
    for policy_cfg in config.policies:
        for run_idx in range(config.runs):
            jobs.append(
                (
                    poly.A.tobytes(), poly.b.tobytes(), poly.A.shape, theta,
                    noise.kind, noise.R, policy_cfg, run_idx, config.seed,
                    config.horizon, grid, config.realized_regret,
                )
            )
    if config.parallel > 1 and len(jobs) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=config.parallel) as pool:
            traces = pool.map(_run_job, jobs)
    else:
        traces = [_run_job(j) for j in jobs]
    return traces


def lower_bound_curve(theta, R: float, Ts) -> list:
    """Reference growth rate for the coordinate-arms instance on the unit cube.

    The instance's arms are the reach-scaled coordinate vectors plus the zero
    arm, so the divergence candidates compare the best mean against every
    smaller coordinate and against zero; Gaussian divergence is
    (mu1 - mu2)^2 / (2 R^2). Returns coeff * ln(T) per requested T.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size < 2:
        raise ValueError("need at least two coordinates")
    if R <= 0:
        raise ValueError("R must be positive")
    order = np.argsort(theta)[::-1]
    star = float(theta[order[0]])
    second = float(theta[order[1]])
    if star - second <= 1e-12:
        raise ValueError("tied best coordinate; the reference curve is undefined")
    delta = star - max(second, 0.0)
    others = np.delete(theta, order[0])
    kl = [(star - v) ** 2 / (2.0 * R**2) for v in others] + [star**2 / (2.0 * R**2)]
    coeff = (theta.size - 1) * delta / max(kl)
    return [coeff * math.log(t) for t in np.asarray(Ts, dtype=float)]


def summarize(traces: list) -> dict:
    """Mean and sample standard deviation per policy per checkpoint."""
    if not traces:
        raise ValueError("need at least one trace")
    by_policy: dict[str, list[RegretTrace]] = {}
    for tr in traces:
        by_policy.setdefault(tr.policy, []).append(tr)
    out = {}
    for name, group in by_policy.items():
        ts = group[0].ts
        mat = np.array([tr.pseudo for tr in group])
        std = mat.std(axis=0, ddof=1) if len(group) > 1 else np.zeros(mat.shape[1])
        entry = {
            "runs": len(group),
            "t": list(ts),
            "mean": [float(v) for v in mat.mean(axis=0)],
            "std": [float(v) for v in std],
        }
        if all(tr.realized is not None for tr in group):
            rmat = np.array([tr.realized for tr in group])
            entry["realized_mean"] = [float(v) for v in rmat.mean(axis=0)]
        out[name] = entry
    return out


def write_raw_csv(traces: list, path) -> None:
    realized = any(tr.realized is not None for tr in traces)
    fields = ["policy", "run", "t", "pseudo_regret"] + (
        ["realized_regret"] if realized else []
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for tr in traces:
            for i, t in enumerate(tr.ts):
                row = [tr.policy, tr.run, t, repr(tr.pseudo[i])]
                if realized:
                    row.append(repr(tr.realized[i]) if tr.realized is not None else "")
                writer.writerow(row)


def write_summary_json(config: ExperimentConfig, theta, summary: dict, path,
                       lower_bound: Optional[dict] = None) -> None:
    payload = {
        "config": {
            "polyhedron": config.polyhedron,
            "theta": [float(v) for v in np.asarray(theta).ravel()],
            "noise": config.noise,
            "policies": config.policies,
            "horizon": config.horizon,
            "runs": config.runs,
            "seed": config.seed,
            "realized_regret": config.realized_regret,
        },
        "policies": summary,
    }
    if lower_bound is not None:
        payload["lower_bound"] = lower_bound
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_and_save(config: ExperimentConfig, out_dir) -> dict:
    """Run an experiment and write raw.csv + summary.json under out_dir."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    traces = run_experiment(config)
    summary = summarize(traces)
    poly = build_polyhedron(config.polyhedron)
    theta = resolve_theta(config.theta, poly, config.seed)
    lb = None
    if config.lower_bound:
        ts = [int(t) for t in config.checkpoint_grid()]
        lb = {"t": ts, "value": lower_bound_curve(theta, float(config.noise.get("R", 1.0)), ts)}
    raw_path = os.path.join(out_dir, "raw.csv")
    summary_path = os.path.join(out_dir, "summary.json")
    write_raw_csv(traces, raw_path)
    write_summary_json(config, theta, summary, summary_path, lower_bound=lb)
    return {"raw": raw_path, "summary": summary_path, "traces": traces}
