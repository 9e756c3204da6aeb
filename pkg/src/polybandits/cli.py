"""Command-line interface: run experiments, print reference curves, validate arm sets."""
from __future__ import annotations

import argparse
import json
import sys

from . import harness, polytope


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polybandits",
        description="Stochastic linear bandit simulations over polyhedral arm sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config and save traces")
    p_run.add_argument("--config", required=True, help="experiment config (JSON)")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_run.add_argument("--parallel", type=int, default=None, help="worker processes")

    p_lb = sub.add_parser("lower-bound", help="print the logarithmic reference curve")
    p_lb.add_argument("--theta", required=True, help="comma-separated coordinates")
    p_lb.add_argument("--R", type=float, required=True, help="sub-Gaussian parameter")
    p_lb.add_argument("--T", required=True, help="comma-separated horizons")

    p_val = sub.add_parser("validate", help="check a polyhedron file")
    p_val.add_argument("path", help="polyhedron JSON file")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "lower-bound":
            return _cmd_lower_bound(args)
        return _cmd_validate(args)
    except Exception as exc:  # diagnostics to stderr, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_run(args) -> int:
    config = harness.ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.parallel is not None:
        config.parallel = args.parallel
    config.validate()
    result = harness.run_and_save(config, args.out)
    print(f"wrote {result['raw']}")
    print(f"wrote {result['summary']}")
    return 0


def _cmd_lower_bound(args) -> int:
    theta = [float(v) for v in args.theta.split(",")]
    ts = [int(v) for v in args.T.split(",")]
    values = harness.lower_bound_curve(theta, args.R, ts)
    print(json.dumps({"t": ts, "value": values}))
    return 0


def _cmd_validate(args) -> int:
    poly = polytope.load_polyhedron(args.path)
    report = {
        "dimension": poly.dim,
        "constraints": poly.n_constraints,
        "bounded": True,
    }
    try:
        report["vertices"] = len(poly.vertex_set())
    except polytope.VertexEnumerationError:
        report["vertices"] = None
    print(json.dumps(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
