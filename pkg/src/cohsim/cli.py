"""Command-line front end.

Every verb takes channel/state descriptors (see ``parse_channel`` and
``parse_state``), solves the corresponding measure or cost, and emits JSON
or CSV.  Exit codes: 0 on success, 2 when a verdict is infeasible or
undetermined, 1 on malformed input or solver failure.  The default solver
tolerance can be overridden with the ``COHSIM_TOL`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import linalg as la
from .channels import diamond_distance, parse_channel
from .figures import FIGURES, figure
from .implement import (
    SimulationQuery,
    amortized_cost,
    coherence_left_sdp,
    cost_report,
    gate_fidelity,
    implementation_error,
    simulation_rank,
)
from .measures import channel_report, coherence_report
from .resources import flagpole_threshold, mio_convertible, parse_state
from .sdp import DEFAULT_TOL, SolverError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNDETERMINED = 2


def _default_tol() -> float:
    raw = os.environ.get("COHSIM_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError as exc:
        raise ValueError(f"COHSIM_TOL must be a float, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="solver tolerance (default 1e-7 or $COHSIM_TOL)")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=None, help="output format")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
    common.add_argument("--seed", type=int, default=None, help="seed recorded in sweep metadata")

    ap = argparse.ArgumentParser(prog="cohsim", description=__doc__)
    ap.add_argument("--version", action="version", version=f"cohsim {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("measure-state", parents=[common], help="all coherence measures of a state")
    p.add_argument("state")

    p = sub.add_parser("measure-channel", parents=[common], help="robustness and log-robustness of a channel")
    p.add_argument("channel")

    p = sub.add_parser("sim-cost", parents=[common], help="one-shot simulation cost in bits")
    p.add_argument("channel")
    p.add_argument("--epsilon", type=float, default=0.0)

    p = sub.add_parser("amortized-cost", parents=[common], help="amortized cost in bits")
    p.add_argument("channel")
    p.add_argument("--epsilon", type=float, default=0.0)

    p = sub.add_parser("recycle", parents=[common], help="recycling bound from a rank-k cosdit")
    p.add_argument("channel")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)

    p = sub.add_parser("diamond-error", parents=[common],
                       help="minimal implementation error with a given resource")
    p.add_argument("--target", required=True)
    p.add_argument("--resource", required=True)

    p = sub.add_parser("diamond-distance", parents=[common], help="half diamond distance of two channels")
    p.add_argument("channel_a")
    p.add_argument("channel_b")

    p = sub.add_parser("gate-fidelity", parents=[common], help="optimal gate fidelity with a resource")
    p.add_argument("--target", required=True)
    p.add_argument("--resource", required=True)

    p = sub.add_parser("coh-left", parents=[common], help="coherence left after implementation")
    p.add_argument("--target", required=True)
    p.add_argument("--resource", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--ds", type=int, default=2, help="output resource dimension")

    p = sub.add_parser("flagpole-threshold", parents=[common], help="flagpole weight threshold 1/(1+C_R)")
    p.add_argument("channel")

    p = sub.add_parser("convertible", parents=[common], help="pure-state MIO convertibility verdict")
    p.add_argument("source")
    p.add_argument("target")

    p = sub.add_parser("figure", parents=[common], help="figure-reproduction sweep")
    p.add_argument("name", choices=sorted(FIGURES))
    p.add_argument("--steps", type=int, default=None, help="override the sweep grid size")
    p.add_argument("--resolution", type=float, default=None, help="fig5 simplex resolution")

    return ap


def _emit(payload, args, default_format: str = "json") -> None:
    fmt = args.format or default_format
    if fmt == "csv" and hasattr(payload, "to_csv"):
        text = payload.to_csv()
    elif fmt == "csv":
        raise ValueError(f"verb {args.verb!r} has no CSV output; use --format json")
    else:
        obj = payload.to_dict() if hasattr(payload, "to_dict") else payload
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dispatch(args, tol: float) -> int:
    verb = args.verb
    if verb == "measure-state":
        state = parse_state(args.state)
        rho = la.projector(state) if state.ndim == 1 else state
        _emit(coherence_report(rho, tol=tol), args)
        return EXIT_OK
    if verb == "measure-channel":
        _emit(channel_report(parse_channel(args.channel), tol=tol), args)
        return EXIT_OK
    if verb == "sim-cost":
        n = parse_channel(args.channel)
        k = simulation_rank(n, args.epsilon, tol=tol)
        _emit({"bits": float(np.log2(k)), "cosdit_rank": k, "epsilon": args.epsilon}, args)
        return EXIT_OK
    if verb == "amortized-cost":
        n = parse_channel(args.channel)
        _emit({"bits": amortized_cost(n, args.epsilon, tol=tol), "epsilon": args.epsilon}, args)
        return EXIT_OK
    if verb == "recycle":
        n = parse_channel(args.channel)
        rep = cost_report(n, args.epsilon, tol=tol)
        from .implement import recycling_bound

        rec = recycling_bound(n, args.k)
        _emit({"k": args.k, "max_robustness_left": rec.max_robustness_left,
               "cosdit_rank_out": rec.cosdit_rank, "cost_report": rep.to_dict()}, args)
        return EXIT_OK
    if verb == "diamond-error":
        q = SimulationQuery(parse_channel(args.target), parse_state(args.resource))
        _emit({"half_diamond_error": implementation_error(q, tol=tol)}, args)
        return EXIT_OK
    if verb == "diamond-distance":
        a = parse_channel(args.channel_a)
        b = parse_channel(args.channel_b)
        _emit({"half_diamond_distance": diamond_distance(a, b, tol=tol)}, args)
        return EXIT_OK
    if verb == "gate-fidelity":
        q = SimulationQuery(parse_channel(args.target), parse_state(args.resource))
        fid = gate_fidelity(q, tol=tol)
        d = q.target.dim_in
        _emit({"gate_fidelity": fid, "average_fidelity": (d * fid + 1) / (d + 1)}, args)
        return EXIT_OK
    if verb == "coh-left":
        from .implement import InfeasibleImplementationError

        q = SimulationQuery(parse_channel(args.target), parse_state(args.resource), args.epsilon)
        try:
            bound = coherence_left_sdp(q, d_s=args.ds, tol=tol)
        except InfeasibleImplementationError as exc:
            _emit({"feasible": False, "epsilon": args.epsilon, "d_s": args.ds,
                   "reason": str(exc)}, args)
            return EXIT_UNDETERMINED
        _emit({"feasible": True, "coherence_left_bound": bound,
               "epsilon": args.epsilon, "d_s": args.ds}, args)
        return EXIT_OK
    if verb == "flagpole-threshold":
        _emit({"p_star": flagpole_threshold(parse_channel(args.channel))}, args)
        return EXIT_OK
    if verb == "convertible":
        verdict = mio_convertible(parse_state(args.source), parse_state(args.target))
        _emit(verdict, args)
        return EXIT_OK if verdict.possible in ("yes", "no") else EXIT_UNDETERMINED
    if verb == "figure":
        grid = {}
        if args.steps is not None:
            grid["steps" if args.name != "fig5" else "resolution"] = (
                args.steps if args.name != "fig5" else 1.0 / args.steps)
        if args.resolution is not None and args.name == "fig5":
            grid["resolution"] = args.resolution
        sweep = figure(args.name, tol=tol, jobs=args.jobs, seed=args.seed, **grid)
        _emit(sweep, args, default_format="csv")
        return EXIT_OK
    raise ValueError(f"unknown verb {verb!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol = args.tol if args.tol is not None else _default_tol()
        return _dispatch(args, tol)
    except SolverError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (ValueError, la.DimensionError, la.HermiticityError, OSError) as exc:
        from .implement import ResourceBelowCostError

        if isinstance(exc, ResourceBelowCostError):
            print(f"infeasible: {exc}", file=sys.stderr)
            return EXIT_UNDETERMINED
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
