"""Command-line interface: regions, figure data, simulation and the
equivocation-set equivalence check.

Exit status: 0 success, 1 invalid input, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .channel_model import BUILTINS, ChannelSpecError, GmacChannel, builtin, load_channel
from .closed_form import FIG5_P, FIG6_P, FIG7_N2, FIG7_PARAMS, figure_trace
from .regions import (GridBudgetError, RegionTrace, degraded_region, inner_region_one,
                      inner_region_two, outer_evaluations, positive_secrecy_possible,
                      secrecy_capacity_region_one, secrecy_rate_region_two, slice_max)
from .regions.bounds import geometry_case, secrecy_two_generators
from .regions.distributions import degraded_grid, one_message_grid, two_message_grid
from .regions.equivalence import verify_equivalence
from .regions.search import _evaluate, case_witnesses, recheck
from .tables import TRACE_COLUMNS, render
from .wiretap_sim import (EnumerationBudgetError, InputDistribution, SamplingError, check_invariants,
                          corner_codebook, measure_equivocation, simulate, superposition_inputs)

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2

THEOREMS = ("inner1", "outer1-eval", "secrecy1", "degraded", "inner2", "secrecy2")
FIGURES = ("fig5", "fig6", "fig7", "fig8")


class InvariantViolation(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are validation errors: exit 1, keeping 2 for invariant violations."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- parsing helpers

def parse_grid_step(text: str) -> int:
    """'1/16' or '16' -> 16."""
    t = text.strip()
    if t.startswith("1/"):
        t = t[2:]
    k = int(t)
    if k < 1:
        raise argparse.ArgumentTypeError("grid step must be 1/k with k >= 1")
    return k


def parse_r0_grid(text: str) -> np.ndarray:
    """'start:stop:step', stop included when it falls on the lattice."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected start:stop:step") from None
    if step <= 0 or stop < start or start < 0:
        raise argparse.ArgumentTypeError("need 0 <= start <= stop and step > 0")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _channel(args) -> GmacChannel:
    if (args.channel is None) == (args.builtin is None):
        raise ChannelSpecError("give exactly one of --channel and --builtin")
    if args.channel is not None:
        return load_channel(args.channel)
    params = {}
    if args.builtin == "degraded_binary":
        params["p"] = args.p if args.p is not None else 0.1
    elif args.builtin == "adder_bsc":
        p = args.p if args.p is not None else 0.1
        params = {"p1": p, "p2": args.p2 if args.p2 is not None else p}
    elif args.builtin == "quantized_gaussian":
        for k in ("P1", "P2", "N"):
            if getattr(args, k) is not None:
                params[k] = getattr(args, k)
        if args.N2:
            params["N2"] = args.N2[0]
    return builtin(args.builtin, **params)


def _config(args) -> dict:
    skip = {"func", "out", "format"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        cfg[k] = v.tolist() if isinstance(v, np.ndarray) else v
    cfg["version"] = __version__
    return cfg


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _say(args, msg: str):
    print(msg, file=sys.stderr if not args.out else sys.stdout)


# ---------------------------------------------------------------- region

def _grid_for(ch: GmacChannel, theorem: str, step: int | None, q: int):
    s = ch.sizes
    if theorem == "degraded":
        return degraded_grid(s["x1"], s["x2"], q=q, step=step or 16)
    if theorem in ("inner2", "secrecy2"):
        return two_message_grid(s["x1"], s["x2"], q=q, step=step or 2)
    return one_message_grid(s["x1"], s["x2"], q=q, step=step or 4)


def _region_trace(ch, theorem, grid, r0_grid) -> RegionTrace:
    if theorem == "inner1":
        return inner_region_one(ch, grid)
    if theorem == "outer1-eval":
        return outer_evaluations(ch, grid)
    if theorem == "secrecy1":
        return secrecy_capacity_region_one(ch, grid, refine_r0=r0_grid)
    if theorem == "degraded":
        return degraded_region(ch, grid, refine_r0=r0_grid)
    if theorem == "inner2":
        return inner_region_two(ch, grid)
    return secrecy_rate_region_two(ch, grid)


def _dist_doc(d) -> dict:
    return {k: np.asarray(v[0]).tolist() for k, v in d.kernels().items()}


def cmd_region(args) -> int:
    ch = _channel(args)
    grid = _grid_for(ch, args.theorem, args.grid_step, args.q_card)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trace = _region_trace(ch, args.theorem, grid, args.r0_grid)
    for w in caught:
        _say(args, f"warning: {w.message}")
    bad = recheck(ch, trace)
    summary: dict = {"theorem": args.theorem, "points": len(trace), "grid": trace.grid}
    if args.theorem in ("inner1", "secrecy1", "degraded", "outer1-eval"):
        # equivocation can always be lowered to the rate, so the largest R1e at R0 = 0
        # is the largest perfectly secret rate
        summary["max_secrecy_rate_at_R0=0"] = slice_max(trace, "R1e", {"R0": 0.0})
    if args.theorem in ("inner2", "secrecy2"):
        flags = positive_secrecy_possible(ch, grid)
        summary["positive_secrecy_user1"], summary["positive_secrecy_user2"] = flags
    slices = None
    if args.r0_grid is not None:
        slices = [[float(r0), slice_max(trace, "R1", {"R0": float(r0)}),
                   slice_max(trace, "R1e", {"R0": float(r0)})] for r0 in args.r0_grid]
        summary["slices"] = "R0, max R1, max R1e"
    rows = [[r[c] for c in TRACE_COLUMNS] for r in trace.records()]
    extra = {"summary": summary}
    if slices is not None:
        extra["slices"] = slices
    if args.format == "doc":
        extra["distributions"] = {k: _dist_doc(d) for k, d in sorted(trace.distributions.items())}
    _emit(args, render(TRACE_COLUMNS, rows, args.format, _config(args), trace.grid, extra))
    for k, v in summary.items():
        _say(args, f"{k}: {v}")
    if bad:
        raise InvariantViolation(f"{len(bad)} emitted points fail their own inequalities")
    return EXIT_OK


# ---------------------------------------------------------------- figure

def _fig8(args) -> tuple[list[str], list[list], str, dict]:
    ch = _channel(args) if (args.builtin or args.channel) else builtin("adder_bsc")
    s = ch.sizes
    grid = two_message_grid(s["x1"], s["x2"], q=args.q_card, step=args.grid_step or 2)
    ev = _evaluate(ch, grid, "two")
    wit = case_witnesses(ch, grid)
    cols = ["case", "grid_point", "R0", "R1", "R2"]
    rows = []
    for case in (1, 2, 3, 4):
        if case not in wit:
            continue
        i = wit[case]
        mi = ev.bundle.item(i)
        assert geometry_case(mi) == case
        for v in secrecy_two_generators(mi):
            rows.append([case, f"g{i}", *map(float, v)])
    meta = {"cases_found": sorted(wit), "cases_missing": [c for c in (1, 2, 3, 4) if c not in wit],
            "channel": ch.name}
    return cols, rows, grid.description, meta


def cmd_figure(args) -> int:
    which = args.figure
    if which == "fig8":
        cols, rows, grid, meta = _fig8(args)
        _emit(args, render(cols, rows, args.format, _config(args), grid, {"meta": meta}))
        _say(args, f"fig8 cases found: {meta['cases_found']}")
        return EXIT_OK
    params: dict = {}
    if which == "fig5" and args.p_list:
        params["p"] = args.p_list
    if which == "fig6" and args.p_list:
        params["p"] = args.p_list[0]
    if which == "fig7":
        for k in ("P1", "P2", "N"):
            if getattr(args, k) is not None:
                params[k] = getattr(args, k)
        if args.N2:
            params["N2"] = args.N2
    table = figure_trace(which, params, r0=args.r0_grid)
    grid = f"{len(table.rows)} R0 points"
    _emit(args, render(table.columns, table.rows.tolist(), args.format, _config(args), grid,
                       {"meta": table.meta}))
    return EXIT_OK


# ---------------------------------------------------------------- simulate

def _inputs(args, ch: GmacChannel) -> InputDistribution:
    if args.inputs:
        doc = json.loads(Path(args.inputs).read_text())
        return InputDistribution(np.array(doc["p_q"]), np.array(doc["p_x1_q"]), np.array(doc["p_x2_q"]))
    s = ch.sizes
    if (s["x1"], s["x2"]) == (2, 2):
        return superposition_inputs(args.alpha)
    return InputDistribution(np.ones(1), np.full((1, s["x1"]), 1 / s["x1"]), np.full((1, s["x2"]), 1 / s["x2"]))


def cmd_simulate(args) -> int:
    if args.scheme == "corner":
        ch = builtin("multiplier_bias") if not (args.builtin or args.channel) else _channel(args)
        cb, g1, g2 = corner_codebook()
        stats = measure_equivocation(cb, g1, g2, ch, args.trials, args.seed, args.mode)
        stats.meta["scheme"] = "corner"
    else:
        ch = _channel(args) if (args.builtin or args.channel) else builtin("degraded_binary", p=0.3)
        d = _inputs(args, ch)
        info = d.information(ch)
        r1p, r2p, r0 = args.R1p, args.R2p, args.R0
        if args.rate_fraction is not None:
            f = args.rate_fraction
            r1p = f * info["i1"] if r1p is None else r1p
            r2p = 0.0 if r2p is None else r2p
            r0 = max(f * info["i_all"] - r1p - r2p, 0.0) if r0 is None else r0
        r1p = 0.0 if r1p is None else r1p
        r2p = 0.0 if r2p is None else r2p
        r0 = 0.0 if r0 is None else r0
        stats, cb = simulate(ch, d, args.n, r0, r1p, r2p, args.trials, args.seed,
                             args.R1, args.R2, args.eps, args.mode)
        stats.meta.update({"scheme": "random", "requested_rates": {"R0": r0, "R1p": r1p, "R2p": r2p,
                                                                   "R1": args.R1, "R2": args.R2}})
    record = stats.record()
    violations = check_invariants(stats)
    record["invariant_violations"] = violations
    cols = sorted(k for k, v in record.items() if not isinstance(v, (dict, list)))
    extra = {k: record[k] for k in sorted(record) if isinstance(record[k], (dict, list))}
    _emit(args, render(cols, [[record[c] for c in cols]], args.format, _config(args),
                       f"n={stats.meta['n']} trials={stats.trials}", extra))
    _say(args, f"lambda={stats.lam} equivocation1={stats.equivocation1} equivocation2={stats.equivocation2}")
    if violations:
        raise InvariantViolation("; ".join(violations))
    return EXIT_OK


# ---------------------------------------------------------------- equivalence check

def cmd_verify(args) -> int:
    rep = verify_equivalence(args.instances, args.seed, args.grid, args.resolution)
    cols = ["instances", "grid", "resolution", "disagreements"]
    row = [rep.instances, rep.grid, rep.resolution, rep.disagreements]
    _emit(args, render(cols, [row], args.format, _config(args), f"{args.grid}x{args.grid}",
                       {"counterexamples": rep.counterexamples}))
    _say(args, f"disagreements: {rep.disagreements} over {rep.instances} instances")
    if not rep.ok:
        raise InvariantViolation("explicit and union forms disagree")
    return EXIT_OK


# ---------------------------------------------------------------- wiring

def _channel_flags(p: argparse.ArgumentParser):
    p.add_argument("--channel", help="JSON channel description")
    p.add_argument("--builtin", choices=BUILTINS)
    p.add_argument("--p", type=float, help="crossover probability")
    p.add_argument("--p2", type=float, help="second crossover (adder_bsc)")
    p.add_argument("--P1", type=float)
    p.add_argument("--P2", type=float)
    p.add_argument("--N", type=float)
    p.add_argument("--N2", type=parse_floats, help="comma-separated list")


def _output_flags(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "doc"), default="csv")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gmacsec", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("region", help="rate-equivocation region over a distribution grid")
    _channel_flags(r)
    _output_flags(r)
    r.add_argument("--theorem", choices=THEOREMS, required=True)
    r.add_argument("--grid-step", type=parse_grid_step, help="lattice resolution 1/k")
    r.add_argument("--q-card", type=int, default=2, help="|Q|")
    r.add_argument("--r0-grid", type=parse_r0_grid, help="start:stop:step")
    r.set_defaults(func=cmd_region)

    f = sub.add_parser("figure", help="data series of the secrecy capacity figures")
    _channel_flags(f)
    _output_flags(f)
    f.add_argument("--figure", choices=FIGURES, required=True)
    f.add_argument("--p-list", type=parse_floats, help=f"p values (fig5 default {FIG5_P}, fig6 {FIG6_P})")
    f.add_argument("--r0-grid", type=parse_r0_grid)
    f.add_argument("--grid-step", type=parse_grid_step)
    f.add_argument("--q-card", type=int, default=2)
    f.set_defaults(func=cmd_figure)

    s = sub.add_parser("simulate", help="finite-blocklength binning simulation")
    _channel_flags(s)
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "doc"), default="doc")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--scheme", choices=("random", "corner"), default="random")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--R0", type=float)
    s.add_argument("--R1p", type=float, help="user-1 codebook rate")
    s.add_argument("--R2p", type=float, help="user-2 codebook rate")
    s.add_argument("--R1", type=float, help="user-1 message rate (default: codebook rate)")
    s.add_argument("--R2", type=float, help="user-2 message rate (default: codebook rate)")
    s.add_argument("--rate-fraction", type=float,
                   help="set unspecified rates to this fraction of the MAC corner")
    s.add_argument("--alpha", type=float, default=0.25, help="superposition parameter for binary inputs")
    s.add_argument("--inputs", help="JSON with p_q, p_x1_q, p_x2_q")
    s.add_argument("--mode", choices=("map", "typicality"), default="map")
    s.add_argument("--eps", type=float)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify-equivocation",
                       help="explicit vs union form of the two-message equivocation set")
    _output_flags(v)
    v.add_argument("--instances", type=int, default=1000)
    v.add_argument("--grid", type=int, default=64)
    v.add_argument("--resolution", type=int, default=256)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except EnumerationBudgetError as e:
        print(f"enumeration budget exceeded: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ChannelSpecError, OSError, json.JSONDecodeError) as e:
        print(f"channel error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (GridBudgetError, SamplingError, ValueError, KeyError) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
