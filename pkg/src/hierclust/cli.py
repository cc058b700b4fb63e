"""Command-line front end.

Every subcommand reads and writes JSON (CSV for ``eval``).  Failures print
one JSON error record on stderr and exit nonzero: 2 for bad arguments,
1 for everything else.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import exact, generators, greedy, nesting
from .errors import GroundSetMismatch, HierClustError
from .hierarchy import (
    POH_LIMIT,
    MergeHierarchy,
    approximation_profile,
    exhaustive_price_of_hierarchy,
    extend_sequence,
    fmt12,
)
from .metric import CostKind, load_space, save_space, space_to_dict

KINDS = ("diam", "rad", "drad")
ALGOS = ("ff", "cl", "mondal", "lin", "improved")


class ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _round12(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        return obj if math.isinf(obj) else float(fmt12(obj))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _emit(payload, path=None):
    text = json.dumps(payload) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _profile_for(space, kind, path, limit):
    if path:
        return exact.OptimalProfile.from_dict(_read_json(path)).validate(kind, space.n)
    return exact.optimal_profile(space, kind, limit)


# -- subcommands ---------------------------------------------------------------

def cmd_gen_random(args):
    space = generators.random_space(args.family, args.n, args.seed)
    meta = {"family": args.family, "n": args.n, "seed": args.seed}
    if args.out:
        save_space(space, args.out, {"meta": meta})
    else:
        _emit({**space_to_dict(space), "meta": meta})


def cmd_gen_adversarial(args):
    from .adversarial import build_instance, instance_metric

    inst = build_instance(args.k, max_depth=args.max_depth)
    space = instance_metric(inst)
    save_space(space, args.out, {"meta": {"k": args.k}})
    sidecar = args.sidecar or args.out + ".sidecar.json"
    _emit(inst.to_sidecar(), sidecar)


def cmd_solve_opt(args):
    space = load_space(args.instance)
    kind = CostKind.parse(args.cost)
    if args.k is not None:
        clus = exact.optimal_clustering(space, args.k, kind, args.limit)
        cost = exact.optimal_cost(space, args.k, kind, args.limit)
        payload = {"cost_kind": kind.short, "n": space.n,
                   "levels": [{"k": args.k, "cost": cost, "blocks": clus.to_list()}]}
    else:
        payload = exact.optimal_profile(space, kind, args.limit).to_dict()
    _emit(payload, args.out)


def cmd_build(args):
    space = load_space(args.instance)
    kind = CostKind.parse(args.cost)
    trace = None
    if args.algo == "ff":
        hier = greedy.farthest_first_hierarchy(space, args.start)
    elif args.algo == "cl":
        hier = greedy.complete_linkage(space, kind)
    elif args.algo == "mondal":
        hier, _ = greedy.mondal_hierarchy(space, args.start, args.seed)
    else:
        profile = _profile_for(space, kind, args.profile, args.limit)
        if args.algo == "lin":
            run = nesting.lin_sequence(space, profile, nesting.NestingParams.for_kind(kind))
        else:
            alpha = nesting.SQRT2_STEP if args.alpha is None else args.alpha
            run = nesting.improved_sequence(space, profile, kind, alpha)
        hier = extend_sequence(run.sequence, space, kind)
        trace = {"scale": run.scale, "t": run.t, "base": run.base,
                 "steps": [s.as_dict() for s in run.steps]}
    meta = {"algo": args.algo, "cost_kind": kind.short, "start": args.start, "seed": args.seed}
    if args.alpha is not None:
        meta["alpha"] = args.alpha
    payload = {**hier.to_dict(), "meta": meta}
    _emit(payload, args.out)
    if args.trace and trace is not None:
        _emit(_round12(trace), args.trace)


def cmd_eval(args):
    space = load_space(args.instance)
    kind = CostKind.parse(args.cost)
    hier = MergeHierarchy.from_dict(_read_json(args.hierarchy))
    profile = _profile_for(space, kind, args.profile, args.limit)
    prof = approximation_profile(hier, profile, space, kind)
    meta = {"instance": args.instance, "hierarchy": args.hierarchy, "cost_kind": kind.short,
            "max_ratio": fmt12(prof.max_ratio), "argmax_k": prof.argmax}
    text = prof.to_csv(meta)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_poh(args):
    space = load_space(args.instance)
    kind = CostKind.parse(args.cost)
    value, witness = exhaustive_price_of_hierarchy(space, kind, args.limit)
    _emit({"cost_kind": kind.short, "n": space.n, "price_of_hierarchy": _round12(value),
           "witness": witness.to_dict()}, args.out)


def _adversarial_space(inst, path):
    """Trust the instance file only if it matches a fresh rebuild."""
    from .adversarial import instance_metric

    data = _read_json(path)
    space = instance_metric(inst)
    raw = np.asarray(data["matrix"], dtype=float)
    if raw.shape != space.dist.shape or not np.allclose(raw, space.dist, rtol=0, atol=1e-9):
        raise GroundSetMismatch("instance file does not match the depth-k construction")
    return space


def _depth_for(n, max_depth):
    from .adversarial import level_sizes

    for k in range(1, max_depth + 1):
        if level_sizes(k)[-1] == n:
            return k
    raise GroundSetMismatch(f"{n} points is not the size of any constructed instance")


def cmd_certify(args):
    from .adversarial import (build_instance, certify_lower_bound, measured_ratio,
                              trace_bad_clusters)

    kind = CostKind.parse(args.cost)
    hier = MergeHierarchy.from_dict(_read_json(args.hierarchy))
    k = args.k if args.k is not None else _depth_for(hier.n, args.max_depth)
    inst = build_instance(k, max_depth=args.max_depth)
    space = _adversarial_space(inst, args.instance)
    trace = trace_bad_clusters(inst, hier)
    cert = certify_lower_bound(inst, trace, kind)
    payload = cert.as_dict()
    payload["measured_ratio"] = measured_ratio(inst, space, trace, kind)
    payload["kernel_mass"] = [lv.kernel_mass for lv in trace.levels]
    _emit(_round12(payload), args.out)


def cmd_analyze_seq(args):
    from .adversarial import feasible_sequence_search, min_k_for_epsilon

    rec = min_k_for_epsilon(args.eps, args.variant, args.grid)
    payload = rec.as_dict()
    if args.k is not None:
        seq = feasible_sequence_search(args.k, args.eps, args.variant, grid_points=args.grid)
        payload["search"] = {"k": args.k, "sequence": None if seq is None else list(seq)}
    _emit(_round12(payload), args.out)


def cmd_mondal_search(args):
    ratio, space, seed = greedy.mondal_search(args.n, args.trials, args.seed, args.start, args.limit)
    if args.out and space is not None:
        save_space(space, args.out, {"meta": {"family": "repaired-integer", "seed": seed}})
    _emit(_round12({"n": args.n, "trials": args.trials, "best_ratio": ratio, "best_seed": seed}))


# -- parser --------------------------------------------------------------------

def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    p = _Parser(prog="hierclust", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = cmd("gen-random", cmd_gen_random, "seeded random metric")
    sp.add_argument("--family", choices=generators.FAMILIES, default="euclidean")
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = cmd("gen-adversarial", cmd_gen_adversarial, "layered lower-bound instance")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--sidecar")
    sp.add_argument("--max-depth", type=_positive_int, default=2)

    sp = cmd("solve-opt", cmd_solve_opt, "exact optimal profile")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--cost", choices=KINDS, required=True)
    sp.add_argument("--k", type=_positive_int)
    sp.add_argument("--limit", type=_positive_int, default=exact.DEFAULT_LIMIT)
    sp.add_argument("--out")

    sp = cmd("build", cmd_build, "build a hierarchy")
    sp.add_argument("--algo", choices=ALGOS, required=True)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--cost", choices=KINDS, required=True)
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--profile")
    sp.add_argument("--limit", type=_positive_int, default=exact.DEFAULT_LIMIT)
    sp.add_argument("--trace")
    sp.add_argument("--out")

    sp = cmd("eval", cmd_eval, "per-level approximation ratios as CSV")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--hierarchy", required=True)
    sp.add_argument("--cost", choices=KINDS, required=True)
    sp.add_argument("--profile")
    sp.add_argument("--limit", type=_positive_int, default=exact.DEFAULT_LIMIT)
    sp.add_argument("--out")

    sp = cmd("poh", cmd_poh, "exhaustive price of hierarchy")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--cost", choices=KINDS, required=True)
    sp.add_argument("--limit", type=_positive_int, default=POH_LIMIT)
    sp.add_argument("--out")

    sp = cmd("certify", cmd_certify, "lower-bound certificate for a hierarchy")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--hierarchy", required=True)
    sp.add_argument("--cost", choices=KINDS, required=True)
    sp.add_argument("--k", type=_positive_int)
    sp.add_argument("--max-depth", type=_positive_int, default=2)
    sp.add_argument("--out")

    sp = cmd("analyze-seq", cmd_analyze_seq, "anchor-sequence recurrence analysis")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--variant", type=int, choices=(1, 2), required=True)
    sp.add_argument("--k", type=_positive_int, help="also search for a feasible sequence ending at k")
    sp.add_argument("--grid", type=_positive_int, default=10_000)
    sp.add_argument("--out")

    sp = cmd("mondal-search", cmd_mondal_search, "random search for bad parent-tree instances")
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--trials", type=_positive_int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("--limit", type=_positive_int, default=exact.DEFAULT_LIMIT)
    sp.add_argument("--out")
    return p


def _fail(kind, message, command, code):
    rec = {"error": kind, "message": message, "command": command}
    sys.stderr.write(json.dumps(rec) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ParseError as exc:
        return _fail("ParseError", str(exc), None, 2)
    try:
        args.func(args)
    except FileNotFoundError as exc:
        return _fail("FileNotFound", str(exc), args.command, 1)
    except (HierClustError, ValueError, KeyError, IndexError, json.JSONDecodeError) as exc:
        return _fail(type(exc).__name__, str(exc), args.command, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
