"""Command-line front end: ``majorfame {bound,detect,radii,witness,states}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from functools import reduce
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    BoundCache,
    BoundResult,
    PartitionSpec,
    atomic_write_text,
    cache_key,
    kseparable_bound,
    sampled_bound,
    seesaw_bound,
    spectral_bound,
)
from .detect import (
    build_witnesses,
    circle_radius,
    evaluate_witness,
    normalize_criterion,
    run_detection,
)
from .io import dumps, encode_matrix, povm_from_dict, read_json
from .measurements import Povm, bell_basis, computational_basis, measure, product_povm
from .majorization import hellinger_distance, uniform
from .states import KINDS, build_state, parse_state, state_from_json

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2, 3


class InvalidInput(Exception):
    pass


class MissingBound(Exception):
    pass


class NonConverged(Exception):
    pass


BUILTIN_POVMS = {"bell": bell_basis, "computational": computational_basis, "comp": computational_basis}


def load_povm(text: str) -> Povm:
    """A POVM JSON file, or builtins joined by ``*``, e.g. ``bell(2)*computational(2)``."""
    path = Path(text)
    if path.exists():
        return povm_from_dict(read_json(path))
    factors = []
    for term in text.split("*"):
        term = term.strip()
        name, _, arg = term.partition("(")
        if name not in BUILTIN_POVMS or not arg.endswith(")"):
            raise InvalidInput(f"{text!r} is neither a POVM file nor a builtin like bell(2)")
        factors.append(BUILTIN_POVMS[name](int(arg[:-1])))
    return reduce(product_povm, factors)


def load_state(text: str):
    path = Path(text)
    if path.exists():
        data = read_json(path)
        if "kind" in data:
            return state_from_json(data)
        return parse_state(f"file({path})")
    return parse_state(text)


def default_cache_dir(flag: str | None) -> Path:
    if flag:
        return Path(flag)
    env = os.environ.get("MAJORFAME_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "majorfame"


def bound_targets(args, n: int) -> list:
    targets: list = [PartitionSpec.parse(p) for p in (args.partition or [])]
    targets += [int(k) for k in (args.k or [])]
    return targets


def get_bound(povm: Povm, target, args, cache: BoundCache | None) -> tuple[BoundResult, bool]:
    """Load ``target``'s bound from the cache, computing and storing it on a miss."""
    method = args.method
    if method == "spectral":
        label = "unconstrained"
    elif isinstance(target, int):
        label = f"k={target}"
    else:
        label = str(target)
    extra = f"restarts={args.restarts},samples={args.samples},max_iters={args.max_iters}"
    key = cache_key(povm.content_hash(), label, method, args.seed, extra)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit, True
    if getattr(args, "no_compute", False):
        raise MissingBound(f"no cached bound for {label} ({method}) and --no-compute given")
    if method == "spectral":
        result = spectral_bound(povm)
    elif method == "sampled":
        if isinstance(target, int):
            result = kseparable_bound(povm, target, method="sampled", samples=args.samples, seed=args.seed)
        else:
            result = sampled_bound(povm, target, samples=args.samples, seed=args.seed)
    else:
        kw = dict(restarts=args.restarts, seed=args.seed, max_iters=args.max_iters)
        result = kseparable_bound(povm, target, **kw) if isinstance(target, int) else seesaw_bound(povm, target, **kw)
    if cache is not None:
        cache.put(key, result, {"label": label, "restarts": args.restarts, "samples": args.samples})
    return result, False


def _bounds(args, povm: Povm, default_all_k: bool = False) -> list[BoundResult]:
    n = povm.spec.n
    targets = bound_targets(args, n)
    if not targets:
        if args.method == "spectral":
            targets = [None]
        elif default_all_k:
            targets = list(range(n, 1, -1))
        else:
            raise InvalidInput("give at least one --partition or --k")
    cache = None if args.no_cache else BoundCache(default_cache_dir(args.cache))
    out = []
    for t in targets:
        result, hit = get_bound(povm, t, args, cache)
        if args.strict and not result.converged:
            raise NonConverged(f"optimizer did not converge for {result.label}")
        out.append(result)
    return out


def _emit(text: str, out: str | None):
    if out:
        atomic_write_text(Path(out), text)
    else:
        sys.stdout.write(text)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


def cmd_bound(args) -> int:
    povm = load_povm(args.povm)
    results = _bounds(args, povm)
    for r in results:
        print(f"[{r.label}] method={r.method} converged={r.converged} exhaustive={r.exhaustive}", file=sys.stderr)
        print(f"  Omega = {_fmt(r.prefix_maxima)}", file=sys.stderr)
        print(f"  omega = {_fmt(r.omega)}", file=sys.stderr)
    if args.format == "csv":
        rows = [["bound_id", "k", "Omega_k", "omega_k"]]
        for r in results:
            rows += [[r.label, k + 1, repr(float(r.prefix_maxima[k])), repr(float(r.omega[k]))] for k in range(r.m)]
        _emit(_csv(rows), args.out)
    else:
        _emit(dumps([r.to_dict() for r in results]), args.out)
    return EXIT_OK


def _criteria(args) -> list[str]:
    text = args.criteria or "majorization"
    return [normalize_criterion(t) for t in text.split(",") if t.strip()]


def cmd_detect(args) -> int:
    povm = load_povm(args.povm)
    spec = load_state(args.state)
    criteria = _criteria(args)
    bounds = _bounds(args, povm)
    if args.sweep:
        rows = [["q", "criterion", "bound_id", "violated", "margin", "conclusion"]]
        for q in np.linspace(0.0, 1.0, args.sweep):
            rho = build_state(spec.with_param("q", float(q)))
            rep = run_detection(rho, povm, bounds, criteria, str(spec), args.povm)
            for v in rep.verdicts:
                rows.append([f"{q:.6g}", v.criterion, v.bound_id, int(v.violated), repr(v.margin), v.conclusion])
        _emit(_csv(rows), args.out)
        return EXIT_OK
    rho = build_state(spec)
    report = run_detection(rho, povm, bounds, criteria, spec.id or str(spec), args.povm)
    if args.format == "csv":
        rows = [["criterion", "bound_id", "violated", "prefix", "gap", "margin", "conclusion"]]
        rows += [[v.criterion, v.bound_id, int(v.violated), v.prefix, v.gap, repr(v.margin), v.conclusion]
                 for v in report.verdicts]
        _emit(_csv(rows), args.out)
    else:
        _emit(dumps(report.to_dict()), args.out)
    print(f"conclusion: {report.conclusion}", file=sys.stderr)
    if args.expect is not None and args.expect != report.conclusion:
        print(f"expected {args.expect!r}, got {report.conclusion!r}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_radii(args) -> int:
    povm = load_povm(args.povm)
    bounds = _bounds(args, povm, default_all_k=True)
    rows = [["bound_id", "k", "radius", "radius_squared"]]
    for b in bounds:
        r = circle_radius(b)
        rows.append([b.label, "" if b.k is None else b.k, repr(r), repr(r * r)])
    if args.state:
        rho = build_state(load_state(args.state))
        p = measure(rho, povm)
        r = hellinger_distance(p, uniform(p.size))
        rows.append(["state", "", repr(r), repr(r * r)])
    if args.format == "json":
        keys = rows[0]
        _emit(dumps([dict(zip(keys, row)) for row in rows[1:]]), args.out)
    else:
        _emit(_csv(rows), args.out)
    return EXIT_OK


def cmd_witness(args) -> int:
    povm = load_povm(args.povm)
    bounds = _bounds(args, povm)
    rho = build_state(load_state(args.state)) if args.state else None
    out = []
    for b in bounds:
        for w in build_witnesses(povm, b):
            item = {
                "bound_id": b.label,
                "k": w.k,
                "subset": list(w.subset),
                "omega_k": w.omega_k,
                "heuristic": w.heuristic,
                "matrix": encode_matrix(w.operator.matrix),
            }
            if rho is not None:
                item["value"] = evaluate_witness(w, rho)
            out.append(item)
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_states(args) -> int:
    for kind, text in KINDS.items():
        print(f"{kind:10s} {text}")
    return EXIT_OK


def _add_bound_args(p: argparse.ArgumentParser):
    p.add_argument("--povm", required=True, help="POVM JSON file or builtin, e.g. 'bell(2)*computational(2)'")
    p.add_argument("--partition", action="append", help="separability partition such as 'AB|C' (repeatable)")
    p.add_argument("--k", action="append", type=int, help="k-separable bound (repeatable)")
    p.add_argument("--method", choices=("seesaw", "sampled", "spectral"), default="seesaw")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-iters", type=int, default=500, help="see-saw sweep limit per restart")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache", help="cache directory (default: $MAJORFAME_CACHE or ~/.cache/majorfame)")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--strict", action="store_true", help="exit 3 if an optimizer did not converge")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="majorfame", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="compute and cache bound vectors")
    _add_bound_args(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("detect", help="run entanglement criteria on a state")
    _add_bound_args(p)
    p.add_argument("--state", required=True)
    p.add_argument("--criteria", help="comma-separated, e.g. majorization,schur:shannon,circle:hellinger,witness")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--expect", help="exit 1 unless the conclusion equals this")
    p.add_argument("--no-compute", action="store_true", help="fail instead of computing missing bounds")
    p.add_argument("--sweep", type=int, nargs="?", const=101, default=None,
                   help="sweep the state's 'q' over N points of [0, 1] (default 101); CSV output")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("radii", help="k-circle radii for plotting")
    _add_bound_args(p)
    p.add_argument("--state")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_radii)

    p = sub.add_parser("witness", help="emit witness operators and their values on a state")
    _add_bound_args(p)
    p.add_argument("--state")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("states", help="state library")
    p.add_argument("action", choices=("list",))
    p.set_defaults(func=cmd_states)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonConverged as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (InvalidInput, MissingBound, ValueError, KeyError, json.JSONDecodeError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
