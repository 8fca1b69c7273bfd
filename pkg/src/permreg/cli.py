"""Command-line front end.

JSON results go to standard output (sorted keys, so identical runs are
byte-identical); a short human summary goes to standard error.  Exit codes:
0 success, 1 usage or I/O error, 2 partial result (a limit was exhausted).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from math import comb

from .core import PermError, format_permutation, generate, parse_permutation
from .counting import estimate_pattern_count
from .patterns import (ENUM_GUARD, Pattern, count_pattern, destroy_pattern,
                       verify_destroyed)
from .quasirand import quasirandom_report
from .regularity import regular_partition
from .uniformity import UniformityError, uniform_partition


def _add_source(p: argparse.ArgumentParser):
    p.add_argument("--input", help="path to a one-line permutation file")
    p.add_argument("--gen", choices=["identity", "reverse", "interleave", "random"],
                   help="generate the input permutation instead of reading it")
    p.add_argument("--n", type=int, help="size for --gen")
    p.add_argument("--seed", type=int, default=0, help="seed for --gen random")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--output", "-o", help="write the result here instead of stdout")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("PERMREG_THREADS", "0") or 0),
                   help="cap on worker threads (0 = auto)")


def _load_sigma(args):
    if bool(args.input) == bool(args.gen):
        raise PermError("exactly one of --input or --gen is required")
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            return parse_permutation(fh.read())
    if args.n is None:
        raise PermError("--gen requires --n")
    return generate(args.gen, args.n, args.seed)


def _emit(args, payload, text=None):
    out = text if text is not None else json.dumps(payload, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _parse_tau(text) -> Pattern:
    return Pattern(parse_permutation(text))


def cmd_gen(args) -> int:
    if args.kind is None or args.n is None:
        raise PermError("gen requires --kind and --n")
    sigma = generate(args.kind, args.n, args.seed)
    _emit(args, None, text=format_permutation(sigma))
    print(f"generated {args.kind} permutation of size {args.n}", file=sys.stderr)
    return 0


def cmd_partition(args) -> int:
    sigma = _load_sigma(args)
    if args.mode == "regular":
        _, report, _ = regular_partition(sigma, args.eps, m=args.m)
        _emit(args, report.to_json())
        status = "regular" if report.regular else "NOT regular (limits hit)"
        print(f"n={sigma.n} eps={args.eps}: {status}, k={report.k}, "
              f"q={report.q_value:.6f}", file=sys.stderr)
        return 0 if report.regular else 2
    try:
        U = uniform_partition(sigma, args.eps, m=args.m)
    except UniformityError as exc:
        _emit(args, {"error": str(exc), "trace": exc.trace})
        print(f"uniform partition failed: {exc}", file=sys.stderr)
        return 2
    _emit(args, U.to_json())
    print(f"n={sigma.n} eps={args.eps}: uniform with k={U.partition.k}, "
          f"|C_0|={len(U.partition.exceptional)}", file=sys.stderr)
    return 0


def cmd_count(args) -> int:
    sigma = _load_sigma(args)
    tau = _parse_tau(args.tau)
    m, n = tau.m, sigma.n
    payload = {"n": n, "m": m, "tau": list(tau.key())}
    want_exact = not args.estimate or args.both
    want_estimate = args.estimate or args.both
    if want_exact:
        if m > 6 or comb(n, m) > ENUM_GUARD and m > 3:
            raise PermError("instance too large for exact counting; use --estimate")
        payload["exact"] = count_pattern(sigma, tau)
    if want_estimate:
        U = uniform_partition(sigma, args.eps)
        rep = estimate_pattern_count(sigma, U, tau)
        payload.update({"estimate": rep["estimate"], "bound": rep["bound"],
                        "k": rep["k"], "epsilon": rep["epsilon"]})
    _emit(args, payload)
    bits = [f"{k}={payload[k]}" for k in ("exact", "estimate") if k in payload]
    print(f"pattern {tau.key()} in n={n}: " + ", ".join(bits), file=sys.stderr)
    return 0


def cmd_destroy(args) -> int:
    sigma = _load_sigma(args)
    tau = _parse_tau(args.tau)
    S, audit = destroy_pattern(sigma, tau, args.eps)
    payload = {"n": sigma.n, "tau": list(tau.key()), "epsilon": args.eps,
               "pairs": S.to_json(), "audit": audit}
    if tau.m <= 4 and comb(sigma.n, tau.m) <= ENUM_GUARD:
        ok, witness = verify_destroyed(sigma, tau, S)
        payload["verified"] = ok
        if witness is not None:
            payload["surviving"] = list(witness)
    _emit(args, payload)
    print(f"deleted {len(S)} pairs; verified={payload.get('verified')}", file=sys.stderr)
    return 0


def cmd_qr(args) -> int:
    sigma = _load_sigma(args)
    report = quasirandom_report(sigma, eps=args.eps, k_max=args.k_max)
    _emit(args, report.to_json())
    print(f"n={sigma.n}: D*={report.d_star:.2f}, near_id={report.near_id}",
          file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="permreg",
                                 description="permutation regularity toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a permutation file")
    g.add_argument("--kind", choices=["identity", "reverse", "interleave", "random"])
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int, default=0)
    _add_common(g)
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("partition", help="regular or uniform partition")
    _add_source(p)
    _add_common(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--mode", choices=["regular", "uniform"], default="regular")
    p.add_argument("--m", type=int, default=2, help="minimum part count")
    p.set_defaults(func=cmd_partition)

    c = sub.add_parser("count", help="exact or estimated pattern count")
    _add_source(c)
    _add_common(c)
    c.add_argument("--tau", required=True, help="pattern in one-line form")
    c.add_argument("--estimate", action="store_true")
    c.add_argument("--both", action="store_true")
    c.add_argument("--eps", type=float, default=0.05,
                   help="epsilon for the estimator's partition")
    c.set_defaults(func=cmd_count)

    d = sub.add_parser("destroy", help="pair deletions destroying a pattern")
    _add_source(d)
    _add_common(d)
    d.add_argument("--tau", required=True)
    d.add_argument("--eps", type=float, required=True)
    d.set_defaults(func=cmd_destroy)

    q = sub.add_parser("qr", help="quasirandomness report")
    _add_source(q)
    _add_common(q)
    q.add_argument("--eps", type=float, default=0.15)
    q.add_argument("--k-max", type=int, default=8)
    q.set_defaults(func=cmd_qr)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap (help/version stay 0)
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (PermError, OSError, ValueError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
