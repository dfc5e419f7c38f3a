"""Command-line front end.

Verbs: check, invariants, normalize, equiv, cohomology, selftest,
bruteforce-flagforms, flag-invariants, random.  JSON in, JSON out, canonical
term ordering; exit 0 on success/recognized/equivalent, 1 on a negative
decision, 2 on malformed input.  CARTAN_SEED overrides the default seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .algebra import FlagSpec
from .classify import (equivalent, invariants, normal_shape, random_form,
                       recognize)
from .flagbilinear import (admissible_grids, brute_force_orbit_partition,
                           flagged_from_dims, grid_fibers, invariants_nqt)
from .forms import cohomology_basis, cohomology_dims, render_form
from .jsonio import (FormatError, form_from_json, form_to_json,
                     invariants_to_json)


def _load_form(path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as ex:
        raise FormatError(path, str(ex))
    except json.JSONDecodeError as ex:
        raise FormatError(f"{path}:{ex.lineno}", ex.msg)
    return form_from_json(data)


def _emit(data) -> None:
    json.dump(data, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_check(args) -> int:
    cand = _load_form(args.form)
    kind = recognize(cand)
    _emit({"kind": kind})
    return 0 if kind != "no" else 1


def cmd_invariants(args) -> int:
    cand = _load_form(args.form)
    if recognize(cand) == "no":
        _emit({"kind": "no"})
        return 1
    _emit(invariants_to_json(invariants(cand)))
    return 0


def cmd_normalize(args) -> int:
    cand = _load_form(args.form)
    if recognize(cand) == "no":
        _emit({"kind": "no"})
        return 1
    shape = normal_shape(invariants(cand), cand.spec.p)
    payload = form_to_json(shape)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        _emit(payload)
    return 0


def cmd_equiv(args) -> int:
    a = _load_form(args.form_a)
    b = _load_form(args.form_b)
    ok, report = equivalent(a, b)
    _emit({"equivalent": ok, "report": report})
    return 0 if ok else 1


def cmd_cohomology(args) -> int:
    heights = tuple(int(x) for x in args.heights.split(","))
    spec = FlagSpec(args.p, heights)
    dims = cohomology_dims(spec)
    k = args.degree
    if k < 0 or k > spec.n:
        raise FormatError("degree", f"outside 0..{spec.n}")
    classes = [render_form(z) for z in cohomology_basis(spec, k)]
    _emit({"p": spec.p, "heights": list(heights), "degree": k,
           "dim": dims[k], "classes": classes})
    return 0


def cmd_bruteforce(args) -> int:
    dims = [int(x) for x in args.dims.split(",")]
    orbits = brute_force_orbit_partition(args.p, dims)
    fibers = grid_fibers(args.p, dims)
    agree = sorted(map(sorted, orbits)) == sorted(map(sorted, fibers.values()))
    fd = [dims[0]] + [b - a for a, b in zip(dims, dims[1:])]
    grids = list(admissible_grids(fd))
    _emit({"p": args.p, "flag_dims": dims, "orbits": len(orbits),
           "admissible_grids": len(grids), "fibers_match_orbits": agree})
    return 0 if agree and len(orbits) == len(grids) else 1


def cmd_flag_invariants(args) -> int:
    try:
        with open(args.matrix) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as ex:
        raise FormatError(args.matrix, str(ex))
    p = data.get("p")
    dims = data.get("flag_dims")
    mat = data.get("matrix")
    if not isinstance(p, int) or not isinstance(dims, list) \
            or not isinstance(mat, list):
        raise FormatError("<root>", "need p, flag_dims, matrix")
    fb = flagged_from_dims(p, dims, np.array(mat, dtype=np.int64))
    grid = invariants_nqt(fb)
    _emit({"p": p, "flag_dims": dims, "grid": grid.tolist()})
    return 0


def cmd_random(args) -> int:
    heights = tuple(int(x) for x in args.heights.split(","))
    spec = FlagSpec(args.p, heights)
    seed = args.seed if args.seed is not None else _default_seed()
    cand = random_form(args.kind, spec, seed)
    payload = form_to_json(cand)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        _emit(payload)
    return 0


def _default_seed() -> int:
    return int(os.environ.get("CARTAN_SEED", "12061986"))


def cmd_selftest(args) -> int:
    import math
    import random as _random
    from .algebra import AlgebraElement, random_element
    from .classify import apply_to_candidate
    from .forms import is_exact_with_potential
    from .groups import random_in

    seed = args.seed if args.seed is not None else _default_seed()
    rng = _random.Random(seed)
    p = args.p
    n = max(1, args.n)
    heights = tuple(rng.choice([1, 2]) for _ in range(n))
    spec = FlagSpec(p, heights)
    failures = 0

    def report(name, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        failures += 0 if ok else 1

    ok = True
    for _ in range(args.iters):
        f = random_element(rng, spec, 2)
        g = random_element(rng, spec, 2)
        lhs = (f + g).dp_free(p)
        rhs = AlgebraElement.zero(spec)
        for i in range(p + 1):
            rhs = rhs + f.dp_free(i).mul_free(g.dp_free(p - i))
        ok = ok and lhs == rhs and not f.mul_free(g).dp_free(p)
    report("divided power identities", ok)

    ok = cohomology_dims(spec) == [math.comb(spec.n, k)
                                   for k in range(spec.n + 1)]
    report("cohomology dimensions", ok)

    from .forms import d_element
    ok = True
    for _ in range(args.iters):
        f = random_element(rng, spec, 3, in_m=False)
        omega = d_element(f)
        phi = is_exact_with_potential(omega)
        ok = ok and phi is not None and phi.d() == omega
    report("exactness solver round trip", ok)

    ok = True
    even = spec if spec.n % 2 == 0 else FlagSpec(p, heights + (1,))
    for trial in range(max(1, args.iters // 5)):
        cand = random_form("type1", even, seed + trial)
        sigma = random_in(rng, cand.spec, "G")
        moved = apply_to_candidate(sigma, cand)
        same, _ = equivalent(cand, moved)
        ok = ok and same
    report("type-1 orbit invariance", ok)
    return 2 if failures else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="charpforms",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("check", help="recognize a form file")
    s.add_argument("form")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("invariants", help="complete conjugacy invariants")
    s.add_argument("form")
    s.set_defaults(fn=cmd_invariants)

    s = sub.add_parser("normalize", help="emit the canonical normal shape")
    s.add_argument("form")
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_normalize)

    s = sub.add_parser("equiv", help="decide equivalence of two form files")
    s.add_argument("form_a")
    s.add_argument("form_b")
    s.set_defaults(fn=cmd_equiv)

    s = sub.add_parser("cohomology", help="de Rham dimensions and classes")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--heights", required=True)
    s.add_argument("--degree", type=int, required=True)
    s.set_defaults(fn=cmd_cohomology)

    s = sub.add_parser("selftest", help="run the property suites")
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--iters", type=int, default=25)
    s.set_defaults(fn=cmd_selftest)

    s = sub.add_parser("bruteforce-flagforms",
                       help="exhaustive orbit/invariant cross-check")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--dims", required=True)
    s.set_defaults(fn=cmd_bruteforce)

    s = sub.add_parser("flag-invariants", help="invariant grid of a matrix")
    s.add_argument("matrix")
    s.set_defaults(fn=cmd_flag_invariants)

    s = sub.add_parser("random", help="generate a recognized random form")
    s.add_argument("--kind", required=True,
                   choices=["type1", "type2", "contact"])
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--heights", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_random)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except FormatError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
