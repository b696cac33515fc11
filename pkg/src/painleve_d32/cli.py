"""Command-line entry point: verification suite, group explorer, integrator.

Exit codes: 0 all requested checks pass, 1 verification or domain failure,
2 usage error.  ``--format records`` emits line-delimited JSON records, one
per check, suitable for golden files; text output is deterministic for a
fixed seed apart from the timing fields.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import models, numeric, verify, weyl

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _emit_reports(reports, fmt: str, out_path: Optional[str]) -> None:
    if fmt == "records":
        lines = [json.dumps(r.to_record(), sort_keys=True) for r in reports]
    else:
        lines = [r.format_line() for r in reports]
        npass = sum(r.passed for r in reports)
        lines.append(f"{npass}/{len(reports)} checks passed")
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_verify(args) -> int:
    variant = None if args.variant == "resolved" else args.variant
    reports = verify.run_scope(args.scope, variant=variant)
    for r in reports:
        if r.seed is None:
            r.seed = args.seed
    if args.map_id:
        reports = [r for r in reports if args.map_id in r.check_id]
        if not reports:
            print(f"no checks match map {args.map_id!r}", file=sys.stderr)
            return EXIT_USAGE
    _emit_reports(reports, args.format, args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_group(args) -> int:
    if args.action == "relations":
        reports = weyl.verify_group_relations(
            sample_count=args.samples, seed=args.seed
        )
        reports.append(weyl.translation_report())
        _emit_reports(reports, args.format, args.out)
        return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL

    if not args.word:
        print("group action/shift/orbit needs a word, e.g. \"s1 s2 s1 s0\"",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        context = args.context or ("th2" if "pi" in args.word.split() else "th1")
        word = weyl.parse_word(args.word, context)
        action = weyl.parameter_action(word)
    except weyl.WordError as exc:
        print(f"unparsable word: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.action == "action":
        print(f"word: {word} (context {word.context})")
        for row in action.matrix:
            print("  " + " ".join(f"{c:3d}" for c in row))
        print(f"offset: {action.offset}")
        print(f"eta_sign: {action.eta_sign:+d}  indep_sign: {action.indep_sign:+d}")
        return EXIT_OK

    if args.action == "orbit":
        import random

        point = weyl.random_point(random.Random(args.seed), word.context)
        print(f"word: {word} (context {word.context}, seed {args.seed})")
        print(f"step 0: {weyl.format_point(point, word.context)}")
        for step in range(1, args.steps + 1):
            try:
                point = weyl.apply_word_to_point(word, point)
            except Exception as exc:
                print(f"step {step}: singular ({exc})")
                return EXIT_FAIL
            print(f"step {step}: {weyl.format_point(point, word.context)}")
        return EXIT_OK

    shift = weyl.translation_shift(word)
    if shift is None:
        print(f"word: {word} is not a pure parameter translation")
        return EXIT_FAIL
    print(f"shift: {shift.vector}  eta_sign: {shift.eta_sign:+d}  "
          f"indep_sign: {shift.indep_sign:+d}")
    return EXIT_OK


def _parse_params(text: str) -> dict[str, float]:
    params = {}
    if not text:
        return params
    for chunk in text.split(","):
        name, _, value = chunk.partition("=")
        if not _:
            raise ValueError(f"malformed parameter binding {chunk!r}")
        params[name.strip()] = float(value)
    return params


def cmd_integrate(args) -> int:
    try:
        params = _parse_params(args.params)
        init = [float(v) for v in args.init.split(",")]
        u0, u1 = (float(v) for v in args.span.split(","))
    except ValueError as exc:
        print(f"bad numeric arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE
    mode = "fixed" if args.fixed_step else "adaptive"
    try:
        traj = numeric.integrate(
            args.system, params, init, (u0, u1),
            tolerances=(args.abs_tol, args.rel_tol),
            mode=mode, step=args.fixed_step,
        )
    except numeric.DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (numeric.UsageError, models.UnknownModelError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.out:
        traj.write_csv(args.out)
        traj.write_metadata(args.out + ".json")
        print(f"wrote {args.out} and {args.out}.json")
    print(f"system {traj.system_id}: {len(traj.times)} samples, "
          f"termination {traj.termination}")
    for integral_id in models.INTEGRAL_IDS:
        integral = models.load_integral(integral_id)
        if integral.system_id != traj.system_id:
            continue
        drift = numeric.invariant_drift(traj, integral_id)
        print(f"drift {integral_id}: {drift:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="painleve-d32",
        description="Verification toolkit for the coupled Painleve-type system "
        "with D3(2) Weyl group symmetry.",
    )
    parser.add_argument(
        "--dump-models", action="store_true",
        help="print the whole model registry in canonical text form and exit",
    )
    sub = parser.add_subparsers(dest="command")

    p_verify = sub.add_parser("verify", help="run identity checks")
    p_verify.add_argument("scope", nargs="?", default="all", choices=verify.SCOPES)
    p_verify.add_argument("--variant", default="resolved",
                          choices=("resolved", "printed", "corrected", "both"),
                          help="disputed-object policy (default: resolve both)")
    p_verify.add_argument("--map", dest="map_id", default=None,
                          help="only checks mentioning this map id")
    p_verify.add_argument("--seed", type=int, default=verify.WITNESS_SEED,
                          help="recorded in structured reports (checks are "
                               "sampling-free and deterministic)")
    p_verify.add_argument("--format", default="text", choices=("text", "records"))
    p_verify.add_argument("--out", default=None, help="also write the report here")

    p_group = sub.add_parser("group", help="Weyl group explorer")
    p_group.add_argument("action", choices=("relations", "action", "shift", "orbit"))
    p_group.add_argument("word", nargs="?", default=None,
                         help='generator word like "s1 s2 s1 s0"')
    p_group.add_argument("--context", default=None, choices=("th1", "th2"))
    p_group.add_argument("--samples", type=int, default=weyl.DEFAULT_SAMPLES)
    p_group.add_argument("--seed", type=int, default=weyl.DEFAULT_SEED)
    p_group.add_argument("--steps", type=int, default=4,
                         help="orbit length for the orbit action")
    p_group.add_argument("--format", default="text", choices=("text", "records"))
    p_group.add_argument("--out", default=None)

    p_int = sub.add_parser("integrate", help="numerically integrate a system")
    p_int.add_argument("system")
    p_int.add_argument("--params", default="",
                       help="comma list of name=value parameter bindings")
    p_int.add_argument("--init", required=True, help="comma list of initial values")
    p_int.add_argument("--span", required=True, help="u0,u1")
    p_int.add_argument("--abs-tol", type=float, default=1e-10)
    p_int.add_argument("--rel-tol", type=float, default=1e-10)
    p_int.add_argument("--fixed-step", type=float, default=None)
    p_int.add_argument("--out", default=None, help="CSV path (JSON sidecar added)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_models:
        sys.stdout.write(models.dump_models())
        return EXIT_OK
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "group":
        return cmd_group(args)
    if args.command == "integrate":
        return cmd_integrate(args)
    parser.print_help()
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
