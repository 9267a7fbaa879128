"""Command-line surface.

Subcommands: model (emit interchange/DOT), strat (system verification and
construction, multiplicities), monoid / k0 / jh (Grothendieck reports).
Exit codes: 0 ok, 2 configuration, 3 validation, 4 missing annotations,
5 consistency violation.  The default field characteristic comes from
EXTCAT_CHAR when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import grothendieck as groth
from . import strat
from .core import validate_model
from .derived import build_window
from .dot import render_dot
from .errors import (
    AnnotationMissing,
    ConsistencyError,
    ExtcatError,
    ParseError,
    SchemaError,
    UnknownIndec,
    ValidationError,
)
from .fixtures import FIXTURE_NAMES, SYSTEM_PHIS, fixture
from .tables import load_model, save_model

EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_ANNOTATION = 4
EXIT_CONSISTENCY = 5


class ConfigError(Exception):
    pass


def _default_char():
    return int(os.environ.get("EXTCAT_CHAR", "2"))


def _add_source_args(sub):
    sub.add_argument("--fixture", choices=FIXTURE_NAMES, help="bundled fixture name")
    sub.add_argument("--file", help="interchange file path")
    sub.add_argument("--mode", choices=("general", "exact"), help="override file mode")
    sub.add_argument("--build", help="window spec, e.g. n=4,shifts=0:1,label=win")
    sub.add_argument("--char", type=int, default=None, help="field characteristic")
    sub.add_argument("--phi", help="comma-separated system, e.g. S2,P3,S3[1]")


def _parse_build(spec: str, p: int):
    params = {}
    for part in spec.split(","):
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"bad --build entry {part!r}")
        k, v = part.split("=", 1)
        params[k.strip()] = v.strip()
    if "n" not in params:
        raise ConfigError("--build needs n=<rank>")
    n = int(params["n"])
    if n < 1:
        raise ConfigError("--build needs n >= 1")
    shifts = [int(s) for s in params.get("shifts", "0").split(":")]
    label = params.get("label", f"A{n}")
    return build_window(n, shifts, label=label, p=p)


def _load_source(args):
    p = args.char if args.char is not None else _default_char()
    phi_names = tuple(args.phi.split(",")) if args.phi else None
    if args.fixture:
        fx = fixture(args.fixture, p=p)
        model = fx.model
        if phi_names is None:
            phi_names = fx.phi_names
        return model, phi_names
    if args.file:
        model = load_model(args.file)
        if args.mode:
            model.meta["is_exact_mode"] = args.mode == "exact"
            model.backend.exact_mode = args.mode == "exact"
        return model, phi_names
    if args.build:
        return _parse_build(args.build, p), phi_names
    raise ConfigError("one of --fixture, --file, --build is required")


def _emit(report, args):
    text = json.dumps(report, indent=2, sort_keys=True)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _system_for(model, phi_names, args):
    if not phi_names:
        raise ConfigError("this subcommand needs a system: --fixture ex5_* or --phi")
    phi = tuple(model.index_of(nm) for nm in phi_names)
    if getattr(args, "check", None):
        q_objs = tuple(model.parse_obj(nm) for nm in args.check.split(","))
        return strat.complete_system(model, phi, q_objs), False
    return strat.build_projective_system(phi, model), True


def cmd_model(args):
    model, phi_names = _load_source(args)
    report = validate_model(model)
    if not report.ok:
        raise ValidationError(report)
    highlight = []
    if args.highlight:
        if args.highlight == "filtered":
            if not phi_names:
                raise ConfigError("--highlight filtered needs a system fixture or --phi")
            phi = tuple(model.index_of(nm) for nm in phi_names)
            closure = strat.filtered_closure(phi, model)
            highlight = closure.member_names(model)
        else:
            highlight = [nm.strip() for nm in args.highlight.split(",")]
            for nm in highlight:
                model.index_of(nm)
    written = []
    if args.save:
        save_model(model, args.save)
        written.append(args.save)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(render_dot(model, highlight))
        written.append(args.dot)
    _emit(
        {
            "window": model.window_label,
            "indecs": [i.name for i in model.indecs],
            "highlight": sorted(highlight),
            "written": written,
            "validation": "ok",
        },
        args,
    )
    return 0


def cmd_strat(args):
    model, phi_names = _load_source(args)
    sys_obj, constructed = _system_for(model, phi_names, args)
    report = strat.strat_report(model, sys_obj, constructed)
    if args.multiplicities:
        spec = args.multiplicities
        if spec.startswith("M="):
            spec = spec[2:]
        m = model.parse_obj(spec)
        report["multiplicities"] = {
            "M": model.label(m),
            "m": strat.multiplicities(m, sys_obj, model),
        }
    jh, length, _ = groth.jh_and_length_verdict(model)
    report["jh"] = jh
    report["length"] = length
    _emit(report, args)
    return 0


def cmd_monoid(args):
    model, _ = _load_source(args)
    report = groth.groth_report(model)
    if args.equal:
        x = model.parse_obj(args.equal[0])
        y = model.parse_obj(args.equal[1])
        verdict = groth.monoid_equal(x, y, model)
        report["equal_query"] = {
            "x": model.label(x),
            "y": model.label(y),
            "status": verdict.status,
            "chain": verdict.chain,
            "separator": verdict.separator,
        }
    _emit(report, args)
    return 0


def cmd_k0(args):
    model, _ = _load_source(args)
    simple_set = groth.simples(model)
    result = groth.k0(model, simple_indices=simple_set)
    _emit(
        {
            "window": model.window_label,
            "rank": result.free_rank,
            "invariant_factors": result.invariant_factors,
            "basis_flag": result.basis_flag,
            "simples": [model.name_of(i) for i in simple_set],
        },
        args,
    )
    return 0


def cmd_jh(args):
    model, _ = _load_source(args)
    report = groth.groth_report(model)
    _emit(report, args)
    if report["agree"] is not True:
        raise ConsistencyError("three-way cross-check did not agree")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="extcat",
        description="finite extriangulated-category windows: stratifying systems, "
        "filtrations, Grothendieck monoid/group, Jordan-Holder analysis",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_model = subs.add_parser("model", help="emit interchange files and DOT renderings")
    _add_source_args(p_model)
    p_model.add_argument("--dot", help="write a DOT rendering here")
    p_model.add_argument("--save", help="write the interchange file here")
    p_model.add_argument("--highlight", help="'filtered' or comma-separated names")
    p_model.add_argument("--out", help="write the JSON summary here")
    p_model.set_defaults(func=cmd_model)

    p_strat = subs.add_parser("strat", help="stratifying-system analysis")
    _add_source_args(p_strat)
    p_strat.add_argument("--construct", action="store_true", help="build the minimal cover system")
    p_strat.add_argument("--check", help="comma-separated Q to validate instead of constructing")
    p_strat.add_argument("--multiplicities", help="object spec M=... for factor counts")
    p_strat.add_argument("--out", help="write the JSON report here")
    p_strat.set_defaults(func=cmd_strat)

    p_monoid = subs.add_parser("monoid", help="Grothendieck monoid report")
    _add_source_args(p_monoid)
    p_monoid.add_argument("--equal", nargs=2, metavar=("X", "Y"), help="word-problem query")
    p_monoid.add_argument("--out", help="write the JSON report here")
    p_monoid.set_defaults(func=cmd_monoid)

    p_k0 = subs.add_parser("k0", help="Grothendieck group report")
    _add_source_args(p_k0)
    p_k0.add_argument("--out", help="write the JSON report here")
    p_k0.set_defaults(func=cmd_k0)

    p_jh = subs.add_parser("jh", help="Jordan-Holder / monoid / group cross-check")
    _add_source_args(p_jh)
    p_jh.add_argument("--out", help="write the JSON report here")
    p_jh.set_defaults(func=cmd_jh)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnknownIndec) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidationError, SchemaError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except AnnotationMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANNOTATION
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except ExtcatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
