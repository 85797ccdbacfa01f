"""Command line interface: finite-layer checks, class groups, Heegner forms,
Atkin-Lehner signs, and full trace experiments with JSON reports.

Exit codes: 0 when a verdict was reached (or the command succeeded), 2 when a
trace run ends undecided, 1 on errors and unsatisfiable inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import mpmath as mp

from .curves import curve_model
from .experiments import (DEFAULT_DIGITS, ExperimentSpec, HypothesisError,
                          experiment_finite, trace_point)
from .heegner import NoHeegnerPoint, heegner_form
from .modparam import SignConsistencyError, atkin_lehner_sign
from .quadforms import class_number, reduced_forms

ENV_DIGITS = "CMTRACE_DIGITS"


def _default_digits() -> int:
    raw = os.environ.get(ENV_DIGITS)
    if raw:
        return int(raw)
    return DEFAULT_DIGITS


def _parse_curve(text: str):
    parts = text.replace(",", " ").split()
    if len(parts) != 5:
        raise argparse.ArgumentTypeError("curve needs five integers a1,a2,a3,a4,a6")
    return tuple(int(x) for x in parts)


def _write_json(path: str | None, payload: dict):
    if path:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmtrace",
                                 description="Heegner traces across Cartan level structures")
    sub = ap.add_subparsers(dest="command", required=True)

    fin = sub.add_parser("finite-check", help="finite embedding and coset checks")
    fin.add_argument("--p", type=int, required=True)
    fin.add_argument("--dk", type=int, required=True)
    fin.add_argument("--f", type=int, default=1)
    fin.add_argument("--m", type=int, default=1, help="prime-to-p level part")
    fin.add_argument("--eps", type=int, default=None)
    fin.add_argument("--json", dest="json_path", default=None)

    cg = sub.add_parser("classgroup", help="reduced forms of a negative discriminant")
    cg.add_argument("--disc", type=int, required=True)
    cg.add_argument("--json", dest="json_path", default=None)

    hg = sub.add_parser("heegner", help="level-N form of a CM point")
    hg.add_argument("--n", type=int, required=True)
    hg.add_argument("--dk", type=int, required=True)
    hg.add_argument("--c", type=int, required=True)
    hg.add_argument("--json", dest="json_path", default=None)

    sg = sub.add_parser("sign", help="numerical Atkin-Lehner eigenvalue")
    sg.add_argument("--curve", type=_parse_curve, required=True)
    sg.add_argument("--q", type=int, required=True)
    sg.add_argument("--digits", type=int, default=None)
    sg.add_argument("--p", type=int, default=None)
    sg.add_argument("--json", dest="json_path", default=None)

    tr = sub.add_parser("trace", help="full Galois-orbit trace experiment")
    tr.add_argument("--curve", type=_parse_curve, required=True)
    tr.add_argument("--p", type=int, default=None)
    tr.add_argument("--dk", type=int, required=True)
    tr.add_argument("--f", type=int, default=1)
    tr.add_argument("--digits", type=int, default=None)
    tr.add_argument("--mode", choices=("signo_minus", "main_plus"), default=None)
    tr.add_argument("--torsion-bound", type=int, default=24)
    tr.add_argument("--json", dest="json_path", default=None)
    return ap


def _cmd_finite(args) -> int:
    spec = ExperimentSpec(dK=args.dk, f=args.f, p=args.p, mode="finite_only")
    report = experiment_finite(spec, eps=args.eps, level_m=args.m)
    print(f"finite-check p={report.p} dK={report.dK} f={report.f}: "
          f"{report.fiber_count} fibers of size 2, degree {report.degree}")
    for name, ok in report.checks.items():
        print(f"  {name}: {'ok' if ok else 'FAILED'}")
    _write_json(args.json_path, report.to_json())
    return 0 if report.all_passed else 1


def _cmd_classgroup(args) -> int:
    forms = reduced_forms(args.disc)
    print(f"discriminant {args.disc}: h = {len(forms)}")
    for f in forms:
        print(f"  ({f.a}, {f.b}, {f.c})")
    _write_json(args.json_path, {
        "disc": args.disc, "h": class_number(args.disc),
        "forms": [[f.a, f.b, f.c] for f in forms],
    })
    return 0


def _cmd_heegner(args) -> int:
    form = heegner_form(args.n, args.dk, args.c)
    tau_im = mp.sqrt(-form.disc()) / (2 * form.a)
    print(f"heegner form at level {args.n}: ({form.a}, {form.b}, {form.c}), "
          f"disc {form.disc()}, Im tau = {mp.nstr(tau_im, 8)}")
    _write_json(args.json_path, {
        "n": args.n, "dK": args.dk, "c": args.c,
        "form": [form.a, form.b, form.c], "disc": form.disc(),
    })
    return 0


def _cmd_sign(args) -> int:
    digits = args.digits or _default_digits()
    model = curve_model(args.curve, p=args.p)
    w = atkin_lehner_sign(model, args.q, digits)
    print(f"w_{args.q} = {w:+d} for curve {list(args.curve)} (N = {model.n})")
    _write_json(args.json_path, {"curve": list(args.curve), "N": model.n,
                                 "q": args.q, "w": w, "digits": digits})
    return 0


def _cmd_trace(args) -> int:
    digits = args.digits or _default_digits()
    model = curve_model(args.curve, p=args.p)
    mode = args.mode
    spec = ExperimentSpec(dK=args.dk, f=args.f, curve=model, digits=digits,
                          mode=mode or "main_plus", torsion_bound=args.torsion_bound)
    report = trace_point(spec)
    print(f"curve {list(args.curve)} (N = {model.n} = {model.p}^2 * {model.m}), "
          f"K = Q(sqrt({args.dk})), f = {args.f}, digits = {digits}")
    print(f"w_p = {report.wp:+d}; orbit of {len(report.orbit)} points; "
          f"n_max = {report.n_max}")
    print(f"trace z = {mp.nstr(mp.mpc(report.trace_z), min(digits, 30))}")
    print(f"torsion residual = {mp.nstr(report.residual, 8)}")
    print(f"verdict: {report.verdict}")
    if report.recognized is not None:
        rx, ry = report.recognized
        print(f"recognized point: x = ({rx.nu} + {rx.mu}*sqrt({rx.field_disc}))/{rx.den}, "
              f"y = ({ry.nu} + {ry.mu}*sqrt({ry.field_disc}))/{ry.den}")
    _write_json(args.json_path, report.to_json())
    return 0 if report.verdict in ("torsion", "non_torsion") else 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "finite-check": _cmd_finite,
        "classgroup": _cmd_classgroup,
        "heegner": _cmd_heegner,
        "sign": _cmd_sign,
        "trace": _cmd_trace,
    }
    try:
        return handlers[args.command](args)
    except (NoHeegnerPoint, HypothesisError, SignConsistencyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
