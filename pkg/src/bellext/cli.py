"""Command line front end.

    bellext predict --builtin singlet
    bellext range --builtin singlet --target A1,A2 --with B1
    bellext check --builtin ghsz --json report.json
    bellext validate --samples 1000 --seed 7

Exit codes: 0 representable / consistent, 1 violation detected, 2 input
error, 3 internal invariant failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .errors import BellextError, InvalidMoments, UnknownVariable, VerificationError
from .probability import TOL, ZERO_ONE, monomial_key
from .representability import (
    Interval,
    bch_check,
    bch_lp_feasible,
    bell_wigner_interval,
    lp_feasible,
    lp_interval,
    reproduces,
)
from .sampling import DEFAULT_SEED, random_bch_scenario, random_three_moments, random_tree_graph
from .scenarios import GHSZ_VARS, Scenario, analyze_ghsz, builtin
from .tree import edge_marginal_error, extend_tree

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(Exception):
    pass


class InternalError(Exception):
    pass


def fmt(x: float | None) -> str:
    if x is None:
        return "-"
    if abs(x) < 5e-10:
        x = 0.0
    return f"{x:.9f}"


def interval_json(iv: Interval) -> dict:
    if iv.empty:
        return {"lo": None, "hi": None, "empty": True, "reason": iv.reason or "empty"}
    return {"lo": float(iv.lo), "hi": float(iv.hi), "empty": False}


def interval_text(iv: Interval) -> str:
    if iv.empty:
        return f"empty ({iv.reason or 'empty'})"
    return f"[{fmt(iv.lo)}, {fmt(iv.hi)}]"


class Report:
    """Machine-readable report with an aligned text rendering."""

    def __init__(self, command: str, scenario: Scenario, tolerance: float):
        self.data = {
            "command": command,
            "scenario": scenario.name,
            "domain": scenario.domain,
            "variables": list(scenario.variables.names),
            "tolerance": tolerance,
            "moments": {},
            "intervals": {},
            "verdicts": {},
            "witnesses": {},
            "details": {},
            "exit_code": 0,
        }
        self.lines: list[str] = [f"scenario: {scenario.name} ({command}, domain {scenario.domain})"]

    def section(self, title: str) -> None:
        self.lines.append("")
        self.lines.append(title)

    def row(self, label: str, value: str) -> None:
        self.lines.append(f"  {label:<28} {value}")

    def text(self) -> str:
        return "\n".join(self.lines)

    def to_json(self) -> dict:
        return self.data


def load_scenario(args) -> Scenario:
    try:
        if args.builtin:
            return builtin(args.builtin)
        return Scenario.load(args.file)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot load scenario: {exc}") from exc


def _add_moments(report: Report, scenario: Scenario) -> None:
    preds = scenario.predictions()
    report.data["moments"] = preds
    report.section("context moments")
    for ctx, values in preds.items():
        for key, value in values.items():
            report.row(f"<{key.replace(',', ' ')}>  [{ctx}]", fmt(value))


def cmd_predict(args, scenario: Scenario, report: Report) -> int:
    _add_moments(report, scenario)
    return EXIT_OK


def _parse_vars(scenario: Scenario, text: str | None, what: str) -> list[str]:
    if not text:
        return []
    names = [v.strip() for v in text.split(",") if v.strip()]
    for v in names:
        if v not in scenario.variables:
            raise InputError(f"{what} variable {v!r} not in scenario {list(scenario.variables.names)}")
    return names


def cmd_range(args, scenario: Scenario, report: Report) -> int:
    tol = args.tolerance
    target = _parse_vars(scenario, args.target, "target")
    if not target:
        raise InputError("--target is required")
    extra = _parse_vars(scenario, args.with_, "--with")
    if not extra:
        extra = [v for v in scenario.variables.names if v not in target]
    names = [v for v in scenario.variables.names if v in set(target) | set(extra)]
    m = scenario.measurable_moments(names)
    key = monomial_key(target, scenario.variables.names)

    lp = lp_interval(target, m, tol=tol)
    report.data["intervals"]["lp"] = interval_json(lp)
    report.section(f"range of <{key.replace(',', ' ')}> given {', '.join(extra)}")
    report.row("LP over atoms", interval_text(lp))

    closed = None
    if len(target) == 2 and len(extra) == 1 and scenario.domain == ZERO_ONE:
        closed = bell_wigner_interval(m, target[0], target[1], extra[0], tol=tol)
        report.data["intervals"]["closed_form"] = interval_json(closed)
        report.row("closed form", interval_text(closed))
    agree = closed is None or closed.close_to(lp, tol)
    report.data["verdicts"]["closed_form_agrees"] = agree
    report.data["verdicts"]["feasible"] = not lp.empty
    report.data["details"]["target"] = key
    report.data["details"]["given"] = extra
    if not agree:
        report.row("WARNING", "closed form and LP disagree")
        return EXIT_INTERNAL
    return EXIT_OK if not lp.empty else EXIT_VIOLATION


def cmd_check(args, scenario: Scenario, report: Report) -> int:
    tol = args.tolerance
    _add_moments(report, scenario)
    bch = scenario.bch()
    if bch is not None:
        rep = bch_check(bch, tol)
        lp_ok = bch_lp_feasible(bch, tol)
        report.data["intervals"]["A1,A2|B1"] = interval_json(rep.interval_B1)
        report.data["intervals"]["A1,A2|B2"] = interval_json(rep.interval_B2)
        report.data["intervals"]["intersection"] = interval_json(rep.intersection)
        report.data["details"]["fine_residuals"] = rep.to_json()["fine_residuals"]
        report.data["verdicts"].update(
            representable=rep.representable, fine_inequalities=rep.fine_ok, lp_feasible=lp_ok
        )
        report.section("range of <A1 A2>")
        report.row("with B1", interval_text(rep.interval_B1))
        report.row("with B2", interval_text(rep.interval_B2))
        report.row("intersection", interval_text(rep.intersection))
        report.section("Fine inequalities (residual <= 0 holds)")
        for label, value in rep.to_json()["fine_residuals"].items():
            report.row(label, fmt(value) + ("" if value <= tol else "  VIOLATED"))
        if not (rep.representable == rep.fine_ok == lp_ok):
            raise InternalError("interval intersection, Fine inequalities and LP feasibility disagree")
        if rep.witness is not None:
            ok, err = reproduces(rep.witness, bch.measurable(), tol)
            if not ok:
                raise InternalError(f"witness misses a measured moment by {err:.3g}")
            report.data["witnesses"]["joint"] = rep.witness.to_json()
        representable = rep.representable
    else:
        m = scenario.measurable_moments()
        witness = lp_feasible(m, tol=tol)
        representable = witness is not None
        report.data["verdicts"]["representable"] = representable
        report.data["verdicts"]["lp_feasible"] = representable
        if witness is not None:
            ok, err = reproduces(witness, m, 10 * tol)
            if not ok:
                raise InternalError(f"LP witness misses a measured moment by {err:.3g}")
            report.data["witnesses"]["joint"] = witness.to_json()

    if scenario.is_quantum and set(scenario.variables.names) == set(GHSZ_VARS):
        g = analyze_ghsz(scenario, tol)
        report.data["details"]["ghsz"] = g.to_json()
        report.data["verdicts"]["parity_obstruction"] = g.parity_obstruction
        report.section("GHSZ analysis")
        report.row("<A1 A2 B1 B2> model 1", fmt(g.four_correlation[0]))
        report.row("<A1 A2 B1 B2> model 2", fmt(g.four_correlation[1]))
        report.row("forced range given C1", interval_text(g.uniqueness[0]))
        report.row("forced range given C2", interval_text(g.uniqueness[1]))
        report.row("other A/B moments agree", str(g.shared_moments_agree))
        report.row("sign assignments solving", f"{g.parity_solutions} of 64")
        report.row("parity obstruction", str(g.parity_obstruction))

    report.section("verdict")
    report.row("classically representable", "yes" if representable else "no")
    return EXIT_OK if representable else EXIT_VIOLATION


def cmd_validate(args) -> tuple[int, dict, str]:
    """Randomized cross-checks of the independent routes."""
    rng = np.random.default_rng(args.seed)
    tol = args.tolerance
    n = args.samples
    out = {"seed": args.seed, "samples": n}
    bad3 = sum(
        not bell_wigner_interval(m, b="B", tol=tol).close_to(lp_interval("A1,A2", m, tol=tol), tol)
        for m in (random_three_moments(rng) for _ in range(n))
    )
    bad4 = 0
    for _ in range(n):
        s = random_bch_scenario(rng)
        r = bch_check(s, tol, witness=False)
        bad4 += not (r.representable == r.fine_ok == bch_lp_feasible(s, tol))
    worst = 0.0
    for _ in range(n):
        g = random_tree_graph(rng)
        worst = max(worst, edge_marginal_error(extend_tree(g, tol=tol), g))
    out.update(closed_form_vs_lp_mismatches=bad3, bch_verdict_mismatches=bad4, tree_max_marginal_error=worst)
    text = "\n".join(
        [
            f"validate: seed {args.seed}, {n} samples per check",
            f"  {'closed form vs LP mismatches':<34} {bad3}",
            f"  {'Fine/intersection/LP mismatches':<34} {bad4}",
            f"  {'tree gluing max marginal error':<34} {worst:.3e}",
        ]
    )
    code = EXIT_OK if bad3 == 0 and bad4 == 0 and worst <= tol else EXIT_INTERNAL
    return code, out, text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellext", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the machine-readable report here")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tolerance", type=float, default=TOL)
    common.add_argument("-v", "--verbose", action="store_true")
    source = argparse.ArgumentParser(add_help=False)
    group = source.add_mutually_exclusive_group(required=True)
    group.add_argument("--builtin", metavar="NAME", choices=["singlet", "hardy", "ghsz"])
    group.add_argument("--file", metavar="PATH")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("predict", parents=[common, source], help="per-context quantum or supplied moments")
    p = sub.add_parser("range", parents=[common, source], help="feasible range of an unmeasurable moment")
    p.add_argument("--target", required=True, metavar="V1,V2,...")
    p.add_argument("--with", dest="with_", metavar="VAR", help="variables kept besides the target")
    sub.add_parser("check", parents=[common, source], help="classical representability verdict")
    p = sub.add_parser("validate", parents=[common], help="randomized cross-validation")
    p.add_argument("--samples", type=int, default=1000)
    return parser


def _write_json(path: str | None, data: dict) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "validate":
        code, data, text = cmd_validate(args)
        print(text)
        data["exit_code"] = code
        _write_json(args.json, data)
        return code

    try:
        scenario = load_scenario(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    report = Report(args.command, scenario, args.tolerance)
    handler = {"predict": cmd_predict, "range": cmd_range, "check": cmd_check}[args.command]
    try:
        code = handler(args, scenario, report)
    except (InputError, UnknownVariable, InvalidMoments) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InternalError, VerificationError, BellextError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report.data["exit_code"] = code
    print(report.text())
    _write_json(args.json, report.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
