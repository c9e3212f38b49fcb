#!/usr/bin/env python
"""
Command-line interface for dual-update.

This module provides the ``janus`` tool, which prints quantum and classical
update results side by side as aligned tables and as ``key=value`` records.

Exit statuses:
    0  success (jpd: a joint distribution exists)
    1  error, or a comparison with failing rows
    2  usage error
    3  compare: observables are incompatible
    4  jpd: no joint distribution exists
    5  jpd: the behavior is signaling
"""

import argparse
import logging
import math
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .epr import EPRScenario, aligned_pair, epr_joint_probabilities, polarizer_observable, projected_state
from .errors import DualUpdateError, NotCompatible, SignalingBehavior, SiteMismatch
from .harness import ComparisonReport, compare_embedding, two_step_vs_direct
from .jpd import BehaviorTable, behavior_from_quantum, jpd_feasible
from .quantum_algebra import conditional_probability
from .quantum_state import QuantumState, born_probability, epr_state, luders_update, marginal_state
from .report import format_number, format_record, format_table
from .sampling import DIRECT, MODES, SampleRun, sample_outcomes
from .scenario_format import Scenario, Setting, load_behavior, load_scenario
from .tolerances import DEFAULT_SEED, DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPATIBLE = 3
EXIT_NO_JPD = 4
EXIT_SIGNALING = 5

SEED_ENV = "JANUS_SEED"


class Printer:
    """Writes tables, records or both to stdout."""

    def __init__(self, mode: str = "both"):
        self.mode = mode

    def table(self, headers: Sequence[str], rows: Sequence[Sequence[Any]], title: str = "") -> None:
        if self.mode in ("table", "both"):
            print(format_table(headers, rows, title))
            print()

    def record(self, kind: str, **fields: Any) -> None:
        if self.mode in ("records", "both"):
            print(format_record(kind, **fields))


def resolve_seed(seed: Optional[int]) -> int:
    """--seed, then the JANUS_SEED environment variable, then DEFAULT_SEED."""
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env, 0)
    return DEFAULT_SEED


def parse_tolerances(overrides: Optional[List[str]]) -> Tolerances:
    """Apply ``NAME=VALUE`` overrides to the default tolerances."""
    if not overrides:
        return DEFAULT_TOLERANCES
    mapping = {}
    for item in overrides:
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"Expected NAME=VALUE, got {item!r}")
        mapping[name.strip()] = value.strip()
    return DEFAULT_TOLERANCES.with_overrides(mapping)


def _int_auto(text: str) -> int:
    return int(text, 0)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def add_scenario_arguments(parser):
    """Add the scenario file argument."""
    parser.add_argument(
        "--scenario",
        type=str,
        help="Scenario file (state, observables, settings, task)."
    )


def add_angle_arguments(parser):
    """Add polarizer orientations for the photon-pair state."""
    parser.add_argument(
        "--angle-a",
        type=float,
        default=0.0,
        help="Orientation of polarizer I in degrees (default: 0)."
    )
    parser.add_argument(
        "--angle-b",
        type=float,
        default=0.0,
        help="Orientation of polarizer II in degrees (default: 0)."
    )


def add_sampling_arguments(parser, trials_required: bool = False):
    """Add trial count, seed, mode and worker arguments."""
    parser.add_argument(
        "--trials",
        type=_positive_int,
        required=trials_required,
        help="Number of sampled trials."
    )
    parser.add_argument(
        "--seed",
        type=_int_auto,
        help=f"Run seed (default: ${SEED_ENV} or {DEFAULT_SEED:#x})."
    )
    parser.add_argument(
        "--mode",
        type=str,
        default=DIRECT,
        choices=MODES,
        help="Sampling mode (default: direct)."
    )
    parser.add_argument(
        "--workers",
        type=_positive_int,
        default=1,
        help="Worker threads; the records do not depend on it (default: 1)."
    )


def _pm(x: float) -> str:
    return "+" if x > 0 else "-"


def _state_fields(state: QuantumState) -> Dict[str, Any]:
    if state.is_pure:
        return {"form": "pure", "vector": np.asarray(state.vector)}
    return {"form": "density", "matrix": state.density_matrix()}


def _require_scenario(args) -> Scenario:
    if not args.scenario:
        raise ValueError("--scenario is required for this command")
    return load_scenario(args.scenario)


def _pair_names(args, scenario: Scenario) -> Tuple[str, str]:
    first = args.first or scenario.task.get("first")
    second = args.second or scenario.task.get("second")
    if not first or not second:
        raise ValueError("Name two settings with --first/--second or 'first'/'second' under 'task:'")
    return first, second


def _pair_sites(s1: Setting, s2: Setting):
    if (s1.site is None) != (s2.site is None):
        raise SiteMismatch(f"Settings {s1.name} and {s2.name} must both name a site or both act on the whole space")
    return (s1.site, s2.site)


def _print_samples(run: SampleRun, printer: Printer, stream_records: bool = True) -> None:
    if stream_records:
        for i, x, y in run.records:
            printer.record("trial", i=i, x=x, y=y)
    counts = run.counts()
    rows = []
    for i, x in enumerate(run.spectrum1):
        for j, y in enumerate(run.spectrum2):
            freq = counts[i, j] / run.trials
            rows.append([format_number(x), format_number(y), int(counts[i, j]), float(freq)])
            printer.record("cell", x=x, y=y, count=int(counts[i, j]), freq=float(freq))
    discordant = int(np.sum(run.outcomes1 != run.outcomes2))
    printer.table(["x", "y", "count", "frequency"], rows,
                  title=f"{run.trials} {run.mode} trials, seed {run.seed:#x}")
    printer.record("summary", trials=run.trials, seed=run.seed, mode=run.mode, discordant=discordant)


def _print_report(report: ComparisonReport, printer: Printer, name: str) -> None:
    left, right = report.columns
    rows = [[r.label, r.left, r.right, r.difference, "pass" if r.passed else "FAIL"] for r in report.rows]
    printer.table(["quantity", left, right, "|difference|", "verdict"], rows, title=name)
    for r in report.rows:
        printer.record("compare", report=name, label=r.label, left=r.left, right=r.right,
                       difference=r.difference, passed=r.passed)
    printer.record("verdict", report=name, passed=report.passed, max_difference=report.max_difference)


def cmd_epr(args, tol: Tolerances, printer: Printer) -> int:
    """p±±, conditionals and projected states for the photon-pair state."""
    a, b = math.radians(args.angle_a), math.radians(args.angle_b)
    scn = EPRScenario.standard(a, b)
    probs = epr_joint_probabilities(scn)

    rows = []
    for (x, y), p in probs.items():
        cond = 0.0
        if born_probability(scn.state, scn.polarizer_a, x, site=0, tol=tol) > tol.ZERO_PROB_TOL:
            cond = conditional_probability(scn.state, (scn.polarizer_a, x), (scn.polarizer_b, y), tol=tol)
        rows.append([_pm(x) + _pm(y), p, cond])
        printer.record("joint", x=x, y=y, p=p)
        printer.record("conditional", given=x, y=y, p=cond)
    printer.table(["outcomes", "p(x,y)", "p(y|x)"], rows,
                  title=f"polarizers a={format_number(args.angle_a)} deg, b={format_number(args.angle_b)} deg")

    aa = aligned_pair(a).vector
    for x in (1.0, -1.0):
        if probs[(x, 1.0)] + probs[(x, -1.0)] <= tol.ZERO_PROB_TOL:
            continue
        post = projected_state(scn, x, site=0)
        printer.record("projected", outcome=x, overlap_aa=float(abs(np.vdot(aa, post.vector))),
                       vector=np.asarray(post.vector))

    if args.trials:
        run = sample_outcomes(scn.state, scn.polarizer_a, scn.polarizer_b, args.trials,
                              resolve_seed(args.seed), args.mode, workers=args.workers, tol=tol)
        _print_samples(run, printer, stream_records=False)
    return EXIT_OK


def cmd_update(args, tol: Tolerances, printer: Printer) -> int:
    """Lüders update of the scenario state on one outcome."""
    scenario = _require_scenario(args)
    setting = scenario.setting(args.observable)
    state = scenario.state
    p = born_probability(state, setting.observable, args.outcome, site=setting.site, tol=tol)
    post = luders_update(state, setting.observable, args.outcome, site=setting.site, tol=tol)

    printer.record("born", observable=setting.name, outcome=args.outcome, p=p)
    printer.record("state", stage="pre", **_state_fields(state))
    printer.record("state", stage="post", **_state_fields(post))
    rows = []
    if state.n_sites > 1:
        for site in range(state.n_sites):
            for stage, s in (("pre", state), ("post", post)):
                rho = marginal_state(s, site, tol).density_matrix()
                printer.record("marginal", stage=stage, site=site + 1, matrix=rho)
                rows.append([stage, site + 1, " ".join(format_number(v) for v in np.diag(rho).real)])
    printer.table(["observable", "outcome", "probability"], [[setting.name, args.outcome, p]],
                  title="Born probability")
    if rows:
        printer.table(["stage", "site", "diag(rho)"], rows, title="Site marginals")
    return EXIT_OK


def cmd_compare(args, tol: Tolerances, printer: Printer) -> int:
    """Classical embedding versus quantum update, row by row."""
    scenario = _require_scenario(args)
    first, second = _pair_names(args, scenario)
    s1, s2 = scenario.setting(first), scenario.setting(second)
    sites = _pair_sites(s1, s2)
    try:
        report = compare_embedding(scenario.state, s1.observable, s2.observable, sites, tol=tol)
    except NotCompatible as e:
        logger.error(f"Error: {e}")
        printer.record("verdict", report="embedding", passed=False, reason="no-joint-probability-distribution")
        return EXIT_INCOMPATIBLE
    _print_report(report, printer, "embedding")
    passed = report.passed
    if sites[0] is not None and sites[0] != sites[1]:
        steps = two_step_vs_direct(scenario.state, s1.observable, s2.observable, sites, tol=tol)
        _print_report(steps, printer, "two-step")
        passed = passed and steps.passed
    return EXIT_OK if passed else EXIT_ERROR


def _jpd_behavior(args, tol: Tolerances) -> BehaviorTable:
    if args.behavior:
        return load_behavior(args.behavior)
    if args.angles:
        a1, a2, b1, b2 = (math.radians(v) for v in args.angles)
        settings = ((polarizer_observable(a1, "a1"), polarizer_observable(a2, "a2")),
                    (polarizer_observable(b1, "b1"), polarizer_observable(b2, "b2")))
        return behavior_from_quantum(epr_state(), settings, tol=tol)
    scenario = _require_scenario(args)
    names = args.settings or scenario.task.get("settings", "").split()
    if len(names) != 4:
        raise ValueError("Name four settings (A1 A2 B1 B2) with --settings or 'settings' under 'task:'")
    bound = [scenario.setting(n) for n in names]
    sites = (bound[0].site, bound[2].site)
    if sites[0] is None or sites[1] is None or bound[1].site != sites[0] or bound[3].site != sites[1]:
        raise SiteMismatch("The first two settings must share one site and the last two another")
    pairs = ((bound[0].observable, bound[1].observable), (bound[2].observable, bound[3].observable))
    return behavior_from_quantum(scenario.state, pairs, sites, tol)


def cmd_jpd(args, tol: Tolerances, printer: Printer) -> int:
    """CHSH values and joint-distribution verdict."""
    behavior = _jpd_behavior(args, tol)
    try:
        verdict = jpd_feasible(behavior, tol)
    except SignalingBehavior as e:
        logger.error(f"Error: {e}")
        printer.record("verdict", exists=False, reason="signaling", gap=behavior.signaling_gap())
        return EXIT_SIGNALING

    rows = []
    for k, (signs, value) in enumerate(zip(verdict.chsh.patterns, verdict.chsh.values)):
        pattern = "".join("+" if s > 0 else "-" for s in signs)
        rows.append([k, pattern, value])
        printer.record("chsh", index=k, pattern=pattern, value=value)
    printer.table(["k", "signs", "S_k"], rows, title=f"settings {behavior.settings}")
    printer.record("verdict", exists=verdict.exists, max_abs=verdict.chsh.max_abs, residual=verdict.residual)

    if verdict.exists:
        witness = [(q, w) for q, w in verdict.witness_items().items() if w > tol.FEAS_TOL]
        for q, w in witness:
            printer.record("witness", a1=q[0], a2=q[1], b1=q[2], b2=q[3], p=w)
        printer.table(["a1", "a2", "b1", "b2", "p"], [list(q) + [w] for q, w in witness],
                      title="joint distribution exists")
        return EXIT_OK
    k, value = verdict.violated
    printer.record("violated", index=k, value=value)
    printer.table(["k", "S_k", "bound"], [[k, value, 2.0]], title="no joint distribution")
    return EXIT_NO_JPD


def cmd_sample(args, tol: Tolerances, printer: Printer) -> int:
    """Sampled paired records with a frequency summary."""
    if args.scenario:
        scenario = load_scenario(args.scenario)
        first, second = _pair_names(args, scenario)
        s1, s2 = scenario.setting(first), scenario.setting(second)
        sites = _pair_sites(s1, s2)
        state, obs1, obs2 = scenario.state, s1.observable, s2.observable
        trials = args.trials or int(scenario.task.get("trials", 0))
    else:
        scn = EPRScenario.standard(math.radians(args.angle_a), math.radians(args.angle_b))
        state, obs1, obs2, sites = scn.state, scn.polarizer_a, scn.polarizer_b, (0, 1)
        trials = args.trials or 0
    if trials < 1:
        raise ValueError("--trials must be at least 1")
    run = sample_outcomes(state, obs1, obs2, trials, resolve_seed(args.seed), args.mode,
                          sites=sites, workers=args.workers, tol=tol)
    _print_samples(run, printer, stream_records=not args.summary_only)
    return EXIT_OK


def cmd_spectral(args, tol: Tolerances, printer: Printer) -> int:
    """Eigenvalue/projector pairs of a scenario observable."""
    scenario = _require_scenario(args)
    if args.observable in scenario.observables:
        obs = scenario.observables[args.observable]
    else:
        obs = scenario.setting(args.observable).observable
    rows = []
    for (x, projector), rank in zip(obs.spectrum, obs.spectrum.ranks):
        rows.append([x, rank])
        printer.record("eigenspace", observable=obs.label, eigenvalue=x, rank=rank, projector=projector)
    printer.table(["eigenvalue", "rank"], rows, title=f"spectrum of {obs.label}")
    return EXIT_OK


COMMANDS = {
    "epr": cmd_epr,
    "update": cmd_update,
    "compare": cmd_compare,
    "jpd": cmd_jpd,
    "sample": cmd_sample,
    "spectral": cmd_spectral,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="janus",
        description="janus: quantum (Lüders/Born) and classical (Bayes) probability update side by side",
        formatter_class=argparse.RawTextHelpFormatter
    )

    parser.add_argument(
        "-v", "--version",
        action="version",
        version=f"janus {__version__}"
    )

    parser.add_argument(
        "--log-level",
        type=str,
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set the logging level."
    )

    parser.add_argument(
        "--tol",
        action="append",
        metavar="NAME=VALUE",
        help="Override a tolerance, e.g. --tol ZERO_PROB_TOL=1e-10 (repeatable)."
    )

    parser.add_argument(
        "--format",
        type=str,
        default="both",
        choices=["table", "records", "both"],
        help="Output tables, key=value records, or both (default: both)."
    )

    subparsers = parser.add_subparsers(
        dest="command",
        required=True,
        help="Sub-command to execute"
    )

    # --- 'epr' subcommand ---
    epr_parser = subparsers.add_parser(
        "epr",
        help="Joint and conditional probabilities for the photon-pair state."
    )
    add_angle_arguments(epr_parser)
    add_sampling_arguments(epr_parser)

    # --- 'update' subcommand ---
    update_parser = subparsers.add_parser(
        "update",
        help="Apply the Lüders update for one outcome."
    )
    add_scenario_arguments(update_parser)
    update_parser.add_argument(
        "observable",
        type=str,
        help="Setting or observable name."
    )
    update_parser.add_argument(
        "outcome",
        type=float,
        help="Observed eigenvalue."
    )

    # --- 'compare' subcommand ---
    compare_parser = subparsers.add_parser(
        "compare",
        help="Compare classical and quantum probabilities for two settings."
    )
    add_scenario_arguments(compare_parser)
    compare_parser.add_argument("--first", type=str, help="First setting (default: task 'first').")
    compare_parser.add_argument("--second", type=str, help="Second setting (default: task 'second').")

    # --- 'jpd' subcommand ---
    jpd_parser = subparsers.add_parser(
        "jpd",
        help="Decide whether a joint probability distribution exists."
    )
    source = jpd_parser.add_mutually_exclusive_group()
    source.add_argument("--behavior", type=str, help="Behavior file with four 2x2 tables.")
    source.add_argument(
        "--angles",
        type=float,
        nargs=4,
        metavar=("A1", "A2", "B1", "B2"),
        help="Polarizer angles in degrees for the photon-pair state."
    )
    add_scenario_arguments(jpd_parser)
    jpd_parser.add_argument(
        "--settings",
        type=str,
        nargs=4,
        metavar=("A1", "A2", "B1", "B2"),
        help="Four scenario settings (default: task 'settings')."
    )

    # --- 'sample' subcommand ---
    sample_parser = subparsers.add_parser(
        "sample",
        help="Sample paired measurement records."
    )
    add_scenario_arguments(sample_parser)
    add_angle_arguments(sample_parser)
    add_sampling_arguments(sample_parser)
    sample_parser.add_argument("--first", type=str, help="First setting (default: task 'first').")
    sample_parser.add_argument("--second", type=str, help="Second setting (default: task 'second').")
    sample_parser.add_argument(
        "--summary-only",
        action="store_true",
        help="Print only the summary, not one record per trial."
    )

    # --- 'spectral' subcommand ---
    spectral_parser = subparsers.add_parser(
        "spectral",
        help="Print the spectral decomposition of an observable."
    )
    add_scenario_arguments(spectral_parser)
    spectral_parser.add_argument(
        "observable",
        type=str,
        help="Observable or setting name."
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the janus command."""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Set up logging
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    try:
        tol = parse_tolerances(args.tol)
    except (KeyError, ValueError) as e:
        parser.error(str(e))

    printer = Printer(args.format)
    try:
        return COMMANDS[args.command](args, tol, printer)
    except (DualUpdateError, ValueError, KeyError, OSError, ArithmeticError) as e:
        logger.error(f"Error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
