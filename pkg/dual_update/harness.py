"""
Side-by-side checks of the quantum and classical update rules.

``two_step_vs_direct`` compares p(x)·p(y|x) with the joint Born probability;
``classical_embedding`` turns two compatible observables into a finite
probability space whose Bayes updates reproduce the Lüders numbers, and
``compare_embedding`` reports both columns row by row.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import NotCompatible
from .prob_space import FiniteProbSpace, RandomVariable, probability
from .prob_space_algebra import conditional_probability_classical
from .quantum_algebra import Site, compatible, conditional_probability, joint_distribution
from .quantum_state import Observable, QuantumState, born_probability, luders_update
from .report import format_number
from .tolerances import Tolerances, resolve

logger = logging.getLogger(__name__)

AGREEMENT_TOL = 1e-10


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    left: float
    right: float
    difference: float
    passed: bool


@dataclass(frozen=True)
class ComparisonReport:
    """
    Rows of paired values with a verdict per row.

    Attributes:
        rows: One row per compared quantity.
        columns: Names of the left and right value columns.
        tolerance: Largest |left − right| a row may have and still pass.
    """

    rows: Tuple[ComparisonRow, ...]
    columns: Tuple[str, str] = ("classical", "quantum")
    tolerance: float = AGREEMENT_TOL

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def max_difference(self) -> float:
        return max((r.difference for r in self.rows), default=0.0)

    def failures(self) -> List[ComparisonRow]:
        return [r for r in self.rows if not r.passed]


class _ReportBuilder:
    def __init__(self, tolerance: float):
        self.tolerance = tolerance
        self.rows: List[ComparisonRow] = []

    def add(self, label: str, left: float, right: float) -> None:
        diff = abs(left - right)
        self.rows.append(ComparisonRow(label, left, right, diff, diff <= self.tolerance))

    def build(self, columns: Tuple[str, str]) -> ComparisonReport:
        report = ComparisonReport(tuple(self.rows), columns, self.tolerance)
        logger.info(f"{len(report.rows)} rows compared, max difference {report.max_difference:.3e}")
        return report


def _outcome_label(obs: Observable, x: float) -> str:
    return f"{obs.label}={format_number(x)}"


def two_step_vs_direct(state: QuantumState, obs1: Observable, obs2: Observable,
                       sites: Tuple[int, int] = (0, 1), tolerance: float = AGREEMENT_TOL,
                       tol: Optional[Tolerances] = None) -> ComparisonReport:
    """
    Compare p(A=x)·p(B=y|A=x) with the joint probability p(A=x, B=y).

    Outcomes x with p(A=x) <= ZERO_PROB_TOL use a product of 0, since
    conditioning on them is undefined.

    Returns:
        ComparisonReport: Columns ``("two-step", "direct")``, one row per
        outcome pair.
    """
    t = resolve(tol)
    s1, s2 = sites
    table = joint_distribution(state, obs1, obs2, sites, t)
    builder = _ReportBuilder(tolerance)
    for x in obs1.outcomes:
        px = born_probability(state, obs1, x, site=s1, tol=t)
        for y in obs2.outcomes:
            two_step = 0.0
            if px > t.ZERO_PROB_TOL:
                two_step = px * conditional_probability(state, (obs1, x), (obs2, y), s1, s2, t)
            label = f"p({_outcome_label(obs1, x)},{_outcome_label(obs2, y)})"
            builder.add(label, two_step, table.probability(x, y, t))
    return builder.build(("two-step", "direct"))


def classical_embedding(state: QuantumState, obs1: Observable, obs2: Observable,
                        sites: Tuple[Site, Site] = (0, 1),
                        tol: Optional[Tolerances] = None
                        ) -> Tuple[FiniteProbSpace, RandomVariable, RandomVariable]:
    """
    Kolmogorov model of two compatible observables.

    Atoms are outcome pairs (x, y), written as number strings; weights are the
    joint Born probabilities. The two random variables read the first and
    second coordinate.

    Raises:
        NotCompatible: If the observables act on the same site and do not
            commute. No joint probability distribution exists then.
    """
    t = resolve(tol)
    s1, s2 = sites
    if s1 == s2 and not compatible(obs1, obs2, t):
        raise NotCompatible(
            f"{obs1.label} and {obs2.label} do not commute: no joint probability distribution"
        )
    table = joint_distribution(state, obs1, obs2, sites, t)
    labels1 = [format_number(x) for x in obs1.outcomes]
    labels2 = [format_number(y) for y in obs2.outcomes]
    weights = table.matrix / table.matrix.sum()
    space = FiniteProbSpace.from_table(labels1, labels2, weights, t)
    rv1 = RandomVariable.site_variable(0, dict(zip(labels1, obs1.outcomes)), label=obs1.label)
    rv2 = RandomVariable.site_variable(1, dict(zip(labels2, obs2.outcomes)), label=obs2.label)
    return space, rv1, rv2


def _quantum_conditional(state: QuantumState, first: Tuple[Observable, float], first_site: Site,
                         second: Tuple[Observable, float], second_site: Site,
                         t: Tolerances) -> float:
    obs1, x = first
    obs2, y = second
    updated = luders_update(state, obs1, x, site=first_site, tol=t)
    return born_probability(updated, obs2, y, site=second_site, tol=t)


def compare_embedding(state: QuantumState, obs1: Observable, obs2: Observable,
                      sites: Tuple[Site, Site] = (0, 1), tolerance: float = AGREEMENT_TOL,
                      tol: Optional[Tolerances] = None) -> ComparisonReport:
    """
    Classical versus quantum values for every marginal and conditional probability.

    Rows cover p(A=x), p(B=y), p(B=y|A=x) and p(A=x|B=y); conditionals on
    outcomes of probability <= ZERO_PROB_TOL are skipped.

    Raises:
        NotCompatible: As in ``classical_embedding``.
    """
    t = resolve(tol)
    s1, s2 = sites
    space, rv1, rv2 = classical_embedding(state, obs1, obs2, sites, t)
    builder = _ReportBuilder(tolerance)

    for obs, rv, site in ((obs1, rv1, s1), (obs2, rv2, s2)):
        for x in obs.outcomes:
            builder.add(f"p({_outcome_label(obs, x)})",
                        probability(space, rv, x),
                        born_probability(state, obs, x, site=site, tol=t))

    pairs = (((obs1, rv1, s1), (obs2, rv2, s2)), ((obs2, rv2, s2), (obs1, rv1, s1)))
    for (oa, ra, sa), (ob, rb, sb) in pairs:
        for x in oa.outcomes:
            if born_probability(state, oa, x, site=sa, tol=t) <= t.ZERO_PROB_TOL:
                continue
            for y in ob.outcomes:
                builder.add(
                    f"p({_outcome_label(ob, y)}|{_outcome_label(oa, x)})",
                    conditional_probability_classical(space, (ra, x), (rb, y), t),
                    _quantum_conditional(state, (oa, x), sa, (ob, y), sb, t),
                )
    return builder.build(("classical", "quantum"))
