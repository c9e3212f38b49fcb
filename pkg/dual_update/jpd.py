"""
Joint-probability-distribution feasibility for two sites, two settings per
site and outcomes ±1.

A behavior lists p(x, y | A_i, B_j) for the four setting pairs. A joint
distribution exists when one distribution over the quadruples
(a₁, a₂, b₁, b₂) ∈ {±1}⁴ reproduces all four pairwise tables. Two methods
check this, and each bounds the other near the classical limit:

- a linear feasibility search over the 16 quadruple weights
  (``scipy.optimize.linprog``, HiGHS);
- the CHSH criterion: all eight signed combinations lie in [−2, 2].

Outcome index 0 means +1 and index 1 means −1 throughout.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from .errors import (
    FeasibilityDisagreement,
    InvalidProbabilitySpace,
    IterationFailure,
    OutcomeArity,
    SignalingBehavior,
)
from .quantum_algebra import joint_distribution
from .quantum_state import Observable, QuantumState
from .tolerances import Tolerances, resolve

logger = logging.getLogger(__name__)

OUTCOMES = (1, -1)
QUADRUPLES = tuple(itertools.product(range(2), repeat=4))
CHSH_PATTERNS = tuple(
    signs for signs in itertools.product((1, -1), repeat=4) if signs.count(-1) % 2 == 1
)
CLASSICAL_BOUND = 2.0
# |S| moves by at most this multiple of the largest table-entry change.
CHSH_ENTRY_WEIGHT = 16.0

Settings = Tuple[Tuple[str, str], Tuple[str, str]]


class BehaviorTable:
    """
    Pairwise outcome tables of a two-site, two-setting experiment.

    Attributes:
        settings: ((A1, A2), (B1, B2)) setting labels.
        tables: Array of shape (2, 2, 2, 2); ``tables[i, j, x, y]`` is
            p(outcome index x at site 1, y at site 2 | A_i, B_j).
    """

    def __init__(self, tables: np.ndarray, settings: Settings = (("A1", "A2"), ("B1", "B2")),
                 tol: Optional[Tolerances] = None):
        t = resolve(tol)
        arr = np.array(tables, dtype=float)
        if arr.shape != (2, 2, 2, 2):
            raise InvalidProbabilitySpace(f"Behavior tables must have shape (2,2,2,2), got {arr.shape}")
        if np.any(arr < -t.PROB_SUM_TOL):
            raise InvalidProbabilitySpace(f"Negative probability {float(arr.min())!r} in behavior")
        sums = arr.sum(axis=(2, 3))
        if np.any(np.abs(sums - 1.0) > t.PROB_SUM_TOL):
            raise InvalidProbabilitySpace(f"Behavior tables sum to {sums.tolist()}, expected 1")
        arr = np.clip(arr, 0.0, None)
        arr.flags.writeable = False
        self.tables = arr
        self.settings = (tuple(settings[0]), tuple(settings[1]))

    def table(self, i: int, j: int) -> np.ndarray:
        return self.tables[i, j]

    def correlator(self, i: int, j: int) -> float:
        """E(A_i, B_j) = Σ x·y·p(x, y)."""
        signs = np.outer(OUTCOMES, OUTCOMES)
        return float(np.sum(signs * self.tables[i, j]))

    def correlators(self) -> Tuple[float, float, float, float]:
        """(E11, E12, E21, E22)."""
        return tuple(self.correlator(i, j) for i in range(2) for j in range(2))

    def marginal1(self, i: int, j: int) -> np.ndarray:
        return self.tables[i, j].sum(axis=1)

    def marginal2(self, i: int, j: int) -> np.ndarray:
        return self.tables[i, j].sum(axis=0)

    def signaling_gap(self) -> float:
        """Largest change of a site marginal when the other site's setting changes."""
        gaps = [np.max(np.abs(self.marginal1(i, 0) - self.marginal1(i, 1))) for i in range(2)]
        gaps += [np.max(np.abs(self.marginal2(0, j) - self.marginal2(1, j))) for j in range(2)]
        return float(max(gaps))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BehaviorTable):
            return NotImplemented
        return self.settings == other.settings and bool(np.allclose(self.tables, other.tables, atol=1e-12))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"BehaviorTable(settings={self.settings}, correlators={self.correlators()})"


@dataclass(frozen=True)
class ChshValues:
    """The eight signed combinations Σ_k s_k E_k, with E ordered (E11, E12, E21, E22)."""

    values: Tuple[float, ...]
    patterns: Tuple[Tuple[int, int, int, int], ...] = CHSH_PATTERNS

    @property
    def max_abs(self) -> float:
        return max(abs(v) for v in self.values)

    @property
    def argmax(self) -> int:
        return int(np.argmax(np.abs(self.values)))


def chsh_value(b: BehaviorTable) -> ChshValues:
    """
    All eight CHSH combinations of the behavior's correlators.

    Patterns are the sign vectors with an odd number of −1, in lexicographic
    order of ``itertools.product((1, -1), repeat=4)``; the first is
    E11 + E12 + E21 − E22.
    """
    e = np.array(b.correlators())
    return ChshValues(tuple(float(np.dot(s, e)) for s in CHSH_PATTERNS))


@dataclass(frozen=True)
class JpdVerdict:
    """
    Result of the feasibility check.

    Attributes:
        exists: Whether a joint distribution exists.
        chsh: The eight CHSH combinations.
        distribution: When it exists, weights over (a₁, a₂, b₁, b₂) outcome
            indices, shape (2, 2, 2, 2).
        violated: When it does not, (pattern index, value) of the largest
            violated combination.
        residual: Largest mismatch between the search result and the tables.
    """

    exists: bool
    chsh: ChshValues
    distribution: Optional[np.ndarray] = None
    violated: Optional[Tuple[int, float]] = None
    residual: float = 0.0

    def witness_items(self) -> Dict[Tuple[int, int, int, int], float]:
        """Quadruple of ±1 outcomes → weight, for an existing distribution."""
        if self.distribution is None:
            return {}
        return {tuple(OUTCOMES[k] for k in q): float(self.distribution[q]) for q in QUADRUPLES}


def _matching_matrix() -> np.ndarray:
    """Rows (i, j, x, y) select the quadruples with a_i = x and b_j = y."""
    rows = []
    for i, j, x, y in itertools.product(range(2), repeat=4):
        rows.append([1.0 if q[i] == x and q[2 + j] == y else 0.0 for q in QUADRUPLES])
    return np.array(rows)


MATCHING = _matching_matrix()


def behavior_from_joint(q: np.ndarray, settings: Settings = (("A1", "A2"), ("B1", "B2")),
                        tol: Optional[Tolerances] = None) -> BehaviorTable:
    """Pairwise tables of a distribution over (a₁, a₂, b₁, b₂), shape (2, 2, 2, 2)."""
    flat = np.asarray(q, dtype=float).reshape(-1)
    return BehaviorTable((MATCHING @ flat).reshape(2, 2, 2, 2), settings, tol)


def jpd_feasible(b: BehaviorTable, tol: Optional[Tolerances] = None) -> JpdVerdict:
    """
    Decide whether a joint distribution reproduces the behavior.

    The search minimizes the total slack s⁺ + s⁻ subject to
    M·q + s⁺ − s⁻ = p with q, s⁺, s⁻ >= 0. The verdict is max|S| <= 2 + FEAS_TOL;
    the search must then match every table entry within FEAS_TOL, and its
    largest mismatch r must satisfy max|S| <= 2 + 16·max(r, FEAS_TOL) otherwise.

    Raises:
        SignalingBehavior: If a site marginal depends on the remote setting
            by more than SIGNALING_TOL.
        FeasibilityDisagreement: If the search contradicts the CHSH criterion.
        IterationFailure: If the solver does not finish.
    """
    t = resolve(tol)
    gap = b.signaling_gap()
    if gap > t.SIGNALING_TOL:
        raise SignalingBehavior(f"Behavior is signaling (marginal gap {gap:.3e})")

    p = b.tables.reshape(-1)
    n = len(QUADRUPLES)
    m = MATCHING.shape[0]
    a_eq = np.hstack([MATCHING, np.eye(m), -np.eye(m)])
    cost = np.concatenate([np.zeros(n), np.ones(2 * m)])
    result = linprog(cost, A_eq=a_eq, b_eq=p, bounds=(0, None), method="highs",
                     options={"primal_feasibility_tolerance": 1e-10,
                              "dual_feasibility_tolerance": 1e-10})
    if result.status != 0:
        raise IterationFailure(f"Feasibility search failed: {result.message}")

    raw = result.x[:n]
    if raw.min() < -t.FEAS_TOL:
        logger.warning(f"Clipped negative search weight {raw.min():.3e}")
    q = np.clip(raw, 0.0, None)
    if q.sum() > 0.0:
        q = q / q.sum()
    residual = float(np.max(np.abs(MATCHING @ q - p)))

    chsh = chsh_value(b)
    excess = chsh.max_abs - CLASSICAL_BOUND
    exists = excess <= t.FEAS_TOL
    logger.debug(f"Feasibility residual {residual:.3e}, max|S|={chsh.max_abs:.12g}")
    # a search residual r allows max|S| up to 2 + CHSH_ENTRY_WEIGHT * r
    if (exists and residual > t.FEAS_TOL) or excess > CHSH_ENTRY_WEIGHT * max(residual, t.FEAS_TOL):
        raise FeasibilityDisagreement(
            f"Search residual {residual:.3e} is inconsistent with max|S| = {chsh.max_abs:.12g}"
        )

    if exists:
        return JpdVerdict(True, chsh, distribution=q.reshape(2, 2, 2, 2), residual=residual)
    k = chsh.argmax
    return JpdVerdict(False, chsh, violated=(k, chsh.values[k]), residual=residual)


def behavior_from_quantum(state: QuantumState,
                          settings: Tuple[Sequence[Observable], Sequence[Observable]],
                          sites: Tuple[int, int] = (0, 1),
                          tol: Optional[Tolerances] = None) -> BehaviorTable:
    """
    Behavior of two observables per site measured on ``state``.

    The larger eigenvalue of each observable plays the role of +1.

    Raises:
        OutcomeArity: If an observable does not have exactly two outcomes.
    """
    site1, site2 = settings
    for obs in list(site1) + list(site2):
        if len(obs.outcomes) != 2:
            raise OutcomeArity(f"Observable {obs.label} has {len(obs.outcomes)} outcomes, expected 2")
    tables = np.zeros((2, 2, 2, 2))
    for i, a in enumerate(site1):
        for j, b in enumerate(site2):
            matrix = joint_distribution(state, a, b, sites, tol).matrix
            tables[i, j] = matrix[::-1, ::-1]
    labels = ((site1[0].label, site1[1].label), (site2[0].label, site2[1].label))
    return BehaviorTable(tables, labels, tol)


def deterministic_vertex(a1: int, a2: int, b1: int, b2: int) -> BehaviorTable:
    """Behavior where every setting has a fixed ±1 outcome."""
    q = np.zeros((2, 2, 2, 2))
    q[tuple(OUTCOMES.index(v) for v in (a1, a2, b1, b2))] = 1.0
    return behavior_from_joint(q)


def product_behavior(p_a: Sequence[float], p_b: Sequence[float]) -> BehaviorTable:
    """Independent sites; ``p_a[i]`` and ``p_b[j]`` are the probabilities of +1."""
    tables = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            tables[i, j] = np.outer([p_a[i], 1 - p_a[i]], [p_b[j], 1 - p_b[j]])
    return BehaviorTable(tables)


def mixture(behaviors: Sequence[BehaviorTable], weights: Sequence[float]) -> BehaviorTable:
    """Convex combination of behaviors with the first one's setting labels."""
    w = np.asarray(weights, dtype=float)
    tables = np.tensordot(w / w.sum(), np.array([b.tables for b in behaviors]), axes=1)
    return BehaviorTable(tables, behaviors[0].settings)
