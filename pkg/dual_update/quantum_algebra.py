"""
Operations on pairs of observables: conditional probabilities, joint tables,
Schmidt separability, compatibility and joint refinement.

The functions here mirror ``prob_space_algebra`` on the classical side.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, NotCompatible, NotPure, SiteMismatch
from .hilbert import apply_local, commutator, dagger, max_abs, nearest_index, outer, trace_distance
from .quantum_state import (
    Observable,
    OutcomeDistribution,
    QuantumState,
    bipartite_luders_update,
    born_probability,
    clamp_probability,
    marginal_state,
    site_projector,
)
from .tolerances import Tolerances, resolve

logger = logging.getLogger(__name__)

Site = Optional[int]
Measurement = Tuple[Observable, float]


def conditional_probability(state: QuantumState, first: Measurement, second: Measurement,
                            first_site: int = 0, second_site: int = 1,
                            tol: Optional[Tolerances] = None) -> float:
    """
    p(B=y | A=x; Ψ) = p(B=y; Ψ_{A=x}).

    The first measurement updates the state on ``first_site``; the second is
    then evaluated on ``second_site`` of the updated state. Swapping the site
    arguments measures the second system first.

    Args:
        state: Compound state with at least two sites.
        first: (observable, outcome) conditioned on.
        second: (observable, outcome) whose probability is returned.
        first_site: Site of the first observable.
        second_site: Site of the second observable.
        tol: Tolerance overrides.

    Raises:
        ZeroProbabilityOutcome: If the first outcome has probability zero.
    """
    obs1, x = first
    obs2, y = second
    updated = bipartite_luders_update(state, obs1, x, site=first_site, tol=tol)
    return born_probability(updated, obs2, y, site=second_site, tol=tol)


@dataclass(frozen=True)
class JointTable:
    """
    Joint outcome probabilities p(x, y) of two observables.

    ``matrix[i, j]`` is the probability of the i-th outcome of the first
    observable and the j-th outcome of the second, both in increasing order.
    """

    outcomes1: Tuple[float, ...]
    outcomes2: Tuple[float, ...]
    matrix: np.ndarray
    labels: Tuple[str, str] = ("A", "B")

    def probability(self, x: float, y: float, tol: Optional[Tolerances] = None) -> float:
        i = nearest_index(self.outcomes1, x, tol)
        j = nearest_index(self.outcomes2, y, tol)
        return float(self.matrix[i, j])

    def entries(self) -> List[Tuple[float, float, float]]:
        """(x, y, p) triples, first outcome varying slowest."""
        return [(x, y, float(self.matrix[i, j]))
                for i, x in enumerate(self.outcomes1)
                for j, y in enumerate(self.outcomes2)]

    def marginal(self, which: int) -> OutcomeDistribution:
        """Distribution of the first (``which=0``) or second (``which=1``) observable."""
        if which == 0:
            return OutcomeDistribution(zip(self.outcomes1, self.matrix.sum(axis=1)))
        return OutcomeDistribution(zip(self.outcomes2, self.matrix.sum(axis=0)))

    def total(self) -> float:
        return float(self.matrix.sum())


def _joint_weight(state: QuantumState, ops: Sequence[Tuple[np.ndarray, Site]]) -> float:
    data = np.asarray(state.data)
    for op, site in ops:
        if site is None:
            data = op @ data if state.is_pure else op @ data @ dagger(op)
        else:
            data = apply_local(data, op, state.site_dims, site)
    if state.is_pure:
        p = float(np.vdot(data, data).real)
    else:
        p = float(np.trace(data).real)
    return clamp_probability(p, "joint weight")


def joint_distribution(state: QuantumState, obs1: Observable, obs2: Observable,
                       sites: Tuple[Site, Site] = (0, 1),
                       tol: Optional[Tolerances] = None) -> JointTable:
    """
    p(x, y) = ‖(Ê^A(x)⊗Ê^B(y))|Ψ⟩‖² for every outcome pair.

    Observables on different sites always have a joint table. Two observables
    on the same site (or both on the whole space, ``None``) must commute, in
    which case p(x, y) = ‖F̂(y)Ê(x)ψ‖².

    Raises:
        NotCompatible: If same-site observables do not commute.
        DimensionMismatch, SiteMismatch: If an observable does not fit.
    """
    t = resolve(tol)
    s1, s2 = sites
    if s1 == s2 and not compatible(obs1, obs2, t):
        raise NotCompatible(
            f"{obs1.label} and {obs2.label} do not commute: no joint probability distribution"
        )

    matrix = np.zeros((len(obs1.outcomes), len(obs2.outcomes)))
    for i, x in enumerate(obs1.outcomes):
        e = site_projector(state, obs1, x, s1, t)
        for j, y in enumerate(obs2.outcomes):
            f = site_projector(state, obs2, y, s2, t)
            if s1 == s2:
                matrix[i, j] = _joint_weight(state, [(f @ e, s1)])
            else:
                matrix[i, j] = _joint_weight(state, [(e, s1), (f, s2)])

    logger.debug(f"Joint table {obs1.label}x{obs2.label} on sites {sites}: total {matrix.sum():.12g}")
    return JointTable(tuple(obs1.outcomes), tuple(obs2.outcomes), matrix, (obs1.label, obs2.label))


@dataclass(frozen=True)
class SchmidtResult:
    """Outcome of the pure-state separability test."""

    separable: bool
    coefficients: Tuple[float, ...]
    singular_values: Tuple[float, ...]

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def __bool__(self) -> bool:
        return self.separable


def is_separable_pure(state: QuantumState, tol: Optional[Tolerances] = None) -> SchmidtResult:
    """
    Schmidt-rank test for a pure state on exactly two sites.

    The amplitude vector is reshaped into a d1×d2 matrix; the state is
    separable iff exactly one singular value exceeds SCHMIDT_TOL.

    Raises:
        NotPure: If the state is a density operator.
        SiteMismatch: If the state does not have exactly two sites.
    """
    t = resolve(tol)
    if not state.is_pure:
        raise NotPure("Separability test is defined for pure states only")
    if state.n_sites != 2:
        raise SiteMismatch(f"Separability test needs exactly two sites, got {state.n_sites}")
    amplitudes = np.asarray(state.vector).reshape(state.site_dims)
    singular = np.linalg.svd(amplitudes, compute_uv=False)
    coefficients = tuple(float(s) for s in singular if s > t.SCHMIDT_TOL)
    return SchmidtResult(len(coefficients) == 1, coefficients, tuple(float(s) for s in singular))


def _matrix_of(obs) -> np.ndarray:
    return obs.matrix if isinstance(obs, Observable) else np.asarray(obs, dtype=complex)


def compatible(obs1, obs2, tol: Optional[Tolerances] = None) -> bool:
    """
    True iff max|[Â, B̂]| <= COMMUTE_TOL.

    Raises:
        DimensionMismatch: If the operators have different dimensions.
    """
    t = resolve(tol)
    a, b = _matrix_of(obs1), _matrix_of(obs2)
    if a.shape != b.shape:
        raise DimensionMismatch(f"Cannot compare observables of shapes {a.shape} and {b.shape}")
    return max_abs(commutator(a, b)) <= t.COMMUTE_TOL


@dataclass(frozen=True)
class JointRefinement:
    """
    A nondegenerate observable Ĉ with Â = f(Ĉ) and B̂ = g(Ĉ).

    Attributes:
        observable: Ĉ, with eigenvalues 1, 2, 3, ...
        f: Ĉ-eigenvalue to Â-eigenvalue.
        g: Ĉ-eigenvalue to B̂-eigenvalue.
    """

    observable: Observable
    f: Dict[float, float]
    g: Dict[float, float]

    def f_of(self, c: float) -> float:
        return self.f[self.observable.outcomes[self.observable.spectrum.index_of(c)]]

    def g_of(self, c: float) -> float:
        return self.g[self.observable.outcomes[self.observable.spectrum.index_of(c)]]

    def reconstruct_first(self) -> np.ndarray:
        """f(Ĉ) = Σ_c f(c)·Ê^C(c)."""
        return self.observable.spectrum.apply(self.f_of)

    def reconstruct_second(self) -> np.ndarray:
        """g(Ĉ) = Σ_c g(c)·Ê^C(c)."""
        return self.observable.spectrum.apply(self.g_of)


def joint_refinement(obs1: Observable, obs2: Observable,
                     tol: Optional[Tolerances] = None) -> JointRefinement:
    """
    Write two commuting observables as functions of one nondegenerate observable.

    Each joint eigenspace Ê^A(x)Ê^B(y) is orthonormalized, visiting x then y
    in increasing order, and every basis vector gets the next label
    c = 1, 2, 3, ... so Ĉ is nondegenerate even when a joint eigenspace is not
    one-dimensional.

    Raises:
        NotCompatible: If the observables do not commute, or their joint
            eigenspaces do not span the space.
    """
    t = resolve(tol)
    if not compatible(obs1, obs2, t):
        raise NotCompatible(f"{obs1.label} and {obs2.label} do not commute")

    dim = obs1.dim
    pairs = []
    f: Dict[float, float] = {}
    g: Dict[float, float] = {}
    for x, e in obs1.spectrum:
        for y, h in obs2.spectrum:
            joint = e @ h
            joint = 0.5 * (joint + dagger(joint))
            w, v = np.linalg.eigh(joint)
            for k in np.flatnonzero(w > 0.5):
                c = float(len(pairs) + 1)
                pairs.append((c, outer(v[:, k])))
                f[c] = x
                g[c] = y

    if len(pairs) != dim:
        raise NotCompatible(
            f"Joint eigenspaces of {obs1.label} and {obs2.label} span {len(pairs)} of {dim} dimensions"
        )
    label = f"C[{obs1.label},{obs2.label}]"
    logger.debug(f"Refined {obs1.label}, {obs2.label} into {label} with {dim} labels")
    return JointRefinement(Observable.from_spectrum(pairs, label=label), f, g)


def marginal_shift(state: QuantumState, obs: Observable, outcome: float,
                   site: int = 0, other: int = 1,
                   tol: Optional[Tolerances] = None) -> float:
    """
    Trace distance between the ``other`` marginal before and after an update on ``site``.

    Zero for product states; positive when the update changes the other
    subsystem's statistics.
    """
    if site == other:
        raise SiteMismatch("The measured site and the observed site must differ")
    before = marginal_state(state, other, tol)
    after = marginal_state(bipartite_luders_update(state, obs, outcome, site=site, tol=tol), other, tol)
    return trace_distance(before.data, after.data)


def no_signaling_gap(state: QuantumState, obs1: Observable, obs2: Observable,
                     sites: Tuple[int, int] = (0, 1),
                     tol: Optional[Tolerances] = None) -> float:
    """
    max_y |Σ_x p(A=x) p(B=y|A=x) − p(B=y)|.

    Outcomes x of probability at most ZERO_PROB_TOL contribute nothing.
    """
    t = resolve(tol)
    s1, s2 = sites
    gap = 0.0
    weights = [(x, born_probability(state, obs1, x, site=s1, tol=t)) for x in obs1.outcomes]
    for y in obs2.outcomes:
        averaged = sum(
            p * conditional_probability(state, (obs1, x), (obs2, y), s1, s2, t)
            for x, p in weights if p > t.ZERO_PROB_TOL
        )
        gap = max(gap, abs(averaged - born_probability(state, obs2, y, site=s2, tol=t)))
    return gap
