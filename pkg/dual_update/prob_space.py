"""
Finite Kolmogorov probability spaces, random variables and Bayes conditioning.

Events are predicates over atoms, so the sigma-algebra is the power set and
never has to be stored. A space is *site-structured* when every atom label is
a tuple of per-site labels and the atom set is the full Cartesian product of
the site label sets.
"""

import logging
from typing import Callable, Dict, Hashable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionTooLarge,
    InvalidProbabilitySpace,
    PartialRandomVariable,
    ZeroProbabilityOutcome,
)
from .quantum_state import OutcomeDistribution, clamp_probability
from .tolerances import MAX_ATOMS, Tolerances, resolve

logger = logging.getLogger(__name__)

Atom = Union[str, Tuple[str, ...]]
Event = Callable[[Atom], bool]


class FiniteProbSpace:
    """
    A finite sample space Ω with probability weights P(ω).

    ## Site structure

    Atoms given as tuples, e.g. ``("0", "1")``, describe Ω = Ω₁×Ω₂. Every
    combination of site labels must be present (weights may be zero), which
    is what lets ``marginal`` and ``is_separable`` read the weights as a
    table.

    ## Supported Operations

    - Lookup (``space[atom]``): weight of an atom, 0.0 for unknown atoms.
    - Membership (``atom in space``).
    - Iteration: (atom, weight) pairs in construction order.
    - Equality: same atoms, weights within 1e-12.

    Conditioning and the product-space algebra live in ``bayes_condition``
    and ``prob_space_algebra``.
    """

    def __init__(self, atoms: Sequence[Atom], weights: Sequence[float],
                 tol: Optional[Tolerances] = None):
        """
        Initializes a FiniteProbSpace.

        Args:
            atoms (Sequence[Atom]): Distinct atom labels (strings, or tuples of
                strings for a site-structured space).
            weights (Sequence[float]): One nonnegative weight per atom.
            tol (Tolerances, optional): Tolerance overrides.

        Raises:
            InvalidProbabilitySpace: If weights are negative or do not sum to 1,
                atoms repeat, or tuple atoms do not form a full product.
            DimensionTooLarge: If there are more than MAX_ATOMS atoms.
        """
        t = resolve(tol)
        atoms = [tuple(str(s) for s in a) if isinstance(a, tuple) else str(a) for a in atoms]
        w = np.array(weights, dtype=float)
        if len(atoms) == 0:
            raise InvalidProbabilitySpace("A probability space needs at least one atom")
        if len(atoms) > MAX_ATOMS:
            raise DimensionTooLarge(f"{len(atoms)} atoms exceeds cap {MAX_ATOMS}")
        if w.shape != (len(atoms),):
            raise InvalidProbabilitySpace(f"Expected {len(atoms)} weights, got shape {w.shape}")
        if len(set(atoms)) != len(atoms):
            raise InvalidProbabilitySpace("Atom labels must be distinct")
        if np.any(w < 0.0):
            raise InvalidProbabilitySpace(f"Negative weight {float(w.min())!r}")
        total = float(w.sum())
        if abs(total - 1.0) > t.WEIGHT_SUM_TOL:
            raise InvalidProbabilitySpace(f"Weights sum to {total!r}, expected 1")

        self.atoms: List[Atom] = atoms
        self.weights = w
        self.weights.flags.writeable = False
        self._index: Dict[Atom, int] = {a: i for i, a in enumerate(atoms)}
        self.site_labels = self._site_labels(atoms)

    @staticmethod
    def _site_labels(atoms: List[Atom]) -> Optional[Tuple[Tuple[str, ...], ...]]:
        kinds = {isinstance(a, tuple) for a in atoms}
        if kinds == {False}:
            return None
        if kinds != {True}:
            raise InvalidProbabilitySpace("Atoms mix plain and site-structured labels")
        arity = {len(a) for a in atoms}
        if len(arity) != 1:
            raise InvalidProbabilitySpace("Site-structured atoms have differing numbers of sites")
        n = arity.pop()
        labels = tuple(tuple(dict.fromkeys(a[k] for a in atoms)) for k in range(n))
        expected = int(np.prod([len(s) for s in labels]))
        if expected != len(atoms):
            raise InvalidProbabilitySpace(
                f"Site-structured atoms cover {len(atoms)} of {expected} label combinations"
            )
        return labels

    @classmethod
    def from_table(cls, site1: Sequence[str], site2: Sequence[str], table: Sequence[Sequence[float]],
                   tol: Optional[Tolerances] = None) -> "FiniteProbSpace":
        """
        Builds a two-site space from a weight table.

        Args:
            site1 (Sequence[str]): Site-1 labels (rows).
            site2 (Sequence[str]): Site-2 labels (columns).
            table: ``table[i][j]`` is the weight of (site1[i], site2[j]).

        Returns:
            FiniteProbSpace: The site-structured space.
        """
        m = np.asarray(table, dtype=float)
        if m.shape != (len(site1), len(site2)):
            raise InvalidProbabilitySpace(f"Table shape {m.shape} does not match the labels")
        atoms = [(str(a), str(b)) for a in site1 for b in site2]
        return cls(atoms, m.reshape(-1), tol)

    @classmethod
    def uniform(cls, atoms: Sequence[Atom]) -> "FiniteProbSpace":
        n = len(atoms)
        return cls(atoms, np.full(n, 1.0 / n))

    @property
    def is_site_structured(self) -> bool:
        return self.site_labels is not None

    @property
    def n_sites(self) -> int:
        return 0 if self.site_labels is None else len(self.site_labels)

    def weight_table(self) -> np.ndarray:
        """Weights as an array indexed by site-label positions."""
        if self.site_labels is None:
            raise InvalidProbabilitySpace("Space is not site-structured")
        shape = tuple(len(s) for s in self.site_labels)
        table = np.zeros(shape)
        positions = [{label: i for i, label in enumerate(s)} for s in self.site_labels]
        for atom, w in zip(self.atoms, self.weights):
            table[tuple(p[a] for p, a in zip(positions, atom))] = w
        return table

    def weight(self, atom: Atom) -> float:
        i = self._index.get(atom)
        return 0.0 if i is None else float(self.weights[i])

    def support(self) -> List[Atom]:
        return [a for a, w in zip(self.atoms, self.weights) if w > 0.0]

    def __getitem__(self, atom: Atom) -> float:
        """
        Retrieves the weight of an atom.

        Args:
            atom (Atom): Atom label.

        Returns:
            float: P({atom}), or 0.0 if the atom is not in Ω.
        """
        return self.weight(atom)

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self) -> Iterator[Tuple[Atom, float]]:
        return iter(zip(self.atoms, (float(w) for w in self.weights)))

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._index

    def __eq__(self, other: object) -> bool:
        """
        Checks if two spaces have the same atoms and approximately equal weights.
        """
        if not isinstance(other, FiniteProbSpace):
            return NotImplemented
        if set(self.atoms) != set(other.atoms):
            return False
        return all(abs(w - other.weight(a)) <= 1e-12 for a, w in self)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"FiniteProbSpace({list(self)})"

    def __str__(self) -> str:
        items = list(self)
        if len(items) > 6:
            return f"FiniteProbSpace({items[:6]}...)"
        return f"FiniteProbSpace({items})"


class RandomVariable:
    """
    A real-valued map on atoms.

    Attributes:
        fn (Callable[[Atom], float]): The map ω ↦ A(ω).
        label (str): Short display name.
    """

    def __init__(self, fn: Callable[[Atom], float], label: str = "A"):
        self.fn = fn
        self.label = label

    @classmethod
    def from_mapping(cls, mapping: Mapping[Hashable, float], label: str = "A") -> "RandomVariable":
        """Random variable given by an explicit atom → value table."""
        table = dict(mapping)

        def fn(atom: Atom) -> float:
            return float(table[atom])

        return cls(fn, label)

    @classmethod
    def site_variable(cls, site: int, mapping: Optional[Mapping[str, float]] = None,
                      label: str = "A") -> "RandomVariable":
        """
        Random variable that reads one site of a site-structured atom.

        Args:
            site: Position in the atom tuple (0-based).
            mapping: Site label → value. Without it the label itself is parsed
                as a number.
        """
        table = None if mapping is None else dict(mapping)

        def fn(atom: Atom) -> float:
            key = atom[site]
            return float(key) if table is None else float(table[key])

        return cls(fn, label)

    def __call__(self, atom: Atom) -> float:
        try:
            return self.fn(atom)
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise PartialRandomVariable(f"{self.label} is not defined on atom {atom!r}") from e

    def values(self, space: FiniteProbSpace) -> np.ndarray:
        """A(ω) for every atom of ``space``, in atom order."""
        return np.array([self(a) for a in space.atoms], dtype=float)

    def __repr__(self) -> str:
        return f"RandomVariable({self.label!r})"


def _matches(values: np.ndarray, value: float) -> np.ndarray:
    return np.abs(values - value) <= 1e-12 * (1.0 + abs(value))


def _distinct(values: np.ndarray) -> List[float]:
    distinct: List[float] = []
    for v in np.sort(values):
        if not distinct or abs(v - distinct[-1]) > 1e-12 * (1.0 + abs(distinct[-1])):
            distinct.append(float(v))
    return distinct


def event_probability(space: FiniteProbSpace, event: Event) -> float:
    """P(E) for an event given as a predicate over atoms."""
    return float(sum(w for a, w in space if event(a)))


def probability(space: FiniteProbSpace, rv: RandomVariable, value: float) -> float:
    """
    p(A=x; P) = Σ_{ω : A(ω)=x} P(ω).

    Values match when they agree within 1e-12 relative.
    """
    mask = _matches(rv.values(space), value)
    return clamp_probability(float(space.weights[mask].sum()), f"P({rv.label}={value})")


def distribution(space: FiniteProbSpace, rv: RandomVariable,
                 tol: Optional[Tolerances] = None) -> OutcomeDistribution:
    """Distribution of ``rv`` over its distinct values."""
    values = rv.values(space)
    return OutcomeDistribution([(v, probability(space, rv, v)) for v in _distinct(values)], tol)


def condition_event(space: FiniteProbSpace, event: Event,
                    tol: Optional[Tolerances] = None, label: object = "event") -> FiniteProbSpace:
    """
    P_E(ω) = P(ω)/P(E) on E and 0 elsewhere.

    Raises:
        ZeroProbabilityOutcome: If P(E) <= ZERO_PROB_TOL.
    """
    t = resolve(tol)
    mask = np.array([bool(event(a)) for a in space.atoms])
    p = float(space.weights[mask].sum())
    if p <= t.ZERO_PROB_TOL:
        raise ZeroProbabilityOutcome(label, p)
    weights = np.where(mask, space.weights / p, 0.0)
    # renormalize the rounding left by the division
    weights = weights / weights.sum()
    return FiniteProbSpace(space.atoms, weights, t)


def bayes_condition(space: FiniteProbSpace, rv: RandomVariable, value: float,
                    tol: Optional[Tolerances] = None) -> FiniteProbSpace:
    """
    Measure update P → P_{A=x} by the Bayes formula.

    Args:
        space: Prior space.
        rv: Observed random variable.
        value: Observed value x.
        tol: Tolerance overrides.

    Returns:
        FiniteProbSpace: Same atoms; atoms with A(ω)≠x get weight 0, the rest
        are rescaled by 1/P(A=x).

    Raises:
        ZeroProbabilityOutcome: If P(A=x) <= ZERO_PROB_TOL.
    """
    values = rv.values(space)
    mask = dict(zip(space.atoms, _matches(values, value)))
    updated = condition_event(space, lambda a: bool(mask[a]), tol, label=value)
    logger.debug(f"Bayes update {rv.label}={value}: P={probability(space, rv, value):.6g}")
    return updated


def nonselective_condition(space: FiniteProbSpace, rv: RandomVariable,
                           tol: Optional[Tolerances] = None) -> FiniteProbSpace:
    """
    Σ_x P(A=x)·P_{A=x}: conditioning on A without reading the value.

    The result equals ``space``; it is computed from the conditioned spaces
    so it can be compared with the quantum non-selective update.
    """
    t = resolve(tol)
    total = np.zeros(len(space))
    for x, p in distribution(space, rv, t):
        if p > t.ZERO_PROB_TOL:
            total += p * bayes_condition(space, rv, x, t).weights
    return FiniteProbSpace(space.atoms, total / total.sum(), t)
