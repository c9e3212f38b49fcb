"""
Algebra on finite probability spaces: product measures, marginals,
independence (classical separability) and conditional probabilities between
site random variables.
"""

import logging
from functools import reduce
from typing import Optional, Tuple

import numpy as np

from .errors import NotSiteStructured
from .prob_space import (
    Atom,
    FiniteProbSpace,
    RandomVariable,
    bayes_condition,
    distribution,
    probability,
)
from .tolerances import Tolerances, resolve

logger = logging.getLogger(__name__)


def _as_tuple(atom: Atom) -> Tuple[str, ...]:
    return atom if isinstance(atom, tuple) else (atom,)


def product_space(space1: FiniteProbSpace, space2: FiniteProbSpace,
                  tol: Optional[Tolerances] = None) -> FiniteProbSpace:
    """
    Product measure on Ω₁×Ω₂: P(ω₁, ω₂) = P¹(ω₁)·P²(ω₂).

    Site-structured inputs contribute all of their sites, so the product of a
    two-site space with a one-site space has three sites.

    Args:
        space1 (FiniteProbSpace): The first factor.
        space2 (FiniteProbSpace): The second factor.

    Returns:
        FiniteProbSpace: Site-structured space, first factor varying slowest.
    """
    atoms = []
    weights = []
    for a, wa in space1:
        for b, wb in space2:
            atoms.append(_as_tuple(a) + _as_tuple(b))
            weights.append(wa * wb)
    return FiniteProbSpace(atoms, weights, tol)


def _require_sites(space: FiniteProbSpace) -> None:
    if not space.is_site_structured:
        raise NotSiteStructured("Operation needs a site-structured space (tuple atoms)")


def marginal(space: FiniteProbSpace, site: int,
             tol: Optional[Tolerances] = None) -> FiniteProbSpace:
    """
    Marginal measure of one site: sum the weight table over every other site.

    Raises:
        NotSiteStructured: If the atoms are not tuples.
        IndexError: If ``site`` is out of range.
    """
    _require_sites(space)
    if not 0 <= site < space.n_sites:
        raise IndexError(f"Site {site} out of range for {space.n_sites} sites")
    table = space.weight_table()
    others = tuple(k for k in range(space.n_sites) if k != site)
    weights = table.sum(axis=others) if others else table
    return FiniteProbSpace(list(space.site_labels[site]), weights / weights.sum(), tol)


def is_separable(space: FiniteProbSpace, tol: Optional[Tolerances] = None) -> bool:
    """
    True iff the weights equal the product of the site marginals within 1e-10.

    Separability of a classical measure is independence of its site
    coordinates; a measure that is not separable is called entangled.

    Raises:
        NotSiteStructured: If the atoms are not tuples.
    """
    t = resolve(tol)
    _require_sites(space)
    table = space.weight_table()
    sums = [table.sum(axis=tuple(k for k in range(table.ndim) if k != site))
            for site in range(table.ndim)]
    product = reduce(np.multiply.outer, sums)
    gap = float(np.max(np.abs(table - product)))
    logger.debug(f"Separability gap {gap:.3e} for {len(space)} atoms")
    return gap <= t.PROB_SUM_TOL


def conditional_probability_classical(space: FiniteProbSpace,
                                      first: Tuple[RandomVariable, float],
                                      second: Tuple[RandomVariable, float],
                                      tol: Optional[Tolerances] = None) -> float:
    """
    P(B=y | A=x) = p(B=y; P_{A=x}).

    Raises:
        ZeroProbabilityOutcome: If P(A=x) <= ZERO_PROB_TOL.
    """
    rv1, x = first
    rv2, y = second
    return probability(bayes_condition(space, rv1, x, tol), rv2, y)


def total_variation(space1: FiniteProbSpace, space2: FiniteProbSpace) -> float:
    """½ Σ_ω |P¹(ω) − P²(ω)| over the union of both atom sets."""
    atoms = list(dict.fromkeys(list(space1.atoms) + list(space2.atoms)))
    return 0.5 * sum(abs(space1.weight(a) - space2.weight(a)) for a in atoms)


def marginal_shift(space: FiniteProbSpace, rv: RandomVariable, value: float,
                   other: int = 1, tol: Optional[Tolerances] = None) -> float:
    """
    Total-variation distance between the ``other`` marginal before and after
    conditioning on ``rv = value``.
    """
    before = marginal(space, other, tol)
    after = marginal(bayes_condition(space, rv, value, tol), other, tol)
    return total_variation(before, after)


def total_probability_gap(space: FiniteProbSpace, rv1: RandomVariable, rv2: RandomVariable,
                          tol: Optional[Tolerances] = None) -> float:
    """max_y |Σ_x P(A=x) P(B=y|A=x) − P(B=y)|, the law of total probability."""
    t = resolve(tol)
    gap = 0.0
    weights = [(x, p) for x, p in distribution(space, rv1, t) if p > t.ZERO_PROB_TOL]
    for y, py in distribution(space, rv2, t):
        averaged = sum(p * conditional_probability_classical(space, (rv1, x), (rv2, y), t)
                       for x, p in weights)
        gap = max(gap, abs(averaged - py))
    return gap
