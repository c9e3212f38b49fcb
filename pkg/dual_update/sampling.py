"""
Monte Carlo sampling of paired measurement records.

Two modes draw the same joint distribution in different ways:

- ``direct``: draw (x, y) from the joint Born table.
- ``two-step``: draw x from the site-1 Born distribution, apply the Lüders
  update, then draw y from the updated state.

Trial ``i`` reads its uniforms from counter block ``i`` of a Philox generator
keyed by the seed, so a run is a pure function of (seed, trials, mode) no
matter how the trials are split into blocks or how many workers run them.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import chi2, chi2_contingency

from .errors import EmptySubensemble
from .hilbert import nearest_index
from .quantum_algebra import JointTable, joint_distribution
from .quantum_state import (
    Observable,
    OutcomeDistribution,
    QuantumState,
    bipartite_luders_update,
    outcome_distribution,
)
from .tolerances import Tolerances, resolve

logger = logging.getLogger(__name__)

DIRECT = "direct"
TWO_STEP = "two-step"
MODES = (DIRECT, TWO_STEP)

BLOCK_SIZE = 4096
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SampleRun:
    """
    Paired outcomes of a sampling run.

    Attributes:
        seed: 64-bit seed the run was drawn from.
        trials: Number of records.
        mode: ``"direct"`` or ``"two-step"``.
        outcomes1: Site-1 outcomes, one per trial.
        outcomes2: Site-2 outcomes, one per trial.
        spectrum1: Site-1 outcome values in increasing order.
        spectrum2: Site-2 outcome values in increasing order.
    """

    seed: int
    trials: int
    mode: str
    outcomes1: np.ndarray
    outcomes2: np.ndarray
    spectrum1: Tuple[float, ...]
    spectrum2: Tuple[float, ...]

    @property
    def records(self) -> List[Tuple[int, float, float]]:
        """(trial index, outcome₁, outcome₂) triples."""
        return [(i, float(x), float(y))
                for i, (x, y) in enumerate(zip(self.outcomes1, self.outcomes2))]

    def count(self, x: float, y: float) -> int:
        return int(np.sum((self.outcomes1 == x) & (self.outcomes2 == y)))

    def counts(self) -> np.ndarray:
        """Record counts per (x, y) cell, indexed like the spectra."""
        i = np.searchsorted(self.spectrum1, self.outcomes1)
        j = np.searchsorted(self.spectrum2, self.outcomes2)
        out = np.zeros((len(self.spectrum1), len(self.spectrum2)), dtype=int)
        np.add.at(out, (i, j), 1)
        return out


def _inverse_cdf(probabilities: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Cell index for each uniform draw; equal cumulative weights go to the smaller index."""
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    cum = np.cumsum(p)
    idx = np.searchsorted(cum, u * cum[-1], side="right")
    last = int(np.flatnonzero(p > 0.0)[-1])
    return np.minimum(idx, last)


def trial_uniforms(seed: int, start: int, n: int) -> np.ndarray:
    """
    Uniform pairs for trials ``start`` .. ``start + n - 1``.

    Each trial consumes one Philox counter block (four doubles) and keeps the
    first two, so row ``r`` depends only on (seed, start + r).
    """
    gen = np.random.Generator(np.random.Philox(key=seed & SEED_MASK, counter=start))
    return gen.random((n, 4))[:, :2]


class _Sampler:
    """Precomputed distributions for one (state, obs1, obs2, mode) configuration."""

    def __init__(self, state: QuantumState, obs1: Observable, obs2: Observable,
                 mode: str, sites: Tuple[int, int], tol: Tolerances):
        self.spectrum1 = np.array(obs1.outcomes)
        self.spectrum2 = np.array(obs2.outcomes)
        self.mode = mode
        if mode == DIRECT:
            self.joint = joint_distribution(state, obs1, obs2, sites, tol).matrix.reshape(-1)
        else:
            s1, s2 = sites
            self.marginal = np.array(outcome_distribution(state, obs1, s1, tol).probabilities)
            self.conditionals = np.zeros((len(self.spectrum1), len(self.spectrum2)))
            for i, x in enumerate(self.spectrum1):
                if self.marginal[i] > tol.ZERO_PROB_TOL:
                    updated = bipartite_luders_update(state, obs1, x, site=s1, tol=tol)
                    self.conditionals[i] = outcome_distribution(updated, obs2, s2, tol).probabilities
                else:
                    self.marginal[i] = 0.0

    def draw(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self.mode == DIRECT:
            cells = _inverse_cdf(self.joint, u[:, 0])
            i, j = np.divmod(cells, len(self.spectrum2))
        else:
            i = _inverse_cdf(self.marginal, u[:, 0])
            j = np.empty_like(i)
            for k in np.unique(i):
                chosen = i == k
                j[chosen] = _inverse_cdf(self.conditionals[k], u[chosen, 1])
        return self.spectrum1[i], self.spectrum2[j]


def sample_outcomes(state: QuantumState, obs1: Observable, obs2: Observable,
                    trials: int, seed: int, mode: str = DIRECT,
                    sites: Tuple[int, int] = (0, 1), workers: int = 1,
                    block_size: int = BLOCK_SIZE,
                    tol: Optional[Tolerances] = None) -> SampleRun:
    """
    Draw ``trials`` paired records.

    Args:
        state: Two-site state.
        obs1: Observable on ``sites[0]``.
        obs2: Observable on ``sites[1]``.
        trials: Number of records (>= 1).
        seed: Run seed; reduced to 64 bits.
        mode: ``"direct"`` or ``"two-step"``.
        sites: Sites of the two observables.
        workers: Threads drawing blocks in parallel; does not change the result.
        block_size: Trials per scheduled block; does not change the result.
        tol: Tolerance overrides.

    Returns:
        SampleRun: Records in trial order.

    Raises:
        ValueError: If ``trials`` < 1, ``workers`` < 1 or the mode is unknown.
    """
    t = resolve(tol)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if workers < 1 or block_size < 1:
        raise ValueError("workers and block_size must be positive")
    if mode not in MODES:
        raise ValueError(f"Unknown sampling mode {mode!r}; expected one of {MODES}")

    sampler = _Sampler(state, obs1, obs2, mode, sites, t)
    blocks = [(k, min(block_size, trials - k * block_size))
              for k in range((trials + block_size - 1) // block_size)]

    def run_block(block: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
        k, n = block
        return sampler.draw(trial_uniforms(seed, k * block_size, n))

    if workers == 1:
        parts = [run_block(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_block, blocks))

    outcomes1 = np.concatenate([p[0] for p in parts])
    outcomes2 = np.concatenate([p[1] for p in parts])
    logger.info(f"Sampled {trials} {mode} trials in {len(blocks)} blocks (seed={seed:#x})")
    return SampleRun(seed & SEED_MASK, trials, mode, outcomes1, outcomes2,
                     tuple(obs1.outcomes), tuple(obs2.outcomes))


def conditional_statistics(run: SampleRun, outcome: float, site: int = 0,
                           tol: Optional[Tolerances] = None) -> OutcomeDistribution:
    """
    Empirical distribution of the other site's outcomes among records whose
    ``site`` outcome equals ``outcome``.

    Raises:
        EmptySubensemble: If no record matches.
        UnknownOutcome: If ``outcome`` is not in the site's spectrum.
    """
    own, other = (run.outcomes1, run.outcomes2) if site == 0 else (run.outcomes2, run.outcomes1)
    spectrum = run.spectrum1 if site == 0 else run.spectrum2
    other_spectrum = run.spectrum2 if site == 0 else run.spectrum1
    x = spectrum[nearest_index(spectrum, outcome, tol)]
    selected = other[own == x]
    if selected.size == 0:
        raise EmptySubensemble(f"No records with site-{site} outcome {outcome!r}")
    return OutcomeDistribution(
        [(y, float(np.sum(selected == y)) / selected.size) for y in other_spectrum]
    )


def empirical_joint(run: SampleRun) -> JointTable:
    """Relative frequencies of each (x, y) cell."""
    return JointTable(run.spectrum1, run.spectrum2, run.counts() / run.trials, ("A", "B"))


@dataclass(frozen=True)
class CellCheck:
    x: float
    y: float
    expected: float
    observed: float
    band: float

    @property
    def passed(self) -> bool:
        return abs(self.observed - self.expected) <= self.band


def band_check(run: SampleRun, exact: JointTable, sigmas: float = 4.0) -> List[CellCheck]:
    """
    Compare empirical frequencies with exact probabilities, cell by cell.

    Each cell passes when |observed − p| <= sigmas·√(p(1−p)/trials). A cell
    with p = 0 therefore passes only with zero records.
    """
    observed = empirical_joint(run).matrix
    checks = []
    for i, x in enumerate(run.spectrum1):
        for j, y in enumerate(run.spectrum2):
            p = float(exact.matrix[i, j])
            band = sigmas * np.sqrt(max(p * (1.0 - p), 0.0) / run.trials)
            checks.append(CellCheck(x, y, p, float(observed[i, j]), float(band)))
    return checks


@dataclass(frozen=True)
class HomogeneityTest:
    statistic: float
    dof: int
    p_value: float
    critical: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.critical


def homogeneity_test(runs: Sequence[SampleRun], level: float = 0.999) -> HomogeneityTest:
    """
    Chi-square test that several runs draw from the same joint distribution.

    Cells empty in every run are dropped. ``critical`` is the ``level``
    quantile of the chi-square distribution.
    """
    counts = np.array([r.counts().reshape(-1) for r in runs])
    counts = counts[:, counts.sum(axis=0) > 0]
    if counts.shape[1] < 2:
        return HomogeneityTest(0.0, 0, 1.0, 0.0)
    statistic, p_value, dof, _ = chi2_contingency(counts, correction=False)
    critical = float(chi2.ppf(level, dof))
    logger.debug(f"Homogeneity chi2={statistic:.4g} dof={dof} critical={critical:.4g}")
    return HomogeneityTest(float(statistic), int(dof), float(p_value), critical)
