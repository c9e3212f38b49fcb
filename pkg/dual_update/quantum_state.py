"""
Quantum states, observables, the Born rule and the Lüders state update.

Sites are indexed from 0 in tensor order, so on H = H_0⊗H_1 the observable
"A on the first system" is ``site=0``. Passing ``site=None`` means the
observable acts on the whole space.

Example:
    >>> from dual_update.quantum_state import Observable, bell_state, born_probability
    >>> import numpy as np
    >>> z = Observable(np.diag([0.0, 1.0]), label="Z")
    >>> psi = bell_state()
    >>> round(born_probability(psi, z, 0.0, site=0), 12)
    0.5
"""

import logging
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DimensionMismatch,
    NotAState,
    NotPure,
    SiteMismatch,
    ZeroProbabilityOutcome,
)
from .hilbert import (
    SpectralDecomposition,
    apply_local,
    as_matrix,
    as_vector,
    check_dimension,
    dagger,
    is_hermitian,
    max_abs,
    nearest_index,
    outer,
    partial_trace,
    spectral_decompose,
)
from .tolerances import Tolerances, resolve

logger = logging.getLogger(__name__)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


def clamp_probability(p: float, what: str = "probability",
                      tol: Optional[Tolerances] = None) -> float:
    """Clamp into [0, 1], warning when more than rounding noise is removed."""
    t = resolve(tol)
    clamped = min(max(float(p), 0.0), 1.0)
    if abs(clamped - p) > t.ZERO_PROB_TOL:
        logger.warning(f"Clamped {what} {p!r} to {clamped!r}")
    return clamped


class Observable:
    """
    A Hermitian operator together with its spectral decomposition.

    Attributes:
        matrix (np.ndarray): The Hermitian operator (read-only).
        spectrum (SpectralDecomposition): Eigenvalue/projector pairs.
        label (str): Short display name.
    """

    def __init__(self, matrix: np.ndarray, label: str = "A",
                 tol: Optional[Tolerances] = None,
                 spectrum: Optional[SpectralDecomposition] = None):
        m = as_matrix(matrix)
        check_dimension(m.shape[0])
        self.spectrum = spectrum if spectrum is not None else spectral_decompose(m, tol)
        self.matrix = _frozen(m)
        self.label = label

    @classmethod
    def from_spectrum(cls, pairs: Sequence[Tuple[float, np.ndarray]],
                      label: str = "A") -> "Observable":
        """Build Σ x·E(x) from eigenvalue/projector pairs ordered by eigenvalue."""
        dim = np.asarray(pairs[0][1]).shape[0]
        sd = SpectralDecomposition(list(pairs), dim)
        return cls(sd.reconstruct(), label=label, spectrum=sd)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def outcomes(self) -> List[float]:
        return self.spectrum.eigenvalues

    def projector(self, outcome: float, tol: Optional[Tolerances] = None) -> np.ndarray:
        return self.spectrum.projector_for(outcome, tol)

    def __repr__(self) -> str:
        return f"Observable({self.label!r}, dim={self.dim}, outcomes={self.outcomes})"


class QuantumState:
    """
    A pure state vector or a density operator on H_0⊗…⊗H_{n-1}.

    Instances are immutable; every update returns a new state.

    Attributes:
        kind (str): ``"pure"`` or ``"density"``.
        data (np.ndarray): State vector (pure) or density matrix (density).
        site_dims (Tuple[int, ...]): Site dimensions in tensor order.
    """

    PURE = "pure"
    DENSITY = "density"

    def __init__(self, kind: str, data: np.ndarray,
                 site_dims: Optional[Sequence[int]] = None,
                 tol: Optional[Tolerances] = None):
        t = resolve(tol)
        if kind == self.PURE:
            data = as_vector(data)
        elif kind == self.DENSITY:
            data = as_matrix(data)
        else:
            raise NotAState(f"Unknown state kind: {kind!r}")

        dim = data.shape[0]
        dims = (dim,) if site_dims is None else tuple(int(d) for d in site_dims)
        check_dimension(dim)
        if len(dims) > 1:
            for d in dims:
                check_dimension(d, site=True)
        if int(np.prod(dims)) != dim:
            raise DimensionMismatch(f"Site dims {dims} do not factor dimension {dim}")

        if kind == self.PURE:
            norm = float(np.linalg.norm(data))
            if abs(norm - 1.0) > t.NORM_TOL:
                raise NotAState(f"State vector has norm {norm!r}, expected 1")
        else:
            if not is_hermitian(data, t):
                raise NotAState("Density operator is not Hermitian")
            trace = complex(np.trace(data))
            if abs(trace - 1.0) > t.NORM_TOL:
                raise NotAState(f"Density operator has trace {trace!r}, expected 1")
            data = 0.5 * (data + dagger(data))
            smallest = float(np.min(np.linalg.eigvalsh(data)))
            if smallest < -t.PSD_TOL:
                raise NotAState(f"Density operator has negative eigenvalue {smallest:.3e}")

        self.kind = kind
        self.data = _frozen(data)
        self.site_dims = dims

    @classmethod
    def pure(cls, vector: Sequence, site_dims: Optional[Sequence[int]] = None,
             tol: Optional[Tolerances] = None) -> "QuantumState":
        return cls(cls.PURE, np.asarray(vector, dtype=complex), site_dims, tol)

    @classmethod
    def density(cls, matrix: Sequence, site_dims: Optional[Sequence[int]] = None,
                tol: Optional[Tolerances] = None) -> "QuantumState":
        return cls(cls.DENSITY, np.asarray(matrix, dtype=complex), site_dims, tol)

    @property
    def is_pure(self) -> bool:
        return self.kind == self.PURE

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @property
    def vector(self) -> np.ndarray:
        """The state vector; only defined for pure states."""
        if not self.is_pure:
            raise NotPure("Density-operator state has no state vector")
        return self.data

    def density_matrix(self) -> np.ndarray:
        """ρ (|ψ⟩⟨ψ| for pure states)."""
        return outer(self.data) if self.is_pure else np.array(self.data)

    def check_site(self, site: int) -> None:
        if not 0 <= site < self.n_sites:
            raise SiteMismatch(f"Site {site} out of range for {self.n_sites} sites")

    def distance(self, other: "QuantumState") -> float:
        """Largest entrywise difference of the density matrices (phase-blind)."""
        if self.dim != other.dim:
            raise DimensionMismatch(f"Cannot compare dimensions {self.dim} and {other.dim}")
        return max_abs(self.density_matrix() - other.density_matrix())

    def __repr__(self) -> str:
        return f"QuantumState({self.kind}, site_dims={self.site_dims})"


class OutcomeDistribution:
    """
    A finite distribution over observable outcomes.

    Attributes:
        entries (List[Tuple[float, float]]): (outcome, probability) pairs in
            increasing outcome order.
    """

    def __init__(self, entries: Sequence[Tuple[float, float]],
                 tol: Optional[Tolerances] = None):
        t = resolve(tol)
        cleaned = []
        for outcome, p in entries:
            if p < -t.PROB_SUM_TOL:
                raise NotAState(f"Negative probability {p!r} for outcome {outcome!r}")
            cleaned.append((float(outcome), clamp_probability(p, f"p({outcome})", t)))
        total = sum(p for _, p in cleaned)
        if abs(total - 1.0) > t.PROB_SUM_TOL:
            raise NotAState(f"Probabilities sum to {total!r}, expected 1")
        self.entries = sorted(cleaned)

    @property
    def outcomes(self) -> List[float]:
        return [x for x, _ in self.entries]

    @property
    def probabilities(self) -> List[float]:
        return [p for _, p in self.entries]

    def probability(self, outcome: float, tol: Optional[Tolerances] = None) -> float:
        return self.entries[nearest_index(self.outcomes, outcome, tol)][1]

    def __iter__(self) -> Iterator[Tuple[float, float]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"OutcomeDistribution({self.entries})"


# Standard states

def basis_state(index: int, dim: int) -> np.ndarray:
    """Computational basis vector |index⟩ in C^dim."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def ket(digits: str, dims: Optional[Sequence[int]] = None) -> QuantumState:
    """
    Computational basis product state, e.g. ``ket("01")`` for |0⟩⊗|1⟩.

    Args:
        digits: One digit per site.
        dims: Site dimensions (qubits by default).
    """
    dims = tuple(dims) if dims is not None else (2,) * len(digits)
    vectors = [basis_state(int(c), d) for c, d in zip(digits, dims)]
    return product_state(*vectors)


def product_state(*vectors: Sequence) -> QuantumState:
    """Pure product state ψ_0⊗ψ_1⊗… of normalized site vectors."""
    parts = [as_vector(v) for v in vectors]
    full = parts[0]
    for p in parts[1:]:
        full = np.kron(full, p)
    return QuantumState.pure(full, [p.size for p in parts])


def bell_state() -> QuantumState:
    """(|01⟩ + |10⟩)/√2."""
    v = np.zeros(4, dtype=complex)
    v[1] = v[2] = 1.0 / np.sqrt(2.0)
    return QuantumState.pure(v, (2, 2))


def epr_state() -> QuantumState:
    """(|xx⟩ + |yy⟩)/√2 with |x⟩ = |0⟩ and |y⟩ = |1⟩ (polarization basis)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / np.sqrt(2.0)
    return QuantumState.pure(v, (2, 2))


def random_pure_state(site_dims: Sequence[int], rng: np.random.Generator) -> QuantumState:
    """Haar-random pure state on the given sites."""
    dim = int(np.prod(site_dims))
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return QuantumState.pure(v / np.linalg.norm(v), site_dims)


# Born rule and Lüders update

def site_projector(state: QuantumState, obs: Observable, outcome: float,
                   site: Optional[int], tol: Optional[Tolerances] = None) -> np.ndarray:
    """Projector Ê(x) of ``obs`` after checking that it fits ``site`` of ``state``."""
    if site is None:
        if obs.dim != state.dim:
            raise DimensionMismatch(
                f"Observable {obs.label} has dimension {obs.dim}, state has {state.dim}"
            )
    else:
        state.check_site(site)
        if obs.dim != state.site_dims[site]:
            raise SiteMismatch(
                f"Observable {obs.label} has dimension {obs.dim}, "
                f"site {site} has {state.site_dims[site]}"
            )
    return obs.projector(outcome, tol)


def _project(state: QuantumState, projector: np.ndarray, site: Optional[int]) -> np.ndarray:
    """Ê|ψ⟩ for pure states, ÊρÊ for density operators (Ê lifted to ``site``)."""
    if site is None:
        if state.is_pure:
            return projector @ state.data
        return projector @ state.data @ projector
    return apply_local(np.asarray(state.data), projector, state.site_dims, site)


def _weight(state: QuantumState, projected: np.ndarray) -> float:
    if state.is_pure:
        p = float(np.vdot(projected, projected).real)
    else:
        p = float(np.trace(projected).real)
    return clamp_probability(p, "Born weight")


def born_probability(state: QuantumState, obs: Observable, outcome: float,
                     site: Optional[int] = None, tol: Optional[Tolerances] = None) -> float:
    """
    Born rule p(A=x; ψ) = ‖Ê(x)ψ‖², or Tr(Ê(x)ρÊ(x)) for density operators.

    Args:
        state: Quantum state.
        obs: Observable on the whole space (``site=None``) or on one site.
        outcome: Eigenvalue of ``obs``.
        site: Site the observable acts on, lifted as I⊗…⊗Â⊗…⊗I.
        tol: Tolerance overrides.

    Returns:
        float: Probability in [0, 1].

    Raises:
        UnknownOutcome: If ``outcome`` is not in the spectrum.
        DimensionMismatch: If the observable does not fit the state.
        SiteMismatch: If ``site`` is invalid or has the wrong dimension.
    """
    projector = site_projector(state, obs, outcome, site, tol)
    return _weight(state, _project(state, projector, site))


def outcome_distribution(state: QuantumState, obs: Observable, site: Optional[int] = None,
                         tol: Optional[Tolerances] = None) -> OutcomeDistribution:
    """Born probabilities for every outcome of ``obs``."""
    entries = [(x, born_probability(state, obs, x, site, tol)) for x in obs.outcomes]
    return OutcomeDistribution(entries, tol)


def luders_update(state: QuantumState, obs: Observable, outcome: float,
                  site: Optional[int] = None, tol: Optional[Tolerances] = None) -> QuantumState:
    """
    Lüders state update after observing ``obs = outcome``.

    Pure states map to Ê|ψ⟩/‖Ê|ψ⟩‖, density operators to ÊρÊ/Tr(ÊρÊ).
    Repeating the same update leaves the result unchanged.

    Raises:
        ZeroProbabilityOutcome: If the outcome has probability <= ZERO_PROB_TOL.
        UnknownOutcome, DimensionMismatch, SiteMismatch: As in ``born_probability``.
    """
    t = resolve(tol)
    projector = site_projector(state, obs, outcome, site, t)
    projected = _project(state, projector, site)
    p = _weight(state, projected)
    if p <= t.ZERO_PROB_TOL:
        raise ZeroProbabilityOutcome(outcome, p)
    logger.debug(f"Lüders update {obs.label}={outcome} (site={site}) with p={p:.6g}")
    if state.is_pure:
        return QuantumState(QuantumState.PURE, projected / np.sqrt(p), state.site_dims, t)
    updated = projected / p
    return QuantumState(QuantumState.DENSITY, 0.5 * (updated + dagger(updated)),
                        state.site_dims, t)


def bipartite_luders_update(state: QuantumState, obs: Observable, outcome: float,
                            site: int = 0, tol: Optional[Tolerances] = None) -> QuantumState:
    """
    Update a compound state after measuring a site observable.

    Equivalent to ``luders_update`` with Ê(x)⊗I (``site=0``) or I⊗Ê(x)
    (``site=1``).

    Raises:
        SiteMismatch: If the state has fewer than two sites, or the observable
            does not match the site dimension.
        ZeroProbabilityOutcome, UnknownOutcome: As in ``luders_update``.
    """
    if state.n_sites < 2:
        raise SiteMismatch(f"Bipartite update needs at least two sites, state has {state.n_sites}")
    return luders_update(state, obs, outcome, site=site, tol=tol)


def nonselective_update(state: QuantumState, obs: Observable, site: Optional[int] = None,
                        tol: Optional[Tolerances] = None) -> QuantumState:
    """
    Update without selecting an outcome: ρ ↦ Σ_x Ê(x)ρÊ(x).

    Returns a density-operator state. The marginal state of any other site is
    unchanged by this map.
    """
    t = resolve(tol)
    rho_state = state if not state.is_pure else QuantumState.density(
        state.density_matrix(), state.site_dims, t)
    total = np.zeros((state.dim, state.dim), dtype=complex)
    for x in obs.outcomes:
        projector = site_projector(rho_state, obs, x, site, t)
        total += _project(rho_state, projector, site)
    return QuantumState.density(0.5 * (total + dagger(total)), state.site_dims, t)


def marginal_state(state: QuantumState, site: int,
                   tol: Optional[Tolerances] = None) -> QuantumState:
    """
    Reduced density operator ρ^(site) of one subsystem.

    Raises:
        SiteMismatch: If ``site`` is out of range.
    """
    state.check_site(site)
    dims = state.site_dims
    if state.is_pure:
        t = np.moveaxis(np.asarray(state.data).reshape(dims), site, 0)
        a = t.reshape(dims[site], -1)
        rho = a @ dagger(a)
    else:
        rho = partial_trace(state.data, dims, site)
    return QuantumState.density(0.5 * (rho + dagger(rho)), (dims[site],), tol)
