"""
Dense complex linear algebra on finite-dimensional Hilbert spaces.

Vectors and operators are plain ``numpy`` arrays of dtype ``complex128``
(1-D for state vectors, 2-D for operators). This module provides the
spectral decomposition into (eigenvalue, projector) pairs with clustering of
numerically degenerate eigenvalues, Kronecker tensor products, partial traces
over any subset of sites, and a few random generators used by tests.

Example:
    >>> import numpy as np
    >>> from dual_update.hilbert import spectral_decompose
    >>> sd = spectral_decompose(np.diag([1.0, 1.0, 2.0]))
    >>> sd.eigenvalues
    [1.0, 2.0]
"""

import logging
from functools import reduce
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    IterationFailure,
    NotHermitian,
    UnknownOutcome,
)
from .tolerances import MAX_COMPOSITE_DIM, MAX_SITE_DIM, Tolerances, resolve

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence]


def as_vector(entries: ArrayLike) -> np.ndarray:
    """
    Coerce entries into a 1-D complex vector.

    Raises:
        DimensionMismatch: If the input is not one-dimensional or is empty.
    """
    v = np.asarray(entries, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"Expected a non-empty 1-D vector, got shape {v.shape}")
    return v


def as_matrix(entries: ArrayLike, square: bool = True) -> np.ndarray:
    """
    Coerce entries into a 2-D complex matrix.

    Args:
        entries: Nested sequence or array.
        square: Require rows == cols.

    Raises:
        DimensionMismatch: If the input is not a (square) 2-D array.
    """
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"Expected a non-empty 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {m.shape}")
    return m


def check_dimension(dim: int, site: bool = False) -> None:
    """Reject dimensions above the desk-scale caps."""
    cap = MAX_SITE_DIM if site else MAX_COMPOSITE_DIM
    if dim < 1:
        raise DimensionMismatch(f"Dimension must be positive, got {dim}")
    if dim > cap:
        kind = "site" if site else "composite"
        raise DimensionTooLarge(f"{kind} dimension {dim} exceeds cap {cap}")


def max_abs(m: np.ndarray) -> float:
    """Largest absolute entry (the entrywise sup-norm)."""
    return float(np.max(np.abs(m))) if m.size else 0.0


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(m).T


def is_hermitian(m: np.ndarray, tol: Optional[Tolerances] = None) -> bool:
    """True iff max|M - M†| <= HERM_TOL."""
    t = resolve(tol)
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return max_abs(m - dagger(m)) <= t.HERM_TOL


def is_projector(m: np.ndarray, tol: Optional[Tolerances] = None) -> bool:
    """True iff M is Hermitian and max|M² - M| <= PROJ_TOL."""
    t = resolve(tol)
    return is_hermitian(m, t) and max_abs(m @ m - m) <= t.PROJ_TOL


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """[A, B] = AB - BA."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"Cannot commute shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def outer(v: np.ndarray) -> np.ndarray:
    """|v⟩⟨v|."""
    v = as_vector(v)
    return np.outer(v, np.conj(v))


def orthonormalize(columns: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) for the span of the given columns."""
    q, r = np.linalg.qr(columns)
    keep = np.abs(np.diag(r)) > 1e-12
    return q[:, keep]


def nearest_index(values: Sequence[float], outcome: float,
                  tol: Optional[Tolerances] = None) -> int:
    """
    Index of the value nearest to ``outcome``.

    Raises:
        UnknownOutcome: If the nearest value is farther than the cluster
            tolerance for the scale of ``values``.
    """
    t = resolve(tol)
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise UnknownOutcome(f"Outcome {outcome!r} requested from an empty spectrum")
    idx = int(np.argmin(np.abs(arr - outcome)))
    if abs(arr[idx] - outcome) > t.cluster_tol(float(np.max(np.abs(arr)))):
        raise UnknownOutcome(f"Outcome {outcome!r} is not in the spectrum {list(arr)}")
    return idx


class SpectralDecomposition:
    """
    Spectral decomposition Â = Σ_x x·Ê(x) of a Hermitian matrix.

    Eigenvalues are strictly increasing; each carries the orthogonal projector
    onto its (possibly degenerate) eigenspace.

    Attributes:
        pairs (List[Tuple[float, np.ndarray]]): (eigenvalue, projector) pairs.
        source_dim (int): Dimension of the decomposed matrix.
    """

    def __init__(self, pairs: List[Tuple[float, np.ndarray]], source_dim: int):
        self.pairs = [(float(x), np.asarray(e, dtype=complex)) for x, e in pairs]
        self.source_dim = source_dim

    @property
    def eigenvalues(self) -> List[float]:
        return [x for x, _ in self.pairs]

    @property
    def projectors(self) -> List[np.ndarray]:
        return [e for _, e in self.pairs]

    @property
    def ranks(self) -> List[int]:
        """Eigenspace dimensions, i.e. the traces of the projectors."""
        return [int(round(np.trace(e).real)) for _, e in self.pairs]

    def is_nondegenerate(self) -> bool:
        return all(r == 1 for r in self.ranks)

    def index_of(self, outcome: float, tol: Optional[Tolerances] = None) -> int:
        """
        Index of the eigenvalue matching ``outcome``.

        The nearest eigenvalue is taken; it must lie within the cluster
        tolerance of the spectrum.

        Raises:
            UnknownOutcome: If no eigenvalue is close enough.
        """
        return nearest_index(self.eigenvalues, outcome, tol)

    def projector_for(self, outcome: float, tol: Optional[Tolerances] = None) -> np.ndarray:
        """Projector Ê(x) for the eigenvalue matching ``outcome``."""
        return self.pairs[self.index_of(outcome, tol)][1]

    def apply(self, fn: Callable[[float], float]) -> np.ndarray:
        """Functional calculus: f(Â) = Σ_x f(x)·Ê(x)."""
        out = np.zeros((self.source_dim, self.source_dim), dtype=complex)
        for x, e in self.pairs:
            out += fn(x) * e
        return out

    def reconstruct(self) -> np.ndarray:
        """Σ_x x·Ê(x)."""
        return self.apply(lambda x: x)

    def check(self, original: Optional[np.ndarray] = None,
              tol: Optional[Tolerances] = None) -> List[str]:
        """
        List every violated invariant (empty when the decomposition is sound).

        Checks strict ordering, projector idempotence, mutual orthogonality,
        completeness and, when ``original`` is given, reconstruction.
        """
        t = resolve(tol)
        problems = []
        values = self.eigenvalues
        if any(b <= a for a, b in zip(values, values[1:])):
            problems.append("eigenvalues not strictly increasing")
        for i, (x, e) in enumerate(self.pairs):
            if not is_projector(e, t):
                problems.append(f"pair {i} ({x}) is not a projector")
            for j in range(i + 1, len(self.pairs)):
                if max_abs(e @ self.pairs[j][1]) > t.PROJ_TOL:
                    problems.append(f"projectors {i} and {j} not orthogonal")
        total = sum(self.projectors, np.zeros((self.source_dim, self.source_dim)))
        if max_abs(total - np.eye(self.source_dim)) > t.PROJ_TOL:
            problems.append("projectors do not sum to identity")
        if original is not None and max_abs(self.reconstruct() - original) > t.SPEC_TOL:
            problems.append("reconstruction differs from original")
        return problems

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Tuple[float, np.ndarray]]:
        return iter(self.pairs)

    def __repr__(self) -> str:
        return (f"SpectralDecomposition(eigenvalues={self.eigenvalues}, "
                f"ranks={self.ranks})")


def _cluster(values: np.ndarray, width: float) -> List[List[int]]:
    """Group sorted values; a group spans at most ``width`` from its first member."""
    groups: List[List[int]] = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][0]] <= width:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def spectral_decompose(m: ArrayLike, tol: Optional[Tolerances] = None) -> SpectralDecomposition:
    """
    Decompose a Hermitian matrix into eigenvalue/projector pairs.

    Eigenvalues within ``CLUSTER_REL_TOL * (1 + max|eigenvalue|)`` of the first
    member of their group are merged into one degenerate eigenspace, whose
    eigenvalue is the group mean and whose projector is built from the
    re-orthonormalized eigenvectors of the group.

    Args:
        m: Hermitian matrix.
        tol: Tolerance overrides.

    Returns:
        SpectralDecomposition: Pairs ordered by increasing eigenvalue.

    Raises:
        NotHermitian: If max|M - M†| > HERM_TOL.
        IterationFailure: If the eigen-solver does not converge.
        DimensionTooLarge: If the matrix exceeds the composite cap.
    """
    t = resolve(tol)
    m = as_matrix(m)
    dim = m.shape[0]
    check_dimension(dim)
    if not is_hermitian(m, t):
        raise NotHermitian(f"Matrix is not Hermitian (max|M-M†|={max_abs(m - dagger(m)):.3e})")

    hermitian = 0.5 * (m + dagger(m))
    try:
        w, v = np.linalg.eigh(hermitian)
    except np.linalg.LinAlgError as e:
        raise IterationFailure(f"Eigen-solver did not converge: {e}") from e

    width = t.cluster_tol(float(np.max(np.abs(w))))
    pairs = []
    for group in _cluster(w, width):
        basis = orthonormalize(v[:, group])
        projector = basis @ dagger(basis)
        projector = 0.5 * (projector + dagger(projector))
        pairs.append((float(np.mean(w[group])), projector))

    logger.debug(f"Decomposed {dim}x{dim} matrix into {len(pairs)} eigenspaces")
    return SpectralDecomposition(pairs, dim)


def tensor_product(a: ArrayLike, b: ArrayLike, *more: ArrayLike) -> np.ndarray:
    """
    Kronecker product of vectors (or of matrices).

    For vectors ``(a⊗b)[i*dim_b + k] = a[i]*b[k]``; for matrices the Kronecker
    block layout. More than two factors associate to the left.

    Raises:
        DimensionMismatch: If the factors mix vectors and matrices.
    """
    factors = [np.asarray(x, dtype=complex) for x in (a, b) + more]
    kinds = {f.ndim for f in factors}
    if len(kinds) != 1 or kinds.pop() not in (1, 2):
        raise DimensionMismatch("Tensor factors must all be vectors or all be matrices")
    return reduce(np.kron, factors)


def _keep_tuple(keep: Union[int, Sequence[int]], n_sites: int) -> Tuple[int, ...]:
    kept = (keep,) if isinstance(keep, (int, np.integer)) else tuple(keep)
    if not kept or any(k < 0 or k >= n_sites for k in kept) or len(set(kept)) != len(kept):
        raise DimensionMismatch(f"Invalid kept sites {keep!r} for {n_sites} sites")
    return tuple(sorted(int(k) for k in kept))


def partial_trace(rho: ArrayLike, dims: Sequence[int],
                  keep: Union[int, Sequence[int]]) -> np.ndarray:
    """
    Trace out every site not listed in ``keep``.

    Sites are indexed from 0. ``dims`` lists the site dimensions in tensor
    order, so ``partial_trace(rho, (d1, d2), 1)`` returns Tr_{H1} ρ.

    Args:
        rho: Operator on H_1⊗…⊗H_n.
        dims: Site dimensions.
        keep: Index or indices of the sites to keep.

    Returns:
        np.ndarray: Reduced operator on the kept sites.

    Raises:
        DimensionMismatch: If prod(dims) does not match rho.
    """
    rho = as_matrix(rho)
    dims = tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    if total != rho.shape[0]:
        raise DimensionMismatch(f"Site dims {dims} do not factor dimension {rho.shape[0]}")
    kept = _keep_tuple(keep, len(dims))

    n = len(dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise DimensionMismatch(f"Too many sites for partial trace: {n}")
    rows = list(letters[:n])
    cols = [rows[i] if i not in kept else letters[n + i] for i in range(n)]
    out = "".join(rows[i] for i in kept) + "".join(cols[i] for i in kept)
    subscripts = f"{''.join(rows)}{''.join(cols)}->{out}"

    reduced = np.einsum(subscripts, rho.reshape(dims + dims))
    d_keep = int(np.prod([dims[i] for i in kept]))
    return reduced.reshape(d_keep, d_keep)


def lift_to_site(op: ArrayLike, site_dims: Sequence[int], site: int) -> np.ndarray:
    """
    Embed a site operator as I⊗…⊗op⊗…⊗I.

    Raises:
        DimensionMismatch: If op does not match ``site_dims[site]``.
    """
    op = as_matrix(op)
    if not 0 <= site < len(site_dims):
        raise DimensionMismatch(f"Site {site} out of range for {len(site_dims)} sites")
    if op.shape[0] != site_dims[site]:
        raise DimensionMismatch(
            f"Operator of dimension {op.shape[0]} does not act on site {site} "
            f"of dimension {site_dims[site]}"
        )
    factors = [op if i == site else np.eye(d, dtype=complex) for i, d in enumerate(site_dims)]
    if len(factors) == 1:
        return factors[0]
    return tensor_product(*factors)


def _apply_on_axis(t: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, t, axes=([1], [axis])), 0, axis)


def apply_local(target: np.ndarray, op: np.ndarray, site_dims: Sequence[int],
                site: int) -> np.ndarray:
    """
    Apply a site operator without building the lifted matrix.

    For a vector returns (I⊗…⊗op⊗…⊗I)|ψ⟩; for an operator ρ returns
    (I⊗op⊗I) ρ (I⊗op⊗I)†.
    """
    dims = tuple(site_dims)
    n = len(dims)
    if not 0 <= site < n:
        raise DimensionMismatch(f"Site {site} out of range for {n} sites")
    if op.shape != (dims[site], dims[site]):
        raise DimensionMismatch(
            f"Operator of shape {op.shape} does not act on site {site} of dimension {dims[site]}"
        )
    total = int(np.prod(dims))
    if target.ndim == 1:
        t = _apply_on_axis(target.reshape(dims), op, site)
        return t.reshape(total)
    t = target.reshape(dims + dims)
    t = _apply_on_axis(t, op, site)
    t = _apply_on_axis(t, np.conj(op), n + site)
    return t.reshape(total, total)


def trace_distance(rho: ArrayLike, sigma: ArrayLike) -> float:
    """½‖ρ − σ‖₁ for Hermitian operators."""
    diff = as_matrix(rho) - as_matrix(sigma)
    diff = 0.5 * (diff + dagger(diff))
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix with standard complex Gaussian entries."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + dagger(g))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via phase-corrected QR."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_density(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Random density operator of the given rank (full rank by default)."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real
