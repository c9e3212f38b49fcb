"""
Numerical tolerances and size caps.

Module constants hold the documented defaults. Operations accept an optional
``tol: Tolerances`` keyword; ``None`` means ``DEFAULT_TOLERANCES``.
"""

from dataclasses import dataclass, fields, replace
from typing import Any, Mapping, Optional

HERM_TOL = 1e-10
PROJ_TOL = 1e-10
NORM_TOL = 1e-10
SPEC_TOL = 1e-9
# Eigenvalues closer than CLUSTER_REL_TOL * (1 + max|eigenvalue|) share a projector.
CLUSTER_REL_TOL = 1e-9
PSD_TOL = 1e-10
ZERO_PROB_TOL = 1e-12
SCHMIDT_TOL = 1e-12
COMMUTE_TOL = 1e-10
FEAS_TOL = 1e-9
SIGNALING_TOL = 1e-8
PROB_SUM_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12

MAX_SITE_DIM = 64
MAX_COMPOSITE_DIM = 4096
MAX_ATOMS = 4096

DEFAULT_SEED = 0x4A4E5553


@dataclass(frozen=True)
class Tolerances:
    """Bundle of every tolerance an operation may consult."""

    HERM_TOL: float = HERM_TOL
    PROJ_TOL: float = PROJ_TOL
    NORM_TOL: float = NORM_TOL
    SPEC_TOL: float = SPEC_TOL
    CLUSTER_REL_TOL: float = CLUSTER_REL_TOL
    PSD_TOL: float = PSD_TOL
    ZERO_PROB_TOL: float = ZERO_PROB_TOL
    SCHMIDT_TOL: float = SCHMIDT_TOL
    COMMUTE_TOL: float = COMMUTE_TOL
    FEAS_TOL: float = FEAS_TOL
    SIGNALING_TOL: float = SIGNALING_TOL
    PROB_SUM_TOL: float = PROB_SUM_TOL
    WEIGHT_SUM_TOL: float = WEIGHT_SUM_TOL

    def cluster_tol(self, max_abs_eigenvalue: float) -> float:
        """Absolute eigenvalue-merging distance for a spectrum of this scale."""
        return self.CLUSTER_REL_TOL * (1.0 + max_abs_eigenvalue)

    def with_overrides(self, overrides: Mapping[str, Any]) -> "Tolerances":
        """
        Return a copy with some tolerances replaced.

        Args:
            overrides: Mapping from tolerance name (e.g. ``"FEAS_TOL"``) to value.

        Returns:
            Tolerances: The updated copy.

        Raises:
            KeyError: If a name is not a known tolerance.
            ValueError: If a value is not a positive number.
        """
        known = {f.name for f in fields(self)}
        updates = {}
        for name, value in overrides.items():
            key = name.upper()
            if key not in known:
                raise KeyError(f"Unknown tolerance: {name}")
            number = float(value)
            if not number > 0.0:
                raise ValueError(f"Tolerance {key} must be positive, got {value!r}")
            updates[key] = number
        return replace(self, **updates)


DEFAULT_TOLERANCES = Tolerances()


def resolve(tol: Optional[Tolerances]) -> Tolerances:
    """Return ``tol`` or the defaults when it is ``None``."""
    return DEFAULT_TOLERANCES if tol is None else tol
