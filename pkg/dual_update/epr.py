"""
The two-photon polarization scenario: a source emits photon pairs in the
state (|xx⟩ + |yy⟩)/√2 and two polarizers at orientations a and b each
report + or −.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .errors import SiteMismatch
from .quantum_algebra import joint_distribution
from .quantum_state import Observable, QuantumState, bipartite_luders_update, epr_state, product_state

logger = logging.getLogger(__name__)

PLUS = 1.0
MINUS = -1.0
SITE_NAMES = ("I", "II")


def polarization_vector(angle: float) -> np.ndarray:
    """|a⟩ = cos a |x⟩ + sin a |y⟩."""
    return np.array([np.cos(angle), np.sin(angle)], dtype=complex)


def polarizer_observable(angle: float, label: str = "") -> Observable:
    """
    Polarizer at orientation ``angle`` (radians): +1 on |a⟩, −1 on its complement.

    Returns:
        Observable: 2|a⟩⟨a| − I.
    """
    v = polarization_vector(angle)
    passed = np.outer(v, np.conj(v))
    return Observable.from_spectrum([(MINUS, np.eye(2) - passed), (PLUS, passed)],
                                    label=label or f"P({angle:.6g})")


@dataclass(frozen=True)
class EPRScenario:
    """
    Two polarizers measuring a photon pair.

    Attributes:
        state: Two-site pure state of the pair.
        angle_a: Orientation of polarizer I (radians).
        angle_b: Orientation of polarizer II (radians).
    """

    state: QuantumState = field(default_factory=epr_state)
    angle_a: float = 0.0
    angle_b: float = 0.0

    def __post_init__(self):
        if not self.state.is_pure or self.state.site_dims != (2, 2):
            raise SiteMismatch("The photon-pair scenario needs a pure state on two qubits")

    @classmethod
    def standard(cls, angle_a: float, angle_b: float) -> "EPRScenario":
        return cls(epr_state(), angle_a, angle_b)

    @property
    def polarizer_a(self) -> Observable:
        return polarizer_observable(self.angle_a, label="a")

    @property
    def polarizer_b(self) -> Observable:
        return polarizer_observable(self.angle_b, label="b")


def epr_joint_probabilities(scn: EPRScenario) -> Dict[Tuple[float, float], float]:
    """
    p_±±(a, b) for the scenario, from the joint Born table.

    Returns:
        Dict[Tuple[float, float], float]: Keys (x, y) with x, y in {+1, −1}.
    """
    table = joint_distribution(scn.state, scn.polarizer_a, scn.polarizer_b, sites=(0, 1))
    probs = {(x, y): p for x, y, p in table.entries()}
    logger.debug(f"p++={probs[(PLUS, PLUS)]:.12g} at a-b={scn.angle_a - scn.angle_b:.6g}")
    return probs


def projected_state(scn: EPRScenario, outcome: float = PLUS, site: int = 0) -> QuantumState:
    """State of the pair after polarizer ``site`` reports ``outcome``."""
    obs = scn.polarizer_a if site == 0 else scn.polarizer_b
    return bipartite_luders_update(scn.state, obs, outcome, site=site)


def aligned_pair(angle: float) -> QuantumState:
    """|a, a⟩, both photons polarized along ``angle``."""
    v = polarization_vector(angle)
    return product_state(v, v)
