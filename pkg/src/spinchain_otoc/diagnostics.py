"""Structure diagnostics behind the saturation method: operator-ansatz matrix
elements, participation ratio, ground-state fluctuations, and the
degeneracy-lifting period."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .spectral import EigenSystem, OperatorMatrix

# The ansatz itself is qualitative (">>" / "<<").  An ordered verdict demands
# an O(1) squared element dominating cross-set elements by well over a decade;
# quasi-long-range transverse elements (|W|^2 ~ 0.2 at N=13) fall below the
# floor, as they should: they cannot certify long-range order.
RATIO_THRESHOLD = 50.0
ABS_THRESHOLD = 0.3


class AnsatzVerdict(str, Enum):
    ORDERED_LIKE = "ordered_like"
    DISORDERED_LIKE = "disordered_like"
    INCONCLUSIVE = "inconclusive"


@dataclass
class AnsatzReport:
    """Squared matrix elements of W seen from the ground set, per set."""

    intra_ground_max: float  # max |W_{[1,a][1,b]}|^2
    cross_set_max: float  # max over theta != 1 of |W_{[1,a][theta,b]}|^2
    diag_profile: np.ndarray  # (n_ground, n_sets) max |W|^2 per set
    verdict: AnsatzVerdict


def ansatz_report(operator: OperatorMatrix, es: EigenSystem) -> AnsatzReport:
    """Classify the operator as order-parameter-like on the ground set."""
    partition = es.partition
    ground = partition.indices(0)
    n_sets = partition.n_sets
    profile = np.zeros((len(ground), n_sets))
    for row, g in enumerate(ground):
        full_row = np.abs(
            operator.subblock(np.array([g]), np.arange(es.dimension))[0]
        ) ** 2
        profile[row] = np.maximum.reduceat(full_row, partition.offsets[:-1])
    intra = float(profile[:, 0].max())
    cross = float(profile[:, 1:].max()) if n_sets > 1 else 0.0
    if intra >= ABS_THRESHOLD and intra >= RATIO_THRESHOLD * cross:
        verdict = AnsatzVerdict.ORDERED_LIKE
    elif intra <= ABS_THRESHOLD:
        verdict = AnsatzVerdict.DISORDERED_LIKE
    else:
        verdict = AnsatzVerdict.INCONCLUSIVE
    return AnsatzReport(
        intra_ground_max=intra,
        cross_set_max=cross,
        diag_profile=profile,
        verdict=verdict,
    )


def participation_ratio(amplitudes: np.ndarray) -> float:
    """PR = 1 / sum_n |psi_n|^4 for a normalized state in a reference basis."""
    weights = np.abs(amplitudes) ** 2
    total = weights.sum()
    if total < 1e-12:
        raise DomainError("cannot compute participation ratio of a zero state")
    weights = weights / total
    return float(1.0 / np.sum(weights**2))


def ground_state_participation(es: EigenSystem) -> float:
    """PR of the selected ground member in the spin configuration basis."""
    g = es.ground_member_index()
    return participation_ratio(es.eigenvector_config(g))


def ground_fluctuation(es: EigenSystem, site: int) -> float:
    """(Delta sigma_z_site)^2 = 1 - <sigma_z_site>^2 over the selected ground member."""
    if site < 0 or site >= es.chain.n_sites:
        raise DomainError(f"site {site} out of range")
    g = es.ground_member_index()
    amplitudes = es.eigenvector_config(g)
    z = (((np.arange(es.chain.dimension) >> site) & 1) * 2 - 1).astype(np.float64)
    expect = float(np.sum(np.abs(amplitudes) ** 2 * z))
    return 1.0 - expect**2


def degeneracy_lifting_period(es: EigenSystem) -> float:
    """tau = pi / (E_2 - E_1); infinite when the two lowest levels are degenerate."""
    if es.dimension < 2:
        raise DomainError("spectrum has a single state; no splitting to measure")
    gap = float(es.energies[1] - es.energies[0])
    if gap < es.tol_deg:
        return math.inf
    return math.pi / gap
