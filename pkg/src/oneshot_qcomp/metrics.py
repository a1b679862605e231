"""Distance and fidelity measures between sub-normalized states.

The trace distance here is the *unhalved* trace norm of the difference,
living in [0, 2], because every error budget downstream is expressed in
that convention.  The halved variant is exported under its own name so
call sites never silently mix the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ValidationError
from .qcore import DensityOperator, PureState, herm_part, hermitian_eig

__all__ = [
    "trace_norm",
    "trace_distance",
    "half_trace_distance",
    "fidelity",
    "purified_distance",
    "helstrom",
    "fvdg_sandwich",
    "DistanceReport",
    "distance_report",
]


def _mat(x) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.mat
    if isinstance(x, PureState):
        return np.outer(x.vec, x.vec.conj())
    return np.asarray(x, dtype=complex)


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values of a square matrix."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"trace norm needs a square matrix, got {m.shape}")
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(rho, sigma) -> float:
    """Unhalved trace distance ``|| rho - sigma ||_1`` in [0, 2]."""
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    return trace_norm(a - b)


def half_trace_distance(rho, sigma) -> float:
    """The [0, 1] normalization of the trace distance."""
    return 0.5 * trace_distance(rho, sigma)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(herm_part(m))
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Fidelity of two sub-normalized states, in [0, 1].

    Includes the cross term sqrt((1 - Tr rho)(1 - Tr sigma)) so that
    sub-normalized inputs are scored on their full weight; for a pair of
    normalized states this reduces to the usual Tr sqrt(sqrt(rho) sigma
    sqrt(rho)).  Negative eigenvalues from round-off are clamped to zero
    before the square roots.
    """
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    ra = _sqrtm_psd(a)
    inner = ra @ b @ ra
    w = np.clip(np.linalg.eigvalsh(herm_part(inner)), 0.0, None)
    froot = float(np.sum(np.sqrt(w)))
    ta = max(0.0, 1.0 - float(np.real(np.trace(a))))
    tb = max(0.0, 1.0 - float(np.real(np.trace(b))))
    return min(1.0, froot + math.sqrt(ta * tb))


def purified_distance(rho, sigma) -> float:
    """sqrt(1 - F^2): a metric on sub-normalized states, in [0, 1]."""
    f = fidelity(rho, sigma)
    return math.sqrt(max(0.0, 1.0 - f * f))


def helstrom(rho, sigma) -> tuple[float, np.ndarray]:
    """Optimal two-outcome discrimination of two normalized states.

    Returns ``(value, optimal_m)`` where ``value = || rho - sigma ||_1``
    and ``optimal_m`` projects onto the nonnegative eigenspace of
    ``rho - sigma``, so that ``2 |Tr(M rho) - Tr(M sigma)| = value``.
    """
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    w, v = hermitian_eig(a - b)
    value = float(np.sum(np.abs(w)))
    cols = v[:, w >= 0.0]
    optimal_m = cols @ cols.conj().T
    return value, optimal_m


def fvdg_sandwich(rho, sigma) -> tuple[float, float, float, bool]:
    """Two-sided bracket of the halved trace distance by fidelity terms.

    Returns ``(lower, mid, upper, holds)`` with
    ``lower = 1 - sqrt(1 - P^2)``, ``mid`` the halved trace distance,
    ``upper = P`` the purified distance; ``holds`` allows numerical
    slack of 1e-9 on each side.
    """
    p = purified_distance(rho, sigma)
    lower = 1.0 - math.sqrt(max(0.0, 1.0 - p * p))
    mid = half_trace_distance(rho, sigma)
    holds = (lower <= mid + 1e-9) and (mid <= p + 1e-9)
    return lower, mid, p, holds


@dataclass(frozen=True)
class DistanceReport:
    """Bundle of the three pairwise measures for one pair of states."""

    trace_distance: float
    fidelity: float
    purified_distance: float

    def __post_init__(self):
        expect = math.sqrt(max(0.0, 1.0 - self.fidelity**2))
        if abs(self.purified_distance - expect) > 1e-10:
            raise ValidationError(
                f"purified distance {self.purified_distance!r} inconsistent "
                f"with fidelity {self.fidelity!r}"
            )

    def to_json(self) -> dict:
        return {
            "trace_distance": self.trace_distance,
            "fidelity": self.fidelity,
            "purified_distance": self.purified_distance,
        }


def distance_report(rho, sigma) -> DistanceReport:
    return DistanceReport(
        trace_distance=trace_distance(rho, sigma),
        fidelity=fidelity(rho, sigma),
        purified_distance=purified_distance(rho, sigma),
    )
