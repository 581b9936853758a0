"""Numeric tolerances used across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    """Single record of tolerances and floors.

    Attributes
    ----------
    unitarity_tol : float
        Allowed deviation of ``|xi|^2 - |eta|^2`` (or ``|F|^2 - |G|^2``) from 1.
    identity_tol : float
        Allowed residual of the barrier reciprocity identities.
    transmission_floor : float
        Smallest admissible ``|t|``; below it a barrier is treated as opaque.
    denominator_floor : float
        Smallest admissible denominator magnitude in the Mobius recursion.
    chebyshev_switch : float
        Width of the band ``|z -+ 1| <`` switch where the Chebyshev closed
        form is replaced by a recurrence.
    """

    unitarity_tol: float = 1e-9
    identity_tol: float = 1e-9
    transmission_floor: float = 1e-12
    denominator_floor: float = 1e-12
    chebyshev_switch: float = 1e-6


DEFAULT_POLICY = NumericPolicy()
