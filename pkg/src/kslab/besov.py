"""Besov-body norms, maxiset parameter arithmetic, and scale splits.

The bodies are sup-type: membership of a coefficient field in B(s, P0) means
sup over scales k of 2**((s+1/2)k) * max_i |theta_{ki}| <= P0 (non-strict).
The finite-band sets used at the n**(-1/2) rate use a strict sup-norm bound
instead, matching their defining displays.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coefficients import CoefficientField
from .errors import DomainError
from .wavelets import critical_scale


@dataclass(frozen=True)
class BesovBody:
    """Smoothness/radius pair (s, P0), both strictly positive."""

    smoothness: float
    radius: float

    def __post_init__(self):
        if self.smoothness <= 0.0:
            raise DomainError(f"smoothness must be > 0, got {self.smoothness}")
        if self.radius <= 0.0:
            raise DomainError(f"radius must be > 0, got {self.radius}")

    def contains(self, coeffs: CoefficientField) -> bool:
        return besov_norm(coeffs, self.smoothness) <= self.radius


@dataclass(frozen=True)
class FiniteBand:
    """Scale-bounded set with a strict sup-norm radius (the r = 1/2 regime)."""

    max_scale: int
    radius: float

    def __post_init__(self):
        if self.max_scale < 1:
            raise DomainError(f"max_scale must be >= 1, got {self.max_scale}")
        if self.radius <= 0.0:
            raise DomainError(f"radius must be > 0, got {self.radius}")

    def contains(self, coeffs: CoefficientField) -> bool:
        return finite_band_membership(coeffs, self.max_scale, self.radius)


def besov_norm(coeffs: CoefficientField, s: float) -> float:
    """sup over active scales k of 2**((s+1/2)k) * max_i |theta_{ki}|."""
    if s <= 0.0:
        raise DomainError(f"s must be > 0, got {s}")
    per_scale = coeffs.scale_max_abs()
    if not per_scale:
        return 0.0
    return max(2.0 ** ((s + 0.5) * k) * v for k, v in per_scale.items())


def maxiset_smoothness(r: float) -> float:
    """Smoothness s = 2r/(1 - 2r) of the maxiset body at detection rate r."""
    if not 0.0 < r < 0.5:
        if r == 0.5:
            raise DomainError(
                "r = 1/2 has no Besov maxiset; use FiniteBand sets instead"
            )
        raise DomainError(f"r must lie strictly in (0, 1/2), got {r}")
    return 2.0 * r / (1.0 - 2.0 * r)


def maxiset_rate(s: float) -> float:
    """Inverse of :func:`maxiset_smoothness`: r = s/(2 + 2s)."""
    if s <= 0.0:
        raise DomainError(f"s must be > 0, got {s}")
    return s / (2.0 + 2.0 * s)


def orientation(a: CoefficientField, b: CoefficientField) -> bool:
    """True iff theta_a * theta_b >= 0 on every index of the union support."""
    for idx in set(a) | set(b):
        if a.get(idx, 0.0) * b.get(idx, 0.0) < 0.0:
            return False
    return True


def truncate_decompose(
    coeffs: CoefficientField, n: int, r: float, C: int
) -> tuple[CoefficientField, CoefficientField]:
    """(head, tail): scales <= critical_scale(n, r) + C and the remainder.

    The split is exact (head + tail = coeffs entry by entry), and head/tail
    have disjoint supports, so they trivially share orientation.
    """
    if C < 0:
        raise DomainError(f"C must be >= 0, got {C}")
    cut = critical_scale(n, r) + int(C)
    head = coeffs.restrict(lambda s: s <= cut)
    tail = coeffs.restrict(lambda s: s > cut)
    return head, tail


def finite_band_membership(coeffs: CoefficientField, m: int, P0: float) -> bool:
    """All active scales <= m and exact sup norm of the reconstruction < P0."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    if P0 <= 0.0:
        raise DomainError(f"P0 must be > 0, got {P0}")
    if coeffs.max_scale > m:
        return False
    return coeffs.sup_norm() < P0


def haar_coefficient_bound(sup_norm_f: float, scale: int) -> float:
    """Bound |theta_{ji}| <= 2 * ||f||_inf * 2**(-j/2) used by the scale-split
    radius estimate (the Haar-exact constant is 1; 2 keeps slack)."""
    return 2.0 * sup_norm_f * 2.0 ** (-scale / 2.0)


def split_radius_bound(A: float, C: int, s: float) -> float:
    """Radius P0(A, C) = A * 2**((s+1/2)C + 1) covering any field with
    active scales <= critical_scale + C and sup norm <= A * n**(-r)."""
    return A * 2.0 ** ((s + 0.5) * C + 1.0)
