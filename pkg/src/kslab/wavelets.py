"""Orthonormal Haar system on [0,1] and its antiderivatives.

Scale ``j >= 1`` carries ``2**j`` positions; the function at index (j, i) is
``2**(j/2) * H(2**j x - (i - 1))`` where H is +1 on [0, 1/2), -1 on [1/2, 1)
and 0 elsewhere.  Everything here is evaluated in closed form on dyadic
pieces; no quadrature is used anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

MAX_SCALE = 20  # dyadic breakpoints stay exact doubles well past this


@dataclass(frozen=True, order=True)
class WaveletIndex:
    """Scale/position pair with 1 <= position <= 2**scale."""

    scale: int
    position: int

    def __post_init__(self):
        if not isinstance(self.scale, (int, np.integer)) or self.scale < 1:
            raise DomainError(f"scale must be an integer >= 1, got {self.scale!r}")
        if self.scale > MAX_SCALE:
            raise DomainError(f"scale {self.scale} exceeds supported maximum {MAX_SCALE}")
        if not isinstance(self.position, (int, np.integer)):
            raise DomainError(f"position must be an integer, got {self.position!r}")
        if not 1 <= self.position <= 2**self.scale:
            raise DomainError(
                f"position {self.position} out of range [1, 2**{self.scale}]"
            )

    @property
    def support(self) -> tuple[float, float]:
        width = 2.0 ** (-self.scale)
        lo = (self.position - 1) * width
        return (lo, lo + width)

    @property
    def midpoint(self) -> float:
        lo, hi = self.support
        return lo + (hi - lo) / 2.0


def haar_mother(t: float) -> float:
    """The unnormalized mother function: +1 on [0,1/2), -1 on [1/2,1)."""
    if 0.0 <= t < 0.5:
        return 1.0
    if 0.5 <= t < 1.0:
        return -1.0
    return 0.0


@dataclass(frozen=True)
class MotherWavelet:
    """Mother wavelet descriptor (only the Haar kind is provided).

    ``center_moment`` is the first moment about the support midpoint,
    i.e. the integral of ``t * evaluator(t + (a1 + a2)/2)`` over the
    centered support.  Haar does *not* annihilate this moment (the value
    is -1/4); smooth wavelet families would.  The flag is surfaced so
    downstream classifiers can report the limitation.
    """

    kind: str = "haar"
    support: tuple[float, float] = (0.0, 1.0)

    def __call__(self, t: float) -> float:
        return haar_mother(t)

    def integral(self) -> float:
        # exact: the two half cells cancel
        return 0.5 * 1.0 + 0.5 * (-1.0)

    def square_integral(self) -> float:
        return 0.5 * 1.0 + 0.5 * 1.0

    def center_moment(self) -> float:
        # integral of t*H(t + 1/2) over [-1/2, 1/2]: two quarter-squares,
        # both negative in exact arithmetic
        return -0.125 - 0.125

    @property
    def satisfies_moment_condition(self) -> bool:
        return self.center_moment() == 0.0


HAAR = MotherWavelet()


def _check_x(x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    return x


def eval_phi(idx: WaveletIndex, x: float) -> float:
    """Value of the L2-normalized Haar wavelet at ``x``.

    Returns ``2**(j/2) * H(2**j x - (i-1))``; the magnitude is either 0 or
    ``2**(j/2)``.
    """
    x = _check_x(x)
    amp = 2.0 ** (idx.scale / 2.0)
    return amp * haar_mother(2.0**idx.scale * x - (idx.position - 1))


def eval_psi(idx: WaveletIndex, x: float) -> float:
    """Running integral of :func:`eval_phi` from 0 to ``x``.

    Piecewise linear: a symmetric triangle over the support cell with peak
    ``2**(-j/2) / 2`` at the cell midpoint, zero outside.
    """
    x = _check_x(x)
    lo, hi = idx.support
    if x <= lo or x >= hi:
        return 0.0
    amp = 2.0 ** (idx.scale / 2.0)
    mid = idx.midpoint
    if x <= mid:
        return amp * (x - lo)
    return amp * (hi - x)


def psi_values(idx: WaveletIndex, x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`eval_psi` (no per-point domain checks)."""
    x = np.asarray(x, dtype=float)
    lo, hi = idx.support
    amp = 2.0 ** (idx.scale / 2.0)
    rising = amp * (x - lo)
    falling = amp * (hi - x)
    out = np.minimum(rising, falling)
    return np.where((x > lo) & (x < hi), out, 0.0)


def phi_values(idx: WaveletIndex, x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`eval_phi` (no per-point domain checks)."""
    x = np.asarray(x, dtype=float)
    lo, hi = idx.support
    amp = 2.0 ** (idx.scale / 2.0)
    mid = idx.midpoint
    out = np.zeros_like(x)
    out[(x >= lo) & (x < mid)] = amp
    out[(x >= mid) & (x < hi)] = -amp
    return out


def psi_sup_norm(scale: int) -> float:
    """Exact sup norm of eval_psi at the given scale: 2**(-j/2) / 2."""
    return 2.0 ** (-scale / 2.0) / 2.0


def _overlap_inner_product(a: WaveletIndex, b: WaveletIndex) -> float:
    """<phi_a, phi_b> by exact piecewise integration on the finer half cells.

    Any two dyadic cells are nested or disjoint, so the coarser wavelet is
    constant on each half cell of the finer one; the integral reduces to two
    closed-form terms.
    """
    if a.scale > b.scale:
        a, b = b, a
    lo, hi = b.support
    mid = b.midpoint
    width = mid - lo
    amp_b = 2.0 ** (b.scale / 2.0)
    # evaluate at half-cell midpoints: both functions are constant there
    m1 = lo + width / 2.0
    m2 = mid + width / 2.0
    va1 = eval_phi(a, m1)
    va2 = eval_phi(a, m2)
    return va1 * amp_b * width + va2 * (-amp_b) * width


def all_indices(max_scale: int):
    for j in range(1, max_scale + 1):
        for i in range(1, 2**j + 1):
            yield WaveletIndex(j, i)


def gram_check(max_scale: int) -> float:
    """Max over index pairs up to ``max_scale`` of |<phi_a, phi_b> - delta_ab|.

    Disjoint supports integrate to exactly zero, so only nested pairs are
    evaluated; for the Haar system the result is 0 up to floating-point
    cancellation (which is itself exact here).
    """
    if not isinstance(max_scale, (int, np.integer)) or not 1 <= max_scale <= 12:
        raise DomainError(f"max_scale must be an integer in [1, 12], got {max_scale!r}")
    worst = 0.0
    for fine in all_indices(max_scale):
        # same index: exact squared norm
        worst = max(worst, abs(_overlap_inner_product(fine, fine) - 1.0))
        # distinct pairs overlap only when cells are nested, i.e. one index is
        # the other's dyadic ancestor; all remaining pairs integrate to an
        # exact 0 and cannot move the max
        for jc in range(1, fine.scale):
            pos = (fine.position - 1) // 2 ** (fine.scale - jc) + 1
            worst = max(worst, abs(_overlap_inner_product(WaveletIndex(jc, pos), fine)))
    return worst


def critical_scale(n: int, r: float) -> int:
    """Critical detection scale: floor((1/2 - r) * log2(n)).

    The base-2 logarithm is forced by the dyadic scale arithmetic of the
    surrounding theory (2**scale must track n**(1/2 - r)).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not 0.0 < r <= 0.5:
        raise DomainError(f"r must lie in (0, 1/2], got {r}")
    return int(math.floor((0.5 - r) * math.log2(n) + 1e-12))
