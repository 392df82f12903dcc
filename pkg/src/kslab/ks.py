"""Kolmogorov statistic, exact and asymptotic null laws, critical values.

The exact finite-sample law P(T <= t) under uniformity is computed with the
Durbin band-probability recursion in its matrix form: the no-crossing
constraints on the order statistics translate into powers of an
(2k-1)x(2k-1) lattice transition matrix, scaled to avoid overflow.  Above
``EXACT_N_LIMIT`` the asymptotic series takes over (recorded in the result
metadata of :func:`null_cdf_info`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import ks_stat_sorted
from .errors import CapacityError, DomainError

EXACT_N_LIMIT = 2000
_SCALE_HI = 1e140
_SCALE_LO = 1e-140


@dataclass(frozen=True)
class EmpiricalCdf:
    """Sorted sample on [0, 1] with order-statistic access."""

    sorted_values: np.ndarray
    n: int

    @classmethod
    def from_sample(cls, values) -> "EmpiricalCdf":
        arr = np.sort(np.asarray(values, dtype=float))
        if arr.size and (arr[0] < 0.0 or arr[-1] > 1.0):
            raise DomainError("sample values must lie in [0, 1]")
        return cls(sorted_values=arr, n=int(arr.size))

    def value_at(self, x: float) -> float:
        return float(np.searchsorted(self.sorted_values, x, side="right")) / self.n


@dataclass(frozen=True)
class TestDecision:
    """Outcome of a Kolmogorov test; reject holds iff statistic > critical."""

    statistic: float
    critical: float
    alpha: float
    reject: bool


def empirical_statistic(sample: EmpiricalCdf, e1: float = 0.0, e2: float = 1.0) -> float:
    """Exact sup over [e1, e2] of |F_hat(x) - x|.

    Evaluates both one-sided limits at every jump inside the interval plus
    the endpoints themselves, so the restricted statistic is exact.
    """
    if not 0.0 <= e1 < e2 <= 1.0:
        raise DomainError(f"need 0 <= e1 < e2 <= 1, got ({e1}, {e2})")
    if sample.n == 0:
        return max(abs(e1), abs(e2))  # F_hat == 0 everywhere
    return float(ks_stat_sorted(sample.sorted_values, e1, e2))


def kolmogorov_test(
    values, alpha: float, e1: float = 0.0, e2: float = 1.0
) -> TestDecision:
    """Run the (restricted) Kolmogorov test at level ``alpha``."""
    ecdf = EmpiricalCdf.from_sample(values)
    stat = empirical_statistic(ecdf, e1, e2)
    crit = critical_value(ecdf.n, alpha)
    return TestDecision(statistic=stat, critical=crit, alpha=alpha, reject=stat > crit)


# ---------------------------------------------------------------------------
# exact null law (Durbin band-probability matrix recursion)
# ---------------------------------------------------------------------------

def _band_matrix(k: int, h: float, m: int) -> np.ndarray:
    idx = np.arange(m)
    d = idx[:, None] - idx[None, :] + 1  # lattice offset i - j + 1
    H = (d >= 0).astype(float)
    H[:, 0] -= h ** (idx + 1.0)
    H[m - 1, :] -= h ** (m - idx.astype(float))
    if 2.0 * h - 1.0 > 0.0:
        H[m - 1, 0] += (2.0 * h - 1.0) ** m
    # divide by (i - j + 1)! where the offset is positive; factorials past
    # 170 overflow to inf and the quotient underflows to 0, matching the
    # iterative-division result in double precision
    fact = np.ones(m + 1)
    if m >= 1:
        with np.errstate(over="ignore"):
            fact[1:] = np.cumprod(np.arange(1.0, m + 1.0))
    pos = d > 0
    H[pos] = H[pos] / fact[d[pos]]
    return H


def _scaled_power(H: np.ndarray, n: int, probe: int) -> tuple[np.ndarray, int]:
    """H**n by binary exponentiation, rescaling to dodge overflow.

    Returns (matrix, e) with the true power equal to matrix * 10**e; the
    ``probe`` diagonal entry triggers rescaling.
    """
    result = None
    e_res = 0
    base = H
    e_base = 0
    while n:
        if n & 1:
            result = base.copy() if result is None else result @ base
            e_res += e_base
            if result[probe, probe] > _SCALE_HI:
                result *= _SCALE_LO
                e_res += 140
        n >>= 1
        if n:
            base = base @ base
            e_base *= 2
            if base[probe, probe] > _SCALE_HI:
                base = base * _SCALE_LO
                e_base += 140
    return result, e_res


@lru_cache(maxsize=8192)
def _exact_cdf_impl(n: int, t: float) -> float:
    nt = n * t
    if nt <= 0.5:
        return 0.0
    if t >= 1.0:
        return 1.0
    k = int(math.ceil(nt))
    h = k - nt
    m = 2 * k - 1
    H = _band_matrix(k, h, m)
    Q, e = _scaled_power(H, n, k - 1)
    s = Q[k - 1, k - 1]
    for i in range(1, n + 1):
        s *= i / n
        if s < _SCALE_LO:
            s *= _SCALE_HI
            e -= 140
    p = s * 10.0**e if e else s
    return min(max(p, 0.0), 1.0)


def exact_null_cdf(n: int, t: float) -> float:
    """P(T <= t) for the full-interval statistic of n uniform draws.

    Exact (Durbin recursion) for n <= 2000; the asymptotic series is used
    above that threshold (see :func:`null_cdf_info` for the switchover).
    """
    return null_cdf_info(n, t).value


@dataclass(frozen=True)
class NullCdfValue:
    value: float
    n: int
    t: float
    method: str  # "durbin-exact" or "asymptotic-series"


def null_cdf_info(n: int, t: float) -> NullCdfValue:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise CapacityError(f"sample size must be a positive integer, got {n!r}")
    if n > 10**8:
        raise CapacityError(f"sample size {n} exceeds supported range")
    t = float(t)
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    if n <= EXACT_N_LIMIT:
        return NullCdfValue(_exact_cdf_impl(int(n), t), int(n), t, "durbin-exact")
    value = kolmogorov_cdf_asymptotic(math.sqrt(n) * t)
    return NullCdfValue(value, int(n), t, "asymptotic-series")


# ---------------------------------------------------------------------------
# asymptotic law and bounds
# ---------------------------------------------------------------------------

def kolmogorov_cdf_asymptotic(c: float) -> float:
    """Limit law P(sup|bridge| <= c) = 1 - 2 sum (-1)**(k-1) exp(-2 k^2 c^2).

    The alternating series is truncated once a term drops below 1e-16;
    the result is clamped to [0, 1].
    """
    if c <= 0.0:
        return 0.0
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * c * c)
        if term < 1e-16:
            break
        total += sign * term
        sign = -sign
        k += 1
        if k > 100000:  # unreachable for c > 0 in double precision
            break
    return min(max(1.0 - 2.0 * total, 0.0), 1.0)


def dkw_bound(n: int, eps: float) -> float:
    """Two-sided DKW tail bound min(1, 2 exp(-2 n eps^2))."""
    return min(1.0, dkw_bound_raw(n, eps))


def dkw_bound_raw(n: int, eps: float) -> float:
    """The uncapped constant-2 form 2 exp(-2 n eps^2)."""
    if eps < 0.0:
        raise DomainError(f"eps must be >= 0, got {eps}")
    return 2.0 * math.exp(-2.0 * n * eps * eps)


# ---------------------------------------------------------------------------
# critical values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalInfo:
    value: float
    achieved_size: float
    alpha: float
    n: int
    method: str


def critical_value(n: int, alpha: float) -> float:
    """Smallest t with null cdf(n, t) >= 1 - alpha, to 1e-10 by bisection.

    The threshold is conservative: the size actually achieved is reported by
    :func:`critical_value_info`.
    """
    return critical_value_info(n, alpha).value


@lru_cache(maxsize=4096)
def _critical_impl(n: int, alpha: float) -> tuple[float, float, str]:
    target = 1.0 - alpha
    info = null_cdf_info(n, 1.0)
    method = info.method
    lo = 0.5 / n  # cdf is 0 here
    hi = min(1.0, 3.0 / math.sqrt(n) + 0.5 / n)
    while null_cdf_info(n, hi).value < target and hi < 1.0:
        hi = min(1.0, hi * 1.5)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-10:
            break
        if null_cdf_info(n, mid).value >= target:
            hi = mid
        else:
            lo = mid
    achieved = 1.0 - null_cdf_info(n, hi).value
    return hi, achieved, method


def critical_value_info(n: int, alpha: float) -> CriticalInfo:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    value, achieved, method = _critical_impl(int(n), float(alpha))
    return CriticalInfo(value=value, achieved_size=achieved, alpha=float(alpha), n=int(n), method=method)
