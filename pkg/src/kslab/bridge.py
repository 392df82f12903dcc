"""Brownian-bridge simulation and Gaussian shifted-supremum experiments.

Paths are built from Gaussian increments on a uniform grid and pinned at
both ends.  All comparison estimators (shift gap, continuity, refinement)
run on common random numbers: every replicate is keyed by (seed, replicate
index), and paired quantities are computed from the same path array, which
is what makes the strict inequalities detectable at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import rng
from ._kernels import ks_stat_sorted
from .errors import CapacityError, DomainError, NonInvertibleCdfError
from .models import AlternativeDensity

GRID_MIN = 2
GRID_MAX = 10**6
DEFAULT_GRID = 4096
DEFAULT_REPS = 10**5
_CHUNK_ELEMENTS = 2**23  # ~64 MB of doubles per block


@dataclass(frozen=True)
class BridgePath:
    """One discretized bridge: values at nodes k/G, zero at both ends."""

    grid_size: int
    values: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.grid_size + 1) / self.grid_size

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class ShiftFunction:
    """Bounded measurable shift u(t) on [0,1], evaluated on grid nodes."""

    fn: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"

    def values(self, t: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)
        if out.shape != np.shape(t):
            raise DomainError("shift function must evaluate elementwise on the grid")
        if not np.all(np.isfinite(out)):
            raise DomainError("shift function must be bounded (finite on the grid)")
        return out

    def sup_norm(self, grid_size: int = DEFAULT_GRID) -> float:
        t = np.arange(grid_size + 1) / grid_size
        return float(np.max(np.abs(self.values(t))))

    @classmethod
    def zero(cls) -> "ShiftFunction":
        return cls(fn=lambda t: np.zeros_like(t), label="zero")

    @classmethod
    def constant(cls, value: float) -> "ShiftFunction":
        return cls(fn=lambda t: np.full_like(t, float(value)), label=f"const:{value:g}")

    @classmethod
    def triangle(cls, height: float, lo: float, hi: float) -> "ShiftFunction":
        """Triangular peak of the given height on [lo, hi], apex at the middle."""
        if not 0.0 <= lo < hi <= 1.0:
            raise DomainError(f"need 0 <= lo < hi <= 1, got ({lo}, {hi})")
        mid = lo + (hi - lo) / 2.0
        half = (hi - lo) / 2.0

        def fn(t):
            return np.where(
                (t > lo) & (t < hi),
                height * (1.0 - np.abs(t - mid) / half),
                0.0,
            )

        return cls(fn=fn, label=f"triangle:{height:g}:{lo:g}:{hi:g}")

    @classmethod
    def from_model_deviation(cls, model: AlternativeDensity, n: int) -> "ShiftFunction":
        """u(t) = sqrt(n) * (F(t) - t): the local shift a size-n sample sees."""
        root_n = math.sqrt(n)
        return cls(
            fn=lambda t: root_n * (model.cdf_unchecked(t) - t),
            label=f"model-deviation:{model.family}:n={n}",
        )


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo probability estimate with its binomial standard error."""

    p_hat: float
    stderr: float
    reps: int
    grid_size: int
    seed: int


@dataclass(frozen=True)
class GapEstimate:
    """Paired difference p0 - pu with a paired z-score."""

    gap: float
    z: float
    p_zero: float
    p_shifted: float
    stderr: float
    reps: int
    grid_size: int
    seed: int


@dataclass(frozen=True)
class ContinuityEstimate:
    lhs: float
    delta: float
    p_first: float
    p_second: float
    stderr: float
    reps: int
    grid_size: int
    seed: int


def _check_grid(G: int) -> int:
    if not isinstance(G, (int, np.integer)) or not GRID_MIN <= G <= GRID_MAX:
        raise CapacityError(f"grid size must be an integer in [{GRID_MIN}, {GRID_MAX}], got {G!r}")
    return int(G)


def simulate_bridge(G: int, seed: int) -> BridgePath:
    """One bridge path: cumulative Gaussian increments minus t * W(1)."""
    G = _check_grid(G)
    z = rng.stream(seed, "bridge").standard_normal(G)
    return BridgePath(grid_size=G, values=_bridge_nodes(z[None, :])[0])


def _bridge_nodes(z: np.ndarray) -> np.ndarray:
    """Map increment rows (B, G) to node value rows (B, G+1); ends are 0."""
    B, G = z.shape
    w = np.cumsum(z, axis=1) * (1.0 / math.sqrt(G))
    t = np.arange(1, G + 1) / G
    nodes = np.empty((B, G + 1))
    nodes[:, 0] = 0.0
    nodes[:, 1:] = w - t[None, :] * w[:, -1:]
    return nodes


def _iter_path_blocks(reps: int, G: int, seed: int, tag: str):
    """Yield (start index, node matrix) blocks; replicate k is keyed (seed, tag, k)."""
    base = rng.stream_key(seed, tag)
    block = max(1, _CHUNK_ELEMENTS // (G + 1))
    for start in range(0, reps, block):
        stop = min(start + block, reps)
        z = np.empty((stop - start, G))
        for k in range(start, stop):
            z[k - start] = rng.replicate_stream(base, k).standard_normal(G)
        yield start, _bridge_nodes(z)


def shifted_sup_samples(
    shifts: Sequence[Optional[ShiftFunction]],
    reps: int,
    G: int = DEFAULT_GRID,
    seed: int = 0,
    tag: str = "noncrossing",
) -> np.ndarray:
    """Matrix (reps, len(shifts)) of sup_t |b(t) + u(t)| over shared paths.

    ``None`` entries mean u = 0.  Sharing paths across columns is the
    common-random-numbers contract used by every paired estimator here.
    """
    G = _check_grid(G)
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    t = np.arange(G + 1) / G
    u_rows = [
        np.zeros(G + 1) if u is None else u.values(t)
        for u in shifts
    ]
    out = np.empty((reps, len(u_rows)))
    for start, nodes in _iter_path_blocks(reps, G, seed, tag):
        for col, u_vals in enumerate(u_rows):
            sup = np.max(np.abs(nodes + u_vals[None, :]), axis=1)
            out[start : start + nodes.shape[0], col] = sup
    return out


def noncrossing_prob(
    u: Optional[ShiftFunction],
    c: float,
    reps: int = DEFAULT_REPS,
    G: int = DEFAULT_GRID,
    seed: int = 0,
) -> Estimate:
    """Monte Carlo P(max_t |b(t) + u(t)| < c), the max over grid nodes."""
    if c <= 0.0:
        raise DomainError(f"c must be > 0, got {c}")
    sups = shifted_sup_samples([u], reps, G, seed)
    p = float(np.mean(sups[:, 0] < c))
    return Estimate(
        p_hat=p,
        stderr=math.sqrt(p * (1.0 - p) / reps),
        reps=reps,
        grid_size=G,
        seed=int(seed),
    )


def noncrossing_curve(
    u: Optional[ShiftFunction],
    cs: Sequence[float],
    reps: int = DEFAULT_REPS,
    G: int = DEFAULT_GRID,
    seed: int = 0,
) -> list[Estimate]:
    """Paired estimates of P(sup < c) across thresholds on shared paths."""
    sups = shifted_sup_samples([u], reps, G, seed)[:, 0]
    out = []
    for c in cs:
        p = float(np.mean(sups < c))
        out.append(Estimate(p, math.sqrt(p * (1.0 - p) / reps), reps, G, int(seed)))
    return out


def anderson_gap(
    u: ShiftFunction,
    c: float,
    reps: int = DEFAULT_REPS,
    G: int = DEFAULT_GRID,
    seed: int = 0,
) -> GapEstimate:
    """Paired estimate of P(sup|b| < c) - P(sup|b + u| < c).

    A nonzero shift strictly lowers the noncrossing probability, so the gap
    is predicted positive whenever the shift is not a.e. zero.  With u = 0
    the pairing makes the gap exactly 0.
    """
    if c <= 0.0:
        raise DomainError(f"c must be > 0, got {c}")
    sups = shifted_sup_samples([None, u], reps, G, seed, tag="anderson")
    i_zero = sups[:, 0] < c
    i_shift = sups[:, 1] < c
    d = i_zero.astype(float) - i_shift.astype(float)
    gap = float(np.mean(d))
    sd = float(np.std(d, ddof=1)) if reps > 1 else 0.0
    stderr = sd / math.sqrt(reps)
    z = gap / stderr if stderr > 0.0 else 0.0
    return GapEstimate(
        gap=gap,
        z=z,
        p_zero=float(np.mean(i_zero)),
        p_shifted=float(np.mean(i_shift)),
        stderr=stderr,
        reps=reps,
        grid_size=G,
        seed=int(seed),
    )


def shift_continuity_check(
    h1: ShiftFunction,
    h2: ShiftFunction,
    c: float,
    reps: int = DEFAULT_REPS,
    G: int = DEFAULT_GRID,
    seed: int = 0,
) -> ContinuityEstimate:
    """Paired |p_hat(h1) - p_hat(h2)| together with delta = sup|h1 - h2|.

    Nearby shifts give nearby noncrossing probabilities (lhs <= C * delta up
    to Monte Carlo noise for a fixed constant C).
    """
    if c <= 0.0:
        raise DomainError(f"c must be > 0, got {c}")
    G = _check_grid(G)
    t = np.arange(G + 1) / G
    delta = float(np.max(np.abs(h1.values(t) - h2.values(t))))
    sups = shifted_sup_samples([h1, h2], reps, G, seed, tag="continuity")
    p1 = float(np.mean(sups[:, 0] < c))
    p2 = float(np.mean(sups[:, 1] < c))
    d = (sups[:, 0] < c).astype(float) - (sups[:, 1] < c).astype(float)
    sd = float(np.std(d, ddof=1)) if reps > 1 else 0.0
    return ContinuityEstimate(
        lhs=abs(p1 - p2),
        delta=delta,
        p_first=p1,
        p_second=p2,
        stderr=sd / math.sqrt(reps),
        reps=reps,
        grid_size=G,
        seed=int(seed),
    )


# ---------------------------------------------------------------------------
# empirical-process coupling
# ---------------------------------------------------------------------------

DEFAULT_COUPLING_GRID = 2**14
DEFAULT_COUPLING_REPS = 2 * 10**4


def coupling_distance(
    model: AlternativeDensity,
    n: int,
    reps: int = DEFAULT_COUPLING_REPS,
    seed: int = 0,
    G: int = DEFAULT_COUPLING_GRID,
    sqrtn_deviation_bound: float = 10.0,
) -> float:
    """Two-sample Kolmogorov distance between the scaled empirical-deviation
    law and the bridge-supremum law.

    Ensemble A: sup_t sqrt(n) |F_hat(t) - F(t)| over ``reps`` samples of
    size n from the model.  Ensemble B: sup over the grid of |b| for
    ``reps`` simulated bridges (for a strictly increasing F the composed
    process b(F(t)) attains the same supremum).  Small distances witness
    that the two sup-functional laws agree.
    """
    if not model.strictly_increasing:
        raise NonInvertibleCdfError("coupling requires a strictly increasing model CDF")
    dev = math.sqrt(n) * model.deviation()[0]
    if dev > sqrtn_deviation_bound:
        raise DomainError(
            f"sqrt(n) * deviation = {dev:.3g} exceeds the configured bound "
            f"{sqrtn_deviation_bound}"
        )
    emp = _empirical_sup_samples(model, n, reps, seed)
    brid = shifted_sup_samples([None], reps, G, seed, tag="coupling-bridge")[:, 0]
    return two_sample_ks_distance(emp, brid)


def _empirical_sup_samples(model, n, reps, seed) -> np.ndarray:
    base = rng.stream_key(seed, "coupling-empirical", n)
    out = np.empty(reps)
    block = max(1, _CHUNK_ELEMENTS // max(n, 1))
    root_n = math.sqrt(n)
    for start in range(0, reps, block):
        stop = min(start + block, reps)
        u = np.empty((stop - start, n))
        for k in range(start, stop):
            u[k - start] = rng.replicate_stream(base, k).random(n)
        x = np.sort(model.inverse_cdf(u), axis=1)
        w = model.cdf_unchecked(x)  # F(X_(i)): reduces sup|F_hat - F| to the
        out[start:stop] = root_n * ks_stat_sorted(w)  # uniform order-statistic scan
    return out


def two_sample_ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    """sup_x |ECDF_a(x) - ECDF_b(x)| for two real samples."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    ca = np.searchsorted(a, grid, side="right") / len(a)
    cb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(ca - cb)))
