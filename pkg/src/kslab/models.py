"""Alternative distributions on [0,1] as piecewise-linear CDFs.

Two construction routes share one representation:

* wavelet route: a coefficient field gives density p = 1 + sum theta*phi and
  CDF F(x) = x + sum theta*psi(x); both are exact on the dyadic breakpoints;
* direct route: triangular CDF bumps (interior and endpoint families) are
  written straight into the node table, because their deviation functionals
  must be exact for calibration.

Sampling inverts the CDF by fixed-step bisection on a counter-based uniform
stream, so batches are reproducible from (model, n, seed) alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng
from ._kernels import pl_eval, pl_invert
from .coefficients import CoefficientField, float_repr, parse_float
from .errors import CapacityError, DomainError, InvalidDensityError, NonInvertibleCdfError
from .wavelets import critical_scale

SAMPLE_CAP = 10**8


@dataclass(frozen=True, eq=False)
class AlternativeDensity:
    """A validated density 1 + f with its piecewise-linear CDF.

    ``breakpoints``/``cdf_values`` tabulate F at the nodes; ``densities``
    holds the exact density on each segment.  ``split_level`` is the
    smallest l0 such that every head/tail split at a level above l0 keeps
    both halves nonnegative densities (None when no admissible level exists
    among the active scales).
    """

    family: str
    params: dict
    breakpoints: np.ndarray
    cdf_values: np.ndarray
    densities: np.ndarray
    density_floor: float
    sup_norm_f: float
    coeffs: Optional[CoefficientField] = None
    split_level: Optional[int] = None

    # --- basic properties -------------------------------------------------
    @property
    def strictly_increasing(self) -> bool:
        return self.density_floor > 0.0

    @property
    def is_uniform(self) -> bool:
        return self.sup_norm_f == 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlternativeDensity):
            return NotImplemented
        return (
            self.family == other.family
            and self.params == other.params
            and np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.cdf_values, other.cdf_values)
            and np.array_equal(self.densities, other.densities)
        )

    # --- evaluation ---------------------------------------------------------
    def cdf(self, x):
        """F(x); raises DomainError outside [0, 1]."""
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError("cdf argument must lie in [0, 1]")
        out = pl_eval(self.breakpoints, self.cdf_values, self.densities, arr)
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out

    def cdf_unchecked(self, x: np.ndarray) -> np.ndarray:
        return pl_eval(self.breakpoints, self.cdf_values, self.densities, x)

    def inverse_cdf(self, u: np.ndarray) -> np.ndarray:
        if not self.strictly_increasing:
            raise NonInvertibleCdfError(
                "density touches 0; CDF is not strictly increasing"
            )
        return pl_invert(self.breakpoints, self.cdf_values, self.densities, u)

    def deviation(self, e1: float = 0.0, e2: float = 1.0) -> tuple[float, float]:
        """(sup over [e1,e2] of |F(x) - x|, an attaining x), exactly.

        F - id is piecewise linear, so only the nodes inside the interval and
        the interval endpoints can attain the sup.
        """
        if not 0.0 <= e1 < e2 <= 1.0:
            raise DomainError(f"need 0 <= e1 < e2 <= 1, got ({e1}, {e2})")
        xs = self.breakpoints
        inner = xs[(xs > e1) & (xs < e2)]
        cand = np.concatenate(([e1], inner, [e2]))
        vals = np.abs(self.cdf_unchecked(cand) - cand)
        k = int(np.argmax(vals))
        return float(vals[k]), float(cand[k])

    # --- sampling -----------------------------------------------------------
    def sample(self, n: int, seed: int) -> "SampleBatch":
        """Draw ``n`` points by CDF inversion of a Philox uniform stream.

        The stream is keyed by ``seed``; the i-th draw consumes the i-th
        counter position, so output order is draw order and the batch is
        bitwise reproducible.
        """
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise DomainError(f"sample size must be a nonnegative integer, got {n!r}")
        if n > SAMPLE_CAP:
            raise CapacityError(f"sample size {n} exceeds cap {SAMPLE_CAP}")
        if not self.strictly_increasing:
            raise NonInvertibleCdfError(
                "density touches 0; cannot invert the CDF for sampling"
            )
        u = rng.stream(seed).random(n)
        values = self.inverse_cdf(u)
        return SampleBatch(values=values, seed=int(seed), descriptor=self.descriptor())

    # --- serialization --------------------------------------------------------
    def descriptor(self) -> dict:
        coeff_entries = self.coeffs.to_json_entries() if self.coeffs is not None else []
        return {"family": self.family, "params": self.params, "coefficients": coeff_entries}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), indent=2)


@dataclass(frozen=True)
class SampleBatch:
    """Ordered draws plus the seed and model descriptor that produced them."""

    values: np.ndarray
    seed: int
    descriptor: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    def sorted_values(self) -> np.ndarray:
        return np.sort(self.values)


# ---------------------------------------------------------------------------
# wavelet-route construction
# ---------------------------------------------------------------------------

def _split_level(coeffs: CoefficientField) -> Optional[int]:
    """Smallest l0 such that all head/tail splits above l0 are densities.

    Head at level l keeps scales <= l, tail keeps scales >= l (the level
    itself belongs to both, matching the defining display).  Only levels up
    to the maximal active scale need checking; beyond it both halves are
    trivially densities.
    """
    top = coeffs.max_scale
    if top == 0:
        return 0

    def ok(level: int) -> bool:
        head = coeffs.restrict(lambda s: s <= level)
        tail = coeffs.restrict(lambda s: s >= level)
        return head.min_f()[0] >= -1.0 and tail.min_f()[0] >= -1.0

    failing = [level for level in range(1, top + 1) if not ok(level)]
    if not failing:
        return 0
    if failing[-1] == top:
        # even the topmost split fails; no admissible level among active scales
        return None
    return failing[-1]


def build_density(
    coeffs: CoefficientField,
    family: str = "coefficients",
    params: Optional[dict] = None,
) -> AlternativeDensity:
    """Validate and assemble the density 1 + sum theta*phi.

    Raises InvalidDensityError (carrying the violating segment) when the
    density dips below zero anywhere.
    """
    if not isinstance(coeffs, CoefficientField):
        coeffs = CoefficientField(coeffs)
    xs, densities = coeffs.segment_densities()
    floor_f, cell = coeffs.min_f()
    if floor_f < -1.0:
        raise InvalidDensityError(
            f"density floor {1.0 + floor_f:.6g} < 0 on segment {cell}", cell=cell
        )
    fvals = coeffs.deviation_values(xs)
    cdf_values = xs + fvals
    return AlternativeDensity(
        family=family,
        params=dict(params or {}),
        breakpoints=xs,
        cdf_values=cdf_values,
        densities=densities,
        density_floor=1.0 + floor_f,
        sup_norm_f=coeffs.sup_norm(),
        coeffs=coeffs,
        split_level=_split_level(coeffs),
    )


def uniform_model() -> AlternativeDensity:
    return build_density(CoefficientField(), family="uniform")


def cdf(model: AlternativeDensity, x):
    return model.cdf(x)


def deviation_functional(model: AlternativeDensity, e1: float = 0.0, e2: float = 1.0) -> float:
    """Exact sup over [e1, e2] of |F(x) - x|; (0, 1) gives the full deviation."""
    return model.deviation(e1, e2)[0]


def sample(model: AlternativeDensity, n: int, seed: int) -> SampleBatch:
    return model.sample(n, seed)


# ---------------------------------------------------------------------------
# direct piecewise-linear families
# ---------------------------------------------------------------------------

def _bump_nodes(nodes, devs, densities, family, params) -> AlternativeDensity:
    xs = np.asarray(nodes, dtype=float)
    dev = np.asarray(devs, dtype=float)
    dens = np.asarray(densities, dtype=float)
    keep = np.diff(xs) > 0.0  # drop zero-width segments (degenerate geometry)
    if not keep.all():
        xs = np.concatenate(([xs[0]], xs[1:][keep]))
        dev = np.concatenate(([dev[0]], dev[1:][keep]))
        dens = dens[keep]
    floor = float(dens.min())
    if floor < 0.0:
        k = int(np.argmin(dens))
        cell = (float(xs[k]), float(xs[k + 1]))
        raise InvalidDensityError(
            f"density floor {floor:.6g} < 0 on segment {cell}", cell=cell
        )
    return AlternativeDensity(
        family=family,
        params=params,
        breakpoints=xs,
        cdf_values=xs + dev,
        densities=dens,
        density_floor=floor,
        sup_norm_f=float(np.max(np.abs(dens - 1.0))),
        coeffs=None,
        split_level=None,
    )


def gen_interior_bump(n: int, a: float, center: float, width: float) -> AlternativeDensity:
    """Triangular CDF bump of peak height a/sqrt(n) centered inside (0,1).

    The full deviation equals a/sqrt(n) at ``center`` and vanishes outside
    [center - width/2, center + width/2]; the density is 1 +- 2a/(width
    sqrt(n)), so validity requires 2a/(width*sqrt(n)) <= 1.
    """
    _check_bump_args(n, a, width)
    lo, hi = center - width / 2.0, center + width / 2.0
    if not (0.0 < lo and hi < 1.0):
        raise DomainError(
            f"bump support [{lo}, {hi}] must lie strictly inside (0, 1)"
        )
    params = {"n": int(n), "a": float(a), "center": float(center), "width": float(width)}
    if a == 0.0:
        return build_density(CoefficientField(), family="interior-bump", params=params)
    peak = a / math.sqrt(n)
    d = 2.0 * a / (width * math.sqrt(n))
    if d > 1.0:
        raise InvalidDensityError(
            f"density deviation {d:.6g} exceeds 1 (peak {peak:.3g} too steep "
            f"for width {width})",
            cell=(lo, hi),
        )
    return _bump_nodes(
        [0.0, lo, center, hi, 1.0],
        [0.0, 0.0, peak, 0.0, 0.0],
        [1.0, 1.0 + d, 1.0 - d, 1.0],
        "interior-bump",
        params,
    )


def gen_endpoint_bump(
    n: int, a: float, width: float, mirrored: bool = False
) -> AlternativeDensity:
    """Triangular CDF bump attached to an endpoint of [0, 1].

    All deviation concentrates on [0, width] (or [1-width, 1] when
    ``mirrored``, via the x -> 1-x symmetry).
    """
    _check_bump_args(n, a, width)
    if width > 1.0:
        raise DomainError(f"width must be <= 1, got {width}")
    params = {
        "n": int(n),
        "a": float(a),
        "width": float(width),
        "mirrored": bool(mirrored),
    }
    if a == 0.0:
        return build_density(CoefficientField(), family="endpoint-bump", params=params)
    peak = a / math.sqrt(n)
    d = 2.0 * a / (width * math.sqrt(n))
    if d > 1.0:
        raise InvalidDensityError(
            f"density deviation {d:.6g} exceeds 1", cell=(0.0, width)
        )
    if not mirrored:
        nodes = [0.0, width / 2.0, width, 1.0]
        devs = [0.0, peak, 0.0, 0.0]
        dens = [1.0 + d, 1.0 - d, 1.0]
    else:
        nodes = [0.0, 1.0 - width, 1.0 - width / 2.0, 1.0]
        devs = [0.0, 0.0, -peak, 0.0]
        dens = [1.0, 1.0 - d, 1.0 + d]
    return _bump_nodes(nodes, devs, dens, "endpoint-bump", params)


def _check_bump_args(n, a, width):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if a < 0.0:
        raise DomainError(f"bump amplitude must be >= 0, got {a}")
    if width <= 0.0:
        raise DomainError(f"width must be > 0, got {width}")


def gen_single_coefficient(
    n: int,
    r: float,
    amplitude: float,
    scale_offset: int = 0,
    position_fraction: float = 0.5,
) -> AlternativeDensity:
    """One active coefficient at scale critical_scale(n, r) + offset.

    theta = amplitude * n**(-r) * 2**(-j/2), so the reconstructed f has sup
    norm amplitude * n**(-r); that must stay below 1 for 1 + f to be a
    density.  The continuous position is snapped to the nearest admissible
    dyadic cell (ties round half up).
    """
    if not 0.0 < r <= 0.5:
        raise DomainError(f"r must lie in (0, 1/2], got {r}")
    k_n = critical_scale(n, r)
    j = k_n + int(scale_offset)
    if j < 1:
        raise DomainError(f"scale {j} = critical scale {k_n} + offset {scale_offset} < 1")
    sup_f = abs(amplitude) * n ** (-r)
    params = {
        "n": int(n),
        "r": float(r),
        "amplitude": float(amplitude),
        "scale_offset": int(scale_offset),
        "position_fraction": float(position_fraction),
        "critical_scale": int(k_n),
    }
    if amplitude == 0.0:
        return build_density(CoefficientField(), family="single-coefficient", params=params)
    if sup_f >= 1.0:
        raise InvalidDensityError(
            f"|f| sup norm {sup_f:.6g} = amplitude*n**-r >= 1: 1 + f is not a density"
        )
    i = int(math.floor(position_fraction * 2**j + 0.5))
    i = min(max(i, 1), 2**j)
    theta = amplitude * n ** (-r) * 2.0 ** (-j / 2.0)
    params.update({"j": j, "i": i})
    return build_density(
        CoefficientField({(j, i): theta}), family="single-coefficient", params=params
    )


# ---------------------------------------------------------------------------
# additive combination
# ---------------------------------------------------------------------------

def mix_models(base: AlternativeDensity, other: AlternativeDensity) -> AlternativeDensity:
    """Model with CDF F_base + F_other - x (additive deviation mixing).

    Requires the summed density to stay strictly positive, i.e. the mixed
    CDF must be a strictly increasing distribution function.
    """
    nodes = np.union1d(base.breakpoints, other.breakpoints)
    mids = nodes[:-1] + np.diff(nodes) / 2.0
    dens = (
        _segment_density(base, mids) + _segment_density(other, mids) - 1.0
    )
    if dens.min() <= 0.0:
        k = int(np.argmin(dens))
        raise DomainError(
            "mixed CDF is not strictly increasing: density "
            f"{dens.min():.6g} on segment ({nodes[k]}, {nodes[k + 1]})"
        )
    fvals = base.cdf_unchecked(nodes) + other.cdf_unchecked(nodes) - nodes
    coeffs = None
    if base.coeffs is not None and other.coeffs is not None:
        coeffs = base.coeffs.merged(other.coeffs)
    return AlternativeDensity(
        family="additive-mix",
        params={"base": base.descriptor(), "other": other.descriptor()},
        breakpoints=nodes,
        cdf_values=fvals,
        densities=dens,
        density_floor=float(dens.min()),
        sup_norm_f=float(np.max(np.abs(dens - 1.0))),
        coeffs=coeffs,
        split_level=None,
    )


def _segment_density(model: AlternativeDensity, mids: np.ndarray) -> np.ndarray:
    k = np.clip(
        np.searchsorted(model.breakpoints, mids, side="right") - 1,
        0,
        len(model.densities) - 1,
    )
    return model.densities[k]


# ---------------------------------------------------------------------------
# coarse-scale negligibility (classifier precondition)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoarseScaleCheck:
    """Outcome of the coarse-truncation deviation scan."""

    holds: bool
    worst_level: Optional[int]
    worst_value: float
    levels: tuple[int, ...]
    eps: float


def check_coarse_scales(
    coeffs: CoefficientField,
    n: int,
    r: float,
    eps: float,
    level_margin: int = 3,
) -> CoarseScaleCheck:
    """Do coarse truncations contribute negligibly to the scaled deviation?

    For every level l < critical_scale(n, r) - level_margin, the CDF
    truncated to scales <= l must satisfy sqrt(n) * sup|F_l - id| < eps.
    Returns the worst level and value; an empty level range holds trivially.
    """
    if eps <= 0.0:
        raise DomainError(f"eps must be > 0, got {eps}")
    k_n = critical_scale(n, r)
    levels = tuple(range(1, k_n - level_margin))
    worst_value = 0.0
    worst_level: Optional[int] = None
    root_n = math.sqrt(n)
    for level in levels:
        truncated = coeffs.restrict(lambda s: s <= level)
        value = root_n * truncated.sup_deviation()[0]
        if value > worst_value:
            worst_value = value
            worst_level = level
    return CoarseScaleCheck(
        holds=worst_value < eps,
        worst_level=worst_level,
        worst_value=worst_value,
        levels=levels,
        eps=eps,
    )


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

def model_from_descriptor(desc: dict) -> AlternativeDensity:
    family = desc.get("family")
    params = desc.get("params", {})
    entries = desc.get("coefficients", [])
    if family in (None, "coefficients", "uniform", "single-coefficient"):
        coeffs = CoefficientField.from_json_entries(entries)
        return build_density(coeffs, family=family or "coefficients", params=params)
    if family == "interior-bump":
        return gen_interior_bump(
            int(params["n"]), parse_float(params["a"]),
            parse_float(params["center"]), parse_float(params["width"]),
        )
    if family == "endpoint-bump":
        return gen_endpoint_bump(
            int(params["n"]), parse_float(params["a"]), parse_float(params["width"]),
            bool(params.get("mirrored", False)),
        )
    if family == "additive-mix":
        return mix_models(
            model_from_descriptor(params["base"]),
            model_from_descriptor(params["other"]),
        )
    raise DomainError(f"unknown model family {family!r}")


def model_from_json(text: str) -> AlternativeDensity:
    return model_from_descriptor(json.loads(text))


__all__ = [
    "AlternativeDensity",
    "SampleBatch",
    "CoarseScaleCheck",
    "build_density",
    "uniform_model",
    "cdf",
    "deviation_functional",
    "sample",
    "gen_interior_bump",
    "gen_endpoint_bump",
    "gen_single_coefficient",
    "mix_models",
    "check_coarse_scales",
    "model_from_descriptor",
    "model_from_json",
    "float_repr",
]
