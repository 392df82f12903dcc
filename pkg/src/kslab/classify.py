"""Decision procedures for consistency of coefficient-field alternatives.

Each classifier is a deterministic function of a single (field, n) pair; the
asymptotic conditions of the underlying theory are finitized with explicit
parameters (scale window, smallness ratio), all of which are echoed in the
verdict diagnostics.  Sequence-level trends are the power lab's job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .besov import besov_norm, maxiset_smoothness, orientation, truncate_decompose
from .coefficients import CoefficientField
from .errors import CapacityError, DomainError
from .models import CoarseScaleCheck, check_coarse_scales
from .wavelets import critical_scale


class VerdictKind(str, Enum):
    CONSISTENT = "consistent"
    ALPHA_ONLY = "alpha-consistent-only"
    INCONSISTENT = "inconsistent"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ConsistencyVerdict:
    kind: VerdictKind
    witness: Optional[tuple[int, int, float]]  # (scale, position, theta)
    diagnostics: dict

    def to_json_dict(self) -> dict:
        witness = None
        if self.witness is not None:
            j, i, theta = self.witness
            witness = {"j": j, "i": i, "theta": theta}
        return {
            "kind": self.kind.value,
            "witness": witness,
            "diagnostics": self.diagnostics,
        }


def _position(idx) -> float:
    return idx.position * 2.0 ** (-idx.scale)


def _verdict(kind, witness, diagnostics) -> ConsistencyVerdict:
    if kind in (VerdictKind.CONSISTENT, VerdictKind.ALPHA_ONLY):
        assert witness is not None
    else:
        witness = None
    return ConsistencyVerdict(kind=kind, witness=witness, diagnostics=diagnostics)


def classify_threshold(
    coeffs: CoefficientField,
    n: int,
    r: float,
    window: int = 3,
    c_small: float = 1.0,
    e1: float = 0.1,
    e2: float = 0.9,
    smallness_tol: float = 0.1,
    coarse_eps: float = 0.1,
    coarse_margin: int = 3,
) -> ConsistencyVerdict:
    """Detectability of a field at rate n**(-r), 0 < r < 1/2.

    A coefficient with |theta| > c_small * n**(-1/4 - r/2) within ``window``
    scales of the critical scale makes the field alpha-consistent; an
    interior witness position (strictly between e1 and e2) upgrades that to
    consistent, while endpoint-located witnesses stay alpha-consistent-only
    (the endpoint-bump phenomenon).  With no witness, the field is declared
    inconsistent when every coefficient at scales up to critical + window is
    below ``smallness_tol`` times the threshold, and undetermined otherwise.
    Requires the coarse-scale negligibility precondition; when that fails
    the verdict is undetermined with the failing level reported.
    """
    if not 0.0 < r < 0.5:
        raise DomainError(f"r must lie strictly in (0, 1/2), got {r}")
    if not 0.0 <= e1 < e2 <= 1.0:
        raise DomainError(f"need 0 <= e1 < e2 <= 1, got ({e1}, {e2})")
    k_n = critical_scale(n, r)
    threshold = c_small * n ** (-0.25 - r / 2.0)
    coarse = check_coarse_scales(coeffs, n, r, coarse_eps, coarse_margin)
    diagnostics = {
        "critical_scale": k_n,
        "threshold": threshold,
        "window": window,
        "c_small": c_small,
        "smallness_tol": smallness_tol,
        "interior_interval": (e1, e2),
        "coarse_check": {
            "holds": coarse.holds,
            "worst_level": coarse.worst_level,
            "worst_value": coarse.worst_value,
            "eps": coarse.eps,
        },
        "haar_basis_note": (
            "classification uses the Haar system; smooth-wavelet maxiset "
            "statements transfer up to basis smoothness"
        ),
    }
    if not coarse.holds:
        diagnostics["reason"] = "coarse-scale deviation check failed"
        return _verdict(VerdictKind.UNDETERMINED, None, diagnostics)

    in_window = [
        (idx, theta)
        for idx, theta in coeffs.items()
        if abs(idx.scale - k_n) <= window and abs(theta) > threshold
    ]
    diagnostics["window_hits"] = len(in_window)
    if in_window:
        interior = [
            (idx, theta) for idx, theta in in_window if e1 < _position(idx) < e2
        ]
        pool = interior if interior else in_window
        idx, theta = max(pool, key=lambda item: abs(item[1]))
        diagnostics["witness_position"] = _position(idx)
        diagnostics["witness_ratio"] = abs(theta) / threshold
        kind = VerdictKind.CONSISTENT if interior else VerdictKind.ALPHA_ONLY
        return _verdict(kind, (idx.scale, idx.position, theta), diagnostics)

    shallow = [
        (idx, theta)
        for idx, theta in coeffs.items()
        if idx.scale <= k_n + window
    ]
    max_ratio = max((abs(t) / threshold for _, t in shallow), default=0.0)
    diagnostics["smallness_max_ratio"] = max_ratio
    if max_ratio <= smallness_tol:
        return _verdict(VerdictKind.INCONSISTENT, None, diagnostics)
    diagnostics["reason"] = (
        "no coefficient clears the threshold but shallow scales are not "
        "uniformly small"
    )
    return _verdict(VerdictKind.UNDETERMINED, None, diagnostics)


@dataclass(frozen=True)
class PureCheck:
    holds: bool
    margin: float
    worst: Optional[tuple[int, int, float]]
    bound: float


def pure_consistency_check(
    coeffs: CoefficientField,
    n: int,
    r: float,
    eps: float,
    N1: int,
    literal_normalization: bool = False,
) -> PureCheck:
    """Tail criterion for pure consistency.

    Checks sup over scales j > critical_scale + N1 of 2**(j/2) |theta_{ji}|
    against eps * n**(-r); ``margin`` is the achieved-sup to bound ratio.
    ``literal_normalization`` multiplies the left side by the extra n**r
    factor of the source display (dimensionally inconsistent with the
    surrounding rate arithmetic, hence off by default).
    """
    if eps <= 0.0:
        raise DomainError(f"eps must be > 0, got {eps}")
    if not 0.0 < r < 0.5:
        raise DomainError(f"r must lie strictly in (0, 1/2), got {r}")
    cut = critical_scale(n, r) + int(N1)
    bound = eps * n ** (-r)
    factor = n**r if literal_normalization else 1.0
    worst = None
    achieved = 0.0
    for idx, theta in coeffs.items():
        if idx.scale <= cut:
            continue
        value = factor * 2.0 ** (idx.scale / 2.0) * abs(theta)
        if value > achieved:
            achieved = value
            worst = (idx.scale, idx.position, theta)
    return PureCheck(
        holds=achieved <= bound,
        margin=achieved / bound,
        worst=worst,
        bound=bound,
    )


def s_consistency_margin(coeffs: CoefficientField, n: int) -> float:
    """max over entries of sqrt(n) * 2**(-j/2) * |theta_{ji}|.

    A sequence of fields is s-consistent exactly when this margin diverges
    along the sequence; the trend itself is measured elsewhere.
    """
    root_n = math.sqrt(n)
    return max(
        (root_n * 2.0 ** (-idx.scale / 2.0) * abs(theta) for idx, theta in coeffs.items()),
        default=0.0,
    )


def classify_root_n(
    coeffs: CoefficientField,
    n: int,
    C_scale: int,
    c_small: float = 1.0,
    e1: float = 0.0,
    e2: float = 1.0,
) -> ConsistencyVerdict:
    """Detectability at the n**(-1/2) rate: bounded scales only.

    Searches scales j <= C_scale for sqrt(n)|theta| > c_small; interior and
    boundary witness positions are handled as in :func:`classify_threshold`.
    Fields with all mass beyond the scale cap are inconsistent (their
    deviation functional is o(n**(-1/2))).
    """
    if C_scale < 1:
        raise DomainError(f"C_scale must be >= 1, got {C_scale}")
    root_n = math.sqrt(n)
    diagnostics = {
        "scale_cap": C_scale,
        "c_small": c_small,
        "interior_interval": (e1, e2),
        "max_active_scale": coeffs.max_scale,
    }
    hits = [
        (idx, theta)
        for idx, theta in coeffs.items()
        if idx.scale <= C_scale and root_n * abs(theta) > c_small
    ]
    if hits:
        interior = [(idx, theta) for idx, theta in hits if e1 < _position(idx) < e2]
        pool = interior if interior else hits
        idx, theta = max(pool, key=lambda item: abs(item[1]))
        diagnostics["witness_position"] = _position(idx)
        diagnostics["witness_scaled"] = root_n * abs(theta)
        kind = VerdictKind.CONSISTENT if interior else VerdictKind.ALPHA_ONLY
        return _verdict(kind, (idx.scale, idx.position, theta), diagnostics)
    if coeffs.max_scale > C_scale:
        diagnostics["reason"] = (
            "all detectable mass sits beyond the scale cap; deep-scale tails "
            "of sup-norm order n**(-1/2) are inconsistent"
        )
    return _verdict(VerdictKind.INCONSISTENT, None, diagnostics)


@dataclass(frozen=True)
class Decomposition:
    head: CoefficientField
    tail: CoefficientField
    C: int
    radius: float
    certificate: dict


def maxiset_decompose(
    coeffs: CoefficientField,
    n: int,
    r: float,
    eps: float,
    budget: int = 16,
    coarse_eps: Optional[float] = None,
    coarse_margin: int = 3,
) -> Decomposition:
    """Split a field into a maxiset head and a negligible deep tail.

    Chooses the smallest C <= budget such that the tail beyond
    critical_scale + C has sqrt(n) * sup-deviation below eps; returns the
    head, its Besov radius at smoothness 2r/(1-2r), and a certificate with
    the tail deviation and orientation confirmation.  Exhausting the budget
    raises CapacityError.
    """
    if eps <= 0.0:
        raise DomainError(f"eps must be > 0, got {eps}")
    coarse = check_coarse_scales(coeffs, n, r, coarse_eps if coarse_eps is not None else eps, coarse_margin)
    if not coarse.holds:
        raise DomainError(
            "coarse-scale precondition fails: level "
            f"{coarse.worst_level} has scaled deviation {coarse.worst_value:.4g}"
        )
    root_n = math.sqrt(n)
    for C in range(0, budget + 1):
        head, tail = truncate_decompose(coeffs, n, r, C)
        dev = root_n * tail.sup_deviation()[0]
        if dev < eps:
            return Decomposition(
                head=head,
                tail=tail,
                C=C,
                radius=besov_norm(head, maxiset_smoothness(r)) if not head.is_empty else 0.0,
                certificate={
                    "tail_sqrtn_deviation": dev,
                    "eps": eps,
                    "orientation_head_tail": orientation(head, tail),
                    "orientation_input_head": orientation(coeffs, head),
                    "reconstruction_exact": head.merged(tail) == coeffs,
                    "budget": budget,
                    "coarse_check": coarse,
                },
            )
    raise CapacityError(
        f"no scale cut within budget {budget} brings the tail deviation below {eps}"
    )


def coarse_check(coeffs, n, r, eps, level_margin=3) -> CoarseScaleCheck:
    """Re-export of the coarse-scale negligibility check for CLI use."""
    return check_coarse_scales(coeffs, n, r, eps, level_margin)
