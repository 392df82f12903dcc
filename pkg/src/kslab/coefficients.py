"""Sparse wavelet coefficient fields and exact piecewise reconstruction.

A field maps (scale, position) indices to real coefficients.  Because the
Haar functions are piecewise constant on dyadic half cells, any finite field
reconstructs to a function that is exactly piecewise constant on the sorted
union of the active breakpoints; every norm and node value below is computed
in closed form on that partition.
"""

from __future__ import annotations

import math
from decimal import Decimal
from typing import Iterator, Mapping

import numpy as np

from .errors import DomainError
from .wavelets import WaveletIndex, phi_values, psi_values


def _coerce_index(key) -> WaveletIndex:
    if isinstance(key, WaveletIndex):
        return key
    if isinstance(key, tuple) and len(key) == 2:
        return WaveletIndex(int(key[0]), int(key[1]))
    raise DomainError(f"coefficient key must be WaveletIndex or (j, i) pair, got {key!r}")


class CoefficientField(Mapping):
    """Immutable sparse map from wavelet index to coefficient value.

    Zero-valued entries are dropped; iteration order is (scale, position).
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping | None = None):
        cleaned: dict[WaveletIndex, float] = {}
        if entries:
            for key, theta in entries.items():
                idx = _coerce_index(key)
                theta = float(theta)
                if not math.isfinite(theta):
                    raise DomainError(f"coefficient at {idx} is not finite: {theta!r}")
                if theta != 0.0:
                    cleaned[idx] = theta
        object.__setattr__(self, "_entries", dict(sorted(cleaned.items())))

    # Mapping interface -----------------------------------------------------
    def __getitem__(self, key) -> float:
        return self._entries[_coerce_index(key)]

    def __iter__(self) -> Iterator[WaveletIndex]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        inner = ", ".join(f"({k.scale},{k.position}): {v!r}" for k, v in self._entries.items())
        return f"CoefficientField({{{inner}}})"

    def __eq__(self, other) -> bool:
        if isinstance(other, CoefficientField):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._entries.items()))

    # structure -------------------------------------------------------------
    @property
    def is_empty(self) -> bool:
        return not self._entries

    @property
    def active_scales(self) -> tuple[int, ...]:
        return tuple(sorted({idx.scale for idx in self._entries}))

    @property
    def max_scale(self) -> int:
        return max((idx.scale for idx in self._entries), default=0)

    def scale_max_abs(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for idx, theta in self._entries.items():
            out[idx.scale] = max(out.get(idx.scale, 0.0), abs(theta))
        return out

    def restrict(self, predicate) -> "CoefficientField":
        """Sub-field of entries whose scale satisfies ``predicate``."""
        return CoefficientField(
            {idx: th for idx, th in self._entries.items() if predicate(idx.scale)}
        )

    def scaled(self, factor: float) -> "CoefficientField":
        return CoefficientField({idx: factor * th for idx, th in self._entries.items()})

    def merged(self, other: "CoefficientField") -> "CoefficientField":
        out = dict(self._entries)
        for idx, th in other.items():
            out[idx] = out.get(idx, 0.0) + th
        return CoefficientField(out)

    # exact reconstruction ---------------------------------------------------
    def breakpoints(self) -> np.ndarray:
        """Sorted union of {0, 1} and all active cell edges/midpoints.

        The reconstructed f is constant between consecutive breakpoints and
        the CDF perturbation is linear there.
        """
        nodes = {0.0, 1.0}
        for idx in self._entries:
            lo, hi = idx.support
            nodes.update((lo, idx.midpoint, hi))
        return np.array(sorted(nodes))

    def f_values(self, x: np.ndarray) -> np.ndarray:
        """Reconstructed f = sum theta * phi at the given points."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for idx, theta in self._entries.items():
            out += theta * phi_values(idx, x)
        return out

    def deviation_values(self, x: np.ndarray) -> np.ndarray:
        """CDF perturbation sum theta * psi at the given points."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for idx, theta in self._entries.items():
            out += theta * psi_values(idx, x)
        return out

    def segment_densities(self) -> tuple[np.ndarray, np.ndarray]:
        """(breakpoints, 1 + f on each segment), evaluated at segment midpoints."""
        xs = self.breakpoints()
        mids = xs[:-1] + np.diff(xs) / 2.0
        return xs, 1.0 + self.f_values(mids)

    def sup_norm(self) -> float:
        """Exact sup norm of the reconstructed f."""
        if self.is_empty:
            return 0.0
        xs = self.breakpoints()
        mids = xs[:-1] + np.diff(xs) / 2.0
        return float(np.max(np.abs(self.f_values(mids))))

    def min_f(self) -> tuple[float, tuple[float, float]]:
        """(min of f, the segment attaining it)."""
        xs = self.breakpoints()
        if len(xs) == 2:  # empty field
            return 0.0, (0.0, 1.0)
        mids = xs[:-1] + np.diff(xs) / 2.0
        vals = self.f_values(mids)
        k = int(np.argmin(vals))
        return float(vals[k]), (float(xs[k]), float(xs[k + 1]))

    def sup_deviation(self, e1: float = 0.0, e2: float = 1.0) -> tuple[float, float]:
        """Exact sup over [e1, e2] of |sum theta * psi|, with an attaining x.

        The perturbation is piecewise linear, so the sup over a closed
        interval is attained on the breakpoints inside it or at the interval
        endpoints.
        """
        if not 0.0 <= e1 < e2 <= 1.0:
            raise DomainError(f"need 0 <= e1 < e2 <= 1, got ({e1}, {e2})")
        xs = self.breakpoints()
        inner = xs[(xs > e1) & (xs < e2)]
        cand = np.concatenate(([e1], inner, [e2]))
        vals = np.abs(self.deviation_values(cand))
        k = int(np.argmax(vals))
        return float(vals[k]), float(cand[k])

    # serialization -----------------------------------------------------------
    def to_json_entries(self) -> list[dict]:
        return [
            {"j": idx.scale, "i": idx.position, "theta": float_repr(theta)}
            for idx, theta in self._entries.items()
        ]

    @classmethod
    def from_json_entries(cls, entries: list[dict]) -> "CoefficientField":
        return cls(
            {
                (int(e["j"]), int(e["i"])): parse_float(e["theta"])
                for e in entries
            }
        )


def float_repr(x: float) -> str:
    """Exact decimal string of the binary double ``x``."""
    return format(Decimal(float(x)), "f")


def parse_float(s) -> float:
    return float(s)
