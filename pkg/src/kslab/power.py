"""Monte Carlo size/power estimation over alternative families.

Replicate r of an experiment at sample size n draws its uniforms from a
stream keyed by (master seed, n, r) only, never by family: all families and
both arms of every paired comparison therefore share common random numbers.
The null sample IS the uniform draw; the alternative sample is the same draw
pushed through the model's inverse CDF.  Rejection counts are integers, so
tables are bitwise reproducible for any block split or worker count.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import rng
from ._kernels import ks_stat_sorted
from .errors import DomainError
from .ks import critical_value
from .models import AlternativeDensity, mix_models

_BLOCK_ELEMENTS = 2**22  # uniforms per block (~32 MB of doubles)


def _block_size(n: int) -> int:
    return max(1, min(4096, _BLOCK_ELEMENTS // max(n, 1)))


def default_workers() -> int:
    env = os.environ.get("KSLAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"KSLAB_WORKERS must be an integer, got {env!r}")
    return 1


@dataclass(frozen=True)
class FamilySpec:
    """A named model generator over sample sizes."""

    name: str
    build: Callable[[int], AlternativeDensity]


@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: tuple[int, ...]
    alpha: float = 0.05
    reps: int = 10**5
    master_seed: int = 0
    e1: float = 0.0
    e2: float = 1.0

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if not grid:
            raise DomainError("n_grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError(f"n_grid must be strictly ascending, got {grid}")
        if any(n < 1 for n in grid):
            raise DomainError(f"sample sizes must be positive, got {grid}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.reps < 100:
            raise DomainError(f"reps must be >= 100, got {self.reps}")
        if not 0.0 <= self.e1 < self.e2 <= 1.0:
            raise DomainError(f"need 0 <= e1 < e2 <= 1, got ({self.e1}, {self.e2})")

    def to_dict(self) -> dict:
        return {
            "n_grid": list(self.n_grid),
            "alpha": self.alpha,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "e1": self.e1,
            "e2": self.e2,
        }


@dataclass(frozen=True)
class PowerRow:
    family: str
    n: int
    alpha: float
    achieved_size: float
    power: float
    stderr: float
    critical: float

    def as_list(self) -> list:
        return [
            self.family,
            self.n,
            self.alpha,
            self.achieved_size,
            self.power,
            self.stderr,
            self.critical,
        ]


CSV_COLUMNS = ["family", "n", "alpha", "achieved_size", "power", "stderr", "critical"]


@dataclass(frozen=True)
class PowerTable:
    rows: tuple[PowerRow, ...]
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.config:
            buf.write(f"# config: {self.config!r}\n")
        writer = csv.writer(buf)
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.as_list())
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "rows": [dict(zip(CSV_COLUMNS, r.as_list())) for r in self.rows],
        }

    def power_by_n(self) -> dict[int, float]:
        return {r.n: r.power for r in self.rows}

    def size_by_n(self) -> dict[int, float]:
        return {r.n: r.achieved_size for r in self.rows}


# ---------------------------------------------------------------------------
# block runners (module level so worker processes can import them)
# ---------------------------------------------------------------------------

def _uniform_block(base_key: int, start: int, stop: int, n: int) -> np.ndarray:
    u = np.empty((stop - start, n))
    for k in range(start, stop):
        u[k - start] = rng.replicate_stream(base_key, k).random(n)
    return u


def _power_block(args) -> tuple[int, int]:
    model, n, crit, e1, e2, base_key, start, stop = args
    us = np.sort(_uniform_block(base_key, start, stop, n), axis=1)
    t_null = ks_stat_sorted(us, e1, e2)
    # inversion is monotone, so transformed sorted uniforms stay sorted
    xs = model.inverse_cdf(us)
    t_alt = ks_stat_sorted(xs, e1, e2)
    return int(np.sum(t_null > crit)), int(np.sum(t_alt > crit))


def _mix_block(args) -> tuple[int, int, int]:
    base_model, mixed_model, n, crit, e1, e2, base_key, start, stop = args
    us = np.sort(_uniform_block(base_key, start, stop, n), axis=1)
    rb = ks_stat_sorted(base_model.inverse_cdf(us), e1, e2) > crit
    rm = ks_stat_sorted(mixed_model.inverse_cdf(us), e1, e2) > crit
    return int(np.sum(rb)), int(np.sum(rm)), int(np.sum(rb & rm))


def _run_blocks(task_fn, common_args, reps: int, n: int, workers: int):
    block = _block_size(n)
    tasks = [
        common_args + (start, min(start + block, reps))
        for start in range(0, reps, block)
    ]
    if workers <= 1 or len(tasks) == 1:
        results = [task_fn(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task_fn, tasks, chunksize=1))
    return [sum(col) for col in zip(*results)]


def _power_base_key(master_seed: int, n: int) -> int:
    # family-independent key: all families at (seed, n) share uniforms
    return rng.stream_key(master_seed, "power", n)


def _build_with_context(family: FamilySpec, n: int) -> AlternativeDensity:
    try:
        return family.build(n)
    except Exception as exc:
        exc.args = (f"family {family.name!r} at n={n}: {exc}",) + exc.args[1:]
        raise


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def estimate_power(
    family: FamilySpec,
    config: ExperimentConfig,
    workers: Optional[int] = None,
) -> PowerTable:
    """Rejection rate of the restricted Kolmogorov test along the n grid.

    The achieved size is measured on the same uniforms (null arm) and the
    critical value is the conservative exact threshold for (n, alpha).
    """
    workers = default_workers() if workers is None else workers
    rows = []
    for n in config.n_grid:
        model = _build_with_context(family, n)
        crit = critical_value(n, config.alpha)
        base_key = _power_base_key(config.master_seed, n)
        null_count, alt_count = _run_blocks(
            _power_block,
            (model, n, crit, config.e1, config.e2, base_key),
            config.reps,
            n,
            workers,
        )
        p1 = alt_count / config.reps
        rows.append(
            PowerRow(
                family=family.name,
                n=n,
                alpha=config.alpha,
                achieved_size=null_count / config.reps,
                power=p1,
                stderr=math.sqrt(p1 * (1.0 - p1) / config.reps),
                critical=crit,
            )
        )
    return PowerTable(rows=tuple(rows), config={"family": family.name, **config.to_dict()})


@dataclass(frozen=True)
class ProbeRow:
    n: int
    min_power: float
    worst_family: str


@dataclass(frozen=True)
class ProbeResult:
    rows: tuple[ProbeRow, ...]
    tables: dict[str, PowerTable]

    def min_power_by_n(self) -> dict[int, float]:
        return {r.n: r.min_power for r in self.rows}


def uniform_consistency_probe(
    members: Sequence[FamilySpec],
    config: ExperimentConfig,
    workers: Optional[int] = None,
) -> ProbeResult:
    """Member-wise minimum power per n over a finite adversarial family list."""
    if not members:
        raise DomainError("family set must be nonempty")
    tables = {m.name: estimate_power(m, config, workers) for m in members}
    rows = []
    for pos, n in enumerate(config.n_grid):
        powers = {name: table.rows[pos].power for name, table in tables.items()}
        worst = min(powers, key=powers.get)
        rows.append(ProbeRow(n=n, min_power=powers[worst], worst_family=worst))
    return ProbeResult(rows=tuple(rows), tables=tables)


@dataclass(frozen=True)
class MixRow:
    n: int
    power_base: float
    power_mixed: float
    abs_diff: float
    stderr_paired: float
    critical: float


@dataclass(frozen=True)
class MixResult:
    rows: tuple[MixRow, ...]
    config: dict


def additive_mix_experiment(
    consistent: FamilySpec,
    inconsistent: FamilySpec,
    config: ExperimentConfig,
    workers: Optional[int] = None,
) -> MixResult:
    """Paired power of F_base versus F_base + F_other - id along the grid.

    Additive mixing with a vanishing-deviation component should leave the
    rejection rate asymptotically unchanged; the paired standard error uses
    the joint rejection counts.
    """
    workers = default_workers() if workers is None else workers
    rows = []
    for n in config.n_grid:
        base_model = _build_with_context(consistent, n)
        other_model = _build_with_context(inconsistent, n)
        mixed = mix_models(base_model, other_model)
        crit = critical_value(n, config.alpha)
        base_key = _power_base_key(config.master_seed, n)
        cb, cm, cboth = _run_blocks(
            _mix_block,
            (base_model, mixed, n, crit, config.e1, config.e2, base_key),
            config.reps,
            n,
            workers,
        )
        pb = cb / config.reps
        pm = cm / config.reps
        pboth = cboth / config.reps
        var_d = (pb + pm - 2.0 * pboth) - (pb - pm) ** 2
        rows.append(
            MixRow(
                n=n,
                power_base=pb,
                power_mixed=pm,
                abs_diff=abs(pb - pm),
                stderr_paired=math.sqrt(max(var_d, 0.0) / config.reps),
                critical=crit,
            )
        )
    return MixResult(
        rows=tuple(rows),
        config={
            "base": consistent.name,
            "other": inconsistent.name,
            **config.to_dict(),
        },
    )


# ---------------------------------------------------------------------------
# standard families
# ---------------------------------------------------------------------------

def uniform_family() -> FamilySpec:
    from .models import uniform_model

    return FamilySpec(name="uniform", build=lambda n: uniform_model())


def interior_bump_family(a: float, center: float, width) -> FamilySpec:
    """``width`` may be a number or a callable n -> width."""
    from .models import gen_interior_bump

    wfn = width if callable(width) else (lambda n: width)
    return FamilySpec(
        name=f"interior-bump(a={a:g},c={center:g})",
        build=lambda n: gen_interior_bump(n, a, center, wfn(n)),
    )


def endpoint_bump_family(a: float, width, mirrored: bool = False) -> FamilySpec:
    from .models import gen_endpoint_bump

    wfn = width if callable(width) else (lambda n: width)
    return FamilySpec(
        name=f"endpoint-bump(a={a:g})",
        build=lambda n: gen_endpoint_bump(n, a, wfn(n), mirrored),
    )


def single_coefficient_family(
    r: float, amplitude: float, scale_offset: int = 0, position_fraction: float = 0.5
) -> FamilySpec:
    from .models import gen_single_coefficient

    return FamilySpec(
        name=f"single-coefficient(r={r:g},A={amplitude:g},off={scale_offset})",
        build=lambda n: gen_single_coefficient(n, r, amplitude, scale_offset, position_fraction),
    )


def fixed_model_family(model: AlternativeDensity, name: Optional[str] = None) -> FamilySpec:
    return FamilySpec(name=name or f"fixed:{model.family}", build=lambda n: model)
