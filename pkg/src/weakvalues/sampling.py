"""Monte Carlo pointer readings drawn from the post-selected density.

Readings come from rejection sampling against an equal-weight mixture of the
branch densities ``G^2(f - g B_i)`` of the open paths.  Draws are produced in
fixed-size blocks; block ``j`` owns the Philox stream keyed by ``(seed, j)``,
so the output depends only on ``(setup, n, seed)`` and never on how many
worker threads consumed the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, RegimeError, ValidationError
from .pointer import EPS_NORM, MeasurementSetup, _quad_interval, _require_norm, postselect_norm

__all__ = [
    "BLOCK_SIZE",
    "EnvelopeViolation",
    "SampleBatch",
    "EmpiricalSummary",
    "RejectionSampler",
    "block_generator",
    "sample_pointer",
    "empirical_stats",
    "classify_strong",
]

BLOCK_SIZE = 1 << 16
ENVELOPE_GRID = 4096
ENVELOPE_MARGIN = 1.2
STRONG_GUARD = 0.2
OPEN_PATH_RTOL = 1e-12
MAX_SEED = 2**64 - 1


class EnvelopeViolation(NumericalError):
    """Density/proposal ratio exceeded the envelope constant; indicates a sampler bug."""

    code = "envelope_violation"


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Independent counter-based stream for one block of draws."""
    return np.random.Generator(np.random.Philox(key=[seed, block]))


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValidationError("seed must be an unsigned 64-bit integer")
    return seed


def _open_paths(setup: MeasurementSetup) -> np.ndarray:
    mag = np.abs(setup.paths.amplitudes)
    return np.flatnonzero(mag > OPEN_PATH_RTOL * mag.max())


class RejectionSampler:
    def __init__(self, setup: MeasurementSetup, eps: float = EPS_NORM):
        self.norm = postselect_norm(setup)
        _require_norm(self.norm, eps)
        self.setup = setup
        idx = _open_paths(setup)
        self.amps = setup.paths.amplitudes[idx]
        self.shifts = setup.meter.shifts[idx]
        self.width = setup.meter.width
        self.k = idx.size
        # Cauchy-Schwarz: |sum A_i G_i|^2 <= sum|A_i|^2 sum G_i^2
        self.hard_bound = self.k * float(np.sum(np.abs(self.amps) ** 2)) / self.norm
        self.envelope = min(ENVELOPE_MARGIN * self._grid_max_ratio(), self.hard_bound)

    def ratio(self, f: np.ndarray) -> np.ndarray:
        """Target density over proposal density, evaluated without underflow."""
        e = -((f[:, None] - self.shifts) ** 2) / (4.0 * self.width**2)
        e -= e.max(axis=1, keepdims=True)
        g = np.exp(e)
        num = np.abs(g @ self.amps) ** 2
        den = np.sum(g * g, axis=1)
        return self.k * num / (self.norm * den)

    def _grid_max_ratio(self) -> float:
        lo, hi = _quad_interval(self.setup)
        mids = 0.5 * (self.shifts[:, None] + self.shifts[None, :]).ravel()
        grid = np.concatenate([np.linspace(lo, hi, ENVELOPE_GRID), mids])
        return float(self.ratio(grid).max())

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        out = []
        have = 0
        while have < n:
            m = max(64, int(math.ceil(1.1 * (n - have) * self.envelope)))
            m = min(m, 1 << 22)
            comp = rng.integers(0, self.k, size=m)
            f = self.shifts[comp] + self.width * rng.standard_normal(m)
            u = rng.random(m)
            r = self.ratio(f)
            if np.any(r > self.envelope * (1.0 + 1e-12)):
                bad = float(r.max())
                raise EnvelopeViolation(
                    f"density ratio {bad:.6g} exceeds envelope {self.envelope:.6g}",
                    ratio=bad,
                    envelope=self.envelope,
                )
            acc = f[u * self.envelope < r]
            out.append(acc)
            have += acc.size
        return np.concatenate(out)[:n]


@dataclass(frozen=True, eq=False)
class SampleBatch:
    readings: np.ndarray
    seed: int
    setup: MeasurementSetup = field(repr=False)

    @property
    def n(self) -> int:
        return self.readings.size


@dataclass(frozen=True)
class EmpiricalSummary:
    mean: float
    std_error: float
    n: int
    outcome_counts: dict | None = None


def sample_pointer(
    setup: MeasurementSetup,
    n: int,
    seed: int,
    workers: int = 1,
    eps: float = EPS_NORM,
) -> SampleBatch:
    """Draw ``n`` pointer readings; identical for identical (setup, n, seed)."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"sample count must be a positive integer, got {n!r}")
    seed = _check_seed(seed)
    sampler = RejectionSampler(setup, eps)
    sizes = [BLOCK_SIZE] * (n // BLOCK_SIZE)
    if n % BLOCK_SIZE:
        sizes.append(n % BLOCK_SIZE)

    def run(block: int) -> np.ndarray:
        return sampler.draw(sizes[block], block_generator(seed, block))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(j) for j in range(len(sizes))]
    readings = np.concatenate(parts)
    readings.setflags(write=False)
    return SampleBatch(readings, seed, setup)


def classify_strong(batch: SampleBatch) -> dict[float, int]:
    """Assign each reading to the nearest branch shift; keys are eigenvalues B_i.

    Only meaningful for an accurate meter: the width must stay below a fifth
    of the smallest gap between distinct shifts of open paths.
    """
    setup = batch.setup
    idx = _open_paths(setup)
    b = setup.meter.eigenvalues[idx]
    s = setup.meter.shifts[idx]
    # one bin per distinct shift, keyed by the first eigenvalue producing it
    shifts, first = np.unique(s, return_index=True)
    keys = b[first]
    gap = float(np.min(np.diff(shifts))) if shifts.size > 1 else math.inf
    if not setup.meter.width < STRONG_GUARD * gap:
        raise RegimeError(
            f"width {setup.meter.width:g} not below {STRONG_GUARD} x smallest shift gap {gap:g}"
        )
    nearest = np.argmin(np.abs(batch.readings[:, None] - shifts), axis=1)
    counts = np.bincount(nearest, minlength=shifts.size)
    order = np.argsort(first)
    return {float(keys[j]): int(counts[j]) for j in order}


def empirical_stats(batch: SampleBatch, classify: bool = False) -> EmpiricalSummary:
    if batch.n < 2:
        raise ValidationError("need at least two readings")
    r = batch.readings
    std_error = float(np.std(r, ddof=1) / math.sqrt(r.size))
    counts = classify_strong(batch) if classify else None
    return EmpiricalSummary(float(np.mean(r)), std_error, int(r.size), counts)
