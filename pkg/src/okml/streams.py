"""Data sources and sliding-window semantics for the online protocol.

The synthetic source is a stable AR(1) recursion driven by Gaussian noise
from a self-contained SplitMix64 generator with a Box-Muller transform, so a
given (seed, config) pair reproduces the same stream bit-for-bit everywhere
without depending on any external RNG's stream guarantees.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

from .errors import ConfigurationError, IngestError, ProtocolError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Sample:
    """One labeled observation: running index n, input x, target y."""

    index: int
    x: float
    y: float


@dataclass(frozen=True)
class SlidingWindow:
    """The most recent `capacity` samples, newest last, consecutive indices."""

    capacity: int
    samples: tuple[Sample, ...] = ()

    def __post_init__(self):
        if self.capacity < 1:
            raise ConfigurationError(f"window capacity must be >= 1, got {self.capacity}")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def newest(self) -> Sample:
        if not self.samples:
            raise ProtocolError("window is empty")
        return self.samples[-1]

    def indices(self) -> tuple[int, ...]:
        return tuple(s.index for s in self.samples)

    def xs(self) -> list[float]:
        return [s.x for s in self.samples]

    def ys(self) -> list[float]:
        return [s.y for s in self.samples]

    def push(self, sample: Sample) -> "SlidingWindow":
        """Append the next sample, evicting the oldest once over capacity."""
        expected = self.samples[-1].index + 1 if self.samples else 1
        if sample.index != expected:
            raise ProtocolError(
                f"out-of-order sample: expected index {expected}, got {sample.index}"
            )
        kept = self.samples + (sample,)
        if len(kept) > self.capacity:
            kept = kept[1:]
        return SlidingWindow(self.capacity, kept)


class SplitMix64:
    """64-bit-state SplitMix64 generator (Steele, Lea & Flood 2014).

    Gaussian variates come from the Box-Muller transform on uniforms in
    (0, 1]; the second variate of each pair is cached.
    """

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64
        self._spare: float | None = None

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        """Uniform in (0, 1], 53-bit resolution."""
        return ((self.next_uint64() >> 11) + 1) * (2.0 ** -53)

    def next_gaussian(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self.next_unit()
        u2 = self.next_unit()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class Ar1Config:
    """Stable AR(1) source: y_n = phi * y_{n-1} + u_n, x_n = n.

    `noise_scale` is the standard deviation of u_n by default; set
    `noise_is_variance` to read it as a variance instead.
    """

    phi: float = 0.5488135
    noise_scale: float = 0.71519837
    y0: float = 0.0
    seed: int = 0
    noise_is_variance: bool = False

    def __post_init__(self):
        if not abs(self.phi) < 1.0:
            raise ConfigurationError(f"AR(1) stability needs |phi| < 1, got {self.phi}")
        if not self.noise_scale >= 0.0:
            raise ConfigurationError(f"noise_scale must be >= 0, got {self.noise_scale}")

    def std(self) -> float:
        return math.sqrt(self.noise_scale) if self.noise_is_variance else self.noise_scale


def ar1_stream(cfg: Ar1Config, count: int) -> list[Sample]:
    """Generate `count` samples, indices 1..count, deterministically from the seed."""
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    rng = SplitMix64(cfg.seed)
    std = cfg.std()
    y = cfg.y0
    out = []
    for n in range(1, count + 1):
        y = cfg.phi * y + std * rng.next_gaussian()
        out.append(Sample(index=n, x=float(n), y=y))
    return out


def csv_ingest(path: str, x_column: str = "x", y_column: str = "y") -> list[Sample]:
    """Read samples from a headered CSV, indexing rows 1..N in file order."""
    if not os.path.isfile(path):
        raise IngestError(f"data file not found: {path}")
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (x_column, y_column):
            if col not in header:
                raise IngestError(f"missing column {col!r} in {path} (header: {header})")
        for row_no, row in enumerate(reader, start=1):
            values = {}
            for col in (x_column, y_column):
                cell = row[col]
                try:
                    values[col] = float(cell)
                except (TypeError, ValueError):
                    raise IngestError(
                        f"non-numeric cell at row {row_no}, column {col!r}: {cell!r}"
                    ) from None
                if not math.isfinite(values[col]):
                    raise IngestError(
                        f"non-finite value at row {row_no}, column {col!r}: {cell!r}"
                    )
            samples.append(Sample(index=row_no, x=values[x_column], y=values[y_column]))
    if not samples:
        raise IngestError(f"no samples in {path}")
    return samples


def write_samples_csv(samples: list[Sample], path: str, x_column: str = "x", y_column: str = "y"):
    """Write samples in the same headered CSV format `csv_ingest` reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([x_column, y_column])
        for s in samples:
            writer.writerow([repr(s.x), repr(s.y)])
