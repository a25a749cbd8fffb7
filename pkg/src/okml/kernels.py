"""Reproducing kernels and the kernel dictionary.

A dictionary is an ordered list of kernel specs; the position of a kernel in
the list is its identity for the lifetime of a run.  Only the Gaussian kind is
shipped: k(x, t) = exp(-(x - t)^2 / (2 sigma^2)), which is symmetric, bounded
by 1 and equals 1 exactly at x == t.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


class KernelKind(enum.Enum):
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """One reproducing kernel: its kind and width (same units as the input x)."""

    kind: KernelKind = KernelKind.GAUSSIAN
    width: float = 1.0

    def __post_init__(self):
        if not (self.width > 0.0):
            raise ConfigurationError(f"kernel width must be > 0, got {self.width}")


@dataclass(frozen=True)
class Dictionary:
    """Ordered, fixed collection of kernels; index p is an identity."""

    kernels: tuple[KernelSpec, ...]

    def __post_init__(self):
        if len(self.kernels) < 1:
            raise ConfigurationError("dictionary needs at least one kernel")

    def __len__(self) -> int:
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)

    def widths(self) -> np.ndarray:
        return np.array([k.width for k in self.kernels])


def eval_kernel(spec: KernelSpec, x: float, t: float) -> float:
    """Pointwise kernel value k(x, t); in (0, 1] for the Gaussian kind."""
    return float(kernel_column(spec, np.asarray([x], dtype=float), t)[0])


def kernel_column(spec: KernelSpec, xs: np.ndarray, t: float) -> np.ndarray:
    """Vector of kernel values [k(x_i, t)] for a batch of left arguments.

    Single code path for scalar and vector evaluation so cached quantities
    (Gram matrices, norms) agree bitwise with spot evaluations.
    """
    if spec.kind is not KernelKind.GAUSSIAN:
        raise ConfigurationError(f"unsupported kernel kind: {spec.kind}")
    d = np.asarray(xs, dtype=float) - t
    return np.exp(-(d * d) / (2.0 * spec.width * spec.width))


def gram_matrix(spec: KernelSpec, xs: np.ndarray) -> np.ndarray:
    """Full Gram matrix K[i, j] = k(x_i, x_j) of a set of points."""
    xs = np.asarray(xs, dtype=float)
    d = xs[:, None] - xs[None, :]
    return np.exp(-(d * d) / (2.0 * spec.width * spec.width))


def linspace_dictionary(count: int, min_width: float, max_width: float) -> Dictionary:
    """Gaussian dictionary with widths linearly spaced over [min_width, max_width].

    Endpoints are included; count == 1 yields [min_width].
    """
    if count < 1:
        raise ConfigurationError(f"kernel count must be >= 1, got {count}")
    if not (0.0 < min_width <= max_width):
        raise ConfigurationError(
            f"need 0 < min_width <= max_width, got ({min_width}, {max_width})"
        )
    widths = np.linspace(min_width, max_width, count)
    return Dictionary(tuple(KernelSpec(KernelKind.GAUSSIAN, float(w)) for w in widths))
