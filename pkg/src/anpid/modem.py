"""Square QAM constellations, random symbols, and the hard-decision slicer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import BadOrderError, NonFiniteInputError

__all__ = ["Constellation", "SymbolVector", "make_constellation", "slice_symbols",
           "random_symbols"]

SUPPORTED_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class Constellation:
    """A unit-average-energy square QAM alphabet.

    ``points`` are sorted lexicographically by (real, imag); ``labels[k]``
    is the Gray-coded bit label of ``points[k]`` (reflected binary per
    axis, real-axis bits high). Average symbol energy is 1 by construction.
    """

    order: int
    points: np.ndarray
    labels: np.ndarray
    bits_per_symbol: int

    def __len__(self) -> int:
        return self.order


@dataclass(frozen=True)
class SymbolVector:
    """Hard symbols together with their constellation indices."""

    symbols: np.ndarray
    indices: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.shape[0])


def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


def make_constellation(order: int) -> Constellation:
    """Build a square QAM constellation with unit average symbol energy."""
    if order not in SUPPORTED_ORDERS:
        raise BadOrderError(f"unsupported order {order}; choose one of {SUPPORTED_ORDERS}")
    m = int(round(np.sqrt(order)))
    levels = np.arange(-m + 1, m, 2, dtype=np.float64)
    re, im = np.meshgrid(levels, levels, indexing="ij")
    points = (re + 1j * im).ravel()
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    # index k = re_idx * m + im_idx, so points are already (real, imag)-sorted
    bits_axis = int(round(np.log2(m)))
    re_idx, im_idx = np.divmod(np.arange(order), m)
    labels = (_gray(re_idx) << bits_axis) | _gray(im_idx)
    return Constellation(order=order, points=points,
                         labels=labels.astype(np.uint16),
                         bits_per_symbol=2 * bits_axis)


def slice_symbols(s: np.ndarray, c: Constellation) -> SymbolVector:
    """Per-entry nearest constellation point (minimum Euclidean distance).

    Ties on decision boundaries go to the point with the smaller real
    part, then the smaller imaginary part, so the map is deterministic.
    Idempotent on exact constellation points.
    """
    s = np.asarray(s, dtype=np.complex128)
    if not np.all(np.isfinite(s)):
        raise NonFiniteInputError("slicer input contains NaN or Inf")
    diff = s.reshape(-1, 1) - c.points[np.newaxis, :]
    d2 = diff.real**2 + diff.imag**2
    # argmin returns the first minimizer; points are (real, imag)-sorted,
    # which realizes the tie-break.
    idx = np.argmin(d2, axis=1)
    return SymbolVector(symbols=c.points[idx], indices=idx)


def random_symbols(n: int, c: Constellation, seed=None) -> SymbolVector:
    """Draw ``n`` i.i.d. uniform constellation symbols, reproducibly."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, c.order, size=n)
    return SymbolVector(symbols=c.points[idx], indices=idx)
