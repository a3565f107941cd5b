"""Random channel generation and noise.

Two channel families:

* i.i.d. Rayleigh fading (every entry circularly-symmetric complex
  Gaussian with a common per-entry variance), the classic wide-sense
  stationary model;
* a spatially non-stationary uniform-linear-array model in which every
  (antenna, user) pair sees its own spherical-wave distance, so path loss
  and log-normal shadowing vary across the aperture. Entry (m, n) is

      h[m, n] = eps[m, n] * (alpha / d[m, n]**beta) * g[m, n]

  with ``g`` i.i.d. CN(0, 1), ``d`` the element-to-user distance, and
  ``eps = 10**(chi/20)`` log-normal shadowing whose dB field ``chi`` is a
  Gaussian process along the array with correlation
  ``exp(-separation / shadow_corr_length)`` (independent per user).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DegenerateGeometryError

__all__ = [
    "ElaaGeometry",
    "ElaaParams",
    "ChannelRealization",
    "wssus_channel",
    "elaa_channel",
    "awgn",
    "esno_to_sigma_v2",
    "elaa_path_gain",
    "elaa_expected_column_power",
    "shadowing_cholesky",
    "random_user_positions",
]

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class ElaaParams:
    """Path-loss and shadowing parameters of the non-stationary array model.

    ``sigma_s`` is the shadowing standard deviation in dB;
    ``shadow_corr_length`` (meters) sets the exponential decay of the
    shadowing correlation along the array, 0 meaning independent entries.
    """

    alpha: float = 0.020
    beta: float = 1.765
    sigma_s: float = 6.053
    shadow_corr_length: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.sigma_s < 0 or self.shadow_corr_length < 0:
            raise ValueError("sigma_s and shadow_corr_length must be nonnegative")


@dataclass(frozen=True)
class ElaaGeometry:
    """Uniform linear array plus user placement, all in meters.

    Array elements sit at ``m * antenna_spacing`` for m = 0..M-1;
    ``user_positions`` are along-array coordinates of the users, which all
    stand at ``perpendicular_distance`` from the array line. The default
    spacing is half a wavelength at the carrier frequency.
    """

    service_antenna_count: int
    user_positions: np.ndarray
    carrier_frequency: float = 3.5e9
    antenna_spacing: Optional[float] = None
    perpendicular_distance: float = 15.0

    def __post_init__(self):
        if self.service_antenna_count < 1:
            raise ValueError("need at least one array element")
        if self.carrier_frequency <= 0:
            raise ValueError("carrier frequency must be positive")
        spacing = self.antenna_spacing
        if spacing is None:
            spacing = SPEED_OF_LIGHT / self.carrier_frequency / 2
        if spacing <= 0:
            raise ValueError("antenna spacing must be positive")
        if self.perpendicular_distance < 0:
            raise ValueError("perpendicular distance must be nonnegative")
        object.__setattr__(self, "antenna_spacing", float(spacing))
        object.__setattr__(self, "user_positions",
                           np.atleast_1d(np.asarray(self.user_positions, dtype=np.float64)))

    @property
    def antenna_positions(self) -> np.ndarray:
        return np.arange(self.service_antenna_count) * self.antenna_spacing

    @property
    def aperture(self) -> float:
        return (self.service_antenna_count - 1) * self.antenna_spacing

    @property
    def user_count(self) -> int:
        return int(self.user_positions.shape[0])

    def distances(self) -> np.ndarray:
        """Element-to-user distance matrix, shape (M, N)."""
        along = self.user_positions[np.newaxis, :] - self.antenna_positions[:, np.newaxis]
        return np.sqrt(self.perpendicular_distance**2 + along**2)


@dataclass
class ChannelRealization:
    """One channel draw plus the metadata needed to reproduce it."""

    H: np.ndarray
    model: str
    seed: object = None
    geometry: Optional[ElaaGeometry] = None


def random_user_positions(n: int, geometry_or_aperture, seed=None) -> np.ndarray:
    """Draw n user along-array coordinates uniformly over the aperture."""
    rng = np.random.default_rng(seed)
    aperture = getattr(geometry_or_aperture, "aperture", geometry_or_aperture)
    return rng.uniform(0.0, float(aperture), size=n)


def wssus_channel(m: int, n: int, sigma_h: float = 1.0, seed=None) -> ChannelRealization:
    """i.i.d. Rayleigh channel: entries CN(0, sigma_h^2)."""
    if m < 1 or n < 1:
        raise ValueError("channel dimensions must be positive")
    if sigma_h <= 0:
        raise ValueError("sigma_h must be positive")
    rng = np.random.default_rng(seed)
    h = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
    h *= sigma_h / np.sqrt(2)
    return ChannelRealization(H=h, model="wssus", seed=seed)


def elaa_path_gain(geometry: ElaaGeometry, params: ElaaParams) -> np.ndarray:
    """Deterministic amplitude profile alpha / d**beta, shape (M, N)."""
    d = geometry.distances()
    if np.any(d == 0):
        raise DegenerateGeometryError("a user position coincides with an array element")
    return params.alpha / d**params.beta


def shadowing_cholesky(geometry: ElaaGeometry, params: ElaaParams) -> Optional[np.ndarray]:
    """Cholesky factor of the along-array shadowing correlation, or None.

    None means the shadowing field is white over the array (zero
    correlation length) and can be drawn directly.
    """
    if params.sigma_s == 0 or params.shadow_corr_length == 0:
        return None
    pos = geometry.antenna_positions
    delta = np.abs(pos[:, np.newaxis] - pos[np.newaxis, :])
    corr = np.exp(-delta / params.shadow_corr_length)
    # jitter keeps the factorization safe for very long correlation lengths
    corr[np.diag_indices_from(corr)] += 1e-10
    return np.linalg.cholesky(corr)


def elaa_channel(geometry: ElaaGeometry, params: ElaaParams, seed=None,
                 shadow_chol: Optional[np.ndarray] = None) -> ChannelRealization:
    """Draw one spatially non-stationary channel over the given geometry.

    ``shadow_chol`` may carry a precomputed :func:`shadowing_cholesky`
    factor; pass it when generating many realizations of one geometry.
    Draw order is fixed (shadowing field first, then fast fading), so a
    seed fully determines the realization.
    """
    rng = np.random.default_rng(seed)
    m = geometry.service_antenna_count
    n = geometry.user_count
    gain = elaa_path_gain(geometry, params)
    if params.sigma_s > 0:
        z = rng.standard_normal((m, n))
        if params.shadow_corr_length > 0:
            if shadow_chol is None:
                shadow_chol = shadowing_cholesky(geometry, params)
            z = shadow_chol @ z
        eps = 10.0 ** (params.sigma_s * z / 20.0)
    else:
        eps = 1.0
    g = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)
    return ChannelRealization(H=eps * gain * g, model="elaa", seed=seed,
                              geometry=geometry)


def elaa_expected_column_power(geometry: ElaaGeometry, params: ElaaParams) -> float:
    """E||h_n||^2 averaged over users, from geometry alone.

    The log-normal second moment enters analytically:
    E[eps^2] = exp(2 * (ln10/20 * sigma_s)^2).
    """
    gain = elaa_path_gain(geometry, params)
    eta = np.log(10.0) / 20.0
    e_eps2 = float(np.exp(2.0 * (eta * params.sigma_s) ** 2))
    return float(np.mean(np.sum(gain**2, axis=0)) * e_eps2)


def awgn(m: int, sigma_v2: float, seed=None) -> np.ndarray:
    """Complex white Gaussian noise vector, entries CN(0, sigma_v2)."""
    if m < 1:
        raise ValueError("length must be positive")
    if sigma_v2 < 0:
        raise ValueError("noise variance must be nonnegative")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return v * np.sqrt(sigma_v2 / 2)


def esno_to_sigma_v2(esno_db: float) -> float:
    """Noise variance for a given Es/No in dB under unit symbol energy."""
    return float(10.0 ** (-esno_db / 10.0))
