"""Monte Carlo SER harness: paired trials, sweeps, and reference bounds.

One trial draws a channel, a symbol vector, and a unit-variance noise
direction from a counter-derived seed, then runs every configured
detector on the same data (paired comparison). Sweeps aggregate symbol
error counts per (algorithm, iteration) or per grid point into
:class:`SerRecord` rows.

Operating-point convention
--------------------------
Symbols have unit energy; Es/No is referenced to the received per-stream
symbol energy: the noise variance at each antenna is

    sigma_v^2 = 10**(-esno_db/10) * E||h_column||^2

with the expected column power taken analytically from the channel model
(M * sigma_h^2 for the stationary model, the geometry average for the
array model). This keeps a stream's post-combining SNR at Es/No, so the
single-stream AWGN curve is the meaningful floor for every setup.
"""

from __future__ import annotations

import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from . import channel as chan_mod
from .channel import ElaaGeometry, ElaaParams, awgn, elaa_channel, esno_to_sigma_v2, \
    shadowing_cholesky, wssus_channel
from .detectors import DetectorConfig, detect
from .linalg import gram_and_matched_filter
from .modem import make_constellation, random_symbols, slice_symbols

__all__ = [
    "ChannelSpec",
    "SweepSpec",
    "SerRecord",
    "run_trial",
    "ser_vs_iteration",
    "ser_vs_load",
    "ser_vs_esno",
    "awgn_bound",
    "awgn_ser_closed_form",
    "mc_sigma",
    "expected_column_power",
]

LOW_CONFIDENCE_ERRORS = 100


@dataclass(frozen=True)
class ChannelSpec:
    """Which channel family to draw and with what parameters.

    For the array model, ``user_positions=None`` redraws user placement
    uniformly over the aperture each trial; a fixed array pins it.
    """

    model: str = "wssus"
    sigma_h: float = 1.0
    elaa: ElaaParams = field(default_factory=ElaaParams)
    carrier_frequency: float = 3.5e9
    antenna_spacing: Optional[float] = None
    perpendicular_distance: float = 15.0
    user_positions: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.model not in ("wssus", "elaa"):
            raise ValueError(f"unknown channel model {self.model!r}")


@dataclass(frozen=True)
class SweepSpec:
    """One experiment grid: system size, modulation, noise, algorithms."""

    M: int = 256
    N: Union[int, Sequence[int]] = 64
    modulation: int = 16
    esno_db: Union[float, Sequence[float]] = 18.0
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    algorithms: Sequence[DetectorConfig] = ()
    trials: int = 1000
    master_seed: int = 0
    max_iterations: int = 10
    include_awgn_bound: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        names = [cfg.algorithm for cfg in self.algorithms]
        if len(set(names)) != len(names):
            raise ValueError("duplicate algorithm entries in one sweep")
        for n in self.n_list():
            if n < 1 or n > self.M:
                raise ValueError(f"every N must satisfy 1 <= N <= M, got N={n}, M={self.M}")

    def n_list(self) -> List[int]:
        return [int(self.N)] if np.isscalar(self.N) else [int(v) for v in self.N]

    def esno_list(self) -> List[float]:
        return [float(self.esno_db)] if np.isscalar(self.esno_db) \
            else [float(v) for v in self.esno_db]


@dataclass
class SerRecord:
    """One measured SER point."""

    algorithm: str
    channel: str
    M: int
    N: int
    modulation: int
    esno_db: float
    iteration: int
    symbol_errors: int
    symbols_total: int
    ser: float
    wall_time_s: float
    low_confidence: bool = False


def mc_sigma(p: float, n: int) -> float:
    """One Monte Carlo standard deviation of an SER estimate."""
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def awgn_ser_closed_form(modulation: int, esno_db: float) -> float:
    """Exact square-QAM symbol error probability on the scalar AWGN channel."""
    gamma = 10.0 ** (esno_db / 10.0)
    m_axis = math.sqrt(modulation)
    q = 0.5 * math.erfc(math.sqrt(3.0 * gamma / (modulation - 1)) / math.sqrt(2.0))
    p_axis = 2.0 * (1.0 - 1.0 / m_axis) * q
    return 1.0 - (1.0 - p_axis) ** 2


def awgn_bound(modulation: int, esno_db: float, trials: int, seed=None) -> float:
    """Monte Carlo SER of a unit-gain single-stream AWGN channel."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    c = make_constellation(modulation)
    rng = np.random.default_rng(seed)
    x = random_symbols(trials, c, rng)
    v = awgn(trials, esno_to_sigma_v2(esno_db), rng)
    dec = slice_symbols(x.symbols + v, c)
    return float(np.mean(dec.indices != x.indices))


def expected_column_power(spec_channel: ChannelSpec, m: int,
                          geometry: Optional[ElaaGeometry] = None) -> float:
    """Expected squared column norm of the channel under the spec."""
    if spec_channel.model == "wssus":
        return m * spec_channel.sigma_h**2
    if geometry is None:
        raise ValueError("array-model column power needs the realized geometry")
    return chan_mod.elaa_expected_column_power(geometry, spec_channel.elaa)


def _trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((master_seed, trial))


def _geometry_template(spec_channel: ChannelSpec, m: int, n: int) -> Optional[ElaaGeometry]:
    if spec_channel.model != "elaa" or spec_channel.user_positions is None:
        return None
    pos = np.asarray(spec_channel.user_positions, dtype=np.float64)
    if pos.shape != (n,):
        raise ValueError(f"pinned user positions must have length N={n}")
    return ElaaGeometry(service_antenna_count=m, user_positions=pos,
                        carrier_frequency=spec_channel.carrier_frequency,
                        antenna_spacing=spec_channel.antenna_spacing,
                        perpendicular_distance=spec_channel.perpendicular_distance)


def _draw_channel(spec_channel: ChannelSpec, m: int, n: int, rng,
                  geometry: Optional[ElaaGeometry], shadow_chol):
    """Returns (H, expected column power) for one trial."""
    if spec_channel.model == "wssus":
        real = wssus_channel(m, n, spec_channel.sigma_h, rng)
        return real.H, m * spec_channel.sigma_h**2
    if geometry is None:
        spacing = spec_channel.antenna_spacing
        if spacing is None:
            spacing = chan_mod.SPEED_OF_LIGHT / spec_channel.carrier_frequency / 2
        aperture = (m - 1) * spacing
        geometry = ElaaGeometry(service_antenna_count=m,
                                user_positions=rng.uniform(0.0, aperture, size=n),
                                carrier_frequency=spec_channel.carrier_frequency,
                                antenna_spacing=spec_channel.antenna_spacing,
                                perpendicular_distance=spec_channel.perpendicular_distance)
    real = elaa_channel(geometry, spec_channel.elaa, rng, shadow_chol=shadow_chol)
    return real.H, chan_mod.elaa_expected_column_power(geometry, spec_channel.elaa)


def run_trial(spec: SweepSpec, n: int, esno_db: float, trial: int,
              shadow_chol=None) -> Dict[str, np.ndarray]:
    """One paired Monte Carlo trial at a single grid point.

    Draws (H, x, unit-noise) once from the trial counter and the master
    seed, runs every configured detector on the same data, and returns
    per-algorithm arrays of symbol error counts indexed by iteration
    (length 1 for the one-shot detectors). The noise draw is scaled by
    sigma_v, so a sweep over Es/No with the same trial index reuses one
    realization (paired across the sweep as well as across algorithms).
    Detector failures propagate to the caller; nothing is dropped.
    """
    rng = np.random.default_rng(_trial_seed(spec.master_seed, trial))
    c = make_constellation(spec.modulation)
    geometry = _geometry_template(spec.channel, spec.M, n)
    h, col_power = _draw_channel(spec.channel, spec.M, n, rng, geometry, shadow_chol)
    x = random_symbols(n, c, rng)
    w = awgn(spec.M, 1.0, rng)
    sigma_v2 = esno_to_sigma_v2(esno_db) * col_power
    v = w * math.sqrt(sigma_v2)
    y = h @ x.symbols + v
    gram = gram_and_matched_filter(h, y, 0.0)
    out: Dict[str, np.ndarray] = {}
    for cfg in spec.algorithms:
        res = detect(h, y, cfg, c, sigma_v2=sigma_v2, x_true=x.symbols, v=v, gram=gram)
        errs = np.fromiter(
            (int(np.sum(rec.decision.indices != x.indices)) for rec in res.trace),
            dtype=np.int64)
        out[cfg.algorithm] = errs
    return out


def _point_errors(spec: SweepSpec, n: int, esno_db: float, trials: Sequence[int],
                  shadow_chol=None) -> Dict[str, np.ndarray]:
    acc: Dict[str, np.ndarray] = {}
    for trial in trials:
        res = run_trial(spec, n, esno_db, trial, shadow_chol=shadow_chol)
        for name, errs in res.items():
            if name not in acc:
                acc[name] = np.zeros_like(errs)
            acc[name] += errs
    return acc


def _point_errors_star(args):
    return _point_errors(*args)


def _gather_point(spec: SweepSpec, n: int, esno_db: float,
                  workers: int = 1) -> Dict[str, np.ndarray]:
    shadow_chol = None
    if spec.channel.model == "elaa" and spec.channel.elaa.sigma_s > 0 \
            and spec.channel.elaa.shadow_corr_length > 0:
        template = ElaaGeometry(service_antenna_count=spec.M, user_positions=[0.0],
                                carrier_frequency=spec.channel.carrier_frequency,
                                antenna_spacing=spec.channel.antenna_spacing,
                                perpendicular_distance=spec.channel.perpendicular_distance)
        shadow_chol = shadowing_cholesky(template, spec.channel.elaa)
    trial_ids = range(spec.trials)
    if workers <= 1:
        return _point_errors(spec, n, esno_db, trial_ids, shadow_chol)
    chunks = np.array_split(np.asarray(trial_ids), workers * 4)
    acc: Dict[str, np.ndarray] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        jobs = [(spec, n, esno_db, chunk.tolist(), shadow_chol)
                for chunk in chunks if chunk.size]
        for res in pool.map(_point_errors_star, jobs):
            for name, errs in res.items():
                if name not in acc:
                    acc[name] = np.zeros_like(errs)
                acc[name] += errs
    return acc


def _records_for_point(spec: SweepSpec, n: int, esno_db: float,
                       errors: Dict[str, np.ndarray], elapsed: float,
                       final_only: bool) -> List[SerRecord]:
    total = spec.trials * n
    recs: List[SerRecord] = []
    for cfg in spec.algorithms:
        errs = errors[cfg.algorithm]
        its = [len(errs)] if final_only else range(1, len(errs) + 1)
        for it in its:
            e = int(errs[it - 1])
            recs.append(SerRecord(
                algorithm=cfg.algorithm, channel=spec.channel.model, M=spec.M,
                N=n, modulation=spec.modulation, esno_db=esno_db, iteration=it,
                symbol_errors=e, symbols_total=total, ser=e / total,
                wall_time_s=elapsed, low_confidence=e < LOW_CONFIDENCE_ERRORS))
    if spec.include_awgn_bound:
        esno_bits = int.from_bytes(struct.pack("<d", esno_db), "little")
        seed = np.random.SeedSequence((spec.master_seed, 0xA11, n, esno_bits))
        t0 = time.perf_counter()
        ser = awgn_bound(spec.modulation, esno_db, total, seed)
        e = int(round(ser * total))
        recs.append(SerRecord(
            algorithm="awgn_bound", channel=spec.channel.model, M=spec.M, N=n,
            modulation=spec.modulation, esno_db=esno_db, iteration=1,
            symbol_errors=e, symbols_total=total, ser=ser,
            wall_time_s=time.perf_counter() - t0,
            low_confidence=e < LOW_CONFIDENCE_ERRORS))
    return recs


def ser_vs_iteration(spec: SweepSpec, workers: int = 1) -> List[SerRecord]:
    """SER at every iteration for a single (N, Es/No) operating point."""
    n_list, esno_list = spec.n_list(), spec.esno_list()
    if len(n_list) != 1 or len(esno_list) != 1:
        raise ValueError("ser_vs_iteration needs scalar N and Es/No")
    spec = _cap_iterations(spec)
    t0 = time.perf_counter()
    errors = _gather_point(spec, n_list[0], esno_list[0], workers)
    return _records_for_point(spec, n_list[0], esno_list[0], errors,
                              time.perf_counter() - t0, final_only=False)


def ser_vs_load(spec: SweepSpec, workers: int = 1) -> List[SerRecord]:
    """Final-iteration SER against the user count N at fixed M and Es/No."""
    n_list, esno_list = spec.n_list(), spec.esno_list()
    if len(esno_list) != 1:
        raise ValueError("ser_vs_load needs a scalar Es/No")
    if sorted(n_list) != n_list:
        raise ValueError("N grid must be ascending")
    spec = _cap_iterations(spec)
    recs: List[SerRecord] = []
    for n in n_list:
        t0 = time.perf_counter()
        errors = _gather_point(spec, n, esno_list[0], workers)
        recs.extend(_records_for_point(spec, n, esno_list[0], errors,
                                       time.perf_counter() - t0, final_only=True))
    return recs


def ser_vs_esno(spec: SweepSpec, workers: int = 1) -> List[SerRecord]:
    """Final-iteration SER against Es/No at a fixed (M, N)."""
    n_list, esno_list = spec.n_list(), spec.esno_list()
    if len(n_list) != 1:
        raise ValueError("ser_vs_esno needs a scalar N")
    if sorted(esno_list) != esno_list:
        raise ValueError("Es/No grid must be ascending")
    spec = _cap_iterations(spec)
    recs: List[SerRecord] = []
    for esno in esno_list:
        t0 = time.perf_counter()
        errors = _gather_point(spec, n_list[0], esno, workers)
        recs.extend(_records_for_point(spec, n_list[0], esno, errors,
                                       time.perf_counter() - t0, final_only=True))
    return recs


def _cap_iterations(spec: SweepSpec) -> SweepSpec:
    capped = []
    for cfg in spec.algorithms:
        if cfg.iterations > spec.max_iterations:
            cfg = replace(cfg, iterations=spec.max_iterations,
                          stage_a_iterations=min(cfg.stage_a_iterations,
                                                 spec.max_iterations))
        capped.append(cfg)
    return replace(spec, algorithms=tuple(capped))
