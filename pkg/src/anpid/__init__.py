"""Iterative large-MIMO symbol detection on the Gram system A s = b.

The package bundles the detector family (exact linear baselines,
exhaustive maximum likelihood, matched-filter bound, plain and damped
stationary iterations, normalized variants and the two-stage
``anpid_gs``/``anpid_ssor`` detectors), the channel models they are
evaluated on, and a reproducible Monte Carlo SER harness with a small
CLI around it.
"""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    ElaaGeometry,
    ElaaParams,
    awgn,
    elaa_channel,
    elaa_expected_column_power,
    elaa_path_gain,
    esno_to_sigma_v2,
    random_user_positions,
    shadowing_cholesky,
    wssus_channel,
)
from .detectors import (
    ALGORITHMS,
    DetectorConfig,
    DetectorResult,
    IterationRecord,
    Preconditioner,
    anpid,
    dd_iterate,
    detect,
    fixed_damping,
    make_preconditioner,
    mfb_bound,
    mlsd_bruteforce,
    multiply_budget,
    normalization_matrix,
    optimal_damping,
    si_iterate,
    zf_lmmse,
)
from .linalg import (
    conj_transpose_solve,
    dl_split,
    exact_solve,
    gram_and_matched_filter,
    is_hermitian,
    lower_triangular_solve,
)
from .modem import Constellation, SymbolVector, make_constellation, random_symbols, \
    slice_symbols
from .sim import (
    ChannelSpec,
    SerRecord,
    SweepSpec,
    awgn_bound,
    awgn_ser_closed_form,
    expected_column_power,
    mc_sigma,
    run_trial,
    ser_vs_esno,
    ser_vs_iteration,
    ser_vs_load,
)

__all__ = [
    "__version__",
    # linalg
    "gram_and_matched_filter", "dl_split", "lower_triangular_solve",
    "conj_transpose_solve", "exact_solve", "is_hermitian",
    # modem
    "Constellation", "SymbolVector", "make_constellation", "slice_symbols",
    "random_symbols",
    # channel
    "ChannelRealization", "ElaaGeometry", "ElaaParams", "awgn", "elaa_channel",
    "elaa_expected_column_power", "elaa_path_gain", "esno_to_sigma_v2",
    "random_user_positions", "shadowing_cholesky", "wssus_channel",
    # detectors
    "ALGORITHMS", "DetectorConfig", "DetectorResult", "IterationRecord",
    "Preconditioner", "anpid", "dd_iterate", "detect", "fixed_damping",
    "make_preconditioner", "mfb_bound", "mlsd_bruteforce", "multiply_budget",
    "normalization_matrix", "optimal_damping", "si_iterate", "zf_lmmse",
    # sim
    "ChannelSpec", "SerRecord", "SweepSpec", "awgn_bound", "awgn_ser_closed_form",
    "expected_column_power", "mc_sigma", "run_trial", "ser_vs_esno",
    "ser_vs_iteration", "ser_vs_load",
]
