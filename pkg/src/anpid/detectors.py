"""Detection algorithms for y = H x + v with x drawn from a QAM alphabet.

Exact baselines (ZF/LMMSE via a direct solve, exhaustive maximum
likelihood, and the per-stream matched-filter bound) plus a family of
iterative detectors built on stationary splittings of the Gram matrix
A = H^H H + rho I:

* plain stationary iterations (Jacobi / Gauss-Seidel / SSOR),
      s_t = s_{t-1} + M^-1 (b - A s_{t-1});
* damped hard-decision variants (``*_dd``) that slice each estimate and
  feed a convex combination back in,
      s_t = d_{t-1} + M^-1 (b - A d_{t-1}),
      x_t = slice(s_t),
      d_t = omega * d_{t-1} + (1 - omega) * x_t,
  with the damping factor chosen to minimize ||y - H d_t||;
* normalized variants (``ngs_dd``/``nssor_dd``) that rescale the update by
  U = diag(M^-1 A) so each stream sees unit signal gain before slicing;
* the two-stage detectors ``anpid_gs``/``anpid_ssor``: a normalized
  GS/SSOR stage for fast convergence, then a Jacobi stage for accuracy,
  each with its own frozen damping factor.

Multiply accounting
-------------------
Every :class:`DetectorResult` tallies complex multiplies per iteration so
tests can hold the kernels to the tabulated per-iteration budgets
(:func:`multiply_budget`). Counts are structural: a dense (P x Q) product
charges P*Q, a triangular solve N(N+1)/2, a diagonal scale or length-L dot
charges its length; slicing charges nothing. Work shared by every
detector and done once per call (forming A and b, the diagonal/triangular
split, the normalization diagonal U) is preprocessing and lands in
``setup_multiply_count``, mirroring how the per-iteration budgets are
tabulated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import linalg
from .exceptions import (
    DegenerateColumnError,
    DegenerateFirstDecisionError,
    DegenerateNormalizationError,
    IntractableError,
    NoBudgetError,
    ShapeError,
    SingularPreconditionerError,
)
from .modem import Constellation, SymbolVector, slice_symbols

__all__ = [
    "ALGORITHMS",
    "DAMPING_MODES",
    "DetectorConfig",
    "DetectorResult",
    "IterationRecord",
    "Preconditioner",
    "make_preconditioner",
    "normalization_matrix",
    "zf_lmmse",
    "mlsd_bruteforce",
    "mfb_bound",
    "si_iterate",
    "dd_iterate",
    "anpid",
    "optimal_damping",
    "fixed_damping",
    "multiply_budget",
    "detect",
]

ALGORITHMS = (
    "zf", "lmmse", "mlsd", "mfb",
    "jacobi", "gs", "ssor",
    "jacobi_dd", "gs_dd", "ssor_dd", "ngs_dd", "nssor_dd",
    "anpid_gs", "anpid_ssor",
)

DAMPING_MODES = ("per_iteration", "fixed")

MLSD_CANDIDATE_GUARD = 2**20

_SI_KINDS = ("jacobi", "gs", "ssor")


@dataclass(frozen=True)
class DetectorConfig:
    """Algorithm selection plus iteration/damping/regularization knobs.

    ``rho=None`` means "resolve at run time" to sigma_v^2 / sigma_x^2
    (the LMMSE value; zero for ``zf``). ``stage_a_iterations`` only
    matters for the two-stage algorithms.
    """

    algorithm: str
    iterations: int = 10
    stage_a_iterations: int = 3
    damping_mode: str = "fixed"
    rho: Optional[float] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.stage_a_iterations <= self.iterations:
            raise ValueError("need 0 <= stage_a_iterations <= iterations")
        if self.damping_mode not in DAMPING_MODES:
            raise ValueError(f"unknown damping mode {self.damping_mode!r}")
        if self.rho is not None and self.rho < 0:
            raise ValueError("rho must be nonnegative")


@dataclass
class IterationRecord:
    """State after one iteration: estimate, decision, damping memory."""

    estimate: Optional[np.ndarray]
    decision: SymbolVector
    damping_vector: Optional[np.ndarray]
    damping_factor: Optional[float]
    multiplies: int


@dataclass
class DetectorResult:
    decision: SymbolVector
    trace: List[IterationRecord] = field(default_factory=list)
    multiply_count: int = 0
    setup_multiply_count: int = 0


class _Tally:
    __slots__ = ("n",)

    def __init__(self):
        self.n = 0

    def add(self, k: int):
        self.n += int(k)


@dataclass
class Preconditioner:
    """A stationary splitting of A, applied through triangular solves.

    ``kind`` selects M: the diagonal D, the lower triangle D+L, or the
    SSOR product (D+L) D^-1 (D+L)^H. When ``normalizer`` is set the
    application realizes (M U)^-1 with U = diag(M^-1 A), which makes
    (M U)^-1 A have a unit diagonal.
    """

    kind: str
    diag: np.ndarray
    lower: np.ndarray
    normalizer: Optional[np.ndarray] = None
    setup_multiplies: int = 0

    @property
    def n(self) -> int:
        return int(self.diag.shape[0])

    def apply_inverse(self, r: np.ndarray, tally: Optional[_Tally] = None) -> np.ndarray:
        n = self.n
        if self.kind == "jacobi":
            z = r / self.diag
            if tally:
                tally.add(n)
        elif self.kind == "gs":
            z = linalg.lower_triangular_solve(self.lower, r)
            if tally:
                tally.add(n * (n + 1) // 2)
        else:  # ssor
            z = linalg.lower_triangular_solve(self.lower, r)
            z = self.diag * z
            z = linalg.conj_transpose_solve(self.lower, z)
            if tally:
                tally.add(n * (n + 1) + n)
        if self.normalizer is not None:
            z = z / self.normalizer
            if tally:
                tally.add(n)
        return z

    def matrix(self) -> np.ndarray:
        """Materialize M (tests and invariants only; never used to solve)."""
        if self.kind == "jacobi":
            return np.diag(self.diag.astype(np.complex128))
        if self.kind == "gs":
            return self.lower.copy()
        return (self.lower / self.diag[np.newaxis, :]) @ self.lower.conj().T


def normalization_matrix(a: np.ndarray, precond: Preconditioner) -> np.ndarray:
    """Diagonal of M^-1 A for the given splitting, as a 1-D complex array.

    The Jacobi splitting is self-normalized: every diagonal entry of
    D^-1 A equals a_ii / a_ii = 1 exactly. The triangular kinds go
    through column solves of the triangular factor.
    """
    if precond.kind == "jacobi":
        # the Hermitian diagonal is real, so a_ii / d_ii is exactly 1
        u = precond.diag / precond.diag.astype(np.complex128)
    elif precond.kind == "gs":
        u = np.diag(linalg.lower_triangular_solve(precond.lower, a)).copy()
    else:
        z = linalg.lower_triangular_solve(precond.lower, a)
        z = precond.diag[:, np.newaxis] * z
        u = np.diag(linalg.conj_transpose_solve(precond.lower, z)).copy()
    if np.any(u == 0):
        raise DegenerateNormalizationError("diag(M^-1 A) has a zero entry")
    return u


def make_preconditioner(a: np.ndarray, kind: str, normalized: bool = False) -> Preconditioner:
    """Split A and (optionally) attach the normalization diagonal."""
    if kind not in _SI_KINDS:
        raise ValueError(f"unknown preconditioner kind {kind!r}")
    d, l = linalg.dl_split(a)
    if np.any(d == 0):
        raise SingularPreconditionerError("Gram matrix has a zero diagonal entry")
    n = d.shape[0]
    lower = l + np.diag(d.astype(np.complex128))
    setup = n * n  # forming the split / triangle copy
    pre = Preconditioner(kind=kind, diag=d, lower=lower)
    if normalized:
        pre.normalizer = normalization_matrix(a, pre)
        # N column solves of the triangular factor (SSOR does two sweeps)
        if kind == "gs":
            setup += n * n * (n + 1) // 2
        elif kind == "ssor":
            setup += n * (n * (n + 1) + n)
    pre.setup_multiplies = setup
    return pre


def _optimal_damping(h, y, x, d_prev, tally: Optional[_Tally] = None) -> float:
    """argmin_w ||tau - w nu||^2 with tau = y - Hx, nu = H d_prev - H x."""
    m, n = h.shape
    hx = h @ x
    tau = y - hx
    nu = h @ d_prev - hx
    if tally:
        tally.add(2 * m * n + 2 * m)
    den = float(np.vdot(nu, nu).real)
    if den == 0.0:
        return 0.0
    return float(np.vdot(nu, tau).real / den)


def optimal_damping(h: np.ndarray, y: np.ndarray, x_t: np.ndarray,
                    d_prev: np.ndarray) -> float:
    """Damping factor minimizing ||y - H (w d_prev + (1-w) x_t)|| over w.

    Returns 0 in the degenerate case H d_prev == H x_t, where the memory
    carries no new direction.
    """
    return _optimal_damping(np.asarray(h), np.asarray(y), np.asarray(x_t),
                            np.asarray(d_prev))


def _fixed_damping(h, y, x1, tally: Optional[_Tally] = None) -> float:
    m, n = h.shape
    hx = h @ x1
    if tally:
        tally.add(m * n + 2 * m)
    den = float(np.vdot(hx, hx).real)
    if den == 0.0:
        raise DegenerateFirstDecisionError("first decision maps to the zero vector")
    return 1.0 - float(np.vdot(y, hx).real) / den


def fixed_damping(h: np.ndarray, y: np.ndarray, x1: np.ndarray) -> float:
    """One-shot damping factor 1 - Re(y^H H x1) / ||H x1||^2.

    Equals :func:`optimal_damping` evaluated at a zero damping vector; the
    damped iterations freeze it after their first decision.
    """
    return _fixed_damping(np.asarray(h), np.asarray(y), np.asarray(x1))


def _check_system(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"system matrix must be square, got {a.shape}")
    if b.shape != (a.shape[0],):
        raise ShapeError(f"rhs shape {b.shape} does not match {a.shape}")
    return a, b


def si_iterate(a: np.ndarray, b: np.ndarray, precond: Preconditioner,
               c: Constellation, iterations: int = 10,
               s0: Optional[np.ndarray] = None) -> DetectorResult:
    """Plain stationary iteration s_t = s_{t-1} + M^-1 (b - A s_{t-1}).

    The trace records the hard decision of every iterate; the result's
    decision is the slice of the final iterate.
    """
    a, b = _check_system(a, b)
    n = a.shape[0]
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    s = np.zeros(n, dtype=np.complex128) if s0 is None else np.asarray(s0, dtype=np.complex128).copy()
    s_is_zero = s0 is None
    trace: List[IterationRecord] = []
    total = _Tally()
    for t in range(1, iterations + 1):
        tally = _Tally()
        if s_is_zero:
            r = b
            s_is_zero = False
        else:
            r = b - a @ s
            tally.add(n * n)
        s = s + precond.apply_inverse(r, tally)
        x = slice_symbols(s, c)
        trace.append(IterationRecord(estimate=s.copy(), decision=x,
                                     damping_vector=None, damping_factor=None,
                                     multiplies=tally.n))
        total.add(tally.n)
    return DetectorResult(decision=trace[-1].decision, trace=trace,
                          multiply_count=total.n,
                          setup_multiply_count=precond.setup_multiplies)


def dd_iterate(a: np.ndarray, b: np.ndarray, h: np.ndarray, y: np.ndarray,
               precond: Preconditioner, c: Constellation, iterations: int = 10,
               damping_mode: str = "fixed") -> DetectorResult:
    """Damped hard-decision iteration around the given splitting.

    Per iteration: estimate from the damping vector, slice, then blend
    decision and memory with the distance-minimizing damping factor --
    recomputed every iteration (``per_iteration``) or frozen at its first
    value (``fixed``). Starts from a zero damping vector.
    """
    a, b = _check_system(a, b)
    if damping_mode not in DAMPING_MODES:
        raise ValueError(f"unknown damping mode {damping_mode!r}")
    n = a.shape[0]
    d = np.zeros(n, dtype=np.complex128)
    d_is_zero = True
    omega_star: Optional[float] = None
    trace: List[IterationRecord] = []
    total = _Tally()
    for t in range(1, iterations + 1):
        tally = _Tally()
        if d_is_zero:
            r = b
        else:
            r = b - a @ d
            tally.add(n * n)
        s = d + precond.apply_inverse(r, tally)
        x = slice_symbols(s, c)
        if damping_mode == "per_iteration":
            omega = _optimal_damping(h, y, x.symbols, d, tally)
        else:
            if omega_star is None:
                omega_star = _optimal_damping(h, y, x.symbols, d, tally)
            omega = omega_star
        d = omega * d + (1.0 - omega) * x.symbols
        d_is_zero = False
        tally.add(2 * n)
        trace.append(IterationRecord(estimate=s.copy(), decision=x,
                                     damping_vector=d.copy(), damping_factor=omega,
                                     multiplies=tally.n))
        total.add(tally.n)
    return DetectorResult(decision=trace[-1].decision, trace=trace,
                          multiply_count=total.n,
                          setup_multiply_count=precond.setup_multiplies)


def anpid(a: np.ndarray, b: np.ndarray, h: np.ndarray, y: np.ndarray,
          c: Constellation, variant: str = "gs", stage_a_iterations: int = 3,
          stage_b_iterations: int = 7) -> DetectorResult:
    """Two-stage damped detector: normalized GS/SSOR, then Jacobi.

    Stage A iterates the normalized splitting (fast convergence); stage B
    continues the same damping vector with the Jacobi splitting (accurate
    fixed point). Both damping factors are frozen from first decisions:
    stage A's from its own first slice, stage B's from the slice of the
    plain Jacobi first step D^-1 b.
    """
    a, b = _check_system(a, b)
    if variant not in ("gs", "ssor"):
        raise ValueError(f"variant must be 'gs' or 'ssor', got {variant!r}")
    if stage_a_iterations < 1:
        raise ValueError("stage A needs at least one iteration")
    if stage_b_iterations < 0:
        raise ValueError("stage B length must be nonnegative")
    n = a.shape[0]
    pre_a = make_preconditioner(a, variant, normalized=True)
    pre_b = make_preconditioner(a, "jacobi")
    setup = pre_a.setup_multiplies + n  # jacobi split shares the diagonal
    trace: List[IterationRecord] = []
    total = _Tally()

    # first iteration: stage-A step, then both frozen damping factors
    tally = _Tally()
    s = pre_a.apply_inverse(b, tally)
    x = slice_symbols(s, c)
    zeta_a = _fixed_damping(h, y, x.symbols, tally)
    x1_jac = slice_symbols(b / pre_b.diag, c)
    tally.add(n)
    zeta_b = _fixed_damping(h, y, x1_jac.symbols, tally)
    d = zeta_a * np.zeros(n, dtype=np.complex128) + (1.0 - zeta_a) * x.symbols
    tally.add(2 * n)
    trace.append(IterationRecord(estimate=s.copy(), decision=x,
                                 damping_vector=d.copy(), damping_factor=zeta_a,
                                 multiplies=tally.n))
    total.add(tally.n)

    for t in range(2, stage_a_iterations + stage_b_iterations + 1):
        tally = _Tally()
        r = b - a @ d
        tally.add(n * n)
        if t <= stage_a_iterations:
            pre, zeta = pre_a, zeta_a
        else:
            pre, zeta = pre_b, zeta_b
        s = d + pre.apply_inverse(r, tally)
        x = slice_symbols(s, c)
        d = zeta * d + (1.0 - zeta) * x.symbols
        tally.add(2 * n)
        trace.append(IterationRecord(estimate=s.copy(), decision=x,
                                     damping_vector=d.copy(), damping_factor=zeta,
                                     multiplies=tally.n))
        total.add(tally.n)
    return DetectorResult(decision=trace[-1].decision, trace=trace,
                          multiply_count=total.n, setup_multiply_count=setup)


def zf_lmmse(h: np.ndarray, y: np.ndarray, rho: float, c: Constellation) -> DetectorResult:
    """Exact linear detector: slice of (H^H H + rho I)^-1 H^H y.

    rho = 0 is zero-forcing; rho = sigma_v^2 / sigma_x^2 is LMMSE.
    """
    a, b = linalg.gram_and_matched_filter(h, y, rho)
    n = a.shape[0]
    m = h.shape[0]
    s = linalg.exact_solve(a, b)
    x = slice_symbols(s, c)
    # Cholesky ~ N^3/3 plus two triangular solves; Gram formation is setup
    charge = n**3 // 3 + n * (n + 1)
    rec = IterationRecord(estimate=s, decision=x, damping_vector=None,
                          damping_factor=None, multiplies=charge)
    return DetectorResult(decision=x, trace=[rec], multiply_count=charge,
                          setup_multiply_count=m * n * n + m * n)


def mlsd_bruteforce(h: np.ndarray, y: np.ndarray, c: Constellation) -> SymbolVector:
    """Exhaustive minimizer of ||y - H x||^2 over the whole alphabet grid.

    Guarded at |alphabet|^N <= 2**20 candidates. Candidates are enumerated
    in mixed-radix index order (first stream most significant); the first
    minimizer wins, which fixes tie-breaking.
    """
    h = np.asarray(h, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if h.ndim != 2 or y.shape != (h.shape[0],):
        raise ShapeError("mlsd needs H (M x N) and y of length M")
    m, n = h.shape
    total = c.order**n
    if total > MLSD_CANDIDATE_GUARD:
        raise IntractableError(
            f"{c.order}^{n} = {total} candidates exceeds the guard {MLSD_CANDIDATE_GUARD}")
    best_val = np.inf
    best_idx: Optional[np.ndarray] = None
    chunk = 1 << 14
    radix = c.order ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total), dtype=np.int64)
        idx = (flat[:, np.newaxis] // radix) % c.order
        resid = y[np.newaxis, :] - c.points[idx] @ h.T
        val = np.einsum("km,km->k", resid.real, resid.real) \
            + np.einsum("km,km->k", resid.imag, resid.imag)
        k = int(np.argmin(val))
        if val[k] < best_val:
            best_val = float(val[k])
            best_idx = idx[k]
    return SymbolVector(symbols=c.points[best_idx], indices=best_idx)


def mfb_bound(h: np.ndarray, x_true: np.ndarray, v: np.ndarray,
              c: Constellation) -> SymbolVector:
    """Matched-filter bound decision: interference assumed removed.

    Each stream sees only its maximum-ratio-combined noise,
    slice(x_true + D^-1 H^H v) with D = diag(H^H H).
    """
    h = np.asarray(h, dtype=np.complex128)
    x_true = np.asarray(x_true, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if h.ndim != 2 or x_true.shape != (h.shape[1],) or v.shape != (h.shape[0],):
        raise ShapeError("mfb_bound needs H (M x N), x of length N, v of length M")
    col_power = np.sum(np.abs(h) ** 2, axis=0)
    if np.any(col_power == 0):
        raise DegenerateColumnError("channel has an all-zero column")
    return slice_symbols(x_true + (h.conj().T @ v) / col_power, c)


def multiply_budget(algorithm: str, m: int, n: int, t: int,
                    stage_a_iterations: Optional[int] = None) -> float:
    """Tabulated per-iteration complex-multiply budget of an algorithm.

    Budgets cover the iteration kernels under fixed damping; preprocessing
    common to all detectors (A, b, splits, normalization diagonal) is not
    part of them. The two-stage algorithms need ``stage_a_iterations`` to
    know which stage iteration ``t`` falls in.
    """
    if t < 1:
        raise ValueError("iteration index starts at 1")
    n2 = float(n) * n
    if algorithm == "jacobi":
        return float(n) if t == 1 else n2
    if algorithm == "gs":
        return 0.5 * n2 if t == 1 else 1.5 * n2
    if algorithm == "ssor":
        return n2 if t == 1 else 2.0 * n2
    if algorithm == "jacobi_dd":
        return 2.0 * m * n if t == 1 else n2
    if algorithm in ("anpid_gs", "anpid_ssor"):
        if stage_a_iterations is None:
            raise ValueError("two-stage budgets need stage_a_iterations")
        first = (0.5 * n2 if algorithm == "anpid_gs" else n2) + 2.0 * m * n
        stage_a = 1.5 * n2 if algorithm == "anpid_gs" else 2.0 * n2
        if t == 1:
            return first
        return stage_a if t <= stage_a_iterations else n2
    raise NoBudgetError(f"no complexity budget tabulated for {algorithm!r}")


def detect(h: np.ndarray, y: np.ndarray, config: DetectorConfig, c: Constellation,
           sigma_v2: float = 0.0, x_true: Optional[np.ndarray] = None,
           v: Optional[np.ndarray] = None, gram=None) -> DetectorResult:
    """Run one detector described by ``config`` on a single receive vector.

    ``sigma_v2`` resolves the default regularization (rho = sigma_v^2
    under unit symbol energy). The oracle-style ``mfb`` algorithm needs
    the transmitted vector and noise draw. ``gram`` may carry a
    precomputed ``(H^H H, H^H y)`` pair (without regularization) shared
    across detectors of one trial.
    """
    alg = config.algorithm
    if alg == "mlsd":
        sym = mlsd_bruteforce(h, y, c)
        rec = IterationRecord(estimate=None, decision=sym, damping_vector=None,
                              damping_factor=None, multiplies=0)
        return DetectorResult(decision=sym, trace=[rec])
    if alg == "mfb":
        if x_true is None or v is None:
            raise ValueError("mfb needs the transmitted vector and the noise draw")
        sym = mfb_bound(h, x_true, v, c)
        rec = IterationRecord(estimate=None, decision=sym, damping_vector=None,
                              damping_factor=None, multiplies=0)
        return DetectorResult(decision=sym, trace=[rec])

    if alg == "zf":
        rho = 0.0 if config.rho is None else config.rho
    else:
        rho = float(sigma_v2) if config.rho is None else config.rho
    if alg in ("zf", "lmmse"):
        return zf_lmmse(h, y, rho, c)

    if gram is None:
        a0, b = linalg.gram_and_matched_filter(h, y, 0.0)
    else:
        a0, b = gram
    a = a0 + rho * np.eye(a0.shape[0]) if rho else a0

    if alg in _SI_KINDS:
        pre = make_preconditioner(a, alg)
        return si_iterate(a, b, pre, c, iterations=config.iterations)
    dd_kinds = {"jacobi_dd": ("jacobi", False), "gs_dd": ("gs", False),
                "ssor_dd": ("ssor", False), "ngs_dd": ("gs", True),
                "nssor_dd": ("ssor", True)}
    if alg in dd_kinds:
        kind, normalized = dd_kinds[alg]
        pre = make_preconditioner(a, kind, normalized=normalized)
        return dd_iterate(a, b, h, y, pre, c, iterations=config.iterations,
                          damping_mode=config.damping_mode)
    # anpid_gs / anpid_ssor
    variant = alg.removeprefix("anpid_")
    if config.stage_a_iterations < 1:
        raise ValueError("two-stage detectors need stage_a_iterations >= 1")
    return anpid(a, b, h, y, c, variant=variant,
                 stage_a_iterations=config.stage_a_iterations,
                 stage_b_iterations=config.iterations - config.stage_a_iterations)
