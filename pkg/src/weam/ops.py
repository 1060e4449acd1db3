"""The three memory operations and association chains.

* register: cell-wise Hebbian increment of the cue's (column, row) cells.
* recognize: relaxed material implication of the cue against the register.
  A column passes when the cue's cell is occupied (weight > 0) and its
  weight reaches iota times the column's mean nonzero weight; the cue is
  accepted when at most xi columns fail and the cue weight rho reaches
  kappa times the register-wide mean weight.
* retrieve: per column, sample a row from the column distribution
  multiplied by a Gaussian kernel of std sigma * m centered on the cue row.
  Undefined (rejected) when recognition fails.

Retrieval randomness is drawn from a counter-based generator keyed on
(seed, nonce); column i always consumes the i-th variate, so results do not
depend on how per-column work is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .amr import Amr, WEIGHT_MAX


@dataclass(frozen=True)
class RecognitionParams:
    iota: float = 0.0   # cell weight threshold factor
    kappa: float = 0.0  # cue strength factor
    xi: int = 0         # columns allowed to fail the implication

    def __post_init__(self):
        if not (np.isfinite(self.iota) and self.iota >= 0):
            raise ValueError(f"iota must be finite and >= 0, got {self.iota}")
        if not (np.isfinite(self.kappa) and self.kappa >= 0):
            raise ValueError(f"kappa must be finite and >= 0, got {self.kappa}")
        if int(self.xi) < 0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")
        object.__setattr__(self, "xi", int(self.xi))


@dataclass(frozen=True)
class RetrievalParams:
    sigma: float = 0.025  # kernel std is sigma * m rows; 0 means point mass
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")


@dataclass
class RecognitionReport:
    accepted: bool
    failed_columns: int
    rho: float               # mean cue-cell weight over all columns
    omega_bar: float         # mean of per-column mean nonzero weights
    passes: np.ndarray       # per-column implication flags


@dataclass
class RetrievalResult:
    """Outcome of one retrieval; ``pattern is None`` means rejected."""

    pattern: np.ndarray | None
    recognition: RecognitionReport | None
    fallback_columns: np.ndarray = field(
        default_factory=lambda: np.empty(0, dtype=np.int64))
    pinned_columns: np.ndarray = field(
        default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def rejected(self) -> bool:
        return self.pattern is None


def _check_pattern(amr: Amr, pattern) -> np.ndarray:
    p = np.asarray(pattern)
    if not np.issubdtype(p.dtype, np.integer):
        raise ValueError("patterns must be integer row indices")
    if p.ndim != 1 or p.size != amr.n:
        raise ValueError(f"pattern width {p.shape} != register columns {amr.n}")
    if p.min() < 0 or p.max() >= amr.m:
        raise ValueError(f"pattern rows out of range [0, {amr.m - 1}]")
    return p.astype(np.int64)


def register(amr: Amr, pattern) -> Amr:
    """Add one pattern to the register in place; increments saturate."""
    p = _check_pattern(amr, pattern)
    cols = np.arange(amr.n)
    cells = amr.weights[cols, p]
    amr.weights[cols, p] = cells + (cells < WEIGHT_MAX)
    amr.total_registrations += 1
    return amr


def register_batch(amr: Amr, patterns) -> Amr:
    """Add many patterns at once (rows of ``patterns``)."""
    pats = np.asarray(patterns)
    if pats.ndim != 2 or pats.shape[1] != amr.n:
        raise ValueError(f"pattern batch shape {pats.shape} != (k, {amr.n})")
    if pats.size and (pats.min() < 0 or pats.max() >= amr.m):
        raise ValueError(f"pattern rows out of range [0, {amr.m - 1}]")
    increments = np.zeros((amr.n, amr.m), dtype=np.int64)
    cols = np.arange(amr.n)
    for row in pats.astype(np.int64):
        increments[cols, row] += 1
    amr.weights = np.minimum(
        amr.weights.astype(np.int64) + increments, WEIGHT_MAX
    ).astype(amr.weights.dtype)
    amr.total_registrations += pats.shape[0]
    return amr


def recognize(amr: Amr, pattern, params: RecognitionParams = RecognitionParams()
              ) -> RecognitionReport:
    p = _check_pattern(amr, pattern)
    if params.xi > amr.n:
        raise ValueError(f"xi {params.xi} exceeds column count {amr.n}")
    omegas = amr.omegas()
    cue_weights = amr.weights[np.arange(amr.n), p].astype(np.float64)
    passes = (cue_weights > 0) & (cue_weights >= params.iota * omegas)
    failed = int(amr.n - np.count_nonzero(passes))
    rho = float(cue_weights.mean())
    omega_bar = float(omegas.mean())
    accepted = failed <= params.xi and rho >= params.kappa * omega_bar
    return RecognitionReport(accepted, failed, rho, omega_bar, passes)


def recognize_batch(amr: Amr, patterns,
                    params: RecognitionParams = RecognitionParams()):
    """Vectorized acceptance test; returns (accepted, failed, rho) arrays."""
    pats = np.asarray(patterns, dtype=np.int64)
    if pats.ndim != 2 or pats.shape[1] != amr.n:
        raise ValueError(f"pattern batch shape {pats.shape} != (k, {amr.n})")
    if pats.size and (pats.min() < 0 or pats.max() >= amr.m):
        raise ValueError(f"pattern rows out of range [0, {amr.m - 1}]")
    if params.xi > amr.n:
        raise ValueError(f"xi {params.xi} exceeds column count {amr.n}")
    omegas = amr.omegas()
    cue_weights = amr.weights[np.arange(amr.n)[None, :], pats].astype(np.float64)
    passes = (cue_weights > 0) & (cue_weights >= params.iota * omegas[None, :])
    failed = amr.n - passes.sum(axis=1)
    rho = cue_weights.mean(axis=1)
    omega_bar = float(omegas.mean())
    accepted = (failed <= params.xi) & (rho >= params.kappa * omega_bar)
    return accepted, failed, rho


def _column_uniforms(seed: int, nonce: int, n: int) -> np.ndarray:
    """One uniform per column from a counter-based stream keyed on (seed, nonce)."""
    sequence = np.random.SeedSequence([np.uint64(seed), np.uint64(nonce)])
    return np.random.Generator(np.random.Philox(sequence)).random(n)


def sample_pattern(amr: Amr, pattern, params: RetrievalParams,
                   nonce: int = 0) -> RetrievalResult:
    """Constructive sampling step of retrieval, assuming the cue was accepted.

    Per column the sampling law is psi * zeta renormalized, where zeta is
    the Gaussian kernel (a point mass at the cue row when sigma == 0).
    Columns whose product underflows to zero fall back to psi alone; columns
    with no stored weight at all pin to the cue row.
    """
    p = _check_pattern(amr, pattern)
    psi = amr.distributions()
    rows = np.arange(amr.m, dtype=np.float64)
    if params.sigma == 0.0:
        zeta = (rows[None, :] == p[:, None]).astype(np.float64)
    else:
        std = params.sigma * amr.m
        delta = rows[None, :] - p[:, None]
        zeta = np.exp(-(delta * delta) / (2.0 * std * std))
    phi = psi * zeta
    supported = amr.column_sums() > 0
    fallback = (phi.sum(axis=1) <= 0) & supported
    phi[fallback] = psi[fallback]
    pinned = ~supported

    uniforms = _column_uniforms(params.seed, nonce, amr.n)
    cumulative = np.cumsum(phi, axis=1)
    targets = uniforms * cumulative[:, -1]
    choice = np.argmax(cumulative > targets[:, None], axis=1)
    choice[pinned] = p[pinned]
    return RetrievalResult(
        pattern=choice.astype(np.int64),
        recognition=None,
        fallback_columns=np.flatnonzero(fallback),
        pinned_columns=np.flatnonzero(pinned),
    )


def retrieve(amr: Amr, pattern, params: RetrievalParams = RetrievalParams(),
             recognition: RecognitionParams = RecognitionParams(),
             nonce: int = 0) -> RetrievalResult:
    """Recognize the cue, then sample one row per column; rejected cues
    yield ``pattern is None``."""
    report = recognize(amr, pattern, recognition)
    if not report.accepted:
        return RetrievalResult(pattern=None, recognition=report)
    result = sample_pattern(amr, pattern, params, nonce)
    result.recognition = report
    return result


def chain(amr: Amr, pattern, depth: int,
          params: RetrievalParams = RetrievalParams(),
          recognition: RecognitionParams = RecognitionParams()
          ) -> list[RetrievalResult]:
    """Iterated retrieval: each retrieved pattern cues the next step.

    Always returns ``depth`` entries; once a step rejects, the remaining
    entries are rejected placeholders.
    """
    if depth < 1:
        raise ValueError(f"chain depth must be >= 1, got {depth}")
    results: list[RetrievalResult] = []
    cue = pattern
    for level in range(depth):
        if cue is None:
            results.append(RetrievalResult(pattern=None, recognition=None))
            continue
        result = retrieve(amr, cue, params, recognition, nonce=level)
        results.append(result)
        cue = result.pattern
    return results
