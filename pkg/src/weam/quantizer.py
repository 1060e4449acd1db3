"""Min-max feature quantization and its inverse.

Each of the n features is normalized against the minimum and maximum it
takes over the calibration corpus and mapped to one of m integer rows:

    row = round(g * (m - 1)),   g = (x - min) / (max - min) clamped to [0, 1]

Rounding is half-away-from-zero (half-up on this non-negative domain).  The
inverse maps row r back to min + r * (max - min) / (m - 1); the m == 1 case
returns (max - min) / 2 to avoid the zero division.  That half-distance is
implemented exactly as written even though it is not the range midpoint;
see the note on ``inv_quantize``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .fileio import atomic_write

MAGIC = b"EAMQ"
VERSION = 1
_HEADER = struct.Struct("<4sBII")


@dataclass(frozen=True)
class QuantizerParams:
    """Per-feature calibration extrema plus the level count m."""

    mins: np.ndarray
    maxs: np.ndarray
    m: int

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float32)
        maxs = np.asarray(self.maxs, dtype=np.float32)
        if mins.ndim != 1 or mins.shape != maxs.shape:
            raise ValueError("mins and maxs must be 1-d arrays of equal length")
        if mins.size == 0:
            raise ValueError("quantizer needs at least one feature")
        if not (np.isfinite(mins).all() and np.isfinite(maxs).all()):
            raise ValueError("calibration extrema must be finite")
        if np.any(mins > maxs):
            raise ValueError("per-feature min exceeds max")
        if int(self.m) < 1:
            raise ValueError(f"level count must be >= 1, got {self.m}")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        object.__setattr__(self, "m", int(self.m))

    @property
    def n(self) -> int:
        return self.mins.size

    def spans(self) -> np.ndarray:
        return (self.maxs - self.mins).astype(np.float64)

    # -- persistence: magic, version byte, n uint32 LE, m uint32 LE,
    #    then n float32 LE mins followed by n float32 LE maxs.

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(MAGIC, VERSION, self.n, self.m)
        return (header + self.mins.astype("<f4").tobytes()
                + self.maxs.astype("<f4").tobytes())

    def save(self, path) -> int:
        return atomic_write(path, self.to_bytes())

    def to_text(self) -> str:
        """Plain-text dump for inspection: one ``feature min max`` line each."""
        lines = [f"m {self.m}", f"n {self.n}"]
        for i in range(self.n):
            lines.append(f"{i} {self.mins[i]!r} {self.maxs[i]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_bytes(cls, data: bytes) -> "QuantizerParams":
        if len(data) < _HEADER.size:
            raise ValueError("truncated quantizer file: header incomplete")
        magic, version, n, m = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise ValueError(f"unsupported quantizer file version {version}")
        expected = _HEADER.size + 8 * n
        if len(data) != expected:
            raise ValueError(f"quantizer payload is {len(data)} bytes, expected {expected}")
        floats = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
        return cls(floats[:n].copy(), floats[n:].copy(), m)

    @classmethod
    def load(cls, path) -> "QuantizerParams":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def calibrate(features, m: int, per_feature: bool = True) -> QuantizerParams:
    """Draw per-feature extrema from a calibration matrix.

    ``per_feature=False`` is the coarser comparison mode that normalizes
    every feature against the global extrema of the whole matrix.
    """
    matrix = np.asarray(features)
    if matrix.dtype == object:
        raise ValueError("calibration rows have inconsistent widths")
    if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] == 0:
        raise ValueError("calibration needs a non-empty 2-d feature matrix")
    if not np.isfinite(matrix).all():
        raise ValueError("calibration features must be finite")
    if per_feature:
        mins, maxs = matrix.min(axis=0), matrix.max(axis=0)
    else:
        lo, hi = matrix.min(), matrix.max()
        mins = np.full(matrix.shape[1], lo)
        maxs = np.full(matrix.shape[1], hi)
    return QuantizerParams(mins, maxs, m)


def _check_width(width: int, params: QuantizerParams):
    if width != params.n:
        raise ValueError(f"feature width {width} != quantizer width {params.n}")


def quantize(features, params: QuantizerParams) -> np.ndarray:
    """Map real features (shape (..., n)) to integer rows in [0, m-1].

    Out-of-calibration values clamp to the boundary rows; a degenerate
    feature (min == max) maps to row 0.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 0:
        raise ValueError("features must be at least 1-d")
    _check_width(x.shape[-1], params)
    if not np.isfinite(x).all():
        raise ValueError("features must be finite")
    span = params.spans()
    g = np.where(span > 0, (x - params.mins) / np.where(span > 0, span, 1.0), 0.0)
    g = np.clip(g, 0.0, 1.0)
    rows = np.floor(g * (params.m - 1) + 0.5).astype(np.int64)
    return np.minimum(rows, params.m - 1)


def inv_quantize(rows, params: QuantizerParams) -> np.ndarray:
    """Map integer rows (shape (..., n)) back to real feature values.

    For m == 1 this returns (max - min) / 2 per feature, the formula's
    literal half-distance rather than the range midpoint.
    """
    q = np.asarray(rows)
    if not np.issubdtype(q.dtype, np.integer):
        raise ValueError("quantized patterns must be integer arrays")
    if q.ndim == 0:
        raise ValueError("patterns must be at least 1-d")
    _check_width(q.shape[-1], params)
    if q.min(initial=0) < 0 or q.max(initial=0) > params.m - 1:
        raise ValueError(f"row index out of range [0, {params.m - 1}]")
    span = params.spans()
    if params.m == 1:
        return np.broadcast_to(span / 2.0, q.shape).copy()
    return params.mins + q * span / (params.m - 1)
