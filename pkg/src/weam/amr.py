"""Associative memory register: an n-column by m-row grid of integer weights.

Columns correspond to the arguments of the stored patterns and rows to their
quantized values.  Registering a pattern increments exactly one cell per
column, so each column accumulates a weight histogram over the rows.  The
normalized histogram is the column distribution that recognition thresholds
and retrieval sampling operate on; its Shannon entropy (in bits) averaged
over columns is the memory entropy, and 2**(entropy * n) is the number of
distinct patterns representable at that state.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .fileio import atomic_write

MAGIC = b"EAMR"
VERSION = 1
_HEADER = struct.Struct("<4sBIIQ")

WEIGHT_DTYPE = np.uint32
WEIGHT_MAX = np.iinfo(WEIGHT_DTYPE).max  # in-memory cells saturate here
DISK_WEIGHT_MAX = 0xFFFF                 # cells persist as uint16
_CELL_LIMIT = 1 << 31                    # refuse absurd allocations
_DIM_LIMIT = 0xFFFFFFFF                  # n and m must fit the header


@dataclass
class ColumnStats:
    """Per-column weight statistics."""

    omega: float          # mean weight over the column's nonzero cells
    psi: np.ndarray       # weights normalized to a probability vector
    entropy: float        # Shannon entropy of psi, bits
    nonzero_count: int


@dataclass
class MemoryStats:
    """Whole-register statistics."""

    omega_bar: float      # mean of the per-column omegas
    entropy: float        # mean column entropy, bits
    log2_capacity: float  # entropy * n

    @property
    def capacity(self) -> float:
        """2**(entropy * n); +inf once it exceeds float range."""
        if self.log2_capacity > 1023:
            return math.inf
        return 2.0 ** self.log2_capacity


class Amr:
    """The weight grid plus a registration counter.

    Mutable value type: reads (stats, recognition, retrieval) may run
    concurrently on an unchanging register; registration needs exclusive
    access.
    """

    __slots__ = ("n", "m", "weights", "total_registrations")

    def __init__(self, n: int, m: int, weights: np.ndarray | None = None,
                 total_registrations: int = 0):
        n, m = int(n), int(m)
        if n < 1 or m < 1:
            raise ValueError(f"register dimensions must be positive, got {n}x{m}")
        if n > _DIM_LIMIT or m > _DIM_LIMIT or n * m > _CELL_LIMIT:
            raise ValueError(f"register dimensions out of range: {n}x{m}")
        self.n = n
        self.m = m
        if weights is None:
            self.weights = np.zeros((n, m), dtype=WEIGHT_DTYPE)
        else:
            weights = np.asarray(weights)
            if weights.shape != (n, m):
                raise ValueError(f"weight grid shape {weights.shape} != ({n}, {m})")
            if np.any(weights < 0):
                raise ValueError("weights must be non-negative")
            self.weights = weights.astype(WEIGHT_DTYPE)
        self.total_registrations = int(total_registrations)

    # -- statistics ----------------------------------------------------

    def column_sums(self) -> np.ndarray:
        return self.weights.sum(axis=1, dtype=np.float64)

    def omegas(self) -> np.ndarray:
        """Mean weight over nonzero cells, per column; 0 for empty columns."""
        sums = self.column_sums()
        nonzero = np.count_nonzero(self.weights, axis=1)
        return np.divide(sums, nonzero, out=np.zeros(self.n), where=nonzero > 0)

    def distributions(self) -> np.ndarray:
        """Per-column probability vectors; all-zero rows for empty columns."""
        sums = self.column_sums()
        safe = np.where(sums > 0, sums, 1.0)
        return self.weights / safe[:, None]

    def entropies(self) -> np.ndarray:
        """Shannon entropy of each column distribution, in bits."""
        psi = self.distributions()
        logs = np.zeros_like(psi)
        np.log2(psi, out=logs, where=psi > 0)
        return -(psi * logs).sum(axis=1)

    def column_stats(self, i: int) -> ColumnStats:
        if not 0 <= i < self.n:
            raise IndexError(f"column {i} out of range for {self.n} columns")
        column = self.weights[i].astype(np.float64)
        total = column.sum()
        nonzero = int(np.count_nonzero(column))
        if nonzero == 0:
            return ColumnStats(0.0, np.zeros(self.m), 0.0, 0)
        psi = column / total
        entropy = float(-(psi[psi > 0] * np.log2(psi[psi > 0])).sum())
        return ColumnStats(float(total / nonzero), psi, entropy, nonzero)

    def stats(self) -> MemoryStats:
        entropy = float(self.entropies().mean())
        return MemoryStats(
            omega_bar=float(self.omegas().mean()),
            entropy=entropy,
            log2_capacity=entropy * self.n,
        )

    # -- value semantics -----------------------------------------------

    def copy(self) -> "Amr":
        return Amr(self.n, self.m, self.weights.copy(), self.total_registrations)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Amr):
            return NotImplemented
        return (self.n == other.n and self.m == other.m
                and self.total_registrations == other.total_registrations
                and bool(np.array_equal(self.weights, other.weights)))

    def __repr__(self) -> str:
        return (f"Amr(n={self.n}, m={self.m}, "
                f"total_registrations={self.total_registrations})")

    # -- persistence -----------------------------------------------------
    # Layout: magic "EAMR", version byte, n and m as uint32 LE,
    # total_registrations as uint64 LE, then n*m uint16 LE weights ordered
    # by column index then row index (C order of the (n, m) grid).

    def to_bytes(self) -> bytes:
        peak = int(self.weights.max(initial=0))
        if peak > DISK_WEIGHT_MAX:
            raise ValueError(
                f"weight {peak} exceeds the on-disk 16-bit width ({DISK_WEIGHT_MAX})")
        header = _HEADER.pack(MAGIC, VERSION, self.n, self.m,
                              self.total_registrations)
        return header + self.weights.astype("<u2").tobytes(order="C")

    def save(self, path) -> int:
        """Persist to ``path``; returns bytes written."""
        return atomic_write(path, self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Amr":
        if len(data) < _HEADER.size:
            raise ValueError("truncated register file: header incomplete")
        magic, version, n, m, total = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise ValueError(f"unsupported register file version {version}")
        expected = _HEADER.size + 2 * n * m
        if len(data) != expected:
            raise ValueError(
                f"register payload is {len(data) - _HEADER.size} bytes, "
                f"expected {2 * n * m} for {n}x{m}")
        weights = np.frombuffer(data, dtype="<u2", offset=_HEADER.size)
        return cls(n, m, weights.reshape(n, m), total)

    @classmethod
    def load(cls, path) -> "Amr":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())
