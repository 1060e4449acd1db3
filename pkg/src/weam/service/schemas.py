"""Pydantic request/response models for the service endpoints.

Bulk data stays on disk in the wire formats; requests carry file paths and
small parameter sets, responses carry summaries.  Quantized patterns are
small enough to travel as JSON in the live-memory endpoints.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


# -- live memory registry ----------------------------------------------

class MemoryCreateRequest(BaseModel):
    n: int
    m: int
    name: str | None = None


class MemoryLoadRequest(BaseModel):
    path: str
    name: str | None = None


class MemoryInfo(BaseModel):
    name: str
    n: int
    m: int
    total_registrations: int
    entropy: float
    omega_bar: float
    log2_capacity: float


class MemoryListResponse(BaseModel):
    memories: list[MemoryInfo]


class MemorySaveRequest(BaseModel):
    path: str


class MemorySaveResponse(BaseModel):
    path: str
    bytes_written: int


class PatternBatchRequest(BaseModel):
    patterns: list[list[int]]


class RegisterPatternsResponse(BaseModel):
    registered: int
    total_registrations: int
    entropy: float


class RecognizeRequest(BaseModel):
    pattern: list[int]
    iota: float = 0.0
    kappa: float = 0.0
    xi: int = 0


class RecognizeResponse(BaseModel):
    accepted: bool
    failed_columns: int
    rho: float
    omega_bar: float


class RetrieveRequest(BaseModel):
    pattern: list[int]
    sigma: float = 0.025
    seed: int = 42
    iota: float = 0.0
    kappa: float = 0.0
    xi: int = 0


class RetrieveResponse(BaseModel):
    rejected: bool
    pattern: list[int] | None = None
    fallback_columns: list[int] = Field(default_factory=list)
    pinned_columns: list[int] = Field(default_factory=list)


class ChainRequest(BaseModel):
    pattern: list[int]
    depth: int = 6
    sigma: float = 0.04
    seed: int = 42
    iota: float = 0.0
    kappa: float = 0.0
    xi: int = 0


class ChainResponse(BaseModel):
    steps: list[RetrieveResponse]


# -- file-based operations (the CLI surface) ----------------------------

class SyntheticRequest(BaseModel):
    features_out: str
    labels_out: str
    classes: int = 10
    per_class: int = 200
    n: int = 64
    separation: float = 6.0
    seed: int = 42


class SyntheticResponse(BaseModel):
    features_out: str
    labels_out: str
    count: int
    n: int


class SplitManifestRequest(BaseModel):
    out: str
    features: str | None = None   # take the item count from this file
    count: int | None = None      # or state it directly
    seed: int = 42


class SplitManifestResponse(BaseModel):
    out: str
    count: int
    seed: int


class CalibrateRequest(BaseModel):
    features: str
    m: int
    out: str
    fold: int | None = None
    seed: int = 42
    per_feature: bool = True


class CalibrateResponse(BaseModel):
    out: str
    n: int
    m: int
    calibrated_on: int


class RegisterFileRequest(BaseModel):
    features: str
    quantizer: str
    out: str
    memory: str | None = None
    fold: int | None = None
    fill_percent: float = 100.0
    seed: int = 42


class RegisterFileResponse(BaseModel):
    out: str
    n: int
    m: int
    registered: int
    total_registrations: int
    entropy: float
    bytes_written: int


class RecognizeFileRequest(BaseModel):
    memory: str
    quantizer: str
    features: str
    fold: int | None = None
    iota: float = 0.0
    kappa: float = 0.0
    xi: int = 0
    seed: int = 42
    out: str | None = None


class RecognizeFileResponse(BaseModel):
    total: int
    accepted: int
    rejected: int
    omega_bar: float
    out: str | None = None


class RetrieveFileRequest(BaseModel):
    memory: str
    quantizer: str
    features: str
    out: str
    out_flags: str | None = None
    fold: int | None = None
    sigma: float = 0.025
    seed: int = 42
    iota: float = 0.0
    kappa: float = 0.0
    xi: int = 0


class RetrieveFileResponse(BaseModel):
    total: int
    accepted: int
    rejected: int
    out: str
    out_flags: str | None = None


class GridRequest(BaseModel):
    features: str
    labels: str
    out: str
    n_values: list[int] | None = None
    m_values: list[int] | None = None
    folds: list[int] | None = None
    sigma: float = 0.025
    iota: float = 0.0
    kappa: float = 0.0
    xi: int = 0
    seed: int = 42
    noise_level: float = 0.0
    global_range: bool = False


class FillSweepRequest(GridRequest):
    fill_percents: list[float] | None = None


class SigmaSweepRequest(GridRequest):
    sigma_values: list[float] | None = None
    examples_out: str | None = None


class ChainExperimentRequest(GridRequest):
    sigma: float = 0.04
    chain_depth: int = 6
    examples_out: str | None = None


class ExperimentResponse(BaseModel):
    experiment: str
    csv_path: str
    manifest_path: str
    rows: int
    plot_paths: list[str] = Field(default_factory=list)
    examples_path: str | None = None
    best: dict | None = None
    summary: list[dict] = Field(default_factory=list)


class EvalRequest(BaseModel):
    true_labels: str
    predicted_labels: str
    entropy: float | None = None
    out: str | None = None


class EvalResponse(BaseModel):
    total: int
    correct: int
    wrong_class: int
    rejected: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    accuracy: float
    f1: float
    entropy: float | None = None
    out: str | None = None
