"""Weighted entropic associative memory.

A single n-by-m register of integer weights stores quantized feature
patterns by superposition.  The package provides the register itself, the
min-max quantizer mapping real features to rows and back, the
register/recognize/retrieve operations, evaluation metrics, dataset
handling, experiment drivers, a FastAPI service, and a thin CLI client.
"""

from .amr import Amr, ColumnStats, MemoryStats
from .corpus import (FeatureDataset, FoldSplit, add_feature_noise,
                     make_synthetic, read_features, read_labels,
                     read_split_manifest, split_folds, write_features,
                     write_labels, write_split_manifest)
from .metrics import (REJECTED_LABEL, CentroidClassifier, EvalReport,
                      ResponseRecord, evaluate, evaluate_labels)
from .ops import (RecognitionParams, RecognitionReport, RetrievalParams,
                  RetrievalResult, chain, recognize, recognize_batch,
                  register, register_batch, retrieve, sample_pattern)
from .quantizer import QuantizerParams, calibrate, inv_quantize, quantize

__version__ = "0.1.0"

__all__ = [
    "Amr", "ColumnStats", "MemoryStats",
    "QuantizerParams", "calibrate", "quantize", "inv_quantize",
    "RecognitionParams", "RetrievalParams", "RecognitionReport",
    "RetrievalResult", "register", "register_batch", "recognize",
    "recognize_batch", "retrieve", "sample_pattern", "chain",
    "ResponseRecord", "EvalReport", "evaluate", "evaluate_labels",
    "REJECTED_LABEL", "CentroidClassifier",
    "FeatureDataset", "FoldSplit", "split_folds", "add_feature_noise",
    "read_features", "write_features", "read_labels", "write_labels",
    "read_split_manifest", "write_split_manifest", "make_synthetic",
    "__version__",
]
