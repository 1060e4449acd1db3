"""Experiment drivers: register-size grid, fill sweep, sigma sweep, chains.

Every driver loads a feature/label file pair, walks the ten folds, fills a
register from the remembered split, evaluates retrievals on the test split
with a nearest-centroid classifier fitted on the training split, and writes
one CSV row per configuration plus a JSON run manifest.  Reruns with the
same manifest produce byte-identical CSV output.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .amr import Amr
from .corpus import (FOLD_COUNT, FeatureDataset, add_feature_noise,
                     read_features, split_folds, write_features)
from .fileio import atomic_write_text
from .metrics import CentroidClassifier, EvalReport, ResponseRecord, evaluate
from .ops import (RecognitionParams, RetrievalParams, chain, recognize_batch,
                  register_batch, retrieve, sample_pattern)
from .quantizer import QuantizerParams, inv_quantize, quantize

DEFAULT_M_VALUES = [2 ** j for j in range(10)]          # 1 .. 512
DEFAULT_FILL_PERCENTS = [1, 2, 4, 8, 16, 32, 64, 100]
DEFAULT_SIGMA_VALUES = [0.01, 0.03, 0.05, 0.07, 0.09, 0.11]
SWEEP_M_VALUES = [16, 32, 64]  # the high-F1 row counts used by the sweeps

EVAL_COLUMNS = [
    "experiment", "fold", "n", "m", "fill_percent", "sigma", "iota", "kappa",
    "xi", "noise_level", "cues", "correct", "wrong_class", "rejected", "tp",
    "fp", "fn", "precision", "recall", "accuracy", "f1", "entropy",
    "omega_bar", "mean_row_distance",
]
CHAIN_COLUMNS = [
    "experiment", "fold", "n", "m", "sigma", "noise_level", "true_class",
    "cue_id", "level", "predicted_class", "rejected",
]
WIRE_FORMAT_VERSIONS = {"eamr": 1, "eamf": 1, "eaml": 1, "eamq": 1}


@dataclass
class ExperimentConfig:
    """Knobs shared by all drivers; defaults mirror the reference protocol."""

    features: str
    labels: str
    out: str
    n_values: list[int] | None = None      # default: the dataset width
    m_values: list[int] | None = None
    fill_percents: list[float] | None = None
    sigma: float = 0.025
    sigma_values: list[float] | None = None
    iota: float = 0.0
    kappa: float = 0.0
    xi: int = 0
    chain_depth: int = 6
    seed: int = 42
    folds: list[int] | None = None
    noise_level: float = 0.0
    global_range: bool = False             # normalize against global extrema
    examples_out: str | None = None        # retrieval features for rendering

    def recognition(self) -> RecognitionParams:
        return RecognitionParams(self.iota, self.kappa, self.xi)

    @classmethod
    def from_manifest(cls, path) -> "ExperimentConfig":
        """Rebuild the resolved configuration a run manifest records."""
        with open(path) as fh:
            manifest = json.load(fh)
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in manifest["config"].items()
                      if k in known})

    def fold_list(self) -> list[int]:
        folds = list(range(FOLD_COUNT)) if self.folds is None else self.folds
        for f in folds:
            if not 0 <= f < FOLD_COUNT:
                raise ValueError(f"fold {f} out of range [0, {FOLD_COUNT - 1}]")
        return folds


@dataclass
class ExperimentReport:
    experiment: str
    rows: list[dict]
    csv_path: str
    manifest_path: str
    plot_paths: list[str] = field(default_factory=list)
    examples_path: str | None = None


def _derive_seed(*parts) -> int:
    ints = [int(round(p * 1e6)) if isinstance(p, float) else int(p)
            for p in parts]
    state = np.random.SeedSequence(ints).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.10g" % value
    return str(value)


def _write_csv(path, columns, rows) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format(row.get(c)) for c in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _write_manifest(config: ExperimentConfig, experiment: str,
                    resolved: dict) -> str:
    manifest = {
        "format": "weam-manifest",
        "version": 1,
        "experiment": experiment,
        "package_version": __version__,
        "wire_format_versions": WIRE_FORMAT_VERSIONS,
        "config": {**asdict(config), **resolved},
    }
    path = f"{config.out}.manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _load_dataset(config: ExperimentConfig, n: int | None = None
                  ) -> FeatureDataset:
    """Load the pair of files, resolving a ``{n}`` path pattern or slicing
    the leading columns when a narrower width is requested."""
    fpath, lpath = str(config.features), str(config.labels)
    if n is not None and "{n}" in fpath:
        fpath = fpath.format(n=n)
        lpath = lpath.format(n=n)
    ds = read_features(fpath, lpath)
    if ds.labels is None:
        raise ValueError("experiments need a label file")
    if n is not None and ds.n != n:
        if n > ds.n:
            raise ValueError(f"requested width {n} exceeds dataset width {ds.n}")
        ds = FeatureDataset(ds.features[:, :n], ds.labels, ds.ids)
    return ds


@dataclass
class _FoldContext:
    split: object
    mins: np.ndarray
    maxs: np.ndarray
    classifier: CentroidClassifier


def _fold_context(ds: FeatureDataset, fold: int, seed: int,
                  global_range: bool = False) -> _FoldContext:
    split = split_folds(len(ds), fold, seed)
    remembered = ds.features[split.remembered]
    if global_range:
        mins = np.full(ds.n, remembered.min(), dtype=remembered.dtype)
        maxs = np.full(ds.n, remembered.max(), dtype=remembered.dtype)
    else:
        mins, maxs = remembered.min(axis=0), remembered.max(axis=0)
    return _FoldContext(
        split=split,
        mins=mins,
        maxs=maxs,
        classifier=CentroidClassifier.fit(ds.features[split.training_fit],
                                          ds.labels[split.training_fit]),
    )


def _fill_register(ds: FeatureDataset, ctx: _FoldContext, m: int,
                   fill_percent: float) -> tuple[Amr, QuantizerParams]:
    qp = QuantizerParams(ctx.mins, ctx.maxs, m)
    amr = Amr(ds.n, m)
    count = round(len(ctx.split.remembered) * fill_percent / 100.0)
    if count > 0:
        fill = ds.features[ctx.split.remembered[:count]]
        register_batch(amr, quantize(fill, qp))
    return amr, qp


def _evaluate_cell(ds: FeatureDataset, ctx: _FoldContext, amr: Amr,
                   qp: QuantizerParams, config: ExperimentConfig,
                   sigma: float, fold: int) -> tuple[EvalReport, float | None]:
    """Retrieve every test cue and classify the reconstructions."""
    test_idx = ctx.split.test
    feats = ds.features[test_idx]
    if config.noise_level > 0:
        feats = add_feature_noise(feats, config.noise_level,
                                  _derive_seed(config.seed, fold, 1),
                                  ranges=qp.spans())
    patterns = quantize(feats, qp)
    true_classes = ds.labels[test_idx]
    accepted, _, _ = recognize_batch(amr, patterns, config.recognition())

    rp = RetrievalParams(sigma=sigma, seed=config.seed)
    sampled = {}
    for i in np.flatnonzero(accepted):
        sampled[i] = sample_pattern(amr, patterns[i], rp, nonce=int(i)).pattern

    records = []
    distance_sum, distance_count = 0.0, 0
    predicted = {}
    if sampled:
        order = sorted(sampled)
        stack = np.stack([sampled[i] for i in order])
        predictions = ctx.classifier.predict(inv_quantize(stack, qp))
        predicted = dict(zip(order, predictions))
        for k, i in enumerate(order):
            distance_sum += float(np.abs(stack[k] - patterns[i]).mean())
        distance_count = len(order)
    for i in range(len(patterns)):
        if accepted[i]:
            records.append(ResponseRecord(int(true_classes[i]),
                                          int(predicted[i])))
        else:
            records.append(ResponseRecord(int(true_classes[i]), None))
    report = evaluate(records, entropy=amr.stats().entropy)
    mean_distance = (distance_sum / distance_count) if distance_count else None
    return report, mean_distance


def _eval_row(experiment, fold, n, m, fill, sigma, config, report,
              mean_distance, omega_bar) -> dict:
    return {
        "experiment": experiment, "fold": fold, "n": n, "m": m,
        "fill_percent": float(fill), "sigma": float(sigma),
        "iota": float(config.iota), "kappa": float(config.kappa),
        "xi": config.xi, "noise_level": float(config.noise_level),
        "cues": report.total, "correct": report.correct,
        "wrong_class": report.wrong_class, "rejected": report.rejected,
        "tp": report.tp, "fp": report.fp, "fn": report.fn,
        "precision": report.precision, "recall": report.recall,
        "accuracy": report.accuracy, "f1": report.f1,
        "entropy": report.entropy, "omega_bar": omega_bar,
        "mean_row_distance": mean_distance,
    }


def aggregate(rows, keys) -> list[dict]:
    """Mean and std of the headline metrics grouped by ``keys``."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row)
    out = []
    for group_key in sorted(groups):
        members = groups[group_key]
        entry = dict(zip(keys, group_key))
        entry["folds"] = len(members)
        for metric in ("precision", "recall", "f1", "entropy"):
            values = np.array([m[metric] for m in members], dtype=np.float64)
            entry[f"{metric}_mean"] = float(values.mean())
            entry[f"{metric}_std"] = float(values.std())
        out.append(entry)
    return out


def _write_plot_series(config: ExperimentConfig, rows, series_key: str,
                       x_key: str) -> list[str]:
    """Per-series plot data: x vs fold-averaged precision/recall/f1/entropy."""
    paths = []
    for series in sorted({row[series_key] for row in rows}):
        agg = aggregate([r for r in rows if r[series_key] == series], [x_key])
        columns = [x_key, "precision_mean", "recall_mean", "f1_mean",
                   "entropy_mean"]
        path = f"{config.out}.plot_{series_key}{_format(series)}.csv"
        _write_csv(path, columns, agg)
        paths.append(path)
    return paths


def run_grid(config: ExperimentConfig) -> ExperimentReport:
    """Precision/recall over the register-size grid at 100% fill."""
    m_values = config.m_values or DEFAULT_M_VALUES
    folds = config.fold_list()
    base = _load_dataset(config)
    n_values = config.n_values or [base.n]

    rows = []
    for n in n_values:
        ds = base if n == base.n else _load_dataset(config, n)
        for fold in folds:
            ctx = _fold_context(ds, fold, config.seed, config.global_range)
            for m in m_values:
                amr, qp = _fill_register(ds, ctx, m, 100.0)
                report, dist = _evaluate_cell(ds, ctx, amr, qp, config,
                                              config.sigma, fold)
                rows.append(_eval_row("grid", fold, n, m, 100.0, config.sigma,
                                      config, report, dist,
                                      amr.stats().omega_bar))
    _write_csv(config.out, EVAL_COLUMNS, rows)
    manifest = _write_manifest(config, "grid",
                               {"n_values": n_values, "m_values": m_values,
                                "folds": folds})
    plots = _write_plot_series(config, rows, "n", "m")
    return ExperimentReport("grid", rows, str(config.out), manifest, plots)


def run_fill_sweep(config: ExperimentConfig) -> ExperimentReport:
    """Performance against the filled portion of the remembered corpus."""
    m_values = config.m_values or SWEEP_M_VALUES
    fills = config.fill_percents or DEFAULT_FILL_PERCENTS
    folds = config.fold_list()
    ds = _load_dataset(config, config.n_values[0] if config.n_values else None)

    rows = []
    for fold in folds:
        ctx = _fold_context(ds, fold, config.seed, config.global_range)
        for m in m_values:
            for fill in fills:
                amr, qp = _fill_register(ds, ctx, m, fill)
                report, dist = _evaluate_cell(ds, ctx, amr, qp, config,
                                              config.sigma, fold)
                rows.append(_eval_row("fill-sweep", fold, ds.n, m, fill,
                                      config.sigma, config, report, dist,
                                      amr.stats().omega_bar))
    _write_csv(config.out, EVAL_COLUMNS, rows)
    manifest = _write_manifest(config, "fill-sweep",
                               {"m_values": m_values, "fill_percents": fills,
                                "folds": folds, "n_values": [ds.n]})
    plots = _write_plot_series(config, rows, "m", "fill_percent")
    return ExperimentReport("fill-sweep", rows, str(config.out), manifest,
                            plots)


def _class_representatives(ds: FeatureDataset, test_idx) -> list[tuple[int, int]]:
    """First test item of each class, as (class, dataset index) pairs."""
    picks = {}
    for idx in test_idx:
        label = int(ds.labels[idx])
        if label not in picks:
            picks[label] = int(idx)
    return sorted(picks.items())


def run_sigma_sweep(config: ExperimentConfig) -> ExperimentReport:
    """Retrieval quality across the similarity-spread values."""
    sigma_values = config.sigma_values or DEFAULT_SIGMA_VALUES
    m_values = config.m_values or [16]
    folds = config.fold_list()
    ds = _load_dataset(config, config.n_values[0] if config.n_values else None)

    rows = []
    example_feats = []
    for fold in folds:
        ctx = _fold_context(ds, fold, config.seed, config.global_range)
        for m in m_values:
            amr, qp = _fill_register(ds, ctx, m, 100.0)
            omega_bar = amr.stats().omega_bar
            for sigma in sigma_values:
                report, dist = _evaluate_cell(ds, ctx, amr, qp, config,
                                              sigma, fold)
                rows.append(_eval_row("sigma-sweep", fold, ds.n, m, 100.0,
                                      sigma, config, report, dist, omega_bar))
                if (config.examples_out and fold == folds[0]
                        and m == m_values[0]):
                    example_feats.append(_example_retrievals(
                        ds, ctx, amr, qp, config, sigma, fold))
    _write_csv(config.out, EVAL_COLUMNS, rows)
    manifest = _write_manifest(config, "sigma-sweep",
                               {"sigma_values": sigma_values,
                                "m_values": m_values, "folds": folds,
                                "n_values": [ds.n]})
    plots = _write_plot_series(config, rows, "m", "sigma")
    examples_path = None
    if config.examples_out and example_feats:
        write_features(FeatureDataset(np.concatenate(example_feats)),
                       config.examples_out)
        examples_path = str(config.examples_out)
    return ExperimentReport("sigma-sweep", rows, str(config.out), manifest,
                            plots, examples_path)


def _example_retrievals(ds, ctx, amr, qp, config, sigma, fold) -> np.ndarray:
    """One retrieval per class for rendering; zero rows mark rejections."""
    reps = _class_representatives(ds, ctx.split.test)
    out = np.zeros((len(reps), ds.n), dtype=np.float32)
    recp = config.recognition()
    for k, (label, idx) in enumerate(reps):
        feats = ds.features[idx:idx + 1]
        if config.noise_level > 0:
            feats = add_feature_noise(feats, config.noise_level,
                                      _derive_seed(config.seed, fold, 2, label),
                                      ranges=qp.spans())
        pattern = quantize(feats[0], qp)
        result = retrieve(amr, pattern,
                          RetrievalParams(sigma=sigma,
                                          seed=_derive_seed(config.seed, fold,
                                                            3, label)),
                          recp)
        if not result.rejected:
            out[k] = inv_quantize(result.pattern, qp).astype(np.float32)
    return out


def run_chains(config: ExperimentConfig) -> ExperimentReport:
    """Association chains from one representative cue per class."""
    m_values = config.m_values or [16]
    folds = config.fold_list()
    ds = _load_dataset(config, config.n_values[0] if config.n_values else None)

    rows = []
    example_feats = []
    for fold in folds:
        ctx = _fold_context(ds, fold, config.seed, config.global_range)
        m = m_values[0]
        amr, qp = _fill_register(ds, ctx, m, 100.0)
        reps = _class_representatives(ds, ctx.split.test)
        for label, idx in reps:
            feats = ds.features[idx:idx + 1]
            if config.noise_level > 0:
                feats = add_feature_noise(feats, config.noise_level,
                                          _derive_seed(config.seed, fold, 2,
                                                       label),
                                          ranges=qp.spans())
            pattern = quantize(feats[0], qp)
            results = chain(amr, pattern, config.chain_depth,
                            RetrievalParams(sigma=config.sigma,
                                            seed=_derive_seed(config.seed,
                                                              fold, label)),
                            config.recognition())
            for level, result in enumerate(results, start=1):
                if result.rejected:
                    rows.append({"experiment": "chains", "fold": fold,
                                 "n": ds.n, "m": m, "sigma": config.sigma,
                                 "noise_level": config.noise_level,
                                 "true_class": label, "cue_id": idx,
                                 "level": level, "predicted_class": None,
                                 "rejected": 1})
                    if config.examples_out and fold == folds[0]:
                        example_feats.append(np.zeros((1, ds.n),
                                                      dtype=np.float32))
                    continue
                reconstructed = inv_quantize(result.pattern, qp)
                predicted = int(ctx.classifier.predict(reconstructed))
                rows.append({"experiment": "chains", "fold": fold, "n": ds.n,
                             "m": m, "sigma": config.sigma,
                             "noise_level": config.noise_level,
                             "true_class": label, "cue_id": idx,
                             "level": level, "predicted_class": predicted,
                             "rejected": 0})
                if config.examples_out and fold == folds[0]:
                    example_feats.append(
                        reconstructed[None, :].astype(np.float32))
    _write_csv(config.out, CHAIN_COLUMNS, rows)
    manifest = _write_manifest(config, "chains",
                               {"m_values": [m_values[0]], "folds": folds,
                                "n_values": [ds.n]})
    examples_path = None
    if config.examples_out and example_feats:
        write_features(FeatureDataset(np.concatenate(example_feats)),
                       config.examples_out)
        examples_path = str(config.examples_out)
    return ExperimentReport("chains", rows, str(config.out), manifest, [],
                            examples_path)


def class_transitions(rows) -> dict[tuple, int]:
    """Tally of level-to-level class transitions across all chains."""
    chains: dict[tuple, list] = {}
    for row in rows:
        chains.setdefault((row["fold"], row["true_class"]), []).append(row)
    tally: dict[tuple, int] = {}
    for members in chains.values():
        members.sort(key=lambda r: r["level"])
        previous = members[0]["true_class"]
        for row in members:
            current = ("rejected" if row["rejected"]
                       else row["predicted_class"])
            key = (previous, current)
            tally[key] = tally.get(key, 0) + 1
            previous = current
    return tally
