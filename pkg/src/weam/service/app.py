"""FastAPI service wrapping the memory, quantizer, and experiment drivers.

Two endpoint families:

* ``/memories``: a registry of live registers for interactive use; patterns
  travel as JSON row lists.
* one file-based endpoint per CLI subcommand (``/synthetic``, ``/calibrate``,
  ``/register``, ``/recognize``, ``/retrieve``, ``/chain``, ``/grid``,
  ``/fill-sweep``, ``/sigma-sweep``, ``/eval``); bulk data stays in the wire
  formats on disk and requests carry paths.

Registration needs exclusive access to a register, so every live-memory
operation holds that memory's lock; reads are cheap enough that the shared
lock is not a bottleneck for a localhost tool.
"""

from __future__ import annotations

import threading

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..amr import Amr
from ..corpus import (FeatureDataset, make_synthetic, read_features,
                      read_labels, split_folds, write_features, write_labels,
                      write_split_manifest)
from ..experiments import (ExperimentConfig, ExperimentReport, aggregate,
                           class_transitions, run_chains, run_fill_sweep,
                           run_grid, run_sigma_sweep)
from ..fileio import atomic_write_text
from ..metrics import REJECTED_LABEL, evaluate_labels
from ..ops import (RecognitionParams, RetrievalParams, chain, recognize,
                   recognize_batch, register, register_batch, retrieve)
from ..quantizer import QuantizerParams, calibrate, inv_quantize, quantize
from . import schemas


class MemoryRegistry:
    """Named live registers plus their locks."""

    def __init__(self):
        self._memories: dict[str, tuple[Amr, threading.Lock]] = {}
        self._lock = threading.Lock()
        self._counter = 0

    def add(self, amr: Amr, name: str | None) -> str:
        with self._lock:
            if name is None:
                self._counter += 1
                name = f"memory-{self._counter}"
            if name in self._memories:
                raise ValueError(f"memory {name!r} already exists")
            self._memories[name] = (amr, threading.Lock())
            return name

    def get(self, name: str) -> tuple[Amr, threading.Lock]:
        with self._lock:
            if name not in self._memories:
                raise KeyError(name)
            return self._memories[name]

    def remove(self, name: str) -> None:
        with self._lock:
            if name not in self._memories:
                raise KeyError(name)
            del self._memories[name]

    def names(self) -> list[str]:
        with self._lock:
            return sorted(self._memories)


def _memory_info(name: str, amr: Amr) -> schemas.MemoryInfo:
    stats = amr.stats()
    return schemas.MemoryInfo(
        name=name, n=amr.n, m=amr.m,
        total_registrations=amr.total_registrations,
        entropy=stats.entropy, omega_bar=stats.omega_bar,
        log2_capacity=stats.log2_capacity)


def _select_rows(request, dataset, which: str) -> np.ndarray:
    """Pick the fold subset (remembered for filling, test for cueing)."""
    if request.fold is None:
        return np.arange(len(dataset))
    split = split_folds(len(dataset), request.fold, request.seed)
    return getattr(split, which)


def _experiment_response(report: ExperimentReport, keys,
                         transitions: dict | None = None
                         ) -> schemas.ExperimentResponse:
    summary = aggregate(report.rows, keys) if keys else []
    best = max(summary, key=lambda r: r["f1_mean"]) if summary else None
    if transitions is not None:
        summary = [{"transition": f"{a}->{b}", "count": c}
                   for (a, b), c in sorted(transitions.items(), key=str)]
    return schemas.ExperimentResponse(
        experiment=report.experiment, csv_path=report.csv_path,
        manifest_path=report.manifest_path, rows=len(report.rows),
        plot_paths=report.plot_paths, examples_path=report.examples_path,
        best=best, summary=summary)


def create_app() -> FastAPI:
    app = FastAPI(title="weam", version=__version__)
    registry = MemoryRegistry()

    @app.exception_handler(ValueError)
    async def value_error(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def not_found_error(request, exc):
        return JSONResponse(status_code=404,
                            content={"detail": f"file not found: {exc.filename}"})

    @app.exception_handler(KeyError)
    async def key_error(request, exc):
        return JSONResponse(status_code=404,
                            content={"detail": f"no such memory: {exc.args[0]}"})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    # -- live memory registry ------------------------------------------

    @app.post("/memories", response_model=schemas.MemoryInfo)
    def create_memory(request: schemas.MemoryCreateRequest):
        name = registry.add(Amr(request.n, request.m), request.name)
        return _memory_info(name, registry.get(name)[0])

    @app.post("/memories/load", response_model=schemas.MemoryInfo)
    def load_memory(request: schemas.MemoryLoadRequest):
        name = registry.add(Amr.load(request.path), request.name)
        return _memory_info(name, registry.get(name)[0])

    @app.get("/memories", response_model=schemas.MemoryListResponse)
    def list_memories():
        infos = [_memory_info(name, registry.get(name)[0])
                 for name in registry.names()]
        return schemas.MemoryListResponse(memories=infos)

    @app.get("/memories/{name}", response_model=schemas.MemoryInfo)
    def memory_stats(name: str):
        amr, lock = registry.get(name)
        with lock:
            return _memory_info(name, amr)

    @app.delete("/memories/{name}")
    def delete_memory(name: str):
        registry.remove(name)
        return {"deleted": name}

    @app.post("/memories/{name}/save", response_model=schemas.MemorySaveResponse)
    def save_memory(name: str, request: schemas.MemorySaveRequest):
        amr, lock = registry.get(name)
        with lock:
            written = amr.save(request.path)
        return schemas.MemorySaveResponse(path=request.path,
                                          bytes_written=written)

    @app.post("/memories/{name}/register",
              response_model=schemas.RegisterPatternsResponse)
    def register_patterns(name: str, request: schemas.PatternBatchRequest):
        amr, lock = registry.get(name)
        with lock:
            if len(request.patterns) == 1:
                register(amr, request.patterns[0])
            else:
                register_batch(amr, np.asarray(request.patterns))
            return schemas.RegisterPatternsResponse(
                registered=len(request.patterns),
                total_registrations=amr.total_registrations,
                entropy=amr.stats().entropy)

    @app.post("/memories/{name}/recognize",
              response_model=schemas.RecognizeResponse)
    def recognize_pattern(name: str, request: schemas.RecognizeRequest):
        params = RecognitionParams(request.iota, request.kappa, request.xi)
        amr, lock = registry.get(name)
        with lock:
            report = recognize(amr, request.pattern, params)
        return schemas.RecognizeResponse(
            accepted=report.accepted, failed_columns=report.failed_columns,
            rho=report.rho, omega_bar=report.omega_bar)

    @app.post("/memories/{name}/retrieve",
              response_model=schemas.RetrieveResponse)
    def retrieve_pattern(name: str, request: schemas.RetrieveRequest):
        recp = RecognitionParams(request.iota, request.kappa, request.xi)
        rp = RetrievalParams(sigma=request.sigma, seed=request.seed)
        amr, lock = registry.get(name)
        with lock:
            result = retrieve(amr, request.pattern, rp, recp)
        return _retrieval_to_schema(result)

    @app.post("/memories/{name}/chain", response_model=schemas.ChainResponse)
    def chain_pattern(name: str, request: schemas.ChainRequest):
        recp = RecognitionParams(request.iota, request.kappa, request.xi)
        rp = RetrievalParams(sigma=request.sigma, seed=request.seed)
        amr, lock = registry.get(name)
        with lock:
            results = chain(amr, request.pattern, request.depth, rp, recp)
        return schemas.ChainResponse(
            steps=[_retrieval_to_schema(r) for r in results])

    # -- file-based operations ------------------------------------------

    @app.post("/synthetic", response_model=schemas.SyntheticResponse)
    def synthetic(request: schemas.SyntheticRequest):
        ds = make_synthetic(request.classes, request.per_class, request.n,
                            request.separation, request.seed)
        write_features(ds, request.features_out, request.labels_out)
        return schemas.SyntheticResponse(
            features_out=request.features_out, labels_out=request.labels_out,
            count=len(ds), n=ds.n)

    @app.post("/split-manifest", response_model=schemas.SplitManifestResponse)
    def split_manifest(request: schemas.SplitManifestRequest):
        if (request.count is None) == (request.features is None):
            raise ValueError("give exactly one of count or features")
        count = (request.count if request.count is not None
                 else len(read_features(request.features)))
        write_split_manifest(count, request.seed, request.out)
        return schemas.SplitManifestResponse(out=request.out, count=count,
                                             seed=request.seed)

    @app.post("/calibrate", response_model=schemas.CalibrateResponse)
    def calibrate_quantizer(request: schemas.CalibrateRequest):
        ds = read_features(request.features)
        rows = _select_rows(request, ds, "remembered")
        params = calibrate(ds.features[rows], request.m, request.per_feature)
        params.save(request.out)
        return schemas.CalibrateResponse(out=request.out, n=params.n,
                                         m=params.m, calibrated_on=len(rows))

    @app.post("/register", response_model=schemas.RegisterFileResponse)
    def register_file(request: schemas.RegisterFileRequest):
        if not 0 <= request.fill_percent <= 100:
            raise ValueError(
                f"fill percent must be in [0, 100], got {request.fill_percent}")
        params = QuantizerParams.load(request.quantizer)
        amr = (Amr.load(request.memory) if request.memory
               else Amr(params.n, params.m))
        if amr.n != params.n or amr.m != params.m:
            raise ValueError(
                f"memory is {amr.n}x{amr.m} but quantizer expects "
                f"{params.n}x{params.m}")
        ds = read_features(request.features)
        rows = _select_rows(request, ds, "remembered")
        count = round(len(rows) * request.fill_percent / 100.0)
        patterns = quantize(ds.features[rows[:count]], params)
        if count:
            register_batch(amr, patterns)
        written = amr.save(request.out)
        return schemas.RegisterFileResponse(
            out=request.out, n=amr.n, m=amr.m, registered=count,
            total_registrations=amr.total_registrations,
            entropy=amr.stats().entropy, bytes_written=written)

    @app.post("/recognize", response_model=schemas.RecognizeFileResponse)
    def recognize_file(request: schemas.RecognizeFileRequest):
        recp = RecognitionParams(request.iota, request.kappa, request.xi)
        params = QuantizerParams.load(request.quantizer)
        amr = Amr.load(request.memory)
        if amr.n != params.n or amr.m != params.m:
            raise ValueError(
                f"memory is {amr.n}x{amr.m} but quantizer expects "
                f"{params.n}x{params.m}")
        ds = read_features(request.features)
        rows = _select_rows(request, ds, "test")
        patterns = quantize(ds.features[rows], params)
        accepted, failed, rho = recognize_batch(amr, patterns, recp)
        if request.out:
            lines = ["cue_index,accepted,failed_columns,rho"]
            for k, idx in enumerate(rows):
                lines.append(f"{idx},{int(accepted[k])},{failed[k]},"
                             f"{rho[k]:.10g}")
            atomic_write_text(request.out, "\n".join(lines) + "\n")
        omega_bar = float(amr.omegas().mean())
        return schemas.RecognizeFileResponse(
            total=len(rows), accepted=int(accepted.sum()),
            rejected=int(len(rows) - accepted.sum()), omega_bar=omega_bar,
            out=request.out)

    @app.post("/retrieve", response_model=schemas.RetrieveFileResponse)
    def retrieve_file(request: schemas.RetrieveFileRequest):
        recp = RecognitionParams(request.iota, request.kappa, request.xi)
        rp = RetrievalParams(sigma=request.sigma, seed=request.seed)
        params = QuantizerParams.load(request.quantizer)
        amr = Amr.load(request.memory)
        if amr.n != params.n or amr.m != params.m:
            raise ValueError(
                f"memory is {amr.n}x{amr.m} but quantizer expects "
                f"{params.n}x{params.m}")
        ds = read_features(request.features)
        rows = _select_rows(request, ds, "test")
        patterns = quantize(ds.features[rows], params)
        out_features = np.zeros((len(rows), amr.n), dtype=np.float32)
        flags = np.full(len(rows), REJECTED_LABEL, dtype=np.uint16)
        accepted = 0
        for k, idx in enumerate(rows):
            result = retrieve(amr, patterns[k], rp, recp, nonce=int(idx))
            if result.rejected:
                continue
            accepted += 1
            flags[k] = 1
            out_features[k] = inv_quantize(result.pattern, params)
        write_features(FeatureDataset(out_features), request.out)
        if request.out_flags:
            write_labels(flags, request.out_flags)
        return schemas.RetrieveFileResponse(
            total=len(rows), accepted=accepted,
            rejected=len(rows) - accepted, out=request.out,
            out_flags=request.out_flags)

    # -- experiment drivers ---------------------------------------------

    def _config(request, **extra) -> ExperimentConfig:
        return ExperimentConfig(
            features=request.features, labels=request.labels,
            out=request.out, n_values=request.n_values,
            m_values=request.m_values, folds=request.folds,
            sigma=request.sigma, iota=request.iota, kappa=request.kappa,
            xi=request.xi, seed=request.seed,
            noise_level=request.noise_level,
            global_range=request.global_range, **extra)

    @app.post("/grid", response_model=schemas.ExperimentResponse)
    def grid(request: schemas.GridRequest):
        report = run_grid(_config(request))
        return _experiment_response(report, ["n", "m"])

    @app.post("/fill-sweep", response_model=schemas.ExperimentResponse)
    def fill_sweep(request: schemas.FillSweepRequest):
        report = run_fill_sweep(
            _config(request, fill_percents=request.fill_percents))
        return _experiment_response(report, ["m", "fill_percent"])

    @app.post("/sigma-sweep", response_model=schemas.ExperimentResponse)
    def sigma_sweep(request: schemas.SigmaSweepRequest):
        report = run_sigma_sweep(
            _config(request, sigma_values=request.sigma_values,
                    examples_out=request.examples_out))
        return _experiment_response(report, ["m", "sigma"])

    @app.post("/chain", response_model=schemas.ExperimentResponse)
    def chain_experiment(request: schemas.ChainExperimentRequest):
        report = run_chains(
            _config(request, chain_depth=request.chain_depth,
                    examples_out=request.examples_out))
        return _experiment_response(report, None,
                                    class_transitions(report.rows))

    @app.post("/eval", response_model=schemas.EvalResponse)
    def eval_labels(request: schemas.EvalRequest):
        true = read_labels(request.true_labels)
        pred = read_labels(request.predicted_labels)
        report = evaluate_labels(true, pred, request.entropy)
        if request.out:
            columns = ["total", "correct", "wrong_class", "rejected", "tp",
                       "fp", "fn", "precision", "recall", "accuracy", "f1",
                       "entropy"]
            values = [getattr(report, c) for c in columns]
            cells = ["" if v is None
                     else ("%.10g" % v if isinstance(v, float) else str(v))
                     for v in values]
            atomic_write_text(request.out,
                              ",".join(columns) + "\n" + ",".join(cells) + "\n")
        return schemas.EvalResponse(
            total=report.total, correct=report.correct,
            wrong_class=report.wrong_class, rejected=report.rejected,
            tp=report.tp, fp=report.fp, fn=report.fn,
            precision=report.precision, recall=report.recall,
            accuracy=report.accuracy, f1=report.f1, entropy=report.entropy,
            out=request.out)

    return app


def _retrieval_to_schema(result) -> "schemas.RetrieveResponse":
    if result.rejected:
        return schemas.RetrieveResponse(rejected=True)
    return schemas.RetrieveResponse(
        rejected=False, pattern=[int(v) for v in result.pattern],
        fallback_columns=[int(v) for v in result.fallback_columns],
        pinned_columns=[int(v) for v in result.pinned_columns])


app = create_app()
