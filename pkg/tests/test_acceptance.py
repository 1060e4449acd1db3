"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline.
Everything here uses the bundled synthetic generator; no external data or
trained networks are involved.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from weam.amr import Amr
from weam.corpus import make_synthetic, write_features
from weam.experiments import (DEFAULT_M_VALUES, ExperimentConfig, aggregate,
                              run_grid)
from weam.metrics import ResponseRecord, evaluate
from weam.ops import (RecognitionParams, RetrievalParams, recognize, register,
                      register_batch, retrieve, sample_pattern)
from weam.quantizer import QuantizerParams, inv_quantize, quantize


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        print(f"[criterion {number:2d}] FAIL  {description}")
        raise
    print(f"[criterion {number:2d}] PASS  {description}")


def test_criterion_01_register_then_recognize_soundness():
    with criterion(1, "registered patterns always accepted at zero thresholds"):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(101)))
        params = RecognitionParams()
        started = time.monotonic()
        for _ in range(10_000):
            n = int(rng.integers(1, 33))
            m = int(rng.integers(1, 17))
            amr = Amr(n, m)
            prefill = int(rng.integers(0, 21))
            if prefill:
                register_batch(amr, rng.integers(0, m, (prefill, n)))
            cue = rng.integers(0, m, n)
            register(amr, cue)
            assert recognize(amr, cue, params).accepted
        elapsed = time.monotonic() - started
        assert elapsed < 10.0, f"took {elapsed:.1f}s, budget is 10s"


def brute_recognize(weights, cue, iota, kappa, xi):
    n = len(weights)
    omegas = []
    entropies = []
    for col in weights:
        nonzero = [w for w in col if w > 0]
        omegas.append(sum(nonzero) / len(nonzero) if nonzero else 0.0)
        total = sum(col)
        entropies.append(
            -sum((w / total) * math.log2(w / total) for w in col if w > 0)
            if total else 0.0)
    omega_bar = sum(omegas) / n
    rho = sum(col[cue[i]] for i, col in enumerate(weights)) / n
    failed = sum(
        1 for i, col in enumerate(weights)
        if not (col[cue[i]] > 0 and col[cue[i]] >= iota * omegas[i]))
    accepted = failed <= xi and rho >= kappa * omega_bar
    return accepted, rho, omega_bar, omegas, entropies


def test_criterion_02_recognition_oracle_equivalence():
    with criterion(2, "recognition statistics match the brute-force reference"):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(102)))
        level_choices = [0.0, 0.5, 1.0, 2.0]
        for _ in range(1_000):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 5))
            weights = rng.integers(0, 9, (n, m))
            amr = Amr(n, m, weights=weights)
            cue = rng.integers(0, m, n)
            p = RecognitionParams(
                iota=level_choices[rng.integers(0, 4)],
                kappa=level_choices[rng.integers(0, 4)],
                xi=int(rng.integers(0, n + 1)))
            report = recognize(amr, cue, p)
            ref_accept, ref_rho, ref_omega_bar, ref_omegas, ref_entropies = \
                brute_recognize([list(map(int, w)) for w in weights],
                                list(map(int, cue)), p.iota, p.kappa, p.xi)
            assert report.accepted == ref_accept
            assert abs(report.rho - ref_rho) < 1e-12
            assert abs(report.omega_bar - ref_omega_bar) < 1e-12
            assert np.allclose(amr.omegas(), ref_omegas, atol=1e-12)
            assert np.allclose(amr.entropies(), ref_entropies, atol=1e-12)


def test_criterion_03_quantizer_contract():
    with criterion(3, "quantizer boundaries, round trip, idempotence, m=1 branch"):
        qp = QuantizerParams(np.array([0.0], dtype=np.float32),
                             np.array([10.0], dtype=np.float32), 16)
        assert quantize([0.0], qp).tolist() == [0]
        assert quantize([10.0], qp).tolist() == [15]
        assert quantize([-1.0], qp).tolist() == [0]
        assert quantize([11.0], qp).tolist() == [15]

        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(103)))
        for _ in range(500):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(2, 64))
            mins = rng.normal(0, 10, n)
            maxs = mins + rng.uniform(0.1, 25, n)
            p = QuantizerParams(mins.astype(np.float32),
                                maxs.astype(np.float32), m)
            x = rng.uniform(p.mins, p.maxs)
            back = inv_quantize(quantize(x, p), p)
            half_bin = (p.maxs - p.mins) / (2 * (m - 1))
            assert np.all(np.abs(back - x) <= half_bin + 1e-9)
            grid = rng.integers(0, m, n)
            assert np.array_equal(quantize(inv_quantize(grid, p), p), grid)

        one_level = QuantizerParams(np.array([2.0], dtype=np.float32),
                                    np.array([6.0], dtype=np.float32), 1)
        assert inv_quantize([0], one_level).tolist() == [2.0]


def test_criterion_04_sigma_zero_identity_retrieval():
    with criterion(4, "sigma=0 retrieval returns the registered cue exactly"):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(104)))
        for case in range(1_000):
            n = int(rng.integers(1, 12))
            m = int(rng.integers(1, 12))
            amr = Amr(n, m)
            prefill = int(rng.integers(0, 16))
            if prefill:
                register_batch(amr, rng.integers(0, m, (prefill, n)))
            cue = rng.integers(0, m, n)
            register(amr, cue)
            result = retrieve(amr, cue, RetrievalParams(sigma=0.0, seed=case))
            assert not result.rejected
            assert np.array_equal(result.pattern, cue)


def test_criterion_05_retrieval_sampling_law():
    with criterion(5, "100k draws match the psi*zeta product; empty row never drawn"):
        amr = Amr(1, 3, weights=[[1, 0, 2]])
        params = RetrievalParams(sigma=40.0, seed=105)  # sigma*m = 120, flat
        draws = 100_000
        counts = np.zeros(3)
        for k in range(draws):
            counts[sample_pattern(amr, [2], params, nonce=k).pattern[0]] += 1

        # closed-form product the sampler must follow
        psi = np.array([1 / 3, 0.0, 2 / 3])
        zeta = np.exp(-((np.arange(3) - 2.0) ** 2) / (2 * 120.0 ** 2))
        phi = psi * zeta / (psi * zeta).sum()

        assert counts[1] == 0
        freq = counts / draws
        assert np.all(np.abs(freq - phi) <= 0.01)
        support = phi > 0
        chi2 = (((counts - draws * phi) ** 2)[support]
                / (draws * phi)[support]).sum()
        assert chi2 < 10.83  # 0.999 quantile at one degree of freedom


def test_criterion_06_metrics_identity_and_worked_example():
    with criterion(6, "accuracy equals recall; the 6/2/2 example scores as stated"):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(106)))
        for _ in range(500):
            total = int(rng.integers(1, 40))
            records = []
            for _ in range(total):
                true = int(rng.integers(0, 4))
                records.append(ResponseRecord(
                    true,
                    None if rng.random() < 0.25 else int(rng.integers(0, 4))))
            report = evaluate(records)
            assert report.accuracy == report.recall

        worked = evaluate([ResponseRecord(0, 0)] * 6
                          + [ResponseRecord(0, 1)] * 2
                          + [ResponseRecord(0, None)] * 2)
        assert worked.precision == 0.75
        assert worked.recall == worked.accuracy == 0.6
        assert round(worked.f1, 4) == 0.6667
        assert abs(worked.f1 - 2 / 3) < 1e-9


def test_criterion_07_capacity_and_entropy():
    with criterion(7, "single object: e=0 and capacity 1; uniform column: log2(m)"):
        amr = Amr(6, 5)
        register(amr, [0, 1, 2, 3, 4, 0])
        stats = amr.stats()
        assert stats.entropy == 0.0
        assert stats.capacity == 1.0

        for m in range(2, 18):
            uniform = Amr(1, m, weights=[[7] * m])
            assert abs(uniform.column_stats(0).entropy - math.log2(m)) <= 1e-9


def test_criterion_08_persistence(tmp_path):
    with criterion(8, "1024x16 payload is exactly 32768 bytes; load o persist = id"):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(108)))
        amr = Amr(1024, 16)
        register_batch(amr, rng.integers(0, 16, (200, 1024)))
        blob = amr.to_bytes()
        header = 4 + 1 + 4 + 4 + 8
        assert len(blob) - header == 32_768
        path = tmp_path / "register.eamr"
        amr.save(path)
        assert Amr.load(path) == amr


def test_criterion_09_entropy_tradeoff_exhibit(tmp_path):
    with criterion(9, "F1-maximizing row count is interior to the swept range"):
        started = time.monotonic()
        ds = make_synthetic(classes=10, per_class=200, n=64, separation=6.0,
                            seed=42)
        fpath, lpath = tmp_path / "bench.eamf", tmp_path / "bench.eaml"
        write_features(ds, fpath, lpath)
        config = ExperimentConfig(features=str(fpath), labels=str(lpath),
                                  out=str(tmp_path / "bench.csv"), seed=42)
        report = run_grid(config)
        agg = aggregate(report.rows, ["m"])
        assert sorted(r["m"] for r in agg) == DEFAULT_M_VALUES
        best = max(agg, key=lambda r: r["f1_mean"])
        assert best["m"] not in (min(DEFAULT_M_VALUES), max(DEFAULT_M_VALUES))
        elapsed = time.monotonic() - started
        assert elapsed < 300.0, f"took {elapsed:.0f}s, budget is 5 minutes"


def test_criterion_10_manifest_rerun_determinism(tmp_path):
    with criterion(10, "rerunning from the written manifest is byte-identical"):
        ds = make_synthetic(classes=6, per_class=40, n=16, separation=7.0,
                            seed=5)
        fpath, lpath = tmp_path / "d.eamf", tmp_path / "d.eaml"
        write_features(ds, fpath, lpath)
        config = ExperimentConfig(features=str(fpath), labels=str(lpath),
                                  out=str(tmp_path / "r.csv"),
                                  m_values=[2, 8, 32], folds=[0, 1, 2])
        first = run_grid(config)
        with open(first.csv_path, "rb") as fh:
            csv_first = fh.read()
        with open(first.manifest_path, "rb") as fh:
            manifest_first = fh.read()

        rerun_config = ExperimentConfig.from_manifest(first.manifest_path)
        second = run_grid(rerun_config)
        with open(second.csv_path, "rb") as fh:
            csv_second = fh.read()
        with open(second.manifest_path, "rb") as fh:
            manifest_second = fh.read()
        assert csv_first == csv_second
        assert manifest_first == manifest_second
