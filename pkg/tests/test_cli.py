import numpy as np
import pytest

from weam.cli import main
from weam.corpus import (make_synthetic, read_features, write_features,
                         write_labels)
from weam.metrics import REJECTED_LABEL


@pytest.fixture(scope="module")
def data_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    ds = make_synthetic(classes=5, per_class=30, n=8, separation=8.0, seed=2)
    write_features(ds, root / "d.eamf", root / "d.eaml")
    return str(root / "d.eamf"), str(root / "d.eaml")


def test_gen_synthetic(tmp_path, capsys):
    code = main(["gen-synthetic", "--features-out", str(tmp_path / "s.eamf"),
                 "--labels-out", str(tmp_path / "s.eaml"),
                 "--classes", "3", "--per-class", "5", "--n", "4"])
    assert code == 0
    assert "wrote 15 items" in capsys.readouterr().out
    assert read_features(str(tmp_path / "s.eamf")).features.shape == (15, 4)


def test_calibrate_register_recognize_retrieve_flow(data_files, tmp_path,
                                                    capsys):
    fpath, lpath = data_files
    qpath = str(tmp_path / "q.eamq")
    mpath = str(tmp_path / "m.eamr")

    assert main(["calibrate", "--features", fpath, "--m", "8",
                 "--out", qpath, "--fold", "0"]) == 0
    assert main(["register", "--features", fpath, "--quantizer", qpath,
                 "--out", mpath, "--fold", "0"]) == 0
    out = capsys.readouterr().out
    assert "registered 30 patterns" in out

    assert main(["recognize", "--memory", mpath, "--quantizer", qpath,
                 "--features", fpath, "--fold", "0"]) == 0
    assert "accepted" in capsys.readouterr().out

    assert main(["retrieve", "--memory", mpath, "--quantizer", qpath,
                 "--features", fpath, "--fold", "0", "--sigma", "0.04",
                 "--out", str(tmp_path / "r.eamf"),
                 "--out-flags", str(tmp_path / "r.eaml")]) == 0
    assert "retrieved" in capsys.readouterr().out


def test_recognize_dimension_mismatch_diagnostic(data_files, tmp_path,
                                                 capsys):
    fpath, lpath = data_files
    qpath = str(tmp_path / "q.eamq")
    mpath = str(tmp_path / "m.eamr")
    main(["calibrate", "--features", fpath, "--m", "4", "--out", qpath])
    main(["register", "--features", fpath, "--quantizer", qpath,
          "--out", mpath])
    other_q = str(tmp_path / "q16.eamq")
    main(["calibrate", "--features", fpath, "--m", "16", "--out", other_q])
    capsys.readouterr()

    code = main(["recognize", "--memory", mpath, "--quantizer", other_q,
                 "--features", fpath])
    assert code == 1
    err = capsys.readouterr().err
    assert "quantizer expects" in err


def test_grid_subcommand(data_files, tmp_path, capsys):
    fpath, lpath = data_files
    out = str(tmp_path / "grid.csv")
    code = main(["grid", "--features", fpath, "--labels", lpath,
                 "--out", out, "--m", "2,8", "--fold", "0"])
    assert code == 0
    printed = capsys.readouterr().out
    assert "grid: 2 rows" in printed
    assert "best by F1" in printed
    header = open(out).readline()
    assert header.startswith("experiment,fold,n,m")


def test_chain_subcommand_default_sigma(data_files, tmp_path, capsys):
    fpath, lpath = data_files
    code = main(["chain", "--features", fpath, "--labels", lpath,
                 "--out", str(tmp_path / "chain.csv"), "--fold", "0"])
    assert code == 0
    printed = capsys.readouterr().out
    assert "chains: 30 rows" in printed
    assert "class transitions" in printed


def test_sigma_sweep_subcommand(data_files, tmp_path, capsys):
    fpath, lpath = data_files
    code = main(["sigma-sweep", "--features", fpath, "--labels", lpath,
                 "--out", str(tmp_path / "s.csv"),
                 "--sigma-values", "0.01,0.05", "--fold", "0"])
    assert code == 0
    assert "sigma-sweep: 2 rows" in capsys.readouterr().out


def test_fill_sweep_subcommand(data_files, tmp_path, capsys):
    fpath, lpath = data_files
    code = main(["fill-sweep", "--features", fpath, "--labels", lpath,
                 "--out", str(tmp_path / "f.csv"), "--m", "8",
                 "--fill", "4,100", "--fold", "0"])
    assert code == 0
    assert "fill-sweep: 2 rows" in capsys.readouterr().out


def test_eval_subcommand(tmp_path, capsys):
    write_labels(np.array([0] * 10, dtype=np.uint16), tmp_path / "t.eaml")
    write_labels(np.array([0] * 6 + [1] * 2 + [REJECTED_LABEL] * 2,
                          dtype=np.uint16), tmp_path / "p.eaml")
    code = main(["eval", "--true", str(tmp_path / "t.eaml"),
                 "--pred", str(tmp_path / "p.eaml")])
    assert code == 0
    printed = capsys.readouterr().out
    assert "precision=0.7500" in printed
    assert "recall=0.6000" in printed


def test_missing_file_fails_with_diagnostic(tmp_path, capsys):
    code = main(["calibrate", "--features", str(tmp_path / "nope.eamf"),
                 "--m", "4", "--out", str(tmp_path / "q.eamq")])
    assert code == 1
    assert "file not found" in capsys.readouterr().err


def test_unknown_flag_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["grid", "--bogus", "1"])
    assert exc.value.code == 2


def test_seed_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("WEAM_SEED", "7")
    a = str(tmp_path / "a.eamf")
    main(["gen-synthetic", "--features-out", a,
          "--labels-out", str(tmp_path / "a.eaml"),
          "--classes", "2", "--per-class", "4", "--n", "3"])
    monkeypatch.delenv("WEAM_SEED")
    b = str(tmp_path / "b.eamf")
    main(["gen-synthetic", "--features-out", b,
          "--labels-out", str(tmp_path / "b.eaml"),
          "--classes", "2", "--per-class", "4", "--n", "3"])
    explicit = str(tmp_path / "c.eamf")
    main(["gen-synthetic", "--features-out", explicit,
          "--labels-out", str(tmp_path / "c.eaml"),
          "--classes", "2", "--per-class", "4", "--n", "3", "--seed", "7"])
    capsys.readouterr()
    feats_env = read_features(a).features
    feats_default = read_features(b).features
    feats_explicit = read_features(explicit).features
    assert not np.array_equal(feats_env, feats_default)
    assert np.array_equal(feats_env, feats_explicit)


def test_split_manifest_subcommand(data_files, tmp_path, capsys):
    fpath, lpath = data_files
    out = str(tmp_path / "split.json")
    code = main(["split-manifest", "--features", fpath, "--out", out])
    assert code == 0
    assert "150 items" in capsys.readouterr().out
    import json

    manifest = json.load(open(out))
    assert manifest["count"] == 150


def test_help_documents_file_formats(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "EAMF" in capsys.readouterr().out
