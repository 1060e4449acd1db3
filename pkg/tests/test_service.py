import numpy as np
import pytest
from fastapi.testclient import TestClient

from weam.corpus import make_synthetic, read_features, read_labels, write_features
from weam.metrics import REJECTED_LABEL
from weam.service.app import create_app


@pytest.fixture()
def client():
    with TestClient(create_app()) as c:
        yield c


@pytest.fixture(scope="module")
def data_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc")
    ds = make_synthetic(classes=5, per_class=30, n=8, separation=8.0, seed=2)
    write_features(ds, root / "d.eamf", root / "d.eaml")
    return root, str(root / "d.eamf"), str(root / "d.eaml")


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_memory_lifecycle(client, tmp_path):
    info = client.post("/memories", json={"n": 3, "m": 4, "name": "demo"}).json()
    assert info == {"name": "demo", "n": 3, "m": 4, "total_registrations": 0,
                    "entropy": 0.0, "omega_bar": 0.0, "log2_capacity": 0.0}

    reg = client.post("/memories/demo/register",
                      json={"patterns": [[0, 1, 2], [0, 1, 2], [1, 1, 3]]})
    assert reg.json()["total_registrations"] == 3

    rec = client.post("/memories/demo/recognize", json={"pattern": [0, 1, 2]})
    assert rec.json()["accepted"] is True
    rec = client.post("/memories/demo/recognize", json={"pattern": [2, 0, 0]})
    assert rec.json()["accepted"] is False

    ret = client.post("/memories/demo/retrieve",
                      json={"pattern": [0, 1, 2], "sigma": 0.0, "seed": 7})
    assert ret.json()["rejected"] is False
    assert ret.json()["pattern"] == [0, 1, 2]

    chn = client.post("/memories/demo/chain",
                      json={"pattern": [0, 1, 2], "depth": 3, "sigma": 0.0})
    steps = chn.json()["steps"]
    assert len(steps) == 3
    assert all(s["pattern"] == [0, 1, 2] for s in steps)

    path = str(tmp_path / "demo.eamr")
    saved = client.post("/memories/demo/save", json={"path": path}).json()
    assert saved["bytes_written"] == 21 + 2 * 3 * 4

    loaded = client.post("/memories/load",
                         json={"path": path, "name": "copy"}).json()
    assert loaded["total_registrations"] == 3

    listing = client.get("/memories").json()["memories"]
    assert [m["name"] for m in listing] == ["copy", "demo"]

    assert client.delete("/memories/demo").status_code == 200
    assert client.get("/memories/demo").status_code == 404


def test_memory_errors(client):
    assert client.post("/memories", json={"n": 0, "m": 2}).status_code == 400
    client.post("/memories", json={"n": 2, "m": 2, "name": "x"})
    dup = client.post("/memories", json={"n": 2, "m": 2, "name": "x"})
    assert dup.status_code == 400
    bad = client.post("/memories/x/recognize", json={"pattern": [0, 1, 2]})
    assert bad.status_code == 400
    assert "width" in bad.json()["detail"]
    missing = client.post("/memories/nope/recognize", json={"pattern": [0]})
    assert missing.status_code == 404


def test_file_pipeline(client, data_files, tmp_path):
    root, fpath, lpath = data_files
    qpath = str(tmp_path / "q.eamq")
    cal = client.post("/calibrate", json={"features": fpath, "m": 8,
                                          "out": qpath, "fold": 0}).json()
    assert cal["n"] == 8 and cal["m"] == 8
    assert cal["calibrated_on"] == 30

    mpath = str(tmp_path / "mem.eamr")
    reg = client.post("/register", json={"features": fpath, "quantizer": qpath,
                                         "out": mpath, "fold": 0}).json()
    assert reg["registered"] == 30
    assert reg["total_registrations"] == 30

    rec = client.post("/recognize", json={"memory": mpath, "quantizer": qpath,
                                          "features": fpath, "fold": 0,
                                          "out": str(tmp_path / "rec.csv")}
                      ).json()
    assert rec["total"] == 15
    assert 0 <= rec["accepted"] <= 15
    report_lines = (tmp_path / "rec.csv").read_text().strip().split("\n")
    assert report_lines[0] == "cue_index,accepted,failed_columns,rho"
    assert len(report_lines) == 16

    out_f = str(tmp_path / "ret.eamf")
    out_l = str(tmp_path / "ret.eaml")
    ret = client.post("/retrieve", json={"memory": mpath, "quantizer": qpath,
                                         "features": fpath, "fold": 0,
                                         "sigma": 0.0, "out": out_f,
                                         "out_flags": out_l}).json()
    assert ret["total"] == 15
    assert ret["accepted"] == rec["accepted"]
    flags = read_labels(out_l)
    assert (flags == 1).sum() == ret["accepted"]
    assert (flags == REJECTED_LABEL).sum() == ret["rejected"]
    retrieved = read_features(out_f)
    assert retrieved.features.shape == (15, 8)


def test_register_dimension_mismatch(client, data_files, tmp_path):
    root, fpath, lpath = data_files
    qpath = str(tmp_path / "q4.eamq")
    client.post("/calibrate", json={"features": fpath, "m": 4, "out": qpath})
    mpath = str(tmp_path / "m4.eamr")
    client.post("/register", json={"features": fpath, "quantizer": qpath,
                                   "out": mpath})
    q8 = str(tmp_path / "q8.eamq")
    client.post("/calibrate", json={"features": fpath, "m": 8, "out": q8})
    bad = client.post("/recognize", json={"memory": mpath, "quantizer": q8,
                                          "features": fpath})
    assert bad.status_code == 400
    assert "quantizer expects" in bad.json()["detail"]


def test_missing_file_is_404(client, tmp_path):
    resp = client.post("/calibrate", json={"features": str(tmp_path / "no.eamf"),
                                           "m": 4,
                                           "out": str(tmp_path / "q.eamq")})
    assert resp.status_code == 404


def test_synthetic_endpoint(client, tmp_path):
    resp = client.post("/synthetic", json={
        "features_out": str(tmp_path / "s.eamf"),
        "labels_out": str(tmp_path / "s.eaml"),
        "classes": 3, "per_class": 10, "n": 4, "seed": 1}).json()
    assert resp["count"] == 30
    ds = read_features(resp["features_out"], resp["labels_out"])
    assert ds.features.shape == (30, 4)


def test_grid_endpoint(client, data_files, tmp_path):
    root, fpath, lpath = data_files
    resp = client.post("/grid", json={"features": fpath, "labels": lpath,
                                      "out": str(tmp_path / "g.csv"),
                                      "m_values": [2, 8], "folds": [0]}).json()
    assert resp["rows"] == 2
    assert resp["best"]["m"] in (2, 8)
    assert resp["manifest_path"].endswith(".manifest.json")


def test_chain_endpoint(client, data_files, tmp_path):
    root, fpath, lpath = data_files
    resp = client.post("/chain", json={"features": fpath, "labels": lpath,
                                       "out": str(tmp_path / "c.csv"),
                                       "folds": [0], "sigma": 0.04}).json()
    assert resp["rows"] == 5 * 6
    assert all("transition" in item for item in resp["summary"])


def test_eval_endpoint(client, tmp_path):
    from weam.corpus import write_labels

    true_path = str(tmp_path / "t.eaml")
    pred_path = str(tmp_path / "p.eaml")
    write_labels(np.array([0] * 6 + [0] * 2 + [0] * 2, dtype=np.uint16),
                 true_path)
    write_labels(np.array([0] * 6 + [1] * 2 + [REJECTED_LABEL] * 2,
                          dtype=np.uint16), pred_path)
    resp = client.post("/eval", json={"true_labels": true_path,
                                      "predicted_labels": pred_path,
                                      "out": str(tmp_path / "e.csv")}).json()
    assert resp["precision"] == 0.75
    assert resp["recall"] == resp["accuracy"] == 0.6
    assert abs(resp["f1"] - 0.6667) < 5e-5
    text = (tmp_path / "e.csv").read_text()
    assert text.startswith("total,correct,")


def test_register_fill_percent_validation(client, data_files, tmp_path):
    root, fpath, lpath = data_files
    qpath = str(tmp_path / "q.eamq")
    client.post("/calibrate", json={"features": fpath, "m": 4, "out": qpath})
    bad = client.post("/register", json={"features": fpath, "quantizer": qpath,
                                         "out": str(tmp_path / "m.eamr"),
                                         "fill_percent": 150.0})
    assert bad.status_code == 400
