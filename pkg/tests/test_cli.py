import csv

import numpy as np
import pytest

from milp_retrieval.cli import MODEL_ENV, main
from milp_retrieval.model import save_checkpoint
from milp_retrieval.mps import read_mps_file


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and "," not in line)


@pytest.fixture(scope="module")
def ckpt(tiny_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "tiny.ckpt"
    save_checkpoint(tiny_model, path)
    return str(path)


@pytest.fixture(scope="module")
def sc_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sc")
    assert main(["generate", "--class", "SC", "--param", "n_rows=20", "--param", "n_cols=40",
                 "--param", "density=0.2", "--count", "3", "--seed", "4", "--out", str(out)]) == 0
    return out


def test_generate(sc_dir, capsys):
    files = sorted(sc_dir.glob("*.mps"))
    assert [f.name for f in files] == ["SC_4_0.mps", "SC_4_1.mps", "SC_4_2.mps"]
    assert read_mps_file(files[0]).n_vars == 40
    rows = list(csv.reader((sc_dir / "stats.csv").open()))
    assert rows[0][0] == "file" and len(rows) == 4


def test_generate_errors(tmp_path, capsys):
    assert main(["generate", "--class", "XYZ", "--out", str(tmp_path)]) != 0
    assert "SC" in capsys.readouterr().err
    assert main(["generate", "--class", "SC", "--count", "0", "--out", str(tmp_path / "e")]) == 0
    assert list((tmp_path / "e").iterdir()) == []
    assert kv(capsys.readouterr().out)["count"] == "0"
    assert main(["generate", "--class", "SC", "--param", "bogus=1", "--out", str(tmp_path)]) == 1


def test_featurize(sc_dir, tmp_path, capsys):
    assert main(["featurize", str(sc_dir / "SC_4_0.mps"), "--out", str(tmp_path / "g.txt")]) == 0
    out = kv(capsys.readouterr().out)
    assert out["n_vars"] == "40" and out["lp_status"] == "Optimal"
    assert (tmp_path / "g.txt").read_text().startswith("BIPARTITE 1")


def test_sim(sc_dir, ckpt, tmp_path, capsys):
    a = str(sc_dir / "SC_4_0.mps")
    assert main(["sim", a, a, "--model", ckpt]) == 0
    assert abs(float(kv(capsys.readouterr().out)["sim"]) - 1.0) <= 1e-6
    assert main(["sim", "--matrix", str(sc_dir), "--model", ckpt, "--out", str(tmp_path / "m.csv")]) == 0
    rows = list(csv.reader((tmp_path / "m.csv").open()))
    M = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert M.shape == (3, 3) and np.array_equal(M, M.T)
    bad = tmp_path / "bad.mps"
    bad.write_text("NAME x\nROWS\n")
    assert main(["sim", a, str(bad), "--model", ckpt]) == 1


def test_model_from_environment(sc_dir, ckpt, monkeypatch, capsys):
    a = str(sc_dir / "SC_4_0.mps")
    monkeypatch.delenv(MODEL_ENV, raising=False)
    assert main(["sim", a, a]) == 1
    monkeypatch.setenv(MODEL_ENV, ckpt)
    assert main(["sim", a, a]) == 0


def test_embed(sc_dir, ckpt, capsys):
    assert main(["embed", str(sc_dir / "SC_4_1.mps"), "--model", ckpt]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("SC_4_1,") and len(out[0].split(",")) == 17
    assert kv("\n".join(out[1:]))["dim"] == "16"


def test_eval(sc_dir, ckpt, tmp_path, capsys):
    assert main(["eval", "kway", str(sc_dir), "--k", "1", "--model", ckpt]) == 0
    out = kv(capsys.readouterr().out)
    assert float(out["milp_to_text"]) == 1.0 and float(out["text_to_milp"]) == 1.0
    assert main(["eval", "js", str(sc_dir), str(sc_dir)]) == 0
    assert float(kv(capsys.readouterr().out)["js"]) == 0.0
    assert main(["eval", "feasible-ratio", str(sc_dir), "--out", str(tmp_path / "f.csv")]) == 0
    assert float(kv(capsys.readouterr().out)["feasible_ratio"]) == 1.0
    assert main(["eval", "js", str(tmp_path / "nothing"), str(sc_dir)]) == 1


def test_print_config(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("# toy run\npreset = toy\nepochs = 7\n")
    assert main(["train", "--config", str(cfg), "--set", "lr=0.01", "--print-config"]) == 0
    out = capsys.readouterr().out
    assert "epochs = 7" in out and "lr = 0.01" in out and "out_dim = 256" in out
    assert main(["train", "--config", str(tmp_path / "missing.txt")]) == 1


def test_train_deterministic(tmp_path, capsys):
    args = ["train", "--toy", "--set", "epochs=2", "--set", "emb_size=8", "--set", "attn_heads=2",
            "--set", "attn_layers=1", "--set", "gcn_layers=1", "--set", "out_dim=16", "--set", "sampled_nodes=16",
            "--classes", "KS,CA", "--per-class", "3"]
    assert main(args + ["--out", str(tmp_path / "a.ckpt"), "--history", str(tmp_path / "h.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.ckpt")]) == 0
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()
    rows = list(csv.reader((tmp_path / "h.csv").open()))
    assert rows[0][0] == "epoch" and [r[0] for r in rows[1:]] == ["1", "2"]


def test_library_build_and_retrieve(ckpt, sc_dir, tmp_path, capsys):
    lib = tmp_path / "lib"
    assert main(["library-build", "--classes", "KS,SC", "--per-class", "2", "--model", ckpt, "--out", str(lib)]) == 0
    assert kv(capsys.readouterr().out)["entries"] == "2"
    gen = tmp_path / "gen"
    assert main(["retrieve", str(sc_dir / "SC_4_0.mps"), "--library", str(lib), "--model", ckpt,
                 "--generate", "5", "--out", str(gen)]) == 0
    out = kv(capsys.readouterr().out)
    assert out["class_id"] in ("KS", "SC") and "score.KS" in out
    assert len(list(gen.glob("*.mps"))) == 5
    (tmp_path / "empty").mkdir()
    assert main(["retrieve", str(sc_dir / "SC_4_0.mps"), "--library", str(tmp_path / "empty"), "--model", ckpt]) == 1
