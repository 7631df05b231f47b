import csv
import hashlib
import json

import numpy as np
import pytest

from resilpred import cli, inject
from resilpred.cli import (DataError, build_dataset, cmd_predict, evaluate, gen_corpus,
                           label_manifest, load_manifest, main, predict_rates, read_dataset,
                           train_model)
from resilpred.learn import ModelSpec, PipelineConfig, save_model, train


def run(*argv) -> int:
    return main([str(a) for a in argv])


def sha(path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def labeled(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    m = gen_corpus(d, seed=3, count=12, n=40)
    label_manifest(m, d)
    build_dataset(m, d)
    return d, m


def constant_model(path, value: float, d: int = 30):
    X = np.random.default_rng(0).random((12, d))
    p = train(ModelSpec("ridge"), X, np.full(12, value))
    save_model(p, path)
    return path


def test_manifest_round_trip(labeled):
    d, m = labeled
    entries = load_manifest(m)
    assert len(entries) == 12 and all(e.n == 40 and e.seed == 3 for e in entries)


def test_manifest_rejects_missing_paths(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps(
        {"version": 1, "entries": [{"id": "a", "program": "nope.ir", "inputs": "nope.json"}]}))
    with pytest.raises(DataError, match="missing"):
        load_manifest(tmp_path / "m.json")


def test_labels_rates_partition(labeled):
    d, _ = labeled
    rows = list(csv.DictReader(open(d / "labels.csv")))
    assert len(rows) == 12
    for r in rows:
        assert r["status"] == "ok"
        counts = [int(r[k]) for k in ("success_count", "sdc_count", "interruption_count")]
        assert sum(counts) == int(r["n"]) == 40


def test_label_rerun_is_cached_and_identical(labeled, monkeypatch):
    d, m = labeled
    before = sha(d / "labels.csv")

    def boom(*a, **k):
        raise AssertionError("campaign rerun despite an up-to-date cache")

    monkeypatch.setattr(cli, "run_campaign", boom)
    label_manifest(m, d)
    assert sha(d / "labels.csv") == before


def test_label_parallel_matches_serial(tmp_path, labeled):
    _, m = labeled
    label_manifest(m, tmp_path, jobs=2)
    assert (tmp_path / "labels.csv").read_bytes() == (labeled[0] / "labels.csv").read_bytes()


def test_label_all_failing_is_an_error(tmp_path):
    (tmp_path / "bad.ir").write_text(".output %a i32\nentry:\n  %a = sdiv 1, 0\n  output %a\n  halt\n")
    (tmp_path / "bad.json").write_text("{}")
    (tmp_path / "m.json").write_text(json.dumps(
        {"version": 1, "entries": [{"id": "bad", "program": "bad.ir", "inputs": "bad.json", "n": 5}]}))
    assert run("--out-dir", tmp_path, "label", "--manifest", tmp_path / "m.json") == 2
    assert "unusable" in (tmp_path / "labels.csv").read_text()


def test_dataset_shape_and_format(labeled):
    d, _ = labeled
    lines = (d / "dataset.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header == ["id"] + [f"f{i}" for i in range(30)] + ["success", "interruption"]
    ids, X, Y = read_dataset(d / "dataset.csv")
    assert X.shape == (12, 30) and Y.shape == (12, 2)
    for line in lines[1:]:
        assert all(v == f"{float(v):.9g}" for v in line.split(",")[1:])


def test_features_deterministic(labeled, tmp_path):
    d, m = labeled
    before = sha(d / "dataset.csv")
    build_dataset(m, d)
    assert sha(d / "dataset.csv") == before


def test_features_missing_label_names_the_id(labeled, tmp_path):
    d, m = labeled
    lab = (d / "labels.csv").read_text().splitlines()
    victim = lab[3].split(",")[0]
    (tmp_path / "labels.csv").write_text("\n".join(lab[:3] + lab[4:]) + "\n")
    with pytest.raises(DataError, match=victim):
        build_dataset(m, d, labels=tmp_path / "labels.csv")


def test_features_missing_trace(labeled, tmp_path):
    _, m = labeled
    (tmp_path / "labels.csv").write_text((labeled[0] / "labels.csv").read_text())
    with pytest.raises(DataError, match="missing trace"):
        build_dataset(m, tmp_path)


def test_train_synthetic_dataset(tmp_path):
    g = np.random.default_rng(1)
    X = g.random((60, 30))
    sr = 0.3 + 0.4 * X[:, 0]
    ir = 0.1 + 0.2 * X[:, 5]
    rows = [["id"] + [f"f{i}" for i in range(30)] + ["success", "interruption"]]
    rows += [[f"r{i}", *(f"{v:.9g}" for v in X[i]), f"{sr[i]:.9g}", f"{ir[i]:.9g}"]
             for i in range(60)]
    (tmp_path / "ds.csv").write_text(cli.csv_text(rows))
    cfg = PipelineConfig(kind="ridge", k_cv=5, bags=3)
    mp, rp = train_model(tmp_path / "ds.csv", "success", tmp_path, 4, cfg)
    rep = json.loads(rp.read_text())
    assert 2 <= rep["chosen_k"] <= 30
    assert {"cv_mean", "cv_variance", "chosen_grid_point"} <= set(rep)
    first = mp.read_bytes()
    train_model(tmp_path / "ds.csv", "success", tmp_path, 4, PipelineConfig(kind="ridge", k_cv=5, bags=3))
    assert mp.read_bytes() == first


def test_train_too_few_rows(tmp_path, labeled):
    lines = (labeled[0] / "dataset.csv").read_text().splitlines()[:6]
    (tmp_path / "ds.csv").write_text("\n".join(lines) + "\n")
    assert run("--out-dir", tmp_path, "train", "--dataset", tmp_path / "ds.csv",
               "--target", "success") == 2


@pytest.mark.parametrize("sr,ir,sdc", [(0.7, 0.2, 0.1), (0.8, 0.3, 0.0)])
def test_sdc_is_derived_and_clamped(tmp_path, sr, ir, sdc):
    a = cli._load(constant_model(tmp_path / "sr.json", sr))
    b = cli._load(constant_model(tmp_path / "ir.json", ir))
    p_sr, p_ir, p_sdc = predict_rates(a, b, np.zeros(30))
    assert p_sr == pytest.approx(sr) and p_ir == pytest.approx(ir)
    assert p_sdc == pytest.approx(sdc, abs=1e-12) and p_sdc >= 0


def test_predict_width_mismatch(tmp_path):
    a = cli._load(constant_model(tmp_path / "sr.json", 0.5))
    b = cli._load(constant_model(tmp_path / "ir.json", 0.1, d=29))
    with pytest.raises(DataError):
        predict_rates(a, b, np.zeros(30))


def test_predict_never_injects_or_touches_models(labeled, tmp_path, capsys):
    d, m = labeled
    sr = constant_model(tmp_path / "sr.json", 0.6)
    ir = constant_model(tmp_path / "ir.json", 0.1)
    digests = (sha(sr), sha(ir))
    entry = load_manifest(m)[0]
    before = inject.injection_counter
    from_trace = cmd_predict(sr, ir, trace=d / "traces" / f"{entry.id}.trace")
    from_program = cmd_predict(sr, ir, program=entry.program, inputs=entry.inputs)
    assert run("predict", "--sr-model", sr, "--ir-model", ir, "--program", entry.program,
               "--inputs", entry.inputs) == 0
    assert inject.injection_counter == before
    assert from_trace == from_program
    assert (sha(sr), sha(ir)) == digests
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "id,pred_sr,pred_sdc,pred_ir"


def _write_labels(path, rows):
    lines = [cli.LABEL_HEADER]
    for ident, (s, c, i) in rows:
        n = s + c + i
        lines.append([ident, "ok", n, s, c, i, f"{s / n:.9g}", f"{c / n:.9g}", f"{i / n:.9g}"])
    path.write_text(cli.csv_text(lines))


def test_evaluate_perfect_model_and_na(labeled, tmp_path):
    d, m = labeled
    ids = [e.id for e in load_manifest(m)]
    rows = [(i, (5, 3, 2)) for i in ids[:-1]] + [(ids[-1], (8, 0, 2))]
    _write_labels(tmp_path / "labels.csv", rows)
    sr = constant_model(tmp_path / "sr.json", 0.5)
    ir = constant_model(tmp_path / "ir.json", 0.2)
    cp, hp, res = evaluate(sr, ir, m, d, labels=tmp_path / "labels.csv")
    assert res["rows"][-1]["acc"][1] is None
    mean_ir, var_ir = res["aggregate"]["ir"]
    assert mean_ir == pytest.approx(1.0) and var_ir == pytest.approx(0.0, abs=1e-24)
    assert res["aggregate"]["sdc"][0] == pytest.approx(1.0)
    body = list(csv.reader(open(cp)))
    assert body[0] == cli.REPORT_HEADER and body[-1][0] == "Average(var)"
    assert body[-2][8] == "N/A"
    assert "Average(var)" in hp.read_text()
    for r in res["rows"]:
        assert sum(r["obs"]) == pytest.approx(1.0, abs=1e-12)
        assert all(0 <= v <= 1 for v in r["pred"])


def test_evaluate_empty_heldout(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({"version": 1, "entries": []}))
    sr = constant_model(tmp_path / "sr.json", 0.5)
    assert run("--out-dir", tmp_path, "evaluate", "--sr-model", sr, "--ir-model", sr,
               "--manifest", tmp_path / "m.json") == 2


def test_fi_run_prints_rates(capsys):
    from _util import SAMPLES
    assert run("--seed", 2, "fi", "run", "--program", SAMPLES / "loop3.ir", "--inputs",
               SAMPLES / "loop3.json", "--n", 30) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["n"] == 30 and sum(rec["counts"].values()) == 30


def test_gen_corpus_default_n(tmp_path):
    assert run("--out-dir", tmp_path, "gen", "corpus", "--count", 2) == 0
    assert all(e.n == 385 for e in load_manifest(tmp_path / "manifest.json"))


def test_config_file_sets_flags(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("# corpus settings\nseed = 8\ncount = 3\nn = 7\nout-dir = " + str(tmp_path / "o") + "\n")
    assert run("--config", cfg, "gen", "corpus") == 0
    entries = load_manifest(tmp_path / "o" / "manifest.json")
    assert len(entries) == 3 and entries[0].seed == 8 and entries[0].n == 7
    # the command line wins over the file
    assert run("--config", cfg, "--seed", 9, "gen", "corpus", "--count", 1) == 0
    assert load_manifest(tmp_path / "o" / "manifest.json")[0].seed == 9


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("colour = blue\n")
    assert run("--config", cfg, "gen", "corpus", "--count", 1) == 1


@pytest.mark.parametrize("argv", [[], ["bogus"], ["train"], ["gen"], ["--jobs", "0", "gen", "corpus", "--count", "1"]])
def test_usage_errors(argv, tmp_path):
    assert run("--out-dir", tmp_path, *argv) == 1


def test_data_error_exit(tmp_path):
    assert run("features", "--manifest", tmp_path / "missing.json") == 2


def test_internal_error_exit(monkeypatch, tmp_path):
    def broken(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "gen_corpus", broken)
    assert run("--out-dir", tmp_path, "gen", "corpus", "--count", 1) == 3


def test_atomic_write_leaves_no_temp_files(tmp_path):
    cli.atomic_write(tmp_path / "a" / "f.txt", "hello\n")
    assert [p.name for p in (tmp_path / "a").iterdir()] == ["f.txt"]
