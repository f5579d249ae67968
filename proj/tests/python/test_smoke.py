"""Smoke tests for the Python bindings.

Run with the built extension on the path:
    PYTHONPATH=build/python pytest tests/python -q
"""

import json
import math

import numpy as np
import pytest

import astray


def test_parse_minimal_function():
    tree = astray.parse("fun f() {}")
    assert tree["kind"] == "FILE"
    fn = tree["children"][0]
    assert fn["kind"] == "FUNCTION"
    kinds = [child["kind"] for child in fn["children"]]
    assert kinds == ["IDENTIFIER", "PARAMETER_LIST", "BLOCK"]


def test_parse_error_is_python_exception():
    with pytest.raises(astray.AstrayError):
        astray.parse("typealias Broken = Int")


def test_tokenize_positions():
    tokens = astray.tokenize("fun f() {}")
    assert [t["text"] for t in tokens] == ["fun", "f", "(", ")", "{", "}"]
    assert tokens[0]["line"] == 1 and tokens[0]["column"] == 1


def test_pretty_print_round_trip():
    source = "fun g(x: Int) = when (x) {\n    1 -> 1\n    else -> 0\n}\n"
    printed = astray.pretty_print(source)
    assert astray.parse(printed) == astray.parse(source)


def test_metric_vector_shape():
    names = astray.metric_names()
    assert len(names) == 51
    vectors = astray.compute_metrics("fun f(a: Int, b: Int): Int = a + b")
    assert len(vectors) == 1
    metrics = vectors[0]
    assert metrics["parameter_count"] == 2.0
    assert metrics["has_suspend_modifier"] == 0.0
    assert set(metrics.keys()) == set(names)


def test_tree_ngrams():
    counts = astray.extract_tree_ngrams("fun f() {}", n_max=2)
    assert counts[("FUNCTION",)] == 1
    assert counts[("FUNCTION", "BLOCK")] == 1


def test_bytecode_ngrams_match_enumeration():
    counts = astray.extract_bytecode_ngrams(
        ["iload", "iload", "iadd", "ireturn"], n_max=3, window=3
    )
    assert counts[("iload",)] == 2
    assert counts[("iload", "iload", "iadd")] == 1
    assert sum(c for gram, c in counts.items() if len(gram) == 3) == 2


def test_vocabulary_filtering():
    units = [{("a",): 1, ("b",): 1} for _ in range(10)]
    units[0][("rare",)] = 5
    for unit in units[:4]:
        unit[("mid",)] = 1
    vocab = astray.build_vocabulary(units, min_df=2, max_df_ratio=0.5, domain="tree")
    items = {tuple(e["items"]) for e in vocab["entries"]}
    assert items == {("mid",)}  # df 4 passes; "a"/"b" hit the cap, "rare" the floor


def test_scaler_and_pca():
    rng = np.random.default_rng(7)
    rows = rng.normal(size=(100, 6))
    scaler = astray.scaler_fit(rows)
    scaled = scaler.transform(rows)
    assert np.allclose(scaled.mean(axis=0), 0.0, atol=1e-9)
    model = astray.pca_fit(scaled, 3)
    assert model.components.shape == (3, 6)
    projected = model.transform(scaled)
    assert projected.shape == (100, 3)
    assert np.all(np.diff(np.asarray(model.explained_variance_ratio)) <= 1e-12)


def test_lof_flags_far_point():
    rng = np.random.default_rng(3)
    pts = np.vstack([rng.normal(size=(60, 2)), [[50.0, 50.0]]])
    ids = [f"u{i:03d}" for i in range(61)]
    out = astray.lof_scores(ids, pts, n_neighbors=5, contamination=0.02)
    assert "u060" in out.flagged
    assert len(out.flagged) == math.ceil(0.02 * 61)


def test_iforest_determinism():
    rng = np.random.default_rng(4)
    pts = rng.normal(size=(200, 4))
    ids = [f"u{i:03d}" for i in range(200)]
    a = astray.iforest_fit_score(ids, pts, n_estimators=50, seed=9)
    b = astray.iforest_fit_score(ids, pts, n_estimators=50, seed=9)
    assert a.scores == b.scores


def test_autoencoder_scores_outlier():
    rng = np.random.default_rng(5)
    base = np.abs(rng.normal(1.0, 0.1, size=(256, 12)))
    model = astray.autoencoder_train(base, compression_rate=0.5, epochs=5,
                                     minibatch=32, seed=11)
    assert model.hidden_width == 6
    assert len(model.epoch_losses) == 5
    typical = model.score(base[0])
    outlier = model.score(np.full(12, 40.0))
    assert outlier > typical


def test_rms_threshold():
    threshold, flagged = astray.rms_threshold({"a": 1.0, "b": 1.0, "c": 1.0, "d": 10.0}, 3.0)
    assert threshold == pytest.approx(3.0 * math.sqrt(25.75))
    assert flagged == []


def test_compiler_induced_rule():
    records, compared = astray.compiler_induced_detect(
        {"f1": 0.05, "fmax": 1.0}, {"c1": 0.95, "cmax": 1.0}, {"c1": ["f1"]}, delta=0.8
    )
    assert compared == 1
    assert len(records) == 1
    assert records[0]["direction"] == "bytecode-loud"


def test_full_pipeline_over_a_directory(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    chunks = []
    rng = np.random.default_rng(12)
    for i in range(60):
        reps = int(rng.integers(1, 5))
        body = "\n".join(f"    acc += a{i} * {j + 1}" for j in range(reps))
        chunks.append(
            f"fun fn{i}(a{i}: Int): Int {{\n    var acc = {i}\n{body}\n    return acc\n}}\n"
        )
    chunks.append(
        "fun planted(x: Int): Int = when (x) {\n"
        + "\n".join(f"    {i} -> {i}" for i in range(220))
        + "\n    else -> 0\n}\n"
    )
    (src / "corpus.kt").write_text("\n".join(chunks))

    units, notes = astray.ingest_source([str(src / "corpus.kt")])
    assert len(units) == 61
    assert notes == []
    planted_id = next(u["unit_id"] for u in units if u["display_name"] == "planted")

    corpus_dir = tmp_path / "corpus"
    summary = astray.ingest_corpus([str(src / "corpus.kt")], "", str(corpus_dir))
    assert summary["functions"] == 61
    assert (corpus_dir / "manifest.json").exists()

    config = json.loads(astray.default_config())
    config["preprocess"]["pca_k"] = 8
    config["lof"]["n_neighbors"] = 10
    config["lof"]["contamination"] = 0.02
    config["iforest"]["contamination"] = 0.02

    out_dir = tmp_path / "out"
    records = astray.run_pipeline(
        str(corpus_dir), "explicit", json.dumps(config), str(out_dir)
    )
    assert (out_dir / "report.json").exists()
    report = json.loads((out_dir / "report.json").read_text())
    assert report["schema_version"] == "astray-report-1"
    assert {r["unit_id"] for r in report["records"]} == {r["unit_id"] for r in records}
    assert any(r["unit_id"] == planted_id for r in records)


def test_tag_vocabulary():
    vocab = astray.tag_vocabulary()
    assert len(vocab) == 30
    assert '"When" expression' in vocab
    assert "Delegates" in vocab
