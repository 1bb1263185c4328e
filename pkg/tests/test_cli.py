import csv
import io
import json
import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from founder_success.cli import main
from founder_success.features import COLUMN_NAMES
from founder_success.llm_gateway import prompt_fingerprint
from founder_success.pipeline import RunConfig, load_labels
from founder_success.segmentation import default_level_base, render_proposal_prompt


def write_config(path, pool, run_dir, **extra):
    cfg = {
        "successful": str(pool.successful_csv),
        "unsuccessful": str(pool.unsuccessful_csv),
        "run_dir": str(run_dir),
        "mock_fixtures": [str(pool.fixtures)],
        **extra,
    }
    path.write_text(json.dumps(cfg), encoding="utf-8")  # JSON is valid YAML
    return path


def invoke(*args, env=None):
    return CliRunner().invoke(main, [str(a) for a in args], env=env, catch_exceptions=False)


@pytest.fixture(scope="module")
def full_run(synth_pool, tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    cfg = write_config(base / "run.yaml", synth_pool, base / "run")
    for cmd in (["ingest"], ["segment"], ["analyze"], ["train-eval"], ["report"]):
        r = invoke("--config", cfg, *cmd)
        assert r.exit_code == 0, r.output
    return cfg, RunConfig.from_file(cfg)


def test_ingest_rejects_nonpositive_n(tmp_path):
    r = CliRunner().invoke(main, ["--run-dir", str(tmp_path / "r"), "ingest", "--n", "0"])
    assert r.exit_code == 2 and "--n" in r.output
    assert not (tmp_path / "r").exists()


def test_ingest_missing_file(tmp_path, synth_pool):
    missing = tmp_path / "missing.csv"
    r = CliRunner().invoke(
        main,
        ["--run-dir", str(tmp_path / "r"), "ingest", "--successful", str(missing),
         "--unsuccessful", str(synth_pool.unsuccessful_csv)],
    )  # fmt: skip
    assert r.exit_code == 1 and "missing.csv" in r.output


def test_unknown_config_key(tmp_path, synth_pool):
    cfg = write_config(tmp_path / "c.yaml", synth_pool, tmp_path / "r", n_per_klass=3)
    r = CliRunner().invoke(main, ["--config", str(cfg), "ingest"])
    assert r.exit_code == 2 and "n_per_klass" in r.output


def test_live_backend_without_key(tmp_path, synth_pool):
    cfg = write_config(tmp_path / "c.yaml", synth_pool, tmp_path / "r")
    assert invoke("--config", cfg, "ingest").exit_code == 0
    r = invoke("--config", cfg, "segment", "--backend", "live", env={"FS_LLM_API_KEY": None})
    assert r.exit_code == 2 and "FS_LLM_API_KEY" in r.output
    r = invoke("--config", cfg, "segment", "--backend", "mock", env={"FS_LLM_API_KEY": None})
    assert r.exit_code == 0


def test_segment_before_ingest(tmp_path, synth_pool):
    cfg = write_config(tmp_path / "c.yaml", synth_pool, tmp_path / "r")
    r = invoke("--config", cfg, "segment")
    assert r.exit_code == 1 and "ingest" in r.output


def test_failure_tolerance(tmp_path, synth_pool):
    lines = synth_pool.fixtures.read_text().splitlines()
    partial = tmp_path / "partial.jsonl"
    partial.write_text("\n".join(lines[::2]) + "\n")
    cfg = write_config(tmp_path / "c.yaml", synth_pool, tmp_path / "r", mock_fixtures=[str(partial)])
    assert invoke("--config", cfg, "ingest").exit_code == 0
    r = invoke("--config", cfg, "segment")
    assert r.exit_code == 1 and "above tolerance" in r.output
    r = invoke("--config", cfg, "segment", "--max-failure-fraction", "1.0")
    assert r.exit_code == 0
    m = (tmp_path / "r" / "artifacts" / "features.csv").read_text().splitlines()
    assert len(m) - 1 < 300


def test_pipeline_outputs(full_run):
    _, cfg = full_run
    rows = list(csv.DictReader(io.StringIO((cfg.reports / "model_metrics.csv").read_text())))
    assert len(rows) == 6
    assert {(r["model"], r["test_set"]) for r in rows} == {(k, s) for k in ("linear", "forest", "gbt") for s in "12"}
    assert all(int(r["n"]) == 30 for r in rows)
    header = (cfg.artifacts / "features.csv").read_text().splitlines()[0].split(",")
    assert header[1:-1] == list(COLUMN_NAMES)
    assert len(cfg.cache_file.read_text().splitlines()) == 1200
    for name in ("level_success", "persona_success", "flag_success"):
        assert (cfg.reports / f"{name}.txt").exists() and (cfg.reports / f"{name}.csv").exists()
    report = (cfg.reports / "report.md").read_text()
    assert "Success rates by level" in report and "Founders segmented: 300" in report
    assert len(list((cfg.artifacts / "models").glob("*.model"))) == 3


def test_resume_makes_no_backend_calls(full_run):
    cfg_path, cfg = full_run
    before = cfg.cache_file.read_bytes()
    r = invoke("--config", cfg_path, "segment")
    assert r.exit_code == 0 and "0 uncached LLM calls" in r.output
    assert cfg.cache_file.read_bytes() == before


def test_manifest_idempotent(full_run):
    cfg_path, cfg = full_run
    manifest = cfg.root / "manifest.json"
    before = manifest.read_bytes()
    for cmd in ("analyze", "train-eval", "report"):
        assert invoke("--config", cfg_path, cmd).exit_code == 0
    assert manifest.read_bytes() == before
    doc = json.loads(before)
    assert "artifacts/features.csv" in doc["files"] and doc["config_hash"] == cfg.config_hash


def test_degenerate_threshold_reports_undefined(full_run, tmp_path):
    _, cfg = full_run
    run = tmp_path / "run"
    shutil.copytree(cfg.root / "artifacts", run / "artifacts")
    r = invoke("--run-dir", run, "train-eval", "--threshold", "0.999")
    assert r.exit_code == 0
    text = (run / "reports" / "model_metrics.csv").read_text()
    assert "undefined" in text
    assert "undefined" in r.output


def test_train_eval_too_few_rows(tmp_path):
    art = tmp_path / "artifacts"
    art.mkdir()
    (art / "features.csv").write_text(",".join(["founder_id", *COLUMN_NAMES, "success"]) + "\n")
    r = invoke("--run-dir", tmp_path, "train-eval")
    assert r.exit_code == 1 and "need 150" in r.output


def test_analyze_empty_matrix(tmp_path):
    art = tmp_path / "artifacts"
    art.mkdir()
    (art / "features.csv").write_text(",".join(["founder_id", *COLUMN_NAMES, "success"]) + "\n")
    r = invoke("--run-dir", tmp_path, "analyze")
    assert r.exit_code == 0
    assert "—" in (tmp_path / "reports" / "level_success.txt").read_text()


def test_analyze_without_features(tmp_path):
    r = invoke("--run-dir", tmp_path, "analyze")
    assert r.exit_code == 1 and "segment" in r.output


def test_propose_taxonomy_with_fingerprint_fixture(full_run, tmp_path):
    _, cfg = full_run
    run = tmp_path / "run"
    shutil.copytree(cfg.root / "artifacts", run / "artifacts")
    summaries = [r.summary.text for r in load_labels(run / "artifacts" / "labels.jsonl")][:50]
    prompt = render_proposal_prompt(summaries, default_level_base(), 10)
    fx = tmp_path / "proposal.jsonl"
    fx.write_text(json.dumps({"fingerprint": prompt_fingerprint(prompt), "completion": "Level 1 (L1): ..."}) + "\n")
    r = invoke("--run-dir", run, "propose-taxonomy", "--fixtures", fx)
    assert r.exit_code == 0, r.output
    assert (run / "artifacts" / "level_taxonomy_proposal.txt").read_text() == "Level 1 (L1): ...\n"
    r = invoke("--run-dir", run, "propose-taxonomy", "--kind", "persona", "--fixtures", fx)
    assert r.exit_code == 2 and "--base" in r.output


def test_synth_command(tmp_path):
    r = invoke("synth", tmp_path / "pool", "--successful", "20", "--unsuccessful", "25", "--messy-rate", "0")
    assert r.exit_code == 0
    cfg = RunConfig.from_file(tmp_path / "pool" / "run.yaml", n_per_class=10)
    assert Path(cfg.successful).is_file() and Path(cfg.mock_fixtures[0]).is_file()
