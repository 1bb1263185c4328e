"""Pipeline stages behind the CLI subcommands, and the run configuration.

A run directory holds everything a run produces::

    <run_dir>/artifacts/   sample.jsonl, labels.jsonl, features.csv, models/
    <run_dir>/reports/     success-rate tables, model metrics, report.md
    <run_dir>/cache/       llm.jsonl completion cache
    <run_dir>/manifest.json
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__, analytics
from .edu_features import education_features
from .features import LabeledMatrix, build_feature_vector, build_matrix
from .ingest import Dataset, filter_valid, load_founder_table, merge_and_flag, stratified_sample
from .llm_gateway import CacheStore, ConfigError, Gateway, HttpBackend, MockBackend
from .ml import (
    BoostParams,
    ForestParams,
    evaluate,
    make_split,
    save_model,
    train_forest,
    train_gbt,
    train_linear,
)
from .ml import kernels
from .ml.metrics import EvalReport
from .segmentation import ChainResult, ChainSettings, propose_taxonomy, run_chain

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    successful: str | None = None
    unsuccessful: str | None = None
    run_dir: str = "run"
    n_per_class: int = 150
    sample_seed: int = 0
    split_seed: int = 0
    model_seed: int = 0
    threshold: float = 0.5
    forest: dict[str, Any] = field(default_factory=dict)
    gbt: dict[str, Any] = field(default_factory=dict)
    llm_backend: str = "mock"
    llm_endpoint: str | None = None
    model_id: str = "gpt-4o"
    temperature: float = 0.0
    mock_fixtures: list[str] = field(default_factory=list)
    concurrency: int = 4
    max_attempts: int = 5
    cache_path: str | None = None
    max_failure_fraction: float = 0.0
    min_gap_pp: float = 5.0

    def validate(self) -> None:
        if self.n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.llm_backend not in ("mock", "live"):
            raise ValueError("llm_backend must be 'mock' or 'live'")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        if not 0.0 <= self.max_failure_fraction <= 1.0:
            raise ValueError("max_failure_fraction must lie in [0, 1]")
        ForestParams(**self.forest)
        BoostParams(**self.gbt)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "RunConfig":
        path = Path(path)
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        base = path.parent
        for key in ("successful", "unsuccessful", "run_dir", "cache_path"):
            if raw.get(key) is not None:
                raw[key] = str(base / raw[key])
        if raw.get("mock_fixtures"):
            raw["mock_fixtures"] = [str(base / p) for p in raw["mock_fixtures"]]
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    @property
    def root(self) -> Path:
        return Path(self.run_dir)

    @property
    def artifacts(self) -> Path:
        return self.root / "artifacts"

    @property
    def reports(self) -> Path:
        return self.root / "reports"

    @property
    def cache_file(self) -> Path:
        return Path(self.cache_path) if self.cache_path else self.root / "cache" / "llm.jsonl"

    def chain_settings(self) -> ChainSettings:
        return ChainSettings(model_id=self.model_id, temperature=self.temperature)

    def forest_params(self) -> ForestParams:
        return ForestParams(**{"seed": self.model_seed, **self.forest})

    def gbt_params(self) -> BoostParams:
        return BoostParams(**{"seed": self.model_seed, **self.gbt})


# ---------------------------------------------------------------- manifest

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(cfg: RunConfig) -> Path:
    """Record config hash, versions and a digest of every artifact/report file."""
    files = {}
    for sub in (cfg.artifacts, cfg.reports):
        if sub.exists():
            for p in sorted(sub.rglob("*")):
                if p.is_file():
                    files[p.relative_to(cfg.root).as_posix()] = _sha256(p)
    manifest = {
        "config_hash": cfg.config_hash,
        "config": cfg.to_dict(),
        "versions": {
            "founder_success": __version__,
            "numpy": np.__version__,
            "python": ".".join(platform.python_version_tuple()[:2]),
            "split_kernel": kernels.BACKEND,
        },
        "files": files,
    }
    path = cfg.root / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- stages

def run_ingest(cfg: RunConfig) -> Dataset:
    cfg.validate()
    for p in (cfg.successful, cfg.unsuccessful):
        if p is None or not Path(p).is_file():
            raise FileNotFoundError(f"founder table not found: {p}")
    succ = load_founder_table(cfg.successful, True)
    fail = load_founder_table(cfg.unsuccessful, False)
    merged = merge_and_flag(succ, fail)
    valid = filter_valid(merged)
    sample = stratified_sample(valid, cfg.n_per_class, cfg.sample_seed)
    sample.save(cfg.artifacts / "sample.jsonl")
    _write_json(
        cfg.artifacts / "ingest_report.json",
        {
            "loaded": {"successful": len(succ), "unsuccessful": len(fail)},
            "skipped_rows": [dataclasses.asdict(s) for s in merged.skipped],
            "invalid_profiles": len(merged) - len(valid),
            "valid": {"successful": len(valid.by_class(True)), "unsuccessful": len(valid.by_class(False))},
            "sampled": len(sample),
            "seed": cfg.sample_seed,
        },
    )
    write_manifest(cfg)
    return sample


def make_gateway(cfg: RunConfig, backend=None) -> Gateway:
    if backend is None:
        if cfg.llm_backend == "live":
            backend = HttpBackend(endpoint=cfg.llm_endpoint)
        else:
            if not cfg.mock_fixtures:
                raise ConfigError("mock backend needs at least one fixture file (mock_fixtures)")
            backend = MockBackend.from_files(cfg.mock_fixtures)
    return Gateway(
        backend,
        cache=CacheStore(cfg.cache_file),
        max_attempts=cfg.max_attempts,
        max_in_flight=cfg.concurrency,
    )


@dataclass
class SegmentOutcome:
    results: list[ChainResult]
    matrix: LabeledMatrix
    exclusions: list
    backend_calls: int = 0

    @property
    def failures(self) -> int:
        return sum(1 for r in self.results if not r.ok)

    def within_tolerance(self, max_fraction: float) -> bool:
        if not self.results:
            return True
        return self.failures / len(self.results) <= max_fraction


def run_segment(cfg: RunConfig, gateway: Gateway | None = None) -> SegmentOutcome:
    cfg.validate()
    sample = Dataset.load(cfg.artifacts / "sample.jsonl")
    gw = gateway or make_gateway(cfg)
    settings = cfg.chain_settings()
    done = 0

    def one(record) -> ChainResult:
        nonlocal done
        res = run_chain(record, gw, settings)
        done += 1
        if done % 25 == 0 or done == len(sample):
            logger.info("segmented %d/%d founders", done, len(sample))
        return res

    with ThreadPoolExecutor(cfg.concurrency) as pool:
        results = list(pool.map(one, sample.records))

    labels_path = cfg.artifacts / "labels.jsonl"
    labels_path.parent.mkdir(parents=True, exist_ok=True)
    labels_path.write_text(
        "".join(json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True) + "\n" for r in results),
        encoding="utf-8",
    )
    for r in results:
        for stage, msg in r.errors.items():
            logger.warning("%s: %s stage error: %s", r.founder_id, stage, msg)

    matrix, exclusions = features_from_labels(sample, results)
    matrix.save(cfg.artifacts / "features.csv")
    _write_json(
        cfg.artifacts / "segment_report.json",
        {
            "founders": len(results),
            "complete": sum(1 for r in results if r.ok),
            "failed": [{"founder_id": r.founder_id, "errors": r.errors} for r in results if not r.ok],
            "excluded_from_matrix": [dataclasses.asdict(e) for e in exclusions],
        },
    )
    write_manifest(cfg)
    return SegmentOutcome(results, matrix, exclusions, gw.backend_calls)


def features_from_labels(sample: Dataset, results: list[ChainResult]):
    by_id = {r.founder_id: r for r in results}
    vectors = {}
    for rec in sample:
        res = by_id.get(rec.founder_id)
        labels = res.labels if res is not None else None
        if labels is None:
            continue
        vectors[rec.founder_id] = build_feature_vector(education_features(rec.linkedin_doc), labels)
    return build_matrix(sample, vectors)


def load_labels(path: str | Path) -> list[ChainResult]:
    with open(path, encoding="utf-8") as fh:
        return [ChainResult.from_dict(json.loads(line)) for line in fh if line.strip()]


def run_propose_taxonomy(
    cfg: RunConfig,
    kind: str,
    target_count: int,
    base_text: str,
    n_summaries: int = 50,
    summaries: list[str] | None = None,
    gateway: Gateway | None = None,
) -> Path:
    if summaries is None:
        results = load_labels(cfg.artifacts / "labels.jsonl")
        summaries = [r.summary.text for r in results if r.summary is not None][:n_summaries]
    if not summaries:
        raise ValueError("no founder summaries available for the proposal prompt")
    gw = gateway or make_gateway(cfg)
    text = propose_taxonomy(summaries, base_text, target_count, gw, kind=kind, settings=cfg.chain_settings())
    out = cfg.artifacts / f"{kind}_taxonomy_proposal.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    write_manifest(cfg)
    return out


def run_analyze(cfg: RunConfig) -> list[Path]:
    m = LabeledMatrix.load(cfg.artifacts / "features.csv")
    paths = analytics.write_reports(m, cfg.reports, cfg.min_gap_pp)
    write_manifest(cfg)
    return paths


MODEL_LABELS = {"linear": "Linear regression", "forest": "Random forest", "gbt": "XGBoost-style GBT"}


@dataclass(frozen=True)
class MetricRow:
    model: str
    test_set: int
    report: EvalReport


def _metric(v: float | None, fmt: str) -> str:
    return "undefined" if v is None else format(v, fmt)


def metrics_csv(rows: list[MetricRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "test_set", "n", "accuracy", "precision", "f1", "tpr", "tp", "fp", "tn", "fn"])
    for r in rows:
        rep, cm = r.report, r.report.confusion
        w.writerow(
            [
                r.model,
                r.test_set,
                cm.total,
                _metric(rep.accuracy, ".6f"),
                _metric(rep.precision, ".6f"),
                _metric(rep.f1, ".6f"),
                _metric(rep.tpr, ".6f"),
                cm.tp,
                cm.fp,
                cm.tn,
                cm.fn,
            ]
        )
    return buf.getvalue()


def metrics_text(rows: list[MetricRow]) -> str:
    names = [f"{MODEL_LABELS[r.model]} (test set {r.test_set})" for r in rows]
    width = max([len("Model")] + [len(n) for n in names])
    head = f"{'Model':<{width}}  {'Accuracy':>9}  {'Precision':>9}  {'F1 score':>9}  {'TPR':>9}"
    lines = ["Comparing model performance metrics", "", head, "-" * len(head)]
    for name, r in zip(names, rows):
        rep = r.report
        cells = [_metric(v, ".3f") for v in (rep.accuracy, rep.precision, rep.f1, rep.tpr)]
        lines.append(f"{name:<{width}}  " + "  ".join(f"{c:>9}" for c in cells))
    return "\n".join(lines) + "\n"


def run_train_eval(cfg: RunConfig) -> list[MetricRow]:
    cfg.validate()
    m = LabeledMatrix.load(cfg.artifacts / "features.csv")
    train, test1, test2 = make_split(m, cfg.split_seed)
    models = {
        "linear": train_linear(train, threshold=cfg.threshold),
        "forest": train_forest(train, cfg.forest_params(), threshold=cfg.threshold),
        "gbt": train_gbt(train, cfg.gbt_params(), threshold=cfg.threshold),
    }
    rows = []
    for kind, model in models.items():
        save_model(model, cfg.artifacts / "models" / f"{kind}.model")
        for n, test in ((1, test1), (2, test2)):
            rows.append(MetricRow(kind, n, evaluate(model, test.X, test.y)))
    cfg.reports.mkdir(parents=True, exist_ok=True)
    (cfg.reports / "model_metrics.csv").write_text(metrics_csv(rows), encoding="utf-8")
    (cfg.reports / "model_metrics.txt").write_text(metrics_text(rows), encoding="utf-8")
    _write_json(
        cfg.artifacts / "split.json",
        {
            "seed": cfg.split_seed,
            "train": list(train.founder_ids),
            "test1": list(test1.founder_ids),
            "test2": list(test2.founder_ids),
        },
    )
    write_manifest(cfg)
    return rows


def run_report(cfg: RunConfig) -> Path:
    """Bundle the plain-text tables into one markdown report."""
    parts = ["# Founder success report", ""]
    for stem in ("level_success", "persona_success", "flag_success", "model_metrics"):
        p = cfg.reports / f"{stem}.txt"
        if p.exists():
            parts += ["```", p.read_text(encoding="utf-8").rstrip("\n"), "```", ""]
        else:
            parts += [f"_{stem}: not computed yet_", ""]
    seg = cfg.artifacts / "segment_report.json"
    if seg.exists():
        info = json.loads(seg.read_text(encoding="utf-8"))
        parts += [f"Founders segmented: {info['founders']}, complete: {info['complete']}.", ""]
    out = cfg.reports / "report.md"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(parts), encoding="utf-8")
    write_manifest(cfg)
    return out
