"""Experiment orchestration: the FE x dimensions x model sweep.

A run loads one dataset, builds a stratified fold plan, then walks every
(fe, dims, model) cell: per fold it fits the scaler and extractor on the
training portion only, transforms both portions, trains the classifier
and evaluates the held-out fold. Records flush to disk after every cell,
so an interrupted sweep resumes from its manifest and reproduces the
uninterrupted byte-identical results.csv.

Every random draw derives from a stable hash of (seed, cell identity),
making results independent of scheduling and of which cells already ran.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .classifiers import ALL_KINDS, ClassifierSpec, fit_classifier
from .evaluate import aggregate_folds, evaluate, roc_auc
from .extract import (
    ae_encode, ae_fit, lda_fit, lda_transform, pca_fit, pca_transform, variance_report,
)
from .ingest import FeatureMatrix, load_feature_matrix
from .nn.network import TrainConfig
from .preprocess import apply_scaler, fit_scaler, stratified_kfold, stratified_subsample
from .schema import get_schema, schema_from_file

log = logging.getLogger(__name__)

FE_METHODS = ("full", "pca", "lda", "ae")
DEFAULT_DIMENSIONS = (1, 2, 3, 4, 5, 10, 20, 30)
CONFIG_VERSION = 1


@dataclass
class ExperimentConfig:
    dataset_path: str
    schema_name: str = "synthetic"
    schema_file: str | None = None
    fe_methods: tuple[str, ...] = FE_METHODS
    dimensions: tuple[int, ...] = DEFAULT_DIMENSIONS
    models: tuple[str, ...] = ALL_KINDS
    folds: int = 5
    seed: int = 0
    subsample: int | None = None
    fit_global: bool = False
    threshold: float = 0.5
    train: dict = field(default_factory=dict)
    output_dir: str = "out"

    def __post_init__(self):
        self.fe_methods = tuple(self.fe_methods)
        self.dimensions = tuple(int(d) for d in self.dimensions)
        self.models = tuple(self.models)
        bad = set(self.fe_methods) - set(FE_METHODS)
        if bad:
            raise ValueError(f"unknown fe_methods {sorted(bad)}; choose from {FE_METHODS}")
        bad = set(self.models) - set(ALL_KINDS)
        if bad:
            raise ValueError(f"unknown models {sorted(bad)}; choose from {ALL_KINDS}")
        if any(d < 1 for d in self.dimensions):
            raise ValueError("dimensions must all be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        unknown = set(self.train) - {"epochs", "batch_size", "learning_rate"}
        if unknown:
            raise ValueError(f"unknown train override(s) {sorted(unknown)}")

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        version = raw.pop("version", None)
        if version != CONFIG_VERSION:
            raise ValueError(
                f"{path}: config version must be {CONFIG_VERSION}, got {version!r}"
            )
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["version"] = CONFIG_VERSION
        doc["fe_methods"] = list(self.fe_methods)
        doc["dimensions"] = list(self.dimensions)
        doc["models"] = list(self.models)
        return doc

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()

    def train_config(self, seed: int, class_weights=None) -> TrainConfig:
        return TrainConfig(
            epochs=int(self.train.get("epochs", 20)),
            batch_size=int(self.train.get("batch_size", 256)),
            learning_rate=float(self.train.get("learning_rate", 0.001)),
            seed=seed,
            class_weights=class_weights,
        )


@dataclass
class ResultRecord:
    dataset: str
    model: str
    fe: str
    dims: int
    fold: str  # "0".."k-1" or "mean"
    acc: float | None = None
    f1: float | None = None
    dr: float | None = None
    far: float | None = None
    precision: float | None = None
    auc: float | None = None
    auc_pooled: float | None = None
    wall_time_seconds: float | None = None
    status: str = "ok"
    error: str | None = None


RESULT_COLUMNS = (
    "dataset", "model", "fe", "dims", "fold",
    "acc", "f1", "dr", "far", "precision", "auc", "auc_pooled", "status",
)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from string parts (never Python's salted hash)."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def load_dataset(config: ExperimentConfig) -> FeatureMatrix:
    if config.schema_file:
        schema = schema_from_file(config.schema_file)
    else:
        schema = get_schema(config.schema_name)
    fm, _ = load_feature_matrix(config.dataset_path, schema)
    if config.subsample is not None:
        fm = stratified_subsample(fm, config.subsample, derive_seed(config.seed, "subsample"))
    return fm


def _group_plan(config: ExperimentConfig, n_features: int):
    """(fe, dims) groups in config order; full uses all features, lda one."""
    groups = []
    for fe in config.fe_methods:
        if fe == "full":
            groups.append((fe, n_features))
        elif fe == "lda":
            groups.append((fe, 1))
        else:
            for dims in sorted(set(config.dimensions)):
                groups.append((fe, dims))
    return groups


def _fit_extractor(fe, dims, train_fm, config, fold_tag):
    if fe == "full":
        return None
    if fe == "pca":
        return pca_fit(train_fm, dims)
    if fe == "lda":
        return lda_fit(train_fm)
    seed = derive_seed(config.seed, fe, dims, fold_tag, "extractor")
    return ae_fit(train_fm, dims, config.train_config(seed))


def _apply_extractor(fe, model, fm):
    if fe == "full":
        return fm
    if fe == "pca":
        return pca_transform(fm, model)
    if fe == "lda":
        return lda_transform(fm, model)
    return ae_encode(fm, model)


def run_group(fe, dims, config: ExperimentConfig, fm: FeatureMatrix, assignments,
              pending_models):
    """Evaluate every pending model of one (fe, dims) group across all folds.

    Returns {model: cell_result_dict}; the fitted extractor is shared by
    the group's models within each fold.
    """
    k = config.folds
    out = {
        model: {"reports": [], "probs": [], "labels": [], "attacks": [],
                "wall": 0.0, "error": None}
        for model in pending_models
    }
    dataset_error = None
    global_fit = None  # (scaler, extractor) shared across folds with --fit-global
    for fold in range(k):
        train_idx = np.flatnonzero(assignments != fold)
        test_idx = np.flatnonzero(assignments == fold)
        train_fm = fm.take(train_idx)
        test_fm = fm.take(test_idx)
        try:
            if config.fit_global:
                if global_fit is None:
                    scaler = fit_scaler(fm)
                    extractor = _fit_extractor(
                        fe, dims, apply_scaler(fm, scaler), config, "global"
                    )
                    global_fit = (scaler, extractor)
                scaler, extractor = global_fit
                train_s = apply_scaler(train_fm, scaler)
                test_s = apply_scaler(test_fm, scaler)
            else:
                scaler = fit_scaler(train_fm)
                train_s = apply_scaler(train_fm, scaler)
                test_s = apply_scaler(test_fm, scaler)
                extractor = _fit_extractor(fe, dims, train_s, config, fold)
            train_z = _apply_extractor(fe, extractor, train_s)
            test_z = _apply_extractor(fe, extractor, test_s)
        except Exception as exc:  # extractor failure poisons the whole group
            log.warning("extractor %s dims=%s fold=%d failed: %s", fe, dims, fold, exc)
            dataset_error = f"{type(exc).__name__}: {exc}"
            break
        for model in pending_models:
            cell = out[model]
            if cell["error"] is not None:
                continue
            started = time.perf_counter()
            try:
                seed = derive_seed(config.seed, fe, dims, model, fold)
                spec = ClassifierSpec(kind=model)
                fitted = fit_classifier(spec, train_z, config.train_config(seed))
                probs = fitted.predict_proba(test_z)
                report = evaluate(
                    probs, test_z.labels, test_z.attack_types, config.threshold
                )
            except Exception as exc:
                log.warning("cell %s:%s:%s fold=%d failed: %s", fe, dims, model, fold, exc)
                cell["error"] = f"{type(exc).__name__}: {exc}"
                continue
            cell["wall"] += time.perf_counter() - started
            cell["reports"].append(report)
            cell["probs"].append(probs)
            cell["labels"].append(test_z.labels)
    if dataset_error is not None:
        for cell in out.values():
            if cell["error"] is None:
                cell["error"] = dataset_error
    return out


def _cell_payload(dataset, fe, dims, model, k, cell) -> dict:
    """Manifest entry for one finished cell (records + per-attack + ROC)."""
    if cell["error"] is not None or len(cell["reports"]) != k:
        err = cell["error"] or "incomplete fold set"
        rec = ResultRecord(dataset=dataset, model=model, fe=fe, dims=dims,
                           fold="mean", status="failed", error=err)
        return {"records": [asdict(rec)], "per_attack": None, "roc": None,
                "wall_time": cell["wall"]}
    records = []
    for fold, report in enumerate(cell["reports"]):
        records.append(asdict(ResultRecord(
            dataset=dataset, model=model, fe=fe, dims=dims, fold=str(fold),
            acc=report.acc, f1=report.f1, dr=report.dr, far=report.far,
            precision=report.precision, auc=report.auc,
        )))
    mean = aggregate_folds(cell["reports"])
    pooled_probs = np.concatenate(cell["probs"])
    pooled_labels = np.concatenate(cell["labels"])
    curve, pooled_auc = roc_auc(pooled_probs, pooled_labels)
    records.append(asdict(ResultRecord(
        dataset=dataset, model=model, fe=fe, dims=dims, fold="mean",
        acc=mean.acc, f1=mean.f1, dr=mean.dr, far=mean.far,
        precision=mean.precision, auc=mean.auc, auc_pooled=pooled_auc,
        wall_time_seconds=cell["wall"],
    )))
    per_attack = None
    if mean.per_attack is not None:
        per_attack = {name: list(v) for name, v in mean.per_attack.items()}
    return {
        "records": records,
        "per_attack": per_attack,
        "roc": {"far": curve.far.tolist(), "dr": curve.dr.tolist()},
        "wall_time": cell["wall"],
    }


class _RunState:
    """Manifest-backed store of completed cells."""

    def __init__(self, out_dir: Path, config: ExperimentConfig):
        self.out_dir = out_dir
        self.config = config
        self.path = out_dir / "manifest.json"
        self.completed: dict[str, dict] = {}
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            if doc.get("config_digest") == config.digest():
                self.completed = doc["completed"]
                log.info("resuming: %d cell(s) already complete", len(self.completed))
            else:
                log.warning("manifest does not match this config; starting fresh")

    def has(self, cell_id: str) -> bool:
        return cell_id in self.completed

    def add(self, cell_id: str, payload: dict) -> None:
        self.completed[cell_id] = payload

    def flush(self) -> None:
        doc = {
            "version": CONFIG_VERSION,
            "config_digest": self.config.digest(),
            "config": self.config.to_dict(),
            "completed": self.completed,
        }
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
        tmp.replace(self.path)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(records: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for rec in records:
            writer.writerow([_fmt(rec.get(col)) for col in RESULT_COLUMNS])


def _ordered_records(config, state, groups) -> list[dict]:
    out = []
    for fe, dims in groups:
        for model in config.models:
            payload = state.completed.get(f"{fe}:{dims}:{model}")
            if payload:
                out.extend(payload["records"])
    return out


def _write_variance_reports(fm: FeatureMatrix, out_dir: Path, dataset: str) -> None:
    """Descriptive per-dimension variance of PCA/LDA on the scaled dataset."""
    var_dir = out_dir / "variance"
    var_dir.mkdir(exist_ok=True)
    scaled = apply_scaler(fm, fit_scaler(fm))
    k = min(fm.n_features, fm.n_samples - 1)
    if k >= 1:
        model = pca_fit(scaled, k)
        report = variance_report(
            pca_transform(scaled, model), "pca", total_variance=model.total_variance
        )
        report.dump_csv(var_dir / f"{dataset}_pca.csv")
    if len(np.unique(fm.labels)) == 2:
        lda = lda_fit(scaled)
        variance_report(lda_transform(scaled, lda), "lda").dump_csv(
            var_dir / f"{dataset}_lda.csv"
        )


def run(config: ExperimentConfig, jobs: int = 1) -> list[dict]:
    """Execute the sweep; returns the ordered result records (as dicts)."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "roc").mkdir(exist_ok=True)

    fm = load_dataset(config)
    dataset = config.schema_name
    _write_variance_reports(fm, out_dir, dataset)
    plan = stratified_kfold(fm, config.folds, derive_seed(config.seed, "folds"))
    groups = _group_plan(config, fm.n_features)
    state = _RunState(out_dir, config)

    def finish_group(fe, dims, results):
        for model in config.models:
            if model not in results:
                continue
            cell_id = f"{fe}:{dims}:{model}"
            payload = _cell_payload(dataset, fe, dims, model, config.folds, results[model])
            roc = payload.pop("roc", None)
            if roc:
                _dump_roc(out_dir / "roc" / f"{fe}_{dims}_{model}.csv", roc)
            state.add(cell_id, payload)
        state.flush()
        write_results_csv(_ordered_records(config, state, groups), out_dir / "results.csv")

    todo = []
    for fe, dims in groups:
        pending = [m for m in config.models if not state.has(f"{fe}:{dims}:{m}")]
        if pending:
            todo.append((fe, dims, pending))

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                (fe, dims): pool.submit(
                    run_group, fe, dims, config, fm, plan.assignments, pending
                )
                for fe, dims, pending in todo
            }
            for (fe, dims), future in futures.items():
                finish_group(fe, dims, future.result())
    else:
        for fe, dims, pending in todo:
            log.info("group fe=%s dims=%s: %d model(s)", fe, dims, len(pending))
            finish_group(fe, dims, run_group(fe, dims, config, fm, plan.assignments, pending))

    records = _ordered_records(config, state, groups)
    write_results_csv(records, out_dir / "results.csv")
    emit_plots(records, out_dir)
    summary = render_summary(records, best_per_attack(state, config, groups))
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    return records


def _dump_roc(path, roc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["far", "dr"])
        for x, y in zip(roc["far"], roc["dr"]):
            writer.writerow([repr(float(x)), repr(float(y))])


def mean_records(records: list[dict]) -> list[dict]:
    return [r for r in records if r["fold"] == "mean" and r["status"] == "ok"]


def best_per_model(records: list[dict]) -> list[dict]:
    """Per (model, fe): the mean row with maximal AUC; ties pick fewer dims."""
    best: dict[tuple[str, str], dict] = {}
    for rec in mean_records(records):
        key = (rec["model"], rec["fe"])
        cur = best.get(key)
        if (
            cur is None
            or rec["auc"] > cur["auc"]
            or (rec["auc"] == cur["auc"] and rec["dims"] < cur["dims"])
        ):
            best[key] = rec
    return [best[k] for k in sorted(best, key=lambda k: (k[0], k[1]))]


def best_overall(records: list[dict]) -> dict | None:
    ranked = sorted(
        mean_records(records), key=lambda r: (-r["auc"], r["dims"], r["model"], r["fe"])
    )
    return ranked[0] if ranked else None


def best_per_attack(state: _RunState, config, groups) -> dict | None:
    """Per-attack DR table of the best (fe, dims, model) cell."""
    records = _ordered_records(config, state, groups)
    top = best_overall(records)
    if top is None:
        return None
    payload = state.completed.get(f"{top['fe']}:{top['dims']}:{top['model']}")
    if not payload or not payload.get("per_attack"):
        return None
    return {
        "cell": {k: top[k] for k in ("model", "fe", "dims", "auc")},
        "table": payload["per_attack"],
    }


def emit_plots(records: list[dict], out_dir: Path, charts: bool = False) -> None:
    """Plot-ready CSVs: AUC-vs-dimensions sweeps and the best-cell summary."""
    out_dir = Path(out_dir)
    sweep_dir = out_dir / "sweeps"
    sweep_dir.mkdir(exist_ok=True)
    means = mean_records(records)
    by_model: dict[str, list[dict]] = {}
    for rec in means:
        by_model.setdefault(rec["model"], []).append(rec)
    for model, rows in by_model.items():
        rows = sorted(rows, key=lambda r: (r["fe"], r["dims"]))
        path = sweep_dir / f"{rows[0]['dataset']}_{model}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fe", "dims", "auc"])
            for r in rows:
                writer.writerow([r["fe"], r["dims"], _fmt(r["auc"])])
    best = best_per_model(records)
    with open(out_dir / "best_per_model.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "model", "fe", "dims", "acc", "f1", "dr", "far", "auc"])
        for r in best:
            writer.writerow([r["dataset"], r["model"], r["fe"], r["dims"],
                             _fmt(r["acc"]), _fmt(r["f1"]), _fmt(r["dr"]),
                             _fmt(r["far"]), _fmt(r["auc"])])
    if charts:
        render_charts(by_model, sweep_dir)


def render_charts(by_model: dict, sweep_dir: Path) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib unavailable; skipping charts")
        return
    for model, rows in by_model.items():
        fig, ax = plt.subplots(figsize=(5, 3))
        by_fe: dict[str, list[dict]] = {}
        for r in rows:
            by_fe.setdefault(r["fe"], []).append(r)
        for fe, fe_rows in sorted(by_fe.items()):
            fe_rows = sorted(fe_rows, key=lambda r: r["dims"])
            ax.plot([r["dims"] for r in fe_rows], [r["auc"] for r in fe_rows],
                    marker="o", label=fe)
        ax.set_xlabel("dimensions")
        ax.set_ylabel("AUC")
        ax.set_title(model)
        ax.legend()
        fig.tight_layout()
        fig.savefig(sweep_dir / f"{rows[0]['dataset']}_{model}.svg")
        plt.close(fig)


def _pct(x) -> str:
    return f"{100.0 * x:.2f}%" if x is not None else ""


def render_summary(records: list[dict], per_attack: dict | None) -> str:
    """Text tables mirroring the benchmark's reporting format."""
    lines = []
    best = best_per_model(records)
    lines.append("Best result per (model, FE) by AUC")
    lines.append("")
    header = f"{'ML':<5} {'FE':<5} {'DIM':>4} {'ACC':>8} {'F1':>6} {'DR':>8} {'FAR':>8} {'AUC':>7}"
    lines.append(header)
    lines.append("-" * len(header))
    for r in best:
        lines.append(
            f"{r['model']:<5} {r['fe']:<5} {r['dims']:>4} {_pct(r['acc']):>8} "
            f"{r['f1']:>6.2f} {_pct(r['dr']):>8} {_pct(r['far']):>8} {r['auc']:>7.4f}"
        )
    failures = [r for r in records if r["status"] != "ok"]
    if failures:
        lines.append("")
        lines.append("Failed cells")
        for r in failures:
            lines.append(f"  {r['fe']}:{r['dims']}:{r['model']} -> {r['error']}")
    if per_attack:
        cell = per_attack["cell"]
        lines.append("")
        lines.append(
            f"Per-attack detection rate (best cell: {cell['model']} + {cell['fe']} "
            f"dims={cell['dims']}, AUC {cell['auc']:.4f})"
        )
        lines.append("")
        lines.append(f"{'Attack Type':<20} {'Actual':>8} {'Predicted':>10} {'DR':>8}")
        lines.append("-" * 48)
        for name, (actual, detected, dr) in sorted(per_attack["table"].items()):
            lines.append(f"{name:<20} {actual:>8} {detected:>10} {_pct(dr):>8}")
    lines.append("")
    n_records = len(records)
    lines.append(f"{n_records} result record(s)")
    return "\n".join(lines) + "\n"
