"""Evaluation metrics, timing benchmark, ablation runner, GNB baseline."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, replace

import numpy as np

from emn import propagation
from emn.adaptation import AdaptationConfig, AdaptationHistory, adapt, pseudo_label
from emn.dataio import FeatureDataset
from emn.errors import (
    ClassCountMismatch,
    DimensionError,
    MissingLabelsError,
    UsageError,
)
from emn.inference import EmnModel, build_model, predict_batch
from emn.memory import HyperParams, supervised_update
from emn.propagation import propagate_batch
from emn.topology import TopologyConfig


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray  # C x C, rows = truth, cols = prediction
    per_class_accuracy: np.ndarray


def evaluate(model: EmnModel, dataset: FeatureDataset) -> EvalReport:
    """Accuracy and confusion matrix of the model on a labeled dataset."""
    if dataset.labels is None:
        raise MissingLabelsError("evaluation requires labels")
    if dataset.labels.size and int(dataset.labels.max()) >= model.class_count:
        raise ClassCountMismatch(
            f"dataset labels exceed model class count {model.class_count}"
        )
    preds = pseudo_label(model, dataset.features)
    C = model.class_count
    confusion = np.zeros((C, C), dtype=np.int64)
    np.add.at(confusion, (dataset.labels, preds), 1)
    totals = confusion.sum(axis=1)
    with np.errstate(invalid="ignore"):
        per_class = np.where(totals > 0, np.diag(confusion) / np.maximum(totals, 1), 0.0)
    accuracy = float(np.trace(confusion) / max(1, dataset.n_samples))
    return EvalReport(accuracy, confusion, per_class)


@dataclass(frozen=True)
class BenchConfig:
    repetitions: int = 5
    batch_size: int = 64
    beta: float = 0.9
    shuffle_seed: int = 0

    def validate(self) -> None:
        if self.repetitions < 1:
            raise UsageError("repetitions must be >= 1")


@dataclass
class BenchReport:
    per_sample_inference_seconds: float  # median over repetitions
    per_sample_adaptation_seconds: float
    sample_count: int
    repetitions: int
    forward_passes_per_adapted_sample: float
    backward_passes: int  # structurally zero; no gradient path exists
    config: BenchConfig

    def to_dict(self) -> dict:
        return {
            "per_sample_inference_seconds": self.per_sample_inference_seconds,
            "per_sample_adaptation_seconds": self.per_sample_adaptation_seconds,
            "sample_count": self.sample_count,
            "repetitions": self.repetitions,
            "forward_passes_per_adapted_sample": self.forward_passes_per_adapted_sample,
            "backward_passes": self.backward_passes,
            "config": {
                "repetitions": self.config.repetitions,
                "batch_size": self.config.batch_size,
                "beta": self.config.beta,
                "shuffle_seed": self.config.shuffle_seed,
            },
        }


def bench(
    model: EmnModel, target: FeatureDataset, cfg: BenchConfig | None = None
) -> BenchReport:
    """Median per-sample timings of one adaptation epoch vs one inference
    pass, on a copy of the model. Monotonic clock; absolute times are
    hardware-dependent and never asserted."""
    cfg = cfg or BenchConfig()
    cfg.validate()
    n = target.n_samples
    if n == 0:
        raise UsageError("bench requires a non-empty dataset")

    inference_times = []
    adaptation_times = []
    forward_per_sample = 0.0
    for _ in range(cfg.repetitions):
        start = time.perf_counter()
        predict_batch(model, target.features)
        inference_times.append((time.perf_counter() - start) / n)

        scratch = EmnModel(
            model.topology,
            model.store.copy(),
            model.class_count,
            model.hyper,
            dict(model.metadata),
        )
        acfg = AdaptationConfig(
            epochs=1,
            batch_size=cfg.batch_size,
            beta=cfg.beta,
            shuffle_seed=cfg.shuffle_seed,
        )
        propagation.reset_forward_sample_count()
        start = time.perf_counter()
        adapt(scratch, target.features, acfg)
        adaptation_times.append((time.perf_counter() - start) / n)
        forward_per_sample = propagation.forward_sample_count() / n

    return BenchReport(
        per_sample_inference_seconds=statistics.median(inference_times),
        per_sample_adaptation_seconds=statistics.median(adaptation_times),
        sample_count=n,
        repetitions=cfg.repetitions,
        forward_passes_per_adapted_sample=forward_per_sample,
        backward_passes=0,
        config=cfg,
    )


# ---------------------------------------------------------------------------
# Gaussian naive Bayes reference baseline (raw features, uniform priors)


@dataclass
class GnbModel:
    mu: np.ndarray  # C x dim
    var: np.ndarray  # C x dim
    class_count: int

    _VAR_FLOOR = 1e-12


def baseline_gnb_train(dataset: FeatureDataset) -> GnbModel:
    if dataset.labels is None:
        raise MissingLabelsError("GNB training requires labels")
    C = int(dataset.labels.max()) + 1
    dim = dataset.dim
    mu = np.zeros((C, dim))
    var = np.ones((C, dim))
    for k in range(C):
        rows = dataset.features[dataset.labels == k]
        if rows.size:
            mu[k] = rows.mean(axis=0)
            var[k] = np.maximum(rows.var(axis=0), GnbModel._VAR_FLOOR)
    return GnbModel(mu, var, C)


def baseline_gnb_eval(model: GnbModel, dataset: FeatureDataset) -> EvalReport:
    if dataset.labels is None:
        raise MissingLabelsError("GNB evaluation requires labels")
    if int(dataset.labels.max()) >= model.class_count:
        raise ClassCountMismatch("dataset labels exceed baseline class count")
    if dataset.dim != model.mu.shape[1]:
        raise DimensionError("feature dimension mismatch")
    x = dataset.features[:, None, :]  # n x 1 x dim
    log_lik = (
        -0.5 * np.log(2.0 * np.pi * model.var)[None]
        - (x - model.mu[None]) ** 2 / (2.0 * model.var)[None]
    ).sum(axis=2)
    preds = np.argmax(log_lik, axis=1)
    C = model.class_count
    confusion = np.zeros((C, C), dtype=np.int64)
    np.add.at(confusion, (dataset.labels, preds), 1)
    totals = confusion.sum(axis=1)
    per_class = np.where(totals > 0, np.diag(confusion) / np.maximum(totals, 1), 0.0)
    return EvalReport(
        float(np.trace(confusion) / max(1, dataset.n_samples)), confusion, per_class
    )


# ---------------------------------------------------------------------------
# Training and ablation pipeline


def train_supervised(
    model: EmnModel, source: FeatureDataset, shuffle_seed: int = 0
) -> None:
    """One shuffled pass of batched supervised memory updates."""
    if source.labels is None:
        raise MissingLabelsError("supervised training requires labels")
    source.check_labels_in_range(model.class_count)
    n = source.n_samples
    order = np.random.default_rng(shuffle_seed).permutation(n)
    B = model.hyper.batch_size
    for lo in range(0, n, B):
        idx = order[lo : lo + B]
        signals = propagate_batch(model.topology, source.features[idx], model.hyper.rounds)
        supervised_update(model.store, signals, source.labels[idx])


@dataclass
class AblationVariant:
    name: str
    fuzzy_enabled: bool
    confidence_enabled: bool
    source_report: EvalReport
    target_before: EvalReport
    target_after: EvalReport
    target_best: float
    history: AdaptationHistory
    delta_vs_base: float = 0.0


def run_pipeline(
    topo_cfg: TopologyConfig,
    hyper: HyperParams,
    source: FeatureDataset,
    target: FeatureDataset,
    adapt_cfg: AdaptationConfig,
    train_seed: int = 0,
):
    """Train on source, adapt on target; returns (model, reports, history)."""
    class_count = int(source.labels.max()) + 1
    model = build_model(topo_cfg, class_count, hyper)
    train_supervised(model, source, shuffle_seed=train_seed)
    source_report = evaluate(model, source)
    before = evaluate(model, target)
    history = adapt(
        model, target.features, adapt_cfg, held_out_labels=target.labels
    )
    after = evaluate(model, target)
    return model, source_report, before, after, history


def run_ablation(
    source: FeatureDataset,
    target: FeatureDataset,
    topo_cfg: TopologyConfig,
    base_hyper: HyperParams | None = None,
    adapt_cfg: AdaptationConfig | None = None,
    train_seed: int = 0,
) -> list[AblationVariant]:
    """Controlled comparison of {base, base+G, base+G+C}: identical seeds,
    only the fuzzy / confidence flags differ."""
    base_hyper = base_hyper or HyperParams()
    adapt_cfg = adapt_cfg or AdaptationConfig()
    variants = [
        ("base", False, False),
        ("base+G", True, False),
        ("base+G+C", True, True),
    ]
    out: list[AblationVariant] = []
    for name, fuzzy, conf in variants:
        hyper = replace(base_hyper, fuzzy_enabled=fuzzy, confidence_enabled=conf)
        _, source_report, before, after, history = run_pipeline(
            topo_cfg, hyper, source, target, adapt_cfg, train_seed
        )
        best = history.best_epoch()
        out.append(
            AblationVariant(
                name=name,
                fuzzy_enabled=fuzzy,
                confidence_enabled=conf,
                source_report=source_report,
                target_before=before,
                target_after=after,
                target_best=best.accuracy if best else after.accuracy,
                history=history,
            )
        )
    base_acc = out[0].target_after.accuracy
    for v in out:
        v.delta_vs_base = v.target_after.accuracy - base_acc
    return out
