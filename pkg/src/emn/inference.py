"""Network-level prediction: confidence-weighted fusion of node posteriors.

Every memory-bearing node votes with its class posterior, weighted by the
likelihood of its observed memory signal under its own predicted class.
The fused posterior is the convex combination of node posteriors; ties in
the argmax break toward the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from emn.errors import DimensionError, NotTrainedError
from emn.memory import (
    CONFIDENCE_FLOOR,
    HyperParams,
    MemoryStore,
    init_memory,
    softmax,
    store_log_likelihoods,
)
from emn.propagation import propagate_batch
from emn.topology import NetworkTopology, TopologyConfig, build_topology


@dataclass
class EmnModel:
    topology: NetworkTopology
    store: MemoryStore
    class_count: int
    hyper: HyperParams
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.store.node_count != self.topology.memory_node_count:
            raise DimensionError(
                "memory store size does not match hub+bridging node count"
            )
        if self.store.class_count != self.class_count:
            raise DimensionError("store class count does not match model")

    @property
    def trained(self) -> bool:
        return self.store.fully_initialized


@dataclass(frozen=True)
class NodeDetail:
    node_id: int
    label: int
    confidence: float
    posterior: np.ndarray


@dataclass(frozen=True)
class Prediction:
    label: int
    posterior: np.ndarray
    node_details: list[NodeDetail] | None = None


def build_model(
    topo_cfg: TopologyConfig,
    class_count: int,
    hyper: HyperParams | None = None,
    metadata: dict[str, str] | None = None,
) -> EmnModel:
    """Fresh untrained model from a topology config."""
    hyper = hyper or HyperParams()
    topology = build_topology(topo_cfg)
    store = init_memory(topology.memory_node_count, class_count, hyper)
    return EmnModel(topology, store, class_count, hyper, metadata or {})


def _fuse(posteriors: np.ndarray, confidences: np.ndarray) -> np.ndarray:
    """Convex combination over nodes; posteriors B x nodes x C."""
    weights = confidences / confidences.sum(axis=1, keepdims=True)
    return np.einsum("bn,bnc->bc", weights, posteriors)


def batch_node_votes(model: EmnModel, signals: np.ndarray):
    """Posteriors, labels, and confidences for every node of every row."""
    log_lik = store_log_likelihoods(model.store, signals)  # B x nodes x C
    posteriors = softmax(log_lik, axis=2)
    labels = np.argmax(posteriors, axis=2)
    picked = np.take_along_axis(log_lik, labels[:, :, None], axis=2)[:, :, 0]
    confidences = np.maximum(np.exp(picked), CONFIDENCE_FLOOR)
    if not model.hyper.confidence_enabled:
        confidences = np.ones_like(confidences)
    return posteriors, labels, confidences


def fused_posteriors_from_signals(model: EmnModel, signals: np.ndarray) -> np.ndarray:
    """Fused posterior rows (B x C) from precomputed memory signals."""
    if signals.shape[0] == 0:
        return np.empty((0, model.class_count))
    posteriors, _, confidences = batch_node_votes(model, signals)
    return _fuse(posteriors, confidences)


def labels_from_signals(model: EmnModel, signals: np.ndarray) -> np.ndarray:
    """Fused predicted labels from precomputed memory signals."""
    fused = fused_posteriors_from_signals(model, signals)
    return np.argmax(fused, axis=1).astype(np.int64)


def predict_batch(
    model: EmnModel, X, with_details: bool = False
) -> list[Prediction]:
    """Rowwise prediction; order preserved, model left untouched."""
    if not model.trained:
        raise NotTrainedError("model has uninitialized memory units")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"expected a 2-D batch, got shape {X.shape}")
    signals = propagate_batch(model.topology, X, model.hyper.rounds)
    if X.shape[0] == 0:
        return []
    posteriors, labels, confidences = batch_node_votes(model, signals)
    fused = _fuse(posteriors, confidences)
    node_ids = model.topology.memory_node_ids
    out = []
    for b in range(X.shape[0]):
        details = None
        if with_details:
            details = [
                NodeDetail(
                    int(node_ids[i]),
                    int(labels[b, i]),
                    float(confidences[b, i]),
                    posteriors[b, i],
                )
                for i in range(len(node_ids))
            ]
        out.append(Prediction(int(np.argmax(fused[b])), fused[b], details))
    return out


def predict(model: EmnModel, x, with_details: bool = False) -> Prediction:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1:
        raise DimensionError("predict expects a single feature vector")
    return predict_batch(model, x[None, :], with_details=with_details)[0]
