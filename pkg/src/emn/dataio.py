"""Dataset formats, synthetic domain-shift generation, model documents.

Formats:
  - CSV datasets: header "f0,...,f{d-1}[,label]", UTF-8, LF endings.
  - EMNF binary datasets: magic "EMNF", little-endian, version 1.
  - Model documents: JSON with a CRC-32 checksum over the canonical
    payload; floats round-trip at full 64-bit precision.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from emn.errors import (
    ConfigError,
    DimensionError,
    IntegrityError,
    LabelRangeError,
    MagicError,
    ParseError,
    SchemaVersionError,
    TruncationError,
    VersionError,
)
from emn.inference import EmnModel
from emn.memory import HyperParams, MemoryStore
from emn.topology import NetworkTopology, NodeKind, TopologyConfig

EMNF_MAGIC = b"EMNF"
EMNF_VERSION = 1
MODEL_SCHEMA_VERSION = 1


@dataclass
class FeatureDataset:
    features: np.ndarray  # n x dim, float64
    labels: np.ndarray | None = None  # int64 or None
    domain_tag: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DimensionError("features must be a 2-D matrix")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.features.shape[0],):
                raise DimensionError("label count must equal sample count")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def check_labels_in_range(self, class_count: int) -> None:
        if self.labels is not None and self.labels.size:
            if self.labels.min() < 0 or self.labels.max() >= class_count:
                raise LabelRangeError(f"labels must lie in [0, {class_count})")


# ---------------------------------------------------------------------------
# CSV datasets


def write_csv(dataset: FeatureDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        cols = [f"f{i}" for i in range(dataset.dim)]
        if dataset.labels is not None:
            cols.append("label")
        f.write(",".join(cols) + "\n")
        for i in range(dataset.n_samples):
            row = [repr(float(v)) for v in dataset.features[i]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[i])))
            f.write(",".join(row) + "\n")


def read_csv(path, domain_tag: str = "") -> FeatureDataset:
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split(",")
    has_label = bool(header) and header[-1] == "label"
    dim = len(header) - (1 if has_label else 0)
    if dim < 1:
        raise ParseError(f"{path}: line 1: no feature columns in header")
    features, labels = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ParseError(
                f"{path}: line {lineno}: expected {len(header)} fields, "
                f"got {len(parts)}"
            )
        try:
            features.append([float(v) for v in parts[:dim]])
            if has_label:
                labels.append(int(parts[dim]))
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from None
    feats = np.array(features, dtype=np.float64).reshape(len(features), dim)
    return FeatureDataset(
        feats,
        np.array(labels, dtype=np.int64) if has_label else None,
        domain_tag,
    )


# ---------------------------------------------------------------------------
# EMNF binary datasets


def write_emnf(dataset: FeatureDataset, path) -> None:
    has_labels = dataset.labels is not None
    class_count = (
        int(dataset.labels.max()) + 1 if has_labels and dataset.labels.size else 0
    )
    with open(path, "wb") as f:
        f.write(EMNF_MAGIC)
        f.write(
            struct.pack(
                "<HHIII",
                EMNF_VERSION,
                1 if has_labels else 0,
                dataset.n_samples,
                dataset.dim,
                class_count,
            )
        )
        f.write(np.ascontiguousarray(dataset.features, dtype="<f8").tobytes())
        if has_labels:
            f.write(np.ascontiguousarray(dataset.labels, dtype="<i4").tobytes())


def _read_exact(f, size: int, what: str) -> bytes:
    data = f.read(size)
    if len(data) != size:
        raise TruncationError(f"file ended while reading {what}")
    return data


def read_emnf(path, domain_tag: str = "") -> FeatureDataset:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic bytes")
        if magic != EMNF_MAGIC:
            raise MagicError(f"bad magic bytes {magic!r}")
        version, flags, n, dim, _class_count = struct.unpack(
            "<HHIII", _read_exact(f, 16, "header")
        )
        if version != EMNF_VERSION:
            raise VersionError(f"unsupported EMNF version {version}")
        feats = np.frombuffer(
            _read_exact(f, 8 * n * dim, "feature payload"), dtype="<f8"
        ).reshape(n, dim)
        labels = None
        if flags & 1:
            labels = np.frombuffer(
                _read_exact(f, 4 * n, "label payload"), dtype="<i4"
            ).astype(np.int64)
    return FeatureDataset(feats.astype(np.float64), labels, domain_tag)


def read_dataset(path, fmt: str | None = None, domain_tag: str = "") -> FeatureDataset:
    """Read CSV or EMNF; format inferred from the extension when omitted."""
    fmt = fmt or ("emnf" if str(path).endswith(".emnf") else "csv")
    if fmt == "emnf":
        return read_emnf(path, domain_tag)
    return read_csv(path, domain_tag)


def write_dataset(dataset: FeatureDataset, path, fmt: str | None = None) -> None:
    fmt = fmt or ("emnf" if str(path).endswith(".emnf") else "csv")
    if fmt == "emnf":
        write_emnf(dataset, path)
    else:
        write_csv(dataset, path)


# ---------------------------------------------------------------------------
# Synthetic shifted-blobs task


@dataclass(frozen=True)
class SynthConfig:
    class_count: int = 3
    dim: int = 20
    samples_per_class: int = 200
    class_mean_scale: float = 1.0
    within_class_spread: float = 1.0
    shift_vector_norm: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.class_count < 2:
            raise ConfigError("class_count must be >= 2")
        if self.dim < 1 or self.samples_per_class < 1:
            raise ConfigError("dim and samples_per_class must be positive")
        if self.class_mean_scale <= 0 or self.within_class_spread <= 0:
            raise ConfigError("scales must be positive")
        if self.shift_vector_norm < 0:
            raise ConfigError("shift_vector_norm must be non-negative")


def synth_shifted_blobs(cfg: SynthConfig) -> tuple[FeatureDataset, FeatureDataset]:
    """Gaussian blobs; the target domain is the source translated by a
    fixed random vector of the configured norm. Draw order: class means,
    shift direction, source noise, target noise."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    means = rng.normal(0.0, cfg.class_mean_scale, size=(cfg.class_count, cfg.dim))
    direction = rng.normal(size=cfg.dim)
    norm = np.linalg.norm(direction)
    shift = (
        direction / norm * cfg.shift_vector_norm if cfg.shift_vector_norm > 0 else 0.0
    )
    labels = np.repeat(np.arange(cfg.class_count), cfg.samples_per_class)

    def draw(tag: str, translate) -> FeatureDataset:
        noise = rng.normal(
            0.0,
            cfg.within_class_spread,
            size=(cfg.class_count * cfg.samples_per_class, cfg.dim),
        )
        feats = means[labels] + noise + translate
        return FeatureDataset(feats, labels.copy(), tag)

    source = draw("source", 0.0)
    target = draw("target", shift)
    return source, target


# ---------------------------------------------------------------------------
# Model documents


def _model_payload(model: EmnModel) -> dict:
    t = model.topology
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "class_count": model.class_count,
        "hyper": {
            "beta": model.hyper.beta,
            "sigma1": model.hyper.sigma1,
            "batch_size": model.hyper.batch_size,
            "rounds": model.hyper.rounds,
            "fuzzy_enabled": model.hyper.fuzzy_enabled,
            "confidence_enabled": model.hyper.confidence_enabled,
            "confidence_normalized": model.hyper.confidence_normalized,
            "literal_batch_divisor": model.hyper.literal_batch_divisor,
        },
        "topology": {
            "config": {
                "feature_dim": t.config.feature_dim,
                "hub_count": t.config.hub_count,
                "bridging_count": t.config.bridging_count,
                "bridging_in_degree": t.config.bridging_in_degree,
                "seed": t.config.seed,
            },
            "edges": [p.tolist() for p in t.predecessors],
            "weights": [w.tolist() for w in t.weights],
        },
        "memory": {
            "mu": model.store.mu.tolist(),
            "sigma": model.store.sigma.tolist(),
            "initialized": model.store.initialized.astype(int).tolist(),
        },
        "metadata": dict(model.metadata),
    }


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_model(model: EmnModel, path) -> None:
    payload = _model_payload(model)
    checksum = zlib.crc32(_canonical(payload).encode("utf-8"))
    doc = {"payload": payload, "crc32": checksum}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)
        f.write("\n")


def load_model(path) -> EmnModel:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    payload = doc.get("payload", {})
    stored = doc.get("crc32")
    if zlib.crc32(_canonical(payload).encode("utf-8")) != stored:
        raise IntegrityError(f"{path}: checksum mismatch")
    version = payload.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise SchemaVersionError(f"{path}: unknown schema version {version}")

    tcfg = TopologyConfig(**payload["topology"]["config"])
    d, h, b = tcfg.feature_dim, tcfg.hub_count, tcfg.bridging_count
    kinds = [NodeKind.ENTRANCE] * d + [NodeKind.HUB] * h + [NodeKind.BRIDGING] * b
    preds = [np.array(p, dtype=np.int64) for p in payload["topology"]["edges"]]
    weights = [np.array(w, dtype=np.float64) for w in payload["topology"]["weights"]]
    topology = NetworkTopology(tcfg, kinds, preds, weights)

    hyper = HyperParams(**payload["hyper"])
    mem = payload["memory"]
    store = MemoryStore(
        mu=np.array(mem["mu"], dtype=np.float64),
        sigma=np.array(mem["sigma"], dtype=np.float64),
        initialized=np.array(mem["initialized"], dtype=bool),
        class_count=payload["class_count"],
        hyper=hyper,
    )
    return EmnModel(
        topology, store, payload["class_count"], hyper, dict(payload.get("metadata", {}))
    )


# ---------------------------------------------------------------------------
# CSV exports for inspection


def write_memory_csv(model: EmnModel, path) -> None:
    """Memory snapshot: one row per (node, class)."""
    node_ids = model.topology.memory_node_ids
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("node_id,class,mu,sigma\n")
        for i, nid in enumerate(node_ids):
            for k in range(model.class_count):
                f.write(
                    f"{int(nid)},{k},{model.store.mu[i, k]!r},"
                    f"{model.store.sigma[i, k]!r}\n"
                )


def write_trace_csv(trace, path) -> None:
    """Activation trace: one row per activated node per round."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("round,node_id,output\n")
        for rt in trace.rounds:
            for nid in rt.activated:
                f.write(f"{rt.round_index},{int(nid)},{rt.outputs[nid]!r}\n")
