"""Hybrid random network topology: entrance, hub, and bridging nodes.

Node ids are assigned entrance-first, then hub, then bridging. Entrance
nodes have no incoming edges, every hub node receives every entrance node
once, and every bridging node receives a fixed number of distinct
predecessors sampled uniformly from all other nodes. Edge weights are
uniform on [-1, 1].

Randomness comes from numpy's PCG64 generator seeded with the config seed.
The draw order is fixed: all hub weights in node-id order, then for each
bridging node in id order its predecessor sample followed by its weights.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from emn.errors import ConfigError


class NodeKind(enum.Enum):
    ENTRANCE = "entrance"
    HUB = "hub"
    BRIDGING = "bridging"


@dataclass(frozen=True)
class TopologyConfig:
    feature_dim: int
    hub_count: int = 50
    bridging_count: int = 50
    bridging_in_degree: int = 30
    seed: int = 0

    def validate(self) -> None:
        if self.feature_dim < 1:
            raise ConfigError("feature_dim must be positive")
        if self.hub_count < 1:
            raise ConfigError("hub_count must be positive")
        if self.bridging_count < 0:
            raise ConfigError("bridging_count must be non-negative")
        if self.bridging_count > 0:
            if self.bridging_in_degree < 1:
                raise ConfigError("bridging_in_degree must be positive")
            pool = self.feature_dim + self.hub_count + self.bridging_count - 1
            if self.bridging_in_degree > pool:
                raise ConfigError(
                    f"bridging_in_degree {self.bridging_in_degree} exceeds the "
                    f"{pool} distinct non-self predecessors available"
                )
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")


@dataclass
class NetworkTopology:
    """Immutable after construction; safe for concurrent reads."""

    config: TopologyConfig
    node_kinds: list[NodeKind]
    predecessors: list[np.ndarray]  # per node, int64 ids; empty for entrances
    weights: list[np.ndarray]  # per node, float64 aligned with predecessors

    @property
    def node_count(self) -> int:
        return len(self.node_kinds)

    @property
    def feature_dim(self) -> int:
        return self.config.feature_dim

    @property
    def memory_node_ids(self) -> np.ndarray:
        """Hub then bridging node ids; the nodes that carry memory units."""
        d = self.config.feature_dim
        return np.arange(d, self.node_count, dtype=np.int64)

    @property
    def memory_node_count(self) -> int:
        return self.config.hub_count + self.config.bridging_count


def build_topology(cfg: TopologyConfig) -> NetworkTopology:
    """Construct the seeded hybrid random graph. Pure function of cfg."""
    cfg.validate()
    d, h, b = cfg.feature_dim, cfg.hub_count, cfg.bridging_count
    n = d + h + b
    rng = np.random.default_rng(cfg.seed)

    kinds = (
        [NodeKind.ENTRANCE] * d + [NodeKind.HUB] * h + [NodeKind.BRIDGING] * b
    )
    preds: list[np.ndarray] = [np.empty(0, dtype=np.int64) for _ in range(d)]
    weights: list[np.ndarray] = [np.empty(0) for _ in range(d)]

    entrance_ids = np.arange(d, dtype=np.int64)
    for _ in range(h):
        preds.append(entrance_ids)
        weights.append(rng.uniform(-1.0, 1.0, size=d))

    all_ids = np.arange(n, dtype=np.int64)
    for node in range(d + h, n):
        pool = np.delete(all_ids, node)
        chosen = rng.choice(pool, size=cfg.bridging_in_degree, replace=False)
        preds.append(chosen.astype(np.int64))
        weights.append(rng.uniform(-1.0, 1.0, size=cfg.bridging_in_degree))

    return NetworkTopology(cfg, kinds, preds, weights)


@dataclass(frozen=True)
class TopologyStats:
    entrance_count: int
    hub_count: int
    bridging_count: int
    edge_count: int
    weight_min: float
    weight_max: float
    weight_mean: float


def topology_stats(t: NetworkTopology) -> TopologyStats:
    all_w = np.concatenate([w for w in t.weights if w.size] or [np.empty(0)])
    return TopologyStats(
        entrance_count=sum(k is NodeKind.ENTRANCE for k in t.node_kinds),
        hub_count=sum(k is NodeKind.HUB for k in t.node_kinds),
        bridging_count=sum(k is NodeKind.BRIDGING for k in t.node_kinds),
        edge_count=int(sum(p.size for p in t.predecessors)),
        weight_min=float(all_w.min()) if all_w.size else 0.0,
        weight_max=float(all_w.max()) if all_w.size else 0.0,
        weight_mean=float(all_w.mean()) if all_w.size else 0.0,
    )
