"""Impulse-based signal propagation over a network topology.

Per round, every node adds the weighted outputs of its predecessors to its
hidden state; a node whose hidden state is positive emits it as output and
resets to zero; emitted outputs accumulate into the node's memory signal.
Entrance nodes emit their feature value only at round 0.

Accumulation order is part of the defined semantics: the incoming sum for
a node is formed sequentially in predecessor-list order and then added to
the hidden state. This makes results bit-reproducible and checkable
against a straight-line scalar interpreter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from emn.errors import ConfigError, DimensionError
from emn.topology import NetworkTopology

# Instrumentation: number of per-sample forward propagations executed.
# Read/reset by the bench harness; there is no backward pass anywhere.
_forward_samples = 0


def forward_sample_count() -> int:
    return _forward_samples


def reset_forward_sample_count() -> None:
    global _forward_samples
    _forward_samples = 0


@dataclass(frozen=True)
class MemorySignalVector:
    """Steady memory signals for the hub+bridging nodes of one instance."""

    signals: np.ndarray  # float64, length = memory node count
    node_ids: np.ndarray  # aligned topology node ids


@dataclass(frozen=True)
class RoundTrace:
    round_index: int  # 1-based
    activated: np.ndarray  # node ids emitting this round
    outputs: np.ndarray  # per-node output values, full length N


@dataclass(frozen=True)
class PropagationTrace:
    rounds: list[RoundTrace]


def _rank_tables(topology: NetworkTopology):
    """Per predecessor-rank index arrays for ordered accumulation."""
    degrees = np.array([p.size for p in topology.predecessors])
    max_deg = int(degrees.max()) if degrees.size else 0
    tables = []
    for r in range(max_deg):
        nodes = np.nonzero(degrees > r)[0]
        src = np.array([topology.predecessors[i][r] for i in nodes], dtype=np.int64)
        w = np.array([topology.weights[i][r] for i in nodes])
        tables.append((nodes, src, w))
    return tables


def _run(topology: NetworkTopology, X: np.ndarray, T: int, trace: bool):
    """Synchronous rounds over a batch; returns (memory B x N, trace|None)."""
    global _forward_samples
    n = topology.node_count
    d = topology.feature_dim
    B = X.shape[0]
    tables = _rank_tables(topology)

    o = np.zeros((B, n))
    o[:, :d] = X
    h = np.zeros((B, n))
    m = np.zeros((B, n))
    rounds: list[RoundTrace] = []

    for t in range(1, T + 1):
        # Eq-style accumulation: incoming sum in predecessor-list order,
        # then added to the previous hidden state.
        incoming = np.zeros((B, n))
        for nodes, src, w in tables:
            incoming[:, nodes] = incoming[:, nodes] + o[:, src] * w
        h = h + incoming
        active = h > 0.0
        o = np.where(active, h, 0.0)
        h = np.where(active, 0.0, h)
        m = m + o
        if trace:
            rounds.append(
                RoundTrace(t, np.nonzero(active[0])[0].astype(np.int64), o[0].copy())
            )

    # Entrances receive no edges, so their memory signal is identically 0.
    assert not m[:, :d].any()
    _forward_samples += B
    return m, (PropagationTrace(rounds) if trace else None)


def _check_input(topology: NetworkTopology, X: np.ndarray, T: int) -> np.ndarray:
    if T < 1:
        raise ConfigError(f"round count T must be >= 1, got {T}")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != topology.feature_dim:
        raise DimensionError(
            f"expected feature dimension {topology.feature_dim}, "
            f"got shape {X.shape}"
        )
    return X


def propagate(topology: NetworkTopology, x, T: int) -> MemorySignalVector:
    """Steady memory signals of the hub+bridging nodes for one instance."""
    X = _check_input(topology, np.atleast_1d(np.asarray(x, dtype=np.float64)), T)
    if X.shape[0] != 1:
        raise DimensionError("propagate expects a single feature vector")
    m, _ = _run(topology, X, T, trace=False)
    ids = topology.memory_node_ids
    return MemorySignalVector(m[0, ids], ids)


def propagate_batch(topology: NetworkTopology, X, T: int) -> np.ndarray:
    """Rowwise propagate; returns a B x (hub+bridging) matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"expected a 2-D batch, got shape {X.shape}")
    X = _check_input(topology, X, T)
    if X.shape[0] == 0:
        return np.empty((0, topology.memory_node_count))
    m, _ = _run(topology, X, T, trace=False)
    return m[:, topology.memory_node_ids]


def propagate_trace(
    topology: NetworkTopology, x, T: int
) -> tuple[MemorySignalVector, PropagationTrace]:
    """As propagate, also recording per-round activation snapshots."""
    X = _check_input(topology, np.atleast_1d(np.asarray(x, dtype=np.float64)), T)
    m, tr = _run(topology, X, T, trace=True)
    ids = topology.memory_node_ids
    assert tr is not None
    return MemorySignalVector(m[0, ids], ids), tr


def reference_propagate(topology: NetworkTopology, x, T: int) -> np.ndarray:
    """Straight-line scalar interpreter of the propagation rules.

    Independent of the vectorized engine; used as the test oracle on small
    networks. Returns memory signals for all N nodes.
    """
    n = topology.node_count
    x = list(map(float, x))
    o = [0.0] * n
    for i in range(topology.feature_dim):
        o[i] = x[i]
    h = [0.0] * n
    m = [0.0] * n
    for _ in range(T):
        new_o = [0.0] * n
        new_h = list(h)
        for i in range(n):
            s = 0.0
            for j, w in zip(topology.predecessors[i], topology.weights[i]):
                s = s + o[j] * float(w)
            hi = h[i] + s
            if hi > 0.0:
                new_o[i] = hi
                new_h[i] = 0.0
            else:
                new_o[i] = 0.0
                new_h[i] = hi
        o, h = new_o, new_h
        for i in range(n):
            m[i] = m[i] + o[i]
    return np.array(m)
