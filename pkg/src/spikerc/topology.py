"""Directed reservoir topologies with tagged edge classes and JSON round-trip.

Edge classes: "input-fanin" (input broadcasting into a block), "one-to-one"
(dedicated input-to-partner links, never pruned), "internal" (recurrent
edges eligible for pruning).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

EDGE_INPUT_FANIN = "input-fanin"
EDGE_ONE_TO_ONE = "one-to-one"
EDGE_INTERNAL = "internal"
EDGE_CLASSES = (EDGE_INPUT_FANIN, EDGE_ONE_TO_ONE, EDGE_INTERNAL)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    payload: float
    delay: float
    edge_class: str

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"self-loop on neuron {self.src}")
        if self.delay < 0:
            raise ValueError("edge delay must be non-negative")
        if not np.isfinite(self.payload):
            raise ValueError("edge payload must be finite")
        if self.edge_class not in EDGE_CLASSES:
            raise ValueError(f"unknown edge class {self.edge_class!r}")


@dataclass(frozen=True)
class ReservoirNetwork:
    n_neurons: int
    input_neurons: tuple[int, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n_neurons < 1:
            raise ValueError("n_neurons must be >= 1")
        object.__setattr__(self, "input_neurons", tuple(self.input_neurons))
        object.__setattr__(self, "edges", tuple(self.edges))
        if len(set(self.input_neurons)) != len(self.input_neurons):
            raise ValueError("input_neurons contains duplicates")
        for i in self.input_neurons:
            if not 0 <= i < self.n_neurons:
                raise ValueError(f"input neuron id {i} out of range")
        seen = set()
        for e in self.edges:
            if not (0 <= e.src < self.n_neurons and 0 <= e.dst < self.n_neurons):
                raise ValueError(f"edge ({e.src}, {e.dst}) out of range")
            if (e.src, e.dst) in seen:
                raise ValueError(f"duplicate directed edge ({e.src}, {e.dst})")
            seen.add((e.src, e.dst))

    def internal_edge_count(self) -> int:
        return sum(1 for e in self.edges if e.edge_class == EDGE_INTERNAL)


def _placement_ids(m: int, n_inputs: int, placement: str) -> tuple[int, ...]:
    if n_inputs < 0 or n_inputs > m:
        raise ValueError("n_inputs must lie in [0, m]")
    if placement == "first_m":
        return tuple(range(n_inputs))
    if placement == "every_other":
        if 2 * n_inputs > m:
            raise ValueError("every_other placement needs m >= 2*n_inputs")
        return tuple(2 * i for i in range(n_inputs))
    raise ValueError(f"unknown input placement {placement!r}")


def erdos_renyi(
    m: int,
    p: float,
    seed,
    *,
    n_inputs: int = 0,
    input_placement: str = "first_m",
    payload: float = 1.0,
    delay: float = 0.0,
) -> ReservoirNetwork:
    """Each ordered pair (i, j), i != j, becomes an internal edge with
    probability p; expected edge count is p*m*(m-1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random((m, m)) < p
    np.fill_diagonal(mask, False)
    edges = tuple(
        Edge(int(i), int(j), payload, delay, EDGE_INTERNAL)
        for i, j in np.argwhere(mask)
    )
    return ReservoirNetwork(m, _placement_ids(m, n_inputs, input_placement), edges)


def ring_small_world(
    m: int,
    k_neighbors: int,
    p_add: float,
    seed,
    *,
    n_inputs: int = 0,
    input_placement: str = "every_other",
    payload: float = 1.0,
    delay: float = 0.0,
) -> ReservoirNetwork:
    """Ring lattice (each node linked both directions to its k nearest
    neighbors per side) plus shortcuts: every ordered non-ring pair is added
    with probability p_add. Ring edges are always present, never rewired."""
    if m < 3:
        raise ValueError("m must be >= 3")
    if not 1 <= k_neighbors < m / 2:
        raise ValueError("k_neighbors must satisfy 1 <= k < m/2")
    if not 0.0 <= p_add <= 1.0:
        raise ValueError("p_add must lie in [0, 1]")
    ring = set()
    for i in range(m):
        for d in range(1, k_neighbors + 1):
            ring.add((i, (i + d) % m))
            ring.add((i, (i - d) % m))
    rng = np.random.default_rng(seed)
    mask = rng.random((m, m)) < p_add
    np.fill_diagonal(mask, False)
    for i, j in ring:
        mask[i, j] = False
    edges = [Edge(i, j, payload, delay, EDGE_INTERNAL) for i, j in sorted(ring)]
    edges.extend(
        Edge(int(i), int(j), payload, delay, EDGE_INTERNAL)
        for i, j in np.argwhere(mask)
    )
    return ReservoirNetwork(m, _placement_ids(m, n_inputs, input_placement), tuple(edges))


def wrap_with_input_layer(
    inner: ReservoirNetwork,
    *,
    payload: float = 1.0,
    delay: float = 0.0,
) -> ReservoirNetwork:
    """Add a dedicated input layer: one input neuron per inner neuron, each
    linked one-to-one to its partner. Inner ids shift up by the layer size."""
    if inner.input_neurons:
        raise ValueError("inner network must not declare its own inputs")
    m_in = inner.n_neurons
    edges = [
        Edge(i, m_in + i, payload, delay, EDGE_ONE_TO_ONE) for i in range(m_in)
    ]
    edges.extend(
        Edge(e.src + m_in, e.dst + m_in, e.payload, e.delay, e.edge_class)
        for e in inner.edges
    )
    return ReservoirNetwork(2 * m_in, tuple(range(m_in)), tuple(edges))


def handpicked_ring(m_in: int, *, payload: float = 1.0, delay: float = 0.0) -> ReservoirNetwork:
    """Outer layer of m_in input neurons, each wired one-to-one onto an inner
    bidirectional ring of m_in neurons (2*m_in neurons total)."""
    if m_in < 3:
        raise ValueError("m_in must be >= 3")
    inner = ring_small_world(m_in, 1, 0.0, 0, payload=payload, delay=delay)
    return wrap_with_input_layer(inner, payload=payload, delay=delay)


def cluster_chains(
    n_chains: int,
    clusters_per_chain: int,
    cluster_size: int,
    *,
    payload: float = 1.0,
    delay: float = 0.0,
) -> ReservoirNetwork:
    """Per chain: one input neuron fans into cluster 1; cluster c connects
    fully (bipartite) to cluster c+1; no intra-cluster, backward or
    cross-chain edges. Total neurons n_chains*(1 + clusters_per_chain*cluster_size)."""
    if min(n_chains, clusters_per_chain, cluster_size) < 1:
        raise ValueError("all cluster_chains dimensions must be >= 1")
    per_chain = clusters_per_chain * cluster_size
    n = n_chains * (1 + per_chain)
    edges = []
    for c in range(n_chains):
        base = n_chains + c * per_chain
        first = range(base, base + cluster_size)
        edges.extend(Edge(c, j, payload, delay, EDGE_INPUT_FANIN) for j in first)
        for k in range(clusters_per_chain - 1):
            cur = range(base + k * cluster_size, base + (k + 1) * cluster_size)
            nxt = range(base + (k + 1) * cluster_size, base + (k + 2) * cluster_size)
            edges.extend(
                Edge(i, j, payload, delay, EDGE_INTERNAL) for i in cur for j in nxt
            )
    return ReservoirNetwork(n, tuple(range(n_chains)), tuple(edges))


def linear_chains(
    m_in: int,
    chain_len: int,
    *,
    payload: float = 1.0,
    delay: float = 0.0,
) -> ReservoirNetwork:
    """m_in disjoint directed paths; input neuron i heads chain i and the
    chain continues head-to-tail for chain_len neurons total."""
    if m_in < 1 or chain_len < 1:
        raise ValueError("m_in and chain_len must be >= 1")
    n = m_in * chain_len
    edges = []
    for c in range(m_in):
        prev = c
        for k in range(chain_len - 1):
            cur = m_in + c * (chain_len - 1) + k
            edges.append(Edge(prev, cur, payload, delay, EDGE_INTERNAL))
            prev = cur
    return ReservoirNetwork(n, tuple(range(m_in)), tuple(edges))


def remove_random_internal_edge(net: ReservoirNetwork, seed) -> tuple[ReservoirNetwork, Edge]:
    """Return (network minus one uniformly chosen internal edge, the edge).

    Only "internal"-class edges are eligible; raises when none remain.
    """
    internal = [i for i, e in enumerate(net.edges) if e.edge_class == EDGE_INTERNAL]
    if not internal:
        raise ValueError("network has no internal edges to remove")
    rng = np.random.default_rng(seed)
    victim = internal[int(rng.integers(len(internal)))]
    edges = net.edges[:victim] + net.edges[victim + 1:]
    return ReservoirNetwork(net.n_neurons, net.input_neurons, edges), net.edges[victim]


def network_to_dict(net: ReservoirNetwork) -> dict:
    return {
        "n_neurons": net.n_neurons,
        "input_neurons": list(net.input_neurons),
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "payload": e.payload,
                "delay": e.delay,
                "class": e.edge_class,
            }
            for e in net.edges
        ],
    }


def network_from_dict(data: dict) -> ReservoirNetwork:
    required = {"n_neurons", "input_neurons", "edges"}
    _check_keys(data, required, required, "network")
    edge_keys = {"src", "dst", "payload", "delay", "class"}
    edges = []
    for i, entry in enumerate(data["edges"]):
        _check_keys(entry, edge_keys, edge_keys, f"edges[{i}]")
        edges.append(
            Edge(
                src=int(entry["src"]),
                dst=int(entry["dst"]),
                payload=float(entry["payload"]),
                delay=float(entry["delay"]),
                edge_class=entry["class"],
            )
        )
    return ReservoirNetwork(
        n_neurons=int(data["n_neurons"]),
        input_neurons=tuple(int(i) for i in data["input_neurons"]),
        edges=tuple(edges),
    )


def _check_keys(data: dict, required: set, allowed: set, where: str) -> None:
    if not isinstance(data, dict):
        raise ValueError(f"{where}: expected an object")
    missing = required - data.keys()
    if missing:
        raise ValueError(f"{where}: missing field {sorted(missing)[0]!r}")
    unknown = data.keys() - allowed
    if unknown:
        raise ValueError(f"{where}: unknown field {sorted(unknown)[0]!r}")


def save_network(net: ReservoirNetwork, path) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_network(path) -> ReservoirNetwork:
    with open(path) as fh:
        return network_from_dict(json.load(fh))
