"""Directed weighted topologies: construction, generators and reachability.

Indices are 0-based here; the file format and printed reports use 1-based labels.
An edge ``(src, dst, w)`` puts ``w`` at ``W[dst, src]``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

WeightDist = Callable[[np.random.Generator], float]


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    weight: float


@dataclass(frozen=True)
class Topology:
    N: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.N < 0:
            raise ValueError(f"node count must be nonnegative, got {self.N}")
        seen = set()
        for e in self.edges:
            if not (0 <= e.src < self.N and 0 <= e.dst < self.N):
                raise ValueError(f"edge {e.src + 1} -> {e.dst + 1} refers to a node outside 1..{self.N}")
            if e.src == e.dst:
                raise ValueError(f"self-loop at node {e.src + 1}")
            if (e.src, e.dst) in seen:
                raise ValueError(f"duplicate edge {e.src + 1} -> {e.dst + 1}")
            if e.weight == 0 or not np.isfinite(e.weight):
                raise ValueError(f"edge {e.src + 1} -> {e.dst + 1} needs a finite nonzero weight")
            seen.add((e.src, e.dst))


def to_adjacency(t: Topology) -> np.ndarray:
    W = np.zeros((t.N, t.N))
    for e in t.edges:
        W[e.dst, e.src] = e.weight
    return W


def from_adjacency(W) -> Topology:
    W = np.asarray(W, dtype=float)
    edges = [Edge(int(j), int(i), float(W[i, j])) for j in range(W.shape[1]) for i in range(W.shape[0]) if W[i, j] != 0]
    return Topology(W.shape[0], edges)


def default_weight(rng: np.random.Generator) -> float:
    """Uniform on ``[0.5, 1.5]`` with a random sign, keeping weights away from zero."""
    return float(rng.uniform(0.5, 1.5) * rng.choice((-1.0, 1.0)))


def unit_weight(rng: np.random.Generator) -> float:
    return 1.0


KINDS = ("chain", "star", "ring", "random")


def _pairs(kind: str, N: int, p: float, rng: np.random.Generator) -> Iterable[tuple[int, int]]:
    if kind == "chain":
        return [(k, k + 1) for k in range(N - 1)]
    if kind == "star":
        return [(0, k) for k in range(1, N)]
    if kind == "ring":
        if N < 2:
            return []
        if N == 2:
            return [(0, 1), (1, 0)]
        return [(k, (k + 1) % N) for k in range(N)]
    keep = rng.random((N, N)) < p
    return [(j, i) for j in range(N) for i in range(N) if i != j and keep[j, i]]


def generate(kind: str, N: int, seed: int | np.random.SeedSequence | None = 0, p: float = 0.5, weight_dist: WeightDist | None = None) -> Topology:
    """Deterministic topology generator.

    ``chain`` is the path 1 -> ... -> N, ``star`` points from node 1 to every
    other node, ``ring`` closes the chain, ``random`` keeps each ordered pair
    independently with probability ``p``. Deterministic kinds default to unit
    weights, ``random`` to :func:`default_weight`.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown topology kind {kind!r}; choose from {', '.join(KINDS)}")
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    if weight_dist is None:
        weight_dist = default_weight if kind == "random" else unit_weight
    edges = [Edge(src, dst, weight_dist(rng)) for src, dst in _pairs(kind, N, p, rng)]
    return Topology(N, edges)


def sources(t: Topology) -> list[int]:
    """Nodes without incoming edges."""
    has_in = {e.dst for e in t.edges}
    return [k for k in range(t.N) if k not in has_in]


def reachable_from(t: Topology, drivers: Iterable[int]) -> set[int]:
    out: dict[int, list[int]] = {}
    for e in t.edges:
        out.setdefault(e.src, []).append(e.dst)
    seen = set(drivers)
    queue = deque(seen)
    while queue:
        k = queue.popleft()
        for nxt in out.get(k, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen
