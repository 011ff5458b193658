"""Network model: node systems, network specs and the lifted (stacked) system.

Edge convention used everywhere in this package: ``W[i, j]`` is the weight of
the directed edge ``j -> i``. Node ``i`` therefore receives ``W[i, j] * H @ y_j``
from each in-neighbour ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


class InvalidSpecError(ValueError):
    """Raised when an operation needs a valid spec and gets an invalid one."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid network spec: {lines}")


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ToleranceConfig:
    """Thresholds used by every numerical decision.

    ``rank_factor`` scales the standard numerical-rank cutoff
    ``rank_factor * max(shape) * sigma_max * eps``.
    """

    rank_factor: float = 1.0
    eig_dedup_radius: float = 1e-8
    zero_vec_tol: float = 1e-10

    def __post_init__(self):
        for name in ("rank_factor", "eig_dedup_radius", "zero_vec_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"tolerance {name} must be strictly positive, got {value!r}")

    def with_overrides(self, **kwargs) -> "ToleranceConfig":
        return replace(self, **kwargs)


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True, eq=False)
class NodeSystem:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen(self.A))
        object.__setattr__(self, "B", _frozen(self.B))
        object.__setattr__(self, "C", _frozen(self.C))

    @property
    def dims(self) -> tuple[int, int, int]:
        """``(n, p, m)`` read off A, B and C (shape errors are left to ``validate``)."""
        n = self.A.shape[0] if self.A.ndim == 2 else -1
        p = self.B.shape[1] if self.B.ndim == 2 else -1
        m = self.C.shape[0] if self.C.ndim == 2 else -1
        return n, p, m

    def __eq__(self, other):
        if not isinstance(other, NodeSystem):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.B, other.B)
            and np.array_equal(self.C, other.C)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    nodes: tuple[NodeSystem, ...]
    W: np.ndarray
    H: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "W", _frozen(self.W))
        object.__setattr__(self, "H", _frozen(self.H))
        raw = np.asarray(self.delta)
        object.__setattr__(self, "delta", _frozen(raw, dtype=int if raw.dtype.kind in "biu" else float))

    @property
    def N(self) -> int:
        return len(self.nodes)

    @property
    def n(self) -> int:
        return self.nodes[0].dims[0]

    @property
    def p(self) -> int:
        return self.nodes[0].dims[1]

    @property
    def m(self) -> int:
        return self.nodes[0].dims[2]

    @property
    def Delta(self) -> np.ndarray:
        return np.diag(self.delta.astype(float))

    @property
    def driven(self) -> list[int]:
        return [i for i in range(self.N) if self.delta[i] == 1]

    def with_delta(self, delta) -> "NetworkSpec":
        return replace(self, delta=np.asarray(delta, dtype=int))

    def __eq__(self, other):
        if not isinstance(other, NetworkSpec):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and np.array_equal(self.W, other.W)
            and np.array_equal(self.H, other.H)
            and np.array_equal(self.delta, other.delta)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LiftedSystem:
    Phi: np.ndarray
    Psi: np.ndarray
    block_dims: tuple[int, int, int]  # (N, n, p)

    def state_block(self, i: int, j: int) -> np.ndarray:
        _, n, _ = self.block_dims
        return self.Phi[i * n:(i + 1) * n, j * n:(j + 1) * n]

    def input_block(self, i: int, j: int) -> np.ndarray:
        _, n, p = self.block_dims
        return self.Psi[i * n:(i + 1) * n, j * p:(j + 1) * p]


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str

    def __str__(self):
        return f"{self.field}: {self.rule}"


def validate(spec: NetworkSpec) -> list[Violation]:
    """Return every broken invariant of ``spec``; an empty list means valid."""
    out: list[Violation] = []
    N = spec.N
    if N == 0:
        return [Violation("nodes", "network must contain at least one node")]

    ref = None
    for k, node in enumerate(spec.nodes):
        where = f"nodes[{k + 1}]"
        shapes_ok = True
        for name in ("A", "B", "C"):
            if getattr(node, name).ndim != 2:
                out.append(Violation(f"{where}.{name}", "must be a 2-D matrix"))
                shapes_ok = False
        if not shapes_ok:
            continue
        n = node.A.shape[0]
        if node.A.shape[1] != n:
            out.append(Violation(f"{where}.A", f"must be square, got shape {node.A.shape}"))
        if node.B.shape[0] != n:
            out.append(Violation(f"{where}.B", f"dimension mismatch: expected {n} rows, got {node.B.shape[0]}"))
        if node.C.shape[1] != n:
            out.append(Violation(f"{where}.C", f"dimension mismatch: expected {n} columns, got {node.C.shape[1]}"))
        for name in ("A", "B", "C"):
            if not np.all(np.isfinite(getattr(node, name))):
                out.append(Violation(f"{where}.{name}", "entries must be finite"))
        if ref is None:
            ref = node.dims
        elif node.dims != ref:
            out.append(Violation(where, f"dimension mismatch: (n, p, m) = {node.dims} differs from node 1's {ref}"))

    if spec.W.shape != (N, N):
        out.append(Violation("W", f"dimension mismatch: expected shape ({N}, {N}), got {spec.W.shape}"))
    else:
        if not np.all(np.isfinite(spec.W)):
            out.append(Violation("W", "entries must be finite"))
        for k in np.flatnonzero(np.diag(spec.W)):
            out.append(Violation("W", f"self-loop at node {k + 1} (diagonal entry must be zero)"))

    if ref is not None:
        n, _, m = ref
        if spec.H.shape != (n, m):
            out.append(Violation("H", f"dimension mismatch: expected shape ({n}, {m}), got {spec.H.shape}"))
        elif not np.all(np.isfinite(spec.H)):
            out.append(Violation("H", "entries must be finite"))

    if spec.delta.shape != (N,):
        out.append(Violation("delta", f"dimension mismatch: expected length {N}, got shape {spec.delta.shape}"))
    elif not np.all(np.isin(spec.delta, (0, 1))):
        out.append(Violation("delta", "entries must be 0 or 1"))
    return out


def require_valid(spec: NetworkSpec) -> None:
    violations = validate(spec)
    if violations:
        raise InvalidSpecError(violations)


def build_lifted(spec: NetworkSpec) -> LiftedSystem:
    """Assemble ``Phi = blockdiag(A_i) + [W_ij H C_j]`` and ``Psi = blockdiag(delta_i B_i)``."""
    require_valid(spec)
    N, n, p = spec.N, spec.n, spec.p
    Phi = np.zeros((N * n, N * n))
    Psi = np.zeros((N * n, N * p))
    for i, node in enumerate(spec.nodes):
        rows = slice(i * n, (i + 1) * n)
        Phi[rows, rows] = node.A
        Psi[rows, i * p:(i + 1) * p] = spec.delta[i] * node.B
        for j, src in enumerate(spec.nodes):
            if j != i and spec.W[i, j] != 0:
                Phi[rows, j * n:(j + 1) * n] = spec.W[i, j] * (spec.H @ src.C)
    return LiftedSystem(_frozen(Phi), _frozen(Psi), (N, n, p))


def homogenize(spec: NetworkSpec) -> NetworkSpec:
    """Copy of ``spec`` with every node's (A, B, C) replaced by node 1's."""
    first = spec.nodes[0]
    nodes = tuple(NodeSystem(first.A, first.B, first.C, label=node.label) for node in spec.nodes)
    return replace(spec, nodes=nodes)


def is_homogeneous(spec: NetworkSpec) -> bool:
    first = spec.nodes[0]
    return all(
        np.array_equal(node.A, first.A) and np.array_equal(node.B, first.B) and np.array_equal(node.C, first.C)
        for node in spec.nodes
    )


def make_spec(As, Bs, Cs, W, H, delta, labels: Sequence[str] | None = None) -> NetworkSpec:
    """Convenience constructor from parallel lists of node matrices."""
    if labels is None:
        labels = [str(k + 1) for k in range(len(As))]
    nodes = tuple(NodeSystem(A, B, C, label=lab) for A, B, C, lab in zip(As, Bs, Cs, labels))
    return NetworkSpec(nodes=nodes, W=W, H=H, delta=delta)
