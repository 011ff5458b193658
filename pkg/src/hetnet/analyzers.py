"""General controllability criteria for heterogeneous networks.

Each checker takes a ``NetworkSpec`` and returns a ``ControllabilityReport``.
Only the iff criteria (the block-equation PBH test and the chain rule) ever
return ``Controllable``; necessity checks either fail or report a pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .model import DEFAULT_TOL, NetworkSpec, ToleranceConfig, build_lifted, require_valid
from .numerics import (
    PBHWitness,
    _normalize_phase,
    _smallest_left_vector,
    cluster_values,
    clustered_spectrum,
    left_nullspace,
    pbh_analysis,
    pbh_controllable,
    pbh_rank_at,
    rank_of,
    similar,
    unobservable_modes,
)


class Verdict(str, Enum):
    CONTROLLABLE = "Controllable"
    UNCONTROLLABLE = "Uncontrollable"
    NECESSARY_FAILED = "NecessaryConditionFailed"
    NECESSARY_PASSED = "NecessaryConditionPassed"
    NOT_APPLICABLE = "NotApplicable"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ControllabilityReport:
    """Outcome of one criterion.

    ``scope`` is ``"network"`` for statements about the lifted system and
    ``"topology"`` for the pair ``(W, Delta)``. ``nodes`` holds 0-based node
    indices singled out by the check (for example the blocks carrying a
    nonzero part of a witness).
    """

    verdict: Verdict
    criterion: str
    witness: PBHWitness | None = None
    notes: tuple[str, ...] = ()
    failed_condition: int | None = None
    nodes: tuple[int, ...] = ()
    scope: str = "network"
    extra_witnesses: tuple[PBHWitness, ...] = field(default=())

    @property
    def decided(self) -> bool:
        return self.verdict in (Verdict.CONTROLLABLE, Verdict.UNCONTROLLABLE, Verdict.NECESSARY_FAILED)


def _nodes(idx) -> str:
    idx = list(idx)
    return ("node " if len(idx) == 1 else "nodes ") + ", ".join(str(k + 1) for k in idx)


def _fmt(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-12:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}j"


# ---------------------------------------------------------------------------
# block-equation PBH machinery
# ---------------------------------------------------------------------------

def block_equations(spec: NetworkSpec, s: complex, keep: list[int] | None = None) -> np.ndarray:
    """Coefficient matrix of the node-block PBH equations at ``s``.

    Unknowns are the row blocks ``alpha_j`` (one per node in ``keep``); column
    block ``i`` holds equation ``alpha_i (s I - A_i) - sum_j w_ji alpha_j H C_i``
    followed by ``delta_i alpha_i B_i``. A row vector ``alpha`` with
    ``alpha @ M = 0`` is a solution.
    """
    N, n, p = spec.N, spec.n, spec.p
    keep = list(range(N)) if keep is None else list(keep)
    dtype = float if complex(s).imag == 0 else complex
    s = complex(s).real if dtype is float else complex(s)
    M = np.zeros((len(keep) * n, N * (n + p)), dtype=dtype)
    HC = [spec.H @ node.C for node in spec.nodes]
    for r, j in enumerate(keep):
        rows = slice(r * n, (r + 1) * n)
        for i, node in enumerate(spec.nodes):
            col = i * (n + p)
            if i == j:
                M[rows, col:col + n] = s * np.eye(n) - node.A
                M[rows, col + n:col + n + p] = spec.delta[i] * node.B
            elif spec.W[j, i] != 0:
                M[rows, col:col + n] = -spec.W[j, i] * HC[i]
    return M


def _solve_blocks(spec: NetworkSpec, s0: complex, tol: ToleranceConfig) -> tuple[np.ndarray, int]:
    M = block_equations(spec, s0)
    basis = left_nullspace(M, tol)
    if basis.shape[0] == 0:
        return _normalize_phase(_smallest_left_vector(M)[0]), 0
    return _normalize_phase(basis[0]), basis.shape[0]


def _carrying_nodes(alpha: np.ndarray, N: int, n: int, tol: ToleranceConfig) -> tuple[int, ...]:
    blocks = alpha.reshape(N, n)
    return tuple(int(i) for i in np.flatnonzero(np.linalg.norm(blocks, axis=1) > tol.zero_vec_tol))


def check_theorem1(spec: NetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Necessary and sufficient block-equation test.

    Nontrivial solutions only exist at eigenvalues of the lifted matrix that
    are PBH-deficient, which are exactly the eigenvalues of its uncontrollable
    part. Those points come from the staircase reduction of the lifted pair;
    the node-block equations are then solved at each of them.
    """
    require_valid(spec)
    lifted = build_lifted(spec)
    analysis = pbh_analysis(lifted.Phi, lifted.Psi, tol)
    name = "theorem1"
    if analysis.controllable:
        return ControllabilityReport(Verdict.CONTROLLABLE, name, notes=("only the trivial solution alpha = 0 at every s",))
    N, n = spec.N, spec.n
    witnesses = []
    carrying: set[int] = set()
    notes = []
    for w in analysis.witnesses:
        alpha, dim = _solve_blocks(spec, w.s0, tol)
        if dim == 0:
            # rank test at the computed point too coarse; the staircase vector is exact up to rounding
            alpha = w.left_vector
        nodes = _carrying_nodes(alpha, N, n, tol)
        carrying.update(nodes)
        witnesses.append(PBHWitness(w.s0, alpha, max(dim, w.deficiency)))
        notes.append(
            f"nontrivial solution at s = {_fmt(w.s0)} (dimension {max(dim, w.deficiency)}), "
            f"nonzero blocks at {_nodes(nodes)}"
        )
    return ControllabilityReport(
        Verdict.UNCONTROLLABLE,
        name,
        witness=witnesses[0],
        notes=tuple(notes),
        nodes=tuple(sorted(carrying)),
        extra_witnesses=tuple(witnesses[1:]),
    )


def check_topology(spec: NetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Controllability of the pair ``(W, Delta)``."""
    require_valid(spec)
    ok, wits = pbh_controllable(spec.W, spec.Delta, tol)
    if ok:
        return ControllabilityReport(Verdict.CONTROLLABLE, "topology", scope="topology")
    return ControllabilityReport(
        Verdict.UNCONTROLLABLE,
        "topology",
        witness=wits[0],
        notes=tuple(f"(W, Delta) loses rank at s = {_fmt(w.s0)}" for w in wits),
        scope="topology",
        extra_witnesses=tuple(wits[1:]),
    )


# ---------------------------------------------------------------------------
# chain networks
# ---------------------------------------------------------------------------

def _is_chain(W: np.ndarray) -> bool:
    N = W.shape[0]
    pattern = W != 0
    expected = np.zeros_like(pattern)
    for k in range(N - 1):
        expected[k + 1, k] = True
    return bool(np.array_equal(pattern, expected))


def _chain_preconditions(spec: NetworkSpec, tol: ToleranceConfig) -> list[str]:
    N, n = spec.N, spec.n
    problems = []
    if not _is_chain(spec.W):
        problems.append("topology is not the directed chain 1 -> 2 -> ... -> N")
    zero = tol.zero_vec_tol
    e_n = np.zeros((n, 1))
    e_n[-1, 0] = 1.0
    for i, node in enumerate(spec.nodes):
        A = node.A
        sup = np.diag(A, 1)
        rest = A - np.diag(sup, 1)
        if np.any(np.abs(rest) > zero) or np.any(np.abs(sup) <= zero):
            problems.append(f"A_{i + 1} is not strictly superdiagonal with nonzero entries a_{i + 1},k")
        HC = spec.H @ node.C
        off = HC.copy()
        off[n - 1, 0] = 0.0
        if np.any(np.abs(off) > zero):
            problems.append(f"H C_{i + 1} has nonzero entries outside position (n, 1)")
        elif i < N - 1 and abs(HC[n - 1, 0]) <= zero:
            problems.append(f"h_{i + 1},1 is zero, so node {i + 1} does not feed its successor")
    if spec.p != 1 or not np.allclose(spec.nodes[0].B, e_n, rtol=0, atol=zero):
        problems.append("B_1 is not e_n")
    return problems


def check_chain_corollary1(spec: NetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Chain rule: on the shift-structured chain the network is controllable iff the root is driven."""
    name = "corollary1"
    problems = _chain_preconditions(spec, tol)
    if problems:
        return ControllabilityReport(Verdict.NOT_APPLICABLE, name, notes=tuple(problems))
    notes = []
    others = [k for k in spec.driven if k != 0]
    if others:
        notes.append(
            f"extra drivers at {_nodes(others)} do not change the verdict; "
            "controllability depends on delta_1 alone"
        )
    if spec.delta[0] == 1:
        return ControllabilityReport(Verdict.CONTROLLABLE, name, notes=tuple(notes) + ("root node 1 is driven",))
    return ControllabilityReport(
        Verdict.UNCONTROLLABLE,
        name,
        notes=tuple(notes) + ("root node 1 is not driven",),
        failed_condition=1,
        nodes=(0,),
    )


# ---------------------------------------------------------------------------
# source nodes
# ---------------------------------------------------------------------------

def _lift_block_vector(spec: NetworkSpec, rows: list[int], v: np.ndarray) -> np.ndarray:
    n = spec.n
    alpha = np.zeros(spec.N * n, dtype=complex)
    for r, j in enumerate(rows):
        alpha[j * n:(j + 1) * n] = v[r * n:(r + 1) * n]
    return _normalize_phase(alpha)


def check_source_corollary2(spec: NetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Necessary conditions attached to nodes without incoming edges.

    The reduced equations are solved with ``alpha_k = 0`` kept as an unknown
    block that must vanish, i.e. the full column constraint of node ``k`` is
    retained. Only points where the lifted pair loses rank can carry a
    nontrivial solution, so the uncontrollable spectrum is the test set.
    """
    require_valid(spec)
    name = "corollary2"
    srcs = [k for k in range(spec.N) if not np.any(spec.W[k] != 0)]
    if not srcs:
        return ControllabilityReport(Verdict.NOT_APPLICABLE, name, notes=("no node without incoming edges",))
    lifted = None
    points: list[complex] | None = None
    for k in srcs:
        node = spec.nodes[k]
        ok, wits = pbh_controllable(node.A, node.B, tol)
        if not ok:
            return ControllabilityReport(
                Verdict.NECESSARY_FAILED, name,
                notes=(f"(A_{k + 1}, B_{k + 1}) is not controllable (source node {k + 1})",),
                failed_condition=1, nodes=(k,),
            )
        if spec.delta[k] == 0:
            return ControllabilityReport(
                Verdict.NECESSARY_FAILED, name,
                notes=(f"source node {k + 1} is not under control",),
                failed_condition=2, nodes=(k,),
            )
        if points is None:
            lifted = build_lifted(spec)
            points = [w.s0 for w in pbh_analysis(lifted.Phi, lifted.Psi, tol).witnesses]
        keep = [j for j in range(spec.N) if j != k]
        for s0 in points:
            M = block_equations(spec, s0, keep=keep)
            basis = left_nullspace(M, tol)
            if basis.shape[0]:
                alpha = _lift_block_vector(spec, keep, basis[0])
                return ControllabilityReport(
                    Verdict.NECESSARY_FAILED, name,
                    witness=PBHWitness(complex(s0), alpha, basis.shape[0]),
                    notes=(f"reduced equations without source node {k + 1} have a nontrivial solution at s = {_fmt(s0)}",),
                    failed_condition=3, nodes=(k,),
                )
    return ControllabilityReport(
        Verdict.NECESSARY_PASSED, name,
        notes=(f"source {_nodes(srcs)}: driven, locally controllable, reduced equations trivial",),
        nodes=tuple(srcs),
    )


# ---------------------------------------------------------------------------
# row rank of undriven node rows
# ---------------------------------------------------------------------------

def node_row_block(spec: NetworkSpec, i: int, s: complex) -> np.ndarray:
    """Block row ``[-w_i1 H C_1, ..., s I - A_i, ..., -w_iN H C_N]`` of ``s I - Phi``."""
    n = spec.n
    real = complex(s).imag == 0
    R = np.zeros((n, spec.N * n), dtype=float if real else complex)
    for j, node in enumerate(spec.nodes):
        cols = slice(j * n, (j + 1) * n)
        if j == i:
            R[:, cols] = (complex(s).real if real else s) * np.eye(n) - spec.nodes[i].A
        elif spec.W[i, j] != 0:
            R[:, cols] = -spec.W[i, j] * (spec.H @ node.C)
    return R


def check_rowrank_theorem2(spec: NetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Every undriven node's block row of ``s I - Phi`` must keep full row rank.

    Off the spectrum of ``A_i`` the diagonal block alone has rank ``n``, so only
    eigenvalues of ``A_i`` are tested.
    """
    require_valid(spec)
    name = "theorem2"
    undriven = [i for i in range(spec.N) if spec.delta[i] == 0]
    if not undriven:
        return ControllabilityReport(Verdict.NOT_APPLICABLE, name, notes=("every node is driven",))
    n = spec.n
    for i in undriven:
        for s0, _ in clustered_spectrum(spec.nodes[i].A, tol):
            R = node_row_block(spec, i, s0)
            res = rank_of(R, tol)
            if res.rank < n:
                v = left_nullspace(R, tol)[0]
                alpha = np.zeros(spec.N * n, dtype=complex)
                alpha[i * n:(i + 1) * n] = v
                return ControllabilityReport(
                    Verdict.NECESSARY_FAILED, name,
                    witness=PBHWitness(complex(s0), _normalize_phase(alpha), n - res.rank),
                    notes=(f"row block of undriven node {i + 1} has rank {res.rank} < {n} at s = {_fmt(s0)}",),
                    nodes=(i,),
                )
    return ControllabilityReport(
        Verdict.NECESSARY_PASSED, name,
        notes=(f"full row rank for undriven {_nodes(undriven)}",),
    )


# ---------------------------------------------------------------------------
# observability under similar dynamics
# ---------------------------------------------------------------------------

def _proportional(Cs: list[np.ndarray], tol: ToleranceConfig) -> bool:
    flat = [c.ravel() for c in Cs]
    norms = [np.linalg.norm(f) for f in flat]
    if min(norms) <= tol.zero_vec_tol:
        return False
    ref = flat[0] / norms[0]
    for f, nrm in zip(flat[1:], norms[1:]):
        cos = float(np.dot(ref, f / nrm))
        if abs(abs(cos) - 1.0) > np.sqrt(tol.zero_vec_tol):
            return False
    return True


def check_observability_theorem3(spec: NetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Observability necessity for similar node dynamics with proportional outputs.

    The rank argument behind this necessity needs every node to be
    unobservable at one common eigenvalue; an unobservable node whose mode is
    not shared by all others does not by itself cost lifted rank. The checker
    therefore fails only when a common unobservable eigenvalue exists and
    otherwise declines to conclude.
    """
    require_valid(spec)
    name = "theorem3"
    N = spec.N
    unmet = []
    input_rank = sum(rank_of(spec.nodes[i].B, tol).rank for i in spec.driven)
    if not N > input_rank:
        unmet.append(f"N = {N} does not exceed the total driven input rank {input_rank}")
    if not all(similar(spec.nodes[0].A, node.A, tol) for node in spec.nodes[1:]):
        unmet.append("node state matrices are not all similar")
    Cs = [node.C for node in spec.nodes]
    if any(np.linalg.norm(C) <= tol.zero_vec_tol for C in Cs):
        unmet.append("some C_i is zero, so no nonzero k_i can equalize the outputs")
    elif not _proportional(Cs, tol):
        unmet.append("output matrices C_i are not pairwise proportional")
    if unmet:
        return ControllabilityReport(Verdict.NOT_APPLICABLE, name, notes=tuple(unmet))

    modes = [unobservable_modes(node.A, node.C, tol) for node in spec.nodes]
    bad = [i for i, ms in enumerate(modes) if ms]
    if not bad:
        return ControllabilityReport(Verdict.NECESSARY_PASSED, name, notes=("every (A_i, C_i) is observable",))

    if all(modes):
        values = np.concatenate([np.asarray(ms, dtype=complex) for ms in modes])
        owners = np.concatenate([[i] * len(ms) for i, ms in enumerate(modes)])
        scale = max(float(np.linalg.norm(node.A, 2)) for node in spec.nodes)
        for group in cluster_values(values, scale, tol, owners=owners):
            if set(owners[group]) == set(range(N)):
                s0 = complex(values[group].mean())
                lifted = build_lifted(spec)
                dim, basis = pbh_rank_at(lifted.Phi, lifted.Psi, s0, tol)
                wit = PBHWitness(s0, _normalize_phase(basis[0]), dim) if dim else None
                return ControllabilityReport(
                    Verdict.NECESSARY_FAILED, name, witness=wit,
                    notes=(f"(A_{bad[0] + 1}, C_{bad[0] + 1}) is unobservable; "
                           f"every node shares the unobservable mode s = {_fmt(s0)}",),
                    nodes=(bad[0],),
                )
    return ControllabilityReport(
        Verdict.NOT_APPLICABLE, name,
        notes=(f"{_nodes(bad)} unobservable but no unobservable mode is common to all nodes; "
               "the rank bound does not follow",),
        nodes=tuple(bad),
    )


# ---------------------------------------------------------------------------
# topology necessity
# ---------------------------------------------------------------------------

def _acyclic(W: np.ndarray) -> bool:
    pattern = (W != 0).astype(int)
    indeg = pattern.sum(axis=1)
    ready = [k for k in range(W.shape[0]) if indeg[k] == 0]
    seen = 0
    while ready:
        j = ready.pop()
        seen += 1
        for i in np.flatnonzero(pattern[:, j]):
            indeg[i] -= 1
            if indeg[i] == 0:
                ready.append(int(i))
    return seen == W.shape[0]


def _spectrum_points(W: np.ndarray, tol: ToleranceConfig) -> list[complex]:
    # an acyclic weight pattern makes W nilpotent, so its spectrum is exactly {0}
    if _acyclic(W):
        return [0j]
    return [mean for mean, _ in clustered_spectrum(W, tol)]


def check_topology_necessity_theorem4(spec: NetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Topology necessity when all ``A_i + s0 H C_i`` coincide on the spectrum of ``W``."""
    require_valid(spec)
    name = "theorem4"
    HC = [spec.H @ node.C for node in spec.nodes]
    scale = max(1.0, max(float(np.abs(node.A).max(initial=0)) for node in spec.nodes))
    for s0 in _spectrum_points(spec.W, tol):
        ref = spec.nodes[0].A + s0 * HC[0]
        for i in range(1, spec.N):
            diff = np.abs(spec.nodes[i].A + s0 * HC[i] - ref).max(initial=0)
            if diff > tol.zero_vec_tol * scale * max(1.0, abs(s0)):
                return ControllabilityReport(
                    Verdict.NOT_APPLICABLE, name,
                    notes=(f"A_{i + 1} + s0 H C_{i + 1} differs from A_1 + s0 H C_1 at s0 = {_fmt(s0)}",),
                )
    ok, wits = pbh_controllable(spec.W, spec.Delta, tol)
    if ok:
        return ControllabilityReport(Verdict.NECESSARY_PASSED, name, notes=("(W, Delta) is controllable",))
    return ControllabilityReport(
        Verdict.UNCONTROLLABLE, name, witness=wits[0],
        notes=(f"matching condition holds and (W, Delta) loses rank at s0 = {_fmt(wits[0].s0)}",),
    )


GENERAL_CHECKS = {
    "theorem1": check_theorem1,
    "topology": check_topology,
    "corollary1": check_chain_corollary1,
    "corollary2": check_source_corollary2,
    "theorem2": check_rowrank_theorem2,
    "theorem3": check_observability_theorem3,
    "theorem4": check_topology_necessity_theorem4,
}
