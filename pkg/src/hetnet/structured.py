"""Companion-form nodes under state feedback with scalar coupling.

After the feedback ``u_i = a_i^T x_i + delta_i u_oi`` every node evolves with
the upper shift matrix ``S`` (ones on the superdiagonal) and input ``e_n``, so
the lifted pair is ``Phi = I_N (x) S + W (x) H C`` and ``Psi = Delta (x) e_n``.
All finite reductions below lean on ``S`` being nilpotent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analyzers import ControllabilityReport, Verdict, _fmt
from .model import (
    DEFAULT_TOL,
    InvalidSpecError,
    LiftedSystem,
    NetworkSpec,
    NodeSystem,
    ToleranceConfig,
    Violation,
    _frozen,
)
from .numerics import (
    EPS,
    SPREAD_SLACK,
    PBHWitness,
    _normalize_phase,
    cluster_values,
    eigen_left,
    left_nullspace,
    observable,
    pbh_controllable,
    rank_of,
)


def shift_matrix(n: int) -> np.ndarray:
    return np.eye(n, k=1)


def unit_input(n: int) -> np.ndarray:
    e = np.zeros((n, 1))
    e[-1, 0] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class CompanionNode:
    """Node in controllable canonical form; ``a = [a_0, ..., a_{n-1}]``."""

    a: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen(np.ravel(self.a)))

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def A(self) -> np.ndarray:
        A = shift_matrix(self.n)
        A[-1, :] = -self.a
        return A

    @property
    def B(self) -> np.ndarray:
        return unit_input(self.n)

    def closed_loop(self) -> np.ndarray:
        return self.A + self.B @ self.a.reshape(1, -1)

    def __eq__(self, other):
        if not isinstance(other, CompanionNode):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.a, other.a)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class StructuredNetworkSpec:
    nodes: tuple[CompanionNode, ...]
    W: np.ndarray
    H: np.ndarray
    C: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "W", _frozen(self.W))
        object.__setattr__(self, "H", _frozen(np.reshape(self.H, (-1, 1))))
        object.__setattr__(self, "C", _frozen(np.reshape(self.C, (1, -1))))
        object.__setattr__(self, "delta", _frozen(self.delta, dtype=int))

    @property
    def N(self) -> int:
        return len(self.nodes)

    @property
    def n(self) -> int:
        return self.nodes[0].n

    @property
    def Delta(self) -> np.ndarray:
        return np.diag(self.delta.astype(float))

    @property
    def driven(self) -> list[int]:
        return [i for i in range(self.N) if self.delta[i] == 1]

    def with_delta(self, delta) -> "StructuredNetworkSpec":
        return StructuredNetworkSpec(self.nodes, self.W, self.H, self.C, np.asarray(delta, dtype=int))

    def __eq__(self, other):
        if not isinstance(other, StructuredNetworkSpec):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and np.array_equal(self.W, other.W)
            and np.array_equal(self.H, other.H)
            and np.array_equal(self.C, other.C)
            and np.array_equal(self.delta, other.delta)
        )

    __hash__ = None


def validate_structured(spec: StructuredNetworkSpec) -> list[Violation]:
    out: list[Violation] = []
    N = spec.N
    if N == 0:
        return [Violation("nodes", "network must contain at least one node")]
    n = spec.n
    if n < 1:
        out.append(Violation("nodes[1].a", "companion coefficients must be nonempty"))
    for k, node in enumerate(spec.nodes):
        if node.n != n:
            out.append(Violation(f"nodes[{k + 1}].a", f"dimension mismatch: expected length {n}, got {node.n}"))
        if not np.all(np.isfinite(node.a)):
            out.append(Violation(f"nodes[{k + 1}].a", "entries must be finite"))
    if spec.W.shape != (N, N):
        out.append(Violation("W", f"dimension mismatch: expected shape ({N}, {N}), got {spec.W.shape}"))
    else:
        for k in np.flatnonzero(np.diag(spec.W)):
            out.append(Violation("W", f"self-loop at node {k + 1} (diagonal entry must be zero)"))
        if not np.all(np.isfinite(spec.W)):
            out.append(Violation("W", "entries must be finite"))
    if spec.H.shape != (n, 1):
        out.append(Violation("H", f"dimension mismatch: expected shape ({n}, 1), got {spec.H.shape}"))
    if spec.C.shape != (1, n):
        out.append(Violation("C", f"dimension mismatch: expected shape (1, {n}), got {spec.C.shape}"))
    for name in ("H", "C"):
        if not np.all(np.isfinite(getattr(spec, name))):
            out.append(Violation(name, "entries must be finite"))
    if spec.delta.shape != (N,):
        out.append(Violation("delta", f"dimension mismatch: expected length {N}, got shape {spec.delta.shape}"))
    elif not np.all(np.isin(spec.delta, (0, 1))):
        out.append(Violation("delta", "entries must be 0 or 1"))
    return out


def _require(spec: StructuredNetworkSpec) -> None:
    violations = validate_structured(spec)
    if violations:
        raise InvalidSpecError(violations)


def build_structured_lifted(spec: StructuredNetworkSpec) -> LiftedSystem:
    _require(spec)
    N, n = spec.N, spec.n
    Phi = np.kron(np.eye(N), shift_matrix(n)) + np.kron(spec.W, spec.H @ spec.C)
    Psi = np.kron(spec.Delta, unit_input(n))
    return LiftedSystem(_frozen(Phi), _frozen(Psi), (N, n, 1))


def as_network_spec(spec: StructuredNetworkSpec) -> NetworkSpec:
    """General spec of the closed-loop network (every node becomes ``(S, e_n, C)``)."""
    _require(spec)
    S, b = shift_matrix(spec.n), unit_input(spec.n)
    nodes = tuple(NodeSystem(S, b, spec.C, label=node.label) for node in spec.nodes)
    return NetworkSpec(nodes=nodes, W=spec.W, H=spec.H, delta=spec.delta)


def make_structured(a_list, W, H, C, delta, labels=None) -> StructuredNetworkSpec:
    if labels is None:
        labels = [str(k + 1) for k in range(len(a_list))]
    nodes = tuple(CompanionNode(a, label=lab) for a, lab in zip(a_list, labels))
    return StructuredNetworkSpec(nodes, W, H, C, np.asarray(delta, dtype=int))


# ---------------------------------------------------------------------------
# transfer polynomials of the shift structure
# ---------------------------------------------------------------------------

def gamma_numerator(H: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Coefficients (highest power first) of ``q(s) = s^n C (sI - S)^{-1} H``.

    ``(sI - S)^{-1} = sum_k S^k / s^{k+1}`` and ``C S^k H = sum_j C_j H_{j+k}``.
    """
    h = np.ravel(H)
    c = np.ravel(C)
    n = h.size
    return np.array([float(np.dot(c[: n - k], h[k:])) for k in range(n)])


def eta_numerator(C: np.ndarray) -> np.ndarray:
    """Coefficients (highest power first) of ``r(s) = s^n C (sI - S)^{-1} e_n``, i.e. ``C_n, ..., C_1``."""
    return np.ravel(C)[::-1].astype(float)


def _polyval(coeffs: np.ndarray, s: complex) -> complex:
    return complex(np.polyval(coeffs, s))


def _roots(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if coeffs.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(coeffs)


# ---------------------------------------------------------------------------
# condition (iii): the alpha spaces at eigenvalues of the shift matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaSpace:
    """Per-node row bases at an eigenvalue ``s`` of the closed-loop node matrix.

    Undriven nodes get the left eigenspace, driven nodes its intersection with
    the left annihilator of ``B``.
    """

    s: complex
    bases: tuple[np.ndarray, ...] = field(default=())

    @property
    def dimension(self) -> int:
        return sum(b.shape[0] for b in self.bases)


def alpha_space(spec: StructuredNetworkSpec, s: complex, left_vectors: np.ndarray, tol: ToleranceConfig) -> AlphaSpace:
    b = unit_input(spec.n)
    annihilating = left_vectors
    coeff = left_nullspace(left_vectors @ b, tol)
    annihilating = coeff @ left_vectors
    bases = tuple(annihilating if spec.delta[i] == 1 else left_vectors for i in range(spec.N))
    return AlphaSpace(complex(s), bases)


def coupling_kernel(spec: StructuredNetworkSpec, space: AlphaSpace, tol: ToleranceConfig) -> np.ndarray:
    """Coordinates of nonzero ``rho`` in ``space`` with ``sum_j w_ji rho_j = 0`` for every ``i``.

    Returns a basis of the kernel in stacked block form (rows of length ``N n``).
    """
    N, n = spec.N, spec.n
    dims = [b.shape[0] for b in space.bases]
    d = sum(dims)
    if d == 0:
        return np.zeros((0, N * n))
    dtype = complex if any(np.iscomplexobj(b) for b in space.bases) else float
    G = np.zeros((d, N * n), dtype=dtype)
    expand = np.zeros((d, N * n), dtype=dtype)
    row = 0
    for j, basis in enumerate(space.bases):
        for v in basis:
            for i in range(N):
                if spec.W[j, i] != 0:
                    G[row, i * n:(i + 1) * n] = spec.W[j, i] * v
            expand[row, j * n:(j + 1) * n] = v
            row += 1
    coords = left_nullspace(G, tol)
    return coords @ expand


def _shift_spectrum(n: int, tol: ToleranceConfig):
    return eigen_left(shift_matrix(n), tol)


# ---------------------------------------------------------------------------
# condition (iv): finite reduction over roots of s^n - lambda q(s)
# ---------------------------------------------------------------------------

def _near(a: complex, b: complex, scale: float) -> bool:
    # two roots computed from short polynomials agree up to a double-root perturbation
    return abs(a - b) <= max(1.0, scale) * np.sqrt(SPREAD_SLACK * EPS)


@dataclass(frozen=True)
class ReductionPoint:
    lam: complex
    s: complex
    eta_zero: bool
    deficiency: int
    xi: np.ndarray | None


def reduction_points(spec: StructuredNetworkSpec, tol: ToleranceConfig) -> list[ReductionPoint]:
    """Every ``s`` outside ``{0}`` where ``rank [I - gamma(s) W, Delta eta(s)]`` could drop.

    ``gamma(s) = q(s)/s^n`` so ``I - gamma W`` is singular only when
    ``1/gamma(s)`` is an eigenvalue ``lambda`` of ``W``, i.e. ``s`` is a
    nonzero root of ``s^n - lambda q(s)``. At such a root ``gamma`` equals
    ``1/lambda`` exactly, and ``eta(s)`` vanishes exactly when ``s`` is also a
    root of ``r``.
    """
    N, n = spec.N, spec.n
    q = gamma_numerator(spec.H, spec.C)
    r = eta_numerator(spec.C)
    r_roots = _roots(r)
    out = []
    for cluster in eigen_left(spec.W, tol):
        lam = cluster.value
        if abs(lam) <= tol.eig_dedup_radius:
            continue
        poly = np.zeros(n + 1, dtype=complex)
        poly[0] = 1.0
        poly[1:] -= lam * q
        for s in _roots(poly):
            if abs(s) <= tol.eig_dedup_radius:
                continue
            scale = max(abs(s), 1.0)
            eta_zero = any(_near(s, rho, scale) for rho in r_roots)
            eta = 0.0 if eta_zero else _polyval(r, s) / s**n
            M = np.hstack([np.eye(N) - spec.W / lam, spec.Delta * eta])
            res = rank_of(M, tol)
            xi = None
            if res.rank < N:
                xi = left_nullspace(M, tol)[0]
            out.append(ReductionPoint(complex(lam), complex(s), eta_zero, N - res.rank, xi))
    return out


def _lift_xi(spec: StructuredNetworkSpec, s: complex, xi: np.ndarray) -> np.ndarray:
    n = spec.n
    row = spec.C.astype(complex) @ np.linalg.inv(s * np.eye(n) - shift_matrix(n))
    return _normalize_phase(np.kron(xi, row.ravel()))


# ---------------------------------------------------------------------------
# checkers
# ---------------------------------------------------------------------------

_COLLAPSE = "A_i + B_i a_i^T is the same shift matrix for every node; node-indexed conditions are evaluated once"


def _condition_iii(spec: StructuredNetworkSpec, tol: ToleranceConfig):
    """``None`` when the condition holds, else ``(s, rho)``."""
    for cluster in _shift_spectrum(spec.n, tol):
        space = alpha_space(spec, cluster.value, cluster.vectors, tol)
        kernel = coupling_kernel(spec, space, tol)
        if kernel.shape[0]:
            return cluster.value, _normalize_phase(kernel[0])
    return None


def _condition_iv(spec: StructuredNetworkSpec, tol: ToleranceConfig):
    for pt in reduction_points(spec, tol):
        if pt.deficiency:
            return pt
    return None


def check_theorem5(spec: StructuredNetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    _require(spec)
    name = "theorem5"
    N, n = spec.N, spec.n
    if len(spec.driven) >= N:
        return ControllabilityReport(Verdict.NOT_APPLICABLE, name, notes=("every node is driven; at least one undriven node is required",))
    S = shift_matrix(n)
    if not pbh_controllable(S, spec.H, tol)[0]:
        return ControllabilityReport(Verdict.UNCONTROLLABLE, name, failed_condition=1,
                                     notes=("(A, H) is not controllable", _COLLAPSE))
    if not observable(S, spec.C, tol):
        return ControllabilityReport(Verdict.UNCONTROLLABLE, name, failed_condition=2,
                                     notes=("(A, C) is not observable", _COLLAPSE))
    hit = _condition_iii(spec, tol)
    if hit is not None:
        s, rho = hit
        nodes = tuple(int(i) for i in np.flatnonzero(np.linalg.norm(rho.reshape(N, n), axis=1) > tol.zero_vec_tol))
        return ControllabilityReport(
            Verdict.UNCONTROLLABLE, name, failed_condition=3,
            witness=PBHWitness(s, rho, 1), nodes=nodes,
            notes=(f"nonzero rho in alpha({_fmt(s)}) with W^T rho^T = 0", _COLLAPSE),
        )
    pt = _condition_iv(spec, tol)
    if pt is not None:
        why = "eta(s) = 0" if pt.eta_zero else "(W, Delta) loses rank at lambda"
        return ControllabilityReport(
            Verdict.UNCONTROLLABLE, name, failed_condition=4,
            witness=PBHWitness(pt.s, _lift_xi(spec, pt.s, pt.xi), pt.deficiency),
            notes=(f"rank [I - gamma W, Delta eta] < N at s = {_fmt(pt.s)} (lambda = {_fmt(pt.lam)}, {why})", _COLLAPSE),
        )
    return ControllabilityReport(Verdict.CONTROLLABLE, name, notes=("conditions (i)-(iv) hold", _COLLAPSE))


def _in_kappa(H: np.ndarray, tol: ToleranceConfig) -> bool:
    h = np.ravel(H)
    return bool(np.all(np.abs(h[:-1]) <= tol.zero_vec_tol) and abs(h[-1]) > tol.zero_vec_tol)


def _in_tau(C: np.ndarray, tol: ToleranceConfig) -> bool:
    c = np.ravel(C)
    return bool(np.all(np.abs(c[1:]) <= tol.zero_vec_tol) and abs(c[0]) > tol.zero_vec_tol)


def check_corollary3(spec: StructuredNetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Structured sufficiency: ``H = kappa_n e_n``, ``C = tau_1 e_1^T`` plus the zero / nonzero ``s`` tests.

    With those ``H`` and ``C`` the first two conditions of the four-condition
    test hold automatically and the remaining two coincide with this rule's
    second and third conditions, so failures here are genuine.
    """
    _require(spec)
    name = "corollary3"
    if len(spec.driven) >= spec.N:
        return ControllabilityReport(Verdict.NOT_APPLICABLE, name, notes=("every node is driven; at least one undriven node is required",))
    unmet = []
    if not _in_kappa(spec.H, tol):
        unmet.append("H is not a nonzero multiple of e_n")
    if not _in_tau(spec.C, tol):
        unmet.append("C is not a nonzero multiple of e_1^T")
    if unmet:
        return ControllabilityReport(Verdict.NOT_APPLICABLE, name, notes=tuple(unmet) + ("inconclusive: structural condition (i) fails",))
    hit = _condition_iii(spec, tol)
    if hit is not None:
        s, rho = hit
        return ControllabilityReport(Verdict.UNCONTROLLABLE, name, failed_condition=2, witness=PBHWitness(s, rho, 1),
                                     notes=("nonzero rho in alpha(0) with W^T rho^T = 0",))
    pt = _condition_iv(spec, tol)
    if pt is not None:
        return ControllabilityReport(
            Verdict.UNCONTROLLABLE, name, failed_condition=3,
            witness=PBHWitness(pt.s, _lift_xi(spec, pt.s, pt.xi), pt.deficiency),
            notes=(f"rank [I - gamma W, Delta eta] < N at s = {_fmt(pt.s)}",),
        )
    return ControllabilityReport(Verdict.CONTROLLABLE, name, notes=("conditions (i)-(iii) hold",))


def diagonalizable(W: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Every clustered eigenvalue has as many left eigenvectors as members."""
    return all(c.geometric_multiplicity == c.algebraic_multiplicity for c in eigen_left(W, tol))


def check_diagonalizable(spec: StructuredNetworkSpec, tol: ToleranceConfig = DEFAULT_TOL) -> ControllabilityReport:
    """Criterion for diagonalizable ``W``.

    For each eigenvalue ``lambda`` of ``W`` the node matrix is
    ``M(lambda) = S + lambda H C``. Condition (iii) collects, for each common
    eigenvalue ``theta`` of several copies ``M(lambda_k)``, the vectors
    ``(t_k Delta) (x) (xi B)`` and requires them independent.
    """
    _require(spec)
    name = "diagonalizable"
    N, n = spec.N, spec.n
    clusters = eigen_left(spec.W, tol)
    if not all(c.geometric_multiplicity == c.algebraic_multiplicity for c in clusters):
        return ControllabilityReport(Verdict.NOT_APPLICABLE, name, notes=("W is not diagonalizable within tolerance",))
    ok, wits = pbh_controllable(spec.W, spec.Delta, tol)
    if not ok:
        return ControllabilityReport(Verdict.UNCONTROLLABLE, name, failed_condition=1, witness=wits[0],
                                     notes=(f"(W, Delta) loses rank at {_fmt(wits[0].s0)}",))
    S, b, HC = shift_matrix(n), unit_input(n), spec.H @ spec.C
    copies = []  # (lambda, t, eigen clusters of M(lambda))
    for c in clusters:
        M = S + c.value * HC
        good, mw = pbh_controllable(M, b, tol)
        if not good:
            return ControllabilityReport(Verdict.UNCONTROLLABLE, name, failed_condition=2,
                                         notes=(f"(A + lambda H C, B) uncontrollable for lambda = {_fmt(c.value)} at {_fmt(mw[0].s0)}",))
        spectrum = eigen_left(M, tol)
        for t in c.vectors:
            copies.append((c.value, t, spectrum))

    thetas, owners, sizes = [], [], []
    for k, (_, _, spectrum) in enumerate(copies):
        for j, ec in enumerate(spectrum):
            thetas.append(ec.value)
            owners.append((k, j))
            sizes.append(ec.algebraic_multiplicity)
    if not thetas:
        return ControllabilityReport(Verdict.CONTROLLABLE, name, notes=("conditions (i)-(iii) hold",))
    scale = max(1.0, float(np.linalg.norm(S, 2) + max(abs(c.value) for c in clusters) * np.linalg.norm(HC, 2)))
    delta = spec.Delta
    for group in cluster_values(np.array(thetas), scale, tol, sizes=sizes, owners=[k for k, _ in owners]):
        members = [owners[g] for g in group]
        if len({k for k, _ in members}) < 2:
            continue
        vecs = []
        for k, j in members:
            _, t, spectrum = copies[k]
            for xi in spectrum[j].vectors:
                vecs.append((t @ delta) * complex(xi @ b[:, 0]))
        stacked = np.array(vecs)
        res = rank_of(stacked, tol)
        if res.rank < len(vecs):
            theta = complex(np.mean([thetas[g] for g in group]))
            return ControllabilityReport(
                Verdict.UNCONTROLLABLE, name, failed_condition=3,
                notes=(f"{len(vecs)} vectors (t Delta) (x) (xi B) at common eigenvalue theta = {_fmt(theta)} have rank {res.rank}",),
            )
    return ControllabilityReport(Verdict.CONTROLLABLE, name, notes=("conditions (i)-(iii) hold",))


STRUCTURED_CHECKS = {
    "theorem5": check_theorem5,
    "corollary3": check_corollary3,
    "diagonalizable": check_diagonalizable,
}
