"""Random spec families shared by the acceptance and unit tests.

All entries are small integers so the exact oracles apply.
"""

from __future__ import annotations

import numpy as np

from hetnet.model import NetworkSpec, make_spec
from hetnet.structured import StructuredNetworkSpec, diagonalizable, make_structured


def sparse_int(rng: np.random.Generator, shape, density: float = 0.5, lo: int = -2, hi: int = 2) -> np.ndarray:
    vals = rng.integers(lo, hi + 1, shape).astype(float)
    return vals * (rng.random(shape) < density)


def random_weights(rng: np.random.Generator, N: int, density: float = 0.5) -> np.ndarray:
    W = sparse_int(rng, (N, N), density)
    np.fill_diagonal(W, 0.0)
    return W


def random_general_spec(rng: np.random.Generator, N_max: int = 5, n_max: int = 3,
                        homo_prob: float = 0.3, drive_prob: float = 0.5) -> NetworkSpec:
    N = int(rng.integers(1, N_max + 1))
    n = int(rng.integers(1, n_max + 1))
    p = int(rng.integers(1, 3))
    m = int(rng.integers(1, 3))
    As = [sparse_int(rng, (n, n)) for _ in range(N)]
    Bs = [sparse_int(rng, (n, p), 0.7) for _ in range(N)]
    Cs = [sparse_int(rng, (m, n), 0.7) for _ in range(N)]
    if rng.random() < homo_prob:
        As, Bs, Cs = [As[0]] * N, [Bs[0]] * N, [Cs[0]] * N
    W = random_weights(rng, N)
    H = sparse_int(rng, (n, m), 0.7)
    delta = (rng.random(N) < drive_prob).astype(int)
    return make_spec(As, Bs, Cs, W, H, delta)


def _structured_vectors(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    H = sparse_int(rng, n, 0.6, -1, 1)
    C = sparse_int(rng, n, 0.6, -1, 1)
    # the special shapes exercise the structured sufficiency conditions
    if rng.random() < 0.3:
        H = np.zeros(n)
        H[-1] = rng.choice([1.0, 2.0, -1.0])
    if rng.random() < 0.3:
        C = np.zeros(n)
        C[0] = rng.choice([1.0, 2.0, -1.0])
    return H, C


def _partial_delta(rng: np.random.Generator, N: int, prob: float) -> np.ndarray:
    d = (rng.random(N) < prob).astype(int)
    if d.sum() == N:
        d[rng.integers(N)] = 0
    return d


def random_structured_spec(rng: np.random.Generator, N_max: int = 5, n_max: int = 4,
                           drive_prob: float = 0.7) -> StructuredNetworkSpec:
    """Companion-node network with at least one undriven node."""
    N = int(rng.integers(1, N_max + 1))
    n = int(rng.integers(1, n_max + 1))
    W = random_weights(rng, N)
    H, C = _structured_vectors(rng, n)
    a = [rng.integers(-2, 3, n) for _ in range(N)]
    return make_structured(a, W, H, C, _partial_delta(rng, N, drive_prob))


def random_diagonalizable_W(rng: np.random.Generator, N: int) -> np.ndarray:
    kind = rng.integers(3)
    if kind == 0:
        # symmetric with zero diagonal
        U = np.triu(sparse_int(rng, (N, N), 0.6), 1)
        return U + U.T
    while True:
        W = random_weights(rng, N, 0.6)
        if kind == 1 and N > 1:
            # ring-like cycle plus chords: usually distinct eigenvalues
            for k in range(N):
                W[(k + 1) % N, k] = W[(k + 1) % N, k] or 1.0
        if diagonalizable(W):
            return W


def random_diagonalizable_spec(rng: np.random.Generator, N_max: int = 5, n_max: int = 4) -> StructuredNetworkSpec:
    N = int(rng.integers(1, N_max + 1))
    n = int(rng.integers(1, n_max + 1))
    W = random_diagonalizable_W(rng, N)
    H, C = _structured_vectors(rng, n)
    a = [rng.integers(-2, 3, n) for _ in range(N)]
    return make_structured(a, W, H, C, _partial_delta(rng, N, 0.7))


def random_chain_corollary_spec(rng: np.random.Generator, N_max: int = 5, n_max: int = 4) -> NetworkSpec:
    """Shift-structured directed chain meeting every precondition of the chain rule.

    At most one node is driven, so the rule reads "controllable iff delta = e_1".
    """
    N = int(rng.integers(2, N_max + 1))
    n = int(rng.integers(1, n_max + 1))
    W = np.zeros((N, N))
    for k in range(N - 1):
        W[k + 1, k] = rng.choice([-2.0, -1.0, 1.0, 2.0])
    nonzero = lambda size: rng.choice([-2.0, -1.0, 1.0, 2.0], size)  # noqa: E731
    As = [np.diag(nonzero(n - 1), 1) if n > 1 else np.zeros((1, 1)) for _ in range(N)]
    e_n = np.zeros((n, 1))
    e_n[-1, 0] = 1.0
    Bs = [e_n] + [sparse_int(rng, (n, 1), 0.7) for _ in range(N - 1)]
    H = np.zeros((n, 1))
    H[-1, 0] = rng.choice([1.0, -1.0, 2.0])
    Cs = []
    for i in range(N):
        C = np.zeros((1, n))
        C[0, 0] = nonzero(1)[0] if i < N - 1 or rng.random() < 0.5 else 0.0
        Cs.append(C)
    delta = np.zeros(N, dtype=int)
    pick = 0 if rng.random() < 0.4 else int(rng.integers(-1, N))
    if pick >= 0:
        delta[pick] = 1
    return make_spec(As, Bs, Cs, W, H, delta)


def random_pair(rng: np.random.Generator, n_max: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Integer ``(A, B)``; a third are built with a decoupled block, hence uncontrollable."""
    n = int(rng.integers(1, n_max + 1))
    q = int(rng.integers(1, 3))
    A = sparse_int(rng, (n, n), 0.5)
    B = sparse_int(rng, (n, q), 0.5)
    if n > 1 and rng.random() < 0.35:
        k = int(rng.integers(1, n))
        A[k:, :k] = 0.0
        B[k:, :] = 0.0
        P = np.eye(n)
        P[rng.integers(n), rng.integers(n)] += rng.choice([-1.0, 1.0])
        if abs(np.linalg.det(P)) > 0.5:
            # unimodular-ish integer similarity keeps entries integral
            Pinv = np.round(np.linalg.inv(P))
            if np.array_equal(P @ Pinv, np.eye(n)):
                A, B = P @ A @ Pinv, P @ B
    return A, B
