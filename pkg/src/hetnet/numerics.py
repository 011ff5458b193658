"""Dense linear-algebra kernels: numerical rank, left null spaces, clustered
left eigenpairs, and the Kalman / PBH controllability tests built on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.linalg import schur
from scipy.spatial.distance import pdist

from .model import DEFAULT_TOL, ToleranceConfig

EPS = np.finfo(float).eps

#: Kalman test refuses state dimensions above this unless the caller overrides it.
KALMAN_MAX_DIM = 64


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class RankResult:
    rank: int
    singular_values: np.ndarray
    threshold_used: float


@dataclass(frozen=True)
class PBHWitness:
    """Left vector ``alpha`` with ``alpha (s0 I - A) = 0`` and ``alpha B = 0``."""

    s0: complex
    left_vector: np.ndarray
    deficiency: int

    def residuals(self, A: np.ndarray, B: np.ndarray) -> tuple[float, float]:
        n = A.shape[0]
        v = self.left_vector
        return (
            float(np.linalg.norm(v @ (self.s0 * np.eye(n) - A))),
            float(np.linalg.norm(v @ B)) if B.size else 0.0,
        )


@dataclass(frozen=True)
class EigenCluster:
    """One point of a clustered spectrum together with its left eigenvectors.

    ``value`` is the mean of the clustered eigenvalues (accurate even when the
    individual members of a defective eigenvalue are badly perturbed),
    ``members`` the raw eigenvalues, ``vectors`` an orthonormal row basis of
    ``{v : v M = value v}``.
    """

    value: complex
    members: np.ndarray
    vectors: np.ndarray

    @property
    def algebraic_multiplicity(self) -> int:
        return len(self.members)

    @property
    def geometric_multiplicity(self) -> int:
        return self.vectors.shape[0]


def _svd(M: np.ndarray, full: bool):
    try:
        return np.linalg.svd(M, full_matrices=full)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for a {M.shape[0]}x{M.shape[1]} matrix") from exc


def rank_threshold(sigma: np.ndarray, shape: tuple[int, int], tol: ToleranceConfig) -> float:
    if sigma.size == 0:
        return 0.0
    return tol.rank_factor * max(shape) * float(sigma[0]) * EPS


def rank_of(M, tol: ToleranceConfig = DEFAULT_TOL) -> RankResult:
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"rank_of expects a matrix, got array of shape {M.shape}")
    if M.size == 0:
        return RankResult(0, np.zeros(0), 0.0)
    if not np.all(np.isfinite(M)):
        raise NumericalError(f"non-finite entries in a {M.shape[0]}x{M.shape[1]} matrix")
    sigma = _svd(M, full=False)[1]
    thr = rank_threshold(sigma, M.shape, tol)
    return RankResult(int(np.sum(sigma > thr)), sigma, thr)


def _normalize_phase(v: np.ndarray) -> np.ndarray:
    """Unit norm, largest-modulus entry made real positive (first one on ties)."""
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return v
    v = v / nrm
    mags = np.abs(v)
    k = int(np.argmax(mags > mags.max() * (1 - 1e-9)))
    return v * (np.conj(v[k]) / abs(v[k]))


def left_nullspace(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal rows ``v`` spanning ``{v : v @ M = 0}``.

    Returns an array of shape ``(rows(M) - rank(M), rows(M))``.
    """
    M = np.asarray(M)
    r = M.shape[0]
    if M.shape[1] == 0:
        return np.eye(r, dtype=M.dtype if np.iscomplexobj(M) else float)
    U, sigma, _ = _svd(M, full=True)
    rank = int(np.sum(sigma > rank_threshold(sigma, M.shape, tol)))
    basis = U.conj().T[rank:, :]
    if not np.iscomplexobj(M):
        basis = basis.real
    return basis


def _smallest_left_vector(M: np.ndarray) -> np.ndarray:
    U, _, _ = _svd(M, full=True)
    return U.conj().T[-1:, :]


# ---------------------------------------------------------------------------
# eigenvalue clustering
# ---------------------------------------------------------------------------

def _spread(k: int, scale: float, tol: ToleranceConfig) -> float:
    """Radius within which ``k`` computed eigenvalues may stem from one defective eigenvalue.

    A k-fold defective eigenvalue of a matrix of norm ``scale`` splits under
    backward error ``eps * scale`` into points roughly ``scale * eps**(1/k)``
    away from it; ``SPREAD_SLACK`` absorbs moderate non-normality.
    """
    if k <= 1:
        return tol.eig_dedup_radius
    return max(tol.eig_dedup_radius, scale * (SPREAD_SLACK * EPS) ** (1.0 / k))


SPREAD_SLACK = 1e3


def cluster_values(values, scale: float, tol: ToleranceConfig = DEFAULT_TOL, sizes=None, owners=None) -> list[np.ndarray]:
    """Group eigenvalues that numerically represent one spectrum point.

    Complete-linkage clustering; a group is accepted when its diameter fits the
    perturbation radius for its size, otherwise it is split along the
    dendrogram. Returns index arrays, ordered by (real, imag) of the group mean.

    When the values are pooled from several matrices, ``owners[i]`` names the
    matrix value ``i`` came from and ``sizes[i]`` the multiplicity it stands
    for there (default 1). The radius then follows the largest multiplicity
    any single owner contributes to the group, not the pooled count.
    """
    values = np.asarray(values, dtype=complex).ravel()
    if values.size == 0:
        return []
    if values.size == 1:
        return [np.array([0])]
    scale = max(float(scale), 1.0)
    pooled = sizes is not None or owners is not None
    sizes = np.ones(values.size, dtype=int) if sizes is None else np.asarray(sizes, dtype=int).ravel()
    owners = np.arange(values.size) if owners is None else np.asarray(owners).ravel()
    pts = np.column_stack([values.real, values.imag])
    Z = linkage(pdist(pts), method="complete")
    n = len(values)
    children: dict[int, tuple[int, int]] = {}
    heights: dict[int, float] = {}
    for k, (a, b, h, _) in enumerate(Z):
        children[n + k] = (int(a), int(b))
        heights[n + k] = float(h)

    def leaves(node: int) -> list[int]:
        if node < n:
            return [node]
        a, b = children[node]
        return leaves(a) + leaves(b)

    groups: list[np.ndarray] = []
    stack = [2 * n - 2]
    while stack:
        node = stack.pop()
        if node < n:
            groups.append(np.array([node]))
            continue
        members = sorted(leaves(node))
        pts_c = values[members]
        radius = float(np.max(np.abs(pts_c - pts_c.mean())))
        if pooled:
            k = max(int(sizes[[m for m in members if owners[m] == o]].sum()) for o in set(owners[members].tolist()))
        else:
            k = len(members)
        if radius <= _spread(k, scale, tol) or heights[node] <= tol.eig_dedup_radius:
            groups.append(np.array(members))
        else:
            stack.extend(children[node])
    means = [values[g].mean() for g in groups]
    order = sorted(range(len(groups)), key=lambda k: (round(means[k].real, 12), round(means[k].imag, 12)))
    return [groups[k] for k in order]


def _matrix_scale(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def clustered_spectrum(M, tol: ToleranceConfig = DEFAULT_TOL) -> list[tuple[complex, np.ndarray]]:
    """``[(mean, members), ...]`` for the clustered eigenvalues of square ``M``."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"square matrix required, got shape {M.shape}")
    if M.shape[0] == 0:
        return []
    try:
        vals = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge for a {M.shape[0]}x{M.shape[0]} matrix") from exc
    out = []
    for g in cluster_values(vals, _matrix_scale(M), tol):
        mean = complex(vals[g].mean())
        if not np.iscomplexobj(M) and abs(mean.imag) <= tol.eig_dedup_radius:
            mean = complex(mean.real, 0.0)
        out.append((mean, vals[g]))
    return out


def eigen_left(M, tol: ToleranceConfig = DEFAULT_TOL) -> list[EigenCluster]:
    """Clustered eigenvalues of ``M`` with a left-eigenvector basis for each."""
    M = np.asarray(M)
    n = M.shape[0]
    out = []
    for mean, members in clustered_spectrum(M, tol):
        shifted = mean * np.eye(n) - M
        vecs = left_nullspace(shifted, tol)
        if vecs.shape[0] == 0:
            # an eigenvalue always has at least one left eigenvector
            vecs = _smallest_left_vector(shifted)
        if not np.iscomplexobj(vecs) and mean.imag != 0:
            vecs = vecs.astype(complex)
        out.append(EigenCluster(mean, members, vecs))
    return out


# ---------------------------------------------------------------------------
# controllability tests
# ---------------------------------------------------------------------------

def _check_pair(A, B) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A)
    B = np.asarray(B)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"B must have {A.shape[0]} rows, got shape {B.shape}")
    return A, B


def controllability_matrix(A, B) -> np.ndarray:
    A, B = _check_pair(A, B)
    n = A.shape[0]
    blocks = [B]
    for _ in range(1, n):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks) if blocks else np.zeros((n, 0))


def kalman_controllable(A, B, tol: ToleranceConfig = DEFAULT_TOL, max_dim: int | None = KALMAN_MAX_DIM):
    """Kalman rank test: ``rank [B, AB, ..., A^(n-1) B] == n``.

    ``A`` is scaled by its norm first; this only rescales column blocks of the
    controllability matrix and keeps powers from overflowing.
    """
    A, B = _check_pair(A, B)
    n = A.shape[0]
    if max_dim is not None and n > max_dim:
        raise ValueError(f"Kalman test limited to state dimension {max_dim} (got {n}); use the PBH test")
    scale = max(_matrix_scale(A), 1.0)
    res = rank_of(controllability_matrix(A / scale, B), tol)
    return res.rank == n, res


def pbh_rank_at(A, B, s: complex, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[int, np.ndarray]:
    """Deficiency ``n - rank [sI - A, B]`` and a left-null row basis at ``s``."""
    A, B = _check_pair(A, B)
    n = A.shape[0]
    s = complex(s)
    if s.imag == 0 and not (np.iscomplexobj(A) or np.iscomplexobj(B)):
        shifted = s.real * np.eye(n) - A
    else:
        shifted = s * np.eye(n) - A
    basis = left_nullspace(np.hstack([shifted, B]), tol)
    return basis.shape[0], basis


@dataclass(frozen=True)
class PBHAnalysis:
    """Outcome of the PBH test on ``(A, B)``.

    ``controllable_dim`` is the dimension of the reachable subspace; the
    witnesses cover every distinct uncontrollable eigenvalue.
    """

    controllable: bool
    controllable_dim: int
    witnesses: list[PBHWitness]
    transform: np.ndarray  # unitary Q; Q^H A Q is block upper triangular

    @property
    def total_deficiency(self) -> int:
        return sum(w.deficiency for w in self.witnesses)


#: Staircase singular values between the fine cutoff and this fraction of
#: ``norm([A, B])`` are ambiguous: amplified rounding and genuinely weak
#: coupling overlap there, so the dimension is settled exactly instead.
GRAY_ZONE = 1e-3

#: Largest state dimension for the exact modular fallback.
EXACT_MAX_DIM = 64

_PRIMES = (2_147_483_647, 2_147_483_629)


#: Entries that are dyadic rationals with at most this many fractional bits
#: (integers, halves, ..., 1/2**24) are taken as exactly specified.
DYADIC_BITS = 24


def _dyadic_integers(M: np.ndarray) -> np.ndarray:
    """Integer matrix equal to ``M`` times a power of two (floats are dyadic rationals)."""
    ratios = [float(x).as_integer_ratio() for x in M.ravel()]
    denom = max((d for _, d in ratios), default=1)
    ints = [num * (denom // d) for num, d in ratios]
    return np.array(ints, dtype=object).reshape(M.shape)


def short_dyadic(M) -> bool:
    """True when every entry is ``k / 2**j`` with ``j <= DYADIC_BITS``."""
    M = np.asarray(M)
    if np.iscomplexobj(M) or not np.all(np.isfinite(M)):
        return False
    return all(float(x).as_integer_ratio()[1] <= 1 << DYADIC_BITS for x in M.ravel())


def _modular_reach(A: np.ndarray, B: np.ndarray, prime: int) -> int:
    """Dimension of ``span{A^k B}`` over GF(prime)."""
    A = A % prime
    pivots: list[tuple[int, np.ndarray]] = []
    queue = [B[:, j] % prime for j in range(B.shape[1])]
    n = A.shape[0]
    while queue and len(pivots) < n:
        v = queue.pop(0)
        for j, b in pivots:
            if v[j]:
                v = (v - v[j] * b) % prime
        nz = np.flatnonzero(v != 0)
        if nz.size == 0:
            continue
        j = int(nz[0])
        v = (v * pow(int(v[j]), prime - 2, prime)) % prime
        pivots.append((j, v))
        queue.append(A.dot(v) % prime)
    return len(pivots)


def exact_controllable_dim(A, B) -> int:
    """Reachable-subspace dimension of a real pair, computed without rounding.

    Entries are scaled to integers and the Krylov space is eliminated modulo
    large primes. The modular dimension never exceeds the rational one, so the
    maximum over the primes is exact unless every prime divides the same minor.
    """
    A, B = _check_pair(A, B)
    if np.iscomplexobj(A) or np.iscomplexobj(B):
        raise ValueError("exact reachability needs real data")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise NumericalError("non-finite entries in the exact reachability test")
    Ai, Bi = _dyadic_integers(A), _dyadic_integers(B)
    return max(_modular_reach(Ai, Bi, p) for p in _PRIMES)


def _staircase_run(A: np.ndarray, B: np.ndarray, thr: float, gray: float):
    n = A.shape[0]
    dtype = complex if (np.iscomplexobj(A) or np.iscomplexobj(B)) else float
    Q = np.eye(n, dtype=dtype)
    Abar = A.astype(dtype)
    coupling = B.astype(dtype)
    nc = 0
    ambiguous = False
    while nc < n and coupling.size:
        U, sigma, _ = _svd(coupling, full=True)
        ambiguous |= bool(np.any((sigma > thr) & (sigma <= gray)))
        rho = int(np.sum(sigma > thr))
        if rho == 0:
            break
        T = np.eye(n, dtype=dtype)
        T[nc:, nc:] = U
        Abar = T.conj().T @ Abar @ T
        Q = Q @ T
        coupling = Abar[nc + rho:, nc:nc + rho]
        nc += rho
    return nc, Q, ambiguous


def staircase(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[int, np.ndarray]:
    """Orthogonal controllability staircase reduction.

    Returns ``(n_c, Q)`` with ``Q`` unitary such that ``Q^H A Q`` has a
    (numerically) zero lower-left ``(n - n_c) x n_c`` block and ``Q^H B``
    vanishes below row ``n_c``. The base cutoff is the numerical-rank rule
    relative to ``norm([A, B])`` times ``n`` for the rounding added by each
    deflation step.

    Rounding in the staircase can be amplified far above that cutoff, and
    genuinely weak coupling can compute below it, so ``n_c`` is taken from
    :func:`exact_controllable_dim` when the data are exactly specified (see
    :func:`short_dyadic`) or when some step lands in the gray zone. The cutoff
    is then moved up or down by decades until the reduction reproduces it.
    """
    A, B = _check_pair(A, B)
    n, q = A.shape[0], B.shape[1]
    if n == 0:
        return 0, np.eye(0)
    scale = float(np.linalg.norm(np.hstack([A, B]), 2))
    thr = tol.rank_factor * n * max(n, n + q) * scale * EPS
    gray = max(GRAY_ZONE * scale, thr)
    nc, Q, ambiguous = _staircase_run(A, B, thr, gray)
    if n > EXACT_MAX_DIM or np.iscomplexobj(A) or np.iscomplexobj(B):
        return nc, Q
    if not (ambiguous or (short_dyadic(A) and short_dyadic(B))):
        return nc, Q
    exact = exact_controllable_dim(A, B)
    if exact == nc:
        return nc, Q
    best_gap, best_Q = abs(nc - exact), Q
    decades = int(np.ceil(np.log10(gray / thr))) if gray > thr else 0
    for k in sorted(range(-6, decades + 1), key=lambda k: (abs(k), k)):
        if k == 0:
            continue
        nc2, Q2, _ = _staircase_run(A, B, thr * 10.0**k, gray)
        if nc2 == exact:
            return nc2, Q2
        if abs(nc2 - exact) < best_gap:
            best_gap, best_Q = abs(nc2 - exact), Q2
    # no cutoff reproduces the exact dimension; pbh_analysis repairs the witnesses
    return exact, best_Q


def _schur_left_vector(A_uc: np.ndarray, members: np.ndarray, radius: float) -> tuple[complex, np.ndarray]:
    """Left eigenvector of ``A_uc`` for one eigenvalue of the given cluster via ordered Schur form.

    Exact up to backward error even for defective eigenvalues.
    """
    target = members.mean()
    reach = float(np.max(np.abs(members - target))) + radius

    def pick(z):
        return abs(z - target) <= reach

    T, Z, sdim = schur(A_uc.T.astype(complex), output="complex", sort=pick)
    if sdim == 0:
        k = int(np.argmin(np.abs(np.diag(T) - target)))
        return complex(T[k, k]), Z[:, k]
    return complex(T[0, 0]), Z[:, 0]


def _closest_witness(A: np.ndarray, B: np.ndarray, tol: ToleranceConfig) -> PBHWitness:
    """Eigenvalue of ``A`` where ``[sI - A, B]`` is closest to rank deficiency."""
    n = A.shape[0]
    best = None
    for mean, _ in clustered_spectrum(A, tol):
        M = np.hstack([mean * np.eye(n) - A, B])
        sigma = _svd(M, full=False)[1][-1]
        if best is None or sigma < best[0]:
            best = (sigma, mean, M)
    _, s0, M = best
    return PBHWitness(complex(s0), _normalize_phase(_smallest_left_vector(M)[0]), 1)


def pbh_analysis(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> PBHAnalysis:
    """PBH test: ``rank [s I - A, B] == n`` for every eigenvalue ``s`` of ``A``.

    The verdict comes from the staircase reduction. Deficient eigenvalues are
    exactly the spectrum of the uncontrollable block, so witnesses are
    evaluated there: at each clustered eigenvalue the left null space of
    ``[s I - A, B]`` is used when the rank test resolves it, otherwise a Schur
    left eigenvector of the uncontrollable block (tiny residual by
    construction).
    """
    A, B = _check_pair(A, B)
    n = A.shape[0]
    nc, Q = staircase(A, B, tol)
    witnesses: list[PBHWitness] = []
    repair = np.sqrt(EPS) * max(_matrix_scale(np.hstack([A, B])) if n else 0.0, 1.0)
    if nc < n:
        Abar = Q.conj().T @ A @ Q
        A_uc = Abar[nc:, nc:]
        for mean, members in clustered_spectrum(A_uc, tol):
            deficiency, basis = pbh_rank_at(A, B, mean, tol)
            if deficiency > 0:
                witnesses.append(PBHWitness(complex(mean), _normalize_phase(basis[0]), deficiency))
                continue
            s0, y = _schur_left_vector(A_uc, members, tol.eig_dedup_radius)
            alpha = np.concatenate([np.zeros(nc, dtype=complex), y]) @ Q.conj().T
            deficiency, _ = pbh_rank_at(A, B, s0, tol)
            w = PBHWitness(s0, _normalize_phase(alpha), max(deficiency, 1))
            if max(w.residuals(A, B)) > repair:
                shifted = np.hstack([s0 * np.eye(n) - A, B])
                w = PBHWitness(s0, _normalize_phase(_smallest_left_vector(shifted)[0]), w.deficiency)
            witnesses.append(w)
    if nc < n and not witnesses:
        witnesses.append(_closest_witness(A, B, tol))
    return PBHAnalysis(nc == n, nc, witnesses, Q)


def pbh_controllable(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, list[PBHWitness]]:
    res = pbh_analysis(A, B, tol)
    return res.controllable, res.witnesses


def observable(A, C, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    A = np.asarray(A)
    C = np.asarray(C)
    if C.ndim == 1:
        C = C.reshape(1, -1)
    if C.shape[1] != A.shape[0]:
        raise ValueError(f"C must have {A.shape[0]} columns, got shape {C.shape}")
    ok, _ = pbh_controllable(A.T, C.T, tol)
    return ok


def unobservable_modes(A, C, tol: ToleranceConfig = DEFAULT_TOL) -> list[complex]:
    """Eigenvalues of ``A`` whose right eigenvectors are invisible through ``C``."""
    A = np.asarray(A)
    C = np.atleast_2d(np.asarray(C))
    return [w.s0 for w in pbh_analysis(A.T, C.T, tol).witnesses]


def _rank_sequence(A: np.ndarray, lam: complex, tol: ToleranceConfig) -> tuple[int, ...]:
    n = A.shape[0]
    shifted = A - lam * np.eye(n)
    if lam.imag == 0 and not np.iscomplexobj(A):
        shifted = shifted.real
    # powers of a nilpotent part are pure rounding noise, so the cutoff is tied
    # to norm(shifted)**k rather than to the power's own largest singular value
    base = max(_matrix_scale(shifted), _matrix_scale(A), 1.0)
    power = np.eye(n)
    ranks = []
    for k in range(1, n + 1):
        power = power @ shifted
        sigma = _svd(power, full=False)[1]
        thr = tol.rank_factor * n * k * base**k * EPS * SPREAD_SLACK
        ranks.append(int(np.sum(sigma > thr)))
    return tuple(ranks)


def similar(A1, A2, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Same Jordan structure: equal clustered spectra and equal ``rank((A - lam I)^k)`` sequences."""
    A1 = np.asarray(A1)
    A2 = np.asarray(A2)
    if A1.shape != A2.shape or A1.ndim != 2 or A1.shape[0] != A1.shape[1]:
        return False
    n = A1.shape[0]
    if n == 0:
        return True
    v1 = np.linalg.eigvals(A1)
    v2 = np.linalg.eigvals(A2)
    scale = max(_matrix_scale(A1), _matrix_scale(A2))
    both = np.concatenate([v1, v2])
    for group in cluster_values(both, scale, tol, owners=np.arange(2 * n) >= n):
        from1 = group[group < n]
        from2 = group[group >= n]
        if len(from1) != len(from2):
            return False
        lam1 = complex(both[from1].mean())
        lam2 = complex(both[from2].mean())
        if _rank_sequence(A1, lam1, tol) != _rank_sequence(A2, lam2, tol):
            return False
    return True
