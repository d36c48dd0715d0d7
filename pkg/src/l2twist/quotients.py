"""Finite-quotient approximation of von Neumann invariants.

A finite quotient is given by the permutations of its regular action.  A
group-ring matrix pushes down to a dense complex matrix (optionally twisted);
kernel dimensions and regularized log-determinants are read off singular
values, normalized by the quotient order.  Towers of quotients produce
approximation sequences, and nu/theta give bound certificates around the
exact twisted determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grouprings import Character, GroupRingMatrix
from .twisting import BasedRepresentation, action_norm_bound, nu, theta

__all__ = [
    "FiniteQuotient",
    "QuotientTower",
    "ApproxResult",
    "regular_rep_matrix",
    "vn_dim_ker",
    "reg_logdet",
    "approx_sequence",
    "bound_certificate",
    "BoundCertificate",
    "semicontinuity_check",
    "regular_det_finite",
]

#: multiplier on max(shape)*eps*sigma_max absorbing circulant clustering
DEFAULT_CUTOFF_FACTOR = 64.0


def _svd_cutoff(shape: tuple[int, int], smax: float, factor: float) -> float:
    return max(shape) * np.finfo(float).eps * smax * factor


# ---------------------------------------------------------------------------
# quotients
# ---------------------------------------------------------------------------

class FiniteQuotient:
    """A finite quotient given by generator permutations of the regular action.

    The permutations must generate a group acting freely and transitively on
    {0, ..., n-1}; this is verified exhaustively at construction.
    """

    def __init__(self, order: int, generators: Sequence[Sequence[int]], abelian=None):
        self.order = int(order)
        self.generators = [np.asarray(p, dtype=np.intp) for p in generators]
        self.abelian = tuple(int(x) for x in abelian) if abelian is not None else None
        for p in self.generators:
            if sorted(p.tolist()) != list(range(self.order)):
                raise ValueError("generator image is not a permutation of the points")
        if self.abelian is not None and math.prod(self.abelian) != self.order:
            raise ValueError("abelian structure does not match the order")
        self._check_regular()

    @staticmethod
    def cyclic_product(moduli: Sequence[int]) -> "FiniteQuotient":
        """(Z/N_1) x ... x (Z/N_d) with the translation action (DFT fast path)."""
        Ns = [int(n) for n in moduli]
        n = math.prod(Ns)
        idx = np.arange(n)
        coords = np.array(np.unravel_index(idx, Ns)).T  # (n, d)
        gens = []
        for l, N in enumerate(Ns):
            shifted = coords.copy()
            shifted[:, l] = (shifted[:, l] + 1) % N
            gens.append(np.ravel_multi_index(shifted.T, Ns))
        return FiniteQuotient(n, gens, abelian=Ns)

    def _check_regular(self):
        n = self.order
        if n == 0:
            raise ValueError("quotient order must be positive")
        # BFS over the generated permutation group; the action is regular
        # (free and transitive) iff the group has exactly n elements and the
        # orbit of 0 is everything.
        identity = np.arange(n, dtype=np.intp)
        gens = list(self.generators) + [np.argsort(p) for p in self.generators]
        seen = {identity.tobytes(): identity}
        frontier = [identity]
        while frontier:
            cur = frontier.pop()
            for g in gens:
                nxt = g[cur]
                key = nxt.tobytes()
                if key not in seen:
                    if len(seen) >= n:
                        raise ValueError(
                            "permutations generate more than n elements; action is not free"
                        )
                    seen[key] = nxt
                    frontier.append(nxt)
        if len(seen) != n:
            raise ValueError("permutations generate fewer than n elements; action is not transitive")
        orbit = {int(p[0]) for p in seen.values()}
        if len(orbit) != n:
            raise ValueError("action is not transitive on the points")

    def perm_of_key(self, key: tuple[int, ...], group) -> np.ndarray:
        """Image of a group-element key as a point permutation."""
        n = self.order
        perm = np.arange(n)
        if group.is_abelian:
            for l, k in enumerate(key):
                if l >= len(self.generators):
                    raise ValueError("missing generator image in the quotient")
                p = self.generators[l]
                if k < 0:
                    p = np.argsort(p)
                    k = -k
                for _ in range(int(k)):
                    perm = p[perm]
            return perm
        for g in key:
            p = self.generators[abs(g) - 1]
            if g < 0:
                p = np.argsort(p)
            perm = p[perm]
        return perm


@dataclass
class QuotientTower:
    """An ordered sequence of quotients with nondecreasing orders."""

    levels: list[FiniteQuotient]

    def __post_init__(self):
        orders = [q.order for q in self.levels]
        if any(b < a for a, b in zip(orders, orders[1:])):
            raise ValueError("tower orders must be nondecreasing")

    @staticmethod
    def cyclic(d: int, orders: Sequence[int]) -> "QuotientTower":
        """The (Z/N)^d tower for a sequence of N values."""
        return QuotientTower([FiniteQuotient.cyclic_product([N] * d) for N in orders])

    def __iter__(self):
        return iter(self.levels)

    def __len__(self):
        return len(self.levels)


# ---------------------------------------------------------------------------
# regular-representation matrices
# ---------------------------------------------------------------------------

def _twist_block(key, group, twist) -> np.ndarray:
    """The twist factor of a group element: a 1x1 scalar or an m x m block."""
    if twist is None:
        return np.ones((1, 1), dtype=complex)
    phi, second = twist
    if isinstance(second, BasedRepresentation):
        return second.action(phi.evaluate(group, key))
    t = float(second)
    return np.array([[t ** phi.as_real().evaluate(group, key)]], dtype=complex)


def regular_rep_matrix(A: GroupRingMatrix, Q: FiniteQuotient, twist=None) -> np.ndarray:
    """Dense (n*r*m) x (n*s*m) matrix of A in the regular representation of Q.

    Each group element g becomes its n x n permutation matrix tensored with
    the twist block of g.
    """
    n = Q.order
    m = 1 if twist is None or not isinstance(twist[1], BasedRepresentation) else twist[1].dim
    out = np.zeros((A.rows * n * m, A.cols * n * m), dtype=complex)
    for i in range(A.rows):
        for j in range(A.cols):
            for key, coeff in A.entries[i][j].terms.items():
                perm = Q.perm_of_key(key, A.group)
                P = np.zeros((n, n))
                P[perm, np.arange(n)] = 1.0
                T = coeff * _twist_block(key, A.group, twist)
                out[i * n * m:(i + 1) * n * m, j * n * m:(j + 1) * n * m] += np.kron(P, T)
    return out


def _abelian_singular_values(A: GroupRingMatrix, Q: FiniteQuotient, twist) -> np.ndarray:
    """DFT fast path: singular values from n independent (r*m) x (s*m) blocks."""
    Ns = Q.abelian
    d = len(Ns)
    m = 1 if twist is None or not isinstance(twist[1], BasedRepresentation) else twist[1].dim
    # character grid: one frequency vector per quotient point
    freqs = np.array(
        np.unravel_index(np.arange(Q.order), Ns)
    ).T  # (n, d)
    svals = []
    entry_data = []
    for i in range(A.rows):
        for j in range(A.cols):
            for key, coeff in A.entries[i][j].terms.items():
                T = coeff * _twist_block(key, A.group, twist)
                entry_data.append((i, j, np.array(key[:d]), T))
    for q in range(Q.order):
        phases = np.exp(2j * np.pi * freqs[q] / np.array(Ns))
        block = np.zeros((A.rows * m, A.cols * m), dtype=complex)
        for i, j, key, T in entry_data:
            w = np.prod(phases ** key)
            block[i * m:(i + 1) * m, j * m:(j + 1) * m] += w * T
        svals.append(np.linalg.svd(block, compute_uv=False))
    return np.concatenate(svals) if svals else np.zeros(0)


def _singular_values(A: GroupRingMatrix, Q: FiniteQuotient, twist) -> np.ndarray:
    if Q.abelian is not None and A.group.is_abelian and A.group.rank == len(Q.abelian):
        return _abelian_singular_values(A, Q, twist)
    M = regular_rep_matrix(A, Q, twist)
    return np.linalg.svd(M, compute_uv=False) if M.size else np.zeros(0)


# ---------------------------------------------------------------------------
# spectral readouts
# ---------------------------------------------------------------------------

def vn_dim_ker(M: np.ndarray, order: int, cutoff_factor: float = DEFAULT_CUTOFF_FACTOR) -> float:
    """Normalized kernel dimension: (cols - #singular values above cutoff)/n."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return _dims_from_svals(s, M.shape[1], order, cutoff_factor)


def reg_logdet(M: np.ndarray, order: int, cutoff_factor: float = DEFAULT_CUTOFF_FACTOR) -> float:
    """(1/n) * sum of ln(sigma) over singular values above the cutoff.

    The zero matrix gives 0 (empty product; FK determinant of the zero
    morphism is 1)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return _logdet_from_svals(s, order, cutoff_factor)


def _dims_from_svals(s: np.ndarray, cols: int, order: int, factor: float) -> float:
    if s.size == 0:
        return cols / order
    cut = _svd_cutoff((s.size, cols), float(s.max()), factor)
    rank = int(np.sum(s > cut))
    return (cols - rank) / order


def _logdet_from_svals(s: np.ndarray, order: int, factor: float) -> float:
    if s.size == 0 or s.max() == 0:
        return 0.0
    cut = _svd_cutoff((s.size, s.size), float(s.max()), factor)
    kept = s[s > cut]
    return float(np.sum(np.log(kept))) / order


# ---------------------------------------------------------------------------
# approximation sequences
# ---------------------------------------------------------------------------

@dataclass
class ApproxLevel:
    order: int
    vn_dim_ker: float
    reg_logdet: float


@dataclass
class ApproxResult:
    levels: list[ApproxLevel]
    limsup_estimate: float
    dims_limit_estimate: float
    dims_stable: bool

    def as_rows(self):
        return [(k, lv.order, lv.vn_dim_ker, lv.reg_logdet) for k, lv in enumerate(self.levels)]


def approx_sequence(
    A: GroupRingMatrix,
    tower: QuotientTower,
    twist=None,
    cutoff_factor: float = DEFAULT_CUTOFF_FACTOR,
) -> ApproxResult:
    """Per-level kernel dimensions and regularized log-determinants.

    limsup_estimate is the max over the last half of the levels (the honest
    finite surrogate of the limsup; no convergence is asserted).
    """
    m = 1 if twist is None or not isinstance(twist[1], BasedRepresentation) else twist[1].dim
    levels = []
    for Q in tower:
        s = _singular_values(A, Q, twist)
        cols = A.cols * Q.order * m
        levels.append(
            ApproxLevel(
                order=Q.order,
                vn_dim_ker=_dims_from_svals(s, cols, Q.order, cutoff_factor),
                reg_logdet=_logdet_from_svals(s, Q.order, cutoff_factor),
            )
        )
    tail = levels[len(levels) // 2:] if levels else []
    limsup = max((lv.reg_logdet for lv in tail), default=0.0)
    dims_last = levels[-1].vn_dim_ker if levels else 0.0
    last3 = [lv.vn_dim_ker for lv in levels[-3:]]
    stable = len(last3) == 3 and max(last3) - min(last3) < 1e-6
    return ApproxResult(levels, limsup, dims_last, stable)


# ---------------------------------------------------------------------------
# bound certificates (nu / theta inequality)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCertificate:
    lower: float
    upper: float
    theta_lower: float | None = None


def bound_certificate(
    A: GroupRingMatrix,
    phi: Character,
    V: BasedRepresentation,
    kernel_dim: float,
    has_section: bool = False,
) -> BoundCertificate:
    """Bracket the twisted log-determinant of A.

        lower = (r - k) * ln nu(V, phi(supp A))
        upper = dim(V) * (r - k) * ln( ||A||_1 * max_s ||Action(s)|| )

    The upper exponent carries the extra dim(V) factor because the twisted
    operator acts on a module of von Neumann dimension dim(V) * r and its
    image has dimension dim(V) * (r - k).  kernel_dim must be the von
    Neumann kernel dimension of the *untwisted* operator, supplied by the
    caller (a wrong value silently invalidates the certificate).  When the
    caller asserts that phi has a section, theta replaces nu; theta >= nu
    holds for every representation, so theta_lower is never below `lower`.
    """
    if phi.target != "Zd":
        raise ValueError("bound_certificate needs a character with target Z^d")
    S = {phi.evaluate(A.group, k) for k in A.support()}
    exponent = A.rows - kernel_dim
    if not S:
        if exponent > 0:
            raise ValueError("empty support with positive co-kernel exponent")
        return BoundCertificate(lower=0.0, upper=0.0, theta_lower=0.0 if has_section else None)
    lower = exponent * math.log(nu(V, S))
    upper = V.dim * exponent * math.log(A.one_norm() * action_norm_bound(V, S))
    th = exponent * math.log(theta(V, S)) if has_section else None
    return BoundCertificate(lower=lower, upper=upper, theta_lower=th)


# ---------------------------------------------------------------------------
# semicontinuity test harness (finite-dimensional)
# ---------------------------------------------------------------------------

def regular_det_finite(M: np.ndarray, cutoff_factor: float = DEFAULT_CUTOFF_FACTOR) -> float:
    """Regular determinant of a finite matrix: 0 unless injective, else the
    product of all singular values."""
    M = np.asarray(M)
    if M.size == 0:
        return 1.0
    s = np.linalg.svd(M, compute_uv=False)
    cut = _svd_cutoff(M.shape, float(s.max()) if s.size else 0.0, cutoff_factor)
    if M.shape[1] > s.size or np.any(s <= cut) or s.max() == 0:
        return 0.0
    return float(np.prod(s))


@dataclass
class SemicontinuityReport:
    dims_ok: bool
    det_ok: bool
    tail_dims: list[float] = field(default_factory=list)
    tail_dets: list[float] = field(default_factory=list)
    limit_dim: float = 0.0
    limit_det: float = 0.0

    @property
    def ok(self) -> bool:
        return self.dims_ok and self.det_ok


def semicontinuity_check(
    family: Sequence[np.ndarray],
    limit: np.ndarray,
    order: int = 1,
    tail: int | None = None,
    dim_tol: float = 1e-9,
    det_rtol: float = 1e-6,
    det_atol: float = 1e-9,
) -> SemicontinuityReport:
    """Upper semicontinuity of kernel dimension and regular determinant.

    Asserts, over the tail of a family converging in norm to `limit`, that
    limsup dim ker <= dim ker(limit) and limsup det^r <= det^r(limit).
    """
    limit = np.asarray(limit)
    mats = [np.asarray(M) for M in family]
    for M in mats:
        if M.shape != limit.shape:
            raise ValueError("family members must share the limit's shape")
    norms = [np.linalg.norm(M - limit, 2) for M in mats]
    if len(norms) >= 2 and norms[-1] > norms[0] + 1e-12 and norms[-1] > 1e-12:
        raise ValueError("family does not converge to the limit in norm")
    k = tail if tail is not None else max(1, len(mats) // 4)
    tail_mats = mats[-k:]
    dims = [vn_dim_ker(M, order) for M in tail_mats]
    dets = [regular_det_finite(M) for M in tail_mats]
    dim_limit = vn_dim_ker(limit, order)
    det_limit = regular_det_finite(limit)
    dims_ok = max(dims) <= dim_limit + dim_tol
    det_ok = max(dets) <= det_limit * (1 + det_rtol) + det_atol
    return SemicontinuityReport(
        dims_ok=dims_ok,
        det_ok=det_ok,
        tail_dims=dims,
        tail_dets=dets,
        limit_dim=dim_limit,
        limit_det=det_limit,
    )
