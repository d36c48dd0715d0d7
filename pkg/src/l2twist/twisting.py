"""Twisting group-ring matrices by characters and Z^d-representations.

The scalar twist multiplies each coefficient of g by t^phi(g).  The
representation twist replaces each coefficient of g by the m x m action
matrix of phi(g), inflating an r x s matrix to (r*m) x (s*m).  The constants
theta and nu bound twisted determinants from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grouprings import Character, GroupDescriptor, GroupRingElement, GroupRingMatrix

__all__ = [
    "BasedRepresentation",
    "twist_scalar",
    "twist_rep",
    "theta",
    "nu",
    "log_abs_det_action",
]

_COMMUTE_RTOL = 1e-10


@dataclass(frozen=True)
class BasedRepresentation:
    """A Z^d-representation: d commuting invertible complex m x m matrices."""

    dim: int
    matrices: tuple  # d numpy arrays, one per standard basis vector

    def __post_init__(self):
        mats = tuple(np.asarray(R, dtype=complex) for R in self.matrices)
        object.__setattr__(self, "matrices", mats)
        m = self.dim
        for R in mats:
            if R.shape != (m, m):
                raise ValueError(f"action matrix has shape {R.shape}, expected {(m, m)}")
            if abs(np.linalg.det(R)) == 0 or not np.all(np.isfinite(np.linalg.inv(R))):
                raise ValueError("action matrix is not invertible")
        for i, Ri in enumerate(mats):
            for Rj in mats[i + 1:]:
                tol = _COMMUTE_RTOL * np.linalg.norm(Ri) * np.linalg.norm(Rj)
                if np.linalg.norm(Ri @ Rj - Rj @ Ri) > tol:
                    raise ValueError("action matrices do not commute within tolerance")

    @property
    def rank(self) -> int:
        """Number of Z^d coordinates (d)."""
        return len(self.matrices)

    @staticmethod
    def trivial(d: int, dim: int = 1) -> "BasedRepresentation":
        return BasedRepresentation(dim, tuple(np.eye(dim) for _ in range(d)))

    @staticmethod
    def diagonal(diagonals) -> "BasedRepresentation":
        """One diagonal matrix per coordinate; diagonals is a d x m array."""
        diags = [np.asarray(v, dtype=complex) for v in diagonals]
        m = len(diags[0])
        return BasedRepresentation(m, tuple(np.diag(v) for v in diags))

    @staticmethod
    def scalar_t(t: float, weights=None) -> "BasedRepresentation":
        """The 1-dimensional representation e_l -> t^{w_l} (default w = (1,))."""
        if weights is None:
            weights = (1.0,)
        return BasedRepresentation(1, tuple(np.array([[t ** w]]) for w in weights))

    def action(self, s) -> np.ndarray:
        """Action of s in Z^d: R_1^{s_1} ... R_d^{s_d}."""
        s = tuple(int(x) for x in s)
        if len(s) != self.rank:
            raise ValueError(f"key length {len(s)} does not match representation rank {self.rank}")
        out = np.eye(self.dim, dtype=complex)
        for R, k in zip(self.matrices, s):
            if k == 0:
                continue
            base = R if k > 0 else np.linalg.inv(R)
            out = out @ np.linalg.matrix_power(base, abs(k))
        return out

    def direct_sum(self, other: "BasedRepresentation") -> "BasedRepresentation":
        if self.rank != other.rank:
            raise ValueError("rank mismatch in direct sum")
        mats = []
        for Ra, Rb in zip(self.matrices, other.matrices):
            m = np.zeros((self.dim + other.dim, self.dim + other.dim), dtype=complex)
            m[: self.dim, : self.dim] = Ra
            m[self.dim:, self.dim:] = Rb
            mats.append(m)
        return BasedRepresentation(self.dim + other.dim, tuple(mats))

    def rebased(self, u) -> "BasedRepresentation":
        """Conjugate every action matrix by the invertible basis change u."""
        u = np.asarray(u, dtype=complex)
        uinv = np.linalg.inv(u)
        return BasedRepresentation(self.dim, tuple(u @ R @ uinv for R in self.matrices))


# ---------------------------------------------------------------------------
# twisting operations
# ---------------------------------------------------------------------------

def twist_scalar(A: GroupRingMatrix, phi: Character, t: float) -> GroupRingMatrix:
    """Multiply the coefficient of every g by t^phi(g); support is unchanged."""
    if t <= 0:
        raise ValueError("twist parameter t must be positive")
    phi_r = phi.as_real()
    if t == 1.0:
        return A

    def tw(e: GroupRingElement) -> GroupRingElement:
        return e.map_coefficients(lambda k, c: c * t ** phi_r.evaluate(A.group, k))

    return A.map_entries(tw)


def twist_rep(A: GroupRingMatrix, phi: Character, V: BasedRepresentation) -> GroupRingMatrix:
    """Inflate A by the pulled-back representation phi^*V.

    Each term lambda*g of entry (i, j) contributes the block
    lambda * Action(phi(g)) * g at block position (i, j).  The block
    orientation is pinned by the fraction-field rank identity
    rank(twist_rep(A)) = dim(V) * rank(A).
    """
    if phi.target != "Zd":
        raise ValueError("twist_rep needs a character with target Z^d")
    if phi.target_rank != V.rank:
        raise ValueError("character target rank does not match the representation")
    m = V.dim
    G = A.group
    blocks = [[{} for _ in range(A.cols * m)] for _ in range(A.rows * m)]
    for i in range(A.rows):
        for j in range(A.cols):
            for key, coeff in A.entries[i][j].terms.items():
                act = V.action(phi.evaluate(G, key))
                for a in range(m):
                    for b in range(m):
                        v = coeff * act[a, b]
                        if v != 0:
                            d = blocks[i * m + a][j * m + b]
                            d[key] = d.get(key, 0) + v
    return GroupRingMatrix(
        G, [[GroupRingElement(G, cell) for cell in row] for row in blocks]
    )


def theta(V: BasedRepresentation, S) -> float:
    """min over s in S of |det Action(s)|; +inf for empty S."""
    S = list(S)
    if not S:
        return math.inf
    return min(abs(np.linalg.det(V.action(s))) for s in S)


def nu(V: BasedRepresentation, S) -> float:
    """The explicit lower-bound constant for twisted determinants.

    With M the smallest integer >= 1 bounding |s_l| over S,
    delta_l = det Action(e_l) and eps_l = +1 if |delta_l| >= 1 else -1:

        nu = ||Action(eps_1*(M+1), ..., eps_d*(M+1))||^{-dim V}
             * prod_l |delta_l|^{-eps_l * 2M}.

    The corner exponent eps*(M+1) is the monomial shift that moves every
    support point into the orthant where all action determinants are >= 1;
    its operator norm pays for undoing that shift.  nu <= theta always.
    """
    S = [tuple(int(x) for x in s) for s in S]
    if not S:
        raise ValueError("nu is undefined for an empty support set")
    d = V.rank
    M = max(1, max((abs(x) for s in S for x in s), default=0))
    deltas = []
    eps = []
    for l in range(d):
        e_l = tuple(1 if i == l else 0 for i in range(d))
        dl = abs(np.linalg.det(V.action(e_l)))
        deltas.append(dl)
        eps.append(1 if dl >= 1 else -1)
    corner = tuple(eps[l] * (M + 1) for l in range(d))
    opnorm = np.linalg.norm(V.action(corner), 2)
    value = opnorm ** (-V.dim)
    for dl, el in zip(deltas, eps):
        value *= dl ** (-el * 2 * M)
    return float(value)


def log_abs_det_action(V: BasedRepresentation, s) -> float:
    """ln|det Action(s)|; additive in s."""
    return float(np.log(abs(np.linalg.det(V.action(s)))))


def action_norm_bound(V: BasedRepresentation, S) -> float:
    """max over s in S of the operator norm of Action(s)."""
    S = list(S)
    if not S:
        raise ValueError("empty support set")
    return max(float(np.linalg.norm(V.action(s), 2)) for s in S)
