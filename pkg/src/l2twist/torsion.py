"""Based chain complexes and the twisted torsion function rho(t).

A complex is a list of boundary matrices over a group ring (right
multiplication, c_n: C_n -> C_{n-1}).  The torsion value at a twist
parameter t is

    rho(t) = -(1/2) * sum_n (-1)^n * n * ln det(Laplacian_n twisted at t),

the unique normalization reproducing rho(t) = ln t (t >= 1) on the circle
and the classical L2-torsion at t = 1.  Over Z^d with d >= 2 all Laplacian
determinants are evaluated through a *common* substitution schedule per
level so that the structural cancellations between degrees happen exactly,
not just up to quadrature error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grouprings import (
    Character,
    GroupDescriptor,
    GroupRingElement,
    GroupRingMatrix,
    abelianization_map,
)
from .mahler import (
    LaurentPoly,
    _det_poly,
    _poly_matrix,
    lawton_substitute,
    mahler_exact_univariate,
    minimal_lawton_schedule,
    rank_fraction_field,
)
from .quotients import QuotientTower, approx_sequence
from .twisting import BasedRepresentation, twist_rep, twist_scalar

__all__ = [
    "BasedChainComplex",
    "TorsionCurve",
    "CurvePoint",
    "DegreeResult",
    "BoundEnvelope",
    "NON_DET_CLASS",
    "validate_complex",
    "laplacian",
    "torsion_at",
    "torsion_curve",
    "degree",
    "bound_envelope",
    "betti",
    "circle_complex",
    "torus_complex",
    "s1_predicted_curve",
    "mapping_torus_complex",
    "MappingTorus",
    "BasisChange",
    "trans_class",
    "rebase_complex",
    "verify_base_change",
    "verify_scaling",
    "verify_duality",
    "verify_restriction",
    "verify_sum",
    "verify_product",
    "extension_complex",
    "product_complex",
    "restrict_complex",
]


class _NonDetClass:
    """Sentinel for twisted Laplacians outside determinant class."""

    def __repr__(self):
        return "NON_DET_CLASS"


NON_DET_CLASS = _NonDetClass()


# ---------------------------------------------------------------------------
# complexes
# ---------------------------------------------------------------------------

@dataclass
class BasedChainComplex:
    """Ranks r_0..r_N and boundaries c_n: r_n x r_{n-1} (n = 1..N)."""

    group: GroupDescriptor
    ranks: tuple[int, ...]
    boundaries: tuple[GroupRingMatrix, ...]
    tower: QuotientTower | None = None

    def __post_init__(self):
        self.ranks = tuple(int(r) for r in self.ranks)
        self.boundaries = tuple(self.boundaries)
        if len(self.boundaries) != max(len(self.ranks) - 1, 0):
            raise ValueError("need exactly one boundary per adjacent rank pair")
        for n, c in enumerate(self.boundaries, start=1):
            if c.shape != (self.ranks[n], self.ranks[n - 1]):
                raise ValueError(
                    f"boundary {n} has shape {c.shape}, expected "
                    f"{(self.ranks[n], self.ranks[n - 1])}"
                )
            if c.group != self.group:
                raise ValueError("boundary over wrong group")

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    def boundary(self, n: int) -> GroupRingMatrix:
        """c_n for 1 <= n <= top; zero-shaped matrices outside that range."""
        if 1 <= n <= self.top:
            return self.boundaries[n - 1]
        rows = self.ranks[n] if 0 <= n <= self.top else 0
        cols = self.ranks[n - 1] if 0 <= n - 1 <= self.top else 0
        return GroupRingMatrix.zero(self.group, rows, cols)

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * r for n, r in enumerate(self.ranks))


@dataclass
class ValidationReport:
    ok: bool
    degree: int | None = None
    row: int | None = None
    col: int | None = None


def validate_complex(C: BasedChainComplex) -> ValidationReport:
    """Check c_{n} . c_{n-1} = 0 exactly (abelian) or in every listed quotient."""
    for n in range(2, C.top + 1):
        comp = C.boundary(n) @ C.boundary(n - 1)
        if C.group.is_abelian or C.tower is None:
            bad = _first_nonzero(comp)
        else:
            bad = None
            for Q in C.tower:
                from .quotients import regular_rep_matrix

                M = regular_rep_matrix(comp, Q)
                if np.abs(M).max(initial=0.0) > 1e-9:
                    idx = np.unravel_index(int(np.abs(M).argmax()), M.shape)
                    bad = (idx[0] // Q.order, idx[1] // Q.order)
                    break
        if bad is not None:
            return ValidationReport(ok=False, degree=n, row=bad[0], col=bad[1])
    return ValidationReport(ok=True)


def _first_nonzero(A: GroupRingMatrix):
    for i in range(A.rows):
        for j in range(A.cols):
            if not A.entries[i][j].is_zero:
                return (i, j)
    return None


def laplacian(C: BasedChainComplex, n: int, twist=None) -> GroupRingMatrix:
    """Delta_n = c_{n+1}* c_{n+1} + c_n c_n*, with boundaries twisted first."""
    if not (0 <= n <= C.top):
        raise IndexError(f"degree {n} out of range 0..{C.top}")
    up = C.boundary(n + 1)
    down = C.boundary(n)
    if twist is not None:
        phi, t = twist
        up = twist_scalar(up, phi, t)
        down = twist_scalar(down, phi, t)
    out = GroupRingMatrix.zero(C.group, C.ranks[n], C.ranks[n])
    if up.rows > 0:
        out = out + up.star() @ up
    if down.cols > 0:
        out = out + down @ down.star()
    return out


# ---------------------------------------------------------------------------
# torsion values
# ---------------------------------------------------------------------------

def _laplacian_det_polys(C: BasedChainComplex, phi: Character, t: float):
    """Determinant polynomials of all twisted Laplacians; None if one vanishes."""
    polys = []
    for n in range(C.top + 1):
        delta = laplacian(C, n, twist=(phi, t))
        if delta.rows == 0:
            polys.append(LaurentPoly.constant(C.group.rank, 1.0))
            continue
        q = _det_poly(_poly_matrix(delta), C.group.rank)
        if q.is_zero:
            return None
        polys.append(q)
    return polys


def _weighted_log_mahler(polys: Sequence[LaurentPoly], weights: Sequence[float],
                         tol: float = 1e-9, max_levels: int = 14) -> float:
    """sum_n w_n * M(q_n), with all polynomials pushed through one common
    substitution schedule per level so cross-degree cancellations are exact."""
    d = polys[0].nvars
    active = [(q, w) for q, w in zip(polys, weights) if w != 0]
    if not active:
        return 0.0
    if d == 1:
        return sum(w * mahler_exact_univariate(q).value for q, w in active)
    # joint minimal schedule from the per-coordinate maxima of the b-bounds
    bs = []
    for q, _ in active:
        qt = q.translated()
        bs.append([1 + max(e[i] for e in qt.terms) for i in range(d - 1)])
    bj = [max(col) for col in zip(*bs)]
    base = []
    prev = 1
    for i in range(d - 1):
        k = bj[0] if i == 0 else bj[i] * prev
        base.append(k)
        prev = k
    values = []
    factor = 1
    for _ in range(max_levels):
        ks = tuple(k * factor for k in base)
        values.append(
            sum(w * mahler_exact_univariate(lawton_substitute(q, ks)).value for q, w in active)
        )
        if len(values) >= 2 and abs(values[-1] - values[-2]) < tol:
            break
        factor *= 2
    return values[-1]


def torsion_at(C: BasedChainComplex, phi: Character, t: float, tol: float = 1e-9):
    """rho(t), or NON_DET_CLASS when a twisted Laplacian determinant vanishes.

    Abelian groups use exact determinant polynomials; other groups need a
    quotient tower on the complex and are evaluated by approximation.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if C.group.is_abelian and C.group.rank >= 1:
        polys = _laplacian_det_polys(C, phi, t)
        if polys is None:
            return NON_DET_CLASS
        weights = [(-1) ** n * n for n in range(C.top + 1)]
        return -0.5 * _weighted_log_mahler(polys, weights, tol=tol)
    if C.tower is None:
        raise ValueError("non-abelian complexes need a quotient tower")
    total = 0.0
    for n in range(C.top + 1):
        w = (-1) ** n * n
        if w == 0:
            continue
        delta = laplacian(C, n, twist=(phi, t))
        res = approx_sequence(delta, C.tower)
        if not res.dims_stable or res.dims_limit_estimate > 1e-3:
            return NON_DET_CLASS
        total += w * res.limsup_estimate
    return -0.5 * total


@dataclass
class CurvePoint:
    t: float
    rho: float | None
    status: str  # 'ok' | 'non-det-class'


@dataclass
class TorsionCurve:
    points: list[CurvePoint]
    envelope: "BoundEnvelope | None" = None

    @property
    def ts(self) -> list[float]:
        return [p.t for p in self.points]

    @property
    def values(self) -> list[float]:
        return [p.rho for p in self.points if p.status == "ok"]

    def ok(self) -> bool:
        return all(p.status == "ok" for p in self.points)


def torsion_curve(
    C: BasedChainComplex,
    phi: Character,
    t_min: float,
    t_max: float,
    points: int,
    tol: float = 1e-9,
) -> TorsionCurve:
    """Evaluate rho on a geometric grid; per-point failures become statuses."""
    if not (0 < t_min < t_max):
        raise ValueError("need 0 < t_min < t_max")
    if points < 2:
        raise ValueError("need at least 2 grid points")
    ratio = (t_max / t_min) ** (1.0 / (points - 1))
    out = []
    for k in range(points):
        t = t_min * ratio ** k
        v = torsion_at(C, phi, t, tol=tol)
        if v is NON_DET_CLASS:
            out.append(CurvePoint(t=t, rho=None, status="non-det-class"))
        else:
            out.append(CurvePoint(t=t, rho=float(v), status="ok"))
    return TorsionCurve(points=out)


# ---------------------------------------------------------------------------
# degree
# ---------------------------------------------------------------------------

@dataclass
class DegreeResult:
    deg0: float
    degInf: float
    deg: float
    slopes_zero: list[float]
    slopes_inf: list[float]
    stable_zero: bool
    stable_inf: bool


def degree(curve: TorsionCurve, window: int = 3) -> DegreeResult:
    """Degree from difference-quotient slopes at both ends of the grid.

    deg0 is the window minimum (liminf surrogate) over the smallest-t
    adjacent pairs, degInf the window maximum over the largest-t pairs.
    """
    pts = [p for p in curve.points if p.status == "ok"]
    if len(pts) < 2 * window + 2:
        raise ValueError(f"need at least {2 * window + 2} ok points for degree estimation")
    slopes = [
        (b.rho - a.rho) / (math.log(b.t) - math.log(a.t))
        for a, b in zip(pts, pts[1:])
    ]
    lo = slopes[:window]
    hi = slopes[-window:]
    deg0 = min(lo)
    degInf = max(hi)

    def stable(w, s):
        return max(w) - min(w) < 1e-6 * (1 + abs(s))

    return DegreeResult(
        deg0=deg0,
        degInf=degInf,
        deg=degInf - deg0,
        slopes_zero=lo,
        slopes_inf=hi,
        stable_zero=stable(lo, deg0),
        stable_inf=stable(hi, degInf),
    )


# ---------------------------------------------------------------------------
# bound envelope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundEnvelope:
    """|rho(t)| <= C*|ln t| + D on the guaranteeing hypotheses."""

    C: float
    D: float

    def bound(self, t: float) -> float:
        return self.C * abs(math.log(t)) + self.D

    def contains(self, t: float, value: float, slack: float = 1e-9) -> bool:
        return abs(value) <= self.bound(t) + slack


def bound_envelope(C: BasedChainComplex, phi: Character) -> BoundEnvelope:
    """Envelope constants from the support bounds of the boundaries:

        C = sum_n (r_n - dim ker c_n) * (3*M_n + 1) * sum_l |phi(e_l)|
        D = sum_n ln ||c_n||_1          (over nonzero boundaries)
    """
    if not C.group.is_abelian:
        raise ValueError("bound_envelope needs a complex over Z^d")
    weights = [abs(v) for v in phi.as_real().values]
    wsum = sum(weights)
    Cc = 0.0
    Dd = 0.0
    for n in range(1, C.top + 1):
        c = C.boundary(n)
        supp = c.support()
        if not supp:
            continue
        Mn = max(1, max(abs(x) for s in supp for x in s))
        ker = c.rows - rank_fraction_field(c)
        Cc += (c.rows - ker) * (3 * Mn + 1) * wsum
        Dd += math.log(c.one_norm())
    return BoundEnvelope(C=Cc, D=Dd)


# ---------------------------------------------------------------------------
# Betti numbers
# ---------------------------------------------------------------------------

def betti(C: BasedChainComplex, phi: Character | None = None,
          V: BasedRepresentation | None = None) -> list[float]:
    """b_n = r_n - rank(c_n) - rank(c_{n+1}) in von Neumann units.

    With a representation twist the ranks come from the inflated matrices;
    the twisted values equal dim(V) times the untwisted ones over Z^d.
    """
    if not C.group.is_abelian:
        raise ValueError("betti over non-abelian groups needs the tower route")
    m = V.dim if V is not None else 1

    def rk(A: GroupRingMatrix) -> int:
        if A.rows == 0 or A.cols == 0:
            return 0
        if V is not None:
            return rank_fraction_field(twist_rep(A, phi, V))
        return rank_fraction_field(A)

    out = []
    for n in range(C.top + 1):
        out.append(float(C.ranks[n] * m - rk(C.boundary(n)) - rk(C.boundary(n + 1))))
    return out


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def circle_complex() -> BasedChainComplex:
    """Ranks (1,1) over Z, c_1 = [z - 1]."""
    G = GroupDescriptor.abelian(1)
    c1 = GroupRingMatrix(G, [[GroupRingElement(G, {(1,): 1, (0,): -1})]])
    return BasedChainComplex(G, (1, 1), (c1,))


def torus_complex(d: int) -> BasedChainComplex:
    """Koszul complex of the d-torus over Z^d (ranks binomial(d, n))."""
    if d < 1:
        raise ValueError("d must be >= 1")
    G = GroupDescriptor.abelian(d)
    bases = [list(itertools.combinations(range(d), n)) for n in range(d + 1)]
    boundaries = []
    for n in range(1, d + 1):
        dom, cod = bases[n], bases[n - 1]
        index = {S: j for j, S in enumerate(cod)}
        rows = []
        for S in dom:
            row = [GroupRingElement.zero(G) for _ in cod]
            for pos, i in enumerate(S):
                T = tuple(x for x in S if x != i)
                sign = (-1) ** pos
                zi = GroupRingElement(
                    G,
                    {
                        tuple(1 if l == i else 0 for l in range(d)): sign,
                        (0,) * d: -sign,
                    },
                )
                row[index[T]] = row[index[T]] + zi
            rows.append(row)
        boundaries.append(GroupRingMatrix(G, rows))
    return BasedChainComplex(G, tuple(len(b) for b in bases), tuple(boundaries))


def s1_predicted_curve(chi_orb: float, k: int) -> Callable[[float], float]:
    """The closed-form curve of a circle action: chi_orb*k*ln t above t = 1,
    zero below."""

    def rho(t: float) -> float:
        return chi_orb * k * math.log(t) if t >= 1.0 else 0.0

    return rho


# ---------------------------------------------------------------------------
# mapping tori
# ---------------------------------------------------------------------------

@dataclass
class MappingTorus:
    complex: BasedChainComplex
    chi: int
    T0: float
    T_inf: float
    eigenvalues: list[np.ndarray]  # per degree of the self-map

    def predicted(self, t: float) -> float:
        """Closed-form torsion: sum_n (-1)^n sum_eig ln max(t*|eig|, 1)."""
        total = 0.0
        for n, eigs in enumerate(self.eigenvalues):
            total += (-1) ** n * float(np.sum(np.log(np.maximum(t * np.abs(eigs), 1.0))))
        return total


def mapping_torus_complex(
    boundaries: Sequence[np.ndarray], F: Sequence[np.ndarray]
) -> MappingTorus:
    """Mapping-torus complex of an integer chain self-map F.

    The base complex has integer boundaries d_n (right multiplication,
    shape r_n x r_{n-1}); the result is the mapping cone of
    (id - z*F) over Z[z^{+-1}], with plateau diagnostics from the spectral
    radii of F and of its inverse.
    """
    ds = [np.asarray(d, dtype=float) for d in boundaries]
    Fs = [np.asarray(f, dtype=float) for f in F]
    ranks = [f.shape[0] for f in Fs]
    if len(ds) != len(ranks) - 1:
        raise ValueError("need one boundary per adjacent rank pair")
    for n, d in enumerate(ds, start=1):
        if d.shape != (ranks[n], ranks[n - 1]):
            raise ValueError(f"boundary {n} has shape {d.shape}")
    for f in Fs:
        if f.shape[0] != f.shape[1]:
            raise ValueError("self-map blocks must be square")
    # chain-map condition F_n d_n = d_n F_{n-1}
    for n, d in enumerate(ds, start=1):
        if not np.allclose(Fs[n] @ d, d @ Fs[n - 1]):
            raise ValueError("F is not a chain map")
    # rational homotopy equivalence: the algebraic mapping cone of F is acyclic
    if not _cone_rationally_acyclic(ds, Fs):
        raise ValueError("the cone of F is not rationally acyclic")

    G = GroupDescriptor.abelian(1)

    def as_ring(M: np.ndarray, z_power: int = 0, scale: float = 1.0) -> GroupRingMatrix:
        if M.shape[0] == 0 or M.shape[1] == 0:
            return GroupRingMatrix.zero(G, M.shape[0], M.shape[1])
        rows = []
        for i in range(M.shape[0]):
            row = []
            for j in range(M.shape[1]):
                v = scale * M[i, j]
                row.append(
                    GroupRingElement(G, {(z_power,): v}) if v else GroupRingElement.zero(G)
                )
            rows.append(row)
        return GroupRingMatrix(G, rows)

    def u(n: int) -> GroupRingMatrix:
        # id - z*F_n as a matrix over Z[z^{+-1}]
        return as_ring(np.eye(ranks[n])) + as_ring(Fs[n], z_power=1, scale=-1.0)

    N = len(ranks) - 1
    cone_ranks = []
    cone_bnds = []
    for n in range(N + 2):
        r_lower = ranks[n - 1] if 1 <= n <= N + 1 else 0
        r_here = ranks[n] if n <= N else 0
        cone_ranks.append(r_lower + r_here)
    for n in range(1, N + 2):
        # Cone_n = C_{n-1} (+) C_n, boundary [[-d_{n-1}, u_{n-1}], [0, d_n]]
        rl, rh = (ranks[n - 1] if n - 1 <= N else 0), (ranks[n] if n <= N else 0)
        cl, ch = (ranks[n - 2] if 1 <= n - 1 <= N + 1 and n - 2 >= 0 else 0), (
            ranks[n - 1] if n - 1 <= N else 0
        )
        blocks = GroupRingMatrix.zero(G, rl + rh, cl + ch)
        rows = [list(r) for r in blocks.entries]
        if rl and cl:
            top_left = as_ring(ds[n - 2], scale=-1.0)
            for i in range(rl):
                for j in range(cl):
                    rows[i][j] = top_left.entries[i][j]
        if rl and ch:
            un = u(n - 1)
            for i in range(rl):
                for j in range(ch):
                    rows[i][cl + j] = un.entries[i][j]
        if rh and ch:
            dn = as_ring(ds[n - 1])
            for i in range(rh):
                for j in range(ch):
                    rows[rl + i][cl + j] = dn.entries[i][j]
        cone_bnds.append(GroupRingMatrix(G, rows))
    cx = BasedChainComplex(G, tuple(cone_ranks), tuple(cone_bnds))

    eigs = [np.linalg.eigvals(f) for f in Fs]
    T0 = max(float(np.max(np.abs(e))) for e in eigs)
    inv_rads = []
    for f in Fs:
        if abs(np.linalg.det(f)) < 1e-12:
            inv_rads.append(math.inf)
        else:
            inv_rads.append(float(np.max(np.abs(np.linalg.eigvals(np.linalg.inv(f))))))
    T_inf = max(inv_rads)
    chi = sum((-1) ** n * r for n, r in enumerate(ranks))
    return MappingTorus(complex=cx, chi=chi, T0=T0, T_inf=T_inf, eigenvalues=eigs)


def _cone_rationally_acyclic(ds, Fs) -> bool:
    """Acyclicity of the algebraic cone of F over Q, via numeric ranks."""
    ranks = [f.shape[0] for f in Fs]
    N = len(ranks) - 1
    cone_rk = []
    mats = []
    for n in range(1, N + 2):
        rl = ranks[n - 1] if n - 1 <= N else 0
        rh = ranks[n] if n <= N else 0
        cl = ranks[n - 2] if n - 2 >= 0 else 0
        ch = ranks[n - 1] if n - 1 <= N else 0
        M = np.zeros((rl + rh, cl + ch))
        if rl and cl:
            M[:rl, :cl] = -ds[n - 2]
        if rl and ch:
            M[:rl, cl:] = Fs[n - 1]  # u at z=1 would be id-F; acyclicity over Q[z,z^-1]
        if rh and ch:
            M[rl:, cl:] = ds[n - 1]
        mats.append(M)
    # cone of F acyclic <=> H_*(cone(F)) = 0; cone differential uses F itself
    dims = [ranks[n - 1] if n - 1 >= 0 and n - 1 <= N else 0 for n in range(N + 2)]
    dims = [d + (ranks[n] if n <= N else 0) for n, d in enumerate(dims)]
    rks = [int(np.linalg.matrix_rank(M)) if M.size else 0 for M in mats]
    rks = [0] + rks + [0]
    for n in range(N + 2):
        if dims[n] - rks[n] - rks[n + 1] != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# base refinement changes
# ---------------------------------------------------------------------------

@dataclass
class BasisChange:
    """Per-degree signed permutations with group-element multipliers.

    Degree n data: (perm, signs, keys); basis element i of the old complex
    corresponds to sign_i * key_i * (new basis element perm_i).
    """

    degrees: dict[int, tuple[tuple[int, ...], tuple[int, ...], tuple]]

    @staticmethod
    def multiplier(degree: int, rank: int, index: int, key) -> "BasisChange":
        """Multiply one basis element of one degree by a group element."""
        perm = tuple(range(rank))
        signs = tuple(1 for _ in range(rank))
        keys = [None] * rank
        keys[index] = tuple(key)
        return BasisChange({degree: (perm, signs, tuple(keys))})


def _change_matrix(C: BasedChainComplex, change: BasisChange, n: int) -> GroupRingMatrix:
    r = C.ranks[n]
    if n not in change.degrees:
        return GroupRingMatrix.identity(C.group, r)
    perm, signs, keys = change.degrees[n]
    if len(perm) != r:
        raise ValueError(f"basis change at degree {n} has wrong size")
    z = GroupRingElement.zero(C.group)
    rows = [[z for _ in range(r)] for _ in range(r)]
    for i in range(r):
        key = keys[i] if keys[i] is not None else C.group.identity_key()
        rows[i][perm[i]] = GroupRingElement(C.group, {tuple(key): signs[i]})
    return GroupRingMatrix(C.group, rows)


def _monomial_inverse(U: GroupRingMatrix) -> GroupRingMatrix:
    G = U.group
    z = GroupRingElement.zero(G)
    rows = [[z for _ in range(U.rows)] for _ in range(U.cols)]
    for i in range(U.rows):
        for j in range(U.cols):
            e = U.entries[i][j]
            if e.is_zero:
                continue
            ((key, coeff),) = e.terms.items()
            rows[j][i] = GroupRingElement(G, {G.inv_key(key): 1.0 / coeff})
    return GroupRingMatrix(G, rows)


def rebase_complex(C: BasedChainComplex, change: BasisChange) -> BasedChainComplex:
    """New boundaries c_n' = U_n^{-1} c_n U_{n-1}."""
    new = []
    for n in range(1, C.top + 1):
        Un = _change_matrix(C, change, n)
        Um = _change_matrix(C, change, n - 1)
        new.append(_monomial_inverse(Un) @ C.boundary(n) @ Um)
    return BasedChainComplex(C.group, C.ranks, tuple(new), tower=C.tower)


def trans_class(C: BasedChainComplex, change: BasisChange) -> tuple[int, ...]:
    """Alternating abelianized product of the multipliers, as an exponent
    vector in the free part of H_1."""
    amap, target = abelianization_map(C.group)
    d = target.rank
    total = [0] * d
    for n, (perm, signs, keys) in change.degrees.items():
        for key in keys:
            if key is None:
                continue
            v = amap(tuple(key))
            for l in range(d):
                total[l] += (-1) ** n * v[l]
    return tuple(total)


# ---------------------------------------------------------------------------
# derived complexes (restriction, extension, product)
# ---------------------------------------------------------------------------

def restrict_complex(C: BasedChainComplex, moduli: Sequence[int]) -> BasedChainComplex:
    """Restrict a complex over Z^d to the finite-index diagonal sublattice
    N_1 Z x ... x N_d Z, with the induced coset basis.

    The result lives over Z^d again, generated by z_l^{N_l}; each original
    basis element fans out into one copy per coset representative.  Compose
    the original character with `restricted_character` before evaluating
    torsion on the result.
    """
    if not C.group.is_abelian:
        raise ValueError("restriction needs a complex over Z^d")
    d = C.group.rank
    Ns = tuple(int(n) for n in moduli)
    if len(Ns) != d or any(n < 1 for n in Ns):
        raise ValueError("need one positive modulus per coordinate")
    reps = list(itertools.product(*[range(n) for n in Ns]))
    rep_index = {r: k for k, r in enumerate(reps)}
    G = C.group

    def restrict_matrix(A: GroupRingMatrix) -> GroupRingMatrix:
        R = len(reps)
        rows = [[dict() for _ in range(A.cols * R)] for _ in range(A.rows * R)]
        for i in range(A.rows):
            for j in range(A.cols):
                for key, coeff in A.entries[i][j].terms.items():
                    for k, rep in enumerate(reps):
                        total = tuple(x + y for x, y in zip(key, rep))
                        new_rep = tuple(x % n for x, n in zip(total, Ns))
                        q = tuple((x - y) // n for x, y, n in zip(total, new_rep, Ns))
                        tgt = rep_index[new_rep]
                        cell = rows[i * R + k][j * R + tgt]
                        cell[q] = cell.get(q, 0) + coeff
        return GroupRingMatrix(
            G, [[GroupRingElement(G, cell) for cell in row] for row in rows]
        )

    R = len(reps)
    ranks = tuple(r * R for r in C.ranks)
    bnds = tuple(restrict_matrix(C.boundary(n)) for n in range(1, C.top + 1))
    return BasedChainComplex(G, ranks, bnds, tower=C.tower)


def restricted_character(phi: Character, moduli: Sequence[int]) -> Character:
    """The original real character read on the sublattice generators z_l^{N_l}."""
    vals = phi.as_real().values
    return Character.real(v * n for v, n in zip(vals, moduli))


def extension_complex(
    sub: BasedChainComplex, quot: BasedChainComplex,
    off_diagonal: dict[int, GroupRingMatrix] | None = None,
) -> BasedChainComplex:
    """Degreewise-split extension: boundaries [[c'_n, X_n], [0, c''_n]].

    X_n maps the sub part of degree n to the quotient part of degree n-1 and
    must satisfy the chain condition of the assembled complex.
    """
    if sub.group != quot.group:
        raise ValueError("summands over different groups")
    if sub.top != quot.top:
        raise ValueError("summands must share the top degree")
    G = sub.group
    off = off_diagonal or {}
    ranks = tuple(a + b for a, b in zip(sub.ranks, quot.ranks))
    bnds = []
    for n in range(1, sub.top + 1):
        a, b = sub.boundary(n), quot.boundary(n)
        X = off.get(n)
        rows = []
        for i in range(a.rows):
            row = list(a.entries[i]) if a.cols else []
            if X is not None:
                row += list(X.entries[i])
            else:
                row += [GroupRingElement.zero(G)] * b.cols
            rows.append(row)
        for i in range(b.rows):
            row = [GroupRingElement.zero(G)] * a.cols + list(b.entries[i])
            rows.append(row)
        bnds.append(GroupRingMatrix(G, rows))
    return BasedChainComplex(G, ranks, tuple(bnds), tower=sub.tower)


def product_complex(C: BasedChainComplex, D_ranks: Sequence[int],
                    D_boundaries: Sequence[np.ndarray]) -> BasedChainComplex:
    """C tensor a finite based integer complex D (trivial group):
    boundary(x (x) y) = dx (x) y + (-1)^{|x|} x (x) dy."""
    G = C.group
    Ds = [np.asarray(m, dtype=float) for m in D_boundaries]
    sr = [int(r) for r in D_ranks]
    topC, topD = C.top, len(sr) - 1
    top = topC + topD
    # basis of degree n: [(p, i, q, j)] ordered by (p, i, j)
    bases = []
    for n in range(top + 1):
        cells = []
        for p in range(max(0, n - topD), min(n, topC) + 1):
            q = n - p
            for i in range(C.ranks[p]):
                for j in range(sr[q]):
                    cells.append((p, i, q, j))
        bases.append(cells)
    index = [{cell: k for k, cell in enumerate(b)} for b in bases]
    bnds = []
    for n in range(1, top + 1):
        rows = [
            [GroupRingElement.zero(G) for _ in bases[n - 1]] for _ in bases[n]
        ]
        for r, (p, i, q, j) in enumerate(bases[n]):
            if p >= 1:
                c = C.boundary(p)
                for i2 in range(C.ranks[p - 1]):
                    e = c.entries[i][i2]
                    if not e.is_zero:
                        col = index[n - 1][(p - 1, i2, q, j)]
                        rows[r][col] = rows[r][col] + e
            if q >= 1:
                dmat = Ds[q - 1]
                sign = (-1) ** p
                for j2 in range(sr[q - 1]):
                    v = dmat[j, j2]
                    if v:
                        col = index[n - 1][(p, i, q - 1, j2)]
                        rows[r][col] = rows[r][col] + GroupRingElement(
                            G, {G.identity_key(): sign * v}
                        )
        bnds.append(GroupRingMatrix(G, rows))
    return BasedChainComplex(G, tuple(len(b) for b in bases), tuple(bnds), tower=C.tower)


# ---------------------------------------------------------------------------
# property verifiers
# ---------------------------------------------------------------------------

@dataclass
class VerifierReport:
    ok: bool
    max_residual: float
    detail: dict = field(default_factory=dict)


_DEFAULT_TS = (0.25, 0.4, 0.7, 1.3, 2.0, 3.1, 4.0)


def _curve_values(C: BasedChainComplex, phi: Character, ts) -> list[float]:
    vals = []
    for t in ts:
        v = torsion_at(C, phi, t)
        if v is NON_DET_CLASS:
            raise ValueError(f"non-det-class point at t={t}")
        vals.append(v)
    return vals


def verify_scaling(C: BasedChainComplex, phi: Character, r: float,
                   ts=_DEFAULT_TS, tol: float = 1e-9) -> VerifierReport:
    """rho(X; r*phi)(t) = rho(X; phi)(t^r)."""
    phi_r = phi.as_real().scaled(r)
    lhs = _curve_values(C, phi_r, ts)
    rhs = _curve_values(C, phi.as_real(), [t ** r for t in ts])
    res = max(abs(a - b) for a, b in zip(lhs, rhs))
    return VerifierReport(ok=res <= tol, max_residual=res)


def verify_duality(C: BasedChainComplex, dual: BasedChainComplex, n: int,
                   phi: Character, ts=_DEFAULT_TS, tol: float = 1e-9) -> VerifierReport:
    """rho_dual(t) - (-1)^{n+1} rho(1/t) must be linear in ln t (the reduced
    equivalence-class ambiguity)."""
    lhs = _curve_values(dual, phi, ts)
    rhs = _curve_values(C, phi, [1.0 / t for t in ts])
    resid = [a - (-1) ** (n + 1) * b for a, b in zip(lhs, rhs)]
    logs = np.array([math.log(t) for t in ts])
    slope = float(np.dot(logs, resid) / np.dot(logs, logs)) if np.dot(logs, logs) else 0.0
    fit_res = max(abs(r - slope * l) for r, l in zip(resid, logs))
    return VerifierReport(ok=fit_res <= tol, max_residual=fit_res, detail={"slope": slope})


def verify_restriction(C: BasedChainComplex, phi: Character, moduli,
                       ts=_DEFAULT_TS, tol: float = 1e-9) -> VerifierReport:
    """rho of the restricted complex equals [G:H] * rho of the original
    (the direction forced by the sublattice oracle)."""
    restricted = restrict_complex(C, moduli)
    phi_h = restricted_character(phi, moduli)
    index = math.prod(int(n) for n in moduli)
    lhs = _curve_values(restricted, phi_h, ts)
    rhs = _curve_values(C, phi.as_real(), ts)
    res = max(abs(a - index * b) for a, b in zip(lhs, rhs))
    return VerifierReport(ok=res <= tol, max_residual=res, detail={"index": index})


def verify_base_change(C: BasedChainComplex, phi: Character, change: BasisChange,
                       ts=_DEFAULT_TS, tol: float = 1e-9) -> VerifierReport:
    """Rebasing shifts the curve by exactly phi(trans) * ln t."""
    trans = trans_class(C, change)
    phi_r = phi.as_real()
    shift = sum(v * x for v, x in zip(phi_r.values, trans))
    before = _curve_values(C, phi_r, ts)
    after = _curve_values(rebase_complex(C, change), phi_r, ts)
    res = max(
        abs((a - b) - shift * math.log(t)) for a, b, t in zip(after, before, ts)
    )
    return VerifierReport(ok=res <= tol, max_residual=res, detail={"trans": trans, "shift": shift})


def verify_sum(sub: BasedChainComplex, quot: BasedChainComplex,
               total: BasedChainComplex, phi: Character,
               ts=_DEFAULT_TS, tol: float = 1e-9) -> VerifierReport:
    """Torsions add over degreewise-split short exact sequences."""
    a = _curve_values(sub, phi, ts)
    b = _curve_values(quot, phi, ts)
    c = _curve_values(total, phi, ts)
    res = max(abs(x - y - z) for x, y, z in zip(c, a, b))
    return VerifierReport(ok=res <= tol, max_residual=res)


def verify_product(C: BasedChainComplex, D_ranks, D_boundaries, phi: Character,
                   ts=_DEFAULT_TS, tol: float = 1e-9) -> VerifierReport:
    """rho(C tensor D) = chi(D) * rho(C) pointwise."""
    prod = product_complex(C, D_ranks, D_boundaries)
    chi = sum((-1) ** n * int(r) for n, r in enumerate(D_ranks))
    lhs = _curve_values(prod, phi, ts)
    rhs = _curve_values(C, phi, ts)
    res = max(abs(a - chi * b) for a, b in zip(lhs, rhs))
    return VerifierReport(ok=res <= tol, max_residual=res, detail={"chi": chi})
