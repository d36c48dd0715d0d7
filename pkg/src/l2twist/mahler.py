"""Log-Mahler measures and Fuglede-Kadison determinants over Z^d.

Univariate measures are exact via companion-matrix roots and Jensen's
formula; multivariate ones reduce to univariate by monomial substitution
(an iterated-limit identity), cross-checked by trapezoid quadrature of
ln|p| over the unit torus.  Matrices over C[Z^d] reduce to the Mahler
measure of their classical determinant polynomial.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .grouprings import GroupRingElement, GroupRingMatrix

__all__ = [
    "LaurentPoly",
    "LogDetResult",
    "lead",
    "mahler_exact_univariate",
    "lawton_substitute",
    "minimal_lawton_schedule",
    "mahler_lawton",
    "mahler_quadrature",
    "mahler",
    "det_matrix_over_Zd",
    "rank_fraction_field",
]

#: snap width: roots this close to the unit circle contribute nothing
CIRCLE_SNAP = 1e-10

#: quadrature nodes with |p| below this trigger local refinement
NEAR_ZERO = 1e-14

NEG_INF = float("-inf")


class LaurentPoly:
    """Laurent polynomial in d >= 1 variables with complex coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], complex] | None = None):
        if nvars < 1:
            raise ValueError("need at least one variable")
        self.nvars = nvars
        clean: dict[tuple[int, ...], complex] = {}
        if terms:
            for e, c in terms.items():
                e = tuple(int(x) for x in e)
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} has wrong length")
                c = complex(c)
                if c != 0:
                    clean[e] = clean.get(e, 0) + c
                    if clean[e] == 0:
                        del clean[e]
        self.terms = clean

    # constructors ---------------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> "LaurentPoly":
        return LaurentPoly(nvars)

    @staticmethod
    def constant(nvars: int, c: complex) -> "LaurentPoly":
        return LaurentPoly(nvars, {(0,) * nvars: c})

    @staticmethod
    def variable(nvars: int, i: int, power: int = 1) -> "LaurentPoly":
        e = tuple(power if j == i else 0 for j in range(nvars))
        return LaurentPoly(nvars, {e: 1})

    @staticmethod
    def from_element(x: GroupRingElement) -> "LaurentPoly":
        if not x.group.is_abelian:
            raise ValueError("only elements over Z^d convert to Laurent polynomials")
        if x.group.rank < 1:
            raise ValueError("need rank >= 1")
        return LaurentPoly(x.group.rank, dict(x.terms))

    # queries --------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_integer_exact(self) -> bool:
        return all(c.imag == 0 and float(c.real).is_integer() for c in self.terms.values())

    @property
    def support(self) -> set[tuple[int, ...]]:
        return set(self.terms)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return LaurentPoly(self.nvars, t)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            return LaurentPoly(self.nvars, {e: c * other for e, c in self.terms.items()})
        t: dict[tuple[int, ...], complex] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                t[e] = t.get(e, 0) + ca * cb
        return LaurentPoly(self.nvars, t)

    __rmul__ = __mul__

    def invert_variables(self) -> "LaurentPoly":
        return LaurentPoly(self.nvars, {tuple(-x for x in e): c for e, c in self.terms.items()})

    def translated(self) -> "LaurentPoly":
        """Multiply by the monomial shifting the support to the nonnegative orthant."""
        if self.is_zero:
            return self
        mins = [min(e[i] for e in self.terms) for i in range(self.nvars)]
        return LaurentPoly(
            self.nvars,
            {tuple(x - m for x, m in zip(e, mins)): c for e, c in self.terms.items()},
        )

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at points; z has shape (..., nvars)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for e, c in self.terms.items():
            term = np.full(z.shape[:-1], c, dtype=complex)
            for i, k in enumerate(e):
                if k:
                    term = term * z[..., i] ** k
            out += term
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LaurentPoly)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        if self.is_zero:
            return "0"
        return " + ".join(f"({c:g})*z^{e}" for e, c in sorted(self.terms.items()))


@dataclass(frozen=True)
class LogDetResult:
    """A log-determinant value (natural-log scale) with provenance."""

    value: float
    method: str  # exact-univariate | lawton | quadrature | matrix-reduction
    error_estimate: float | None = 0.0

    @property
    def is_sentinel(self) -> bool:
        return self.value == NEG_INF


# ---------------------------------------------------------------------------
# leading coefficient (lexicographic, last coordinate compared first)
# ---------------------------------------------------------------------------

def _lex_key(e: tuple[int, ...]) -> tuple[int, ...]:
    return e[::-1]


def lead(p: LaurentPoly) -> complex:
    """Coefficient of the lexicographically maximal exponent (last coordinate
    dominates)."""
    if p.is_zero:
        raise ValueError("the zero polynomial has no leading coefficient")
    e = max(p.terms, key=_lex_key)
    return p.terms[e]


# ---------------------------------------------------------------------------
# univariate: Jensen's formula via companion-matrix roots
# ---------------------------------------------------------------------------

#: roots this close to the circle get the cluster treatment below
NEAR_CIRCLE = 1e-2

#: near-circle roots within this distance are treated as one multiple root
CLUSTER_RADIUS = 5e-3


def _cluster_sum(roots: np.ndarray) -> float:
    """Jensen contribution of near-circle roots, multiplicity-robust.

    A repeated root of multiplicity m scatters numerically like eps^(1/m),
    far beyond CIRCLE_SNAP, so thresholding each scattered copy separately
    loses ~eps^(1/m) per copy.  The first-order perturbations cancel in the
    cluster mean, so grouping nearby roots and deciding inside/outside once
    per cluster centroid restores full accuracy.
    """
    idx = np.arange(roots.size)
    parent = idx.copy()

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(roots.size):
        for j in range(i + 1, roots.size):
            if abs(roots[i] - roots[j]) < CLUSTER_RADIUS:
                parent[find(i)] = find(j)
    total = 0.0
    for rep in set(find(i) for i in range(roots.size)):
        members = roots[[i for i in range(roots.size) if find(i) == rep]]
        mod = abs(np.mean(members))
        if mod > 1.0 + CIRCLE_SNAP:
            total += members.size * math.log(mod)
    return total


def _jensen_from_coeffs(c: np.ndarray) -> float:
    """ln|lead| + sum of ln|root| over roots outside the unit circle."""
    deg = len(c) - 1
    value = math.log(abs(c[0]))
    if deg == 0:
        return value
    roots = np.roots(c)  # balanced companion-matrix eigenvalues
    mods = np.abs(roots)
    near = np.abs(mods - 1.0) < NEAR_CIRCLE
    far_out = mods[~near & (mods > 1.0)]
    value += float(np.sum(np.log(far_out))) if far_out.size else 0.0
    if np.any(near):
        value += _cluster_sum(roots[near])
    return value


def mahler_exact_univariate(p: LaurentPoly) -> LogDetResult:
    """Jensen's formula via companion-matrix roots.

    Roots within CIRCLE_SNAP of the circle contribute nothing; Jensen's
    formula is insensitive to on-circle roots and the snap prevents spurious
    1e-12-size contributions.
    """
    if p.is_zero:
        raise ValueError("Mahler measure of the zero polynomial")
    if p.nvars != 1:
        raise ValueError("mahler_exact_univariate needs one variable")
    q = p.translated()
    deg = max(e[0] for e in q.terms)
    coeffs = np.zeros(deg + 1, dtype=complex)
    for (e,), c in q.terms.items():
        coeffs[deg - e] = c  # numpy order: highest degree first
    value = _jensen_from_coeffs(coeffs)
    return LogDetResult(value=value, method="exact-univariate", error_estimate=0.0)


# ---------------------------------------------------------------------------
# multivariate: monomial substitution (iterated-limit reduction)
# ---------------------------------------------------------------------------

def minimal_lawton_schedule(p: LaurentPoly) -> tuple[int, ...]:
    """The smallest legal substitution schedule (k_2, ..., k_d).

    With the support translated to the nonnegative orthant and
    b_i = 1 + max i-th exponent, legality means k_2 >= b_1 and
    k_{j+1} >= b_j * k_j.
    """
    if p.is_zero:
        raise ValueError("zero polynomial")
    q = p.translated()
    d = p.nvars
    if d == 1:
        return ()
    b = [1 + max(e[i] for e in q.terms) for i in range(d - 1)]
    ks: list[int] = []
    prev = 1
    for i in range(d - 1):
        k = b[i] * prev if ks else b[0]
        ks.append(k)
        prev = k
    return tuple(ks)


def _schedule_ok(p: LaurentPoly, schedule: tuple[int, ...]) -> bool:
    minimal = minimal_lawton_schedule(p)
    if len(schedule) != len(minimal):
        return False
    q = p.translated()
    b = [1 + max(e[i] for e in q.terms) for i in range(p.nvars - 1)]
    prev = None
    for i, k in enumerate(schedule):
        bound = b[0] if i == 0 else b[i] * prev
        if k < bound:
            return False
        prev = k
    return True


def lawton_substitute(p: LaurentPoly, schedule: Iterable[int]) -> LaurentPoly:
    """q(z) = p(z, z^{k_2}, ..., z^{k_d}); preserves lead when the schedule is
    legal."""
    if p.is_zero:
        raise ValueError("zero polynomial")
    schedule = tuple(int(k) for k in schedule)
    if p.nvars == 1:
        if schedule:
            raise ValueError("univariate polynomials take an empty schedule")
        return p
    if not _schedule_ok(p, schedule):
        raise ValueError(
            f"substitution schedule {schedule} violates the support constraints; "
            f"minimal legal schedule is {minimal_lawton_schedule(p)}"
        )
    q = p.translated()
    weights = (1,) + schedule
    terms: dict[tuple[int, ...], complex] = {}
    for e, c in q.terms.items():
        n = sum(w * x for w, x in zip(weights, e))
        terms[(n,)] = terms.get((n,), 0) + c
    return LaurentPoly(1, terms)


def mahler_lawton(
    p: LaurentPoly,
    tol: float = 1e-4,
    max_levels: int = 12,
    schedule: tuple[int, ...] | None = None,
    max_degree: int = 1200,
) -> LogDetResult:
    """Evaluate the univariate measure on successive substitution schedules.

    The default schedule doubles geometrically from the minimal legal one;
    the reported error estimate is the last two-step difference.  Levels
    whose substituted degree would exceed max_degree are skipped, since
    root-finding cost grows cubically in the degree.
    """
    if p.is_zero:
        raise ValueError("zero polynomial")
    if p.nvars == 1:
        return mahler_exact_univariate(p)
    base = tuple(schedule) if schedule is not None else minimal_lawton_schedule(p)
    if not _schedule_ok(p, base):
        raise ValueError(
            f"substitution schedule {base} violates the support constraints; "
            f"minimal legal schedule is {minimal_lawton_schedule(p)}"
        )
    q = p.translated()
    spans = [max(e[i] for e in q.terms) for i in range(p.nvars)]
    values: list[float] = []
    factor = 1
    for _ in range(max_levels):
        ks = tuple(k * factor for k in base)
        degree = spans[0] + sum(k * s for k, s in zip(ks, spans[1:]))
        if values and degree > max_degree:
            break
        values.append(mahler_exact_univariate(lawton_substitute(p, ks)).value)
        if len(values) >= 2 and abs(values[-1] - values[-2]) < tol:
            break
        factor *= 2
    err = abs(values[-1] - values[-2]) if len(values) >= 2 else None
    return LogDetResult(value=values[-1], method="lawton", error_estimate=err)


# ---------------------------------------------------------------------------
# quadrature oracle: mean of ln|p| over the unit torus
# ---------------------------------------------------------------------------

def _torus_log_mean(p: LaurentPoly, N: int) -> float:
    d = p.nvars
    angles = 2.0 * np.pi * np.arange(N) / N
    axes = np.exp(1j * angles)
    grids = np.meshgrid(*([axes] * d), indexing="ij")
    z = np.stack(grids, axis=-1)
    vals = np.abs(p.evaluate(z))
    tiny = vals < NEAR_ZERO
    logs = np.where(tiny, 0.0, np.log(np.maximum(vals, NEAR_ZERO)))
    if np.any(tiny):
        # compensate near-zero nodes by a 4x-refined ring of samples around them
        step = 2.0 * np.pi / N
        offsets = np.array([-0.375, -0.125, 0.125, 0.375]) * step
        for idx in np.argwhere(tiny):
            base = angles[idx]
            ring = np.stack(
                np.meshgrid(*[(b + offsets) for b in base], indexing="ij"), axis=-1
            )
            ringvals = np.abs(p.evaluate(np.exp(1j * ring)))
            good = ringvals >= NEAR_ZERO
            logs[tuple(idx)] = (
                float(np.mean(np.log(ringvals[good]))) if np.any(good) else math.log(NEAR_ZERO)
            )
    return float(np.mean(logs))


def mahler_quadrature(p: LaurentPoly, N: int = 1024) -> LogDetResult:
    """Tensor trapezoid average of ln|p| over the unit torus.

    error_estimate is the difference against the half-resolution grid.
    """
    if p.is_zero:
        raise ValueError("zero polynomial")
    if N < 4:
        raise ValueError("need at least 4 quadrature nodes per axis")
    value = _torus_log_mean(p, N)
    coarse = _torus_log_mean(p, max(4, N // 2))
    return LogDetResult(value=value, method="quadrature", error_estimate=abs(value - coarse))


def mahler(p: LaurentPoly, tol: float = 1e-4) -> LogDetResult:
    """Exact univariate route when d = 1, substitution route otherwise."""
    return mahler_exact_univariate(p) if p.nvars == 1 else mahler_lawton(p, tol=tol)


# ---------------------------------------------------------------------------
# determinants and rank of matrices over C[Z^d]
# ---------------------------------------------------------------------------

def _poly_matrix(A: GroupRingMatrix) -> list[list[LaurentPoly]]:
    return [[LaurentPoly.from_element(e) for e in row] for row in A.entries]


def _det_poly(M: list[list[LaurentPoly]], nvars: int) -> LaurentPoly:
    """Classical determinant by cofactor expansion (exact on integer input;
    desk-scale matrices only)."""
    n = len(M)
    if n == 0:
        return LaurentPoly.constant(nvars, 1.0)
    if n == 1:
        return M[0][0]
    det = LaurentPoly.zero(nvars)
    rest = [row[1:] for row in M]
    for i in range(n):
        if M[i][0].is_zero:
            continue
        minor = [rest[k] for k in range(n) if k != i]
        term = M[i][0] * _det_poly(minor, nvars)
        det = det + (term if i % 2 == 0 else -term)
    return det


@dataclass(frozen=True)
class MatrixDetResult:
    detpoly: LaurentPoly
    logdet: LogDetResult


def det_matrix_over_Zd(
    A: GroupRingMatrix, tol: float = 1e-4, cross_check: bool = True
) -> MatrixDetResult:
    """Determinant polynomial of a square matrix over C[Z^d] and its
    log-Mahler measure.

    A vanishing determinant polynomial signals a non-weak-isomorphism; the
    log value is then the -inf sentinel and callers must branch before doing
    arithmetic with it.
    """
    if A.rows != A.cols:
        raise ValueError(f"determinant needs a square matrix, got {A.shape}")
    if not A.group.is_abelian or A.group.rank < 1:
        raise ValueError("det_matrix_over_Zd needs a matrix over Z^d with d >= 1")
    d = A.group.rank
    detpoly = _det_poly(_poly_matrix(A), d)
    if detpoly.is_zero:
        return MatrixDetResult(
            detpoly, LogDetResult(NEG_INF, method="matrix-reduction", error_estimate=None)
        )
    if d == 1:
        res = mahler_exact_univariate(detpoly)
    else:
        res = mahler_lawton(detpoly, tol=tol)
        if cross_check:
            quad = mahler_quadrature(detpoly, N=256)
            drift = abs(quad.value - res.value)
            lerr = res.error_estimate if res.error_estimate is not None else drift
            qerr = quad.error_estimate if quad.error_estimate is not None else drift
            # keep whichever estimate carries the tighter self-reported error
            if qerr < lerr:
                res = LogDetResult(quad.value, method="quadrature", error_estimate=max(qerr, min(drift, lerr)))
            else:
                res = LogDetResult(res.value, method=res.method, error_estimate=max(lerr, min(drift, qerr)))
    return MatrixDetResult(detpoly, LogDetResult(res.value, "matrix-reduction", res.error_estimate))


def rank_fraction_field(A: GroupRingMatrix, seed: int = 0) -> int:
    """Rank over the fraction field of C[Z^d].

    Evaluates at two independent uniformly random unit-modulus points; on
    disagreement falls back to an exact maximal-nonvanishing-minor search.
    """
    if not A.group.is_abelian:
        raise ValueError("rank_fraction_field needs a matrix over Z^d")
    if A.rows == 0 or A.cols == 0:
        return 0
    d = max(A.group.rank, 1)
    P = _poly_matrix(A) if A.group.rank >= 1 else None
    rng = np.random.default_rng(seed)

    def rank_at() -> int:
        z = np.exp(2j * np.pi * rng.random(d))
        M = np.zeros((A.rows, A.cols), dtype=complex)
        for i in range(A.rows):
            for j in range(A.cols):
                for e, c in A.entries[i][j].terms.items():
                    M[i, j] += c * np.prod(z ** np.array(e)) if e else c
        return int(np.linalg.matrix_rank(M))

    r1, r2 = rank_at(), rank_at()
    if r1 == r2:
        return r1
    # exact fallback: largest k with a nonvanishing k x k minor
    for k in range(min(A.rows, A.cols), 0, -1):
        for rows in itertools.combinations(range(A.rows), k):
            for cols in itertools.combinations(range(A.cols), k):
                sub = [[P[i][j] for j in cols] for i in rows]
                if not _det_poly(sub, A.group.rank).is_zero:
                    return k
    return 0
