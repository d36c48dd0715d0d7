"""Exact arithmetic for group rings and matrices over them.

Elements are finite formal sums of group elements with complex coefficients.
Two kinds of groups are supported: free abelian groups Z^d (keys are integer
exponent tuples) and finitely presented groups (keys are freely reduced words
of signed generator indices).  Presented-group keys are NOT normalized modulo
relators; all numerics for presented groups route through finite quotients.

Coefficients are double-precision complex.  Matrices built from integer data
keep an integer-exact flag so determinant pipelines can rely on exact integer
arithmetic before any floating step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

__all__ = [
    "GroupDescriptor",
    "GroupRingElement",
    "GroupRingMatrix",
    "Character",
    "reduce_word",
    "one_norm",
    "support",
    "involution",
    "check_character",
    "push_forward",
    "abelianization_map",
    "mod_map",
]


# ---------------------------------------------------------------------------
# groups and keys
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupDescriptor:
    """Either Z^d (kind='abelian', rank=d) or a finite presentation
    (kind='presented', generator count + relator words)."""

    kind: str
    rank: int = 0
    generators: int = 0
    relators: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in ("abelian", "presented"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind == "abelian" and self.rank < 0:
            raise ValueError("rank must be >= 0")
        if self.kind == "presented":
            for w in self.relators:
                if w != reduce_word(w):
                    raise ValueError(f"relator {w} is not freely reduced")

    @staticmethod
    def abelian(rank: int) -> "GroupDescriptor":
        return GroupDescriptor(kind="abelian", rank=rank)

    @staticmethod
    def presented(generators: int, relators: Iterable[Iterable[int]] = ()) -> "GroupDescriptor":
        rels = tuple(tuple(w) for w in relators)
        return GroupDescriptor(kind="presented", generators=generators, relators=rels)

    @property
    def is_abelian(self) -> bool:
        return self.kind == "abelian"

    def identity_key(self) -> tuple[int, ...]:
        return (0,) * self.rank if self.is_abelian else ()

    def mul_key(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        if self.is_abelian:
            return tuple(x + y for x, y in zip(a, b))
        return reduce_word(a + b)

    def inv_key(self, a: tuple[int, ...]) -> tuple[int, ...]:
        if self.is_abelian:
            return tuple(-x for x in a)
        return tuple(-g for g in reversed(a))

    def check_key(self, key: tuple[int, ...]) -> tuple[int, ...]:
        key = tuple(int(k) for k in key)
        if self.is_abelian:
            if len(key) != self.rank:
                raise ValueError(f"abelian key {key} has wrong length, expected {self.rank}")
        else:
            if key != reduce_word(key):
                raise ValueError(f"word {key} is not freely reduced")
            for g in key:
                if g == 0 or abs(g) > self.generators:
                    raise ValueError(f"generator index {g} out of range")
        return key


def reduce_word(word: Iterable[int]) -> tuple[int, ...]:
    """Freely reduce a word of signed generator indices (1-based; -i = i^-1)."""
    out: list[int] = []
    for g in word:
        if out and out[-1] == -g:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

_ZERO_TOL = 0.0  # exact pruning only; zero coefficients are never stored


class GroupRingElement:
    """Finite formal sum of group elements with complex coefficients.

    Immutable after construction; all arithmetic returns new elements.
    """

    __slots__ = ("group", "terms")

    def __init__(self, group: GroupDescriptor, terms: Mapping[tuple[int, ...], complex] | None = None):
        self.group = group
        clean: dict[tuple[int, ...], complex] = {}
        if terms:
            for key, coeff in terms.items():
                c = complex(coeff)
                if c != 0:
                    k = group.check_key(tuple(key))
                    clean[k] = clean.get(k, 0) + c
                    if clean[k] == 0:
                        del clean[k]
        self.terms = clean

    # constructors ---------------------------------------------------------

    @staticmethod
    def zero(group: GroupDescriptor) -> "GroupRingElement":
        return GroupRingElement(group)

    @staticmethod
    def one(group: GroupDescriptor) -> "GroupRingElement":
        return GroupRingElement(group, {group.identity_key(): 1.0})

    @staticmethod
    def monomial(group: GroupDescriptor, key, coeff: complex = 1.0) -> "GroupRingElement":
        return GroupRingElement(group, {tuple(key): coeff})

    # queries --------------------------------------------------------------

    @property
    def support(self) -> set[tuple[int, ...]]:
        return set(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_integer_exact(self) -> bool:
        return all(c.imag == 0 and float(c.real).is_integer() for c in self.terms.values())

    def l1(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    def coefficient(self, key) -> complex:
        return self.terms.get(tuple(key), 0j)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        self._same_group(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return GroupRingElement(self.group, terms)

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return self + (-other)

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(self.group, {k: -c for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, GroupRingElement):
            self._same_group(other)
            terms: dict[tuple[int, ...], complex] = {}
            for ka, ca in self.terms.items():
                for kb, cb in other.terms.items():
                    k = self.group.mul_key(ka, kb)
                    terms[k] = terms.get(k, 0) + ca * cb
            return GroupRingElement(self.group, terms)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c: complex) -> "GroupRingElement":
        return GroupRingElement(self.group, {k: c * v for k, v in self.terms.items()})

    def map_coefficients(self, fn: Callable[[tuple[int, ...], complex], complex]) -> "GroupRingElement":
        return GroupRingElement(self.group, {k: fn(k, c) for k, c in self.terms.items()})

    def bar(self) -> "GroupRingElement":
        """Involution: conjugate coefficients, invert group elements."""
        return GroupRingElement(
            self.group,
            {self.group.inv_key(k): complex(c).conjugate() for k, c in self.terms.items()},
        )

    def _same_group(self, other: "GroupRingElement"):
        if self.group != other.group:
            raise ValueError("elements live over different groups")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupRingElement)
            and self.group == other.group
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = [f"({c:g})*{k}" for k, c in sorted(self.terms.items())]
        return " + ".join(bits)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class GroupRingMatrix:
    """Rectangular matrix over a group ring; the universal input object.

    Convention: matrices act by right multiplication on row vectors, so an
    r x s matrix represents a map (CG)^r -> (CG)^s.
    """

    __slots__ = ("group", "rows", "cols", "entries")

    def __init__(self, group: GroupDescriptor, entries: list[list[GroupRingElement]]):
        self.group = group
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0
        for row in entries:
            if len(row) != self.cols:
                raise ValueError("ragged matrix")
            for e in row:
                if e.group != group:
                    raise ValueError("entry over wrong group")
        self.entries = entries

    # constructors ---------------------------------------------------------

    @staticmethod
    def zero(group: GroupDescriptor, rows: int, cols: int) -> "GroupRingMatrix":
        z = GroupRingElement.zero(group)
        return GroupRingMatrix(group, [[z for _ in range(cols)] for _ in range(rows)])

    @staticmethod
    def identity(group: GroupDescriptor, n: int) -> "GroupRingMatrix":
        one = GroupRingElement.one(group)
        z = GroupRingElement.zero(group)
        return GroupRingMatrix(group, [[one if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def from_terms(group: GroupDescriptor, grid: list[list[Mapping]]) -> "GroupRingMatrix":
        return GroupRingMatrix(group, [[GroupRingElement(group, e) for e in row] for row in grid])

    # queries --------------------------------------------------------------

    def __getitem__(self, ij) -> GroupRingElement:
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_integer_exact(self) -> bool:
        return all(e.is_integer_exact for row in self.entries for e in row)

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.entries for e in row)

    def one_norm(self) -> float:
        """r*s * max entrywise l1 coefficient norm; 0 for empty/zero matrices."""
        if self.rows == 0 or self.cols == 0:
            return 0.0
        m = max(e.l1() for row in self.entries for e in row)
        return self.rows * self.cols * m

    def support(self) -> set[tuple[int, ...]]:
        out: set[tuple[int, ...]] = set()
        for row in self.entries:
            for e in row:
                out |= e.support
        return out

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if self.shape != other.shape or self.group != other.group:
            raise ValueError("dimension or group mismatch in matrix addition")
        return GroupRingMatrix(
            self.group,
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def __neg__(self) -> "GroupRingMatrix":
        return GroupRingMatrix(self.group, [[-e for e in row] for row in self.entries])

    def __sub__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        return self + (-other)

    def __matmul__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if self.cols != other.rows:
            raise ValueError(f"dimension mismatch: {self.shape} @ {other.shape}")
        if self.group != other.group:
            raise ValueError("group mismatch in matrix product")
        z = GroupRingElement.zero(self.group)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = z
                for k in range(self.cols):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if not a.is_zero and not b.is_zero:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return GroupRingMatrix(self.group, out)

    def scale(self, c: complex) -> "GroupRingMatrix":
        return GroupRingMatrix(self.group, [[e.scale(c) for e in row] for row in self.entries])

    def star(self) -> "GroupRingMatrix":
        """Involution-transpose (the adjoint used by the Laplacian)."""
        out = [[self.entries[i][j].bar() for i in range(self.rows)] for j in range(self.cols)]
        return GroupRingMatrix(self.group, out) if out else GroupRingMatrix.zero(self.group, self.cols, self.rows)

    def map_entries(self, fn: Callable[[GroupRingElement], GroupRingElement]) -> "GroupRingMatrix":
        return GroupRingMatrix(self.group, [[fn(e) for e in row] for row in self.entries])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupRingMatrix)
            and self.group == other.group
            and self.entries == other.entries
        )

    def __repr__(self) -> str:
        return f"GroupRingMatrix({self.rows}x{self.cols} over {self.group.kind})"


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Character:
    """Homomorphism data phi: G -> R or G -> Z^{d'}, given by generator values.

    For abelian G the generators are the standard basis of Z^d.  Real targets
    store one float per generator; Z^{d'} targets store one integer vector per
    generator.
    """

    target: str  # 'R' or 'Zd'
    values: tuple = ()  # floats (target 'R') or int tuples (target 'Zd')
    target_rank: int = 1

    def __post_init__(self):
        if self.target not in ("R", "Zd"):
            raise ValueError(f"unknown character target {self.target!r}")
        if self.target == "R":
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        else:
            vals = tuple(tuple(int(x) for x in v) for v in self.values)
            for v in vals:
                if len(v) != self.target_rank:
                    raise ValueError("value length does not match target rank")
            object.__setattr__(self, "values", vals)

    @staticmethod
    def real(values: Iterable[float]) -> "Character":
        return Character(target="R", values=tuple(values))

    @staticmethod
    def to_zd(values: Iterable[Iterable[int]], target_rank: int) -> "Character":
        return Character(target="Zd", values=tuple(tuple(v) for v in values), target_rank=target_rank)

    @staticmethod
    def identity(d: int) -> "Character":
        """The identity Z^d -> Z^d."""
        basis = tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))
        return Character(target="Zd", values=basis, target_rank=d)

    def evaluate(self, group: GroupDescriptor, key: tuple[int, ...]):
        """phi(g) for a group-element key: a float (target R) or an int tuple."""
        if group.is_abelian:
            if len(self.values) != group.rank:
                raise ValueError("character values do not match the group rank")
            if self.target == "R":
                return float(sum(v * k for v, k in zip(self.values, key)))
            acc = [0] * self.target_rank
            for v, k in zip(self.values, key):
                for i in range(self.target_rank):
                    acc[i] += v[i] * k
            return tuple(acc)
        # presented group: signed sum along the word
        if self.target == "R":
            total = 0.0
            for g in key:
                total += self.values[abs(g) - 1] * (1 if g > 0 else -1)
            return total
        acc = [0] * self.target_rank
        for g in key:
            sgn = 1 if g > 0 else -1
            v = self.values[abs(g) - 1]
            for i in range(self.target_rank):
                acc[i] += sgn * v[i]
        return tuple(acc)

    def scaled(self, r: float) -> "Character":
        if self.target != "R":
            raise ValueError("only real characters can be scaled by a real number")
        return Character.real(r * v for v in self.values)

    def as_real(self) -> "Character":
        """Collapse a Z^1-valued character to a real one."""
        if self.target == "R":
            return self
        if self.target_rank != 1:
            raise ValueError("only rank-1 integer characters collapse to R")
        return Character.real(v[0] for v in self.values)


@dataclass
class CharacterReport:
    ok: bool
    relator_index: int | None = None
    residual: object = None

    def __bool__(self) -> bool:
        return self.ok


def check_character(phi: Character, group: GroupDescriptor) -> CharacterReport:
    """Well-definedness of phi on generators: every relator must map to zero."""
    ngen = group.rank if group.is_abelian else group.generators
    if len(phi.values) != ngen:
        raise ValueError(f"expected {ngen} generator values, got {len(phi.values)}")
    if group.is_abelian:
        return CharacterReport(ok=True)
    for idx, rel in enumerate(group.relators):
        residual = phi.evaluate(group, rel)
        zero = residual == 0.0 if phi.target == "R" else all(x == 0 for x in residual)
        if not zero:
            return CharacterReport(ok=False, relator_index=idx, residual=residual)
    return CharacterReport(ok=True)


# ---------------------------------------------------------------------------
# push-forward along quotients / abelianization
# ---------------------------------------------------------------------------

def push_forward(
    A: GroupRingMatrix,
    key_map: Callable[[tuple[int, ...]], tuple[int, ...]],
    target: GroupDescriptor,
) -> GroupRingMatrix:
    """Apply a group homomorphism entrywise, merging keys with equal images.

    ||push_forward(A)||_1 <= ||A||_1 by the triangle inequality.
    """

    def push(e: GroupRingElement) -> GroupRingElement:
        terms: dict[tuple[int, ...], complex] = {}
        for k, c in e.terms.items():
            kk = target.check_key(key_map(k))
            terms[kk] = terms.get(kk, 0) + c
        return GroupRingElement(target, terms)

    return GroupRingMatrix(target, [[push(e) for e in row] for row in A.entries])


def abelianization_map(group: GroupDescriptor) -> tuple[Callable, GroupDescriptor]:
    """The map G -> Z^{#generators} sending each generator to a basis vector.

    For presented groups this is the free-abelianized exponent sum (torsion in
    H_1 is ignored; this is the H_1(G)_f quotient used by trans classes).
    """
    if group.is_abelian:
        return (lambda k: k), group
    d = group.generators
    target = GroupDescriptor.abelian(d)

    def amap(word: tuple[int, ...]) -> tuple[int, ...]:
        v = [0] * d
        for g in word:
            v[abs(g) - 1] += 1 if g > 0 else -1
        return tuple(v)

    return amap, target


def mod_map(moduli: Iterable[int]) -> tuple[Callable, GroupDescriptor]:
    """The map Z^d -> (Z/N_1) x ... x (Z/N_d), with keys reduced mod N_l.

    The target is modelled on the abelian descriptor of the same rank; keys
    are canonical residues in [0, N_l).
    """
    Ns = tuple(int(n) for n in moduli)
    if any(n <= 0 for n in Ns):
        raise ValueError("moduli must be positive")
    target = GroupDescriptor.abelian(len(Ns))
    return (lambda k: tuple(x % n for x, n in zip(k, Ns))), target


# functional aliases matching the operation names ---------------------------

def one_norm(A: GroupRingMatrix) -> float:
    return A.one_norm()


def support(A: GroupRingMatrix) -> set[tuple[int, ...]]:
    return A.support()


def involution(x: GroupRingElement) -> GroupRingElement:
    return x.bar()
