"""Exact finite combinatorics: Boolean algebras, orthomodular lattices and
piecewise complete Boolean algebras (pcbas), plus the colimit algebra F(B).

Nothing in this module uses floating point.  Lattices are small (64
elements by default) and every property is checked by exhaustive scan.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import DomainError

DEFAULT_MAX_ELEMENTS = 64


# ---------------------------------------------------------------------------
# exact scalars

@dataclass(frozen=True)
class GaussianRational:
    """A complex number with rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def of(cls, z) -> "GaussianRational":
        if isinstance(z, GaussianRational):
            return z
        if isinstance(z, complex):
            return cls(Fraction(z.real), Fraction(z.imag))
        if isinstance(z, (tuple, list)):
            re, im = z
            return cls(Fraction(re), Fraction(im))
        return cls(Fraction(z))

    def __add__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        return f"{self.re}+{self.im}i" if self.im > 0 else f"{self.re}{self.im}i"

    def to_json(self) -> list[str]:
        return [str(self.re), str(self.im)]


ZERO = GaussianRational(0)
ONE = GaussianRational(1)


# ---------------------------------------------------------------------------
# Boolean algebras and Stone duality

@dataclass(frozen=True)
class FiniteBooleanAlgebra:
    """The powerset algebra on ``atom_count`` atoms; elements are bit masks."""

    atom_count: int

    def __post_init__(self):
        if self.atom_count < 0:
            raise DomainError("atom_count must be >= 0")

    @property
    def top(self) -> int:
        return (1 << self.atom_count) - 1

    def elements(self) -> range:
        return range(1 << self.atom_count)

    def __len__(self) -> int:
        return 1 << self.atom_count

    def join(self, a: int, b: int) -> int:
        return a | b

    def meet(self, a: int, b: int) -> int:
        return a & b

    def complement(self, a: int) -> int:
        return self.top & ~a

    def leq(self, a: int, b: int) -> bool:
        return a & ~b == 0

    def name(self, a: int) -> str:
        return "{" + ",".join(str(k) for k in range(self.atom_count) if a >> k & 1) + "}"

    def as_oml(self, max_elements: int = DEFAULT_MAX_ELEMENTS) -> "FiniteOml":
        elems = list(self.elements())
        return FiniteOml(
            elements=tuple(self.name(a) for a in elems),
            leq=frozenset((a, b) for a in elems for b in elems if self.leq(a, b)),
            ortho=tuple(self.complement(a) for a in elems),
            max_elements=max_elements,
        )


def boolean_algebra(n: int) -> FiniteBooleanAlgebra:
    return FiniteBooleanAlgebra(n)


@dataclass(frozen=True)
class Character:
    """The point of the Stone space sitting at one atom: ``b -> (atom <= b)``."""

    atom: int

    def __call__(self, b: int) -> bool:
        return bool(b >> self.atom & 1)


def stone_spectrum(B: FiniteBooleanAlgebra) -> list[Character]:
    return [Character(k) for k in range(B.atom_count)]


@dataclass(frozen=True)
class FuncAlgebra:
    """C^atoms with exact entries, and the report on its projection lattice."""

    dimension: int
    projections: tuple[tuple[GaussianRational, ...], ...]
    isomorphic: bool

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "projection_count": len(self.projections),
            "isomorphic_to_input": self.isomorphic,
        }


def func_algebra(B: FiniteBooleanAlgebra) -> FuncAlgebra:
    """Continuous functions on the Stone space of ``B``, with its projections.

    Projections are the vectors ``x`` with ``x*x = x = conj(x)``; coordinatewise
    the only solutions are 0 and 1.  The map ``b -> indicator(b)`` is checked to
    be an order- and complement-preserving bijection onto them.
    """
    n = B.atom_count
    chars = stone_spectrum(B)
    candidates = itertools.product((ZERO, ONE), repeat=n)
    projections = tuple(
        x for x in candidates
        if all(c * c == c and c.conjugate() == c for c in x)
    )
    indicator = {b: tuple(ONE if ch(b) else ZERO for ch in chars) for b in B.elements()}
    iso = len(set(indicator.values())) == len(B) and set(indicator.values()) == set(projections)
    if iso:
        for a in B.elements():
            comp = tuple(ONE - c for c in indicator[a])
            iso &= comp == indicator[B.complement(a)]
            for b in B.elements():
                below = tuple(x * y for x, y in zip(indicator[a], indicator[b])) == indicator[a]
                iso &= below == B.leq(a, b)
    return FuncAlgebra(dimension=n, projections=projections, isomorphic=iso)


# ---------------------------------------------------------------------------
# orthomodular lattices

def _relation_matrix(n: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    m = np.zeros((n, n), dtype=bool)
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise DomainError(f"relation pair ({i}, {j}) out of range")
        m[i, j] = True
    return m


def _least(candidates: np.ndarray, order: np.ndarray) -> int | None:
    """The element of ``candidates`` below every other candidate, if any."""
    idx = np.flatnonzero(candidates)
    for k in idx:
        if order[k, idx].all():
            return int(k)
    return None


@dataclass(frozen=True)
class FiniteOml:
    """A finite orthomodular lattice given by an order table and an involution.

    Construction validates every axiom exhaustively and raises
    :class:`DomainError` naming the first violation.
    """

    elements: tuple[str, ...]
    leq: frozenset[tuple[int, int]]
    ortho: tuple[int, ...]
    max_elements: int = field(default=DEFAULT_MAX_ELEMENTS, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "leq", frozenset((int(i), int(j)) for i, j in self.leq))
        object.__setattr__(self, "ortho", tuple(int(k) for k in self.ortho))
        n = len(self.elements)
        if n == 0:
            raise DomainError("a lattice needs at least one element")
        if n > self.max_elements:
            raise DomainError(f"{n} elements exceeds the cap of {self.max_elements}")
        if len(self.ortho) != n:
            raise DomainError("ortho must list one complement per element")
        self._validate()

    @cached_property
    def order(self) -> np.ndarray:
        return _relation_matrix(len(self.elements), self.leq)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, name: str) -> int:
        return self.elements.index(name)

    def _validate(self) -> None:
        n, L = len(self), self.order
        if not L.diagonal().all():
            raise DomainError("order is not reflexive")
        anti = L & L.T & ~np.eye(n, dtype=bool)
        if anti.any():
            i, j = np.argwhere(anti)[0]
            raise DomainError(f"order is not antisymmetric at ({self.elements[i]}, {self.elements[j]})")
        trans = (L.astype(np.int64) @ L.astype(np.int64) > 0) & ~L
        if trans.any():
            i, j = np.argwhere(trans)[0]
            raise DomainError(f"order is not transitive at ({self.elements[i]}, {self.elements[j]})")
        join = np.empty((n, n), dtype=np.int64)
        meet = np.empty((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i, n):
                up = _least(L[i] & L[j], L)
                down = _least(L[:, i] & L[:, j], L.T)
                if up is None or down is None:
                    raise DomainError(f"no join/meet for ({self.elements[i]}, {self.elements[j]})")
                join[i, j] = join[j, i] = up
                meet[i, j] = meet[j, i] = down
        object.__setattr__(self, "_join", join)
        object.__setattr__(self, "_meet", meet)
        bottom = _least(np.ones(n, dtype=bool), L)
        top = _least(np.ones(n, dtype=bool), L.T)
        object.__setattr__(self, "bottom", bottom)
        object.__setattr__(self, "top", top)
        o = self.ortho
        for i in range(n):
            if not 0 <= o[i] < n or o[o[i]] != i:
                raise DomainError(f"ortho is not an involution at {self.elements[i]}")
            if join[i, o[i]] != top or meet[i, o[i]] != bottom:
                raise DomainError(f"{self.elements[o[i]]} is not a complement of {self.elements[i]}")
        for i, j in self.leq:
            if not L[o[j], o[i]]:
                raise DomainError(f"ortho does not reverse {self.elements[i]} <= {self.elements[j]}")
            if join[i, meet[o[i], j]] != j:
                raise DomainError(f"orthomodular law fails for {self.elements[i]} <= {self.elements[j]}")

    def join(self, a: int, b: int) -> int:
        return int(self._join[a, b])

    def meet(self, a: int, b: int) -> int:
        return int(self._meet[a, b])

    def le(self, a: int, b: int) -> bool:
        return bool(self.order[a, b])

    def sup(self, items: Iterable[int]) -> int:
        acc = self.bottom
        for k in items:
            acc = self.join(acc, k)
        return acc

    def commutator(self, p: int, q: int) -> int:
        o = self.ortho
        acc = self.join(p, q)
        for a, b in ((p, o[q]), (o[p], q), (o[p], o[q])):
            acc = self.meet(acc, self.join(a, b))
        return acc

    def is_distributive(self) -> bool:
        n = len(self)
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.meet(a, self.join(b, c)) != self.join(self.meet(a, b), self.meet(a, c)):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "elements": list(self.elements),
            "leq": [list(p) for p in sorted(self.leq)],
            "ortho": list(self.ortho),
        }

    @classmethod
    def from_json(cls, data: Mapping, max_elements: int = DEFAULT_MAX_ELEMENTS) -> "FiniteOml":
        try:
            return cls(
                elements=tuple(str(e) for e in data["elements"]),
                leq=frozenset((int(i), int(j)) for i, j in data["leq"]),
                ortho=tuple(int(k) for k in data["ortho"]),
                max_elements=max_elements,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed lattice JSON: {exc}") from exc


def mo_lattice(k: int) -> FiniteOml:
    """MO_k: k four-element Boolean blocks glued at 0 and 1 (2 + 2k elements)."""
    if k < 1:
        raise DomainError("mo_lattice needs k >= 1")
    names = ["0", "1"]
    for i in range(1, k + 1):
        names += [f"a{i}", f"a{i}'"]
    n = len(names)
    leq = {(i, i) for i in range(n)} | {(0, i) for i in range(n)} | {(i, 1) for i in range(n)}
    ortho = [1, 0]
    for i in range(k):
        ortho += [3 + 2 * i, 2 + 2 * i]
    return FiniteOml(tuple(names), frozenset(leq), tuple(ortho))


# ---------------------------------------------------------------------------
# piecewise complete Boolean algebras

def _symmetric_closure(n: int, pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    out = {(i, i) for i in range(n)}
    for i, j in pairs:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise DomainError(f"commeasurability pair ({i}, {j}) out of range")
        out |= {(i, j), (j, i)}
    return frozenset(out)


@dataclass(frozen=True)
class FinitePcba:
    """A finite piecewise complete Boolean algebra.

    ``leq`` is the union of the orders of the commeasurable Boolean pieces and
    ``commeas`` the commeasurability relation (closed to reflexive and
    symmetric on construction).  The partial supremum of a commeasurable set is
    its least upper bound inside any piece containing it.
    """

    elements: tuple[str, ...]
    leq: frozenset[tuple[int, int]]
    ortho: tuple[int, ...]
    commeas: frozenset[tuple[int, int]]
    max_elements: int = field(default=DEFAULT_MAX_ELEMENTS, compare=False, repr=False)

    def __post_init__(self):
        n = len(self.elements)
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "leq", frozenset((int(i), int(j)) for i, j in self.leq))
        object.__setattr__(self, "ortho", tuple(int(k) for k in self.ortho))
        object.__setattr__(self, "commeas", _symmetric_closure(n, self.commeas))
        if n == 0:
            raise DomainError("a pcba needs at least one element")
        if n > self.max_elements:
            raise DomainError(f"{n} elements exceeds the cap of {self.max_elements}")
        if len(self.ortho) != n or any(not 0 <= k < n for k in self.ortho):
            raise DomainError("ortho must map every element into the carrier")
        self._validate()

    def __len__(self) -> int:
        return len(self.elements)

    @cached_property
    def order(self) -> np.ndarray:
        return _relation_matrix(len(self), self.leq)

    @cached_property
    def commeas_matrix(self) -> np.ndarray:
        return _relation_matrix(len(self), self.commeas)

    def is_commeasurable(self, a: int, b: int) -> bool:
        return bool(self.commeas_matrix[a, b])

    def pairwise_commeasurable(self, items: Iterable[int]) -> bool:
        items = list(items)
        return bool(self.commeas_matrix[np.ix_(items, items)].all()) if items else True

    def _validate(self) -> None:
        n, L, C = len(self), self.order, self.commeas_matrix
        o = self.ortho
        for i in range(n):
            if o[o[i]] != i:
                raise DomainError(f"complement is not an involution at {self.elements[i]}")
        if (L & ~C).any():
            i, j = np.argwhere(L & ~C)[0]
            raise DomainError(f"{self.elements[i]} <= {self.elements[j]} relates non-commeasurable elements")
        zero = _least(C.all(axis=1), L)
        if zero is None or not L[zero].all():
            raise DomainError("no bottom element below every element")
        object.__setattr__(self, "zero", zero)
        object.__setattr__(self, "one", o[zero])
        join = {}
        for i in range(n):
            for j in range(i, n):
                if not C[i, j]:
                    continue
                ub = L[i] & L[j] & C[i] & C[j]
                k = _least(ub, L)
                if k is None:
                    raise DomainError(f"commeasurable pair ({self.elements[i]}, {self.elements[j]}) has no join")
                join[i, j] = join[j, i] = k
        object.__setattr__(self, "_join", join)
        for clique in self.maximal_blocks():
            self._check_boolean(clique)

    def join(self, a: int, b: int) -> int:
        try:
            return self._join[a, b]
        except KeyError:
            raise DomainError(f"{self.elements[a]} and {self.elements[b]} are not commeasurable") from None

    def meet(self, a: int, b: int) -> int:
        o = self.ortho
        return o[self.join(o[a], o[b])]

    def partial_sup(self, items: Iterable[int]) -> int:
        items = list(items)
        if not self.pairwise_commeasurable(items):
            raise DomainError("partial_sup needs a pairwise commeasurable set")
        acc = self.zero
        for k in items:
            acc = self.join(acc, k)
        return acc

    def maximal_blocks(self) -> list[tuple[int, ...]]:
        """Maximal pairwise commeasurable subsets, sorted for determinism."""
        g = nx.Graph()
        g.add_nodes_from(range(len(self)))
        g.add_edges_from((i, j) for i, j in self.commeas if i < j)
        return sorted(tuple(sorted(c)) for c in nx.find_cliques(g))

    def _check_boolean(self, block: Sequence[int]) -> None:
        members = set(block)
        name = self.elements
        if self.zero not in members or self.one not in members:
            raise DomainError(f"block {[name[k] for k in block]} misses 0 or 1")
        for a in block:
            if self.ortho[a] not in members:
                raise DomainError(f"block is not closed under complement at {name[a]}")
            if self.join(a, self.ortho[a]) != self.one or self.meet(a, self.ortho[a]) != self.zero:
                raise DomainError(f"{name[self.ortho[a]]} does not complement {name[a]} inside its block")
            for b in block:
                if self.join(a, b) not in members:
                    raise DomainError(f"block is not closed under join at ({name[a]}, {name[b]})")
        for a, b, c in itertools.product(block, repeat=3):
            if self.meet(a, self.join(b, c)) != self.join(self.meet(a, b), self.meet(a, c)):
                raise DomainError(f"block is not distributive at ({name[a]}, {name[b]}, {name[c]})")

    def block_atoms(self, block: Sequence[int]) -> list[int]:
        L = self.order
        return [a for a in block if a != self.zero
                and not any(b not in (a, self.zero) and L[b, a] for b in block)]

    def to_json(self) -> dict:
        return {
            "elements": list(self.elements),
            "leq": [list(p) for p in sorted(self.leq)],
            "ortho": list(self.ortho),
            "commeas": [list(p) for p in sorted(self.commeas) if p[0] < p[1]],
        }

    @classmethod
    def from_json(cls, data: Mapping, max_elements: int = DEFAULT_MAX_ELEMENTS) -> "FinitePcba":
        try:
            return cls(
                elements=tuple(str(e) for e in data["elements"]),
                leq=frozenset((int(i), int(j)) for i, j in data["leq"]),
                ortho=tuple(int(k) for k in data["ortho"]),
                commeas=frozenset((int(i), int(j)) for i, j in data["commeas"]),
                max_elements=max_elements,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed pcba JSON: {exc}") from exc


def load_structure(data: Mapping, max_elements: int = DEFAULT_MAX_ELEMENTS):
    """Decode ``{"atoms": n}``, OML JSON, or pcba JSON (OML JSON plus ``commeas``)."""
    if not isinstance(data, Mapping):
        raise DomainError("structure JSON must be an object")
    if "atoms" in data:
        try:
            return boolean_algebra(int(data["atoms"]))
        except (TypeError, ValueError) as exc:
            raise DomainError(f"bad atom count: {exc}") from exc
    if "commeas" in data:
        return FinitePcba.from_json(data, max_elements)
    return FiniteOml.from_json(data, max_elements)


def oml_commeas(P: FiniteOml) -> FinitePcba:
    """The pcba of an OML: commeasurable iff the lattice commutator vanishes."""
    n = len(P)
    commeas = frozenset((i, j) for i in range(n) for j in range(n) if P.commutator(i, j) == P.bottom)
    return FinitePcba(P.elements, P.leq, P.ortho, commeas, max_elements=P.max_elements)


def pcba_to_oml(B: FinitePcba) -> FiniteOml:
    """Recover the orthomodular lattice of a transitive, joined pcba."""
    n, L = len(B), B.order
    trans = (L.astype(np.int64) @ L.astype(np.int64) > 0) & ~L
    if trans.any():
        i, j = np.argwhere(trans)[0]
        via = int(np.flatnonzero(L[i] & L[:, j])[0])
        raise DomainError(
            f"not transitive: {B.elements[i]} <= {B.elements[via]} <= {B.elements[j]} "
            f"but not {B.elements[i]} <= {B.elements[j]}"
        )
    for i in range(n):
        for j in range(i + 1, n):
            if _least(L[i] & L[j], L) is None:
                raise DomainError(f"not joined: {B.elements[i]} and {B.elements[j]} have no least upper bound")
    return FiniteOml(B.elements, B.leq, B.ortho, max_elements=B.max_elements)


# ---------------------------------------------------------------------------
# the colimit algebra F(B)

@dataclass(frozen=True)
class FBElement:
    """An element of F(B) in canonical form.

    ``atoms`` partition the unit of B into pairwise orthogonal commeasurable
    pieces carrying pairwise distinct ``values``; ``support`` is the Boolean
    subalgebra they generate, the minimal piece on which the element lives.
    """

    atoms: tuple[int, ...]
    values: tuple[GaussianRational, ...]
    support: frozenset[int]

    def value_map(self) -> dict[int, GaussianRational]:
        return dict(zip(self.atoms, self.values))

    def is_projection(self) -> bool:
        return all(v in (ZERO, ONE) for v in self.values)


def _set_partitions(items: Sequence) -> Iterator[list[list]]:
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[head]] + part
        for k in range(len(part)):
            yield part[:k] + [[head] + part[k]] + part[k + 1:]


class PiecewiseAlgebra:
    """The colimit F(B) of the function algebras of the Boolean pieces of ``B``.

    Sums and products are only defined on commeasurable pairs; scalar
    multiplication and the involution are total.
    """

    def __init__(self, pcba: FinitePcba):
        self.pcba = pcba

    def _support(self, atoms: Sequence[int]) -> frozenset[int]:
        B = self.pcba
        out = set()
        for r in range(len(atoms) + 1):
            for combo in itertools.combinations(atoms, r):
                out.add(B.partial_sup(combo))
        return frozenset(out)

    def element(self, partition: Mapping[int, object]) -> FBElement:
        """Canonical element from ``{piece: value}`` over a partition of unity."""
        B = self.pcba
        if B.zero == B.one:
            # the one-element algebra: F(B) is the zero ring
            return FBElement((B.one,), (ZERO,), frozenset({B.one}))
        pieces = sorted(partition)
        if not pieces or not B.pairwise_commeasurable(pieces):
            raise DomainError("pieces must be nonempty and pairwise commeasurable")
        for a, b in itertools.combinations(pieces, 2):
            if B.meet(a, b) != B.zero:
                raise DomainError(f"pieces {B.elements[a]} and {B.elements[b]} overlap")
        if B.partial_sup(pieces) != B.one:
            raise DomainError("pieces do not cover the unit")
        values = {p: GaussianRational.of(v) for p, v in partition.items()}
        groups: dict[GaussianRational, list[int]] = {}
        for p in pieces:
            if p != B.zero:
                groups.setdefault(values[p], []).append(p)
        merged = sorted((B.partial_sup(members), v) for v, members in groups.items())
        atoms = tuple(a for a, _ in merged)
        return FBElement(atoms, tuple(v for _, v in merged), self._support(atoms))

    def canonical(self, x: FBElement) -> FBElement:
        return self.element(x.value_map())

    def scalar(self, z) -> FBElement:
        return self.element({self.pcba.one: z})

    def indicator(self, b: int) -> FBElement:
        """The projection ``[eta^{-1}(b)]`` living on the piece generated by ``b``."""
        B = self.pcba
        if b in (B.zero, B.one):
            return self.scalar(ONE if b == B.one else ZERO)
        return self.element({b: ONE, B.ortho[b]: ZERO})

    def commeasurable(self, x: FBElement, y: FBElement) -> bool:
        return self.pcba.pairwise_commeasurable(sorted(x.support | y.support))

    def _refine(self, x: FBElement, y: FBElement, op) -> FBElement:
        if not self.commeasurable(x, y):
            raise DomainError("operands are not commeasurable")
        B = self.pcba
        parts = {}
        for a, va in zip(x.atoms, x.values):
            for b, vb in zip(y.atoms, y.values):
                m = B.meet(a, b)
                if m != B.zero:
                    parts[m] = op(va, vb)
        return self.element(parts)

    def add(self, x: FBElement, y: FBElement) -> FBElement:
        return self._refine(x, y, lambda a, b: a + b)

    def mul(self, x: FBElement, y: FBElement) -> FBElement:
        return self._refine(x, y, lambda a, b: a * b)

    def scale(self, z, x: FBElement) -> FBElement:
        z = GaussianRational.of(z)
        return self.element({a: z * v for a, v in zip(x.atoms, x.values)})

    def star(self, x: FBElement) -> FBElement:
        return self.element({a: v.conjugate() for a, v in zip(x.atoms, x.values)})

    def partitions_of_unity(self) -> list[tuple[int, ...]]:
        B = self.pcba
        seen = set()
        for block in B.maximal_blocks():
            for part in _set_partitions(B.block_atoms(block)):
                # the one-element algebra has no atoms; its only partition is {1}
                seen.add(tuple(sorted(B.partial_sup(group) for group in part)) or (B.one,))
        return sorted(seen)

    def projections(self) -> list[FBElement]:
        """Every canonical element with values in {0, 1}, found by scanning all pieces."""
        found = set()
        for pieces in self.partitions_of_unity():
            for labels in itertools.product((ZERO, ONE), repeat=len(pieces)):
                found.add(self.element(dict(zip(pieces, labels))))
        return sorted(found, key=lambda x: (x.atoms, [v.to_json() for v in x.values]))

    def to_point(self, x: FBElement) -> int:
        """The counit direction: a 0/1 element goes to the join of its 1-atoms."""
        if not x.is_projection():
            raise DomainError("only projections map back into B")
        return self.pcba.partial_sup(a for a, v in zip(x.atoms, x.values) if v == ONE)


def colimit_F(B: FinitePcba) -> PiecewiseAlgebra:
    return PiecewiseAlgebra(B)


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of comparing Proj(F(B)) with B through the explicit bijection."""

    projection_count: int
    carrier_size: int
    isomorphic: bool
    projection_pcba: FinitePcba | None
    failures: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "projection_count": self.projection_count,
            "carrier_size": self.carrier_size,
            "isomorphic": self.isomorphic,
            "failures": list(self.failures),
        }


def proj_of_F(B: FinitePcba) -> EquivalenceReport:
    """Collect the projections of F(B), build their pcba and test the bijection with B."""
    F = colimit_F(B)
    projs = F.projections()
    failures = []
    points = [F.to_point(x) for x in projs]
    if sorted(points) != list(range(len(B))):
        failures.append("projections of F(B) do not correspond bijectively to B")
    one = F.scalar(ONE)
    index = {x: k for k, x in enumerate(projs)}
    n = len(projs)
    commeas, leq, ortho = set(), set(), []
    for k, x in enumerate(projs):
        comp = F.add(one, F.scale(-1, x))
        ortho.append(index.get(comp, -1))
        if F.indicator(points[k]) != x:
            failures.append(f"unit and counit disagree at {B.elements[points[k]]}")
    for i, x in enumerate(projs):
        for j, y in enumerate(projs):
            c = F.commeasurable(x, y)
            if c:
                commeas.add((i, j))
                if F.mul(x, y) == x:
                    leq.add((i, j))
            if not failures:
                a, b = points[i], points[j]
                if c != B.is_commeasurable(a, b):
                    failures.append(f"commeasurability differs at ({B.elements[a]}, {B.elements[b]})")
                elif ((i, j) in leq) != ((a, b) in B.leq):
                    failures.append(f"order differs at ({B.elements[a]}, {B.elements[b]})")
                elif c and points[index[F.add(F.add(x, y), F.scale(-1, F.mul(x, y)))]] != B.join(a, b):
                    failures.append(f"join differs at ({B.elements[a]}, {B.elements[b]})")
        if not failures and points[ortho[i]] != B.ortho[points[i]]:
            failures.append(f"complement differs at {B.elements[points[i]]}")
    pcba = None
    if -1 not in ortho:
        try:
            pcba = FinitePcba(
                tuple(f"[{B.elements[p]}]" for p in points), frozenset(leq), tuple(ortho),
                frozenset(commeas), max_elements=max(B.max_elements, n),
            )
        except DomainError as exc:
            failures.append(f"projections do not form a pcba: {exc}")
    else:
        failures.append("projections are not closed under complement")
    return EquivalenceReport(n, len(B), not failures and pcba is not None, pcba, tuple(failures))


# ---------------------------------------------------------------------------
# morphisms of finite orthomodular lattices

@dataclass(frozen=True)
class SupCheckReport:
    preserves_ortho: bool
    preserves_binary_joins: bool
    preserves_orthogonal_sups: bool
    preserves_all_sups: bool
    violations: tuple[str, ...]

    @property
    def hypotheses(self) -> bool:
        return self.preserves_ortho and self.preserves_binary_joins and self.preserves_orthogonal_sups

    @property
    def lemma_consistent(self) -> bool:
        """The hypotheses imply preservation of all suprema."""
        return not self.hypotheses or self.preserves_all_sups

    @property
    def passed(self) -> bool:
        return self.hypotheses and self.preserves_all_sups

    def __bool__(self) -> bool:
        return self.passed


def _orthogonal_sets(P: FiniteOml) -> Iterator[tuple[int, ...]]:
    nonzero = [k for k in range(len(P)) if k != P.bottom]

    def extend(chosen: tuple[int, ...], start: int):
        yield chosen
        for pos in range(start, len(nonzero)):
            k = nonzero[pos]
            if all(P.le(k, P.ortho[c]) for c in chosen):
                yield from extend(chosen + (k,), pos + 1)

    yield from extend((), 0)


def morphism_sup_check(f: Mapping, P: FiniteOml, Q: FiniteOml, max_subset_elements: int = 20) -> SupCheckReport:
    """Exhaustively test a map of finite OMLs for preservation of suprema.

    ``f`` maps element names (or indices) of ``P`` to those of ``Q``.  All
    ``2^n`` subsets are scanned, so ``P`` is limited to ``max_subset_elements``.
    """
    def to_index(lattice: FiniteOml, key) -> int:
        return key if isinstance(key, int) else lattice.index(str(key))

    fm = {to_index(P, k): to_index(Q, v) for k, v in f.items()}
    if set(fm) != set(range(len(P))):
        raise DomainError("f must be total on the domain lattice")
    if len(P) > max_subset_elements:
        raise DomainError(f"{len(P)} elements exceeds max_subset_elements={max_subset_elements}")
    violations = []

    def note(ok: bool, message: str) -> bool:
        if not ok and len(violations) < 20:
            violations.append(message)
        return ok

    en, eq_ = P.elements, Q.elements
    ortho_ok = all([note(fm[P.ortho[p]] == Q.ortho[fm[p]], f"f({en[p]}') != f({en[p]})'") for p in range(len(P))])
    joins_ok = all([
        note(fm[P.join(p, q)] == Q.join(fm[p], fm[q]), f"f({en[p]} v {en[q]}) != f({en[p]}) v f({en[q]})")
        for p in range(len(P)) for q in range(len(P))
    ])

    def sup_ok(subset: tuple[int, ...]) -> bool:
        lhs = fm[P.sup(subset)]
        rhs = Q.sup(fm[k] for k in subset)
        return note(lhs == rhs, f"sup of {[en[k] for k in subset]} maps to {eq_[lhs]}, expected {eq_[rhs]}")

    orth_ok = all([sup_ok(s) for s in _orthogonal_sets(P)])
    all_ok = all([sup_ok(s) for r in range(len(P) + 1) for s in itertools.combinations(range(len(P)), r)])
    return SupCheckReport(ortho_ok, joins_ok, orth_ok, all_ok, tuple(violations))
