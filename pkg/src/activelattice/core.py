"""Block-diagonal complex *-algebras and the matrix calculus built on them.

A finite-dimensional C*-algebra is a direct sum of full matrix blocks
M_{n_1}(C) + ... + M_{n_k}(C).  :class:`AlgebraShape` records the block
sizes and :class:`Element` holds one square complex matrix per block.
Everything here is floating point; exact work lives in
:mod:`activelattice.boolean`.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, StructuralError

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class AlgebraShape:
    """Block sizes of a direct sum of full matrix algebras."""

    block_dims: tuple[int, ...]

    def __init__(self, block_dims: Iterable[int]):
        dims = tuple(int(n) for n in block_dims)
        if not dims:
            raise StructuralError("an algebra shape needs at least one block")
        if any(n < 1 for n in dims):
            raise StructuralError(f"block dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def parse(cls, text: str) -> "AlgebraShape":
        """Parse ``"2,3,1"`` (or ``"[2,3,1]"``) into a shape."""
        cleaned = text.strip().strip("[]")
        try:
            return cls(int(tok) for tok in cleaned.split(",") if tok.strip())
        except ValueError as exc:
            raise StructuralError(f"cannot parse algebra shape {text!r}") from exc

    def __iter__(self):
        return iter(self.block_dims)

    def __len__(self) -> int:
        return len(self.block_dims)

    def __str__(self) -> str:
        return ",".join(str(n) for n in self.block_dims)

    @property
    def dimension(self) -> int:
        return sum(n * n for n in self.block_dims)

    @property
    def is_commutative(self) -> bool:
        return all(n == 1 for n in self.block_dims)

    def identity(self) -> "Element":
        return Element(self, [np.eye(n, dtype=complex) for n in self.block_dims])

    def zero(self) -> "Element":
        return Element(self, [np.zeros((n, n), dtype=complex) for n in self.block_dims])

    def scalar(self, values) -> "Element":
        """Central element with ``values[b]`` times the identity in block ``b``.

        A single number is broadcast to every block.
        """
        if isinstance(values, numbers.Number):
            values = [values] * len(self)
        values = list(values)
        if len(values) != len(self):
            raise StructuralError(f"expected {len(self)} block values, got {len(values)}")
        return Element(self, [complex(v) * np.eye(n) for v, n in zip(values, self.block_dims)])

    def matrix_unit(self, block: int, i: int, j: int) -> "Element":
        """e_ij inside one block, zero elsewhere."""
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        n = self.block_dims[block]
        if not (0 <= i < n and 0 <= j < n):
            raise DomainError(f"matrix unit ({i},{j}) outside block of size {n}")
        blocks[block][i, j] = 1.0
        return Element(self, blocks)

    def central_projection(self, block: int) -> "Element":
        """The identity of one block, zero elsewhere."""
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        blocks[block] = np.eye(self.block_dims[block], dtype=complex)
        return Element(self, blocks)


def _as_shape(shape) -> AlgebraShape:
    return shape if isinstance(shape, AlgebraShape) else AlgebraShape(shape)


@dataclass(frozen=True, eq=False)
class Element:
    """An element of a block-diagonal algebra: one square matrix per block.

    Blocks are stored as read-only complex128 arrays.  Use ``a @ b`` for the
    algebra product, ``z * a`` for scalars and ``a.adj`` for the involution.
    """

    shape: AlgebraShape
    blocks: tuple[np.ndarray, ...]

    def __init__(self, shape, blocks: Sequence):
        shape = _as_shape(shape)
        blocks = list(blocks)
        if len(blocks) != len(shape):
            raise StructuralError(f"shape {shape.block_dims} needs {len(shape)} blocks, got {len(blocks)}")
        frozen = []
        for n, blk in zip(shape.block_dims, blocks):
            arr = np.array(blk, dtype=complex)
            if arr.shape != (n, n):
                raise StructuralError(f"block of shape {arr.shape} does not match size {n}")
            if not np.all(np.isfinite(arr)):
                raise DomainError("element entries must be finite")
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "blocks", tuple(frozen))

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "Element") -> None:
        if not isinstance(other, Element):
            raise TypeError(f"expected Element, got {type(other).__name__}")
        if other.shape != self.shape:
            raise StructuralError(f"shape mismatch: {self.shape.block_dims} vs {other.shape.block_dims}")

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.shape, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "Element":
        return Element(self.shape, [-a for a in self.blocks])

    def __matmul__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, z) -> "Element":
        if not isinstance(z, numbers.Number):
            return NotImplemented
        return Element(self.shape, [complex(z) * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, z) -> "Element":
        if not isinstance(z, numbers.Number):
            return NotImplemented
        return Element(self.shape, [a / complex(z) for a in self.blocks])

    @property
    def adj(self) -> "Element":
        return Element(self.shape, [a.conj().T for a in self.blocks])

    def norm(self) -> float:
        """Operator norm: the largest singular value over all blocks."""
        return max(float(np.linalg.svd(a, compute_uv=False)[0]) for a in self.blocks)

    def dist(self, other: "Element") -> float:
        return (self - other).norm()

    def hermitian_part(self) -> "Element":
        return 0.5 * (self + self.adj)

    def map_blocks(self, fn) -> "Element":
        return Element(self.shape, [fn(a) for a in self.blocks])

    def __repr__(self) -> str:
        return f"Element(shape={list(self.shape.block_dims)}, blocks={[b.tolist() for b in self.blocks]})"

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "shape": list(self.shape.block_dims),
            "blocks": [
                [[[float(z.real), float(z.imag)] for z in row] for row in blk]
                for blk in self.blocks
            ],
        }

    @classmethod
    def from_json(cls, data) -> "Element":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        if not isinstance(data, dict) or "shape" not in data or "blocks" not in data:
            raise StructuralError("element JSON needs 'shape' and 'blocks'")
        try:
            shape = AlgebraShape(data["shape"])
            raw = data["blocks"]
            if len(raw) != len(shape):
                raise StructuralError("number of blocks does not match shape")
            blocks = []
            for n, blk in zip(shape.block_dims, raw):
                if len(blk) != n or any(len(row) != n for row in blk):
                    raise StructuralError(f"block rows do not match size {n}")
                blocks.append([[complex(float(re), float(im)) for re, im in row] for row in blk])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, StructuralError):
                raise
            raise StructuralError(f"malformed element entries: {exc}") from exc
        return cls(shape, blocks)


# -- functional aliases ---------------------------------------------------

def mul(a: Element, b: Element) -> Element:
    return a @ b


def add(a: Element, b: Element) -> Element:
    return a + b


def sub(a: Element, b: Element) -> Element:
    return a - b


def scale(z, a: Element) -> Element:
    return complex(z) * a


def adjoint(a: Element) -> Element:
    return a.adj


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds.

    ``rank_tol`` is an absolute singular-value cutoff, ``eq_tol`` bounds
    structural identities (idempotence, unitarity) and ``verify_tol`` bounds
    sampled acceptance checks.
    """

    eq_tol: float = 1e-9
    rank_tol: float = 1e-10
    verify_tol: float = 1e-8

    def __post_init__(self):
        if min(self.eq_tol, self.rank_tol, self.verify_tol) < 0:
            raise DomainError("tolerances must be nonnegative")
        if not (self.rank_tol <= self.eq_tol <= self.verify_tol):
            raise DomainError("tolerances must satisfy rank_tol <= eq_tol <= verify_tol")

    def to_json(self) -> dict:
        return {"eq_tol": self.eq_tol, "rank_tol": self.rank_tol, "verify_tol": self.verify_tol}


DEFAULT_TOL = ToleranceConfig()


@dataclass
class SeededSampler:
    """Reproducible source of numpy generators.

    Every call to :meth:`generator` derives a fresh stream from
    ``(seed, counter)`` and then bumps the counter, so two samplers with the
    same seed and counter hand out identical streams.  Not thread safe: give
    each task its own sampler.
    """

    seed: int = 0
    counter: int = field(default=0)

    def __post_init__(self):
        for name in ("seed", "counter"):
            value = getattr(self, name)
            if not (0 <= int(value) <= _UINT64_MAX):
                raise DomainError(f"{name} must be an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.counter),))
        self.counter += 1
        return np.random.Generator(np.random.PCG64(seq))

    def fork(self) -> "SeededSampler":
        """An independent sampler for a sub-task; advances this one by one step."""
        child_seed = int(self.generator().integers(0, 2**63))
        return SeededSampler(child_seed)


# -- predicates -----------------------------------------------------------

def is_selfadjoint(a: Element, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return a.dist(a.adj) <= tol.eq_tol


def is_projection(a: Element, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return is_selfadjoint(a, tol) and a.dist(a @ a) <= tol.eq_tol


def is_unitary(a: Element, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    one = a.shape.identity()
    return (a @ a.adj).dist(one) <= tol.eq_tol and (a.adj @ a).dist(one) <= tol.eq_tol


def is_symmetry(a: Element, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return is_selfadjoint(a, tol) and is_unitary(a, tol)


# -- determinant / trace calculus ----------------------------------------

def block_det(a: Element) -> list[complex]:
    return [complex(np.linalg.det(b)) for b in a.blocks]


def block_trace(a: Element) -> list[complex]:
    return [complex(np.trace(b)) for b in a.blocks]


def adjugate2(a: Element) -> Element:
    """Blockwise adjugate of 2x2 blocks: [[a,b],[c,d]] -> [[d,-b],[-c,a]]."""
    if any(n != 2 for n in a.shape):
        raise StructuralError("adjugate2 needs every block to be 2x2")
    return a.map_blocks(lambda m: np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]))


def _hermitian_eigh(a: Element, tol: ToleranceConfig, what: str):
    if not is_selfadjoint(a, tol):
        raise DomainError(f"{what} needs a self-adjoint element")
    return [np.linalg.eigh(0.5 * (b + b.conj().T)) for b in a.blocks]


def positive_sqrt(a: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """The positive square root of a positive semidefinite element.

    Eigenvalues in ``[-eq_tol, 0)`` are treated as rounding noise and clamped
    to zero; anything more negative is rejected.
    """
    out = []
    for w, v in _hermitian_eigh(a, tol, "positive_sqrt"):
        if w.size and w.min() < -tol.eq_tol:
            raise DomainError(f"element is not positive: eigenvalue {w.min():.3e}")
        root = np.sqrt(np.clip(w, 0.0, None))
        out.append((v * root) @ v.conj().T)
    return Element(a.shape, out)


def sign_symmetry(b: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """Symmetry ``u`` of a commutative algebra with ``b = u * sqrt(b^2)``.

    On each atom ``u`` is -1 where ``b <= 0`` and +1 elsewhere.
    """
    if not b.shape.is_commutative:
        raise StructuralError("sign_symmetry needs a commutative shape (all blocks of size 1)")
    if not is_selfadjoint(b, tol):
        raise DomainError("sign_symmetry needs a self-adjoint element")
    return b.map_blocks(lambda m: np.array([[-1.0 if m[0, 0].real <= 0 else 1.0]]))


def rann(a: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """Right annihilating projection: the orthogonal projection onto ker(a)."""
    out = []
    for blk in a.blocks:
        _, s, vh = np.linalg.svd(blk)
        rank = int(np.sum(s > tol.rank_tol))
        null = vh[rank:].conj().T
        proj = null @ null.conj().T
        out.append(0.5 * (proj + proj.conj().T))
    return Element(a.shape, out)


def rp(a: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """Right support projection, the least projection ``r`` with ``a r = a``."""
    return a.shape.identity() - rann(a, tol)


def four_unitaries(a: Element, tol: ToleranceConfig = DEFAULT_TOL):
    """Write ``a`` as ``scale * (u1/4 + u2/4 + i u3/4 + i u4/4)`` with unitary ``u_k``.

    The real and imaginary parts ``h`` are rescaled to norm at most one and
    split as ``h = (h_+ + h_-)/2`` with ``h_± = h ± i sqrt(1 - h^2)``.
    """
    re = 0.5 * (a + a.adj)
    im = (-0.5j) * (a - a.adj)
    s = max(re.norm(), im.norm())
    if s == 0.0:
        s = 1.0
    one = a.shape.identity()
    factors = []
    for part in (re, im):
        h = (part / s).hermitian_part()
        root = positive_sqrt(one - h @ h, tol)
        factors.extend([h + 1j * root, h - 1j * root])
    return 2.0 * s, tuple(factors)


# -- seeded random elements ----------------------------------------------

def _ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def _haar_block(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, n))
    d = np.diagonal(r)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phases


def random_unitary(shape, sampler: SeededSampler) -> Element:
    """Haar-distributed unitary in every block."""
    shape = _as_shape(shape)
    rng = sampler.generator()
    return Element(shape, [_haar_block(rng, n) for n in shape])


def random_special_unitary(shape, sampler: SeededSampler, det: complex | Sequence[complex] = 1.0) -> Element:
    """Random unitary rescaled so each block has the requested determinant."""
    shape = _as_shape(shape)
    dets = [det] * len(shape) if isinstance(det, numbers.Number) else list(det)
    u = random_unitary(shape, sampler)
    out = []
    for blk, n, target in zip(u.blocks, shape, dets):
        d = np.linalg.det(blk)
        out.append(blk * (complex(target) / d) ** (1.0 / n))
    return Element(shape, out)


def random_projection(shape, sampler: SeededSampler, ranks: Sequence[int] | None = None) -> Element:
    """``u diag(1,..,1,0,..,0) u*`` with Haar ``u``.

    ``ranks`` gives the rank per block; when omitted each rank is uniform on
    ``0..n``.
    """
    shape = _as_shape(shape)
    rng = sampler.generator()
    if ranks is None:
        ranks = [int(rng.integers(0, n + 1)) for n in shape]
    ranks = list(ranks)
    if len(ranks) != len(shape):
        raise StructuralError("one rank per block is required")
    out = []
    for n, r in zip(shape, ranks):
        if not 0 <= r <= n:
            raise DomainError(f"rank {r} out of range for block of size {n}")
        u = _haar_block(rng, n)
        p = u[:, :r] @ u[:, :r].conj().T
        out.append(0.5 * (p + p.conj().T))
    return Element(shape, out)


def random_element(shape, sampler: SeededSampler) -> Element:
    shape = _as_shape(shape)
    rng = sampler.generator()
    return Element(shape, [_ginibre(rng, n) for n in shape])


def random_selfadjoint(shape, sampler: SeededSampler) -> Element:
    return random_element(shape, sampler).hermitian_part()


def random_normal(shape, sampler: SeededSampler) -> Element:
    """``u diag(z) u*`` with Haar ``u`` and complex Gaussian eigenvalues ``z``."""
    shape = _as_shape(shape)
    rng = sampler.generator()
    out = []
    for n in shape:
        u = _haar_block(rng, n)
        z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        out.append((u * z) @ u.conj().T)
    return Element(shape, out)
