"""The projection lattice of a block algebra, computed with subspace arithmetic.

Joins orthonormalise the stacked range bases; meets come from De Morgan.
Order, orthogonality and commeasurability are decided against
``ToleranceConfig.verify_tol``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DEFAULT_TOL, AlgebraShape, Element, ToleranceConfig, is_projection
from .errors import DomainError, StructuralError


def _require_projection(*ps: Element, tol: ToleranceConfig) -> None:
    for p in ps:
        if not is_projection(p, tol):
            raise DomainError("expected a projection")


def _range_basis(block: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (block + block.conj().T))
    return v[:, w > 0.5]


def _span_projection(basis: np.ndarray, n: int, tol: ToleranceConfig) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.zeros((n, n), dtype=complex)
    u, s, _ = np.linalg.svd(basis, full_matrices=False)
    k = int(np.sum(s > tol.rank_tol))
    u = u[:, :k]
    proj = u @ u.conj().T
    return 0.5 * (proj + proj.conj().T)


def _ortho(p: Element) -> Element:
    return p.shape.identity() - p


def _join(p: Element, q: Element, tol: ToleranceConfig) -> Element:
    out = []
    for n, a, b in zip(p.shape, p.blocks, q.blocks):
        stacked = np.hstack([_range_basis(a), _range_basis(b)])
        out.append(_span_projection(stacked, n, tol))
    return Element(p.shape, out)


def _meet(p: Element, q: Element, tol: ToleranceConfig) -> Element:
    return _ortho(_join(_ortho(p), _ortho(q), tol))


def ortho(p: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    _require_projection(p, tol=tol)
    return _ortho(p)


def leq(p: Element, q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    _require_projection(p, q, tol=tol)
    return (p @ q).dist(p) <= tol.verify_tol


def orthogonal(p: Element, q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return (p @ q).norm() <= tol.verify_tol


def join(p: Element, q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """Projection onto range(p) + range(q)."""
    _require_projection(p, q, tol=tol)
    if p.shape != q.shape:
        raise StructuralError(f"shapes {p.shape} and {q.shape} differ")
    return _join(p, q, tol)


def meet(p: Element, q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    _require_projection(p, q, tol=tol)
    if p.shape != q.shape:
        raise StructuralError(f"shapes {p.shape} and {q.shape} differ")
    return _meet(p, q, tol)


def sup(ps: Sequence[Element], shape: AlgebraShape | None = None, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """Iterated join; the empty supremum is 0 (``shape`` is then required)."""
    ps = list(ps)
    if not ps:
        if shape is None:
            raise DomainError("the supremum of an empty family needs a shape")
        return shape.zero()
    acc = ps[0]
    _require_projection(acc, tol=tol)
    for p in ps[1:]:
        acc = join(acc, p, tol)
    return acc


def orthogonal_sup(ps: Sequence[Element], shape: AlgebraShape | None = None,
                   tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """Supremum of pairwise orthogonal projections, which is their sum."""
    ps = list(ps)
    if not ps:
        if shape is None:
            raise DomainError("the supremum of an empty family needs a shape")
        return shape.zero()
    _require_projection(*ps, tol=tol)
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            if not orthogonal(ps[i], ps[j], tol):
                raise DomainError(f"projections {i} and {j} are not orthogonal")
    total = ps[0]
    for p in ps[1:]:
        total = total + p
    if not is_projection(total, tol):
        raise DomainError("sum of the family is not idempotent")
    return total.hermitian_part()


def orthomodular_residual(p: Element, q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``|| p v (p' ^ q) - q ||`` for ``p <= q``."""
    if not leq(p, q, tol):
        raise DomainError("orthomodular_residual needs p <= q")
    return _join(p, _meet(_ortho(p), q, tol), tol).dist(q)


def commutator(p: Element, q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """Lattice commutator (p v q) ^ (p v q') ^ (p' v q) ^ (p' v q')."""
    _require_projection(p, q, tol=tol)
    return _commutator(p, q, tol)


def _commutator(p: Element, q: Element, tol: ToleranceConfig) -> Element:
    pc, qc = _ortho(p), _ortho(q)
    acc = _join(p, q, tol)
    for a, b in ((p, qc), (pc, q), (pc, qc)):
        acc = _meet(acc, _join(a, b, tol), tol)
    return acc


@dataclass(frozen=True, eq=False)
class CommeasReport:
    """Evaluation of the five equivalent commeasurability criteria.

    ``witness`` is ``(p', q', r)`` with ``p = p' v r``, ``q = q' v r``; it is
    only built when the projections commute.
    """

    commute: bool
    witness: tuple[Element, Element, Element] | None
    witness_ok: bool
    residual_iii: float
    residual_iv: float
    commutator_norm: float
    verdict: bool
    commute_norm: float = 0.0

    def conditions(self, tol: ToleranceConfig = DEFAULT_TOL) -> dict[str, bool]:
        return {
            "i": self.commute,
            "ii": self.witness_ok,
            "iii": self.residual_iii <= tol.verify_tol,
            "iv": self.residual_iv <= tol.verify_tol,
            "v": self.commutator_norm <= tol.verify_tol,
        }

    def agree(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        return len(set(self.conditions(tol).values())) == 1

    def to_json(self, tol: ToleranceConfig = DEFAULT_TOL) -> dict:
        return {
            "verdict": self.verdict,
            "conditions": self.conditions(tol),
            "commute_norm": self.commute_norm,
            "residual_iii": self.residual_iii,
            "residual_iv": self.residual_iv,
            "commutator_norm": self.commutator_norm,
            "witness": None if self.witness is None else {
                "p_prime": self.witness[0].to_json(),
                "q_prime": self.witness[1].to_json(),
                "r": self.witness[2].to_json(),
            },
        }


def commeasurable(p: Element, q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> CommeasReport:
    _require_projection(p, q, tol=tol)
    commute_norm = (p @ q - q @ p).norm()
    commute = commute_norm <= tol.verify_tol
    r = _meet(p, q, tol)
    rc = _ortho(r)
    residual_iii = (_meet(p, rc, tol) @ q).norm()
    residual_iv = (_meet(q, rc, tol) @ p).norm()
    commutator_norm = _commutator(p, q, tol).norm()

    witness = None
    witness_ok = False
    if commute:
        pp, qp = (p - r).hermitian_part(), (q - r).hermitian_part()
        witness = (pp, qp, r)
        witness_ok = (
            all(is_projection(x, tol) for x in witness)
            and orthogonal(pp, qp, tol) and orthogonal(pp, r, tol) and orthogonal(qp, r, tol)
            and join(pp, r, tol).dist(p) <= tol.verify_tol
            and join(qp, r, tol).dist(q) <= tol.verify_tol
        )
    report = CommeasReport(
        commute=commute,
        witness=witness,
        witness_ok=witness_ok,
        residual_iii=residual_iii,
        residual_iv=residual_iv,
        commutator_norm=commutator_norm,
        verdict=False,
        commute_norm=commute_norm,
    )
    verdict = all(report.conditions(tol).values())
    object.__setattr__(report, "verdict", verdict)
    return report


def vector_projection_matrix(n: int, i: int, j: int, alpha: complex) -> np.ndarray:
    """p_ij(alpha) in M_n: the projection onto the span of e_i + alpha e_j (0-based)."""
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise DomainError(f"need distinct indices inside 0..{n - 1}, got ({i}, {j})")
    alpha = complex(alpha)
    c = 1.0 / (1.0 + abs(alpha) ** 2)
    m = np.zeros((n, n), dtype=complex)
    m[i, i] = c
    m[i, j] = c * alpha
    m[j, i] = c * alpha.conjugate()
    m[j, j] = c * abs(alpha) ** 2
    return m


def vector_projection(shape, i: int, j: int, alpha) -> Element:
    """p_ij(alpha) in every block; ``alpha`` is a scalar or one value per block.

    Indices are 0-based.  Every block must be large enough to hold both.
    """
    shape = shape if isinstance(shape, AlgebraShape) else AlgebraShape(shape)
    alphas = list(alpha) if isinstance(alpha, (list, tuple, np.ndarray)) else [alpha] * len(shape)
    if len(alphas) != len(shape):
        raise DomainError("one alpha per block is required")
    return Element(shape, [vector_projection_matrix(n, i, j, a) for n, a in zip(shape, alphas)])


def decompose_into_vector_projections(p: Element, tol: ToleranceConfig = DEFAULT_TOL) -> list[Element]:
    """Split ``p`` into orthogonal rank-one projections, one per range vector.

    Each range vector is rescaled so its first nonzero entry is 1, which is the
    canonical vector-projection form.
    """
    _require_projection(p, tol=tol)
    shape = p.shape
    parts = []
    for b, blk in enumerate(p.blocks):
        basis = _range_basis(blk)
        for k in range(basis.shape[1]):
            v = basis[:, k]
            lead = np.flatnonzero(np.abs(v) > tol.eq_tol)[0]
            v = v / v[lead]
            rank_one = np.outer(v, v.conj()) / np.vdot(v, v).real
            blocks = [np.zeros((n, n), dtype=complex) for n in shape]
            blocks[b] = rank_one
            parts.append(Element(shape, blocks))
    return parts


def is_ij_swapper(p: Element, i: int, j: int, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Does conjugation by 1 - 2p swap e_ii and e_jj and fix every other e_kk?"""
    _require_projection(p, tol=tol)
    if i == j:
        raise DomainError("is_ij_swapper needs distinct indices")
    s = p.shape.identity() - 2.0 * p
    for n, blk in zip(p.shape, s.blocks):
        if not (0 <= i < n and 0 <= j < n):
            raise DomainError(f"indices ({i}, {j}) outside a block of size {n}")
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[k, k] = 1.0
            target = np.zeros((n, n), dtype=complex)
            target[{i: j, j: i}.get(k, k), {i: j, j: i}.get(k, k)] = 1.0
            if np.linalg.norm(blk @ e @ blk - target, 2) > tol.verify_tol:
                return False
    return True
