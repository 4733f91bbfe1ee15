"""Symmetries ``1 - 2p`` and factorisation of unitaries into products of them.

For a block of size n the group generated by symmetries is exactly the
unitaries with ``det(u)^2 = 1``.  A determinant-one unitary is diagonalised,
the diagonal is telescoped into n-1 factors ``diag(z, conj(z))`` at adjacent
coordinates, and each of those is a product of two symmetries obtained by
conjugating ``v_phi = (1 - 2 p_phi)(1 - 2 p_0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .core import (
    DEFAULT_TOL,
    AlgebraShape,
    Element,
    ToleranceConfig,
    block_det,
    is_projection,
    is_symmetry,
    is_unitary,
)
from .errors import DomainError, NumericError, StructuralError

# Eigenvector frame of the rotation v_phi: columns for e^{+i theta}, e^{-i theta}.
_ROTATION_FRAME = np.array([[1.0, 1.0], [-1.0j, 1.0j]]) / math.sqrt(2.0)
_P0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


def symmetry_of(p: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    if not is_projection(p, tol):
        raise DomainError("symmetry_of needs a projection")
    return p.shape.identity() - 2.0 * p


def projection_of_symmetry(s: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    if not is_symmetry(s, tol):
        raise DomainError("projection_of_symmetry needs a self-adjoint unitary")
    return (0.5 * (s.shape.identity() - s)).hermitian_part()


def sym_member(u: Element, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True iff every block determinant squares to 1."""
    if not is_unitary(u, tol):
        raise DomainError("sym_member needs a unitary")
    return all(abs(d * d - 1.0) <= tol.verify_tol for d in block_det(u))


def _p_phi_matrix(phi: float) -> np.ndarray:
    if math.isinf(phi):
        return np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    return np.array([[1.0, phi], [phi, phi * phi]], dtype=complex) / (1.0 + phi * phi)


def _phis(phi) -> list[float]:
    values = list(phi) if isinstance(phi, (list, tuple, np.ndarray)) else [phi]
    values = [float(v) for v in values]
    if any(v < 0 or math.isnan(v) for v in values):
        raise DomainError("phi must be nonnegative (or math.inf)")
    return values


def p_phi(phi) -> Element:
    """``(1+phi^2)^{-1} [[1, phi], [phi, phi^2]]``, with ``p_inf = diag(0, 1)``.

    ``phi`` may be a single value or one value per 2x2 block.
    """
    values = _phis(phi)
    return Element([2] * len(values), [_p_phi_matrix(v) for v in values])


def v_phi(phi) -> Element:
    """The determinant-one product ``(1 - 2 p_phi)(1 - 2 p_0)``."""
    values = _phis(phi)
    one = np.eye(2)
    return Element([2] * len(values), [(one - 2 * _p_phi_matrix(v)) @ (one - 2 * _P0) for v in values])


def _two_symmetries(zeta: complex, tol: ToleranceConfig) -> tuple[np.ndarray, np.ndarray]:
    if abs(abs(zeta) - 1.0) > tol.eq_tol:
        raise DomainError(f"|zeta| must be 1, got {abs(zeta)!r}")
    alpha = min(1.0, max(-1.0, zeta.real))
    if 1.0 + alpha <= tol.eq_tol:
        phi = math.inf
    else:
        phi = math.sqrt((1.0 - alpha) / (1.0 + alpha))
    w = _ROTATION_FRAME if zeta.imag >= 0 else _ROTATION_FRAME[:, ::-1]
    wh = w.conj().T
    p = wh @ _p_phi_matrix(phi) @ w
    q = wh @ _P0 @ w
    return 0.5 * (p + p.conj().T), 0.5 * (q + q.conj().T)


def factor_two_symmetries_2x2(zeta: complex, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[Element, Element]:
    """Projections ``p, q`` in M_2 with ``(1 - 2p)(1 - 2q) = diag(zeta, conj(zeta))``."""
    p, q = _two_symmetries(complex(zeta), tol)
    return Element([2], [p]), Element([2], [q])


@dataclass(frozen=True, eq=False)
class SymmetryFactorization:
    """``input`` written as the ordered product of ``1 - 2 p`` over ``factors``."""

    input: Element
    factors: tuple[Element, ...]
    residual: float

    def product(self) -> Element:
        acc = self.input.shape.identity()
        for p in self.factors:
            acc = acc @ (acc.shape.identity() - 2.0 * p)
        return acc

    def to_json(self) -> dict:
        return {
            "input": self.input.to_json(),
            "factor_count": len(self.factors),
            "factors": [p.to_json() for p in self.factors],
            "residual": self.residual,
        }


def _polar_correct(u: Element, tol: ToleranceConfig) -> Element:
    one = u.shape.identity()
    drift = max((u @ u.adj).dist(one), (u.adj @ u).dist(one))
    if drift > tol.verify_tol:
        raise DomainError(f"input is not unitary (drift {drift:.3e})")
    return u.map_blocks(lambda m: scipy.linalg.polar(m)[0])


def _det1_block(u: np.ndarray, tol: ToleranceConfig) -> list[np.ndarray]:
    """Projections (n x n) whose symmetries multiply to the det-1 unitary ``u``."""
    n = u.shape[0]
    if n == 1:
        return []
    t, z = scipy.linalg.schur(u, output="complex")
    offdiag = np.linalg.norm(t - np.diag(np.diagonal(t)))
    if offdiag > tol.verify_tol:
        raise NumericError(f"Schur form of a unitary is not diagonal (off-diagonal {offdiag:.3e})")
    zetas = np.diagonal(t) / np.abs(np.diagonal(t))
    zh = z.conj().T
    out = []
    partial = 1.0 + 0.0j
    for i in range(n - 1):
        partial *= zetas[i]
        if abs(partial - 1.0) <= tol.rank_tol:
            continue
        p2, q2 = _two_symmetries(partial / abs(partial), tol)
        for m in (p2, q2):
            emb = np.zeros((n, n), dtype=complex)
            emb[i:i + 2, i:i + 2] = m
            conj = z @ emb @ zh
            out.append(0.5 * (conj + conj.conj().T))
    return out


def _merge(shape: AlgebraShape, per_block: Sequence[list[np.ndarray]]) -> list[Element]:
    count = max((len(f) for f in per_block), default=0)
    merged = []
    for k in range(count):
        blocks = [f[k] if k < len(f) else np.zeros((n, n), dtype=complex) for n, f in zip(shape, per_block)]
        merged.append(Element(shape, blocks))
    return merged


def _finish(u: Element, factors: list[Element]) -> SymmetryFactorization:
    out = SymmetryFactorization(u, tuple(factors), 0.0)
    object.__setattr__(out, "residual", out.product().dist(u))
    return out


def factor_det1(u: Element, tol: ToleranceConfig = DEFAULT_TOL) -> SymmetryFactorization:
    """Factor a unitary with every block determinant 1 into at most 2(n-1) symmetries.

    Factors of different blocks are merged position by position, so the list
    length is the largest per-block count.
    """
    for d in block_det(u):
        if abs(d - 1.0) > tol.verify_tol:
            raise DomainError(f"factor_det1 needs determinant 1 in every block, got {d:.6g}")
    fixed = _polar_correct(u, tol)
    per_block = [_det1_block(blk, tol) for blk in fixed.blocks]
    return _finish(u, _merge(u.shape, per_block))


def factor_det_pm1(u: Element, tol: ToleranceConfig = DEFAULT_TOL) -> SymmetryFactorization:
    """Factor a unitary with every block determinant +-1; one extra factor for det -1."""
    dets = block_det(u)
    for d in dets:
        if abs(d * d - 1.0) > tol.verify_tol:
            raise DomainError(f"determinant must square to 1, got {d:.6g}")
    flip = [d.real < 0 for d in dets]
    if not any(flip):
        return factor_det1(u, tol)
    r = Element(u.shape, [
        np.diag([1.0] + [0.0] * (n - 1)).astype(complex) if f else np.zeros((n, n), dtype=complex)
        for n, f in zip(u.shape, flip)
    ])
    corrected = u @ (u.shape.identity() - 2.0 * r)
    inner = factor_det1(corrected, tol)
    return _finish(u, list(inner.factors) + [r])


def conjugate(u: Element, p: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """The action ``u . p = u p u*``."""
    if not is_unitary(u, tol):
        raise DomainError("conjugate needs a unitary")
    if not is_projection(p, tol):
        raise DomainError("conjugate needs a projection")
    return (u @ p @ u.adj).hermitian_part()


def boolean_symmetry_product(p: Element, q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> Element:
    """``s_p s_q`` in a commutative algebra, checked against ``s_{p xor q}``."""
    if not p.shape.is_commutative:
        raise StructuralError("boolean_symmetry_product needs a commutative shape")
    product = symmetry_of(p, tol) @ symmetry_of(q, tol)
    delta = p + q - 2.0 * (p @ q)
    expected = symmetry_of(delta, tol)
    if product.dist(expected) > tol.eq_tol:
        raise NumericError("symmetric-difference identity failed")
    return product
