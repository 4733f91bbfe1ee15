"""Active lattices and reconstruction of algebra maps from lattice data.

A map between block algebras is handled as a black-box :class:`MorphismCandidate`
and every property of it is checked on seeded samples.  Reconstruction reads
a system of matrix units off the images of a few projections and symmetries,
builds the candidate linear map ``g`` from them, and compares ``g`` with ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .core import (
    DEFAULT_TOL,
    AlgebraShape,
    Element,
    SeededSampler,
    ToleranceConfig,
    adjugate2,
    block_det,
    four_unitaries,
    is_projection,
    is_unitary,
    random_element,
    random_normal,
    random_projection,
    random_selfadjoint,
    random_special_unitary,
    random_unitary,
)
from .errors import DomainError, ReconstructionError, StructuralError
from .lattice import join, vector_projection
from .symmetry import sym_member

SCOPES = ("normals", "all")


def _shape(shape) -> AlgebraShape:
    return shape if isinstance(shape, AlgebraShape) else AlgebraShape(shape)


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def _is_normal(x: Element, tol: ToleranceConfig) -> bool:
    return (x @ x.adj).dist(x.adj @ x) <= tol.verify_tol


# ---------------------------------------------------------------------------
# morphism candidates

@dataclass(frozen=True, eq=False)
class MorphismCandidate:
    """A deterministic map from one block algebra to another.

    ``scope`` says where ``evaluate`` is defined: ``"all"`` elements or only
    ``"normals"``.  Calling the candidate checks the input shape and scope.
    """

    domain_shape: AlgebraShape
    codomain_shape: AlgebraShape
    evaluate: Callable[[Element], Element]
    scope: str = "all"
    name: str = "candidate"
    tol: ToleranceConfig = DEFAULT_TOL
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "domain_shape", _shape(self.domain_shape))
        object.__setattr__(self, "codomain_shape", _shape(self.codomain_shape))
        if self.scope not in SCOPES:
            raise StructuralError(f"scope must be one of {SCOPES}, got {self.scope!r}")

    def __call__(self, x: Element) -> Element:
        if x.shape != self.domain_shape:
            raise StructuralError(f"{self.name} expects shape {self.domain_shape}, got {x.shape}")
        if self.scope == "normals" and not _is_normal(x, self.tol):
            raise DomainError(f"{self.name} is only defined on normal elements")
        out = self.evaluate(x)
        if out.shape != self.codomain_shape:
            raise StructuralError(f"{self.name} returned shape {out.shape}, declared {self.codomain_shape}")
        return out


def identity_morphism(shape) -> MorphismCandidate:
    shape = _shape(shape)
    return MorphismCandidate(shape, shape, lambda x: x, name="identity")


def conjugation_morphism(u: Element, tol: ToleranceConfig = DEFAULT_TOL) -> MorphismCandidate:
    """The inner automorphism ``x -> u x u*``."""
    if not is_unitary(u, tol):
        raise DomainError("conjugation needs a unitary")
    return MorphismCandidate(u.shape, u.shape, lambda x: u @ x @ u.adj, name="conj", tol=tol)


def block_perm_morphism(domain_shape, perm: Sequence[int], unitaries: Sequence[Element | np.ndarray],
                        tol: ToleranceConfig = DEFAULT_TOL) -> MorphismCandidate:
    """Output block ``k`` is ``U_k x_{perm[k]} U_k*``; ``perm`` must be a permutation."""
    domain_shape = _shape(domain_shape)
    perm = [int(k) for k in perm]
    if sorted(perm) != list(range(len(domain_shape))):
        raise StructuralError(f"perm {perm} is not a permutation of the blocks")
    mats = []
    for k, u in enumerate(unitaries):
        m = u.blocks[0] if isinstance(u, Element) else np.asarray(u, dtype=complex)
        n = domain_shape.block_dims[perm[k]]
        if m.shape != (n, n):
            raise StructuralError(f"unitary {k} must be {n}x{n}")
        if np.linalg.norm(m @ m.conj().T - np.eye(n), 2) > tol.verify_tol:
            raise DomainError(f"matrix {k} is not unitary")
        mats.append(m)
    if len(mats) != len(perm):
        raise StructuralError("one unitary per output block is required")
    codomain = AlgebraShape([domain_shape.block_dims[k] for k in perm])

    def evaluate(x: Element) -> Element:
        return Element(codomain, [m @ x.blocks[k] @ m.conj().T for m, k in zip(mats, perm)])

    return MorphismCandidate(domain_shape, codomain, evaluate, name="block_perm", tol=tol)


def entrywise_conjugation(shape) -> MorphismCandidate:
    """``x -> conj(x)`` entrywise: a conjugate-linear *-ring automorphism.

    On projections it agrees with the transpose, since ``conj(p) = p^T``.
    """
    shape = _shape(shape)
    return MorphismCandidate(shape, shape, lambda x: x.map_blocks(np.conj), name="entrywise_conj")


def random_star_isomorphism(shape, sampler: SeededSampler) -> MorphismCandidate:
    """Blockwise Haar conjugation followed by a random size-preserving block permutation."""
    shape = _shape(shape)
    rng = sampler.generator()
    dims = shape.block_dims
    perm = list(range(len(dims)))
    for n in sorted(set(dims)):
        same = [k for k, m in enumerate(dims) if m == n]
        shuffled = list(rng.permutation(same))
        for k, src in zip(same, shuffled):
            perm[k] = int(src)
    u = random_unitary(shape, sampler)
    return block_perm_morphism(shape, perm, [u.blocks[perm[k]] for k in range(len(dims))])


def morphism_from_json(data, shape, tol: ToleranceConfig = DEFAULT_TOL) -> MorphismCandidate:
    """Decode a morphism description by its ``kind``: identity, conj, block_perm, counterexample_m2 or scale."""
    shape = _shape(shape)
    if not isinstance(data, dict) or "kind" not in data:
        raise StructuralError("morphism JSON must be an object with a 'kind'")
    kind = data["kind"]
    if kind == "identity":
        return identity_morphism(shape)
    if kind == "conj":
        u = Element.from_json(data.get("unitary"))
        if u.shape != shape:
            raise StructuralError(f"unitary shape {u.shape} does not match algebra {shape}")
        return conjugation_morphism(u, tol)
    if kind == "block_perm":
        unitaries = [Element.from_json(e) for e in data.get("unitaries", [])]
        return block_perm_morphism(shape, data.get("perm", []), unitaries, tol)
    if kind == "counterexample_m2":
        if shape.block_dims != (2,):
            raise StructuralError("the counterexample lives on shape [2]")
        return counterexample_maps(tol)[0]
    if kind == "scale":
        try:
            re, im = data.get("factor", [1.0, 0.0])
            c = complex(float(re), float(im))
        except (TypeError, ValueError) as exc:
            raise StructuralError(f"scale factor must be [re, im]: {exc}") from None
        return MorphismCandidate(shape, shape, lambda x: c * x, name="scale", tol=tol)
    raise StructuralError(f"unknown morphism kind {kind!r}")


# ---------------------------------------------------------------------------
# the active lattice of a block algebra

@dataclass(frozen=True)
class ActiveLatticeView:
    """Projections, the symmetry group ``det^2 = 1`` and the conjugation action."""

    shape: AlgebraShape
    tol: ToleranceConfig = DEFAULT_TOL

    def projection_test(self, p: Element) -> bool:
        return p.shape == self.shape and is_projection(p, self.tol)

    def group_test(self, u: Element) -> bool:
        return u.shape == self.shape and is_unitary(u, self.tol) and sym_member(u, self.tol)

    def action(self, u: Element, p: Element) -> Element:
        if u.shape != self.shape or p.shape != self.shape:
            raise StructuralError("action arguments must live on the view's shape")
        return (u @ p @ u.adj).hermitian_part()

    def random_group_element(self, sampler: SeededSampler) -> Element:
        rng = sampler.generator()
        dets = [1.0 if rng.random() < 0.5 else -1.0 for _ in self.shape]
        return random_special_unitary(self.shape, sampler, det=dets)

    def invariant_residuals(self, sampler: SeededSampler, samples: int = 50) -> dict[str, float]:
        """Largest violation of each view invariant over ``samples`` draws."""
        one = self.shape.identity()
        worst = dict.fromkeys(("symmetry_membership", "unit_action", "composition", "ortho", "join"), 0.0)
        for _ in range(samples):
            p = random_projection(self.shape, sampler)
            q = random_projection(self.shape, sampler)
            u, v = self.random_group_element(sampler), self.random_group_element(sampler)
            if not self.group_test(one - 2.0 * p):
                worst["symmetry_membership"] = math.inf
            worst["unit_action"] = max(worst["unit_action"], self.action(one, p).dist(p))
            lhs = self.action(u, self.action(v, p))
            worst["composition"] = max(worst["composition"], lhs.dist(self.action(u @ v, p)))
            worst["ortho"] = max(worst["ortho"], self.action(u, one - p).dist(one - self.action(u, p)))
            image_join = join(self.action(u, p), self.action(u, q), self.tol)
            worst["join"] = max(worst["join"], self.action(u, join(p, q, self.tol)).dist(image_join))
        return worst


def active_proj(shape, tol: ToleranceConfig = DEFAULT_TOL) -> ActiveLatticeView:
    return ActiveLatticeView(_shape(shape), tol)


def _sampled(sampler: SeededSampler | None) -> SeededSampler:
    return sampler if sampler is not None else SeededSampler(0)


def _evaluate(f: MorphismCandidate, x: Element, context: str) -> Element:
    try:
        return f(x)
    except Exception as exc:
        raise DomainError(f"{f.name} failed at {context}: {exc}") from exc


def dye_condition_check(f: MorphismCandidate, samples: int = 200, sampler: SeededSampler | None = None) -> float:
    """Max over sampled projection pairs of ``|f(s_p q s_p) - s_f(p) f(q) s_f(p)|``."""
    sampler = _sampled(sampler)
    one, one_c = f.domain_shape.identity(), f.codomain_shape.identity()
    worst = 0.0
    for k in range(samples):
        p = random_projection(f.domain_shape, sampler)
        q = random_projection(f.domain_shape, sampler)
        sp = one - 2.0 * p
        lhs = _evaluate(f, (sp @ q @ sp).hermitian_part(), f"sample {k}")
        s_fp = one_c - 2.0 * _evaluate(f, p, f"sample {k}")
        rhs = s_fp @ _evaluate(f, q, f"sample {k}") @ s_fp
        worst = max(worst, lhs.dist(rhs))
    return worst


def equivariance_residuals(f: MorphismCandidate, g: MorphismCandidate, samples: int = 200,
                           sampler: SeededSampler | None = None) -> dict[str, float]:
    """Residuals of ``g(1-2p) = 1-2f(p)`` and ``g(u) f(p) g(u)* = f(u p u*)`` on samples."""
    sampler = _sampled(sampler)
    view = active_proj(f.domain_shape, f.tol)
    one, one_c = f.domain_shape.identity(), f.codomain_shape.identity()
    symmetry, action = 0.0, 0.0
    for k in range(samples):
        p = random_projection(f.domain_shape, sampler)
        u = view.random_group_element(sampler)
        fp = _evaluate(f, p, f"sample {k}")
        symmetry = max(symmetry, _evaluate(g, one - 2.0 * p, f"sample {k}").dist(one_c - 2.0 * fp))
        gu = _evaluate(g, u, f"sample {k}")
        action = max(action, (gu @ fp @ gu.adj).dist(_evaluate(f, view.action(u, p), f"sample {k}")))
    return {"symmetry": symmetry, "action": action}


def morphism_residuals(h: MorphismCandidate, samples: int = 100, sampler: SeededSampler | None = None,
                       word_length: int = 6) -> dict[str, float]:
    """Active-lattice checks for a candidate map: lattice, symmetry words, equivariance, Dye."""
    sampler = _sampled(sampler)
    shape, tol = h.domain_shape, h.tol
    one, one_c = shape.identity(), h.codomain_shape.identity()
    worst = {"ortho": 0.0, "join": 0.0, "symmetry_words": 0.0}
    for _ in range(samples):
        p, q = random_projection(shape, sampler), random_projection(shape, sampler)
        hp, hq = h(p), h(q)
        worst["ortho"] = max(worst["ortho"], h(one - p).dist(one_c - hp))
        worst["join"] = max(worst["join"], h(join(p, q, tol)).dist(join(hp.hermitian_part(), hq.hermitian_part(), tol)))
        word, image = one, one_c
        for _ in range(word_length):
            r = random_projection(shape, sampler)
            word = word @ (one - 2.0 * r)
            image = image @ (one_c - 2.0 * h(r))
        worst["symmetry_words"] = max(worst["symmetry_words"], h(word).dist(image))
    worst.update({f"equivariance_{k}": v for k, v in equivariance_residuals(h, h, samples, sampler).items()})
    worst["dye"] = dye_condition_check(h, samples, sampler)
    return worst


# ---------------------------------------------------------------------------
# Jordan identities

def jordan(a: Element, b: Element) -> Element:
    """The symmetrised product ``(ab + ba)/2``."""
    return 0.5 * (a @ b + b @ a)


@dataclass(frozen=True, eq=False)
class JordanExpansion:
    value: Element
    target: Element
    residual: float


def jordan_expand(p: Element, q: Element, coefficient: float = 4.0,
                  tol: ToleranceConfig = DEFAULT_TOL) -> JordanExpansion:
    """``q - c (p.q) + 4 ((p+q-1)^2 . p)`` compared against ``s_p q s_p``.

    Only ``c = 4`` makes this an identity; other values are accepted so the
    failure of a wrong coefficient can be measured.
    """
    if not (is_projection(p, tol) and is_projection(q, tol)):
        raise DomainError("jordan_expand needs projections")
    one = p.shape.identity()
    r = p + q - one
    value = q - coefficient * jordan(p, q) + 4.0 * jordan(r @ r, p)
    sp = one - 2.0 * p
    target = sp @ q @ sp
    return JordanExpansion(value, target, value.dist(target))


def _star_ring_residuals(f: MorphismCandidate, samples: int, sampler: SeededSampler) -> dict[str, float]:
    draw = random_normal if f.scope == "normals" else random_element
    worst = {"additive": 0.0, "multiplicative": 0.0, "involution": 0.0}
    for _ in range(samples):
        a, b = draw(f.domain_shape, sampler), draw(f.domain_shape, sampler)
        fa, fb = f(a), f(b)
        worst["involution"] = max(worst["involution"], f(a.adj).dist(fa.adj))
        if f.scope == "all":
            worst["additive"] = max(worst["additive"], f(a + b).dist(fa + fb))
            worst["multiplicative"] = max(worst["multiplicative"], f(a @ b).dist(fa @ fb))
    return worst


def jordan_from_star_ring(f: MorphismCandidate, samples: int = 100, sampler: SeededSampler | None = None) -> MorphismCandidate:
    """The linear Jordan map ``g = f_+ + (f_-)*`` of a *-ring homomorphism.

    ``q_+ = (1 - i f(i))/2`` carries the complex-linear part of ``f`` and
    ``q_- = (1 + i f(i))/2`` the conjugate-linear part; ``f_-`` is undone by
    the involution so ``g`` is complex linear and agrees with ``f`` on
    self-adjoint elements.
    """
    sampler = _sampled(sampler)
    if f.scope != "all":
        raise DomainError("jordan_from_star_ring needs a map defined on all elements")
    tol = f.tol
    checks = _star_ring_residuals(f, samples, sampler)
    bad = {k: v for k, v in checks.items() if v > tol.verify_tol}
    if bad:
        raise DomainError(f"input is not a *-ring homomorphism on samples: {bad}")
    one_c = f.codomain_shape.identity()
    fi = f(1j * f.domain_shape.identity())
    q_plus = 0.5 * (one_c - 1j * fi)
    q_minus = 0.5 * (one_c + 1j * fi)

    def f_plus(a: Element) -> Element:
        return 0.5 * (f(a) - 1j * f(1j * a))

    def f_minus(a: Element) -> Element:
        return 0.5 * (f(a) + 1j * f(1j * a))

    def g_eval(a: Element) -> Element:
        return f_plus(a) + f_minus(a).adj

    g = MorphismCandidate(f.domain_shape, f.codomain_shape, g_eval, name=f"jordan({f.name})", tol=tol)
    agree, squares = 0.0, 0.0
    for _ in range(samples):
        h = random_selfadjoint(f.domain_shape, sampler)
        agree = max(agree, g(h).dist(f(h)))
        a = random_normal(f.domain_shape, sampler)
        ga = g(a)
        squares = max(squares, g(a @ a).dist(ga @ ga))
    g.diagnostics.update({
        "q_plus": q_plus,
        "q_minus": q_minus,
        "selfadjoint_agreement": agree,
        "square_residual": squares,
        "star_ring_residuals": checks,
    })
    return g


# ---------------------------------------------------------------------------
# the M_2 counterexample

def _spectral_parts(x: np.ndarray, tol: ToleranceConfig) -> list[tuple[complex, np.ndarray]]:
    t, z = scipy.linalg.schur(x, output="complex")
    eig = np.diagonal(t)
    groups: list[tuple[complex, list[int]]] = []
    for k, lam in enumerate(eig):
        for g_lam, members in groups:
            if abs(lam - g_lam) <= math.sqrt(tol.eq_tol):
                members.append(k)
                break
        else:
            groups.append((lam, [k]))
    parts = []
    for lam, members in groups:
        cols = z[:, members]
        parts.append((complex(np.mean(eig[members])), cols @ cols.conj().T))
    return parts


def counterexample_maps(tol: ToleranceConfig = DEFAULT_TOL) -> tuple[MorphismCandidate, MorphismCandidate]:
    """``f(p) = 1 - p`` on nontrivial projections of M_2 and ``g(u) = det(u) u`` on Sym.

    ``f`` is returned on all normal elements: symmetry-group members go
    through ``g`` and other normal elements through the spectral extension of
    the projection map.
    """
    shape = AlgebraShape([2])
    one, zero = shape.identity(), shape.zero()

    def f_proj(p: Element) -> Element:
        if p.dist(zero) <= tol.eq_tol:
            return zero
        if p.dist(one) <= tol.eq_tol:
            return one
        return (one - p).hermitian_part()

    def g_eval(u: Element) -> Element:
        if not (is_unitary(u, tol) and sym_member(u, tol)):
            raise DomainError("g is only defined on the symmetry group")
        return block_det(u)[0] * u

    def f_eval(x: Element) -> Element:
        if is_projection(x, tol):
            return f_proj(x)
        if is_unitary(x, tol) and sym_member(x, tol):
            return g_eval(x)
        out = np.zeros((2, 2), dtype=complex)
        for lam, proj in _spectral_parts(x.blocks[0], tol):
            out += lam * f_proj(Element(shape, [proj])).blocks[0]
        return Element(shape, [out])

    f = MorphismCandidate(shape, shape, f_eval, scope="normals", name="counterexample_f", tol=tol)
    g = MorphismCandidate(shape, shape, g_eval, scope="normals", name="counterexample_g", tol=tol)
    return f, g


@dataclass(frozen=True)
class CounterexampleReport:
    equivariance_residual: float
    symmetry_residual: float
    action_residual: float
    spot_check_residual: float
    extension_margin: float
    fixes_bounds: bool
    samples: int
    tol: ToleranceConfig

    @property
    def equivariant(self) -> bool:
        return self.equivariance_residual <= self.tol.verify_tol and self.fixes_bounds

    @property
    def extension_fails(self) -> bool:
        return self.extension_margin >= 0.5

    @property
    def passed(self) -> bool:
        return self.equivariant and self.extension_fails

    def to_json(self) -> dict:
        return {
            "equivariance_residual": self.equivariance_residual,
            "symmetry_residual": self.symmetry_residual,
            "action_residual": self.action_residual,
            "spot_check_residual": self.spot_check_residual,
            "fixes_zero_and_one": self.fixes_bounds,
            "equivariant": self.equivariant,
            "linear_extension_margin": self.extension_margin,
            "linear_extension_fails": self.extension_fails,
            "samples": self.samples,
            "passed": self.passed,
        }


def counterexample_m2(samples: int = 500, sampler: SeededSampler | None = None,
                      tol: ToleranceConfig = DEFAULT_TOL):
    """Return ``(f, g, report)`` for the equivariant pair with no linear extension."""
    f, g = counterexample_maps(tol)
    shape = f.domain_shape
    res = equivariance_residuals(f, g, samples, sampler)
    u_swap = Element(shape, [[[0, 1], [1, 0]]])
    e11 = shape.matrix_unit(0, 0, 0)
    spot = (g(u_swap) @ f(e11) @ g(u_swap).adj).dist(f(u_swap @ e11 @ u_swap.adj))
    zeta = 1j
    u = zeta * e11 + zeta.conjugate() * (shape.identity() - e11)
    linear_guess = zeta * f(e11) + zeta.conjugate() * f(shape.identity() - e11)
    margin = g(u).dist(linear_guess)
    bounds = f(shape.zero()).norm() == 0.0 and f(shape.identity()).dist(shape.identity()) == 0.0
    report = CounterexampleReport(
        equivariance_residual=max(res["symmetry"], res["action"], spot),
        symmetry_residual=res["symmetry"],
        action_residual=res["action"],
        spot_check_residual=spot,
        extension_margin=margin,
        fixes_bounds=bounds,
        samples=samples,
        tol=tol,
    )
    return f, g, report


# ---------------------------------------------------------------------------
# matrix units and coordinates

def _embed(shape: AlgebraShape, block: int, m: np.ndarray, fill_identity: bool = False) -> Element:
    blocks = [np.eye(n, dtype=complex) if fill_identity else np.zeros((n, n), dtype=complex) for n in shape]
    blocks[block] = np.asarray(m, dtype=complex)
    return Element(shape, blocks)


def _unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


@dataclass(frozen=True, eq=False)
class GaugeData:
    """Images ``e'_ij`` of the matrix units of one domain block, plus the gauge ``W``."""

    block: int
    units: dict
    gauge: np.ndarray
    relation_residual: float


def _diagonal_gauge(f: MorphismCandidate, block: int, tol: ToleranceConfig) -> np.ndarray:
    """``diag(1, beta_2, ..)`` when ``f(e_ii)`` are the standard units of one codomain block."""
    n = f.domain_shape.block_dims[block]
    shape, cod = f.domain_shape, f.codomain_shape
    images = [f(_embed(shape, block, _unit(n, i, i))) for i in range(n)]
    target = None
    for k, m in enumerate(cod.block_dims):
        if m == n and all(img.dist(_embed(cod, k, _unit(n, i, i))) <= tol.verify_tol for i, img in enumerate(images)):
            target = k
            break
    if target is None:
        return np.eye(n, dtype=complex)
    betas = [1.0 + 0.0j]
    for j in range(1, n):
        blk = f(_embed(shape, block, _vp(n, 0, j, 1.0))).blocks[target]
        beta = blk[0, j] / blk[0, 0]
        betas.append(beta / abs(beta))
    return np.diag(betas)


def _vp(n: int, i: int, j: int, alpha: complex) -> np.ndarray:
    return vector_projection([n], i, j, alpha).blocks[0]


def gauge_matrix_units(f: MorphismCandidate, block: int = 0) -> GaugeData:
    """Matrix units ``e'_ij`` in the codomain built from images under ``f``.

    ``e'_ii = f(e_ii)``.  For a 2x2 block ``e'_12 = f(e_11) f(u)`` with the
    swap symmetry ``u``; for larger blocks ``e'_1j = 2 f(e_11) f(p_1j(1)) f(e_jj)``.
    The matrix-unit relations are then checked exhaustively.
    """
    tol = f.tol
    shape, cod = f.domain_shape, f.codomain_shape
    n = shape.block_dims[block]
    diag = [f(_embed(shape, block, _unit(n, i, i))) for i in range(n)]
    units = {(i, i): diag[i] for i in range(n)}
    if n == 2:
        swap = _unit(2, 0, 1) + _unit(2, 1, 0)
        units[0, 1] = diag[0] @ f(_embed(shape, block, swap, fill_identity=True))
    else:
        for j in range(1, n):
            units[0, j] = 2.0 * (diag[0] @ f(_embed(shape, block, _vp(n, 0, j, 1.0))) @ diag[j])
    for j in range(1, n):
        units[j, 0] = units[0, j].adj
    for i in range(1, n):
        for j in range(1, n):
            if i != j:
                units[i, j] = units[i, 0] @ units[0, j]
    worst, where = 0.0, None
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    expected = units[i, l] if j == k else cod.zero()
                    r = (units[i, j] @ units[k, l]).dist(expected)
                    if r > worst:
                        worst, where = r, (i, j, k, l)
            worst = max(worst, units[i, j].adj.dist(units[j, i]))
    if worst > tol.verify_tol:
        raise ReconstructionError("matrix units", f"relation e'_ij e'_kl = delta_jk e'_il fails at {where} (residual {worst:.3e})")
    gauge = _diagonal_gauge(f, block, tol) if n >= 2 else np.eye(1, dtype=complex)
    return GaugeData(block, units, gauge, worst)


@dataclass(frozen=True)
class CoordinateMap:
    """The scalar map ``phi`` read off the gauged images of ``p_12(alpha)``."""

    phi_i: complex
    conjugate_linear: bool
    residuals: dict

    def __call__(self, z) -> complex:
        z = complex(z)
        return z.conjugate() if self.conjugate_linear else z

    def max_residual(self) -> float:
        return max(self.residuals.values())


def _coordinates(units: dict, y: Element, i: int, j: int) -> complex:
    """``tr(e'_ji y)``: the (i, j) coordinate of ``y`` times the multiplicity of the frame."""
    return sum(np.trace(a @ b) for a, b in zip(units[j, i].blocks, y.blocks))


def _phi_value(f: MorphismCandidate, gauge: GaugeData, alpha: complex, tol: ToleranceConfig) -> complex:
    shape = f.domain_shape
    n = shape.block_dims[gauge.block]
    y = f(_embed(shape, gauge.block, _vp(n, 0, 1, alpha)))
    c11 = _coordinates(gauge.units, y, 0, 0)
    if abs(c11) <= tol.rank_tol:
        raise ReconstructionError("coordinate", f"entry (1,1) vanishes for alpha={alpha}")
    return complex(_coordinates(gauge.units, y, 0, 1) / c11)


def extract_coordinate_map(f: MorphismCandidate, gauge: GaugeData, samples: int = 50,
                           sampler: SeededSampler | None = None) -> CoordinateMap:
    """Sample ``phi`` and measure how far it is from a continuous *-ring endomorphism of C.

    The only such maps are the identity and complex conjugation, fixed by
    ``phi(i) = +-i``; the residuals compare ``phi`` with that model and test
    additivity, multiplicativity and the involution directly.
    """
    tol = f.tol
    if f.domain_shape.block_dims[gauge.block] < 2:
        raise ReconstructionError("coordinate", "coordinate map needs a block of size >= 2")
    rng = _sampled(sampler).generator()
    phi = lambda a: _phi_value(f, gauge, a, tol)  # noqa: E731
    phi_i = phi(1j)
    conj = abs(phi_i + 1j) < abs(phi_i - 1j)
    model = (lambda z: complex(z).conjugate()) if conj else (lambda z: complex(z))
    res = {
        "zero": abs(phi(0.0)),
        "one": abs(phi(1.0) - 1.0),
        "additive": 0.0,
        "multiplicative": 0.0,
        "involution": 0.0,
        "model": 0.0,
    }
    for _ in range(samples):
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        pa, pb = phi(a), phi(b)
        res["additive"] = max(res["additive"], abs(phi(a + b) - pa - pb))
        res["multiplicative"] = max(res["multiplicative"], abs(phi(a * b) - pa * pb))
        res["involution"] = max(res["involution"], abs(phi(a.conjugate()) - pa.conjugate()))
        res["model"] = max(res["model"], abs(pa - model(a)))
    return CoordinateMap(phi_i, bool(conj), res)


# ---------------------------------------------------------------------------
# type I_2: adjugate reduction and the four-factor identity

@dataclass(frozen=True, eq=False)
class TypeI2Factors:
    """``1 - 2q' = F1 F2 F3 F4`` for ``q' = q - det(q) 1`` in an all-2x2 algebra."""

    reduced: Element
    tau: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    zeta: np.ndarray
    xi: np.ndarray
    factors: tuple[Element, Element, Element, Element]
    residual: float


def type_I2_factors(q: Element, tol: ToleranceConfig = DEFAULT_TOL) -> TypeI2Factors:
    """Run the adjugate / tau / (alpha, beta, zeta) / xi pipeline on a projection.

    Raises :class:`ReconstructionError` naming the step that degenerates.
    """
    if any(n != 2 for n in q.shape):
        raise StructuralError("type I_2 factors need every block to be 2x2")
    if not is_projection(q, tol):
        raise DomainError("type I_2 factors need a projection")
    shape = q.shape
    dets = np.array([np.mean(np.diagonal(m)) for m in (q @ adjugate2(q)).blocks])
    reduced = q - shape.scalar(dets)
    tau = np.array([np.trace(m) for m in reduced.blocks])
    if np.max(np.abs(tau * (tau - 1.0)), initial=0.0) > tol.verify_tol:
        raise ReconstructionError("tau", f"trace of the reduced projection is not 0/1: {tau}")
    tau = np.round(tau.real)
    alpha = np.array([(m[0, 0] - m[1, 1]).real for m in reduced.blocks])
    off = np.array([m[0, 1] for m in reduced.blocks])
    beta = 2.0 * np.abs(off)
    if np.max(np.abs(alpha ** 2 + beta ** 2 - tau), initial=0.0) > tol.verify_tol:
        raise ReconstructionError("parametrization", "alpha^2 + beta^2 != tau")
    # partial isometry off/|off|, completed to a unitary where it vanishes
    zeta = np.where(beta > tol.rank_tol, off / np.where(beta > 0, np.abs(off), 1.0), 1.0 + 0.0j)
    if np.max(np.abs(np.abs(zeta) - 1.0), initial=0.0) > tol.eq_tol:
        raise ReconstructionError("phase", "completed phase is not unimodular")
    xi = np.sqrt(-1j * zeta)
    if np.max(np.abs(1j * xi ** 2 - zeta), initial=0.0) > tol.eq_tol:
        raise ReconstructionError("square root", "i xi^2 != zeta")
    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    f1, f2, f3, f4 = [], [], [], []
    for t, a, b, x in zip(tau, alpha, beta, xi):
        f1.append(np.diag([t - (1.0 - t), 1.0]))
        f2.append(np.diag([-x, np.conj(x)]))
        f3.append(((1.0 - t) + a) * np.eye(2) + 1j * b * swap)
        f4.append(np.diag([np.conj(x), x]))
    factors = tuple(Element(shape, fs) for fs in (f1, f2, f3, f4))
    product = factors[0] @ factors[1] @ factors[2] @ factors[3]
    residual = product.dist(shape.identity() - 2.0 * reduced)
    if residual > tol.verify_tol:
        raise ReconstructionError("factorization", f"four-factor product misses 1 - 2q' by {residual:.3e}")
    return TypeI2Factors(reduced, tau, alpha, beta, zeta, xi, factors, residual)


# ---------------------------------------------------------------------------
# reconstruction

@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    """Gauge, reconstructed map and residuals; ``verdict`` needs both residuals small."""

    gauge: Element | None
    linear_map: np.ndarray | None
    residual_on_projections: float
    residual_multiplicativity: float
    verdict: bool
    g: MorphismCandidate | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "residual_on_projections": _finite_or_none(self.residual_on_projections),
            "residual_multiplicativity": _finite_or_none(self.residual_multiplicativity),
            "gauge": None if self.gauge is None else self.gauge.to_json(),
            "linear_map_shape": None if self.linear_map is None else list(self.linear_map.shape),
            "diagnostics": self.diagnostics,
        }


def _block_map(units: dict, n: int, phi: Callable[[complex], complex]) -> Callable[[np.ndarray], Element]:
    def apply(m: np.ndarray) -> Element:
        out = None
        for i in range(n):
            for j in range(n):
                if m[i, j] != 0:
                    term = phi(m[i, j]) * units[i, j]
                    out = term if out is None else out + term
        return out

    return apply


def _linear_matrix(g: MorphismCandidate) -> np.ndarray:
    cols = []
    for b, n in enumerate(g.domain_shape):
        for i in range(n):
            for j in range(n):
                img = g(g.domain_shape.matrix_unit(b, i, j))
                cols.append(np.concatenate([m.ravel() for m in img.blocks]))
    return np.array(cols).T


def _pad_i2(shape: AlgebraShape, idx: list[int], sub: Element, fill_identity: bool) -> Element:
    blocks = [np.eye(n, dtype=complex) if fill_identity else np.zeros((n, n), dtype=complex) for n in shape]
    for k, b in enumerate(idx):
        blocks[b] = sub.blocks[k]
    return Element(shape, blocks)


def _i2_pipeline(f: MorphismCandidate, g: MorphismCandidate, idx: list[int], samples: int,
                 sampler: SeededSampler) -> dict:
    """Check ``f = g`` on projections of the size-2 blocks through the four factors."""
    tol = f.tol
    shape = f.domain_shape
    sub = AlgebraShape([2] * len(idx))
    worst = {"factor_agreement": 0.0, "factor_product": 0.0, "projection": 0.0, "sym_member": True, "dets": None}
    for _ in range(samples):
        q = random_projection(sub, sampler)
        data = type_I2_factors(q, tol)
        factors = [_pad_i2(shape, idx, F, True) for F in data.factors]
        worst["sym_member"] &= all(sym_member(F, tol) for F in factors)
        f_prod = g_prod = f.codomain_shape.identity()
        for F in factors:
            fF, gF = f(F), g(F)
            worst["factor_agreement"] = max(worst["factor_agreement"], fF.dist(gF))
            f_prod, g_prod = f_prod @ fF, g_prod @ gF
        one = shape.identity()
        target = f(one - 2.0 * _pad_i2(shape, idx, data.reduced, False))
        worst["factor_product"] = max(worst["factor_product"], f_prod.dist(target))
        qq = _pad_i2(shape, idx, q, False)
        worst["projection"] = max(worst["projection"], f(qq).dist(g(qq)))
        if worst["dets"] is None:
            worst["dets"] = [[complex(d) for d in block_det(F)] for F in data.factors]
    worst["dets"] = [[[d.real, d.imag] for d in row] for row in (worst["dets"] or [])]
    return worst


def _final_checks(f: MorphismCandidate, g: MorphismCandidate, samples: int, sampler: SeededSampler) -> dict:
    shape = f.domain_shape
    proj = mult = normals = 0.0
    for _ in range(samples):
        p = random_projection(shape, sampler)
        proj = max(proj, f(p).dist(g(p)))
        a, b = random_element(shape, sampler), random_element(shape, sampler)
        ga, gb = g(a), g(b)
        mult = max(mult, g(a @ b).dist(ga @ gb), g(a.adj).dist(ga.adj), g(a + b).dist(ga + gb))
        x = random_normal(shape, sampler)
        normals = max(normals, f(x).dist(g(x)))
    return {"projections": proj, "multiplicativity": mult, "normals": normals}


def _build(f: MorphismCandidate, samples: int, sampler: SeededSampler) -> tuple[MorphismCandidate, Element, dict]:
    tol = f.tol
    shape = f.domain_shape
    pieces, gauges, diag = [], [], {"branches": []}
    for b, n in enumerate(shape):
        if n == 1:
            central = f(shape.central_projection(b))
            if not is_projection(central, tol):
                raise ReconstructionError("stone data", f"image of central atom {b} is not a projection")
            pieces.append(lambda m, c=central: complex(m[0, 0]) * c)
            gauges.append(np.eye(1, dtype=complex))
            diag["branches"].append({"block": b, "kind": "commutative"})
            continue
        gauge = gauge_matrix_units(f, b)
        gauges.append(gauge.gauge)
        if n == 2:
            pieces.append(_block_map(gauge.units, 2, complex))
            diag["branches"].append({"block": b, "kind": "type_I2", "relation_residual": gauge.relation_residual})
        else:
            coord = extract_coordinate_map(f, gauge, max(10, samples // 10), sampler)
            if coord.max_residual() > tol.verify_tol:
                raise ReconstructionError("coordinate", f"phi is not a *-ring map on samples: {coord.residuals}")
            pieces.append(_block_map(gauge.units, n, coord))
            diag["branches"].append({
                "block": b, "kind": "matrix_units", "relation_residual": gauge.relation_residual,
                "phi": "conjugation" if coord.conjugate_linear else "identity",
                "phi_residual": coord.max_residual(),
            })

    def g_eval(x: Element) -> Element:
        out = f.codomain_shape.zero()
        for piece, m in zip(pieces, x.blocks):
            term = piece(m)
            if term is not None:
                out = out + term
        return out

    g = MorphismCandidate(shape, f.codomain_shape, g_eval, name=f"reconstructed({f.name})", tol=tol)
    return g, Element(shape, gauges), diag


def reconstruct_type_I2(f: MorphismCandidate, samples: int = 100, sampler: SeededSampler | None = None) -> ReconstructionReport:
    """Reconstruction for an algebra of 2x2 blocks, verified through the four-factor route.

    Degenerate pipeline steps raise :class:`ReconstructionError`.
    """
    if any(n != 2 for n in f.domain_shape):
        raise StructuralError("reconstruct_type_I2 needs every domain block to be 2x2")
    sampler = _sampled(sampler)
    g, gauge, diag = _build(f, samples, sampler)
    pipeline = _i2_pipeline(f, g, list(range(len(f.domain_shape))), samples, sampler)
    final = _final_checks(f, g, samples, sampler)
    diag["type_I2"] = pipeline
    diag["residual_on_normals"] = final["normals"]
    proj = max(final["projections"], pipeline["projection"])
    ok = proj <= f.tol.verify_tol and final["multiplicativity"] <= f.tol.verify_tol
    return ReconstructionReport(gauge, _linear_matrix(g), proj, final["multiplicativity"], ok, g, diag)


def reconstruct(f: MorphismCandidate, samples: int = 100, sampler: SeededSampler | None = None) -> ReconstructionReport:
    """Reconstruct ``g`` block by block and verify it against ``f``.

    Size-1 blocks use the image of their central atom, size-2 blocks the
    type I_2 frame (checked through the four-factor identity), larger blocks
    the matrix-unit frame with the coordinate map.  Any branch failure gives a
    report with ``verdict`` false and the failing step in ``diagnostics``.
    """
    sampler = _sampled(sampler)
    try:
        g, gauge, diag = _build(f, samples, sampler)
        idx = [b for b, n in enumerate(f.domain_shape) if n == 2]
        if idx:
            diag["type_I2"] = _i2_pipeline(f, g, idx, samples, sampler)
        final = _final_checks(f, g, samples, sampler)
    except (ReconstructionError, DomainError) as exc:
        return ReconstructionReport(None, None, math.inf, math.inf, False, None,
                                    {"error": str(exc), "step": getattr(exc, "step", "evaluation")})
    diag["residual_on_normals"] = final["normals"]
    proj = final["projections"]
    if "type_I2" in diag:
        proj = max(proj, diag["type_I2"]["projection"])
    ok = proj <= f.tol.verify_tol and final["multiplicativity"] <= f.tol.verify_tol
    return ReconstructionReport(gauge, _linear_matrix(g), proj, final["multiplicativity"], ok, g, diag)


# ---------------------------------------------------------------------------
# extension from self-adjoint additivity

def extend_additive_selfadjoint(f: MorphismCandidate, samples: int = 100,
                                sampler: SeededSampler | None = None) -> MorphismCandidate:
    """Extend ``f`` from normal elements by ``g(a) = f(a1) + i f(a2)``.

    ``f`` must be additive on self-adjoint pairs and multiplicative on
    unitaries (both sampled).  The extension is checked to be multiplicative
    and to agree with the combination of ``f`` on the four unitaries of each
    sampled element.
    """
    sampler = _sampled(sampler)
    tol = f.tol
    shape = f.domain_shape
    additive = group = 0.0
    for _ in range(samples):
        a, b = random_selfadjoint(shape, sampler), random_selfadjoint(shape, sampler)
        additive = max(additive, f(a + b).dist(f(a) + f(b)))
        u, v = random_unitary(shape, sampler), random_unitary(shape, sampler)
        group = max(group, f(u @ v).dist(f(u) @ f(v)))
    if additive > tol.verify_tol:
        raise DomainError(f"f is not additive on self-adjoint pairs (residual {additive:.3e})")
    if group > tol.verify_tol:
        raise DomainError(f"f is not multiplicative on unitaries (residual {group:.3e})")

    def g_eval(a: Element) -> Element:
        re = (0.5 * (a + a.adj)).hermitian_part()
        im = ((-0.5j) * (a - a.adj)).hermitian_part()
        return f(re) + 1j * f(im)

    g = MorphismCandidate(shape, f.codomain_shape, g_eval, name=f"extended({f.name})", tol=tol)
    mult = four = 0.0
    for _ in range(samples):
        a, b = random_element(shape, sampler), random_element(shape, sampler)
        ga = g(a)
        mult = max(mult, g(a @ b).dist(ga @ g(b)))
        scale, us = four_unitaries(a, tol)
        combo = scale * (0.25 * f(us[0]) + 0.25 * f(us[1]) + 0.25j * f(us[2]) + 0.25j * f(us[3]))
        four = max(four, ga.dist(combo))
    g.diagnostics.update({
        "selfadjoint_additivity": additive,
        "unitary_multiplicativity": group,
        "multiplicativity": mult,
        "four_unitary_agreement": four,
        "unit": g(shape.identity()).dist(f.codomain_shape.identity()),
    })
    return g
