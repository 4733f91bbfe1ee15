import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from activelattice.active import (
    MorphismCandidate,
    active_proj,
    block_perm_morphism,
    conjugation_morphism,
    counterexample_m2,
    dye_condition_check,
    entrywise_conjugation,
    extend_additive_selfadjoint,
    extract_coordinate_map,
    gauge_matrix_units,
    identity_morphism,
    jordan_expand,
    jordan_from_star_ring,
    morphism_from_json,
    morphism_residuals,
    random_star_isomorphism,
    reconstruct,
    reconstruct_type_I2,
    type_I2_factors,
)
from activelattice.core import (
    AlgebraShape,
    Element,
    SeededSampler,
    block_det,
    random_element,
    random_normal,
    random_projection,
    random_selfadjoint,
    random_unitary,
)
from activelattice.errors import DomainError, ReconstructionError, StructuralError
from activelattice.lattice import vector_projection
from activelattice.symmetry import sym_member

from conftest import diag_element, m2, seeds

E11 = diag_element(1, 0)
SWAP = m2([[0, 1], [1, 0]])


def _scale(shape, c):
    return MorphismCandidate(shape, shape, lambda x: c * x, name="scale")


# -- the view -------------------------------------------------------------------

def test_group_test_examples():
    comm = active_proj([1, 1, 1])
    assert comm.group_test(Element([1, 1, 1], [[[1]], [[-1]], [[-1]]]))
    assert not comm.group_test(Element([1, 1, 1], [[[1]], [[1j]], [[-1]]]))
    view = active_proj([2])
    assert view.group_test(SWAP)
    assert not view.group_test(diag_element(1j, 1))
    assert view.action(view.shape.identity(), E11).dist(E11) == 0.0


def test_view_invariants(sampler):
    res = active_proj([2, 3]).invariant_residuals(sampler, samples=30)
    assert all(v <= 1e-8 for v in res.values()), res


# -- morphism candidates ------------------------------------------------------------

def test_candidate_checks_shape_and_scope(sampler):
    f = identity_morphism([2])
    with pytest.raises(StructuralError):
        f(AlgebraShape([3]).identity())
    g = MorphismCandidate([2], [2], lambda x: x, scope="normals")
    with pytest.raises(DomainError):
        g(m2([[0, 1], [0, 0]]))
    with pytest.raises(StructuralError):
        MorphismCandidate([2], [2], lambda x: x, scope="some")


def test_block_perm_moves_blocks(sampler):
    u = random_unitary([2, 2], sampler)
    f = block_perm_morphism([2, 2], [1, 0], list(u.blocks))
    x = random_element([2, 2], sampler)
    y = f(x)
    assert np.allclose(y.blocks[0], u.blocks[0] @ x.blocks[1] @ u.blocks[0].conj().T)
    with pytest.raises(StructuralError):
        block_perm_morphism([2, 3], [1, 0], list(random_unitary([2, 3], sampler).blocks))


def test_morphism_from_json_kinds(sampler):
    u = random_unitary([2], sampler)
    f = morphism_from_json({"kind": "conj", "unitary": u.to_json()}, [2])
    assert f(E11).dist(u @ E11 @ u.adj) < 1e-12
    assert morphism_from_json({"kind": "identity"}, [3]).name == "identity"
    assert morphism_from_json({"kind": "counterexample_m2"}, [2])(E11).dist(diag_element(0, 1)) == 0.0
    for bad, shape in (({"kind": "nope"}, [2]), ({}, [2]), ({"kind": "counterexample_m2"}, [3]),
                       ({"kind": "conj", "unitary": u.to_json()}, [3])):
        with pytest.raises(StructuralError):
            morphism_from_json(bad, shape)


# -- Dye condition and Jordan identity ------------------------------------------------

def test_dye_check_examples(sampler):
    u = random_unitary([3], sampler)
    assert dye_condition_check(conjugation_morphism(u), 50, sampler) < 1e-10
    assert dye_condition_check(identity_morphism([2, 1]), 50, sampler) < 1e-15
    f, _, _ = counterexample_m2(samples=10)
    assert dye_condition_check(f, 100, sampler) <= 1e-8
    assert dye_condition_check(_scale(AlgebraShape([2]), 2.0), 20, sampler) > 0.5


def test_dye_check_reports_sample_context(sampler):
    def broken(x):
        raise RuntimeError("boom")
    f = MorphismCandidate([2], [2], broken, name="broken")
    with pytest.raises(DomainError, match="sample 0"):
        dye_condition_check(f, 3, sampler)


def test_jordan_expand_examples():
    shape = AlgebraShape([2])
    e = jordan_expand(E11, E11)
    assert e.value.dist(E11) < 1e-15 and e.target.dist(E11) < 1e-15
    q = vector_projection(shape, 0, 1, 1.0)
    assert jordan_expand(shape.zero(), q).value.dist(q) < 1e-15
    half = jordan_expand(E11, q)
    assert half.value.dist(m2([[0.5, -0.5], [-0.5, 0.5]])) < 1e-15 and half.residual < 1e-15


def test_displayed_coefficient_two_fails_exactly():
    bad = jordan_expand(E11, E11, coefficient=2.0)
    assert bad.value.dist(3.0 * E11) == 0.0
    assert bad.residual == 2.0


@given(st.sampled_from([[2], [3], [2, 3]]), seeds)
def test_jordan_identity_property(dims, seed):
    s = SeededSampler(seed)
    p, q = random_projection(dims, s), random_projection(dims, s)
    assert jordan_expand(p, q).residual <= 1e-10


# -- star-ring to Jordan ----------------------------------------------------------

def test_jordan_from_linear_map_is_itself(sampler):
    u = random_unitary([2, 1], sampler)
    f = conjugation_morphism(u)
    g = jordan_from_star_ring(f, 30, sampler)
    assert g.diagnostics["q_minus"].norm() < 1e-12
    for _ in range(10):
        a = random_element([2, 1], sampler)
        assert g(a).dist(f(a)) < 1e-10


def test_jordan_from_entrywise_conjugation_is_transpose(sampler):
    f = entrywise_conjugation([2])
    g = jordan_from_star_ring(f, 30, sampler)
    assert g.diagnostics["q_plus"].norm() < 1e-12
    assert g.diagnostics["selfadjoint_agreement"] <= 1e-8
    a = random_element([2], sampler)
    assert np.allclose(g(a).blocks[0], a.blocks[0].T)


def test_jordan_from_star_ring_squares(sampler):
    g = jordan_from_star_ring(entrywise_conjugation([3]), 100, sampler)
    assert g.diagnostics["square_residual"] <= 1e-8


def test_jordan_from_star_ring_rejects_non_homomorphism(sampler):
    with pytest.raises(DomainError):
        jordan_from_star_ring(_scale(AlgebraShape([2]), 2.0), 10, sampler)


# -- counterexample -------------------------------------------------------------

def test_counterexample_spot_values():
    f, g, report = counterexample_m2(samples=50)
    shape = AlgebraShape([2])
    assert f(shape.zero()).norm() == 0.0 and f(shape.identity()).dist(shape.identity()) == 0.0
    u = diag_element(1j, -1j)
    assert g(u).dist(u) < 1e-15
    assert (1j * f(E11) - 1j * f(shape.identity() - E11)).dist(u.adj) < 1e-15
    assert report.spot_check_residual < 1e-15
    assert report.passed and abs(report.extension_margin - 2.0) < 1e-12


def test_counterexample_g_outside_group():
    _, g, _ = counterexample_m2(samples=1)
    with pytest.raises(DomainError):
        g(diag_element(1j, 1))


# -- gauge and coordinates ----------------------------------------------------------

def test_gauge_identity():
    data = gauge_matrix_units(identity_morphism([3]))
    for (i, j), e in data.units.items():
        assert e.dist(AlgebraShape([3]).matrix_unit(0, i, j)) < 1e-12
    assert np.allclose(data.gauge, np.eye(3))


def test_gauge_recovers_diagonal_conjugation():
    d = diag_element(np.exp(0.3j), np.exp(1.1j), np.exp(-2.0j))
    data = gauge_matrix_units(conjugation_morphism(d))
    w = Element([3], [data.gauge])
    x = random_element([3], SeededSampler(5))
    assert (w.adj @ x @ w).dist(d @ x @ d.adj) < 1e-10


def test_gauge_random_conjugation_relations(sampler):
    for dims in ([2], [3], [4]):
        data = gauge_matrix_units(conjugation_morphism(random_unitary(dims, sampler)))
        assert data.relation_residual <= 1e-8


def test_gauge_rejects_non_morphism():
    with pytest.raises(ReconstructionError, match="matrix units"):
        gauge_matrix_units(_scale(AlgebraShape([3]), 2.0))


def test_coordinate_map_identity_and_conjugation(sampler):
    f = identity_morphism([3])
    phi = extract_coordinate_map(f, gauge_matrix_units(f), 20, sampler)
    assert not phi.conjugate_linear and phi.max_residual() < 1e-12
    g = entrywise_conjugation([3])
    psi = extract_coordinate_map(g, gauge_matrix_units(g), 20, sampler)
    assert psi.conjugate_linear and psi.max_residual() < 1e-9
    assert psi(2 + 1j) == 2 - 1j
    assert psi.residuals["zero"] == 0.0 and psi.residuals["one"] < 1e-15


# -- type I_2 --------------------------------------------------------------------

def test_type_I2_factor_dets_and_membership(sampler):
    for _ in range(20):
        q = random_projection([2, 2], sampler)
        data = type_I2_factors(q)
        assert data.residual < 1e-12
        for F in data.factors:
            assert sym_member(F)
        dets = [block_det(F) for F in data.factors]
        for k, tau in enumerate(data.tau):
            expected = [tau - (1 - tau), -1, 1, 1]
            assert np.allclose([d[k] for d in dets], expected)


def test_type_I2_phase_completion():
    data = type_I2_factors(E11)
    assert data.beta[0] == 0.0 and data.zeta[0] == 1.0
    assert abs(1j * data.xi[0] ** 2 - 1.0) < 1e-15


def test_type_I2_rejects_other_shapes():
    with pytest.raises(StructuralError):
        type_I2_factors(AlgebraShape([3]).zero())
    with pytest.raises(StructuralError):
        reconstruct_type_I2(identity_morphism([3]))


def test_reconstruct_type_I2_identity_and_isomorphism(sampler):
    rep = reconstruct_type_I2(identity_morphism([2]), 30, sampler)
    assert rep.verdict and np.allclose(rep.linear_map, np.eye(4))
    h = random_star_isomorphism([2, 2], sampler)
    rep = reconstruct_type_I2(h, 30, sampler)
    assert rep.verdict and rep.residual_on_projections < 1e-8
    assert rep.diagnostics["type_I2"]["sym_member"]


# -- full reconstruction ---------------------------------------------------------

def test_reconstruct_random_conjugation_mixed_shape(sampler):
    u = random_unitary([2, 3, 1], sampler)
    h = conjugation_morphism(u)
    rep = reconstruct(h, 40, sampler)
    assert rep.verdict
    for _ in range(20):
        x = random_element([2, 3, 1], sampler)
        assert rep.g(x).dist(h(x)) <= 1e-8


def test_reconstruct_counterexample_fails():
    f, _, _ = counterexample_m2(samples=5)
    rep = reconstruct(f, 30, SeededSampler(3))
    assert not rep.verdict and rep.residual_on_projections >= 0.5


def test_reconstruct_identity():
    rep = reconstruct(identity_morphism([2, 3, 1]), 20, SeededSampler(0))
    assert rep.verdict and np.allclose(rep.linear_map, np.eye(rep.linear_map.shape[0]))


def test_reconstruct_reports_branch_failure():
    rep = reconstruct(_scale(AlgebraShape([3]), 2.0), 10, SeededSampler(0))
    assert not rep.verdict and rep.diagnostics["step"] == "matrix units"
    assert rep.to_json()["residual_on_projections"] is None


def test_reconstruct_conjugate_linear_ring_map(sampler):
    rep = reconstruct(entrywise_conjugation([3]), 20, sampler)
    assert rep.verdict and rep.diagnostics["branches"][0]["phi"] == "conjugation"


# -- extension from self-adjoint parts ------------------------------------------------

def test_extend_linear_map_is_unchanged(sampler):
    f = conjugation_morphism(random_unitary([2, 1], sampler))
    g = extend_additive_selfadjoint(f, 30, sampler)
    for _ in range(10):
        a = random_element([2, 1], sampler)
        assert g(a).dist(f(a)) < 1e-10
    assert g.diagnostics["unit"] < 1e-12


def test_extend_recovers_homomorphism_from_normals(sampler):
    h = random_star_isomorphism([2, 3], sampler)
    restricted = MorphismCandidate(h.domain_shape, h.codomain_shape, h.evaluate, scope="normals")
    g = extend_additive_selfadjoint(restricted, 30, sampler)
    assert g.diagnostics["multiplicativity"] <= 1e-8
    assert g.diagnostics["four_unitary_agreement"] <= 1e-8
    for _ in range(10):
        a = random_element([2, 3], sampler)
        assert g(a).dist(h(a)) < 1e-10


def test_extend_rejects_non_additive(sampler):
    square = MorphismCandidate([2], [2], lambda x: x @ x, scope="normals")
    with pytest.raises(DomainError):
        extend_additive_selfadjoint(square, 10, sampler)


# -- invariants for *-homomorphism oracles ----------------------------------------------

@settings(max_examples=10)
@given(st.sampled_from([[2], [3], [2, 3], [2, 2, 1]]), seeds)
def test_star_isomorphisms_pass_active_checks(dims, seed):
    s = SeededSampler(seed)
    h = random_star_isomorphism(dims, s)
    res = morphism_residuals(h, 10, s)
    assert all(v <= 1e-8 for v in res.values()), res


@settings(max_examples=8)
@given(st.sampled_from([[2], [2, 2], [3], [2, 3, 1]]), seeds)
def test_reconstruction_round_trip_property(dims, seed):
    s = SeededSampler(seed)
    h = random_star_isomorphism(dims, s)
    rep = reconstruct(h, 20, s)
    assert rep.verdict
    x = random_normal(dims, s)
    assert rep.g(x).dist(h(x)) <= 1e-8
    a = random_selfadjoint(dims, s)
    assert rep.g(a).dist(h(a)) <= 1e-8
