"""The twelve acceptance criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; one PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import math
import time

import numpy as np

from activelattice.active import (
    counterexample_m2,
    jordan_expand,
    random_star_isomorphism,
    reconstruct,
)
from activelattice.boolean import boolean_algebra, mo_lattice, oml_commeas, pcba_to_oml, proj_of_F
from activelattice.cli import main
from activelattice.core import (
    AlgebraShape,
    Element,
    SeededSampler,
    four_unitaries,
    random_element,
    random_projection,
    random_special_unitary,
    random_unitary,
    rp,
)
from activelattice.lattice import commeasurable, is_ij_swapper, join, leq, meet, orthomodular_residual, vector_projection
from activelattice.symmetry import factor_det1, factor_det_pm1, sym_member, symmetry_of

from conftest import record_criterion, write_cli_inputs


def _projection_defect(p: Element) -> float:
    return max(p.dist(p.adj), p.dist(p @ p))


def _unitary_defect(u: Element) -> float:
    one = u.shape.identity()
    return max((u @ u.adj).dist(one), (u.adj @ u).dist(one))


def _commuting_pair(shape, s):
    u = random_unitary(shape, s)
    rng = s.generator()
    def diag():
        return Element(shape, [np.diag(rng.integers(0, 2, n)).astype(complex) for n in shape])
    return u @ diag() @ u.adj, u @ diag() @ u.adj


def test_criterion_01_commeasurability_agreement():
    s = SeededSampler(101)
    start = time.perf_counter()
    pairs = disagreements = positives = 0
    for dims in ([2], [3], [2, 3]):
        shape = AlgebraShape(dims)
        for k in range(1000):
            p, q = (random_projection(shape, s), random_projection(shape, s)) if k % 2 else _commuting_pair(shape, s)
            c = commeasurable(p, q).conditions(tol=commeasurable.__defaults__[0])
            verdicts = {c["i"], c["iii"], c["iv"], c["v"]}
            disagreements += len(verdicts) != 1
            positives += c["i"]
            pairs += 1
    elapsed = time.perf_counter() - start
    ok = disagreements == 0 and elapsed < 30.0
    record_criterion(1, ok, f"{pairs} pairs, {positives} commeasurable, {disagreements} disagreements, {elapsed:.1f}s")
    assert ok


def test_criterion_02_orthomodularity():
    s = SeededSampler(102)
    worst, count = 0.0, 0
    for dims in ([2], [3], [4], [2, 3]):
        shape = AlgebraShape(dims)
        for _ in range(250):
            q = random_projection(shape, s)
            p = meet(q, random_projection(shape, s))
            assert leq(p, q)
            worst = max(worst, orthomodular_residual(p, q))
            count += 1
    ok = count >= 1000 and worst <= 1e-8
    record_criterion(2, ok, f"{count} comparable pairs, max residual {worst:.2e}")
    assert ok


def test_criterion_03_symmetry_factorization():
    s = SeededSampler(103)
    worst_prod = worst_proj = 0.0
    too_many = 0
    for n in (2, 3, 4, 5):
        shape = AlgebraShape([n])
        for _ in range(200):
            u = random_special_unitary(shape, s)
            f = factor_det1(u)
            too_many += len(f.factors) > 2 * (n - 1)
            worst_prod = max(worst_prod, f.product().dist(u))
            worst_proj = max([worst_proj] + [_projection_defect(p) for p in f.factors])
            v = random_special_unitary(shape, s, det=-1)
            g = factor_det_pm1(v)
            too_many += len(g.factors) > 2 * (n - 1) + 1
            worst_prod = max(worst_prod, g.product().dist(v))
            worst_proj = max([worst_proj] + [_projection_defect(p) for p in g.factors])
    ok = too_many == 0 and worst_prod <= 1e-8 and worst_proj <= 1e-10
    record_criterion(3, ok, f"800+800 unitaries, product error {worst_prod:.2e}, "
                            f"projection defect {worst_proj:.2e}, over-length {too_many}")
    assert ok


def test_criterion_04_sym_membership():
    s = SeededSampler(104)
    failures = 0
    for dims in ([2], [3], [2, 3], [4]):
        shape = AlgebraShape(dims)
        for length in range(0, 7):
            for _ in range(20):
                w = shape.identity()
                for _ in range(length):
                    w = w @ symmetry_of(random_projection(shape, s))
                failures += not sym_member(w)
    rejected = []
    for theta in (math.pi / 4, math.pi / 3):
        for n in (2, 3, 4):
            d = np.ones(n, dtype=complex)
            d[0] = np.exp(1j * theta)
            rejected.append(not sym_member(Element([n], [np.diag(d)])))
    ok = failures == 0 and all(rejected)
    record_criterion(4, ok, f"{failures} symmetry words rejected, rotations rejected: {sum(rejected)}/{len(rejected)}")
    assert ok


def test_criterion_05_corrected_jordan_identity():
    s = SeededSampler(105)
    worst, count = 0.0, 0
    for dims in ([2], [3], [2, 3]):
        for _ in range(400):
            p, q = random_projection(dims, s), random_projection(dims, s)
            worst = max(worst, jordan_expand(p, q).residual)
            count += 1
    e11 = AlgebraShape([2]).matrix_unit(0, 0, 0)
    displayed = jordan_expand(e11, e11, coefficient=2.0)
    three = displayed.value.dist(3.0 * e11) == 0.0
    ok = count >= 1000 and worst <= 1e-10 and displayed.residual == 2.0 and three
    record_criterion(5, ok, f"{count} pairs, max residual {worst:.2e}; coefficient 2 at e11 gives 3e11, "
                            f"residual {displayed.residual}")
    assert ok


def test_criterion_06_counterexample():
    _, _, report = counterexample_m2(samples=500, sampler=SeededSampler(106))
    ok = report.equivariance_residual <= 1e-8 and report.extension_margin >= 0.5
    record_criterion(6, ok, f"equivariance residual {report.equivariance_residual:.2e} over 500 samples, "
                            f"extension margin {report.extension_margin:.6f}")
    assert ok and abs(report.extension_margin - 2.0) < 1e-12


def test_criterion_07_reconstruction_round_trip():
    s = SeededSampler(107)
    worst, failures, runs = 0.0, 0, 0
    i2_members, i2_runs = True, 0
    for dims in ([2], [2, 2], [3], [2, 3, 1]):
        for _ in range(20):
            h = random_star_isomorphism(dims, s)
            rep = reconstruct(h, 40, s)
            runs += 1
            failures += not rep.verdict
            if rep.g is not None:
                for _ in range(100):
                    x = random_element(dims, s)
                    worst = max(worst, rep.g(x).dist(h(x)))
            pipeline = rep.diagnostics.get("type_I2")
            if pipeline is not None:
                i2_runs += 1
                i2_members &= pipeline["sym_member"]
    ok = failures == 0 and worst <= 1e-8 and i2_runs == 60 and i2_members
    record_criterion(7, ok, f"{runs} isomorphisms, {failures} failed, max error {worst:.2e}, "
                            f"type I2 pipeline in {i2_runs} runs, factors in Sym: {i2_members}")
    assert ok


def test_criterion_08_finite_equivalence():
    start = time.perf_counter()
    family = [boolean_algebra(n).as_oml() for n in range(0, 6)] + [mo_lattice(k) for k in range(1, 5)]
    bad = []
    for P in family:
        B = oml_commeas(P)
        if not proj_of_F(B).isomorphic:
            bad.append(f"proj_of_F on {len(P)}")
        if pcba_to_oml(B) != P:
            bad.append(f"Kalmbach on {len(P)}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10.0
    record_criterion(8, ok, f"{len(family)} structures, failures {bad}, {elapsed:.2f}s")
    assert ok


def test_criterion_09_four_unitaries():
    s = SeededSampler(109)
    worst_sum = worst_unit = 0.0
    for dims in ([1], [2], [3], [2, 3]):
        for _ in range(50):
            a = random_element(dims, s)
            scale, us = four_unitaries(a)
            total = scale * (0.25 * us[0] + 0.25 * us[1] + 0.25j * us[2] + 0.25j * us[3])
            worst_sum = max(worst_sum, total.dist(a))
            worst_unit = max([worst_unit] + [_unitary_defect(u) for u in us])
    ok = worst_sum <= 1e-10 and worst_unit <= 1e-10
    record_criterion(9, ok, f"200 elements, reconstruction {worst_sum:.2e}, unitarity {worst_unit:.2e}")
    assert ok


def test_criterion_10_support_projections():
    s = SeededSampler(110)
    worst, violations = 0.0, 0
    for k in range(200):
        dims = [[2], [3], [4], [2, 3]][k % 4]
        shape = AlgebraShape(dims)
        ranks = [int(r) for r in s.generator().integers(0, np.array(dims) + 1)]
        a = random_element(shape, s) @ random_projection(shape, s, ranks)
        r = rp(a)
        worst = max(worst, (a @ r).dist(a))
        for _ in range(50):
            dominating = join(r, random_projection(shape, s))
            violations += not leq(r, dominating) or (a @ dominating).dist(a) > 1e-10
    ok = worst <= 1e-10 and violations == 0
    record_criterion(10, ok, f"200 elements, max |a rp(a) - a| {worst:.2e}, minimality violations {violations}")
    assert ok


def test_criterion_11_swap_characterization():
    rng = SeededSampler(111).generator()
    passes = sum(is_ij_swapper(vector_projection([2], 0, 1, np.exp(1j * t)), 0, 1)
                 for t in rng.uniform(-np.pi, np.pi, 100))
    fails = [not is_ij_swapper(vector_projection([2], 0, 1, m * np.exp(0.4j)), 0, 1) for m in (0.5, 2.0)]
    ok = passes == 100 and all(fails)
    record_criterion(11, ok, f"{passes}/100 unimodular swappers, |alpha| in (0.5, 2) rejected: {all(fails)}")
    assert ok


def _cli(argv, capsys):
    code = main(argv)
    out, _ = capsys.readouterr()
    return code, out


def test_criterion_12_cli_determinism(tmp_path, capsys):
    f = write_cli_inputs(tmp_path)
    alg = lambda shape: ["--algebra", shape]  # noqa: E731
    quick = ["--samples", "40", "--seed", "5"]
    # command -> {expected exit code: argv}; lattice and demo have no false verdict
    cases = {
        "lattice": {0: ["lattice", "join", f["e11"], f["e22"]], 2: ["lattice", "join", f["broken"], f["e22"]]},
        "commeasurable": {0: ["commeasurable", f["e11"], f["e22"]], 1: ["commeasurable", f["e11"], f["p12"]],
                          2: ["commeasurable", f["elem_bad"], f["e22"]]},
        "factor-symmetries": {0: ["factor-symmetries", f["swap"]], 1: ["factor-symmetries", f["rot"]],
                              2: ["factor-symmetries", f["broken"]]},
        "sym-member": {0: ["sym-member", f["swap"]], 1: ["sym-member", f["rot"]], 2: ["sym-member", f["broken"]]},
        "dye-check": {0: ["dye-check", "--morphism", f["m_conj"], *alg("2,3,1"), *quick],
                      1: ["dye-check", "--morphism", f["m_scale"], *alg("2"), *quick],
                      2: ["dye-check", "--morphism", f["m_bad"], *alg("2"), *quick]},
        "reconstruct": {0: ["reconstruct", "--morphism", f["m_conj"], *alg("2,3,1"), *quick],
                        1: ["reconstruct", "--morphism", f["m_counter"], *alg("2"), *quick],
                        2: ["reconstruct", "--morphism", f["broken"], *alg("2"), *quick]},
        "demo": {0: ["demo", "counterexample", *quick], 2: ["demo", "counterexample", "--samples", "0"]},
        "boolean": {0: ["boolean", "roundtrip", f["mo2"]], 1: ["boolean", "roundtrip", f["pcba2"]],
                    2: ["boolean", "roundtrip", f["broken"]]},
    }
    wrong, unstable = [], []
    for command, by_code in cases.items():
        for expected, argv in by_code.items():
            first = _cli(argv, capsys)
            second = _cli(argv, capsys)
            if first[0] != expected:
                wrong.append(f"{command}:{expected}->{first[0]}")
            if first != second:
                unstable.append(command)
    ok = not wrong and not unstable
    record_criterion(12, ok, f"{sum(len(v) for v in cases.values())} cases run twice, wrong exit codes {wrong}, "
                             f"non-deterministic {unstable}")
    assert ok
