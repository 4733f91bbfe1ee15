import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from activelattice.boolean import FinitePcba
from activelattice.core import AlgebraShape, Element, SeededSampler

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SHAPES = [AlgebraShape([2]), AlgebraShape([3]), AlgebraShape([2, 3]), AlgebraShape([1, 2])]

shapes = st.sampled_from(SHAPES)
seeds = st.integers(min_value=0, max_value=2**32)


@pytest.fixture
def sampler():
    return SeededSampler(1234)


def diag_element(*entries) -> Element:
    return Element([len(entries)], [np.diag(entries).astype(complex)])


def m2(rows) -> Element:
    return Element([2], [np.array(rows, dtype=complex)])


def oracle_range_projection(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Projection onto the column space, via scipy's orth (independent of the package)."""
    import scipy.linalg

    n = mat.shape[0]
    basis = scipy.linalg.orth(mat, rcond=tol) if mat.size else np.zeros((n, 0))
    return basis @ basis.conj().T


def two_block_pcba() -> FinitePcba:
    """Two 8-element Boolean blocks sharing {0, 1, b, b'} where b = a1 v a2 = (e v f)'.

    The union of the block orders is not transitive: a1 <= b <= b v e but a1
    and b v e are not commeasurable.
    """
    names = ["0", "1", "a1", "a2", "a3", "a1'", "a2'", "b", "e", "f", "e'", "f'"]
    ix = {n: k for k, n in enumerate(names)}
    # elements of each block as sets of its atoms
    first = {"0": set(), "a1": {1}, "a2": {2}, "a3": {3}, "b": {1, 2}, "a2'": {1, 3},
             "a1'": {2, 3}, "1": {1, 2, 3}}
    second = {"0": set(), "b": {1}, "e": {2}, "f": {3}, "f'": {1, 2}, "e'": {1, 3},
              "a3": {2, 3}, "1": {1, 2, 3}}
    leq, commeas = set(), set()
    for block in (first, second):
        for x, sx in block.items():
            for y, sy in block.items():
                commeas.add((ix[x], ix[y]))
                if sx <= sy:
                    leq.add((ix[x], ix[y]))
    comp = {"0": "1", "a1": "a1'", "a2": "a2'", "a3": "b", "e": "e'", "f": "f'"}
    comp.update({v: k for k, v in comp.items()})
    ortho = tuple(ix[comp[n]] for n in names)
    return FinitePcba(tuple(names), frozenset(leq), ortho, frozenset(commeas))


def write_cli_inputs(root) -> dict:
    """JSON inputs for the command-line tests, written under ``root``; returns name -> path."""
    import json
    import math

    from activelattice.boolean import mo_lattice
    from activelattice.core import random_unitary
    from activelattice.lattice import vector_projection

    u = random_unitary([2, 3, 1], SeededSampler(77))
    payloads = {
        "e11": diag_element(1, 0).to_json(),
        "e22": diag_element(0, 1).to_json(),
        "p12": vector_projection([2], 0, 1, 1.0).to_json(),
        "swap": m2([[0, 1], [1, 0]]).to_json(),
        "rot": diag_element(complex(math.cos(math.pi / 4), math.sin(math.pi / 4)), 1).to_json(),
        "ident3": AlgebraShape([3]).identity().to_json(),
        "m_conj": {"kind": "conj", "unitary": u.to_json()},
        "m_counter": {"kind": "counterexample_m2"},
        "m_scale": {"kind": "scale", "factor": [2.0, 0.0]},
        "m_bad": {"kind": "warp"},
        "mo2": mo_lattice(2).to_json(),
        "pcba2": two_block_pcba().to_json(),
        "atoms3": {"atoms": 3},
        "elem_bad": {"shape": [2], "blocks": [[[1, 0]]]},
    }
    paths = {}
    for name, data in payloads.items():
        path = root / f"{name}.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        paths[name] = str(path)
    broken = root / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    paths["broken"] = str(broken)
    return paths


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
