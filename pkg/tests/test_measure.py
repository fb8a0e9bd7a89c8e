from __future__ import annotations

import math

import numpy as np
import pytest

from qcsc.circuits import Circuit, Gate, to_matrix
from qcsc.density import NoiseModel
from qcsc.lattice import LatticeSpec, heisenberg
from qcsc.measure import (
    allocate_shots,
    basis_change,
    estimate_expectation,
    measurement_groups,
    shadow_estimate,
    shadow_samples,
    zne_extrapolate,
    zne_points,
)
from qcsc.pauli import PauliTerm, QubitOperator
from qcsc.statevector import StateVec, expectation, run

from oracles import dense_of, pauli_string, random_state


def _op(pairs, n):
    return QubitOperator.from_terms(pairs, n)


def test_basis_change_examples():
    assert basis_change([PauliTerm.from_string("Z0")], 1).gates == ()
    assert [g.kind for g in basis_change([PauliTerm.from_string("X0")], 1).gates] == ["H"]
    assert [g.kind for g in basis_change([PauliTerm.from_string("Y0")], 1).gates] == ["Sdg", "H"]
    with pytest.raises(ValueError):
        basis_change([PauliTerm.from_string("X0"), PauliTerm.from_string("Z0")])


@pytest.mark.parametrize("label", ["X0", "Y1", "X0 Y2", "Z0 X1 Y2", "Y0 Y1 Y2"])
def test_basis_change_diagonalizes(label):
    u = to_matrix(basis_change([PauliTerm.from_string(label)], 3))
    m = u @ pauli_string(label, 3) @ u.conj().T
    np.testing.assert_allclose(m, np.diag(np.diag(m)), atol=1e-12)
    # the diagonal is the parity of the support bits
    support = [int(tok[1:]) for tok in label.split()]
    parity = [(-1) ** sum((b >> q) & 1 for q in support) for b in range(8)]
    np.testing.assert_allclose(np.diag(m), parity, atol=1e-12)


def test_allocation_examples():
    op = _op([("Z0", 1.0), ("X0", 1.0)], 1)
    groups = measurement_groups(op)
    assert allocate_shots(groups, 100) == [50, 50]
    op = _op([("Z0", 3.0), ("X0", 1.0)], 1)
    groups = measurement_groups(op)
    alloc = dict(zip((g.terms[0].label() for g in groups), allocate_shots(groups, 8)))
    assert alloc == {"Z0": 6, "X0": 2}
    with pytest.raises(ValueError):
        allocate_shots(groups, 1)


def test_random_allocations_sum_and_cover():
    rng = np.random.default_rng(5)
    for _ in range(7):
        op = QubitOperator.from_terms(
            [(f"{'XYZ'[rng.integers(3)]}{q}", rng.normal()) for q in range(3)]
            + [(f"{'XYZ'[rng.integers(3)]}0 {'XYZ'[rng.integers(3)]}2", rng.normal())], 3)
        groups = measurement_groups(op)
        total = int(rng.integers(len(groups), 1000))
        alloc = allocate_shots(groups, total)
        assert sum(alloc) == total and min(alloc) >= 1
        uniform = allocate_shots(groups, total, "uniform")
        assert max(uniform) - min(uniform) <= 1


def test_estimate_deterministic_states():
    zero = StateVec.zeros(1)
    r = estimate_expectation(zero, measurement_groups(_op([("Z0", 1.0)], 1), 1000), seed=1)
    assert r.mean == 1.0 and r.stderr == 0.0
    plus = StateVec(1, np.array([1, 1]) / math.sqrt(2))
    r = estimate_expectation(plus, measurement_groups(_op([("X0", 1.0)], 1), 1000), seed=1)
    assert r.mean == 1.0
    # Y eigenstate (|0> + i|1>)/sqrt2
    r = estimate_expectation(StateVec(1, np.array([1, 1j]) / math.sqrt(2)),
                             measurement_groups(_op([("Y0", 2.0)], 1), 100))
    assert r.mean == pytest.approx(2.0)


def test_heisenberg_dimer_singlet():
    h = heisenberg(LatticeSpec.chain(2), 1.0)
    singlet = StateVec(2, np.array([0, 1, -1, 0]) / math.sqrt(2))
    # S.S = -3/4 on the singlet
    r = estimate_expectation(singlet, measurement_groups(h, 3000), seed=2, op=h)
    assert r.mean == pytest.approx(-0.75, abs=1e-12)


def test_estimate_within_error_bars():
    rng = np.random.default_rng(3)
    psi = random_state(3, rng)
    op = _op([("Z0 Z1", 0.6), ("X1", -0.4), ("Y0 X2", 0.9), ("Z2", 0.3)], 3)
    exact = np.vdot(psi, dense_of(op) @ psi).real
    r = estimate_expectation(StateVec(3, psi), measurement_groups(op, 40000), seed=4, op=op)
    assert abs(r.mean - exact) < 5 * r.stderr
    again = estimate_expectation(StateVec(3, psi), measurement_groups(op, 40000), seed=4)
    assert again.mean == r.mean


def test_coverage_and_group_checks():
    op = _op([("Z0", 1.0), ("X0", 1.0)], 1)
    groups = measurement_groups(op, 100)
    with pytest.raises(ValueError):
        estimate_expectation(StateVec.zeros(1), groups[:1], op=op)
    with pytest.raises(ValueError):
        estimate_expectation(StateVec.zeros(1), measurement_groups(op))


def test_shadow_values_and_identity():
    rng = np.random.default_rng(0)
    state = StateVec(2, random_state(2, rng))
    ident = QubitOperator.identity(2, 1.5)
    r = shadow_estimate(state, ident, 50, seed=0)
    assert r.mean == 1.5 and r.stderr == 0.0
    values = shadow_samples(state, _op([("X0", 1.0)], 2), 3000, seed=1)
    assert set(np.unique(values)) <= {-3.0, 0.0, 3.0}
    # about a third of the draws match the X basis on qubit 0
    assert abs(np.mean(values != 0) - 1 / 3) < 5 * math.sqrt(2 / 9 / 3000)


def test_shadow_two_local_term():
    bell = run(Circuit(2, (Gate("H", (0,)), Gate("CX", (0, 1)))))
    op = _op([("X0 X1", 1.0)], 2)
    r = shadow_estimate(bell, op, 50000, seed=3)
    assert abs(r.mean - 1.0) < 5 * r.stderr
    assert set(np.unique(shadow_samples(bell, op, 2000, seed=3))) <= {0.0, 9.0}


@pytest.mark.parametrize("label", ["Z0", "X0 Y1", "Z0 Z1 X2"])
def test_shadow_variance(label):
    # for a Pauli with <P> = e the single-shot variance is 3^|P| - e^2
    rng = np.random.default_rng(8)
    psi = random_state(3, rng)
    op = _op([(label, 1.0)], 3)
    e = expectation(StateVec(3, psi), op)
    w = len(label.split())
    values = shadow_samples(StateVec(3, psi), op, 60000, seed=9)
    expect = 3 ** w - e ** 2
    assert values.var() == pytest.approx(expect, rel=0.2)


def test_zne_exact_cases():
    assert zne_extrapolate([(1, 0.9), (3, 0.7), (5, 0.5)], "linear") == pytest.approx(1.0)
    for model in ("linear", "poly2", "exp"):
        assert zne_extrapolate([(1, 0.4), (3, 0.4), (5, 0.4)], model) == 0.4
    pts = [(f, 2 - 0.1 * f + 0.01 * f * f) for f in (1, 2, 3)]
    assert zne_extrapolate(pts, "poly2") == pytest.approx(2.0)
    pts = [(f, 0.8 * math.exp(-0.2 * f) + 0.1) for f in (1, 3, 5, 7)]
    assert zne_extrapolate(pts, "exp") == pytest.approx(0.9, abs=1e-6)
    pts = [(f, 0.8 * math.exp(-0.2 * f)) for f in (1, 3)]
    assert zne_extrapolate(pts, "exp") == pytest.approx(0.8)


def test_zne_validation():
    with pytest.raises(ValueError):
        zne_extrapolate([(1, 0.5)], "linear")
    with pytest.raises(ValueError):
        zne_extrapolate([(1, 0.5), (1, 0.4)], "linear")
    with pytest.raises(ValueError):
        zne_extrapolate([(0.5, 0.5), (1, 0.4)], "linear")
    with pytest.raises(ValueError):
        zne_extrapolate([(1, 0.5), (3, 0.4)], "cubic")


@pytest.mark.parametrize("n", [2, 3, 4])
def test_zne_improves_ghz(n):
    c = Circuit(n, (Gate("H", (0,)),) + tuple(Gate("CX", (k, k + 1)) for k in range(n - 1)))
    op = _op([("Z0 Z1", 1.0)], n)
    ideal = expectation(run(c), op)
    pts = zne_points(c, op, NoiseModel.uniform_depolarizing(0.01))
    assert [f for f, _ in pts] == [1, 3, 5]
    assert abs(zne_extrapolate(pts, "linear") - ideal) < abs(pts[0][1] - ideal)
