from __future__ import annotations

import itertools

import numpy as np
import pytest

from qcsc.lattice import (
    RUCL3_PARAMS,
    FermionTerm,
    LatticeSpec,
    emery_hamiltonian,
    exact_spectrum,
    heisenberg,
    hubbard_hamiltonian,
    jordan_wigner,
    kitaev_heisenberg,
    ladder,
)
from qcsc.pauli import QubitOperator, to_matrix

from oracles import (
    annihilation,
    dense_of,
    hubbard_two_site_dense,
    number_dense,
    operator_matrix,
    power_iteration_ground,
    sector_ground,
)


def test_number_operator_single_mode():
    n_op = jordan_wigner(FermionTerm(((0, True), (0, False)), 1.0), 1)
    assert n_op.isclose(QubitOperator.from_terms([("", 0.5), ("Z0", -0.5)], 1))
    np.testing.assert_allclose(to_matrix(n_op), np.diag([0, 1]), atol=1e-12)


def test_annihilation_nilpotent():
    assert len(jordan_wigner(FermionTerm(((0, False), (0, False)), 1.0), 1)) == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ladder_matches_kronecker_construction(n):
    for j in range(n):
        np.testing.assert_allclose(to_matrix(ladder(j, False, n)), annihilation(j, n), atol=1e-12)
        np.testing.assert_allclose(to_matrix(ladder(j, True, n)), annihilation(j, n).conj().T,
                                   atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_canonical_anticommutation(n):
    a = [to_matrix(ladder(j, False, n)) for j in range(n)]
    eye = np.eye(1 << n)
    for i, j in itertools.product(range(n), repeat=2):
        adag = a[j].conj().T
        np.testing.assert_allclose(a[i] @ adag + adag @ a[i], eye * (i == j), atol=1e-12)
        np.testing.assert_allclose(a[i] @ a[j] + a[j] @ a[i], 0, atol=1e-12)


# -- Hubbard --------------------------------------------------------------------------

def test_hubbard_single_site():
    h = hubbard_hamiltonian(LatticeSpec.chain(1), 1.0, 4.0)
    assert exact_spectrum(h) == pytest.approx([0, 0, 0, 4])
    assert exact_spectrum(h, 1, n_particles=2) == pytest.approx([4])


@pytest.mark.parametrize("U", [0.0, 4.0, 8.0])
def test_hubbard_dimer(U):
    h = hubbard_hamiltonian(LatticeSpec.chain(2), 1.0, U)
    oracle = hubbard_two_site_dense(1.0, U)
    np.testing.assert_allclose(dense_of(h), oracle, atol=1e-12)
    e0 = exact_spectrum(h, 1, n_particles=2)[0]
    assert e0 == pytest.approx(sector_ground(oracle, 4, 2), abs=1e-9)
    assert e0 == pytest.approx((U - np.sqrt(U ** 2 + 16)) / 2, abs=1e-9)


def test_hubbard_free_dimer_half_filling():
    h = hubbard_hamiltonian(LatticeSpec.chain(2), 1.0, 0.0)
    assert exact_spectrum(h, 1, n_particles=2)[0] == pytest.approx(-2.0, abs=1e-12)


@pytest.mark.parametrize("lat", [LatticeSpec.chain(3), LatticeSpec.chain(3, periodic=True),
                                 LatticeSpec("square", (2, 2))])
def test_hubbard_conserves_particles(lat):
    h = hubbard_hamiltonian(lat, 1.0, 3.0)
    m = dense_of(h)
    n = number_dense(h.num_qubits)
    np.testing.assert_allclose(m @ n - n @ m, 0, atol=1e-12)
    assert h.is_hermitian


# -- Emery ------------------------------------------------------------------------------

def test_emery_zero():
    assert len(emery_hamiltonian(1, 0, 0, 0, 0, 0, 0)) == 0


def test_emery_charge_transfer_only():
    h = emery_hamiltonian(1, 0, 0, 2.0, 0, 0, 0)
    assert sorted(set(np.round(exact_spectrum(h), 9))) == [-4.0, -2.0, 0.0]
    # -delta * (n_d_up + n_d_dn), d orbital = modes 0 and 1
    expect = -2.0 * np.kron(np.eye(16), number_dense(2))
    np.testing.assert_allclose(dense_of(h), expect, atol=1e-12)


@pytest.mark.parametrize("cells", [1, 2])
def test_emery_generic_hermitian_and_conserving(cells):
    h = emery_hamiltonian(cells, 1.3, 0.65, 3.6, 8.0, 4.0, 1.2)
    assert h.is_hermitian
    if cells == 1:
        m = dense_of(h)
        n = number_dense(6)
        np.testing.assert_allclose(m, m.conj().T, atol=1e-12)
        np.testing.assert_allclose(m @ n - n @ m, 0, atol=1e-12)


def test_emery_single_cell_against_ladder_oracle():
    t_pd, t_pp, delta, ud, up, v = 1.3, 0.65, 3.6, 8.0, 4.0, 1.2
    a = [annihilation(j, 6) for j in range(6)]
    n = [x.conj().T @ x for x in a]
    d, px, py = 0, 1, 2
    m = np.zeros((64, 64), dtype=complex)
    for s in (0, 1):
        for o1, o2, amp in ((d, px, t_pd), (d, py, t_pd), (px, py, t_pp)):
            i, j = 2 * o1 + s, 2 * o2 + s
            m += amp * (a[i].conj().T @ a[j] + a[j].conj().T @ a[i])
        m += -delta * n[2 * d + s]
    m += ud * n[0] @ n[1] + up * (n[2] @ n[3] + n[4] @ n[5])
    for p in (px, py):
        for s, tau in itertools.product((0, 1), repeat=2):
            m += v * n[2 * d + s] @ n[2 * p + tau]
    np.testing.assert_allclose(dense_of(emery_hamiltonian(1, t_pd, t_pp, delta, ud, up, v)), m,
                               atol=1e-12)


# -- Kitaev-Heisenberg ---------------------------------------------------------------

def test_honeycomb_geometry():
    hexagon = LatticeSpec.honeycomb(1, 1)
    assert hexagon.num_sites == 6 and len(hexagon.bonds()) == 6
    kinds = sorted(k for *_, k in hexagon.typed_bonds())
    assert kinds == ["x", "x", "y", "y", "z", "z"]
    # every site of the hexagon has degree 2 and one bond of two different kinds
    deg = {i: 0 for i in range(6)}
    for i, j in hexagon.bonds():
        deg[i] += 1
        deg[j] += 1
    assert set(deg.values()) == {2}
    double = LatticeSpec.honeycomb(2, 1)
    assert double.num_sites == 10 and len(double.bonds()) == 11
    for i in range(double.num_sites):
        labels = [k for a, b, k in double.typed_bonds() if i in (a, b)]
        assert len(labels) == len(set(labels))
    with pytest.raises(ValueError):
        LatticeSpec("honeycomb", (1, 1), (True, False))


def test_single_bond_heisenberg_scaling():
    lat = LatticeSpec.honeycomb(1, 1)
    h = kitaev_heisenberg(lat, 1.0, 0.0)
    i, j = lat.bonds()[0]
    for ax in "XYZ":
        assert h.coefficient(f"{ax}{i} {ax}{j}") == pytest.approx(0.25)


def test_kitaev_reduces_to_heisenberg():
    lat = LatticeSpec.honeycomb(1, 1)
    built = kitaev_heisenberg(lat, -1.7, 0.0)
    pairs = [(f"{a}{i} {a}{j}", -1.7 / 4) for i, j in lat.bonds() for a in "XYZ"]
    np.testing.assert_allclose(dense_of(built), operator_matrix(pairs, 6), atol=1e-12)
    assert built.isclose(heisenberg(lat, -1.7))


def test_rucl3_hexagon():
    assert RUCL3_PARAMS == {"J": -1.53, "K": -24.4, "Gamma": 5.25, "Gamma_prime": -0.95}
    lat = LatticeSpec.honeycomb(1, 1)
    h = kitaev_heisenberg(lat, **RUCL3_PARAMS)
    # per bond: 3 Heisenberg strings (K adds to one), 2 Gamma, 4 Gamma' -> 9 distinct strings
    assert len(h) == 6 * 9
    assert h.is_hermitian
    m = dense_of(h)
    w = np.linalg.eigvalsh(m)
    assert exact_spectrum(h, 4) == pytest.approx(list(w[:4]), abs=1e-9)
    # time reversal (S -> -S on every site) leaves every spin bilinear invariant:
    # Y^{(x)6} conj(H) Y^{(x)6} = H
    ys = operator_matrix([(" ".join(f"Y{q}" for q in range(6)), 1.0)], 6)
    np.testing.assert_allclose(ys @ m.conj() @ ys, m, atol=1e-12)


def test_kitaev_heisenberg_pi_rotation_symmetry():
    # without Gamma terms, a global pi rotation about any axis is a symmetry
    m = dense_of(kitaev_heisenberg(LatticeSpec.honeycomb(1, 1), -1.53, -24.4))
    for axis in "XYZ":
        rot = operator_matrix([(" ".join(f"{axis}{q}" for q in range(6)), 1.0)], 6)
        np.testing.assert_allclose(rot @ m @ rot.conj().T, m, atol=1e-12)


def test_kitaev_bond_frame_on_z_bond():
    lat = LatticeSpec.honeycomb(1, 1)
    i, j = next((a, b) for a, b, k in lat.typed_bonds() if k == "z")
    h = kitaev_heisenberg(lat, 0.0, 4.0, 8.0, 12.0)
    assert h.coefficient(f"Z{i} Z{j}") == pytest.approx(1.0)
    assert h.coefficient(f"X{i} Y{j}") == pytest.approx(2.0)
    assert h.coefficient(f"Y{i} X{j}") == pytest.approx(2.0)
    for pair in (f"Z{i} X{j}", f"Z{i} Y{j}", f"X{i} Z{j}", f"Y{i} Z{j}"):
        assert h.coefficient(pair) == pytest.approx(3.0)


# -- exact spectrum ------------------------------------------------------------------

def test_exact_spectrum_examples():
    assert exact_spectrum(QubitOperator.from_terms([("Z0", 1)]), 2) == pytest.approx([-1, 1])
    assert exact_spectrum(QubitOperator.identity(3), 3) == pytest.approx([1, 1, 1])


def test_heisenberg_ring_against_power_iteration():
    h = heisenberg(LatticeSpec.chain(4, periodic=True), 1.0)
    ground = exact_spectrum(h, 1)[0]
    assert ground == pytest.approx(power_iteration_ground(dense_of(h)), abs=1e-9)
    assert ground == pytest.approx(-2.0, abs=1e-9)  # S=1/2 four-site ring, J=1


def test_size_guards():
    with pytest.raises(ValueError):
        hubbard_hamiltonian(LatticeSpec.chain(13), 1, 1)
    with pytest.raises(ValueError):
        kitaev_heisenberg(LatticeSpec.chain(3), 1, 1)
