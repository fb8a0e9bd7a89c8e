"""Model Hamiltonians on lattices: Hubbard, three-band (Emery), Kitaev-Heisenberg.

Fermionic models are mapped with Jordan-Wigner.  Spin orbitals are numbered
``mode = 2*orbital + spin`` with spin up = 0 and down = 1, and the
Jordan-Wigner string runs over the lower-indexed modes::

    a_j = (X_j + i Y_j)/2 * Z_{j-1} ... Z_0

so |1> on a qubit means the mode is occupied.  Spin models use ``S = sigma/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import MAX_DENSE_QUBITS, PauliTerm, QubitOperator, to_matrix

MAX_MODEL_QUBITS = 24
KINDS = ("chain", "ring", "square", "honeycomb")

# Kitaev-Gamma model bond frames: gamma -> (alpha, beta)
BOND_FRAME = {"z": ("X", "Y"), "y": ("Z", "X"), "x": ("Y", "Z")}

RUCL3_PARAMS = {"J": -1.53, "K": -24.4, "Gamma": 5.25, "Gamma_prime": -0.95}


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice geometry.

    ``chain``/``ring``: ``dims = (L,)``, site ``x``.
    ``square``: ``dims = (Lx, Ly)``, site ``y*Lx + x``.
    ``honeycomb``: ``dims = (nx, ny)`` counts hexagonal plaquettes on a
    brick-wall embedding (``ny`` rows of ``nx`` hexagons, alternate rows offset
    by one column); sites are numbered row-major over the brick wall, keeping
    only sites that belong to some hexagon.  ``(1, 1)`` is a single hexagon (6
    sites) and ``(2, 1)`` two fused hexagons (10 sites).  Vertical bonds are
    z-type; horizontal bonds alternate x/y.  Honeycomb lattices are open.
    """

    kind: str
    dims: tuple[int, ...]
    periodic: tuple[bool, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        dims = tuple(int(d) for d in self.dims)
        want = 1 if self.kind in ("chain", "ring") else 2
        if len(dims) != want or min(dims) < 1:
            raise ValueError(f"{self.kind} needs {want} positive dimension(s), got {dims}")
        periodic = tuple(bool(p) for p in self.periodic) or (self.kind == "ring",) * want
        if len(periodic) != want:
            raise ValueError("one periodic flag per axis")
        if self.kind == "ring":
            periodic = (True,)
        if self.kind == "honeycomb" and any(periodic):
            raise ValueError("periodic honeycomb lattices are not supported")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "periodic", periodic)

    @classmethod
    def chain(cls, length: int, periodic: bool = False) -> "LatticeSpec":
        return cls("chain", (length,), (periodic,))

    @classmethod
    def honeycomb(cls, nx: int = 1, ny: int = 1) -> "LatticeSpec":
        return cls("honeycomb", (nx, ny))

    @classmethod
    def from_json_dict(cls, data: dict) -> "LatticeSpec":
        dims = data.get("cells", data.get("dims", data.get("sites")))
        if isinstance(dims, int):
            dims = [dims]
        return cls(data["kind"], tuple(dims), tuple(data.get("periodic", ())))

    def to_json_dict(self) -> dict:
        key = "cells" if self.kind == "honeycomb" else "dims"
        return {"kind": self.kind, key: list(self.dims), "periodic": list(self.periodic)}

    @property
    def num_sites(self) -> int:
        if self.kind == "honeycomb":
            return len(_honeycomb(self.dims)[0])
        return int(np.prod(self.dims))

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour pairs ``(i, j)`` with ``i < j``, no duplicates."""
        return [(i, j) for i, j, _ in self.typed_bonds()]

    def typed_bonds(self) -> list[tuple[int, int, str]]:
        """Bonds with a direction label; honeycomb labels are ``x``, ``y``, ``z``."""
        if self.kind == "honeycomb":
            return _honeycomb(self.dims)[1]
        if self.kind in ("chain", "ring"):
            (length,), (per,) = self.dims, self.periodic
            pairs = [(x, x + 1, "x") for x in range(length - 1)]
            if per and length > 2:
                pairs.append((0, length - 1, "x"))
            return pairs
        (lx, ly), (px, py) = self.dims, self.periodic
        seen, out = set(), []
        for y in range(ly):
            for x in range(lx):
                i = y * lx + x
                for dx, dy, lab, size, per in ((1, 0, "x", lx, px), (0, 1, "y", ly, py)):
                    nx_, ny_ = x + dx, y + dy
                    if (nx_ >= lx or ny_ >= ly) and not per:
                        continue
                    j = (ny_ % ly) * lx + nx_ % lx
                    key = (min(i, j), max(i, j))
                    if i != j and key not in seen:
                        seen.add(key)
                        out.append((key[0], key[1], lab))
        return out


def _honeycomb(dims):
    nx, ny = dims
    hexes = [(2 * k + r % 2, r) for r in range(ny) for k in range(nx)]
    sites, edges = set(), set()
    for x0, y in hexes:
        for x in range(x0, x0 + 3):
            sites.update({(x, y), (x, y + 1)})
        for yy in (y, y + 1):
            edges.update({((x0, yy), (x0 + 1, yy)), ((x0 + 1, yy), (x0 + 2, yy))})
        edges.update({((x0, y), (x0, y + 1)), ((x0 + 2, y), (x0 + 2, y + 1))})
    order = sorted(sites, key=lambda s: (s[1], s[0]))
    index = {s: i for i, s in enumerate(order)}
    bonds = []
    for a, b in edges:
        if a[1] != b[1]:
            lab = "z"
        else:
            x, y = min(a[0], b[0]), a[1]
            lab = "x" if (x + y) % 2 == 0 else "y"
        i, j = sorted((index[a], index[b]))
        bonds.append((i, j, lab))
    return order, sorted(bonds)


@dataclass(frozen=True)
class FermionTerm:
    """``coeff`` times a product of ladder operators, leftmost first.

    ``ops`` holds ``(mode, dagger)`` pairs; ``((0, True), (1, False))`` is
    ``a_0^dagger a_1``.
    """

    ops: tuple[tuple[int, bool], ...]
    coeff: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple((int(m), bool(d)) for m, d in self.ops))


def ladder(mode: int, dagger: bool, num_modes: int) -> QubitOperator:
    """Jordan-Wigner image of ``a_mode`` (or its adjoint)."""
    if not 0 <= mode < num_modes:
        raise IndexError(f"mode {mode} out of range for {num_modes} modes")
    string = {j: "Z" for j in range(mode)}
    sign = -1 if dagger else 1
    x = PauliTerm(0.5, {**string, mode: "X"})
    y = PauliTerm(0.5j * sign, {**string, mode: "Y"})
    return QubitOperator([x, y], num_modes)


def jordan_wigner(term: FermionTerm, num_modes: int) -> QubitOperator:
    out = QubitOperator.identity(num_modes, term.coeff)
    for mode, dagger in term.ops:
        out = out * ladder(mode, dagger, num_modes)
    return out.with_num_qubits(num_modes)


def jordan_wigner_sum(terms, num_modes: int) -> QubitOperator:
    total = QubitOperator([], num_modes)
    for term in terms:
        total = total + jordan_wigner(term, num_modes)
    return total.with_num_qubits(num_modes)


def _hop(i: int, j: int, amp: float) -> list[FermionTerm]:
    return [FermionTerm(((i, True), (j, False)), amp), FermionTerm(((j, True), (i, False)), amp)]


def _nn(i: int, j: int, amp: float) -> FermionTerm:
    return FermionTerm(((i, True), (i, False), (j, True), (j, False)), amp)


def _check_size(num_modes: int):
    if num_modes > MAX_MODEL_QUBITS:
        raise ValueError(f"{num_modes} qubits exceeds model limit {MAX_MODEL_QUBITS}")


def hubbard_hamiltonian(lat: LatticeSpec, t: float, U: float) -> QubitOperator:
    """One-band Hubbard model ``-t sum (a^dag_i a_j + h.c.) + U sum n_up n_down``."""
    num_modes = 2 * lat.num_sites
    _check_size(num_modes)
    terms = []
    for i, j in lat.bonds():
        for spin in (0, 1):
            terms += _hop(2 * i + spin, 2 * j + spin, -t)
    for i in range(lat.num_sites):
        terms.append(_nn(2 * i, 2 * i + 1, U))
    return jordan_wigner_sum(terms, num_modes).real()


EMERY_ORBITALS = ("d", "px", "py")


def emery_orbitals(cells: int):
    """Orbital index ``3*cell + k`` for ``k`` in ``(d, px, py)``, plus the bond lists.

    Cells form an open 1-D chain along x: ``px`` of cell ``c`` sits between the
    Cu sites of cells ``c`` and ``c+1``, ``py`` is the out-of-chain oxygen.
    """
    d, px, py = (lambda c: 3 * c), (lambda c: 3 * c + 1), (lambda c: 3 * c + 2)
    pd = [(d(c), px(c)) for c in range(cells)] + [(d(c), py(c)) for c in range(cells)]
    pd += [(d(c + 1), px(c)) for c in range(cells - 1)]
    pp = [(px(c), py(c)) for c in range(cells)] + [(px(c), py(c + 1)) for c in range(cells - 1)]
    return [d(c) for c in range(cells)], [o for c in range(cells) for o in (px(c), py(c))], pd, pp


def emery_hamiltonian(cells: int, t_pd: float, t_pp: float, delta_pd: float,
                      U_d: float, U_p: float, V_pd: float) -> QubitOperator:
    """Three-band Hubbard (Emery) model in the hole picture on a chain of CuO2 cells.

    ``t_pd sum (d^dag p + h.c.) + t_pp sum (p^dag p + h.c.) - delta_pd sum n^d
    + U_d sum n^d_up n^d_dn + U_p sum n^p_up n^p_dn + V_pd sum n^d n^p`` with
    hopping signs exactly as written (no orbital-phase gauge).
    """
    if cells < 1:
        raise ValueError("cells must be >= 1")
    num_modes = 6 * cells
    _check_size(num_modes)
    d_orbs, p_orbs, pd, pp = emery_orbitals(cells)
    terms = []
    for a, b in pd:
        for s in (0, 1):
            terms += _hop(2 * a + s, 2 * b + s, t_pd)
    for a, b in pp:
        for s in (0, 1):
            terms += _hop(2 * a + s, 2 * b + s, t_pp)
    for a in d_orbs:
        for s in (0, 1):
            terms.append(FermionTerm(((2 * a + s, True), (2 * a + s, False)), -delta_pd))
        terms.append(_nn(2 * a, 2 * a + 1, U_d))
    for a in p_orbs:
        terms.append(_nn(2 * a, 2 * a + 1, U_p))
    for a, b in pd:
        for s in (0, 1):
            for tau in (0, 1):
                terms.append(_nn(2 * a + s, 2 * b + tau, V_pd))
    return jordan_wigner_sum(terms, num_modes).real()


def _spin_pair(i: int, j: int, a: str, b: str, amp: float) -> PauliTerm:
    # S_i^a S_j^b with S = sigma/2
    return PauliTerm(amp / 4, {i: a, j: b})


def kitaev_heisenberg(lat: LatticeSpec, J: float, K: float, Gamma: float = 0.0,
                      Gamma_prime: float = 0.0) -> QubitOperator:
    """Heisenberg-Kitaev-Gamma-Gamma' model on a honeycomb lattice, ``S = sigma/2``.

    Per gamma bond: ``J S_i.S_j + K S_i^g S_j^g + Gamma (S_i^a S_j^b + S_i^b S_j^a)
    + Gamma' (S_i^g S_j^a + S_i^g S_j^b + S_i^a S_j^g + S_i^b S_j^g)`` with
    ``(a, b, g)`` = ``(x, y, z)``, ``(z, x, y)``, ``(y, z, x)`` for z, y, x bonds.
    """
    if lat.kind != "honeycomb":
        raise ValueError("Kitaev-Heisenberg model needs a honeycomb lattice")
    n = lat.num_sites
    _check_size(n)
    terms = []
    for i, j, gamma in lat.typed_bonds():
        g = gamma.upper()
        a, b = BOND_FRAME[gamma]
        for axis in "XYZ":
            terms.append(_spin_pair(i, j, axis, axis, J))
        terms.append(_spin_pair(i, j, g, g, K))
        terms += [_spin_pair(i, j, a, b, Gamma), _spin_pair(i, j, b, a, Gamma)]
        terms += [_spin_pair(i, j, g, a, Gamma_prime), _spin_pair(i, j, g, b, Gamma_prime),
                  _spin_pair(i, j, a, g, Gamma_prime), _spin_pair(i, j, b, g, Gamma_prime)]
    return QubitOperator(terms, n)


def heisenberg(lat: LatticeSpec, J: float = 1.0) -> QubitOperator:
    """``J sum_<ij> S_i.S_j`` on any lattice, ``S = sigma/2``."""
    terms = [_spin_pair(i, j, axis, axis, J) for i, j in lat.bonds() for axis in "XYZ"]
    return QubitOperator(terms, lat.num_sites)


def particle_sector(num_qubits: int, n_particles: int) -> np.ndarray:
    """Basis indices with exactly ``n_particles`` bits set."""
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    return idx[np.bitwise_count(idx) == n_particles]


def exact_spectrum(op: QubitOperator, k: int | None = None,
                   n_particles: int | None = None) -> list[float]:
    """The ``k`` lowest eigenvalues (ascending, degeneracies repeated).

    With ``n_particles`` the operator is restricted to basis states of that
    Hamming weight, i.e. the fixed-particle-number sector under Jordan-Wigner.
    """
    if not op.is_hermitian:
        raise ValueError("operator is not Hermitian")
    if op.num_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"{op.num_qubits} qubits exceeds dense limit {MAX_DENSE_QUBITS}")
    mat = to_matrix(op)
    if n_particles is not None:
        sel = particle_sector(op.num_qubits, n_particles)
        mat = mat[np.ix_(sel, sel)]
    evals = np.linalg.eigvalsh(mat)
    return [float(e) for e in evals[:k]]
