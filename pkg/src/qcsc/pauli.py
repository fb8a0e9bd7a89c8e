"""Pauli-string algebra and operator-level analysis.

Operators are weighted sums of Pauli strings, ``H = sum_i c_i P_i``.  A
:class:`PauliTerm` is a single weighted string stored sparsely (only the
non-identity sites), and a :class:`QubitOperator` is a canonical sum of them:
duplicate strings are merged and negligible coefficients dropped.

Qubit ``q`` is bit ``2**q`` of a basis-state index (little-endian), which is
the convention used by every simulator in the package.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Number
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse

AXES = ("X", "Y", "Z")
DROP_TOL = 1e-12

# (a, b) -> (phase, product axis) for single-site products a*b, a != b.
_MUL_TABLE = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


def _parse_pauli_string(text: str) -> tuple[tuple[int, str], ...]:
    sites = {}
    for token in text.split():
        axis, index = token[0].upper(), token[1:]
        if axis == "I":
            continue
        if axis not in AXES or not index.isdigit():
            raise ValueError(f"bad Pauli token {token!r}")
        q = int(index)
        if q in sites:
            raise ValueError(f"qubit {q} repeated in {text!r}")
        sites[q] = axis
    return tuple(sorted(sites.items()))


def _canonical_paulis(paulis) -> tuple[tuple[int, str], ...]:
    if isinstance(paulis, str):
        return _parse_pauli_string(paulis)
    items = paulis.items() if isinstance(paulis, Mapping) else paulis
    sites = {}
    for q, axis in items:
        q = int(q)
        if q < 0:
            raise ValueError(f"negative qubit index {q}")
        if q in sites:
            raise ValueError(f"qubit {q} repeated")
        axis = str(axis).upper()
        if axis == "I":
            continue
        if axis not in AXES:
            raise ValueError(f"unknown Pauli axis {axis!r}")
        sites[q] = axis
    return tuple(sorted(sites.items()))


@dataclass(frozen=True)
class PauliTerm:
    """A complex coefficient times a tensor product of Pauli matrices.

    ``paulis`` may be given as a mapping ``{qubit: axis}``, a sequence of
    ``(qubit, axis)`` pairs, or a string such as ``"X0 Z3"``.  It is stored as
    a sorted tuple of pairs with identity sites removed.
    """

    coeff: complex = 1.0
    paulis: tuple[tuple[int, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "paulis", _canonical_paulis(self.paulis))
        coeff = complex(self.coeff)
        if not (math.isfinite(coeff.real) and math.isfinite(coeff.imag)):
            raise ValueError("coefficient must be finite")
        object.__setattr__(self, "coeff", coeff)

    @classmethod
    def from_string(cls, text: str, coeff: complex = 1.0) -> "PauliTerm":
        return cls(coeff, text)

    @property
    def key(self) -> tuple[tuple[int, str], ...]:
        return self.paulis

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.paulis)

    @property
    def weight(self) -> int:
        return len(self.paulis)

    @property
    def is_identity(self) -> bool:
        return not self.paulis

    @cached_property
    def masks(self) -> tuple[int, int]:
        """Bit masks ``(x, z)``: X sets x, Z sets z, Y sets both."""
        x = z = 0
        for q, axis in self.paulis:
            if axis in "XY":
                x |= 1 << q
            if axis in "YZ":
                z |= 1 << q
        return x, z

    def axis(self, qubit: int) -> str:
        return dict(self.paulis).get(qubit, "I")

    def label(self) -> str:
        return " ".join(f"{a}{q}" for q, a in self.paulis)

    def with_coeff(self, coeff: complex) -> "PauliTerm":
        return PauliTerm(coeff, self.paulis)

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            return multiply(self, other)
        if isinstance(other, Number):
            return PauliTerm(self.coeff * other, self.paulis)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return PauliTerm(self.coeff * other, self.paulis)
        return NotImplemented

    def __str__(self):
        return f"{self.coeff:.6g} [{self.label()}]"


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product ``a * b`` with the phase from single-site Pauli algebra."""
    sites = dict(a.paulis)
    phase = 1.0 + 0j
    for q, axis in b.paulis:
        mine = sites.get(q)
        if mine is None:
            sites[q] = axis
        elif mine == axis:
            del sites[q]
        else:
            p, sites[q] = _MUL_TABLE[(mine, axis)]
            phase *= p
    return PauliTerm(a.coeff * b.coeff * phase, sites)


def commutes(a: PauliTerm, b: PauliTerm) -> bool:
    """True iff the strings differ (both non-identity) on an even number of sites."""
    ax, az = a.masks
    bx, bz = b.masks
    return ((ax & bz) ^ (az & bx)).bit_count() % 2 == 0


def qubitwise_commutes(a: PauliTerm, b: PauliTerm) -> bool:
    """True iff the axes agree on every site where both strings act."""
    ax, az = a.masks
    bx, bz = b.masks
    shared = (ax | az) & (bx | bz)
    return ((ax ^ bx) | (az ^ bz)) & shared == 0


class QubitOperator:
    """Canonical weighted sum of Pauli strings.

    Terms sharing a Pauli string are merged on construction and terms whose
    coefficient magnitude is below ``tol`` are removed.  Instances are treated
    as immutable; arithmetic returns new operators.
    """

    __slots__ = ("_terms", "num_qubits", "tol")

    def __init__(self, terms: Iterable[PauliTerm] = (), num_qubits: int | None = None,
                 tol: float = DROP_TOL):
        merged: dict[tuple, complex] = {}
        for term in terms:
            merged[term.key] = merged.get(term.key, 0j) + term.coeff
        self._terms = {k: c for k, c in merged.items() if abs(c) >= tol}
        needed = max((q + 1 for k in self._terms for q, _ in k), default=0)
        # inferred from all inputs, including terms that cancelled
        if num_qubits is None:
            num_qubits = max((q + 1 for k in merged for q, _ in k), default=0)
        if num_qubits < 0:
            raise ValueError("num_qubits must be non-negative")
        if num_qubits < needed:
            raise ValueError(f"terms act on qubit {needed - 1} but num_qubits={num_qubits}")
        self.num_qubits = int(num_qubits)
        self.tol = tol

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[str, complex]], num_qubits: int | None = None):
        """Build from ``(pauli_string, coeff)`` pairs, e.g. ``[("X0 X1", 0.5)]``."""
        return cls((PauliTerm(c, s) for s, c in pairs), num_qubits)

    @classmethod
    def identity(cls, num_qubits: int, coeff: complex = 1.0):
        return cls([PauliTerm(coeff)], num_qubits)

    @property
    def terms(self) -> list[PauliTerm]:
        return [PauliTerm(c, k) for k, c in self._terms.items()]

    def coefficient(self, paulis) -> complex:
        return self._terms.get(_canonical_paulis(paulis), 0j)

    def as_dict(self) -> dict[tuple, complex]:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def is_hermitian(self) -> bool:
        return all(abs(c.imag) < self.tol for c in self._terms.values())

    def real(self) -> "QubitOperator":
        """Copy with imaginary parts below tolerance discarded; raises if any remain."""
        if not self.is_hermitian:
            raise ValueError("operator has complex coefficients")
        return QubitOperator((PauliTerm(c.real, k) for k, c in self._terms.items()),
                             self.num_qubits, self.tol)

    def adjoint(self) -> "QubitOperator":
        return QubitOperator((PauliTerm(c.conjugate(), k) for k, c in self._terms.items()),
                             self.num_qubits, self.tol)

    def with_num_qubits(self, num_qubits: int) -> "QubitOperator":
        return QubitOperator(self.terms, num_qubits, self.tol)

    def _coerce(self, other):
        if isinstance(other, QubitOperator):
            return other
        if isinstance(other, PauliTerm):
            return QubitOperator([other])
        if isinstance(other, Number):
            return QubitOperator.identity(0, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return QubitOperator(self.terms + other.terms,
                             max(self.num_qubits, other.num_qubits), self.tol)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return QubitOperator((PauliTerm(c * other, k) for k, c in self._terms.items()),
                                 self.num_qubits, self.tol)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        products = [multiply(a, b) for a in self.terms for b in other.terms]
        return QubitOperator(products, max(self.num_qubits, other.num_qubits), self.tol)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return self.num_qubits == other.num_qubits and self._terms == other._terms

    def isclose(self, other: "QubitOperator", atol: float = 1e-10) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= atol for k in keys)

    def __repr__(self):
        body = " + ".join(str(t) for t in self.terms[:8])
        more = f" + ... ({len(self)} terms)" if len(self) > 8 else ""
        return f"QubitOperator(n={self.num_qubits}: {body or '0'}{more})"

    # -- serialization --------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "terms": [{"pauli": PauliTerm(c, k).label(), "coeff": [c.real, c.imag]}
                      for k, c in self._terms.items()],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "QubitOperator":
        terms = []
        for entry in data["terms"]:
            coeff = entry["coeff"]
            if isinstance(coeff, (list, tuple)):
                coeff = complex(coeff[0], coeff[1])
            terms.append(PauliTerm(coeff, entry["pauli"]))
        return cls(terms, data.get("num_qubits"))

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "QubitOperator":
        return cls.from_json_dict(json.loads(text))


def _parity(values: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(values) & 1).astype(np.int64)


def pauli_action(term: PauliTerm, num_qubits: int) -> tuple[int, np.ndarray]:
    """Return ``(flip, phase)`` with ``P|b> = phase[b] |b ^ flip>`` over all ``b``.

    The phase excludes ``term.coeff``.
    """
    x, z = term.masks
    ny = (x & z).bit_count()
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    phase = (1j ** ny) * (1 - 2 * _parity(idx & z)).astype(complex)
    return x, phase


def to_matrix(op: QubitOperator | PauliTerm, num_qubits: int | None = None,
              sparse: bool = False):
    """Matrix of ``op`` in the computational basis (dense unless ``sparse``)."""
    if isinstance(op, PauliTerm):
        op = QubitOperator([op])
    n = op.num_qubits if num_qubits is None else num_qubits
    if n < op.num_qubits:
        raise ValueError("num_qubits smaller than operator support")
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    mat = scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    for term in op.terms:
        flip, phase = pauli_action(term, n)
        mat = mat + scipy.sparse.csr_matrix((term.coeff * phase, (cols ^ flip, cols)),
                                            shape=(dim, dim))
    return mat if sparse else mat.toarray()


def l1_norm(op: QubitOperator) -> float:
    """Sum of absolute coefficients, identity term included."""
    return float(sum(abs(t.coeff) for t in op.terms))


MAX_DENSE_QUBITS = 12


def _check_dense(op: QubitOperator):
    if not op.is_hermitian:
        raise ValueError("operator is not Hermitian")
    if op.num_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"{op.num_qubits} qubits exceeds dense limit {MAX_DENSE_QUBITS}")


def spectral_halfwidth(op: QubitOperator) -> float:
    """``(E_max - E_min) / 2`` by dense diagonalization.

    This is the smallest l1 norm any decomposition into unitaries can have.
    """
    _check_dense(op)
    evals = np.linalg.eigvalsh(to_matrix(op))
    return float(evals[-1] - evals[0]) / 2


@dataclass(frozen=True)
class AnticommutingGroup:
    members: tuple[PauliTerm, ...]

    @property
    def combined_norm(self) -> float:
        return math.sqrt(sum(t.coeff.real ** 2 for t in self.members))

    def as_operator(self, num_qubits: int | None = None) -> QubitOperator:
        return QubitOperator(self.members, num_qubits)


def _real_terms(op: QubitOperator) -> list[PauliTerm]:
    if not op.is_hermitian:
        raise ValueError("anticommuting grouping needs real coefficients")
    return [t.with_coeff(t.coeff.real) for t in op.terms]


def group_anticommuting(op: QubitOperator) -> list[AnticommutingGroup]:
    """Greedy seed-and-grow partition into mutually anticommuting sets.

    Terms are visited by descending ``|coeff|``; each unassigned term seeds a
    group that absorbs every later term anticommuting with all current members.
    Each group ``sum_k c_k P_k`` equals ``combined_norm`` times a Hermitian
    unitary, so the grouped l1 norm never exceeds the plain one.
    """
    terms = sorted(_real_terms(op), key=lambda t: (-abs(t.coeff), t.key))
    used = [False] * len(terms)
    groups = []
    for i, seed in enumerate(terms):
        if used[i]:
            continue
        used[i] = True
        members = [seed]
        for j in range(i + 1, len(terms)):
            if not used[j] and all(not commutes(terms[j], m) for m in members):
                members.append(terms[j])
                used[j] = True
        groups.append(AnticommutingGroup(tuple(members)))
    return groups


def grouped_l1_norm(groups: Iterable[AnticommutingGroup]) -> float:
    return float(sum(g.combined_norm for g in groups))


def qubitwise_coloring(terms: list[PauliTerm]) -> list[list[int]]:
    """Partition term indices into qubitwise-commuting classes.

    Greedy coloring of the incompatibility graph, visiting vertices by
    descending degree (ties by original position).
    """
    n = len(terms)
    adj = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if not qubitwise_commutes(terms[i], terms[j]):
                adj[i].add(j)
                adj[j].add(i)
    order = sorted(range(n), key=lambda i: (-len(adj[i]), i))
    color = {}
    for v in order:
        taken = {color[u] for u in adj[v] if u in color}
        c = 0
        while c in taken:
            c += 1
        color[v] = c
    classes = [[] for _ in range(max(color.values(), default=-1) + 1)]
    for v in range(n):
        classes[color[v]].append(v)
    return classes


def group_qubitwise_commuting(op: QubitOperator):
    """Partition ``op`` into :class:`~qcsc.measure.MeasurementGroup` objects."""
    from .measure import MeasurementGroup, basis_change

    terms = op.terms
    groups = []
    for cls in qubitwise_coloring(terms):
        members = tuple(terms[i] for i in cls)
        groups.append(MeasurementGroup(members, basis_change(members, op.num_qubits), 0))
    return groups


def number_operator(num_modes: int) -> QubitOperator:
    """Total occupation ``sum_j (I - Z_j)/2`` under Jordan-Wigner."""
    if num_modes < 0:
        raise ValueError("num_modes must be non-negative")
    terms = [PauliTerm(num_modes / 2)] + [PauliTerm(-0.5, {j: "Z"}) for j in range(num_modes)]
    return QubitOperator(terms, num_modes)


def effective_shift(op: QubitOperator, n_electrons: int, c: float) -> QubitOperator:
    """Return ``op + c (N^2 - n_electrons^2 I)`` with ``N`` the number operator.

    The added piece vanishes on the ``n_electrons`` particle sector, so the
    spectrum there is unchanged while the full-space Pauli l1 norm moves.
    The one-electron shift operator is fixed to zero.
    """
    if op.num_qubits < 0:
        raise ValueError("num_qubits must be non-negative")
    if not 0 <= n_electrons <= op.num_qubits:
        raise ValueError(f"n_electrons={n_electrons} outside [0, {op.num_qubits}]")
    if c == 0:
        return op
    num = number_operator(op.num_qubits)
    penalty = num * num - QubitOperator.identity(op.num_qubits, n_electrons ** 2)
    return op + c * penalty


def optimize_shift(op: QubitOperator, n_electrons: int, c_grid) -> tuple[float, float]:
    """Grid search for the shift ``c`` minimizing the Pauli l1 norm.

    Ties go to the smallest ``|c|``, then the smallest ``c``.
    """
    grid = [float(c) for c in c_grid]
    if not grid:
        raise ValueError("empty c grid")
    scored = [(l1_norm(effective_shift(op, n_electrons, c)), abs(c), c) for c in grid]
    best = min(scored)
    return best[2], best[0]


def random_hermitian(num_qubits: int, num_terms: int, rng: np.random.Generator,
                     max_weight: int | None = None) -> QubitOperator:
    """Random real-coefficient Pauli sum, handy for randomized checks."""
    terms = []
    max_weight = num_qubits if max_weight is None else max_weight
    for _ in range(num_terms):
        w = int(rng.integers(1, max_weight + 1)) if num_qubits else 0
        qubits = rng.choice(num_qubits, size=w, replace=False) if w else []
        paulis = {int(q): AXES[int(rng.integers(3))] for q in qubits}
        terms.append(PauliTerm(float(rng.normal()), paulis))
    return QubitOperator(terms, num_qubits)
