"""Product-formula (Trotter) compilation, step-count bounds and measured error.

Rotation-angle convention: a term ``c P`` evolved for time ``tau`` becomes
``exp(-i c tau P) = exp(-i theta/2 P)`` with ``theta = 2 c tau``.

Step-count bounds use the l1 norm ``lam`` of the non-identity coefficients
(identity terms only add a global phase).  For ``n`` steps of length
``tau = t/n``:

* order 1: ``(lam t)^2 / (2n) * exp(lam t / n)``.  The exact first-order error
  is at most ``tau^2/2 * sum_{i<j} ||[H_i, H_j]||`` per step and that sum is
  at most ``lam^2``; the exponential factor only loosens it.
* order 2: ``(lam t)^3 / (3 n^2) * exp(lam t / n)``.  The symmetric formula and
  the exact propagator agree through second order, and the remainder of each
  series is at most ``(lam tau)^3/6 * exp(lam tau)``.
* commutator (order 1): ``t^2/(2n) * sum_{i<j} l1([H_i, H_j])``; the spectral
  norm of each commutator is replaced by its Pauli l1 norm, which can only
  overestimate.

All three are sufficient conditions, not tight estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .circuits import Circuit, MAX_ORACLE_QUBITS, pauli_rotation_circuit, to_matrix
from .pauli import PauliTerm, QubitOperator, commutes, multiply
from .pauli import to_matrix as operator_matrix

MAX_COMMUTATOR_TERMS = 2000


def _evolution_terms(h: QubitOperator) -> list[PauliTerm]:
    if not h.is_hermitian:
        raise ValueError("Trotterization needs real coefficients")
    return [t.with_coeff(t.coeff.real) for t in h.terms if not t.is_identity]


def default_term_order(terms: list[PauliTerm]) -> tuple[int, ...]:
    """Descending ``|coeff|``, ties by Pauli string."""
    return tuple(sorted(range(len(terms)), key=lambda i: (-abs(terms[i].coeff), terms[i].key)))


@dataclass(frozen=True)
class TrotterPlan:
    hamiltonian: QubitOperator
    t: float
    order: int = 1
    steps: int = 1
    term_order: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError("only orders 1 and 2 are supported")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        terms = _evolution_terms(self.hamiltonian)
        perm = default_term_order(terms) if self.term_order is None else tuple(self.term_order)
        if sorted(perm) != list(range(len(terms))):
            raise ValueError("term_order must be a permutation of the non-identity terms")
        object.__setattr__(self, "term_order", perm)

    def terms(self) -> list[PauliTerm]:
        """Non-identity terms in execution order."""
        terms = _evolution_terms(self.hamiltonian)
        return [terms[i] for i in self.term_order]

    def to_json_dict(self) -> dict:
        return {"hamiltonian": self.hamiltonian.to_json_dict(), "t": self.t,
                "order": self.order, "steps": self.steps, "term_order": list(self.term_order)}


def step_circuit(plan: TrotterPlan) -> Circuit:
    """One Trotter step of length ``t/steps``."""
    n_q = plan.hamiltonian.num_qubits
    tau = plan.t / plan.steps
    terms = plan.terms()
    gates = []
    if plan.order == 1:
        for term in terms:
            gates += pauli_rotation_circuit(term, 2 * term.coeff.real * tau, n_q).gates
    else:
        half = [pauli_rotation_circuit(term, term.coeff.real * tau, n_q) for term in terms]
        for block in half + half[::-1]:
            gates += block.gates
    return Circuit(n_q, tuple(gates))


def trotter_circuit(plan: TrotterPlan) -> Circuit:
    step = step_circuit(plan)
    return Circuit(step.num_qubits, step.gates * plan.steps)


def all_commute(terms: list[PauliTerm]) -> bool:
    return all(commutes(a, b) for i, a in enumerate(terms) for b in terms[i + 1:])


def l1_bound(h: QubitOperator, t: float, n: int, p: int) -> float:
    """Error bound of ``n`` order-``p`` steps from the coefficient l1 norm."""
    lam = sum(abs(term.coeff) for term in _evolution_terms(h))
    x = lam * abs(t)
    if p == 1:
        return x ** 2 / (2 * n) * math.exp(x / n)
    if p == 2:
        return x ** 3 / (3 * n ** 2) * math.exp(x / n)
    raise ValueError("p must be 1 or 2")


def _smallest_n(bound, eps: float) -> int:
    hi = 1
    while bound(hi) > eps:
        hi *= 2
    lo = hi // 2
    # invariant: bound(hi) <= eps < bound(lo) (lo may be 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


def steps_for_error_l1(h: QubitOperator, t: float, eps: float, p: int = 1) -> int:
    if eps <= 0:
        raise ValueError("eps must be positive")
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    terms = _evolution_terms(h)
    if t == 0 or all_commute(terms):
        return 1
    return _smallest_n(lambda n: l1_bound(h, t, n, p), eps)


def commutator_sum(h: QubitOperator) -> float:
    """``sum_{i<j} l1([H_i, H_j])`` over the Pauli terms of ``h``."""
    terms = _evolution_terms(h)
    if len(terms) > MAX_COMMUTATOR_TERMS:
        raise ValueError(f"{len(terms)} terms exceeds commutator limit {MAX_COMMUTATOR_TERMS}")
    total = 0.0
    for i, a in enumerate(terms):
        for b in terms[i + 1:]:
            if not commutes(a, b):
                # [a, b] = 2 a b when the strings anticommute
                total += 2 * abs(multiply(a, b).coeff)
    return total


def commutator_bound(h: QubitOperator, t: float, n: int) -> float:
    return t ** 2 * commutator_sum(h) / (2 * n)


def steps_for_error_commutator(h: QubitOperator, t: float, eps: float) -> int:
    """First-order step count from the commutator bound."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    c = commutator_sum(h)
    return max(1, math.ceil(t ** 2 * c / (2 * eps)))


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Spectral norm of ``u - e^{i phi} v`` with ``phi`` from the trace overlap."""
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v, 2))


def empirical_error(h: QubitOperator, t: float, n: int, p: int = 1,
                    term_order: tuple[int, ...] | None = None) -> float:
    """Spectral-norm distance between the Trotter circuit and ``exp(-iHt)``.

    The circuit is ``steps`` repetitions of one step, so its unitary is built
    as the ``n``-th power of the step unitary.
    """
    if h.num_qubits > MAX_ORACLE_QUBITS:
        raise ValueError(f"{h.num_qubits} qubits exceeds oracle limit {MAX_ORACLE_QUBITS}")
    plan = TrotterPlan(h, t, p, n, term_order)
    v = np.linalg.matrix_power(to_matrix(step_circuit(plan)), n)
    u = expm(-1j * t * operator_matrix(h))
    return phase_aligned_distance(u, v)
