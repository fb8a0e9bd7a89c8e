"""Expectation-value estimation from sampled measurements, plus ZNE.

Grouped estimation rotates each qubitwise-commuting group to the Z basis, samples
``M_n`` shots and averages the coefficient-weighted diagonal terms per shot:
``E(H) = sum_n (1/M_n) sum_k Z_n^(k)``.

Shadow estimation draws an independent uniform basis from {X, Y, Z} for each
qubit and each sample, and uses the single-sample estimator
``3^|P| * prod_{q in P} (+-1)`` when every basis matches the term's axes, else 0.
A matching draw has probability ``3^-|P|``, which makes the estimator unbiased.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .circuits import Circuit, Gate, fold_global
from .density import NoiseModel, expectation_dm, run_noisy
from .pauli import PauliTerm, QubitOperator, qubitwise_commutes
from .statevector import StateVec, run, sample_array

_TO_Z = {"X": ("H",), "Y": ("Sdg", "H"), "Z": ()}
_BASES = ("X", "Y", "Z")


@dataclass(frozen=True)
class MeasurementGroup:
    terms: tuple[PauliTerm, ...]
    basis_circuit: Circuit
    shots: int = 0

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError("shots must be non-negative")

    @property
    def weight(self) -> float:
        return float(sum(abs(t.coeff) for t in self.terms))

    def with_shots(self, shots: int) -> "MeasurementGroup":
        return MeasurementGroup(self.terms, self.basis_circuit, int(shots))


@dataclass
class EstimateReport:
    mean: float
    stderr: float
    per_group: list[dict] = field(default_factory=list)
    total_shots: int = 0
    seed: int = 0

    def to_json_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr if math.isfinite(self.stderr) else None,
                "total_shots": self.total_shots, "seed": self.seed, "per_group": self.per_group}


def group_axes(terms) -> dict[int, str]:
    """Common per-qubit axis of a qubitwise-commuting set."""
    axes: dict[int, str] = {}
    for term in terms:
        for q, a in term.paulis:
            if axes.setdefault(q, a) != a:
                raise ValueError(f"terms disagree on qubit {q}: not qubitwise commuting")
    return axes


def basis_change(terms, num_qubits: int | None = None) -> Circuit:
    """Single-qubit rotations taking every term of the group to Z/I form."""
    axes = group_axes(terms)
    n = max(axes, default=-1) + 1 if num_qubits is None else num_qubits
    gates = [Gate(kind, (q,)) for q in sorted(axes) for kind in _TO_Z[axes[q]]]
    return Circuit(n, tuple(gates))


def measurement_groups(op: QubitOperator, total_shots: int | None = None,
                       strategy: str = "weighted") -> list[MeasurementGroup]:
    """Qubitwise-commuting groups of ``op``, optionally with shots allocated."""
    from .pauli import group_qubitwise_commuting

    groups = group_qubitwise_commuting(op)
    if total_shots is None:
        return groups
    alloc = allocate_shots(groups, total_shots, strategy)
    return [g.with_shots(m) for g, m in zip(groups, alloc)]


def allocate_shots(groups, total: int, strategy: str = "weighted") -> list[int]:
    """Split ``total`` shots over groups by largest-remainder rounding.

    ``weighted`` (default) is proportional to each group's coefficient l1 norm,
    ``uniform`` splits evenly.  Every nonempty group receives at least one shot.
    """
    nonempty = [i for i, g in enumerate(groups) if len(g.terms)]
    if total < len(nonempty):
        raise ValueError(f"{total} shots cannot cover {len(nonempty)} groups")
    if strategy == "weighted":
        w = np.array([groups[i].weight for i in nonempty], dtype=float)
        if w.sum() == 0:
            w = np.ones(len(nonempty))
    elif strategy == "uniform":
        w = np.ones(len(nonempty))
    else:
        raise ValueError(f"unknown allocation strategy {strategy!r}")
    alloc = [0] * len(groups)
    if not nonempty:
        return alloc
    quota = total * w / w.sum()
    base = np.floor(quota).astype(int)
    left = total - int(base.sum())
    order = sorted(range(len(nonempty)), key=lambda k: (-(quota[k] - base[k]), k))
    for k in order[:left]:
        base[k] += 1
    # move single shots from the largest allocations to any starved group
    for k in range(len(nonempty)):
        if base[k] == 0:
            donor = max(range(len(nonempty)), key=lambda j: (base[j], -j))
            base[donor] -= 1
            base[k] = 1
    for k, i in enumerate(nonempty):
        alloc[i] = int(base[k])
    return alloc


def _signs(outcomes: np.ndarray, mask: int) -> np.ndarray:
    return 1 - 2 * (np.bitwise_count(outcomes & mask) & 1).astype(np.int64)


def _support_mask(term: PauliTerm) -> int:
    return sum(1 << q for q in term.support)


def _check_coverage(groups, op: QubitOperator, atol: float = 1e-12):
    covered = QubitOperator([t for g in groups for t in g.terms], op.num_qubits)
    count = sum(len(g.terms) for g in groups)
    if count != len(op) or not covered.isclose(op, atol):
        raise ValueError("measurement groups do not cover the operator exactly")


def estimate_expectation(state: StateVec, groups, seed: int = 0,
                         op: QubitOperator | None = None) -> EstimateReport:
    """Sampled estimate of ``sum_n <H_n>`` with per-group shot noise.

    Group ``n`` samples with a generator seeded by ``(seed, n)``.  The standard
    error combines the per-group sample variances (``M_n - 1`` denominator);
    a group with a single shot makes it infinite.
    """
    if op is not None:
        _check_coverage(groups, op)
    mean, var, per_group, total = 0.0, 0.0, [], 0
    for idx, group in enumerate(groups):
        m = group.shots
        if m < 1:
            raise ValueError(f"group {idx} has no shots allocated")
        for term in group.terms:
            if not qubitwise_commutes(term, group.terms[0]) or abs(term.coeff.imag) > 1e-12:
                raise ValueError(f"group {idx} is not a real qubitwise-commuting set")
        rng = np.random.default_rng([seed, idx])
        circ = group.basis_circuit
        if circ.num_qubits != state.num_qubits:
            circ = Circuit(state.num_qubits, circ.gates)
        outcomes = sample_array(run(circ, state), m, rng)
        values = np.zeros(m)
        for term in group.terms:
            values += term.coeff.real * _signs(outcomes, _support_mask(term))
        g_mean = float(values.mean())
        g_var = float(values.var(ddof=1)) / m if m > 1 else math.inf
        mean += g_mean
        var += g_var
        total += m
        per_group.append({"index": idx, "shots": m, "mean": g_mean,
                          "stderr": math.sqrt(g_var) if math.isfinite(g_var) else None})
    return EstimateReport(mean, math.sqrt(var), per_group, total, seed)


def _basis_circuit(code: np.ndarray, n: int) -> Circuit:
    gates = [Gate(kind, (q,)) for q in range(n) for kind in _TO_Z[_BASES[code[q]]]]
    return Circuit(n, tuple(gates))


def shadow_samples(state: StateVec, op: QubitOperator, samples: int, seed: int = 0) -> np.ndarray:
    """Single-sample shadow estimates of ``<op>``, one per random-basis shot."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not op.is_hermitian:
        raise ValueError("shadow estimation needs a Hermitian operator")
    n = state.num_qubits
    if op.num_qubits > n:
        raise ValueError("operator acts outside the state")
    rng = np.random.default_rng(seed)
    bases = rng.integers(0, 3, size=(samples, n))
    settings, inverse = np.unique(bases, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    out = np.zeros(samples)
    terms = op.terms
    for s_idx, code in enumerate(settings):
        rows = np.flatnonzero(inverse == s_idx)
        outcomes = sample_array(run(_basis_circuit(code, n), state), rows.size, rng)
        values = np.zeros(rows.size)
        for term in terms:
            if all(_BASES[code[q]] == a for q, a in term.paulis):
                values += term.coeff.real * 3.0 ** term.weight * _signs(outcomes, _support_mask(term))
        out[rows] = values
    return out


def shadow_estimate(state: StateVec, op: QubitOperator, samples: int,
                    seed: int = 0) -> EstimateReport:
    values = shadow_samples(state, op, samples, seed)
    stderr = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return EstimateReport(float(values.mean()), stderr, [], samples, seed)


# -- zero-noise extrapolation ---------------------------------------------------

ZNE_MODELS = ("linear", "poly2", "exp")


def _lstsq(design: np.ndarray, values: np.ndarray):
    coef, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < design.shape[1]:
        raise ValueError("degenerate design matrix for extrapolation")
    return coef


def zne_extrapolate(points, model: str = "linear") -> float:
    """Fit ``(noise_factor, value)`` points and evaluate the fit at factor 0.

    ``linear`` and ``poly2`` are least-squares polynomials.  ``exp`` fits
    ``a exp(-b f) + c``; with two points ``c`` is fixed to 0 and the fit is
    exact, otherwise ``b`` is found by a bounded 1-D search with ``(a, c)``
    solved by least squares at each ``b``.
    """
    if model not in ZNE_MODELS:
        raise ValueError(f"unknown model {model!r}")
    f = np.array([float(p[0]) for p in points])
    v = np.array([float(p[1]) for p in points])
    need = 3 if model == "poly2" else 2
    if f.size < need:
        raise ValueError(f"{model} extrapolation needs at least {need} points")
    if np.any(f < 1):
        raise ValueError("noise factors must be >= 1")
    if np.unique(f).size != f.size:
        raise ValueError("noise factors must be distinct")
    if np.ptp(v) == 0:
        return float(v[0])
    if model == "linear":
        return float(_lstsq(np.vander(f, 2), v)[-1])
    if model == "poly2":
        return float(_lstsq(np.vander(f, 3), v)[-1])
    if f.size == 2:
        if v[0] * v[1] <= 0:
            raise ValueError("two-point exponential fit needs same-sign nonzero values")
        b = np.log(v[0] / v[1]) / (f[1] - f[0])
        return float(v[0] * np.exp(b * f[0]))

    def fit(b):
        design = np.column_stack([np.exp(-b * f), np.ones_like(f)])
        coef, *_ = np.linalg.lstsq(design, v, rcond=None)
        return coef, float(np.sum((design @ coef - v) ** 2))

    scale = 10.0 / f.max()
    best = minimize_scalar(lambda b: fit(b)[1], bounds=(-scale, scale), method="bounded",
                           options={"xatol": 1e-10})
    coef, _ = fit(best.x)
    return float(coef.sum())


def zne_points(c: Circuit, op: QubitOperator, nm: NoiseModel, factors=(1, 3, 5)):
    """``(factor, <op>)`` pairs from density-matrix runs of globally folded circuits."""
    return [(f, expectation_dm(run_noisy(fold_global(c, f), nm), op)) for f in factors]
