# %% [markdown]
# # Product formulas: step counts and measured error
#
# For n steps of order p the error bound scales like n^-p.  The measured
# spectral-norm error against exp(-iHt) shows the same slopes.

# %%
import numpy as np

from qcsc.lattice import RUCL3_PARAMS, LatticeSpec, heisenberg, kitaev_heisenberg
from qcsc.pauli import QubitOperator
from qcsc.trotter import (
    TrotterPlan,
    commutator_bound,
    empirical_error,
    l1_bound,
    step_circuit,
    steps_for_error_commutator,
    steps_for_error_l1,
)

# %% [markdown]
# H = X + Z on one qubit.

# %%
h = QubitOperator.from_terms([("X0", 1.0), ("Z0", 1.0)], 1)
for n in (16, 64, 256):
    print(f"n={n:4d}  measured p1 {empirical_error(h, 1.0, n, 1):.2e}"
          f"  bound {l1_bound(h, 1.0, n, 1):.2e}  commutator bound {commutator_bound(h, 1.0, n):.2e}")

# %% [markdown]
# Slopes of log(error) against log(n) on the RuCl3 hexagon.

# %%
hexagon = kitaev_heisenberg(LatticeSpec.honeycomb(1, 1), **RUCL3_PARAMS)
steps = np.array([64, 128, 256])
for p in (1, 2):
    errs = [empirical_error(hexagon, 1.0, int(n), p) for n in steps]
    slope = -np.polyfit(np.log(steps), np.log(errs), 1)[0]
    print(f"order {p}: errors {np.round(errs, 5)}  slope {slope:.3f}")

# %% [markdown]
# Step counts for a target accuracy.  The commutator bound is much tighter
# when most terms commute.

# %%
ring = heisenberg(LatticeSpec.chain(6, periodic=True), 1.0)
for eps in (1e-2, 1e-3):
    print(f"eps={eps:g}: l1 p1 {steps_for_error_l1(ring, 1.0, eps, 1)}, "
          f"l1 p2 {steps_for_error_l1(ring, 1.0, eps, 2)}, "
          f"commutator {steps_for_error_commutator(ring, 1.0, eps)}")

# %% [markdown]
# One second-order step as a circuit.

# %%
step = step_circuit(TrotterPlan(h, 1.0, order=2, steps=4))
print([(g.kind, g.targets, round(g.theta, 3) if g.theta is not None else None) for g in step.gates])
