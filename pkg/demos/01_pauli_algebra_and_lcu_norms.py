# %% [markdown]
# # Pauli algebra and LCU norms
#
# Operators are sums of Pauli strings with complex coefficients.  This demo
# multiplies strings, checks commutation, and compares three measures of an
# operator's size: the coefficient l1 norm, the norm after grouping
# anticommuting terms, and the spectral half-width.

# %%
import numpy as np

from qcsc.pauli import (
    PauliTerm,
    QubitOperator,
    commutes,
    group_anticommuting,
    group_qubitwise_commuting,
    grouped_l1_norm,
    l1_norm,
    multiply,
    random_hermitian,
    spectral_halfwidth,
)

# %% [markdown]
# Products keep track of the phase: X·Y = iZ, and X, Z anticommute.

# %%
x, y, z = (PauliTerm.from_string(s) for s in ("X0", "Y0", "Z0"))
print("X*Y =", multiply(x, y))
print("X and Z commute?", commutes(x, z))

# %% [markdown]
# A small Hamiltonian.  The grouped norm replaces each anticommuting block
# sum_k c_k P_k by sqrt(sum_k c_k^2), which is never larger than sum_k |c_k|.

# %%
h = QubitOperator.from_terms([("X0", 0.8), ("Z0", 0.6), ("Z0 Z1", 0.5), ("X1", 0.3)], 2)
groups = group_anticommuting(h)
for g in groups:
    print([t.label() for t in g.members], "combined norm", round(g.combined_norm, 4))
print("l1 norm       ", l1_norm(h))
print("grouped norm  ", round(grouped_l1_norm(groups), 4))
print("half-width    ", round(spectral_halfwidth(h), 4))

# %% [markdown]
# The same ordering holds for random operators.

# %%
rng = np.random.default_rng(0)
for _ in range(5):
    op = random_hermitian(4, 10, rng)
    print(f"l1 {l1_norm(op):7.3f}  grouped {grouped_l1_norm(group_anticommuting(op)):7.3f}"
          f"  half-width {spectral_halfwidth(op):7.3f}")

# %% [markdown]
# Qubitwise-commuting groups are what a measurement schedule needs: every
# term in a group can be read from one basis setting.

# %%
for group in group_qubitwise_commuting(h):
    print([t.label() for t in group.terms], "basis gates:",
          [g.kind for g in group.basis_circuit.gates])
