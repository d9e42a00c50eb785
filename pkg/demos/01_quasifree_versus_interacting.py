# %% [markdown]
# # Free versus interacting fermions on a coherent-state grid
#
# Four modes, one per Gaussian wave packet on a 2 x 2 phase-space lattice.
# The kinetic energy alone generates a quasifree flow: every annihilator is
# carried to another annihilator, so anticommutators stay c-numbers.  The pair
# interaction breaks that.  All times are kept inside the recurrence window.

# %%
import numpy as np

from fermi_asymptotics import build_model
from fermi_asymptotics.dynamics import evolve_operator, quasifree_evolve, spectral_propagator
from fermi_asymptotics.fock import anticommutator, operator_norm, smeared_annihilator, smeared_creator
from fermi_asymptotics.metrics import recurrence_window, window_grid

model = build_model(4)
print("coherent-state grid:", model.grid.points)
print("overlap condition number:", round(model.basis.condition, 3))

# %% [markdown]
# ## The one-particle lift
# Under the kinetic flow ``tau_t a(f) = a(exp(iht) f)``.  The operator-level
# evolution and the one-particle prediction agree to machine precision.

# %%
prop0 = spectral_propagator(model.hamiltonian(0.0))
T = recurrence_window(prop0)
f = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
g = np.array([0.0, 0.0, 0.0, 1.0], dtype=complex)
for t in window_grid(T, 5):
    evolved = evolve_operator(prop0, smeared_annihilator(model.system, f), t)
    lifted = smeared_annihilator(model.system, quasifree_evolve(model.terms.kinetic, f, t))
    print(f"t={t:6.3f}  lift error {operator_norm(evolved.matrix - lifted.matrix):.1e}")

# %% [markdown]
# ## Anticommutators with and without the interaction
# Quasifree: the anticommutator is ``<e^{iht} f | g>`` times one, so its norm
# equals that overlap.  Interacting: it becomes a genuine operator whose norm
# no longer matches any one-particle overlap.

# %%
prop1 = spectral_propagator(model.hamiltonian(1.0))
gd = smeared_creator(model.system, g)
for t in window_grid(T, 5)[1:]:
    row = []
    for prop in (prop0, prop1):
        ac = anticommutator(evolve_operator(prop, smeared_annihilator(model.system, f), t), gd).matrix
        off_scalar = operator_norm(ac - np.trace(ac) / ac.shape[0] * np.eye(ac.shape[0]))
        row.append(off_scalar)
    print(f"t={t:6.3f}  distance from a c-number: free {row[0]:.1e}, interacting {row[1]:.3f}")
