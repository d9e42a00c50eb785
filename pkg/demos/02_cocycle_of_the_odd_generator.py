# %% [markdown]
# # The cocycle V_t of the odd generator
#
# The full algebra is the even algebra extended by one odd self-adjoint
# unitary ``U_0 = a(f_0) + a*(f_0)``.  Time evolution moves it to
# ``tau_t(U_0) = V_t U_0`` with ``V_t`` even and unitary.  For free fermions
# ``V_t + V_t*`` is a number; the interaction spoils this.

# %%
import numpy as np

from fermi_asymptotics import build_model
from fermi_asymptotics.crossed import cocycle_deviations, compute_Vt, cp_flatten, cp_lift, cp_mul, scalar_distance
from fermi_asymptotics.dynamics import spectral_propagator
from fermi_asymptotics.fock import u0_unitary
from fermi_asymptotics.metrics import recurrence_window, window_grid

model = build_model(4)
u0 = u0_unitary(model.system, np.eye(4)[0])

# %% [markdown]
# ## Crossed pairs
# Any operator splits as ``X = e1 + e2 U_0`` with even ``e1``, ``e2``; the
# twisted product of pairs reproduces ordinary multiplication.

# %%
rng = np.random.default_rng(0)
x = rng.normal(size=(16, 16))
y = rng.normal(size=(16, 16))
px, py = cp_lift(x, u0), cp_lift(y, u0)
prod = cp_flatten(cp_mul(px, py, u0), u0).matrix
print("flatten(lift(x) * lift(y)) - x y :", np.abs(prod - x @ y).max())

# %% [markdown]
# ## Scalar distance of the symmetric part

# %%
T = recurrence_window(spectral_propagator(model.hamiltonian(0.0)))
for lam in (0.0, 1.0):
    prop = spectral_propagator(model.hamiltonian(lam))
    sums, devs = [], []
    for t in window_grid(T, 21):
        v = compute_Vt(prop, u0, t).matrix
        sums.append(scalar_distance(v + v.conj().T)[1])
        devs.append(max(cocycle_deviations(prop, u0, t).values()))
    print(f"lambda={lam}: max ||V+V* - c|| = {max(sums):.2e}, cocycle identities hold to {max(devs):.1e}")
