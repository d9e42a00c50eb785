# %% [markdown]
# # Perturbing an equilibrium vector
#
# At inverse temperature ``beta`` the Gibbs state purifies to a vector
# ``|Omega_beta>`` in the doubled space, annihilated by the doubled generator
# ``L``.  Adding ``V - J V J`` keeps a perturbed invariant vector, built order by
# order with the pseudo-inverse of ``L``.  The residual of the n-th partial sum
# shrinks like ``lambda**(n+1)``.

# %%
import numpy as np

from fermi_asymptotics import build_model
from fermi_asymptotics.doubling import DoubledRep, gibbs_doubling
from fermi_asymptotics.experiments import local_perturbation
from fermi_asymptotics.metrics import loglog_slope
from fermi_asymptotics.perturb import (
    PseudoInverse,
    commutant_difference,
    kms_derivative,
    perturbation_series,
    resolvent_agreement,
    vector_angle,
)

model = build_model(3)
rep = DoubledRep(3)
h = model.hamiltonian(1.0).matrix
v = local_perturbation(model, 0)
hh = rep.embed_operator(h)
L = (hh - rep.conjugate_by_J(hh)).tocsr()
vh = rep.embed_operator(v)
pinv = PseudoInverse(L)
omega = gibbs_doubling(rep, h, beta=1.0).vector
print("kernel dimension of L:", pinv.kernel_dim, " gap:", round(pinv.gap, 4))

# %%
series = perturbation_series(rep, L, vh, 3, reference=omega, pinv=pinv)
d = commutant_difference(rep, vh)
lams = np.logspace(-3, -1, 5)
for n in (1, 2, 3):
    print(f"order {n}: residual slope {loglog_slope(lams, series.residuals(L, d, lams, n)):.3f}")

# %% [markdown]
# The first-order vector is orthogonal to ``ker L``.  The derivative of the
# exact perturbed Gibbs purification is not: part of it lies in the kernel,
# which the pseudo-inverse cannot reach.  Off the kernel the two agree.

# %%
der = kms_derivative(rep, h, v, 1.0)
off = der - pinv.kernel_projection(der)
print("angle to full derivative    :", round(vector_angle(series.vectors[0], der), 4))
print("angle to off-kernel part    :", f"{vector_angle(series.vectors[0], off):.1e}")

# %% [markdown]
# The pseudo-inverse is the ``eps -> 0`` limit of ``(L + i eps)^{-1}`` off the
# kernel, approached linearly in ``eps``.

# %%
eps, diffs, rich = resolvent_agreement(pinv, rep.a_modes[0].conj().T @ omega, [1e-7, 1e-6, 1e-5, 1e-4])
print("slope in eps:", round(loglog_slope(eps, diffs), 4), " extrapolated residual:", f"{rich:.1e}")
