# %% [markdown]
# # Strong-topology diagnostics in the doubled space
#
# The tracial state becomes a vector state ``|Omega>`` on twice as many modes.
# The doubled generator ``pi(H) - J pi(H) J`` annihilates ``|Omega>`` and
# carries the dynamics of both the algebra and its commutant.  Three
# diagnostics are compared for the free and interacting models on a common
# time grid: the ``U U'`` norm ``s(t)``, the particle number and the distance
# of ``V_t V_t`` from ``+1`` or ``-1`` on commutant probe vectors.

# %%
from fermi_asymptotics.config import ExperimentConfig
from fermi_asymptotics.experiments import run_doubled

cfg = ExperimentConfig().replace(system={"n_modes": 5})
res = run_doubled(cfg)
print("common window:", round(res.windows["matched"], 3))
for key in sorted(res.derived):
    print(f"  {key:32s} {res.derived[key]:.4g}")

# %% [markdown]
# Under free dynamics the particle number in the doubled space is constant
# and both ``s(t)`` and ``min(r_+, r_-)`` dip towards zero late in the window.
# With the interaction switched on the number grows and the late-window
# minima stay far from zero: the ratios printed above quantify the contrast.

# %%
for rec in res.records:
    if rec.quantity == "number":
        t, v = rec.windowed()
        print(f"lambda={rec.metadata['lambda']}: n(0)={v[0]:.3f}, n(T/2)={v[len(v) // 2]:.3f}, n(T)={v[-1]:.3f}")
