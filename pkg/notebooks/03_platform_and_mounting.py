# %% [markdown]
# # Platform authority and solar-array placement

# %%
import numpy as np

from ltasim import studies

# %% [markdown]
# ## Altitude step, 2 g heavy
# The larger platform climbs to 0.5 m; the small one cannot lift off.

# %%
for plat in ("gt-mab", "beavis"):
    r = studies.altitude_step(plat, 0.5, 30.0)
    print(f"{plat:7s} reached={r.reached} overshoot={r.overshoot:.1%} settle={r.settling_time:.2f} s"
          f" max z={np.max(r.value):.3f} m")

# %%
y = studies.yaw_step(30.0)
print(f"yaw 30 deg: overshoot {y.overshoot:.1%}, settle {y.settling_time:.2f} s")

# %% [markdown]
# ## Mounting variants
# Pitch amplitude is half the peak-to-peak swing over a 30 s straight line.

# %%
for name in studies.MOUNTING_VARIANTS:
    kw = {"duration": 3.0, "initial_pitch": np.radians(1.0)} if name == "cg-above-cb" else {}
    r = studies.mounting_stability_study(name, **kw)
    cg = r.variant.induced_cg_offset
    print(f"{name:12s} cg=({cg[0]:+.4f}, {cg[2]:+.4f}) m  amplitude {r.amplitude:6.2f} deg  diverges={r.diverges()}")
