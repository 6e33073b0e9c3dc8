# %% [markdown]
# # Navigating to a single beacon
#
# Three guidance laws fly the same 7 m approach. The bearing-array law
# (BAG) reads the photodiode ring directly, the dither law (DES) searches
# with a sinusoidal heading wobble, and the gradient law (DGA) fits a plane
# to intensity samples collected along short legs.

# %%
import numpy as np

from ltasim import bundled, run

results = {}
for alg in ("bag", "dga", "des"):
    results[alg] = run(bundled(f"indoor_{alg}"))
    m = results[alg].metrics
    print(f"{alg.upper():4s} success={m.success} path={m.path_length:6.2f} m travel={m.travel_time:6.2f} s")

# %% [markdown]
# Path efficiency relative to the distance that actually had to be covered.

# %%
for alg, res in results.items():
    m = res.metrics
    net = m.initial_distance - bundled(f"indoor_{alg}").success_radius
    print(f"{alg.upper():4s} {m.path_length / net:.2f}x")

# %% [markdown]
# The trajectory log is a plain array; columns are listed on the log.

# %%
log = results["des"].trajectory
xy = log.array()[:, 1:3]
print(log.columns[:6])
print("DES lateral excursion: %.2f m" % np.max(np.abs(xy[:, 1])))

# %% [markdown]
# Headwind: only the array-based law holds on at 8 m/s.

# %%
for name in ("wind8", "wind14"):
    m = run(bundled(name)).metrics
    print(name, m.termination, m.success)
