# %% [markdown]
# # Photodiode ring and power budget

# %%
import numpy as np

from ltasim import energy, optics, studies

# %% [markdown]
# ## Bearing error versus ring size
# A few frames per angle are enough to see the trend; the acceptance suite
# uses 50.

# %%
clean = studies.bearing_error_sweep((4, 8, 16), "clean", frames=5)
refl = studies.bearing_error_sweep((4, 8), "reflective", frames=5)
for n, e in clean.items():
    print(f"clean  n={n:2d} median err: max {e.max():5.2f} deg, mean {e.mean():5.2f} deg")
for n, e in refl.items():
    print(f"mirror n={n:2d} median err: max {e.max():5.2f} deg")

# %% [markdown]
# ## Detection range
# SNR of a single diode facing the beacon as it backs away.

# %%
arr = optics.single_diode()
level = np.array([1.0, 0.0, 0.0, 0.0])
rng = np.random.default_rng(0)
for d in (1.0, 3.0, 5.0, 7.0, 10.0, 15.0):
    b = optics.BeaconConfig(position=np.array([d, 0.0, 0.0]), boresight=np.array([-1.0, 0.0, 0.0]))
    r = optics.demodulate(optics.sample_frame([b], 300.0, arr, np.zeros(3), level, rng=rng), arr, b.f_mod)[0]
    print(f"{d:5.1f} m  SNR {r.snr:8.1f}  detected={r.detected}")

# %% [markdown]
# ## Power budget at 80 klux

# %%
rep = energy.energy_report()
print(f"harvest {rep['harvest_mw']:.1f} mW")
for row in rep["modes"]:
    print(f"{row['mode']:14s} {row['draw_mw']:7.1f} mW  charge:run {row['charging_ratio']:.2f}")
print(f"duty cycle {rep['duty_cycle_min_per_hour']:.1f} min per hour of charging")
print("Pareto:", ", ".join(rep["pareto"]))

# %%
cmp = energy.endurance_comparison()
print(cmp)
