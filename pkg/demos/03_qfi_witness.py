"""Entanglement depth certified by the quantum Fisher information.

F_max is the largest eigenvalue of the 3x3 Fisher matrix over the collective
generators; F_max/N > k - 1 rules out states with fewer than k entangled spins.
"""
# %%
import numpy as np

from btcgmc import dicke, fits
from btcgmc.qfi import qfi_gamma
from btcgmc.steady import NessSpec, ness

# %% scan the drive at N = 64
print("omega0   F/N    depth")
for w in (0.3, 0.6, 0.8, 0.9, 0.95, 1.0, 1.2, 2.0):
    q = qfi_gamma(ness(NessSpec(dicke.ModelParams(64, w))))
    print(f"{w:5.2f}  {q.f_max / 64:6.3f}   {q.witnessed_depth}")

# %% deep in the time-crystal phase the witness fades with N
sizes = np.array([32, 64, 128, 256, 512])
per_n = np.array([qfi_gamma(ness(NessSpec(dicke.ModelParams(int(N), 2.0)))).f_max / N for N in sizes])
print("\nomega0=2, F/N:", np.round(per_n, 4))
print("log-log slope", round(fits.fit_power_law(sizes, per_n)["slope"], 3))
