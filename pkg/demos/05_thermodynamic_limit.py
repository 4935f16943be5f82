"""Correlations at N -> infinity from the asymptotic moment series."""
# %%
import numpy as np

from btcgmc import dicke, fits, thermo
from btcgmc.steady import NessSpec, ness

# %% single-spin state against a large finite system
for w in (1.5, 2.0, 4.0):
    inf = thermo.thermo_marginal(1, thermo.gtilde_of(w)).bloch()
    fin = dicke.magnetization(ness(NessSpec(dicke.ModelParams(2048, w))))
    print(f"omega0={w}: Bloch N=inf {np.round(inf, 4)}  N=2048 {np.round(fin, 4)}")

# %% onset of extensive correlations just above omega0 = 1
w = np.linspace(1.01, 1.3, 30)
i1 = np.array([thermo.thermo_total_per_spin(thermo.gtilde_of(x)) for x in w])
print("\ncritical exponent beta =", round(fits.fit_power_law(w - 1, i1)["slope"], 3))

# %% hierarchy in k at omega0 = 2
ks = np.arange(2, 8)
gmc = np.array([thermo.thermo_gmc_per_spin(int(k), 2j) for k in ks])
print("I^k/N for k=2..7:", np.round(gmc, 4))
print("log-log slope in k", round(fits.fit_power_law(ks, gmc)["slope"], 3))

# %% convergence of the truncated construction with its order
for w in (2.0, 1.0):
    rep = thermo.truncation_convergence(2, w, n=50)
    print(f"omega0={w}: exponential residual {rep.exponential.residual:.2e}, "
          f"power-law residual {rep.power.residual:.2e}, preferred {rep.preferred}")
