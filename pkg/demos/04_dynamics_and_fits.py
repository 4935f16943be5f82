"""Time evolution from the x-polarized state and the rates hidden in it.

Takes a minute or two: two sizes integrated with RK4 at omega0 = 2.
"""
# %%
import numpy as np

from btcgmc import dicke, fits
from btcgmc.correlations import correlation_spectrum
from btcgmc.dynamics import IntegrationControls, evolve, initial_state_minus_x
from btcgmc.qfi import qfi_gamma
from btcgmc.steady import NessSpec, ness

w = 2.0
rates = {}
for N in (40, 80):
    p = dicke.ModelParams(N, w)
    rec = evolve(initial_state_minus_x(N), p, IntegrationControls(t_max=2.0 * N, snapshot_stride=20), k_list=(1,))
    target = ness(NessSpec(p))
    i1_inf = correlation_spectrum(target).i_total
    t, i1 = rec.times, rec.correlations[1]

    # %% slow approach of I^1 to its steady value
    approach = fits.fit_exponential_approach(t, i1, i1_inf)
    rates[N] = approach["Gamma"]

    # %% oscillation: same frequency in correlations, Fisher information and mz
    growth = fits.fit_damped_oscillation(t, i1, i1_inf, "growth", detrend=True)
    decay = fits.fit_damped_oscillation(t, rec.f_max / N, qfi_gamma(target).f_max / N, "decay", detrend=True)
    mz_inf = dicke.magnetization(target)[2]
    nu_mz = fits.zero_crossing_frequency(t[t >= 1], rec.mz[t >= 1] - mz_inf, center=0.0)
    print(f"N={N}: Gamma={rates[N]:.4f}  nu(I1)={growth['nu']:.4f}  nu(F)={decay['nu']:.4f}  nu(mz)={nu_mz:.4f}")

print("Gamma ratio N=40/N=80:", round(rates[40] / rates[80], 3), "(about 2 if Gamma ~ 1/N)")
