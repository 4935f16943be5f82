"""Genuine multipartite correlations of the steady state.

I^k measures correlation that needs at least k spins to see.  Below the
transition the total I^1 stays finite as N grows (so I^1/N -> 0); above
it I^1 grows with N.
"""
# %%
import numpy as np

from btcgmc import dicke
from btcgmc.correlations import correlation_spectrum
from btcgmc.steady import NessSpec, ness

# %% total correlation per spin
print("   N   I1/N (0.5)   I1/N (2.0)")
for N in (20, 40, 80, 160, 320):
    vals = [correlation_spectrum(ness(NessSpec(dicke.ModelParams(N, w)))).i_total / N for w in (0.5, 2.0)]
    print(f"{N:4d}   {vals[0]:.5f}      {vals[1]:.5f}")

# %% the hierarchy I^2, I^3, ... at N = 60
for w in (0.5, 2.0):
    spec = correlation_spectrum(ness(NessSpec(dicke.ModelParams(60, w))))
    print(f"\nomega0={w}: I^k for k=2..10", np.round(spec.genuine[2:11], 5))
    print("  sum over k", round(float(np.sum(spec.genuine[2:])), 10), "= I^1", round(spec.i_total, 10))
