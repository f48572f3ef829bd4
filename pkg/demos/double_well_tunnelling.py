# coding: utf-8

# # Tunnelling time of the mean-field Ising model
#
# Below the critical temperature the magnetization has two wells. Glauber
# dynamics has to climb the barrier between them, so the spectral gap decays
# like exp(-N * depth). Here we watch that happen on the exact birth-death
# chain of the magnetization and compare the fitted rate with the depth of the
# renormalized potential.

# In[1]:

import numpy as np

from meanfield_spectra.ising import chain_gap, full_gap
from meanfield_spectra.potential import ModelParams, critical_points, well_depth
from meanfield_spectra.scaling import GapSeries, fit_exponential_rate


# The landscape first. At beta = 2 and no field there are two symmetric minima
# and a maximum at the origin.

# In[2]:

params = ModelParams(1, 2.0, 0.0)
for cp in critical_points(params):
    print(f"{cp.kind:>8s}  phi = {cp.coordinate:+.6f}  V = {cp.value:.6f}")
depth = well_depth(params)
print("well depth:", depth)


# For small N we can afford the full 2^N state space. The magnetization chain
# must reproduce its gap, since the slowest mode is a function of the total spin.

# In[3]:

for N in (4, 6, 8, 10):
    print(N, full_gap(N, 2.0).gap, chain_gap(N, 2.0).gap)


# Large N. The gaps underflow double precision quickly, which is why the chain
# reports log_gap.

# In[4]:

Ns = [200, 400, 800, 1600, 3200]
estimates = [chain_gap(N, 2.0) for N in Ns]
for est in estimates:
    print(f"N = {est.N:5d}  log gap = {est.log_gap:12.4f}  via {est.detail}")

fit = fit_exponential_rate(GapSeries.from_estimates(params, estimates))
print(f"fitted rate {fit.exponent_or_rate:.5f} vs depth {depth:.5f}")


# A small field tilts the wells. The escape from the shallow well now sets the
# rate, and the depth that matters is measured from the global minimum.

# In[5]:

tilted = ModelParams(1, 2.0, 0.3)
series = GapSeries.from_estimates(tilted, [chain_gap(N, 2.0, 0.3) for N in Ns])
print("rate", fit_exponential_rate(series).exponent_or_rate, "depth", well_depth(tilted))
