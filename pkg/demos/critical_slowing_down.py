# coding: utf-8

# # Critical slowing down
#
# At beta = n the quadratic part of the potential vanishes and the gap of the
# dynamics closes polynomially. For the Ising case the exponent is -1/2, and
# the renormalized operator picks up a sextic limit whose zero mode survives
# the rescaling.

# In[1]:

import numpy as np

from meanfield_spectra.ising import chain_gap
from meanfield_spectra.measures import magnetization_gap_bound
from meanfield_spectra.potential import ModelParams
from meanfield_spectra.scaling import GapSeries, fit_power_law, regime_report
from meanfield_spectra.schrodinger import limit_operator, solve_polynomial, solve_renormalized


# In[2]:

critical = ModelParams(1, 1.0)
Ns = [1000, 3000, 10000, 30000, 100000]
series = GapSeries.from_estimates(critical, [chain_gap(N, 1.0) for N in Ns])
print(regime_report(series))


# For n = 2 and n = 3 we only have the variance bound, but its exponent tells
# the same story.

# In[3]:

for n in (2, 3):
    p = ModelParams(n, float(n))
    N = np.logspace(2, 5, 7)
    fit = fit_power_law(GapSeries(p, N, [magnetization_gap_bound(p, x) for x in N]))
    print(f"n = {n}: exponent {fit.exponent_or_rate:+.4f}")


# The rescaled renormalized spectrum, E_k / sqrt(N/2), approaches the spectrum
# of the sextic limit operator. The lowest eigenvalue of that operator is zero.

# In[4]:

limit = solve_polynomial(limit_operator(critical, "critical_temperature_n"), k=3).eigenvalues
print("limit:", limit)
for N in (100, 400, 1600, 6400):
    e = solve_renormalized(critical, N, k=3).eigenvalues
    print(N, e / np.sqrt(N / 2))
