# coding: utf-8

# # Hardy-type constants versus the true gap
#
# On the line, the spectral gap of a one-dimensional diffusion is pinned
# between B/2 and 4B, with B the Muckenhoupt constant of the measure. The
# entropy analogue D controls the log-Sobolev constant. Both are cheap
# one-dimensional sups, so they are a good sanity check for the eigensolver.

# In[1]:

import numpy as np

from meanfield_spectra.funcineq import K1, ineq_constants, sandwich_check, transfer_constants
from meanfield_spectra.potential import ModelParams
from meanfield_spectra.schrodinger import solve_renormalized


# In[2]:

cases = [(0.5, 0.0, 100), (2.0, 1.0, 200), (2.0, 0.0, 100), (3.0, 0.3, 150)]
for beta, h, N in cases:
    rep = sandwich_check(N, ModelParams(1, beta, h))
    print(f"beta={beta:<4} h={h:<4} N={N:<4} B/2={rep.B / 2:.4e}  1/gap={rep.c:.4e}  "
          f"4B={4 * rep.B:.4e}  {'ok' if rep.passed else 'VIOLATED'}")


# In the double well both constants grow at the rate set by the barrier.

# In[3]:

p = ModelParams(1, 2.0)
for N in (50, 100, 200, 400):
    c = ineq_constants(N, p)
    print(f"N={N:4d}  log B / N = {c.log_B / N:.4f}  log D / N = {c.log_D / N:.4f}")


# The log-Sobolev side: K1 (D0 + D1) bounds the LSI constant, which in turn
# bounds the Poincare constant.

# In[4]:

c = ineq_constants(100, p)
print("LSI bound", K1 * (c.D0 + c.D1), ">= 4B", 4 * c.B)


# Finally, transfer a renormalized gap back to the spin system.

# In[5]:

strong = ModelParams(1, 2.0, 1.0)
for N in (100, 200, 400, 800):
    lam = solve_renormalized(strong, N).gap
    t = transfer_constants(lam, N, strong)
    print(f"N={N:4d}  SGI {t.sgi:.4f}  LSI {t.lsi:.4f}")
