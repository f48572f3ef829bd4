# coding: utf-8

# # Spectra of the limit operators
#
# Writes the two eigenvalue tables that summarise the semiclassical limits:
# the inflection operator as a function of beta, and the sextic operator as
# a function of its coupling. Output goes to CSV files next to this script
# (or wherever OUTDIR points).

# In[1]:

import os
from pathlib import Path

import numpy as np

from meanfield_spectra.io import TableWriter
from meanfield_spectra.schrodinger import s1_figure, sop_figure

outdir = Path(os.environ.get("OUTDIR", Path(__file__).parent))


# The inflection operator is only defined above the critical temperature,
# so the grid starts just above beta = 1.

# In[2]:

betas = np.linspace(1.05, 6.0, 40)
with open(outdir / "inflection_spectrum.csv", "w") as fh:
    w = TableWriter(fh, ("beta", "e1", "e2", "e3", "e4", "e5"))
    for row in sop_figure(betas, k=5):
        w.write(row)
    w.close()


# The sextic family keeps its zero mode for every coupling; the gap above it
# grows with the coupling.

# In[3]:

couplings = np.logspace(0, 2, 30)
rows = s1_figure(couplings, k=5)
with open(outdir / "sextic_spectrum.csv", "w") as fh:
    w = TableWriter(fh, ("coupling", "e1", "e2", "e3", "e4", "e5"))
    for row in rows:
        w.write(row)
    w.close()

print("largest |e1|:", max(abs(r[1]) for r in rows))
print("wrote", outdir / "inflection_spectrum.csv", "and", outdir / "sextic_spectrum.csv")
