"""
Period finding with a dephasing first register
==============================================

Factoring 15 with base 7 (period 4) on a 256-value first register.  The
isolated computer hits a good ``c`` half of the time; complete dephasing
spreads the output uniformly and the success rate drops to phi(r)/q.
"""

import numpy as np

from decohere import (
    DecoherenceKernel,
    RegisterSpec,
    ShorInstance,
    SpectralDensity,
    sample_bath,
    shor_distribution,
    shor_distribution_decohered,
    success_probability,
)

inst = ShorInstance(n=15, x=7, q=256)
ideal = shor_distribution(inst)
print("peaks at c =", np.flatnonzero(ideal.probabilities.sum(axis=1) > 1e-12))
print("isolated:", success_probability(ideal, inst).report())
comp = shor_distribution_decohered(inst, DecoherenceKernel.complete())
print("complete:", success_probability(comp, inst).report())

# %%
# In between, couple a small register to a sampled flat bath.  Distinct
# couplings ``lambda_k = 2**k`` give every register value its own ``xi``.
small = ShorInstance(n=15, x=7, q=16)
bath = sample_bath(SpectralDensity.flat(0.5, 50.0), 400)
spec = RegisterSpec([2.0 ** k for k in range(4)])
for t in (0.0, 0.02, 0.05, 0.1, 0.2, 1.0):
    k = DecoherenceKernel.two_level(bath, t, spec=spec)
    s = success_probability(shor_distribution_decohered(small, k), small).probability
    print(f"t={t:4.2f}  success={s:.4f}")
