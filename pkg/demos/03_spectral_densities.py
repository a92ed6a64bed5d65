"""
Continuum baths: linear dephasing and the Ohmic divergence
==========================================================

In the weak-coupling continuum limit the exponent ``S(t)`` of a pair with
``xi = +-1`` is an integral over the spectral density.  A flat density gives
``S = 4 gamma t`` (exponential decay with ``t_d = 1/(4 gamma)``); an Ohmic one
gives an exponent that grows with the frequency cutoff.
"""

import numpy as np

from decohere import SpectralDensity, estimate_decoherence_time, s_integral
from decohere.decoherence import discrete_s
from decohere.environment import sample_bath

flat = SpectralDensity.flat(gamma=0.5, cutoff=1e3)
t = np.linspace(0.01, 5, 40)
S = s_integral(flat, t)
fit = estimate_decoherence_time(t, np.exp(-S))
print(f"flat: rate={fit.rate:.5f} (4 gamma = 2), t_d={fit.t_d:.5f}")

# %%
# A finite sampled bath follows the continuum until its recurrence time
# ``2 pi / d_omega``.
bath = sample_bath(flat, 20000)
for ti, si, di in zip(t[::8], S[::8], discrete_s(bath, t[::8])):
    print(f"t={ti:5.2f}  S={si:9.5f}  S_discrete={di:9.5f}")

# %%
# For the Ohmic density the exponent at fixed t tracks the cutoff.
for cutoff in (1e2, 1e3, 1e4):
    S1 = s_integral(SpectralDensity.ohmic(eta=0.1, cutoff=cutoff), 1.0)
    print(f"ohmic cutoff={cutoff:8.0f}  S(1)={S1:10.4f}  S/cutoff={S1 / cutoff:.5f}")
