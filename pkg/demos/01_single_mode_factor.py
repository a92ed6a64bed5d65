"""
Decoherence factor of one bath mode
===================================

A two-level bath mode driven by a register coupling eigenvalue ``xi`` evolves
with ``exp[-i(w s3 + xi g s2) t]``.  Two register labels with different ``xi``
leave the mode in two different states; their overlap is the factor that
multiplies the corresponding off-diagonal element of the register density
matrix.
"""

import numpy as np

from decohere import BathMode, ThermalState, factor_two_level_exact
from decohere.decoherence import factor_two_level_thermal, factor_weak_coupling

mode = BathMode(omega=1.0, g=0.1)
t = np.linspace(0, 2 * np.pi, 9)

# %%
# The exact factor is periodic with period pi / Omega, Omega = sqrt(xi^2 g^2 + w^2).
# For ``xi = +-2`` it is real and dips to ``1 - 2 sin^2(theta)``, tan(theta) = 2g/w.
exact = factor_two_level_exact(mode, 2.0, -2.0, t)

# %%
# The second-order form agrees to O(g^4) in modulus and returns to 1 at
# ``w t = k pi``, where the exact one only comes close.
weak = factor_weak_coupling(mode, 2.0, -2.0, t)

print(f"{'t':>8} {'|F| exact':>12} {'|F| weak':>12}")
for row in zip(t, np.abs(exact), np.abs(weak)):
    print("%8.4f %12.8f %12.8f" % row)

# %%
# Temperature enters only through the imaginary part: the real part of the
# exact thermal factor is the same at any beta.
for beta in (np.inf, 1.0, 0.1):
    F = factor_two_level_thermal(mode, 2.0, 0.0, 3.0, ThermalState(beta))
    print(f"beta={beta:<5} F={F:.10f}")
