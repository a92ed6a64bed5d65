"""
When does repetition rescue a randomized algorithm?
===================================================

With one-try success ``f(N)`` and ``p(ln N)`` repetitions, the failure rate
is ``(1 - f)**p``.  ``f = 1/(3 ln N)`` with ``p = 3 ln N`` tends to ``1/e``, so
polynomially many repeats suffice.  ``f = 1/N`` is hopeless for any polynomial.
"""

from decohere import EfficiencySpec, classify_efficiency

print(classify_efficiency(EfficiencySpec.reciprocal_log(3.0, [0.0, 3.0])).report())
for degree in (1, 3, 6):
    poly = [0.0] * degree + [1.0]
    print(f"1/N, degree {degree}:",
          classify_efficiency(EfficiencySpec.reciprocal(poly)).report())
