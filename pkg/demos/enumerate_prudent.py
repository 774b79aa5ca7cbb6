"""Count prudent and weakly prudent walks exactly and look at their growth.

Run: python3 demos/enumerate_prudent.py
"""

from fractions import Fraction

from prudentwalk.series import mu_estimate
from prudentwalk.walks import build_coeff_table, endpoint_statistics

# Strict prudence on the square lattice. The totals are integers.
strict = build_coeff_table(12, 2, 1)
print("prudent walks on Z^2:", [int(c) for c in strict.totals])

est = mu_estimate(strict)
print("one-step ratios:", ", ".join(f"{float(r):.4f}" for r in est.ratios))
print(f"extrapolated growth constant: {est.extrapolated:.4f} (must lie in [1, 3])")

# A softer penalty: each seeing pair costs a factor 1/2. Totals become rationals.
soft = build_coeff_table(8, 2, Fraction(1, 2))
print("weighted totals at lambda=1/2:", [str(c) for c in soft.totals])

# Endpoint spread grows roughly like sqrt(n) for both.
for n in (4, 8):
    a = endpoint_statistics(strict, n).moment
    b = endpoint_statistics(soft, n).moment
    print(f"n={n}: rms end-to-end distance {a:.3f} (prudent) vs {b:.3f} (lambda=1/2)")
