"""The lace expansion reproduces the walk counts exactly.

Expansion coefficients are computed twice, once by summing over laces and once
by inverting the walk generating function, and then fed back into the
convolution recursion. Every residual is an exact zero.

Run: python3 demos/lace_identity.py
"""

from fractions import Fraction

from prudentwalk.laces import count_laces, pi_table_direct, pi_table_via_inversion, verify_expansion_identity
from prudentwalk.walks import build_coeff_table

print("laces on [0, n] with N edges:")
for n in range(1, 7):
    print(f"  n={n}:", [count_laces(N, n) for N in range(1, n + 1)])

d, lam, n_max = 2, Fraction(1, 2), 6
table = build_coeff_table(n_max, d, lam)
direct = pi_table_direct(n_max, n_max, d, lam)
inverted = pi_table_via_inversion(table)

signed = direct.signed()
agree = all(signed.get(k, 0) == inverted.get(k, 0) for k in set(signed) | set(inverted))
print("lace sums agree with inversion:", agree)
for n in range(2, n_max + 1):
    total = sum((v for (m, _), v in signed.items() if m == n), Fraction(0))
    print(f"  sum_x pi_{n}(x) = {total}")

report = verify_expansion_identity(table, direct)
print("identity:", "PASS" if report.passed else "FAIL", report.values)

# Dropping lace classes with more than two edges breaks exactness; the
# check falls back to a residual bound.
truncated = pi_table_direct(n_max, 2, d, lam)
report = verify_expansion_identity(table, truncated)
print("with N <= 2 only:", "PASS" if report.passed else "FAIL", report.values["max_abs_residual"],
      "<=", report.values["residual_bound"])
