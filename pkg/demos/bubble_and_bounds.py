"""Truncated bubble diagram and the audit of the one- and two-lace bounds.

Run: python3 demos/bubble_and_bounds.py
"""

from fractions import Fraction

from prudentwalk.laces import pi_table_direct
from prudentwalk.series import SeriesQuery, bound_audit, bubble_truncated, displacement_diagram
from prudentwalk.walks import build_coeff_table

# B * d should stay of order one as the dimension grows.
for d in (2, 3, 4, 5):
    q = SeriesQuery(build_coeff_table(6, d, 1), 0.8 / (2 * d))
    B = bubble_truncated(q)
    print(f"d={d}: B = {B.value:.4f} (+ tail <= {B.tail_allowance:.2e}), B*d = {B.value * d:.3f}, witness {B.y_witness}")

# The displacement diagram vanishes quadratically in k.
q = SeriesQuery(build_coeff_table(10, 2, 1), 0.1)
for k in (0.4, 0.2, 0.1, 0.05):
    Y = displacement_diagram(q, [k, 0.0])
    print(f"|k|={k:<5} displacement / |k|^2 = {Y.value / k**2:.5f}")

# Audit at z = 1/(4d): a FAIL would refute the bound, a PASS is consistent with it.
for d in (2, 3):
    for lam in (Fraction(1, 2), Fraction(1)):
        q = SeriesQuery(build_coeff_table(8, d, lam), 1 / (4 * d))
        pi = pi_table_direct(8, 2, d, lam)
        for N in (1, 2):
            rep = bound_audit(q, pi, N)
            worst = max(c["lhs"] / c["rhs_upper"] for c in rep.values["checks"])
            print(f"d={d} lambda={lam} N={N}: {'PASS' if rep.passed else 'FAIL'} (largest lhs/rhs {worst:.3f})")
