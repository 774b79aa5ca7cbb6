"""Bootstrap diagnostics comparing the walk transform with a matched random walk.

Run: python3 demos/fourier_bootstrap.py
"""

from prudentwalk.fourier import FourierGrid, bootstrap_functions, g_hat_truncated, smoothed_axis_closed_forms
from prudentwalk.walks import build_coeff_table

# p(z) is matched so both transforms agree at k = 0, which pins f2 at 1 or above.
table = build_coeff_table(8, 2, 1)
for z in (0.05, 0.1, 0.15, 0.2):
    b = bootstrap_functions(table, z, FourierGrid(2, 32), FourierGrid(2, 16))
    print(f"z={z}: chi={b.chi:.4f} f1={b.f1:.3f} f2={b.f2:.4f} f3={b.f3:.4f}")

print("G_hat at k=0 and k=(pi, 0):", g_hat_truncated(table, 0.1, [[0.0, 0.0], [3.141592653589793, 0.0]]))

# Transform of the Gaussian-damped axis indicator: the direct lattice sum
# against the two closed forms.
for R in (1.0, 4.0, 16.0):
    forms = smoothed_axis_closed_forms(R, 0.5, 3)
    print(f"R={R}: " + ", ".join(f"{k}={v:.6f}" for k, v in forms.items()))
