"""Sampling estimates against exact counts, then longer walks than enumeration can reach.

Run: python3 demos/monte_carlo.py
"""

from prudentwalk.montecarlo import SamplerConfig, diffusive_exponent, rosenbluth_estimate
from prudentwalk.walks import build_coeff_table

exact = build_coeff_table(10, 2, 1)
for n in (2, 6, 10):
    r = rosenbluth_estimate(SamplerConfig(2, 1.0, n, 100000, seed=7))
    c = r.c_n_hat
    print(f"n={n}: estimate {c.value:.1f} +- {c.stderr:.1f}, exact {int(exact.totals[n])}, ess {c.ess:.0f}")

# Half-strength penalty. In low dimension the walks swell beyond diffusive
# growth; from d = 6 on the slope of log E|w(n)|^2 against log n is close to 1.
for d in (2, 3, 6):
    rep = diffusive_exponent([8, 16, 32, 64], d=d, lam=0.5, samples=20000, seed=5)
    v = rep.values
    print(f"d={d}: slope {v['slope']:.3f} +- {v['slope_stderr']:.3f}", "(diffusive)" if rep.passed else "(not diffusive)")
