"""Why five dimensions: the expected number of mutual seeings of two walks.

Simple random walks from the origin land on a coordinate axis of each other
with probability of order n^(-(d-1)/2). Summed over pairs of times this stays
bounded for d > 5, grows like log T at d = 5 and like a power below.

Run: python3 demos/upper_critical_dimension.py   (about 30 seconds)
"""

from prudentwalk.fourier import axis_mass
from prudentwalk.montecarlo import mutual_seeing_mc, ucd_heuristic

for d in (2, 3, 4):
    print(f"d={d}: axis mass at n=1,2,3:", [str(axis_mass(n, d)) for n in (1, 2, 3)])

rep = ucd_heuristic(2048, (4, 5, 6))
for d, v in rep.values["dimensions"].items():
    S = v["S_float"]
    print(f"d={d}: S(T) at T=" + ", ".join(f"{t}: {s:.4f}" for t, s in S.items()),
          "| check:", "PASS" if rep.values["checks"][d] else "FAIL")

exact = ucd_heuristic(32, (5,)).values["dimensions"]["5"]["S_float"]["32"]
mc = mutual_seeing_mc(5, 32, 20000, seed=11)
print(f"d=5, T=32: exact {exact:.4f}, Monte Carlo {mc.value:.4f} +- {mc.stderr:.4f}")
