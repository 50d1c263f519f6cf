# Demographic parity of two small hiring programs.
#
# Each program is a WMI problem whose query is the hiring decision; the
# ratio P(hire | minority) / P(hire | majority) is four WMI calls.

from sawmi import bundled
from sawmi.fairness import fairness_ratio

for name in ("fair", "unfair"):
    problem = bundled.load(name)
    runs = [fairness_ratio(problem, samples=100_000, seed=s) for s in range(3)]
    mean = sum(r["ratio"] for r in runs) / len(runs)
    print(f"{name:>6}: ratio {mean:.3f} ->", "fair" if mean > 0.9 else "unfair")
    for r in runs:
        print(f"        minority {r['p_hire_minority']:.3f}  majority {r['p_hire_majority']:.3f}")
